#include <set>

#include "dgforge/physics.hpp"

namespace dgforge {

// Flops count real add/sub/mul/neg/abs; bytes count words moved to or from
// global memory (index words at 8 bytes), matrices excluded.
WorkModel work_model(const Discretization& disc, const SystemDefinition& system, Precision precision) {
  const std::uint64_t F = system.num_fields();
  const std::uint64_t K = disc.mesh.num_elements();
  const std::uint64_t np = disc.refel.np;
  const std::uint64_t nfp = disc.refel.nfp;
  const std::uint64_t w = word_bytes(precision);
  const std::uint64_t P = disc.num_pairs();
  const std::uint64_t B = disc.num_boundary();

  WorkModel m;
  std::set<std::pair<int, int>> needed;
  std::uint64_t term_cost = 0;
  for (const auto& t : system.volume_terms) {
    needed.insert({t.field, t.axis});
    term_cost += (t.coef == 1.0 || t.coef == -1.0) ? 1 : 2;
  }
  m.diff_flops = K * (F * 6 * np * np + np * (5 * needed.size() + term_cost));
  m.diff_bytes = K * (2 * F * np + 9) * w;

  m.lift_flops = K * F * (2 * np * 4 * nfp + 2 * np);
  m.lift_bytes = (K * F * (4 * nfp + 2 * np) + K) * w;

  const std::uint64_t C = flux::lower(system.flux).flop_count();
  m.gather_flops = P * nfp * (2 * C + 2 * F) + B * nfp * (C + 3 * F);
  m.gather_bytes = P * (nfp * (4 * F * w + 4 * 8) + kGatherMetaWords * w) + B * (nfp * (3 * F * w + 3 * 8) + (4 + F) * w);

  m.assembly_flops = 3 * K * np;
  m.assembly_bytes = 3 * K * np * w;
  return m;
}

}  // namespace dgforge
