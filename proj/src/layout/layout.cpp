#include "dgforge/layout.hpp"

#include "dgforge/error.hpp"

namespace dgforge {

namespace {

int round_up(int n, int granule) { return (n + granule - 1) / granule * granule; }

MicroblockLayout make_layout(int np, int km, int granule, int num_elements) {
  MicroblockLayout l;
  l.np = np;
  l.elements_per_block = km;
  l.granule = granule;
  l.padded_size = round_up(km * np, granule);
  l.num_elements = num_elements;
  l.num_microblocks = (num_elements + km - 1) / km;
  return l;
}

}  // namespace

std::int64_t MicroblockLayout::dof_index(int k, int i) const {
  if (k < 0 || k >= num_elements || i < 0 || i >= np) {
    throw Error("dof index (" + std::to_string(k) + ", " + std::to_string(i) + ") out of range");
  }
  return static_cast<std::int64_t>(k / elements_per_block) * padded_size +
         static_cast<std::int64_t>(k % elements_per_block) * np + i;
}

bool MicroblockLayout::is_data_word(std::int64_t w) const {
  if (w < 0 || w >= total_words()) return false;
  const std::int64_t block = w / padded_size;
  const std::int64_t within = w % padded_size;
  if (within >= static_cast<std::int64_t>(elements_per_block) * np) return false;
  return block * elements_per_block + within / np < num_elements;
}

MicroblockLayout choose_microblock(int np, int granule, int km_max, int num_elements) {
  if (np < 1 || granule < 1 || km_max < 1) throw Error("invalid microblock parameters");
  int best = 1;
  // Compare padding fractions pad_a/size_a < pad_b/size_b exactly in integers.
  long best_pad = round_up(np, granule) - np, best_size = round_up(np, granule);
  for (int km = 2; km <= km_max; ++km) {
    const long size = round_up(km * np, granule);
    const long pad = size - static_cast<long>(km) * np;
    if (pad * best_size < best_pad * size) {
      best = km;
      best_pad = pad;
      best_size = size;
    }
  }
  return make_layout(np, best, granule, num_elements);
}

MicroblockLayout derived_layout(const MicroblockLayout& base, int words_per_element) {
  return make_layout(words_per_element, base.elements_per_block, base.granule, base.num_elements);
}

FaceIndexTables face_dof_gather_indices(const MicroblockLayout& layout, const ReferenceElement& refel,
                                        const FaceConnectivity& conn) {
  const int nfp = refel.nfp;
  const MicroblockLayout facial = facial_layout(layout, nfp);
  FaceIndexTables t;
  t.nfp = nfp;
  for (const auto& p : conn.interior_pairs) {
    for (int j = 0; j < nfp; ++j) {
      const int q = p.node_permutation[j];
      t.pair_interior.push_back(layout.dof_index(p.elem_m, refel.face_node_index[p.face_m][j]));
      t.pair_exterior.push_back(layout.dof_index(p.elem_p, refel.face_node_index[p.face_p][q]));
      t.pair_facial_m.push_back(facial.dof_index(p.elem_m, p.face_m * nfp + j));
      t.pair_facial_p.push_back(facial.dof_index(p.elem_p, p.face_p * nfp + q));
    }
  }
  for (const auto& b : conn.boundary_faces) {
    for (int j = 0; j < nfp; ++j) {
      t.boundary_interior.push_back(layout.dof_index(b.elem, refel.face_node_index[b.face][j]));
      t.boundary_facial.push_back(facial.dof_index(b.elem, b.face * nfp + j));
    }
  }
  return t;
}

}  // namespace dgforge
