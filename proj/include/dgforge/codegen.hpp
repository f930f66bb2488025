#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dgforge/executor.hpp"
#include "dgforge/fluxdsl.hpp"
#include "dgforge/layout.hpp"
#include "dgforge/refelem.hpp"

namespace dgforge {

enum class Stage { differentiation, lift, gather, assembly };
enum class Storage { stream_all, matrix_in_shared, fields_in_shared, row_partition_in_shared, mixed };
enum class Precision { f32, f64 };

const char* stage_name(Stage s);
const char* storage_name(Storage s);
const char* precision_name(Precision p);
Stage parse_stage(const std::string& s);
Storage parse_storage(const std::string& s);
Precision parse_precision(const std::string& s);

inline int word_bytes(Precision p) { return p == Precision::f32 ? 4 : 8; }
inline ScalarType scalar_type(Precision p) { return p == Precision::f32 ? ScalarType::f32 : ScalarType::f64; }

/// Microblocks per workgroup: w_s in sequence, w_i in-line per lane, w_p across lanes.
struct WorkDecomposition {
  int ws = 1, wi = 1, wp = 1;

  int microblocks() const { return ws * wi * wp; }
  bool operator==(const WorkDecomposition&) const = default;
};

struct KernelPlan {
  Stage stage = Stage::differentiation;
  WorkDecomposition decomposition;
  Storage storage = Storage::stream_all;
  int faces_per_block = 1;  // gather only
  bool unroll = false;
  Precision precision = Precision::f64;
  int order = 1;
  int fields = 1;           // field components processed per launch

  /// Stable, unique serialization, e.g. "differentiation/N3/f64/F6/ws1.wi1.wp1/stream_all/loop".
  std::string id() const;
  static KernelPlan parse(const std::string& id);

  bool operator==(const KernelPlan&) const = default;
};

KernelPlan degenerate_plan(Stage stage, int order, Precision precision, int fields);

struct PlanLimits {
  std::int64_t onchip_bytes = 48 * 1024;
  int max_lanes = 1024;
  int max_microblocks = 64;  // w_s * w_i * w_p
  std::vector<int> ws_values{1, 2, 4};
  std::vector<int> wi_values{1, 2, 4};
  std::vector<int> wp_values{1, 2, 4};
  std::vector<int> faces_per_block{1, 2, 4, 8, 16, 32, 64};
  std::vector<bool> unroll_values{false, true};
  bool include_mixed = false;
};

/// Admissible plans in deterministic order; always includes the degenerate plan.
std::vector<KernelPlan> enumerate_plans(Stage stage, int order, Precision precision, int fields,
                                        const MicroblockLayout& layout, const PlanLimits& limits = {});

/// Shared-memory bytes the plan's kernel declares.
std::int64_t estimate_onchip(const KernelPlan& plan, const MicroblockLayout& layout);

/// Lanes per workgroup of the plan's kernel.
int plan_lanes(const KernelPlan& plan, const MicroblockLayout& layout);

/// Workgroups needed to cover the mesh.
std::int64_t plan_groups(const KernelPlan& plan, const MicroblockLayout& layout, std::int64_t face_slots = 0);

/// Rows per pass of the row-partitioned strategy.
inline int row_partition_rows(int np) { return (np + 1) / 2; }

/// Physical derivative term: out[out] += coef * d(field)/dx_axis.
struct DerivativeTerm {
  int out;
  int field;
  int axis;
  double coef;
};

/// Differentiation kernel contract:
///   params: u[0..F), out[0..O), geo (9 words per element, drdx[3*mu+nu]),
///           [dmat (3*np*np, row-major D^r, D^s, D^t) and int np unless unrolled], int K.
/// Lift kernel contract:
///   params: facial[0..F) (facial layout), vol[0..F), out[0..F), invj (1 per element),
///           [lmat (np x 4nfp) and int np, int nw unless unrolled], int K.
struct LocalKernelSpec {
  int num_inputs = 1;
  int num_outputs = 1;
  std::vector<DerivativeTerm> terms;   // differentiation only
  /// Test hook: replaces the reference matrices baked into the kernel.
  std::optional<std::array<Matrix, 3>> diff_override;
  std::optional<Matrix> lift_override;
};

KernelSource generate_local_kernel(const KernelPlan& plan, const ReferenceElement& refel,
                                   const MicroblockLayout& layout, const LocalKernelSpec& spec);

/// Matrix words a non-unrolled local kernel reads from its matrix buffer.
std::vector<double> local_matrix_words(Stage stage, const ReferenceElement& refel, const LocalKernelSpec& spec);

/// Gather kernel contract:
///   params: u[0..F), facial[0..F), ghost[0..F), idx_m, idx_p, out_m, out_p (int, nfp per slot),
///           meta (8 words per slot: n-, sJ-, n+, sJ+), bscale (F per boundary slot),
///           int n_interior, int n_slots.
/// Slots [0, n_interior) are face pairs; the rest are boundary faces whose
/// exterior trace is bscale * interior + ghost[idx_p].
inline constexpr int kGatherMetaWords = 8;

KernelSource generate_gather_kernel(const KernelPlan& plan, const flux::LoweredFlux& flux, int nfp);

/// out = a*x + b*y over data words only. params: x, y, out, a, b, int K.
KernelSource generate_assembly_kernel(const MicroblockLayout& layout, Precision precision);
inline constexpr int kAssemblyLanes = 64;

/// Writes source to dir/<content hash>.dgk; returns the path.
std::string dump_kernel(const KernelSource& source, const std::string& dir);

}  // namespace dgforge
