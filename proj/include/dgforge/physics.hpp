#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dgforge/codegen.hpp"
#include "dgforge/executor.hpp"
#include "dgforge/fluxdsl.hpp"
#include "dgforge/layout.hpp"
#include "dgforge/mesh.hpp"
#include "dgforge/refelem.hpp"

namespace dgforge {

enum class BoundaryKind { pec, inflow, outflow };

/// Exact or boundary data: all field components at x, time t.
using FieldFunction = std::function<std::vector<double>(const Point& x, double t)>;

/// A linear hyperbolic system  du/dt = sum of coef * du_field/dx_axis,
/// coupled through the numerical-flux bracket `flux`.
struct SystemDefinition {
  std::string name;
  std::vector<std::string> fields;            // flattened components
  std::vector<DerivativeTerm> volume_terms;
  flux::FluxSpec flux;
  std::array<double, 3> velocity{0, 0, 0};    // advection only
  double alpha = 1.0;

  int num_fields() const { return static_cast<int>(fields.size()); }

  /// Maxwell: "pec" and the default tag are PEC. Advection: "inflow",
  /// "outflow"; the default tag is inflow where a.n < 0, outflow otherwise.
  BoundaryKind boundary_kind(const std::string& tag, const Point& normal) const;
};

/// Vacuum Maxwell, dE/dt = curl H, dH/dt = -curl E. alpha = 0 central, 1 upwind.
SystemDefinition maxwell_system(double alpha = 1.0);
SystemDefinition advection_system(const std::array<double, 3>& velocity, double alpha = 1.0);

/// Exterior trace for a boundary face node; `data` supplies inflow values.
std::vector<double> ghost_trace(const SystemDefinition& system, const std::string& tag,
                                const std::vector<double>& interior, const Point& normal, const Point& x, double t,
                                const FieldFunction& data = {});

/// Named test problem: system plus exact solution (also used as inflow data).
struct Solution {
  std::string name;
  SystemDefinition system;
  FieldFunction exact;
  double default_t_final = 0.1;
};

Solution make_solution(const std::string& name, double alpha = 1.0);
std::vector<std::string> solution_names();

/// Gather-partition capacity used to order face slots.
inline constexpr int kGatherBlockCapacity = 24;

/// Mesh-dependent operator data shared by every system.
struct Discretization {
  ReferenceElement refel;
  Mesh mesh;
  FaceConnectivity conn;
  GeometricFactors geo;
  MicroblockLayout layout;
  MicroblockLayout facial;
  FaceIndexTables tables;
  GatherPartition partition;
  double h_min = 0.0;

  // Gather slots: interior pairs in partition-block order, then boundary faces.
  std::vector<int> pair_order;
  std::vector<std::int64_t> idx_m, idx_p, out_m, out_p;  // nfp entries per slot
  std::vector<double> meta;                               // kGatherMetaWords per slot

  int order() const { return refel.order; }
  int num_pairs() const { return static_cast<int>(conn.interior_pairs.size()); }
  int num_boundary() const { return static_cast<int>(conn.boundary_faces.size()); }
  std::int64_t num_slots() const { return num_pairs() + num_boundary(); }
};

Discretization discretize(Mesh mesh, int order, int granule = kDefaultGranule, int km_max = kDefaultMicroblockMax);

/// dt = C * h_min / N^2.
struct StepController {
  double dt = 0.0;
  double dt_factor = 0.25;
  double h_min = 0.0;

  static StepController make(const Discretization& disc, double dt_factor);
};

/// One padded buffer per field component.
struct FieldState {
  std::vector<BufferPtr> fields;
  double t = 0.0;
};

/// Tuned plan per stage; an absent stage runs its degenerate plan.
struct StagePlans {
  std::optional<KernelPlan> differentiation, lift, gather;
};

struct OperatorOptions {
  Precision precision = Precision::f64;
  std::string dump_dir;        // write every generated kernel here when set
  bool poison_padding = false; // fill padding words with NaN
  bool profile_stages = false; // synchronize and time every stage launch
  /// Test hook applied to every generated source before compilation.
  std::function<void(const KernelPlan&, KernelSource&)> source_hook;
};

/// Analytic work model of one stage.
struct StageCounts {
  std::uint64_t flops = 0;
  std::uint64_t bytes = 0;
  std::uint64_t launches = 0;
  double seconds = 0.0;        // only with profile_stages
};

/// Per-evaluation flop and byte model of each stage.
struct WorkModel {
  std::uint64_t diff_flops = 0, diff_bytes = 0;
  std::uint64_t lift_flops = 0, lift_bytes = 0;
  std::uint64_t gather_flops = 0, gather_bytes = 0;
  std::uint64_t assembly_flops = 0, assembly_bytes = 0;  // one axpby of one field
};

WorkModel work_model(const Discretization& disc, const SystemDefinition& system, Precision precision);

/// The semidiscrete DG operator built from generated kernels.
class DgOperator {
 public:
  DgOperator(Backend& backend, const Discretization& disc, const SystemDefinition& system, const StagePlans& plans,
             const OperatorOptions& options, FieldFunction boundary_data = {});

  FieldState allocate_state();
  /// Host values per field in layout order (padding included).
  void upload(FieldState& state, const std::vector<std::vector<double>>& values);
  std::vector<std::vector<double>> download(const FieldState& state);
  /// Nodal interpolation of f at time t.
  std::vector<std::vector<double>> interpolate(const FieldFunction& f, double t) const;

  void rhs(const FieldState& u, double t, FieldState& out);
  /// One rhs stage in isolation: differentiation and gather read u and fill
  /// the internal volume / facial buffers, lift reads those and writes out.
  void run_stage(Stage stage, const FieldState& u, FieldState& out);
  /// Internal volume (differentiation) or facial (gather) buffers.
  std::vector<std::vector<double>> stage_buffers(Stage stage);
  /// out = a*x + b*y, field by field. out must not alias x or y.
  void axpby(double a, const FieldState& x, double b, const FieldState& y, FieldState& out);

  /// 1/2 sum_k J_k sum_fields u_k^T M u_k.
  double energy(const FieldState& state);
  /// Mass-weighted L2 norm of (state - f(t)) over all fields.
  double l2_error(const FieldState& state, const FieldFunction& f, double t);

  const KernelPlan& plan(Stage stage) const;
  const std::map<Stage, StageCounts>& counts() const { return counts_; }
  void reset_counts();
  const WorkModel& model() const { return model_; }
  /// True if every padding word of every buffer is still NaN (poison mode).
  bool padding_intact();
  Backend& backend() { return backend_; }
  const Discretization& discretization() const { return disc_; }
  const SystemDefinition& system() const { return system_; }
  double current_time() const { return time_; }

 private:
  BufferPtr make_buffer(const MicroblockLayout& layout);
  BufferPtr upload_real(const std::vector<double>& v);
  BufferPtr upload_int(const std::vector<std::int64_t>& v);
  void update_ghosts(double t);
  void launch(Stage stage, const KernelPtr& kernel, std::int64_t groups, std::vector<KernelArg> args);

  Backend& backend_;
  const Discretization& disc_;
  SystemDefinition system_;
  OperatorOptions options_;
  FieldFunction boundary_data_;
  ScalarType type_;
  std::map<Stage, KernelPlan> plans_;
  KernelPtr diff_kernel_, lift_kernel_, gather_kernel_, axpby_kernel_;
  flux::LoweredFlux lowered_;
  WorkModel model_;

  BufferPtr geo_, invj_, dmat_, lmat_, idx_m_, idx_p_, out_m_, out_p_, meta_, bscale_;
  std::vector<BufferPtr> vol_, facial_, ghost_;
  std::vector<std::pair<BufferPtr, MicroblockLayout>> owned_;  // for poison checks
  std::vector<int> inflow_faces_;  // boundary indices evaluated on the host each rhs
  std::vector<double> ghost_host_;
  std::map<Stage, StageCounts> counts_;
  double time_ = 0.0;
};

using RhsFunction = std::function<void(const FieldState& u, double t, FieldState& out)>;

/// Scratch states for rk4_step.
struct Rk4Workspace {
  FieldState k, stage, acc_a, acc_b;
  static Rk4Workspace make(DgOperator& op);
};

/// Classical RK4; stage combinations run through the assembly kernel.
/// `rhs` defaults to the operator's own.
void rk4_step(DgOperator& op, FieldState& u, double dt, Rk4Workspace& work, const RhsFunction& rhs = {});

/// Host-side NaN check on data words; returns false if any field holds NaN.
bool state_is_finite(DgOperator& op, const FieldState& state);

}  // namespace dgforge
