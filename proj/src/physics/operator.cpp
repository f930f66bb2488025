#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <set>

#include "dgforge/physics.hpp"

namespace dgforge {

Discretization discretize(Mesh mesh, int order, int granule, int km_max) {
  Discretization d;
  d.refel = build_reference_element(order);
  d.mesh = std::move(mesh);
  d.conn = build_connectivity(d.mesh, d.refel);
  d.geo = compute_geometric_factors(d.mesh, d.refel);
  const int K = d.mesh.num_elements();
  d.layout = choose_microblock(d.refel.np, granule, km_max, K);
  d.facial = facial_layout(d.layout, d.refel.nfp);
  d.tables = face_dof_gather_indices(d.layout, d.refel, d.conn);
  d.partition = greedy_partition(d.conn, K, std::min(kGatherBlockCapacity, K));

  d.h_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) d.h_min = std::min(d.h_min, inscribed_diameter(d.mesh, k));

  std::vector<int> block_of(K, 0);
  for (std::size_t b = 0; b < d.partition.blocks.size(); ++b) {
    for (int k : d.partition.blocks[b]) block_of[k] = static_cast<int>(b);
  }
  d.pair_order.resize(d.conn.interior_pairs.size());
  for (std::size_t i = 0; i < d.pair_order.size(); ++i) d.pair_order[i] = static_cast<int>(i);
  std::stable_sort(d.pair_order.begin(), d.pair_order.end(), [&](int a, int b) {
    return block_of[d.conn.interior_pairs[a].elem_m] < block_of[d.conn.interior_pairs[b].elem_m];
  });

  const int nfp = d.refel.nfp;
  auto push_meta = [&](int k, int f) {
    for (int a = 0; a < 3; ++a) d.meta.push_back(d.geo.normal[k][f][a]);
    d.meta.push_back(d.geo.surface_jacobian[k][f]);
  };
  for (int p : d.pair_order) {
    const auto& pair = d.conn.interior_pairs[p];
    for (int j = 0; j < nfp; ++j) {
      const std::size_t q = static_cast<std::size_t>(p) * nfp + j;
      d.idx_m.push_back(d.tables.pair_interior[q]);
      d.idx_p.push_back(d.tables.pair_exterior[q]);
      d.out_m.push_back(d.tables.pair_facial_m[q]);
      d.out_p.push_back(d.tables.pair_facial_p[q]);
    }
    push_meta(pair.elem_m, pair.face_m);
    push_meta(pair.elem_p, pair.face_p);
  }
  for (int b = 0; b < d.num_boundary(); ++b) {
    const auto& face = d.conn.boundary_faces[b];
    for (int j = 0; j < nfp; ++j) {
      const std::size_t q = static_cast<std::size_t>(b) * nfp + j;
      d.idx_m.push_back(d.tables.boundary_interior[q]);
      d.idx_p.push_back(static_cast<std::int64_t>(q));
      d.out_m.push_back(d.tables.boundary_facial[q]);
      d.out_p.push_back(0);
    }
    push_meta(face.elem, face.face);
    for (int a = 0; a < 4; ++a) d.meta.push_back(0.0);
  }
  return d;
}

namespace {

void warn_degenerate(Stage stage) {
  static std::mutex mutex;
  static std::set<Stage> warned;
  std::lock_guard lock(mutex);
  if (warned.insert(stage).second) {
    std::cerr << "warning: no tuned plan for stage " << stage_name(stage) << "; using the degenerate plan\n";
  }
}

}  // namespace

DgOperator::DgOperator(Backend& backend, const Discretization& disc, const SystemDefinition& system,
                       const StagePlans& plans, const OperatorOptions& options, FieldFunction boundary_data)
    : backend_(backend),
      disc_(disc),
      system_(system),
      options_(options),
      boundary_data_(std::move(boundary_data)),
      type_(scalar_type(options.precision)) {
  const int F = system_.num_fields();
  const int N = disc_.order();
  const auto& refel = disc_.refel;
  const int K = disc_.mesh.num_elements();

  auto pick = [&](Stage stage, const std::optional<KernelPlan>& p) {
    KernelPlan plan = p ? *p : degenerate_plan(stage, N, options_.precision, F);
    if (!p) warn_degenerate(stage);
    if (plan.stage != stage || plan.order != N || plan.precision != options_.precision || plan.fields != F) {
      throw Error("plan " + plan.id() + " does not fit this operator");
    }
    plans_[stage] = plan;
  };
  pick(Stage::differentiation, plans.differentiation);
  pick(Stage::lift, plans.lift);
  pick(Stage::gather, plans.gather);
  plans_[Stage::assembly] = degenerate_plan(Stage::assembly, N, options_.precision, F);

  typecheck(system_.flux);
  lowered_ = flux::lower(system_.flux);
  model_ = work_model(disc_, system_, options_.precision);

  LocalKernelSpec diff_spec;
  diff_spec.num_inputs = F;
  diff_spec.num_outputs = F;
  diff_spec.terms = system_.volume_terms;
  LocalKernelSpec lift_spec;
  lift_spec.num_inputs = F;

  auto build = [&](KernelSource src, Stage stage) {
    if (options_.source_hook) options_.source_hook(plans_[stage], src);
    if (!options_.dump_dir.empty()) dump_kernel(src, options_.dump_dir);
    return backend_.compile(src);
  };
  diff_kernel_ = build(generate_local_kernel(plans_[Stage::differentiation], refel, disc_.layout, diff_spec),
                       Stage::differentiation);
  lift_kernel_ = build(generate_local_kernel(plans_[Stage::lift], refel, disc_.layout, lift_spec), Stage::lift);
  gather_kernel_ = build(generate_gather_kernel(plans_[Stage::gather], lowered_, refel.nfp), Stage::gather);
  axpby_kernel_ = build(generate_assembly_kernel(disc_.layout, options_.precision), Stage::assembly);

  std::vector<double> geo(9 * static_cast<std::size_t>(K)), invj(K);
  for (int k = 0; k < K; ++k) {
    std::copy(disc_.geo.drdx[k].begin(), disc_.geo.drdx[k].end(), geo.begin() + 9 * k);
    invj[k] = 1.0 / disc_.geo.jacobian[k];
  }
  geo_ = upload_real(geo);
  invj_ = upload_real(invj);
  if (!plans_[Stage::differentiation].unroll) {
    dmat_ = upload_real(local_matrix_words(Stage::differentiation, refel, diff_spec));
  }
  if (!plans_[Stage::lift].unroll) lmat_ = upload_real(local_matrix_words(Stage::lift, refel, lift_spec));
  idx_m_ = upload_int(disc_.idx_m);
  idx_p_ = upload_int(disc_.idx_p);
  out_m_ = upload_int(disc_.out_m);
  out_p_ = upload_int(disc_.out_p);
  meta_ = upload_real(disc_.meta);

  const int nb = disc_.num_boundary();
  std::vector<double> bscale(static_cast<std::size_t>(nb) * F, 0.0);
  for (int b = 0; b < nb; ++b) {
    const auto& face = disc_.conn.boundary_faces[b];
    const BoundaryKind kind = system_.boundary_kind(face.tag, disc_.geo.normal[face.elem][face.face]);
    for (int c = 0; c < F; ++c) {
      double s = 1.0;
      if (kind == BoundaryKind::pec) s = c < 3 ? -1.0 : 1.0;
      if (kind == BoundaryKind::inflow) s = 0.0;
      bscale[static_cast<std::size_t>(b) * F + c] = s;
    }
    if (kind == BoundaryKind::inflow) inflow_faces_.push_back(b);
  }
  bscale_ = upload_real(bscale);
  ghost_host_.assign(static_cast<std::size_t>(std::max(nb, 1)) * refel.nfp, 0.0);
  for (int c = 0; c < F; ++c) {
    ghost_.push_back(upload_real(ghost_host_));
    vol_.push_back(make_buffer(disc_.layout));
    facial_.push_back(make_buffer(disc_.facial));
  }
  if (!inflow_faces_.empty()) update_ghosts(0.0);
  reset_counts();
}

BufferPtr DgOperator::upload_real(const std::vector<double>& v) {
  auto b = backend_.allocate(type_, std::max<std::size_t>(v.size(), 1));
  backend_.write(b, v.empty() ? std::vector<double>{0.0} : v);
  return b;
}

BufferPtr DgOperator::upload_int(const std::vector<std::int64_t>& v) {
  auto b = backend_.allocate(ScalarType::i64, std::max<std::size_t>(v.size(), 1));
  backend_.write(b, v.empty() ? std::vector<std::int64_t>{0} : v);
  return b;
}

BufferPtr DgOperator::make_buffer(const MicroblockLayout& layout) {
  std::vector<double> init(layout.total_words(), 0.0);
  if (options_.poison_padding) {
    for (std::int64_t w = 0; w < layout.total_words(); ++w) {
      if (!layout.is_data_word(w)) init[w] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  auto b = upload_real(init);
  owned_.emplace_back(b, layout);
  return b;
}

FieldState DgOperator::allocate_state() {
  FieldState s;
  for (int c = 0; c < system_.num_fields(); ++c) s.fields.push_back(make_buffer(disc_.layout));
  return s;
}

void DgOperator::upload(FieldState& state, const std::vector<std::vector<double>>& values) {
  if (values.size() != state.fields.size()) throw Error("upload: wrong field count");
  const auto& layout = disc_.layout;
  for (std::size_t c = 0; c < values.size(); ++c) {
    std::vector<double> v = values[c];
    if (static_cast<std::int64_t>(v.size()) != layout.total_words()) throw Error("upload: wrong field length");
    for (std::int64_t w = 0; w < layout.total_words(); ++w) {
      if (!layout.is_data_word(w)) v[w] = options_.poison_padding ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    }
    backend_.write(state.fields[c], v);
  }
}

std::vector<std::vector<double>> DgOperator::download(const FieldState& state) {
  std::vector<std::vector<double>> out;
  for (const auto& b : state.fields) out.push_back(backend_.read(b));
  return out;
}

std::vector<std::vector<double>> DgOperator::interpolate(const FieldFunction& f, double t) const {
  const int F = system_.num_fields();
  const auto& layout = disc_.layout;
  std::vector<std::vector<double>> out(F, std::vector<double>(layout.total_words(), 0.0));
  for (int k = 0; k < disc_.mesh.num_elements(); ++k) {
    const Matrix x = physical_nodes(disc_.mesh, disc_.refel, k);
    for (int i = 0; i < disc_.refel.np; ++i) {
      const auto v = f({x(i, 0), x(i, 1), x(i, 2)}, t);
      for (int c = 0; c < F; ++c) out[c][layout.dof_index(k, i)] = v[c];
    }
  }
  return out;
}

void DgOperator::update_ghosts(double t) {
  const int F = system_.num_fields();
  const int nfp = disc_.refel.nfp;
  std::vector<std::vector<double>> host(F, ghost_host_);
  for (int b : inflow_faces_) {
    const auto& face = disc_.conn.boundary_faces[b];
    const Matrix x = physical_nodes(disc_.mesh, disc_.refel, face.elem);
    for (int j = 0; j < nfp; ++j) {
      const int i = disc_.refel.face_node_index[face.face][j];
      const Point p{x(i, 0), x(i, 1), x(i, 2)};
      const auto g = ghost_trace(system_, face.tag, std::vector<double>(F, 0.0), disc_.geo.normal[face.elem][face.face],
                                 p, t, boundary_data_);
      for (int c = 0; c < F; ++c) host[c][static_cast<std::size_t>(b) * nfp + j] = g[c];
    }
  }
  for (int c = 0; c < F; ++c) backend_.write(ghost_[c], host[c]);
}

void DgOperator::launch(Stage stage, const KernelPtr& kernel, std::int64_t groups, std::vector<KernelArg> args) {
  auto& c = counts_[stage];
  c.launches += 1;
  if (groups <= 0) return;
  if (options_.profile_stages) {
    c.seconds += wall_time(backend_, [&] { backend_.launch(kernel, groups, args); });
  } else {
    backend_.launch(kernel, groups, std::move(args));
  }
}

void DgOperator::rhs(const FieldState& u, double t, FieldState& out) {
  if (!inflow_faces_.empty()) update_ghosts(t);
  time_ = t;
  run_stage(Stage::differentiation, u, out);
  run_stage(Stage::gather, u, out);
  run_stage(Stage::lift, u, out);
}

void DgOperator::run_stage(Stage stage, const FieldState& u, FieldState& out) {
  const int F = system_.num_fields();
  const auto& layout = disc_.layout;
  const std::int64_t K = disc_.mesh.num_elements();
  std::vector<KernelArg> args;
  auto& c = counts_[stage];
  switch (stage) {
    case Stage::differentiation:
      for (int f = 0; f < F; ++f) args.push_back(u.fields[f]);
      for (int f = 0; f < F; ++f) args.push_back(vol_[f]);
      args.push_back(geo_);
      if (dmat_) {
        args.push_back(dmat_);
        args.push_back(std::int64_t{disc_.refel.np});
      }
      args.push_back(K);
      launch(stage, diff_kernel_, plan_groups(plans_[stage], layout), std::move(args));
      c.flops += model_.diff_flops;
      c.bytes += model_.diff_bytes;
      break;
    case Stage::gather:
      for (int f = 0; f < F; ++f) args.push_back(u.fields[f]);
      for (int f = 0; f < F; ++f) args.push_back(facial_[f]);
      for (int f = 0; f < F; ++f) args.push_back(ghost_[f]);
      for (const auto& b : {idx_m_, idx_p_, out_m_, out_p_, meta_, bscale_}) args.push_back(b);
      args.push_back(std::int64_t{disc_.num_pairs()});
      args.push_back(disc_.num_slots());
      launch(stage, gather_kernel_, plan_groups(plans_[stage], layout, disc_.num_slots()), std::move(args));
      c.flops += model_.gather_flops;
      c.bytes += model_.gather_bytes;
      break;
    case Stage::lift:
      for (int f = 0; f < F; ++f) args.push_back(facial_[f]);
      for (int f = 0; f < F; ++f) args.push_back(vol_[f]);
      for (int f = 0; f < F; ++f) args.push_back(out.fields[f]);
      args.push_back(invj_);
      if (lmat_) {
        args.push_back(lmat_);
        args.push_back(std::int64_t{disc_.refel.np});
        args.push_back(std::int64_t{4 * disc_.refel.nfp});
      }
      args.push_back(K);
      launch(stage, lift_kernel_, plan_groups(plans_[stage], layout), std::move(args));
      c.flops += model_.lift_flops;
      c.bytes += model_.lift_bytes;
      break;
    case Stage::assembly: throw Error("run_stage: use axpby for assembly");
  }
}

std::vector<std::vector<double>> DgOperator::stage_buffers(Stage stage) {
  std::vector<std::vector<double>> out;
  for (const auto& b : stage == Stage::gather ? facial_ : vol_) out.push_back(backend_.read(b));
  return out;
}

void DgOperator::axpby(double a, const FieldState& x, double b, const FieldState& y, FieldState& out) {
  const std::int64_t groups = plan_groups(plans_[Stage::assembly], disc_.layout);
  for (std::size_t c = 0; c < out.fields.size(); ++c) {
    if (out.fields[c] == x.fields[c] || out.fields[c] == y.fields[c]) throw Error("axpby: output aliases an input");
    std::vector<KernelArg> args{x.fields[c], y.fields[c], out.fields[c], a, b,
                                std::int64_t{disc_.mesh.num_elements()}};
    launch(Stage::assembly, axpby_kernel_, groups, std::move(args));
    counts_[Stage::assembly].flops += model_.assembly_flops;
    counts_[Stage::assembly].bytes += model_.assembly_bytes;
  }
}

namespace {

// sum_k J_k sum_c e^T M e, e the nodal values of element k.
double mass_norm2(const Discretization& d, const std::vector<std::vector<double>>& values) {
  double total = 0.0;
  Eigen::VectorXd e(d.refel.np);
  for (int k = 0; k < d.mesh.num_elements(); ++k) {
    double sum = 0.0;
    for (const auto& v : values) {
      for (int i = 0; i < d.refel.np; ++i) e[i] = v[d.layout.dof_index(k, i)];
      sum += e.dot(d.refel.mass * e);
    }
    total += d.geo.jacobian[k] * sum;
  }
  return total;
}

}  // namespace

double DgOperator::energy(const FieldState& state) { return 0.5 * mass_norm2(disc_, download(state)); }

double DgOperator::l2_error(const FieldState& state, const FieldFunction& f, double t) {
  auto values = download(state);
  const auto exact = interpolate(f, t);
  for (std::size_t c = 0; c < values.size(); ++c) {
    for (std::size_t w = 0; w < values[c].size(); ++w) {
      values[c][w] = disc_.layout.is_data_word(static_cast<std::int64_t>(w)) ? values[c][w] - exact[c][w] : 0.0;
    }
  }
  return std::sqrt(mass_norm2(disc_, values));
}

const KernelPlan& DgOperator::plan(Stage stage) const { return plans_.at(stage); }

void DgOperator::reset_counts() {
  counts_.clear();
  for (Stage s : {Stage::differentiation, Stage::gather, Stage::lift, Stage::assembly}) counts_[s] = {};
}

bool DgOperator::padding_intact() {
  for (const auto& [b, layout] : owned_) {
    const auto v = backend_.read(b);
    for (std::int64_t w = 0; w < layout.total_words(); ++w) {
      if (!layout.is_data_word(w) && !std::isnan(v[w])) return false;
    }
  }
  return true;
}

}  // namespace dgforge
