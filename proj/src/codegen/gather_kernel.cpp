#include "dgforge/source_writer.hpp"

namespace dgforge {

namespace {

std::string S(long long v) { return std::to_string(v); }

// One side of a face: flux from traces (a = own side, b = other side) with
// the own normal, scaled by the own surface Jacobian, written to facial.
void emit_side(SourceWriter& w, const flux::LoweredFlux& flux, const std::string& T, Precision prec,
               const std::string& own, const std::string& other, const std::string& out_index) {
  flux::EmitStyle style;
  style.type = T;
  style.literal = [prec](double v) { return real_literal(v, prec); };
  style.trace = [&](int c, flux::Side s) { return (s == flux::Side::interior ? own : other) + S(c); };
  style.normal = [](int axis) { return "n" + S(axis); };
  style.output = [](int c) { return "r" + S(c); };
  const int nf = static_cast<int>(flux.components.size());
  w.open("");
  for (int c = 0; c < nf; ++c) w.line(T + " r" + S(c) + " = " + real_literal(0.0, prec) + ";");
  for (const auto& s : flux::emit_statements(flux, style)) w.line(s);
  for (int c = 0; c < nf; ++c) w.line("facial" + S(c) + "[" + out_index + "] = sj * r" + S(c) + ";");
  w.close();
}

}  // namespace

KernelSource generate_gather_kernel(const KernelPlan& plan, const flux::LoweredFlux& flux, int nfp) {
  if (plan.stage != Stage::gather) throw Error("generate_gather_kernel needs a gather plan");
  if (plan.faces_per_block < 1) throw Error("inadmissible plan " + plan.id() + ": faces per block below 1");
  const int nf = static_cast<int>(flux.components.size());
  const int fpb = plan.faces_per_block;
  const int lanes = fpb * nfp;
  const std::string T = real_type(plan.precision);

  std::vector<std::string> params;
  for (int c = 0; c < nf; ++c) params.push_back("global const " + T + "* u" + S(c));
  for (int c = 0; c < nf; ++c) params.push_back("global " + T + "* facial" + S(c));
  for (int c = 0; c < nf; ++c) params.push_back("global const " + T + "* ghost" + S(c));
  for (const char* n : {"idx_m", "idx_p", "out_m", "out_p"}) params.push_back(std::string("global const int* ") + n);
  params.push_back("global const " + T + "* meta");
  params.push_back("global const " + T + "* bscale");
  params.push_back("int n_interior");
  params.push_back("int n_slots");

  std::string header = "kernel dg_gather lanes(" + S(lanes) + ") (";
  for (size_t i = 0; i < params.size(); ++i) header += (i ? ", " : "") + params[i];
  header += ")";

  SourceWriter w;
  w.line("// " + plan.id());
  w.open(header);
  w.line("int lane = lane_id();");
  w.line("int slot = group_id() * " + S(fpb) + " + lane / " + S(nfp) + ";");
  w.line("int q = slot * " + S(nfp) + " + lane % " + S(nfp) + ";");
  w.open("if (slot < n_interior)");
  w.line("int im = idx_m[q];");
  w.line("int ip = idx_p[q];");
  for (int c = 0; c < nf; ++c) w.line(T + " um" + S(c) + " = u" + S(c) + "[im];");
  for (int c = 0; c < nf; ++c) w.line(T + " up" + S(c) + " = u" + S(c) + "[ip];");
  for (int side = 0; side < 2; ++side) {
    w.open("");
    const int base = side * 4;
    for (int a = 0; a < 3; ++a) w.line(T + " n" + S(a) + " = meta[slot * " + S(kGatherMetaWords) + " + " + S(base + a) + "];");
    w.line(T + " sj = meta[slot * " + S(kGatherMetaWords) + " + " + S(base + 3) + "];");
    if (side == 0) emit_side(w, flux, T, plan.precision, "um", "up", "out_m[q]");
    else emit_side(w, flux, T, plan.precision, "up", "um", "out_p[q]");
    w.close();
  }
  w.close("}");
  w.open("else");
  w.open("if (slot < n_slots)");
  w.line("int im = idx_m[q];");
  w.line("int ig = idx_p[q];");
  w.line("int b = slot - n_interior;");
  for (int c = 0; c < nf; ++c) w.line(T + " um" + S(c) + " = u" + S(c) + "[im];");
  for (int c = 0; c < nf; ++c) {
    w.line(T + " up" + S(c) + " = bscale[b * " + S(nf) + " + " + S(c) + "] * um" + S(c) + " + ghost" + S(c) + "[ig];");
  }
  for (int a = 0; a < 3; ++a) w.line(T + " n" + S(a) + " = meta[slot * " + S(kGatherMetaWords) + " + " + S(a) + "];");
  w.line(T + " sj = meta[slot * " + S(kGatherMetaWords) + " + 3];");
  emit_side(w, flux, T, plan.precision, "um", "up", "out_m[q]");
  w.close();
  w.close();
  w.close();

  KernelSource out;
  out.entry = "dg_gather";
  out.text = w.str();
  out.lanes = lanes;
  out.shared_bytes = 0;
  out.registers_estimate = 2 * nf + static_cast<int>(flux.temporaries.size()) + 8;
  return out;
}

}  // namespace dgforge
