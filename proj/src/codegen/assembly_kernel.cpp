#include "dgforge/source_writer.hpp"

namespace dgforge {

KernelSource generate_assembly_kernel(const MicroblockLayout& layout, Precision precision) {
  const std::string T = real_type(precision);
  const std::string km_np = std::to_string(layout.elements_per_block * layout.np);
  const std::string ps = std::to_string(layout.padded_size);
  SourceWriter w;
  w.line("// assembly/" + std::string(precision_name(precision)));
  w.open("kernel dg_axpby lanes(" + std::to_string(kAssemblyLanes) + ") (global const " + T + "* x, global const " + T +
         "* y, global " + T + "* out, " + T + " a, " + T + " b, int K)");
  w.line("int w = group_id() * " + std::to_string(kAssemblyLanes) + " + lane_id();");
  w.line("int r = w % " + ps + ";");
  w.line("int k = (w / " + ps + ") * " + std::to_string(layout.elements_per_block) + " + r / " +
         std::to_string(layout.np) + ";");
  w.open("if (r < " + km_np + " && k < K)");
  w.line("out[w] = a * x[w] + b * y[w];");
  w.close();
  w.close();

  KernelSource out;
  out.entry = "dg_axpby";
  out.text = w.str();
  out.lanes = kAssemblyLanes;
  out.registers_estimate = 4;
  return out;
}

}  // namespace dgforge
