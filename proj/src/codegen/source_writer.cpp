#include "dgforge/source_writer.hpp"

#include <cstdio>

namespace dgforge {

void SourceWriter::line(const std::string& text) { out_ << std::string(2 * depth_, ' ') << text << "\n"; }

void SourceWriter::open(const std::string& header) {
  line(header + " {");
  ++depth_;
}

void SourceWriter::close(const std::string& tail) {
  --depth_;
  line(tail);
}

std::string real_literal(double v, Precision p) {
  char buf[64];
  if (p == Precision::f32) std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(static_cast<float>(v)));
  else std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  if (p == Precision::f32) s += "f";
  return s;
}

const char* real_type(Precision p) { return p == Precision::f32 ? "float" : "double"; }

}  // namespace dgforge
