#pragma once

#include <sstream>
#include <string>

#include "dgforge/codegen.hpp"

namespace dgforge {

/// Indented line-oriented text builder for generated kernels.
class SourceWriter {
 public:
  void line(const std::string& text);
  void open(const std::string& header);  // "header {" and indent
  void close(const std::string& tail = "}");
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  int depth_ = 0;
};

/// Dialect literal for a real value at the given precision (round-trips exactly).
std::string real_literal(double v, Precision p);
const char* real_type(Precision p);

}  // namespace dgforge
