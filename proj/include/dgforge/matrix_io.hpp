#pragma once

#include <iosfwd>
#include <string>

#include "dgforge/polynomials.hpp"

namespace dgforge {

/// Plain-text matrix block: a `# name rows cols` header, then one row per line.
void write_matrix(std::ostream& out, const std::string& name, const Matrix& m);

/// Reads the next block written by write_matrix. Returns false at end of input.
bool read_matrix(std::istream& in, std::string& name, Matrix& m);

}  // namespace dgforge
