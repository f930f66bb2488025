#include "dgforge/matrix_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "dgforge/error.hpp"

namespace dgforge {

void write_matrix(std::ostream& out, const std::string& name, const Matrix& m) {
  out << "# " << name << " " << m.rows() << " " << m.cols() << "\n";
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << (j ? " " : "") << buf;
    }
    out << "\n";
  }
}

bool read_matrix(std::istream& in, std::string& name, Matrix& m) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.size() < 2 || line[0] != '#') continue;
    std::istringstream header(line.substr(1));
    Eigen::Index rows = 0, cols = 0;
    if (!(header >> name >> rows >> cols)) continue;
    m.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (!(in >> m(i, j))) throw Error("read_matrix: truncated block " + name);
      }
    }
    return true;
  }
  return false;
}

}  // namespace dgforge
