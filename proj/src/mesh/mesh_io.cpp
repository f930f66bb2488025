#include <fstream>
#include <iomanip>
#include <sstream>

#include "dgforge/error.hpp"
#include "dgforge/mesh.hpp"

namespace dgforge {

namespace {

// Yields non-empty, comment-stripped lines with their 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::istringstream& out) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      out.clear();
      out.str(line);
      return true;
    }
    ++line_no_;
    return false;
  }

  int line() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

void expect_end(std::istringstream& s, const LineReader& r) {
  std::string extra;
  if (s >> extra) throw ParseError("unexpected trailing token '" + extra + "'", r.line());
}

}  // namespace

Mesh parse_mesh(std::istream& in) {
  LineReader reader(in);
  std::istringstream line;

  if (!reader.next(line)) throw ParseError("empty mesh file", reader.line());
  std::string magic;
  int version = 0;
  if (!(line >> magic >> version) || magic != "tetmesh" || version != 1) {
    throw ParseError("expected header 'tetmesh 1'", reader.line());
  }

  if (!reader.next(line)) throw ParseError("missing vertex/element counts", reader.line());
  long nv = 0, nk = 0;
  if (!(line >> nv >> nk) || nv < 4 || nk < 1) throw ParseError("expected 'V K' with V >= 4, K >= 1", reader.line());
  expect_end(line, reader);

  Mesh mesh;
  mesh.vertices.resize(nv);
  for (long i = 0; i < nv; ++i) {
    if (!reader.next(line)) throw ParseError("truncated file: expected vertex " + std::to_string(i), reader.line());
    auto& p = mesh.vertices[i];
    if (!(line >> p[0] >> p[1] >> p[2])) throw ParseError("malformed vertex line", reader.line());
    expect_end(line, reader);
  }
  mesh.tets.resize(nk);
  for (long k = 0; k < nk; ++k) {
    if (!reader.next(line)) throw ParseError("truncated file: expected element " + std::to_string(k), reader.line());
    auto& t = mesh.tets[k];
    if (!(line >> t[0] >> t[1] >> t[2] >> t[3])) throw ParseError("malformed element line", reader.line());
    expect_end(line, reader);
    for (int v : t) {
      if (v < 0 || v >= nv) throw ParseError("vertex index " + std::to_string(v) + " out of range", reader.line());
    }
  }
  while (reader.next(line)) {
    std::string b, tag;
    int elem = -1, face = -1;
    if (!(line >> b >> elem >> face >> tag) || b != "b") {
      throw ParseError("expected boundary line 'b elem face tag'", reader.line());
    }
    expect_end(line, reader);
    if (elem < 0 || elem >= nk || face < 0 || face >= kFaces) {
      throw ParseError("boundary face reference out of range", reader.line());
    }
    mesh.boundary_tag[{elem, face}] = tag;
  }

  validate_mesh(mesh);
  return mesh;
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file " + path);
  return parse_mesh(in);
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "tetmesh 1\n" << mesh.vertices.size() << " " << mesh.tets.size() << "\n";
  out << std::setprecision(17);
  for (const auto& p : mesh.vertices) out << p[0] << " " << p[1] << " " << p[2] << "\n";
  for (const auto& t : mesh.tets) out << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
  for (const auto& [key, tag] : mesh.boundary_tag) out << "b " << key.first << " " << key.second << " " << tag << "\n";
}

}  // namespace dgforge
