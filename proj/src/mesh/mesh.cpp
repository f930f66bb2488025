#include <algorithm>
#include <cmath>

#include "dgforge/error.hpp"
#include "dgforge/mesh.hpp"

namespace dgforge {

namespace {

Point sub(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

double det3(const Point& a, const Point& b, const Point& c) {
  return a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0]);
}

double norm(const Point& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

}  // namespace

double tet_signed_volume(const Mesh& mesh, int k) {
  const auto& t = mesh.tets[k];
  const Point& x0 = mesh.vertices[t[0]];
  return det3(sub(mesh.vertices[t[1]], x0), sub(mesh.vertices[t[2]], x0), sub(mesh.vertices[t[3]], x0)) / 6.0;
}

void validate_mesh(Mesh& mesh) {
  const int nv = static_cast<int>(mesh.vertices.size());
  for (int k = 0; k < mesh.num_elements(); ++k) {
    auto& t = mesh.tets[k];
    for (int v : t) {
      if (v < 0 || v >= nv) throw Error("element " + std::to_string(k) + " references missing vertex " + std::to_string(v));
    }
    const double vol = tet_signed_volume(mesh, k);
    double scale = element_diameter(mesh, k);
    if (std::abs(vol) <= 1e-14 * scale * scale * scale) {
      throw Error("element " + std::to_string(k) + " has zero volume");
    }
    if (vol < 0) {
      // Swapping local vertices 1 and 2 exchanges local faces 1 and 3.
      std::swap(t[1], t[2]);
      auto f1 = mesh.boundary_tag.extract({k, 1});
      auto f3 = mesh.boundary_tag.extract({k, 3});
      if (f1) {
        f1.key() = {k, 3};
        mesh.boundary_tag.insert(std::move(f1));
      }
      if (f3) {
        f3.key() = {k, 1};
        mesh.boundary_tag.insert(std::move(f3));
      }
    }
  }

  std::map<std::array<int, 3>, std::vector<std::pair<int, int>>> faces;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    for (int f = 0; f < kFaces; ++f) {
      std::array<int, 3> key;
      for (int i = 0; i < 3; ++i) key[i] = mesh.tets[k][kFaceVertices[f][i]];
      std::sort(key.begin(), key.end());
      faces[key].emplace_back(k, f);
    }
  }
  for (const auto& [key, owners] : faces) {
    if (owners.size() > 2) {
      throw Error("non-conforming face {" + std::to_string(key[0]) + "," + std::to_string(key[1]) + "," +
                  std::to_string(key[2]) + "} shared by " + std::to_string(owners.size()) + " elements");
    }
    if (owners.size() == 2) {
      for (const auto& o : owners) {
        if (mesh.boundary_tag.count(o)) {
          throw Error("boundary tag on interior face (element " + std::to_string(o.first) + ", face " +
                      std::to_string(o.second) + ")");
        }
      }
    }
  }
}

Matrix physical_nodes(const Mesh& mesh, const ReferenceElement& refel, int k) {
  const auto& t = mesh.tets[k];
  Matrix x(refel.np, 3);
  for (int i = 0; i < refel.np; ++i) {
    const double r = refel.nodes(i, 0), s = refel.nodes(i, 1), tt = refel.nodes(i, 2);
    const double lam[4] = {-(1.0 + r + s + tt) / 2.0, (1.0 + r) / 2.0, (1.0 + s) / 2.0, (1.0 + tt) / 2.0};
    for (int d = 0; d < 3; ++d) {
      double v = 0.0;
      for (int a = 0; a < 4; ++a) v += lam[a] * mesh.vertices[t[a]][d];
      x(i, d) = v;
    }
  }
  return x;
}

double element_diameter(const Mesh& mesh, int k) {
  const auto& t = mesh.tets[k];
  double d = 0.0;
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) d = std::max(d, norm(sub(mesh.vertices[t[a]], mesh.vertices[t[b]])));
  }
  return d;
}

double inscribed_diameter(const Mesh& mesh, int k) {
  const auto& t = mesh.tets[k];
  double area = 0.0;
  for (int f = 0; f < kFaces; ++f) {
    const Point& a = mesh.vertices[t[kFaceVertices[f][0]]];
    const Point e1 = sub(mesh.vertices[t[kFaceVertices[f][1]]], a);
    const Point e2 = sub(mesh.vertices[t[kFaceVertices[f][2]]], a);
    const Point c{e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]};
    area += 0.5 * norm(c);
  }
  return 2.0 * 3.0 * std::abs(tet_signed_volume(mesh, k)) / area;
}

}  // namespace dgforge
