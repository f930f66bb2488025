#include <algorithm>

#include "dgforge/error.hpp"
#include "dgforge/mesh.hpp"

namespace dgforge {

Mesh generate_box_mesh(int nx, int ny, int nz, const Point& lo, const Point& hi) {
  if (nx < 1 || ny < 1 || nz < 1) throw Error("box mesh needs at least one cell per direction");
  for (int d = 0; d < 3; ++d) {
    if (!(hi[d] > lo[d])) throw Error("box mesh bounds are degenerate");
  }

  Mesh mesh;
  auto vid = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
  mesh.vertices.reserve(static_cast<size_t>(nx + 1) * (ny + 1) * (nz + 1));
  for (int k = 0; k <= nz; ++k) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        mesh.vertices.push_back({lo[0] + (hi[0] - lo[0]) * i / nx, lo[1] + (hi[1] - lo[1]) * j / ny,
                                 lo[2] + (hi[2] - lo[2]) * k / nz});
      }
    }
  }

  // Kuhn split: one tet per axis permutation, all sharing the cell diagonal.
  std::array<int, 3> perm{0, 1, 2};
  std::vector<std::array<int, 3>> perms;
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));

  mesh.tets.reserve(static_cast<size_t>(6) * nx * ny * nz);
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        for (const auto& p : perms) {
          std::array<int, 3> c{i, j, k};
          std::array<int, 4> tet;
          tet[0] = vid(c[0], c[1], c[2]);
          for (int step = 0; step < 3; ++step) {
            ++c[p[step]];
            tet[step + 1] = vid(c[0], c[1], c[2]);
          }
          mesh.tets.push_back(tet);
        }
      }
    }
  }
  validate_mesh(mesh);
  return mesh;
}

}  // namespace dgforge
