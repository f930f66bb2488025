#include <cmath>

#include "dgforge/error.hpp"
#include "dgforge/mesh.hpp"

namespace dgforge {

GeometricFactors compute_geometric_factors(const Mesh& mesh, const ReferenceElement& refel) {
  (void)refel;
  const int K = mesh.num_elements();
  GeometricFactors g;
  g.jacobian.resize(K);
  g.drdx.resize(K);
  g.normal.resize(K);
  g.surface_jacobian.resize(K);

  for (int k = 0; k < K; ++k) {
    const auto& t = mesh.tets[k];
    const Point& x0 = mesh.vertices[t[0]];
    // x = x0 + F (r + 1), F columns are half the edge vectors from vertex 0.
    Eigen::Matrix3d F;
    for (int c = 0; c < 3; ++c) {
      for (int d = 0; d < 3; ++d) F(d, c) = 0.5 * (mesh.vertices[t[c + 1]][d] - x0[d]);
    }
    const double J = F.determinant();
    if (!(J > 0.0)) throw Error("element " + std::to_string(k) + " has a non-invertible map");
    const Eigen::Matrix3d Finv = F.inverse();
    g.jacobian[k] = J;
    for (int mu = 0; mu < 3; ++mu) {
      for (int nu = 0; nu < 3; ++nu) g.drdx[k][3 * mu + nu] = Finv(mu, nu);
    }
    for (int f = 0; f < kFaces; ++f) {
      const auto nr = reference_face_normal(f);
      const Eigen::Vector3d n = Finv.transpose() * Eigen::Vector3d(nr[0], nr[1], nr[2]);
      const double len = n.norm();
      g.normal[k][f] = {n[0] / len, n[1] / len, n[2] / len};
      g.surface_jacobian[k][f] = J * len;
    }
  }
  return g;
}

}  // namespace dgforge
