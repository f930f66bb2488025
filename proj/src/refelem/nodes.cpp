#include <cmath>

#include "dgforge/error.hpp"
#include "dgforge/refelem.hpp"

namespace dgforge {

namespace {

// Warp & blend optimized blending parameters, indexed by order.
constexpr std::array<double, 11> kAlpha{0.0, 0.0, 0.0, 0.0, 0.1002, 1.1332, 1.5608, 1.3413, 1.2577, 1.1603, 1.10153};

using Vec3 = std::array<double, 3>;

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Vec3 unit(const Vec3& a) {
  const double n = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  return {a[0] / n, a[1] / n, a[2] / n};
}

// One-dimensional warp: equispaced-to-Lobatto displacement divided by (1 - r^2).
class EdgeWarp {
 public:
  explicit EdgeWarp(int order) : order_(order), eq_(order + 1), disp_(order + 1) {
    const Vector lgl = jacobi_gauss_lobatto(0.0, 0.0, order);
    for (int i = 0; i <= order; ++i) {
      eq_[i] = -1.0 + 2.0 * i / order;
      disp_[i] = lgl(i) - eq_[i];
    }
  }

  double operator()(double r) const {
    if (std::abs(r) >= 1.0 - 1e-10) return 0.0;
    double warp = 0.0;
    for (int i = 0; i <= order_; ++i) {
      double l = 1.0;
      for (int j = 0; j <= order_; ++j) {
        if (j != i) l *= (r - eq_[j]) / (eq_[i] - eq_[j]);
      }
      warp += disp_[i] * l;
    }
    return warp / (1.0 - r * r);
  }

 private:
  int order_;
  std::vector<double> eq_;
  std::vector<double> disp_;
};

}  // namespace

const std::array<std::array<double, 3>, 4>& reference_vertices() {
  static const std::array<std::array<double, 3>, 4> v{{{-1, -1, -1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}}};
  return v;
}

std::array<double, 3> reference_face_normal(int face) {
  const double c = 1.0 / std::sqrt(3.0);
  switch (face) {
    case 0: return {0, 0, -1};
    case 1: return {0, -1, 0};
    case 2: return {c, c, c};
    case 3: return {-1, 0, 0};
  }
  throw Error("reference_face_normal: face index out of range");
}

double reference_face_area(int face) { return face == 2 ? 2.0 * std::sqrt(3.0) : 2.0; }

Matrix interpolation_nodes(int order) {
  if (order < kMinOrder || order > kMaxOrder) {
    throw Error("interpolation order " + std::to_string(order) + " outside supported range [" +
                std::to_string(kMinOrder) + ", " + std::to_string(kMaxOrder) + "]");
  }
  const int np = volume_node_count(order);
  const double alpha = kAlpha[order];
  const double tol = 1e-10;

  // Equilateral tetrahedron; vertex i corresponds to reference vertex i.
  const std::array<Vec3, 4> E{{{-1.0, -1.0 / std::sqrt(3.0), -1.0 / std::sqrt(6.0)},
                               {1.0, -1.0 / std::sqrt(3.0), -1.0 / std::sqrt(6.0)},
                               {0.0, 2.0 / std::sqrt(3.0), -1.0 / std::sqrt(6.0)},
                               {0.0, 0.0, 3.0 / std::sqrt(6.0)}}};
  const EdgeWarp warp(order);

  // Barycentric shift in the face spanned by vertices {b, c, d}; edges get the 1D warp.
  auto face_shift = [&](const std::array<double, 4>& L, const std::array<int, 3>& fv) {
    Vec3 shift{0, 0, 0};
    for (int e = 0; e < 3; ++e) {
      const int c = fv[e], d = fv[(e + 1) % 3], b = fv[(e + 2) % 3];
      const double w = 4.0 * L[c] * L[d] * warp(L[d] - L[c]) * (1.0 + (alpha * L[b]) * (alpha * L[b]));
      const Vec3 dir = unit(sub(E[d], E[c]));
      for (int k = 0; k < 3; ++k) shift[k] += w * dir[k];
    }
    return shift;
  };

  Matrix nodes(np, 3);
  Eigen::Matrix3d T;
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i) T(k, i) = E[i + 1][k] - E[0][k];
  }
  const Eigen::PartialPivLU<Eigen::Matrix3d> Tlu(T);

  int row = 0;
  for (int n = 0; n <= order; ++n) {
    for (int m = 0; m <= order - n; ++m) {
      for (int q = 0; q <= order - n - m; ++q) {
        const double r = -1.0 + 2.0 * q / order;
        const double s = -1.0 + 2.0 * m / order;
        const double t = -1.0 + 2.0 * n / order;
        const std::array<double, 4> L{-(1.0 + r + s + t) / 2.0, (1.0 + r) / 2.0, (1.0 + s) / 2.0, (1.0 + t) / 2.0};

        Vec3 X{0, 0, 0};
        for (int v = 0; v < 4; ++v) {
          for (int k = 0; k < 3; ++k) X[k] += L[v] * E[v][k];
        }

        Vec3 shift{0, 0, 0};
        for (int f = 0; f < kFaces; ++f) {
          const int a = kOppositeVertex[f];
          const auto& fv = kFaceVertices[f];
          const Vec3 fs = face_shift(L, fv);
          double blend = L[fv[0]] * L[fv[1]] * L[fv[2]];
          const double denom = (L[fv[0]] + 0.5 * L[a]) * (L[fv[1]] + 0.5 * L[a]) * (L[fv[2]] + 0.5 * L[a]);
          if (denom > tol) blend = (1.0 + (alpha * L[a]) * (alpha * L[a])) * blend / denom;
          for (int k = 0; k < 3; ++k) shift[k] += blend * fs[k];

          const int positive = (L[fv[0]] > tol) + (L[fv[1]] > tol) + (L[fv[2]] > tol);
          if (L[a] < tol && positive < 3) shift = fs;
        }
        for (int k = 0; k < 3; ++k) X[k] += shift[k];

        const Eigen::Vector3d rhs(X[0] - E[0][0], X[1] - E[0][1], X[2] - E[0][2]);
        const Eigen::Vector3d lam = Tlu.solve(rhs);
        for (int k = 0; k < 3; ++k) {
          double v = 2.0 * lam(k) - 1.0;
          if (std::abs(v + 1.0) < 1e-14) v = -1.0;
          nodes(row, k) = v;
        }
        ++row;
      }
    }
  }
  return nodes;
}

}  // namespace dgforge
