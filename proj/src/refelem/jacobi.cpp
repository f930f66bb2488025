#include "dgforge/polynomials.hpp"

#include <cmath>
#include <stdexcept>

namespace dgforge {

Vector jacobi_p(const Vector& x, double alpha, double beta, int n) {
  const Eigen::Index m = x.size();
  const double gamma0 = std::pow(2.0, alpha + beta + 1.0) / (alpha + beta + 1.0) *
                        std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) /
                        std::tgamma(alpha + beta + 1.0);
  Vector prev2 = Vector::Constant(m, 1.0 / std::sqrt(gamma0));
  if (n == 0) return prev2;
  const double gamma1 = (alpha + 1.0) * (beta + 1.0) / (alpha + beta + 3.0) * gamma0;
  Vector prev1 = ((alpha + beta + 2.0) * x.array() / 2.0 + (alpha - beta) / 2.0) / std::sqrt(gamma1);
  if (n == 1) return prev1;

  double a_old = 2.0 / (2.0 + alpha + beta) *
                 std::sqrt((alpha + 1.0) * (beta + 1.0) / (alpha + beta + 3.0));
  for (int i = 1; i < n; ++i) {
    const double h1 = 2.0 * i + alpha + beta;
    const double a_new = 2.0 / (h1 + 2.0) *
                         std::sqrt((i + 1.0) * (i + 1.0 + alpha + beta) * (i + 1.0 + alpha) *
                                   (i + 1.0 + beta) / (h1 + 1.0) / (h1 + 3.0));
    const double b_new = -(alpha * alpha - beta * beta) / h1 / (h1 + 2.0);
    Vector next = (-a_old * prev2.array() + (x.array() - b_new) * prev1.array()) / a_new;
    prev2 = std::move(prev1);
    prev1 = std::move(next);
    a_old = a_new;
  }
  return prev1;
}

Vector grad_jacobi_p(const Vector& x, double alpha, double beta, int n) {
  if (n == 0) return Vector::Zero(x.size());
  return std::sqrt(n * (n + alpha + beta + 1.0)) * jacobi_p(x, alpha + 1.0, beta + 1.0, n - 1);
}

Quadrature1D jacobi_gauss(double alpha, double beta, int n) {
  if (n < 1) throw std::invalid_argument("jacobi_gauss: need at least one point");
  Quadrature1D q;
  if (n == 1) {
    q.points = Vector::Constant(1, (alpha - beta) / (alpha + beta + 2.0));
    q.weights = Vector::Constant(1, 2.0);
    return q;
  }
  const int N = n - 1;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i <= N; ++i) {
    const double h1 = 2.0 * i + alpha + beta;
    J(i, i) = (h1 + 2.0) * h1 == 0.0 ? 0.0 : -0.5 * (alpha * alpha - beta * beta) / (h1 + 2.0) / h1;
    if (i < N) {
      const double k = i + 1.0;
      J(i, i + 1) = 2.0 / (h1 + 2.0) *
                    std::sqrt(k * (k + alpha + beta) * (k + alpha) * (k + beta) / (h1 + 1.0) / (h1 + 3.0));
      J(i + 1, i) = J(i, i + 1);
    }
  }
  if (alpha + beta < 10 * std::numeric_limits<double>::epsilon()) J(0, 0) = 0.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  q.points = eig.eigenvalues();
  const double scale = std::pow(2.0, alpha + beta + 1.0) / (alpha + beta + 1.0) * std::tgamma(alpha + 1.0) *
                       std::tgamma(beta + 1.0) / std::tgamma(alpha + beta + 1.0);
  q.weights = eig.eigenvectors().row(0).transpose().array().square() * scale;
  return q;
}

Vector jacobi_gauss_lobatto(double alpha, double beta, int n) {
  Vector x(n + 1);
  x(0) = -1.0;
  x(n) = 1.0;
  if (n == 1) return x;
  const Quadrature1D interior = jacobi_gauss(alpha + 1.0, beta + 1.0, n - 1);
  x.segment(1, n - 1) = interior.points;
  return x;
}

namespace {

// Collapsed coordinates of the tetrahedron.
void rst_to_abc(const Matrix& rst, Vector& a, Vector& b, Vector& c) {
  const Eigen::Index m = rst.rows();
  a.resize(m);
  b.resize(m);
  c.resize(m);
  for (Eigen::Index p = 0; p < m; ++p) {
    const double r = rst(p, 0), s = rst(p, 1), t = rst(p, 2);
    a(p) = std::abs(s + t) > 1e-14 ? 2.0 * (1.0 + r) / (-s - t) - 1.0 : -1.0;
    b(p) = std::abs(t - 1.0) > 1e-14 ? 2.0 * (1.0 + s) / (1.0 - t) - 1.0 : -1.0;
    c(p) = t;
  }
}

}  // namespace

Matrix simplex3d_basis(int order, const Matrix& rst) {
  Vector a, b, c;
  rst_to_abc(rst, a, b, c);
  const int np = (order + 1) * (order + 2) * (order + 3) / 6;
  Matrix V(rst.rows(), np);
  int col = 0;
  for (int i = 0; i <= order; ++i) {
    for (int j = 0; j <= order - i; ++j) {
      for (int k = 0; k <= order - i - j; ++k) {
        const Vector h1 = jacobi_p(a, 0.0, 0.0, i);
        const Vector h2 = jacobi_p(b, 2.0 * i + 1.0, 0.0, j);
        const Vector h3 = jacobi_p(c, 2.0 * (i + j) + 2.0, 0.0, k);
        V.col(col++) = 2.0 * std::sqrt(2.0) * h1.array() * h2.array() * (1.0 - b.array()).pow(i) *
                       h3.array() * (1.0 - c.array()).pow(i + j);
      }
    }
  }
  return V;
}

std::array<Matrix, 3> simplex3d_basis_gradient(int order, const Matrix& rst) {
  Vector a, b, c;
  rst_to_abc(rst, a, b, c);
  const Eigen::Index m = rst.rows();
  const int np = (order + 1) * (order + 2) * (order + 3) / 6;
  std::array<Matrix, 3> G{Matrix(m, np), Matrix(m, np), Matrix(m, np)};

  const Eigen::ArrayXd half_1mb = 0.5 * (1.0 - b.array());
  const Eigen::ArrayXd half_1mc = 0.5 * (1.0 - c.array());
  int col = 0;
  for (int i = 0; i <= order; ++i) {
    for (int j = 0; j <= order - i; ++j) {
      for (int k = 0; k <= order - i - j; ++k) {
        const Eigen::ArrayXd fa = jacobi_p(a, 0.0, 0.0, i).array();
        const Eigen::ArrayXd dfa = grad_jacobi_p(a, 0.0, 0.0, i).array();
        const Eigen::ArrayXd gb = jacobi_p(b, 2.0 * i + 1.0, 0.0, j).array();
        const Eigen::ArrayXd dgb = grad_jacobi_p(b, 2.0 * i + 1.0, 0.0, j).array();
        const Eigen::ArrayXd hc = jacobi_p(c, 2.0 * (i + j) + 2.0, 0.0, k).array();
        const Eigen::ArrayXd dhc = grad_jacobi_p(c, 2.0 * (i + j) + 2.0, 0.0, k).array();

        Eigen::ArrayXd dr = dfa * gb * hc;
        if (i > 0) dr *= half_1mb.pow(i - 1);
        if (i + j > 0) dr *= half_1mc.pow(i + j - 1);

        Eigen::ArrayXd ds = 0.5 * (1.0 + a.array()) * dr;
        Eigen::ArrayXd tmp = dgb * half_1mb.pow(i);
        if (i > 0) tmp += (-0.5 * i) * (gb * half_1mb.pow(i - 1));
        if (i + j > 0) tmp *= half_1mc.pow(i + j - 1);
        tmp = fa * tmp * hc;
        ds += tmp;

        Eigen::ArrayXd dt = 0.5 * (1.0 + a.array()) * dr + 0.5 * (1.0 + b.array()) * tmp;
        tmp = dhc * half_1mc.pow(i + j);
        if (i + j > 0) tmp -= 0.5 * (i + j) * (hc * half_1mc.pow(i + j - 1));
        tmp = fa * gb * tmp * half_1mb.pow(i);
        dt += tmp;

        const double scale = std::pow(2.0, 2 * i + j + 1.5);
        G[0].col(col) = dr * scale;
        G[1].col(col) = ds * scale;
        G[2].col(col) = dt * scale;
        ++col;
      }
    }
  }
  return G;
}

Matrix simplex2d_basis(int order, const Matrix& rs) {
  const Eigen::Index m = rs.rows();
  Vector a(m), b(m);
  for (Eigen::Index p = 0; p < m; ++p) {
    const double r = rs(p, 0), s = rs(p, 1);
    a(p) = std::abs(s - 1.0) > 1e-14 ? 2.0 * (1.0 + r) / (1.0 - s) - 1.0 : -1.0;
    b(p) = s;
  }
  const int np = (order + 1) * (order + 2) / 2;
  Matrix V(m, np);
  int col = 0;
  for (int i = 0; i <= order; ++i) {
    for (int j = 0; j <= order - i; ++j) {
      const Vector h1 = jacobi_p(a, 0.0, 0.0, i);
      const Vector h2 = jacobi_p(b, 2.0 * i + 1.0, 0.0, j);
      V.col(col++) = std::sqrt(2.0) * h1.array() * h2.array() * (1.0 - b.array()).pow(i);
    }
  }
  return V;
}

}  // namespace dgforge
