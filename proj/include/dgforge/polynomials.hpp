#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dgforge {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Orthonormal Jacobi polynomial P_n^{(alpha,beta)} evaluated at each x.
Vector jacobi_p(const Vector& x, double alpha, double beta, int n);

/// Derivative of the orthonormal Jacobi polynomial P_n^{(alpha,beta)}.
Vector grad_jacobi_p(const Vector& x, double alpha, double beta, int n);

struct Quadrature1D {
  Vector points;
  Vector weights;
};

/// n-point Gauss-Jacobi rule for weight (1-x)^alpha (1+x)^beta on [-1,1].
Quadrature1D jacobi_gauss(double alpha, double beta, int n);

/// Gauss-Lobatto-Jacobi points (n+1 of them, endpoints included), ascending.
Vector jacobi_gauss_lobatto(double alpha, double beta, int n);

/// Orthonormal modal basis on the bi-unit reference tetrahedron.
/// Rows are points, columns are the (N+1)(N+2)(N+3)/6 modes.
Matrix simplex3d_basis(int order, const Matrix& rst);

/// Gradients of simplex3d_basis with respect to r, s and t.
std::array<Matrix, 3> simplex3d_basis_gradient(int order, const Matrix& rst);

/// Orthonormal modal basis on the bi-unit reference triangle (face coordinates).
Matrix simplex2d_basis(int order, const Matrix& rs);

}  // namespace dgforge
