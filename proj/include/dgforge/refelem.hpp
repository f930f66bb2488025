#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "dgforge/polynomials.hpp"

namespace dgforge {

inline constexpr int kMinOrder = 1;
inline constexpr int kMaxOrder = 10;
inline constexpr int kFaces = 4;

enum class Axis { r = 0, s = 1, t = 2 };

constexpr int volume_node_count(int order) { return (order + 1) * (order + 2) * (order + 3) / 6; }
constexpr int face_node_count(int order) { return (order + 1) * (order + 2) / 2; }

/// Vertices of the bi-unit reference tetrahedron, in local vertex order.
const std::array<std::array<double, 3>, 4>& reference_vertices();

/// Local vertex indices of each face. Face f is opposite vertex kOppositeVertex[f].
inline constexpr std::array<std::array<int, 3>, 4> kFaceVertices{{{0, 1, 2}, {0, 1, 3}, {1, 2, 3}, {0, 2, 3}}};
inline constexpr std::array<int, 4> kOppositeVertex{3, 2, 0, 1};

/// Outward unit normal of a reference face.
std::array<double, 3> reference_face_normal(int face);

/// Area of a reference face (2 for the coordinate faces, 2*sqrt(3) for the slanted one).
double reference_face_area(int face);

/// Order-N interpolation nodes on the reference tetrahedron (warp & blend), Np x 3.
Matrix interpolation_nodes(int order);

/// Reference element for order N: nodes, face node lists and the dense
/// operator matrices. Immutable after construction.
struct ReferenceElement {
  int order = 0;
  int np = 0;
  int nfp = 0;

  Matrix nodes;                                  // np x 3
  std::array<std::vector<int>, kFaces> face_node_index;

  Matrix vandermonde;                            // V_ij = P_j(x_i)
  Matrix inv_vandermonde;
  Matrix mass;                                   // M
  std::array<Matrix, 3> stiffness;               // S^r, S^s, S^t
  std::array<Matrix, 3> diff;                    // D^r, D^s, D^t
  std::array<Matrix, kFaces> face_mass;          // nfp x nfp each
  Matrix lift;                                   // np x 4*nfp

  const Matrix& differentiation(Axis a) const { return diff[static_cast<int>(a)]; }

  /// Face-mass matrices embedded at facial rows: the np x 4*nfp matrix M*L should equal.
  Matrix embedded_face_mass() const;
};

ReferenceElement build_reference_element(int order);

/// D^mu * nodal.
Vector differentiate_reference(const ReferenceElement& el, std::span<const double> nodal, Axis axis);

/// Writes every reference matrix to a plain-text file, one matrix row per line.
void dump_reference_element(const ReferenceElement& el, const std::string& path);

}  // namespace dgforge
