#include <cmath>
#include <fstream>

#include "dgforge/error.hpp"
#include "dgforge/matrix_io.hpp"
#include "dgforge/refelem.hpp"

namespace dgforge {

namespace {

constexpr double kFaceTol = 1e-10;

double face_distance(int face, double r, double s, double t) {
  switch (face) {
    case 0: return std::abs(1.0 + t);
    case 1: return std::abs(1.0 + s);
    case 2: return std::abs(1.0 + r + s + t) / std::sqrt(3.0);
    default: return std::abs(1.0 + r);
  }
}

// Two in-plane coordinates of a face that map it onto the reference triangle.
std::array<int, 2> face_coordinates(int face) {
  switch (face) {
    case 0: return {0, 1};
    case 1: return {0, 2};
    default: return {1, 2};
  }
}

}  // namespace

Matrix ReferenceElement::embedded_face_mass() const {
  Matrix E = Matrix::Zero(np, kFaces * nfp);
  for (int f = 0; f < kFaces; ++f) {
    for (int i = 0; i < nfp; ++i) {
      for (int j = 0; j < nfp; ++j) E(face_node_index[f][i], f * nfp + j) = face_mass[f](i, j);
    }
  }
  return E;
}

ReferenceElement build_reference_element(int order) {
  ReferenceElement el;
  el.order = order;
  el.nodes = interpolation_nodes(order);
  el.np = volume_node_count(order);
  el.nfp = face_node_count(order);

  el.vandermonde = simplex3d_basis(order, el.nodes);
  const Eigen::FullPivLU<Matrix> lu(el.vandermonde);
  if (lu.rank() < el.np || lu.rcond() < 1e-12) {
    throw Error("reference element: Vandermonde matrix is numerically singular for order " + std::to_string(order));
  }
  el.inv_vandermonde = lu.inverse();
  el.mass = el.inv_vandermonde.transpose() * el.inv_vandermonde;
  el.mass = 0.5 * (el.mass + el.mass.transpose()).eval();

  const auto grad = simplex3d_basis_gradient(order, el.nodes);
  for (int mu = 0; mu < 3; ++mu) {
    el.diff[mu] = grad[mu] * el.inv_vandermonde;
    el.stiffness[mu] = el.mass * el.diff[mu];
  }

  for (int f = 0; f < kFaces; ++f) {
    for (int i = 0; i < el.np; ++i) {
      if (face_distance(f, el.nodes(i, 0), el.nodes(i, 1), el.nodes(i, 2)) < kFaceTol) {
        el.face_node_index[f].push_back(i);
      }
    }
    if (static_cast<int>(el.face_node_index[f].size()) != el.nfp) {
      throw Error("reference element: face " + std::to_string(f) + " holds " +
                  std::to_string(el.face_node_index[f].size()) + " nodes, expected " + std::to_string(el.nfp));
    }
    const auto coords = face_coordinates(f);
    Matrix rs(el.nfp, 2);
    for (int i = 0; i < el.nfp; ++i) {
      rs(i, 0) = el.nodes(el.face_node_index[f][i], coords[0]);
      rs(i, 1) = el.nodes(el.face_node_index[f][i], coords[1]);
    }
    const Matrix V2 = simplex2d_basis(order, rs);
    const Matrix V2inv = V2.inverse();
    el.face_mass[f] = (reference_face_area(f) / 2.0) * (V2inv.transpose() * V2inv);
  }

  el.lift = el.vandermonde * (el.vandermonde.transpose() * el.embedded_face_mass());
  return el;
}

Vector differentiate_reference(const ReferenceElement& el, std::span<const double> nodal, Axis axis) {
  if (static_cast<int>(nodal.size()) != el.np) {
    throw Error("differentiate_reference: expected " + std::to_string(el.np) + " nodal values, got " +
                std::to_string(nodal.size()));
  }
  const Eigen::Map<const Vector> u(nodal.data(), el.np);
  return el.differentiation(axis) * u;
}

void dump_reference_element(const ReferenceElement& el, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "# reference element order " << el.order << " np " << el.np << " nfp " << el.nfp << "\n";
  write_matrix(out, "nodes", el.nodes);
  write_matrix(out, "M", el.mass);
  const char* axes[] = {"r", "s", "t"};
  for (int mu = 0; mu < 3; ++mu) write_matrix(out, std::string("S") + axes[mu], el.stiffness[mu]);
  for (int mu = 0; mu < 3; ++mu) write_matrix(out, std::string("D") + axes[mu], el.diff[mu]);
  for (int f = 0; f < kFaces; ++f) write_matrix(out, "MA" + std::to_string(f), el.face_mass[f]);
  write_matrix(out, "L", el.lift);
}

}  // namespace dgforge
