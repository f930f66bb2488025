#include <cmath>
#include <sstream>

#include "doctest.h"
#include "dgforge/matrix_io.hpp"
#include "dgforge/refelem.hpp"

using namespace dgforge;

namespace {

double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

bool has_node(const Matrix& nodes, double r, double s, double t) {
  for (int i = 0; i < nodes.rows(); ++i) {
    if (std::abs(nodes(i, 0) - r) < 1e-12 && std::abs(nodes(i, 1) - s) < 1e-12 && std::abs(nodes(i, 2) - t) < 1e-12)
      return true;
  }
  return false;
}

}  // namespace

TEST_CASE("node counts and placement") {
  auto n1 = interpolation_nodes(1);
  CHECK(n1.rows() == 4);
  for (const auto& v : reference_vertices()) CHECK(has_node(n1, v[0], v[1], v[2]));

  auto n2 = interpolation_nodes(2);
  CHECK(n2.rows() == 10);
  const auto& v = reference_vertices();
  for (int a = 0; a < 4; ++a) {
    CHECK(has_node(n2, v[a][0], v[a][1], v[a][2]));
    for (int b = a + 1; b < 4; ++b)
      CHECK(has_node(n2, 0.5 * (v[a][0] + v[b][0]), 0.5 * (v[a][1] + v[b][1]), 0.5 * (v[a][2] + v[b][2])));
  }

  auto el = build_reference_element(4);
  CHECK(el.np == 35);
  CHECK(el.nfp == 15);
  for (const auto& f : el.face_node_index) CHECK(f.size() == 15u);
}

TEST_CASE("matrix shapes and integrals") {
  auto el = build_reference_element(1);
  CHECK(el.np == 4);
  CHECK(el.nfp == 3);
  CHECK(el.lift.rows() == 4);
  CHECK(el.lift.cols() == 12);

  for (int n = 1; n <= 6; ++n) {
    auto e = build_reference_element(n);
    CHECK(e.mass.sum() == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    for (int f : {0, 1, 3}) CHECK(e.face_mass[f].sum() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(e.face_mass[2].sum() == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-12));
  }
}

TEST_CASE("mass times operators gives stiffness and face mass") {
  for (int n = 1; n <= 6; ++n) {
    CAPTURE(n);
    auto el = build_reference_element(n);
    for (int mu = 0; mu < 3; ++mu) CHECK(rel_err(el.mass * el.diff[mu], el.stiffness[mu]) < 1e-12);
    CHECK(rel_err(el.mass * el.lift, el.embedded_face_mass()) < 1e-12);
  }
}

TEST_CASE("derivatives of monomials are exact") {
  for (int n = 1; n <= 6; ++n) {
    CAPTURE(n);
    auto el = build_reference_element(n);
    double worst = 0.0;
    for (int a = 0; a <= n; ++a) {
      for (int b = 0; a + b <= n; ++b) {
        for (int c = 0; a + b + c <= n; ++c) {
          std::vector<double> u(el.np);
          Matrix exact(el.np, 3);
          for (int i = 0; i < el.np; ++i) {
            double r = el.nodes(i, 0), s = el.nodes(i, 1), t = el.nodes(i, 2);
            u[i] = std::pow(r, a) * std::pow(s, b) * std::pow(t, c);
            exact(i, 0) = a ? a * std::pow(r, a - 1) * std::pow(s, b) * std::pow(t, c) : 0.0;
            exact(i, 1) = b ? b * std::pow(r, a) * std::pow(s, b - 1) * std::pow(t, c) : 0.0;
            exact(i, 2) = c ? c * std::pow(r, a) * std::pow(s, b) * std::pow(t, c - 1) : 0.0;
          }
          for (int mu = 0; mu < 3; ++mu) {
            Vector d = differentiate_reference(el, u, static_cast<Axis>(mu));
            worst = std::max(worst, (d - exact.col(mu)).cwiseAbs().maxCoeff());
          }
        }
      }
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("differentiate_reference simple fields") {
  auto el = build_reference_element(3);
  std::vector<double> one(el.np, 1.0), r(el.np), rs(el.np);
  for (int i = 0; i < el.np; ++i) {
    r[i] = el.nodes(i, 0);
    rs[i] = el.nodes(i, 0) * el.nodes(i, 1);
  }
  CHECK(differentiate_reference(el, one, Axis::r).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((differentiate_reference(el, r, Axis::r).array() - 1.0).abs().maxCoeff() < 1e-12);
  Vector d = differentiate_reference(el, rs, Axis::s);
  for (int i = 0; i < el.np; ++i) CHECK(std::abs(d[i] - r[i]) < 1e-12);
}

TEST_CASE("face nodes lie on their faces") {
  auto el = build_reference_element(3);
  for (int f = 0; f < kFaces; ++f) {
    const auto& v = reference_vertices()[kOppositeVertex[f]];
    auto n = reference_face_normal(f);
    for (int i : el.face_node_index[f]) {
      // inward distance from the face plane equals 0 on the face, the opposite vertex is off it
      double d = 0.0;
      const auto& a = reference_vertices()[kFaceVertices[f][0]];
      for (int x = 0; x < 3; ++x) d += (el.nodes(i, x) - a[x]) * n[x];
      CHECK(std::abs(d) < 1e-12);
    }
    double dv = 0.0;
    const auto& a = reference_vertices()[kFaceVertices[f][0]];
    for (int x = 0; x < 3; ++x) dv += (v[x] - a[x]) * n[x];
    CHECK(dv < 0.0);
  }
}

TEST_CASE("matrix text roundtrip") {
  auto el = build_reference_element(2);
  std::stringstream ss;
  write_matrix(ss, "lift", el.lift);
  std::string name;
  Matrix m;
  REQUIRE(read_matrix(ss, name, m));
  CHECK(name == "lift");
  CHECK(m == el.lift);
  CHECK_FALSE(read_matrix(ss, name, m));
}
