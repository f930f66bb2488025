#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "doctest.h"
#include "dgforge/error.hpp"
#include "dgforge/mesh.hpp"

using namespace dgforge;

namespace {

const char* kTwoTets =
    "tetmesh 1\n"
    "5 2\n"
    "0 0 0\n1 0 0\n0 1 0\n0 0 1\n1 1 1\n"
    "0 1 2 3\n"
    "1 2 3 4\n";

Mesh parse(const std::string& text) {
  std::istringstream in(text);
  return parse_mesh(in);
}

// Counts interior faces by comparing face centroids of every face with every other face.
int brute_force_interior_faces(const Mesh& mesh) {
  std::vector<Point> c;
  for (const auto& t : mesh.tets) {
    for (int f = 0; f < 4; ++f) {
      Point p{0, 0, 0};
      for (int v : kFaceVertices[f])
        for (int d = 0; d < 3; ++d) p[d] += mesh.vertices[t[v]][d] / 3.0;
      c.push_back(p);
    }
  }
  int matches = 0;
  for (size_t a = 0; a < c.size(); ++a) {
    for (size_t b = a + 1; b < c.size(); ++b) {
      double d = std::abs(c[a][0] - c[b][0]) + std::abs(c[a][1] - c[b][1]) + std::abs(c[a][2] - c[b][2]);
      if (d < 1e-12) ++matches;
    }
  }
  return matches;
}

double brute_volume(const Mesh& mesh, int k) {
  const auto& t = mesh.tets[k];
  const auto& a = mesh.vertices[t[0]];
  Eigen::Matrix3d e;
  for (int c = 0; c < 3; ++c)
    for (int d = 0; d < 3; ++d) e(d, c) = mesh.vertices[t[c + 1]][d] - a[d];
  return std::abs(e.determinant()) / 6.0;
}

}  // namespace

TEST_CASE("box generator volumes") {
  auto m = generate_box_mesh(1, 1, 1);
  CHECK(m.num_elements() == 6);
  double vol = 0.0;
  for (int k = 0; k < m.num_elements(); ++k) vol += tet_signed_volume(m, k);
  CHECK(vol == doctest::Approx(1.0).epsilon(1e-12));

  auto big = generate_box_mesh(1, 1, 1, {0, 0, 0}, {2, 2, 2});
  vol = 0.0;
  for (int k = 0; k < big.num_elements(); ++k) vol += tet_signed_volume(big, k);
  CHECK(vol == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("box generator interior faces match brute force") {
  auto refel = build_reference_element(1);
  for (auto dims : {std::array<int, 3>{2, 1, 1}, std::array<int, 3>{2, 2, 2}, std::array<int, 3>{3, 2, 1}}) {
    auto m = generate_box_mesh(dims[0], dims[1], dims[2]);
    CHECK(m.num_elements() == 6 * dims[0] * dims[1] * dims[2]);
    auto conn = build_connectivity(m, refel);
    int expected = brute_force_interior_faces(m);
    CHECK(static_cast<int>(conn.interior_pairs.size()) == expected);
    CHECK(2 * expected + static_cast<int>(conn.boundary_faces.size()) == 4 * m.num_elements());
  }
  auto m = generate_box_mesh(2, 1, 1);
  // 2 interface faces between the cells plus 6 internal faces per cell
  CHECK(brute_force_interior_faces(m) == 2 + 2 * 6);
}

TEST_CASE("mesh file parsing") {
  auto one = parse("tetmesh 1\n4 1\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n0 1 2 3\n");
  CHECK(one.num_elements() == 1);
  auto conn1 = build_connectivity(one, build_reference_element(2));
  CHECK(conn1.interior_pairs.empty());
  CHECK(conn1.boundary_faces.size() == 4u);
  for (const auto& b : conn1.boundary_faces) CHECK(b.tag == kDefaultBoundaryTag);

  auto two = parse(std::string(kTwoTets) + "# tags\nb 0 0 inflow\n");
  auto conn2 = build_connectivity(two, build_reference_element(2));
  CHECK(conn2.interior_pairs.size() == 1u);
  CHECK(conn2.boundary_faces.size() == 6u);
  int tagged = 0;
  for (const auto& b : conn2.boundary_faces) tagged += b.tag == "inflow";
  CHECK(tagged == 1);

  try {
    parse("tetmesh 1\n5 2\n0 0 0\n1 0 0\n0 1 0\n");
    FAIL("truncated mesh parsed");
  } catch (const ParseError& e) {
    CHECK(e.line() >= 5);
  }
  CHECK_THROWS_AS(parse("tetmesh 2\n4 1\n"), ParseError);
}

TEST_CASE("save and load roundtrip") {
  auto m = parse(std::string(kTwoTets) + "b 1 2 outflow\n");
  const std::string path = "test_mesh_roundtrip.mesh";
  save_mesh(m, path);
  auto back = load_mesh(path);
  CHECK(back.vertices == m.vertices);
  CHECK(back.tets == m.tets);
  CHECK(back.boundary_tag == m.boundary_tag);
  std::remove(path.c_str());
}

TEST_CASE("orientation is fixed on load") {
  auto m = parse("tetmesh 1\n4 1\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n0 2 1 3\n");
  CHECK(tet_signed_volume(m, 0) > 0.0);
  CHECK_THROWS_AS(parse("tetmesh 1\n4 1\n0 0 0\n1 0 0\n2 0 0\n0 0 1\n0 1 2 3\n"), Error);
}

TEST_CASE("two-tet face permutation") {
  auto refel = build_reference_element(3);
  auto m = parse(kTwoTets);
  auto conn = build_connectivity(m, refel);
  REQUIRE(conn.interior_pairs.size() == 1u);
  const auto& p = conn.interior_pairs[0];
  std::set<int> seen(p.node_permutation.begin(), p.node_permutation.end());
  CHECK(seen.size() == static_cast<size_t>(refel.nfp));
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == refel.nfp - 1);

  auto xm = physical_nodes(m, refel, p.elem_m);
  auto xp = physical_nodes(m, refel, p.elem_p);
  for (int j = 0; j < refel.nfp; ++j) {
    int im = refel.face_node_index[p.face_m][j];
    int ip = refel.face_node_index[p.face_p][p.node_permutation[j]];
    CHECK((xm.row(im) - xp.row(ip)).norm() < 1e-12);
  }
  CHECK(conn.entry(p.elem_m, p.face_m) == 0);
  CHECK(conn.face_side[4 * p.elem_p + p.face_p] == 1);
}

TEST_CASE("geometric factors") {
  auto refel = build_reference_element(1);
  Mesh ref;
  for (const auto& v : reference_vertices()) ref.vertices.push_back(v);
  ref.tets.push_back({0, 1, 2, 3});
  validate_mesh(ref);
  auto g = compute_geometric_factors(ref, refel);
  CHECK(g.jacobian[0] == doctest::Approx(1.0).epsilon(1e-14));
  for (int mu = 0; mu < 3; ++mu)
    for (int nu = 0; nu < 3; ++nu) CHECK(g.drdx[0][3 * mu + nu] == doctest::Approx(mu == nu ? 1.0 : 0.0));

  Mesh scaled = ref;
  for (auto& v : scaled.vertices)
    for (auto& x : v) x *= 2.0;
  CHECK(compute_geometric_factors(scaled, refel).jacobian[0] == doctest::Approx(8.0).epsilon(1e-14));

  auto box = generate_box_mesh(2, 2, 2, {0, 0, 0}, {1.0, 2.0, 0.5});
  auto gb = compute_geometric_factors(box, refel);
  for (int k = 0; k < box.num_elements(); ++k) {
    CHECK(gb.jacobian[k] * 4.0 / 3.0 == doctest::Approx(brute_volume(box, k)).epsilon(1e-12));
    for (int f = 0; f < 4; ++f) {
      const auto& n = gb.normal[k][f];
      CHECK(std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("partitions") {
  auto refel = build_reference_element(1);
  auto m = generate_box_mesh(4, 4, 4);
  auto conn = build_connectivity(m, refel);
  const int K = m.num_elements();

  auto one = greedy_partition(conn, K, 1);
  CHECK(one.blocks.size() == static_cast<size_t>(K));
  CHECK(one.interior_ratio == 0.0);
  auto all = greedy_partition(conn, K, K);
  CHECK(all.blocks.size() == 1u);
  CHECK(all.interior_ratio == 1.0);

  auto greedy = greedy_partition(conn, K, 24);
  auto contiguous = contiguous_partition(conn, K, 24);
  CHECK(greedy.interior_ratio >= contiguous.interior_ratio);
  CHECK(greedy.interior_ratio == doctest::Approx(partition_interior_ratio(conn, greedy.blocks, K)));

  std::vector<int> count(K, 0);
  for (const auto& b : greedy.blocks) {
    CHECK(static_cast<int>(b.size()) <= 24);
    for (int k : b) ++count[k];
  }
  for (int c : count) CHECK(c == 1);

  // smaller capacities beat index-order chunks on every box size
  for (int n : {2, 3, 5}) {
    auto mb = generate_box_mesh(n, n, n);
    auto cb = build_connectivity(mb, refel);
    for (int cap : {8, 16})
      CHECK(greedy_partition(cb, mb.num_elements(), cap).interior_ratio >
            contiguous_partition(cb, mb.num_elements(), cap).interior_ratio);
  }
}
