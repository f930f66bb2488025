#include <algorithm>
#include <cmath>
#include <map>

#include "dgforge/error.hpp"
#include "dgforge/mesh.hpp"

namespace dgforge {

namespace {

std::array<int, 3> face_key(const Mesh& mesh, int k, int f) {
  std::array<int, 3> key;
  for (int i = 0; i < 3; ++i) key[i] = mesh.tets[k][kFaceVertices[f][i]];
  std::sort(key.begin(), key.end());
  return key;
}

}  // namespace

FaceConnectivity build_connectivity(const Mesh& mesh, const ReferenceElement& refel) {
  const int K = mesh.num_elements();
  FaceConnectivity conn;
  conn.face_entry.assign(4 * K, 0);
  conn.face_side.assign(4 * K, 0);

  std::map<std::array<int, 3>, std::pair<int, int>> first_owner;
  std::map<std::pair<int, int>, std::pair<int, int>> partner;
  for (int k = 0; k < K; ++k) {
    for (int f = 0; f < kFaces; ++f) {
      auto [it, inserted] = first_owner.try_emplace(face_key(mesh, k, f), k, f);
      if (!inserted) {
        partner[it->second] = {k, f};
        partner[{k, f}] = it->second;
      }
    }
  }

  std::vector<Matrix> coords(K);
  for (int k = 0; k < K; ++k) coords[k] = physical_nodes(mesh, refel, k);

  for (int k = 0; k < K; ++k) {
    for (int f = 0; f < kFaces; ++f) {
      auto p = partner.find({k, f});
      if (p == partner.end()) {
        auto tag = mesh.boundary_tag.find({k, f});
        conn.face_entry[4 * k + f] = -static_cast<int>(conn.boundary_faces.size()) - 1;
        conn.boundary_faces.push_back({k, f, tag == mesh.boundary_tag.end() ? kDefaultBoundaryTag : tag->second});
        continue;
      }
      const auto [kp, fp] = p->second;
      if (std::make_pair(kp, fp) < std::make_pair(k, f)) continue;  // already paired from the other side

      InteriorPair pair{k, f, kp, fp, std::vector<int>(refel.nfp, -1)};
      const double tol = 1e-8 * std::max(element_diameter(mesh, k), element_diameter(mesh, kp));
      const auto& idx_m = refel.face_node_index[f];
      const auto& idx_p = refel.face_node_index[fp];
      std::vector<bool> used(refel.nfp, false);
      for (int j = 0; j < refel.nfp; ++j) {
        int best = -1;
        double best_d = 0.0;
        for (int q = 0; q < refel.nfp; ++q) {
          const double d = (coords[k].row(idx_m[j]) - coords[kp].row(idx_p[q])).norm();
          if (best < 0 || d < best_d) {
            best = q;
            best_d = d;
          }
        }
        if (best_d > tol || used[best]) {
          throw Error("face node mismatch between element " + std::to_string(k) + " face " + std::to_string(f) +
                      " and element " + std::to_string(kp) + " face " + std::to_string(fp));
        }
        used[best] = true;
        pair.node_permutation[j] = best;
      }
      const int idx = static_cast<int>(conn.interior_pairs.size());
      conn.face_entry[4 * k + f] = idx;
      conn.face_entry[4 * kp + fp] = idx;
      conn.face_side[4 * k + f] = 0;
      conn.face_side[4 * kp + fp] = 1;
      conn.interior_pairs.push_back(std::move(pair));
    }
  }
  return conn;
}

}  // namespace dgforge
