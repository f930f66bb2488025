#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dgforge/refelem.hpp"

namespace dgforge {

using Point = std::array<double, 3>;

/// Conforming tetrahedral mesh. Every tet is positively oriented once the
/// mesh has passed through validate_mesh (which load/generate both call).
struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 4>> tets;
  /// Tag of a boundary face, keyed by (element, local face). Untagged
  /// boundary faces are reported with the tag "boundary".
  std::map<std::pair<int, int>, std::string> boundary_tag;

  int num_elements() const { return static_cast<int>(tets.size()); }
};

inline const std::string kDefaultBoundaryTag = "boundary";

/// Orients every tet positively (swapping local vertices 1 and 2 where
/// needed) and checks face conformity. Throws on degenerate tets or faces
/// shared by more than two tets.
void validate_mesh(Mesh& mesh);

/// Structured box: each hex cell split into 6 tets around its main diagonal.
Mesh generate_box_mesh(int nx, int ny, int nz, const Point& lo = {0, 0, 0}, const Point& hi = {1, 1, 1});

/// ASCII mesh format:
///   tetmesh 1
///   V K
///   V lines "x y z", K lines "v0 v1 v2 v3", optional lines "b elem face tag".
/// '#' starts a comment.
Mesh load_mesh(const std::string& path);
Mesh parse_mesh(std::istream& in);
void save_mesh(const Mesh& mesh, const std::string& path);

double tet_signed_volume(const Mesh& mesh, int k);

/// Physical coordinates of the reference nodes of element k (np x 3).
Matrix physical_nodes(const Mesh& mesh, const ReferenceElement& refel, int k);

/// Largest edge length of element k.
double element_diameter(const Mesh& mesh, int k);

/// Twice the inscribed-sphere radius of element k.
double inscribed_diameter(const Mesh& mesh, int k);

struct InteriorPair {
  int elem_m, face_m;
  int elem_p, face_p;
  /// node_permutation[j] = index (within face_p's node list) of the node
  /// coinciding with node j of face_m.
  std::vector<int> node_permutation;
};

struct BoundaryFace {
  int elem, face;
  std::string tag;
};

struct FaceConnectivity {
  std::vector<InteriorPair> interior_pairs;
  std::vector<BoundaryFace> boundary_faces;

  /// For (k, f): index into interior_pairs (>= 0) or -(boundary index) - 1.
  /// Interior pairs and boundary faces are both listed in (element, face) order.
  std::vector<int> face_entry;
  /// For (k, f) in an interior pair: 0 if it is the minus side, 1 if plus.
  std::vector<int> face_side;

  int entry(int k, int f) const { return face_entry[4 * k + f]; }
};

FaceConnectivity build_connectivity(const Mesh& mesh, const ReferenceElement& refel);

struct GeometricFactors {
  std::vector<double> jacobian;                     // J_k
  std::vector<std::array<double, 9>> drdx;          // drdx[k][3*mu + nu] = d r_mu / d x_nu
  std::vector<std::array<Point, 4>> normal;         // outward unit normals
  std::vector<std::array<double, 4>> surface_jacobian;  // global / reference face area
};

/// Affine-map factors. The reference element is only used for the face areas.
GeometricFactors compute_geometric_factors(const Mesh& mesh, const ReferenceElement& refel);

struct GatherPartition {
  std::vector<std::vector<int>> blocks;
  int capacity = 1;
  double interior_ratio = 0.0;
};

/// Greedy blocking that grows each block by the neighbour closing the most
/// face pairs (ties to the lowest element index).
GatherPartition greedy_partition(const FaceConnectivity& conn, int num_elements, int capacity);

/// Index-order chunks of `capacity` elements; baseline for greedy_partition.
GatherPartition contiguous_partition(const FaceConnectivity& conn, int num_elements, int capacity);

double partition_interior_ratio(const FaceConnectivity& conn, const std::vector<std::vector<int>>& blocks,
                                int num_elements);

}  // namespace dgforge
