#include <algorithm>
#include <set>

#include "dgforge/error.hpp"
#include "dgforge/mesh.hpp"

namespace dgforge {

namespace {

std::vector<std::vector<int>> neighbours(const FaceConnectivity& conn, int num_elements) {
  std::vector<std::vector<int>> nb(num_elements);
  for (const auto& p : conn.interior_pairs) {
    nb[p.elem_m].push_back(p.elem_p);
    nb[p.elem_p].push_back(p.elem_m);
  }
  return nb;
}

}  // namespace

double partition_interior_ratio(const FaceConnectivity& conn, const std::vector<std::vector<int>>& blocks,
                                int num_elements) {
  if (conn.interior_pairs.empty()) return 0.0;
  std::vector<int> owner(num_elements, -1);
  for (size_t b = 0; b < blocks.size(); ++b) {
    for (int k : blocks[b]) owner[k] = static_cast<int>(b);
  }
  size_t inside = 0;
  for (const auto& p : conn.interior_pairs) inside += owner[p.elem_m] == owner[p.elem_p];
  return static_cast<double>(inside) / static_cast<double>(conn.interior_pairs.size());
}

GatherPartition greedy_partition(const FaceConnectivity& conn, int num_elements, int capacity) {
  if (capacity < 1) throw Error("partition capacity must be at least 1");
  const auto nb = neighbours(conn, num_elements);
  std::vector<bool> assigned(num_elements, false);
  GatherPartition part;
  part.capacity = capacity;

  int next_seed = 0;
  while (true) {
    while (next_seed < num_elements && assigned[next_seed]) ++next_seed;
    if (next_seed == num_elements) break;

    std::vector<int> block{next_seed};
    assigned[next_seed] = true;
    // score[k]: face pairs k would close with the current block.
    std::vector<int> score(num_elements, 0);
    std::set<int> frontier;
    auto absorb = [&](int k) {
      for (int n : nb[k]) {
        if (assigned[n]) continue;
        ++score[n];
        frontier.insert(n);
      }
    };
    absorb(next_seed);
    while (static_cast<int>(block.size()) < capacity && !frontier.empty()) {
      int best = -1;
      for (int k : frontier) {
        if (best < 0 || score[k] > score[best]) best = k;
      }
      frontier.erase(best);
      assigned[best] = true;
      block.push_back(best);
      absorb(best);
    }
    part.blocks.push_back(std::move(block));
  }
  part.interior_ratio = partition_interior_ratio(conn, part.blocks, num_elements);
  return part;
}

GatherPartition contiguous_partition(const FaceConnectivity& conn, int num_elements, int capacity) {
  if (capacity < 1) throw Error("partition capacity must be at least 1");
  GatherPartition part;
  part.capacity = capacity;
  for (int k = 0; k < num_elements; k += capacity) {
    std::vector<int> block;
    for (int j = k; j < std::min(num_elements, k + capacity); ++j) block.push_back(j);
    part.blocks.push_back(std::move(block));
  }
  part.interior_ratio = partition_interior_ratio(conn, part.blocks, num_elements);
  return part;
}

}  // namespace dgforge
