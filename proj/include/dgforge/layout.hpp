#pragma once

#include <cstdint>
#include <vector>

#include "dgforge/mesh.hpp"

namespace dgforge {

inline constexpr int kDefaultGranule = 16;
inline constexpr int kDefaultMicroblockMax = 8;

/// Element-major padded storage: K_M elements per microblock, each
/// microblock padded up to a multiple of `granule` words.
struct MicroblockLayout {
  int np = 0;                 // words per element
  int elements_per_block = 1; // K_M
  int granule = 1;
  int padded_size = 0;        // words per microblock
  int num_elements = 0;
  int num_microblocks = 0;

  std::int64_t total_words() const { return static_cast<std::int64_t>(num_microblocks) * padded_size; }
  int padding() const { return padded_size - elements_per_block * np; }

  std::int64_t dof_index(int k, int i) const;
  /// True if word w holds element data (false for padding).
  bool is_data_word(std::int64_t w) const;
};

/// Picks K_M in 1..km_max minimising the padding fraction (ties to the smallest).
MicroblockLayout choose_microblock(int np, int granule = kDefaultGranule, int km_max = kDefaultMicroblockMax,
                                   int num_elements = 0);

/// Same K_M and granule, different word count per element.
MicroblockLayout derived_layout(const MicroblockLayout& base, int words_per_element);

/// Layout of the facial buffer consumed by lift: 4*nfp words per element.
inline MicroblockLayout facial_layout(const MicroblockLayout& volume, int nfp) { return derived_layout(volume, 4 * nfp); }

/// Word offsets used by the gather stage, nfp entries per face.
struct FaceIndexTables {
  int nfp = 0;
  // Interior pairs, in connectivity order.
  std::vector<std::int64_t> pair_interior;   // volume offsets of (k-, f-) face nodes
  std::vector<std::int64_t> pair_exterior;   // volume offsets of the coincident (k+, f+) nodes
  std::vector<std::int64_t> pair_facial_m;   // facial-buffer slots of (k-, f-) nodes
  std::vector<std::int64_t> pair_facial_p;   // facial-buffer slots of the coincident (k+, f+) nodes
  // Boundary faces, in connectivity order.
  std::vector<std::int64_t> boundary_interior;
  std::vector<std::int64_t> boundary_facial;
};

FaceIndexTables face_dof_gather_indices(const MicroblockLayout& layout, const ReferenceElement& refel,
                                        const FaceConnectivity& conn);

}  // namespace dgforge
