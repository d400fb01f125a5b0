#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "bioscape/geometry.hpp"

namespace bioscape {

/// Uniform hash grid over owner occupancies, the broad phase for overlap
/// queries. Each owner is bucketed by the centre of its bounding sphere;
/// queries scan the cells that any owner within reach could be bucketed in.
class SpatialIndex {
 public:
  /// cell_size should be about the largest primitive diameter in play.
  explicit SpatialIndex(double cell_size);

  void insert(std::size_t owner, SpaceOccupancy occ);
  void remove(std::size_t owner);
  bool contains_owner(std::size_t owner) const { return entries_.count(owner) != 0; }
  std::size_t size() const { return entries_.size(); }

  /// True if occ overlaps the occupancy of any indexed owner not in `ignore`.
  bool overlaps_any(const SpaceOccupancy& occ, std::span<const std::size_t> ignore = {}) const;

  /// Owners whose occupancy overlaps occ.
  std::vector<std::size_t> overlapping(const SpaceOccupancy& occ) const;

 private:
  struct Entry {
    SpaceOccupancy occ;
    BoundingSphere bounds;
    std::uint64_t cell;
  };

  std::int64_t coord(double x) const;
  std::uint64_t cell_key(std::int64_t i, std::int64_t j, std::int64_t k) const;
  template <typename Fn>
  void for_candidates(const BoundingSphere& query, Fn&& fn) const;

  double cell_size_;
  double max_radius_ = 0.0;
  std::unordered_map<std::size_t, Entry> entries_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace bioscape
