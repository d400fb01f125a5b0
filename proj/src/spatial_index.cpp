#include "bioscape/spatial_index.hpp"

#include <algorithm>
#include <cmath>

namespace bioscape {

SpatialIndex::SpatialIndex(double cell_size)
    : cell_size_(std::isfinite(cell_size) && cell_size > 1e-6 ? cell_size : 1.0) {}

std::int64_t SpatialIndex::coord(double x) const {
  return static_cast<std::int64_t>(std::floor(x / cell_size_));
}

std::uint64_t SpatialIndex::cell_key(std::int64_t i, std::int64_t j, std::int64_t k) const {
  auto h = static_cast<std::uint64_t>(i) * 0x9E3779B97F4A7C15ull;
  h ^= static_cast<std::uint64_t>(j) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
  h ^= static_cast<std::uint64_t>(k) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
  return h;
}

void SpatialIndex::insert(std::size_t owner, SpaceOccupancy occ) {
  remove(owner);
  if (occ.empty()) return;
  Entry entry;
  entry.bounds = bounding_sphere(occ);
  entry.occ = std::move(occ);
  entry.cell = cell_key(coord(entry.bounds.center.x()), coord(entry.bounds.center.y()),
                        coord(entry.bounds.center.z()));
  max_radius_ = std::max(max_radius_, entry.bounds.radius);
  cells_[entry.cell].push_back(owner);
  entries_.emplace(owner, std::move(entry));
}

void SpatialIndex::remove(std::size_t owner) {
  auto it = entries_.find(owner);
  if (it == entries_.end()) return;
  auto cell = cells_.find(it->second.cell);
  auto& bucket = cell->second;
  auto pos = std::find(bucket.begin(), bucket.end(), owner);
  *pos = bucket.back();
  bucket.pop_back();
  if (bucket.empty()) cells_.erase(cell);
  entries_.erase(it);
}

template <typename Fn>
void SpatialIndex::for_candidates(const BoundingSphere& query, Fn&& fn) const {
  const double reach = query.radius + max_radius_;
  const std::int64_t lo[3] = {coord(query.center.x() - reach), coord(query.center.y() - reach),
                              coord(query.center.z() - reach)};
  const std::int64_t hi[3] = {coord(query.center.x() + reach), coord(query.center.y() + reach),
                              coord(query.center.z() + reach)};
  const std::int64_t span = (hi[0] - lo[0] + 1) * (hi[1] - lo[1] + 1) * (hi[2] - lo[2] + 1);
  if (span < 0 || static_cast<std::size_t>(span) > cells_.size()) {
    // Query reaches more cells than are populated; scan the populated ones.
    for (const auto& [key, bucket] : cells_) {
      for (auto owner : bucket) {
        if (!fn(owner)) return;
      }
    }
    return;
  }
  for (auto i = lo[0]; i <= hi[0]; ++i) {
    for (auto j = lo[1]; j <= hi[1]; ++j) {
      for (auto k = lo[2]; k <= hi[2]; ++k) {
        auto cell = cells_.find(cell_key(i, j, k));
        if (cell == cells_.end()) continue;
        for (auto owner : cell->second) {
          if (!fn(owner)) return;
        }
      }
    }
  }
}

bool SpatialIndex::overlaps_any(const SpaceOccupancy& occ,
                                std::span<const std::size_t> ignore) const {
  if (occ.empty() || entries_.empty()) return false;
  const BoundingSphere query = bounding_sphere(occ);
  bool hit = false;
  for_candidates(query, [&](std::size_t owner) {
    if (std::find(ignore.begin(), ignore.end(), owner) != ignore.end()) return true;
    const Entry& e = entries_.at(owner);
    const double gap = (e.bounds.center - query.center).norm() - e.bounds.radius - query.radius;
    if (gap >= 0.0) return true;
    if (overlap(occ, e.occ)) {
      hit = true;
      return false;
    }
    return true;
  });
  return hit;
}

std::vector<std::size_t> SpatialIndex::overlapping(const SpaceOccupancy& occ) const {
  std::vector<std::size_t> owners;
  if (occ.empty() || entries_.empty()) return owners;
  const BoundingSphere query = bounding_sphere(occ);
  for_candidates(query, [&](std::size_t owner) {
    const Entry& e = entries_.at(owner);
    if (overlap(occ, e.occ)) owners.push_back(owner);
    return true;
  });
  std::sort(owners.begin(), owners.end());
  return owners;
}

}  // namespace bioscape
