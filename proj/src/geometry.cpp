#include "bioscape/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <tuple>

namespace bioscape {

namespace {

auto primitive_key(const Primitive& p) {
  if (const auto* s = std::get_if<Sphere>(&p)) {
    return std::make_tuple(0, s->radius, 0.0, 0.0);
  }
  const auto& b = std::get<Box>(p);
  return std::make_tuple(1, b.half_extents.x(), b.half_extents.y(), b.half_extents.z());
}

// World-axis half extents of an oriented box.
Vec3 world_half_extents(const PlacedBox& b) {
  const Eigen::Matrix3d r = b.orientation.toRotationMatrix();
  return r.cwiseAbs() * b.half_extents;
}

bool sphere_in_box(const PlacedSphere& s, const BoxRegion& region) {
  for (int i = 0; i < 3; ++i) {
    if (s.center[i] - s.radius < region.min[i] - kGeometryTolerance) return false;
    if (s.center[i] + s.radius > region.max[i] + kGeometryTolerance) return false;
  }
  return true;
}

bool box_in_box(const PlacedBox& b, const BoxRegion& region) {
  const Vec3 half = world_half_extents(b);
  for (int i = 0; i < 3; ++i) {
    if (b.center[i] - half[i] < region.min[i] - kGeometryTolerance) return false;
    if (b.center[i] + half[i] > region.max[i] + kGeometryTolerance) return false;
  }
  return true;
}

template <typename Placed>
bool primitive_in_region(const Placed& p, const Region& region) {
  return std::visit(
      [&](const auto& r) -> bool {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, AllRegion>) {
          return true;
        } else if constexpr (std::is_same_v<R, BoxRegion>) {
          if constexpr (std::is_same_v<Placed, PlacedSphere>) {
            return sphere_in_box(p, r);
          } else {
            return box_in_box(p, r);
          }
        } else {
          return std::any_of(r.parts.begin(), r.parts.end(),
                             [&](const Region& part) { return primitive_in_region(p, part); });
        }
      },
      region.value);
}

double box_volume(const BoxRegion& b) {
  const Vec3 d = (b.max - b.min).cwiseMax(0.0);
  return d.x() * d.y() * d.z();
}

}  // namespace

bool operator==(const UnionRegion& a, const UnionRegion& b) { return a.parts == b.parts; }

bool primitive_less(const Primitive& a, const Primitive& b) {
  return primitive_key(a) < primitive_key(b);
}

double bounding_radius(const Primitive& p) {
  if (const auto* s = std::get_if<Sphere>(&p)) return s->radius;
  return std::get<Box>(p).half_extents.norm();
}

double layout_width(const Primitive& p) {
  if (const auto* s = std::get_if<Sphere>(&p)) return 2.0 * s->radius;
  return 2.0 * std::get<Box>(p).half_extents.x();
}

double volume(const Primitive& p) {
  if (const auto* s = std::get_if<Sphere>(&p)) {
    return 4.0 / 3.0 * std::numbers::pi * s->radius * s->radius * s->radius;
  }
  const Vec3& h = std::get<Box>(p).half_extents;
  return 8.0 * h.x() * h.y() * h.z();
}

Shape Shape::sphere(double radius) { return from_parts({Sphere{radius}}); }

Shape Shape::box(double hx, double hy, double hz) { return from_parts({Box{Vec3(hx, hy, hz)}}); }

Shape Shape::from_parts(std::vector<Primitive> parts) {
  Shape s;
  s.parts_ = std::move(parts);
  std::stable_sort(s.parts_.begin(), s.parts_.end(), primitive_less);
  return s;
}

Shape compose_shapes(const Shape& a, const Shape& b) {
  std::vector<Primitive> parts;
  parts.reserve(a.parts().size() + b.parts().size());
  parts.insert(parts.end(), a.parts().begin(), a.parts().end());
  parts.insert(parts.end(), b.parts().begin(), b.parts().end());
  return Shape::from_parts(std::move(parts));
}

void SpaceOccupancy::append(const SpaceOccupancy& other) {
  spheres.insert(spheres.end(), other.spheres.begin(), other.spheres.end());
  boxes.insert(boxes.end(), other.boxes.begin(), other.boxes.end());
}

std::vector<Vec3> layout_offsets(std::span<const Primitive> parts) {
  std::vector<Vec3> offsets;
  offsets.reserve(parts.size());
  if (parts.empty()) return offsets;
  if (parts.size() == 1) {
    offsets.emplace_back(Vec3::Zero());
    return offsets;
  }
  double cursor = 0.0;
  double weight_sum = 0.0;
  double weighted = 0.0;
  double plain = 0.0;
  for (const auto& part : parts) {
    const double width = layout_width(part);
    const double x = cursor + width / 2.0;
    cursor += width;
    offsets.emplace_back(x, 0.0, 0.0);
    const double w = volume(part);
    weight_sum += w;
    weighted += w * x;
    plain += x;
  }
  const double barycentre =
      weight_sum > 0.0 ? weighted / weight_sum : plain / static_cast<double>(parts.size());
  for (auto& o : offsets) o.x() -= barycentre;
  return offsets;
}

SpaceOccupancy place_primitive(const Placement& mu, const Primitive& part) {
  SpaceOccupancy occ;
  if (const auto* s = std::get_if<Sphere>(&part)) {
    occ.spheres.push_back({mu.origin, s->radius});
  } else {
    occ.boxes.push_back({mu.origin, std::get<Box>(part).half_extents, mu.orientation});
  }
  return occ;
}

SpaceOccupancy place(const Placement& mu, const Shape& shape) {
  const auto& parts = shape.parts();
  const auto offsets = layout_offsets(parts);
  SpaceOccupancy occ;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Vec3 center = mu.origin + mu.orientation * offsets[i];
    if (const auto* s = std::get_if<Sphere>(&parts[i])) {
      occ.spheres.push_back({center, s->radius});
    } else {
      occ.boxes.push_back({center, std::get<Box>(parts[i]).half_extents, mu.orientation});
    }
  }
  return occ;
}

bool overlap(const PlacedSphere& a, const PlacedSphere& b) {
  const double depth = a.radius + b.radius - (a.center - b.center).norm();
  return depth > kGeometryTolerance;
}

bool overlap(const PlacedSphere& s, const PlacedBox& b) {
  const Vec3 local = b.orientation.conjugate() * (s.center - b.center);
  const Vec3 closest = local.cwiseMax(-b.half_extents).cwiseMin(b.half_extents);
  const double outside = (local - closest).norm();
  double depth;
  if (outside > 0.0) {
    depth = s.radius - outside;
  } else {
    const Vec3 slack = b.half_extents - local.cwiseAbs();
    depth = s.radius + slack.minCoeff();
  }
  return depth > kGeometryTolerance;
}

bool overlap(const PlacedBox& a, const PlacedBox& b) {
  // Separating-axis test over the 15 candidate axes.
  const Eigen::Matrix3d ra = a.orientation.toRotationMatrix();
  const Eigen::Matrix3d rb = b.orientation.toRotationMatrix();
  const Vec3 t = b.center - a.center;
  std::array<Vec3, 15> axes;
  std::size_t n = 0;
  for (int i = 0; i < 3; ++i) axes[n++] = ra.col(i);
  for (int i = 0; i < 3; ++i) axes[n++] = rb.col(i);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Vec3 c = ra.col(i).cross(rb.col(j));
      const double len = c.norm();
      if (len > 1e-9) axes[n++] = c / len;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& axis = axes[k];
    double proj_a = 0.0;
    double proj_b = 0.0;
    for (int i = 0; i < 3; ++i) {
      proj_a += a.half_extents[i] * std::abs(ra.col(i).dot(axis));
      proj_b += b.half_extents[i] * std::abs(rb.col(i).dot(axis));
    }
    const double penetration = proj_a + proj_b - std::abs(t.dot(axis));
    if (penetration <= kGeometryTolerance) return false;
  }
  return true;
}

bool overlap(const SpaceOccupancy& a, const SpaceOccupancy& b) {
  for (const auto& s : a.spheres) {
    for (const auto& t : b.spheres) {
      if (overlap(s, t)) return true;
    }
    for (const auto& t : b.boxes) {
      if (overlap(s, t)) return true;
    }
  }
  for (const auto& s : a.boxes) {
    for (const auto& t : b.spheres) {
      if (overlap(t, s)) return true;
    }
    for (const auto& t : b.boxes) {
      if (overlap(s, t)) return true;
    }
  }
  return false;
}

double distance(const Placement& a, const Placement& b) { return (a.origin - b.origin).norm(); }

Placement translate(double omega, const Placement& mu, CounterRng& rng) {
  if (omega == 0.0) return mu;
  double u1, u2, s;
  do {
    u1 = 2.0 * rng.uniform() - 1.0;
    u2 = 2.0 * rng.uniform() - 1.0;
    s = u1 * u1 + u2 * u2;
  } while (s >= 1.0 || s == 0.0);
  const double root = std::sqrt(1.0 - s);
  Vec3 direction(2.0 * u1 * root, 2.0 * u2 * root, 1.0 - 2.0 * s);
  direction.normalize();
  Placement moved = mu;
  moved.origin += omega * direction;
  return moved;
}

bool contains(const Region& region, const SpaceOccupancy& occ) {
  for (const auto& s : occ.spheres) {
    if (!primitive_in_region(s, region)) return false;
  }
  for (const auto& b : occ.boxes) {
    if (!primitive_in_region(b, region)) return false;
  }
  return true;
}

BoundingSphere bounding_sphere(const SpaceOccupancy& occ) {
  BoundingSphere bs;
  const std::size_t n = occ.size();
  if (n == 0) return bs;
  Vec3 sum = Vec3::Zero();
  for (const auto& s : occ.spheres) sum += s.center;
  for (const auto& b : occ.boxes) sum += b.center;
  bs.center = sum / static_cast<double>(n);
  for (const auto& s : occ.spheres) {
    bs.radius = std::max(bs.radius, (s.center - bs.center).norm() + s.radius);
  }
  for (const auto& b : occ.boxes) {
    bs.radius = std::max(bs.radius, (b.center - bs.center).norm() + b.half_extents.norm());
  }
  return bs;
}

BoxRegion sampling_bounds(const Region& region, const BoxRegion& world) {
  return std::visit(
      [&](const auto& r) -> BoxRegion {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, AllRegion>) {
          return world;
        } else if constexpr (std::is_same_v<R, BoxRegion>) {
          return r;
        } else {
          BoxRegion bounds{Vec3::Constant(INFINITY), Vec3::Constant(-INFINITY)};
          for (const auto& part : r.parts) {
            const BoxRegion b = sampling_bounds(part, world);
            bounds.min = bounds.min.cwiseMin(b.min);
            bounds.max = bounds.max.cwiseMax(b.max);
          }
          return bounds;
        }
      },
      region.value);
}

Vec3 sample_point(const Region& region, const BoxRegion& world, CounterRng& rng) {
  if (const auto* u = std::get_if<UnionRegion>(&region.value); u && !u->parts.empty()) {
    // Pick a part with probability proportional to its sampling volume.
    std::vector<double> weights;
    double total = 0.0;
    for (const auto& part : u->parts) {
      weights.push_back(box_volume(sampling_bounds(part, world)));
      total += weights.back();
    }
    double target = rng.uniform() * total;
    for (std::size_t i = 0; i < u->parts.size(); ++i) {
      if (target < weights[i] || i + 1 == u->parts.size()) {
        return sample_point(u->parts[i], world, rng);
      }
      target -= weights[i];
    }
  }
  const BoxRegion bounds = sampling_bounds(region, world);
  Vec3 p;
  for (int i = 0; i < 3; ++i) p[i] = bounds.min[i] + rng.uniform() * (bounds.max[i] - bounds.min[i]);
  return p;
}

}  // namespace bioscape
