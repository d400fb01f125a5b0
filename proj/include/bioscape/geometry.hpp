#pragma once

#include <Eigen/Geometry>

#include <span>
#include <variant>
#include <vector>

#include "bioscape/random.hpp"

namespace bioscape {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

/// Penetration depth below which two primitives are considered touching, not
/// overlapping. Tangent shapes are legal neighbours.
inline constexpr double kGeometryTolerance = 1e-9;

struct Sphere {
  double radius = 0.0;
  friend bool operator==(const Sphere&, const Sphere&) = default;
};

struct Box {
  Vec3 half_extents = Vec3::Zero();
  friend bool operator==(const Box& a, const Box& b) { return a.half_extents == b.half_extents; }
};

using Primitive = std::variant<Sphere, Box>;

/// Strict weak order used to keep shape multisets canonical.
bool primitive_less(const Primitive& a, const Primitive& b);
double bounding_radius(const Primitive& p);
/// Extent of the primitive along its local x axis.
double layout_width(const Primitive& p);
double volume(const Primitive& p);

/// A shape is a multiset of primitives. The empty multiset is the shape of
/// the inert process; a single element is a primitive shape; more elements
/// form a juxtaposed composite. Parts are kept sorted, so composition is
/// commutative and associative by construction.
class Shape {
 public:
  Shape() = default;
  static Shape empty() { return Shape(); }
  static Shape sphere(double radius);
  static Shape box(double hx, double hy, double hz);
  static Shape from_parts(std::vector<Primitive> parts);

  bool is_empty() const { return parts_.empty(); }
  bool is_composite() const { return parts_.size() > 1; }
  const std::vector<Primitive>& parts() const { return parts_; }

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::vector<Primitive> parts_;
};

Shape compose_shapes(const Shape& a, const Shape& b);

/// Locates a shape: barycentre at origin, rotated by orientation.
struct Placement {
  Vec3 origin = Vec3::Zero();
  Quat orientation = Quat::Identity();

  friend bool operator==(const Placement& a, const Placement& b) {
    return a.origin == b.origin && a.orientation.coeffs() == b.orientation.coeffs();
  }
};

struct AllRegion {
  friend bool operator==(const AllRegion&, const AllRegion&) = default;
};

struct BoxRegion {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  friend bool operator==(const BoxRegion& a, const BoxRegion& b) {
    return a.min == b.min && a.max == b.max;
  }
};

struct Region;

struct UnionRegion {
  std::vector<Region> parts;
  friend bool operator==(const UnionRegion&, const UnionRegion&);
};

/// Movement space of an entity.
struct Region {
  std::variant<AllRegion, BoxRegion, UnionRegion> value;

  static Region all() { return Region{AllRegion{}}; }
  static Region box(const Vec3& min, const Vec3& max) { return Region{BoxRegion{min, max}}; }
  friend bool operator==(const Region&, const Region&) = default;
};

struct PlacedSphere {
  Vec3 center;
  double radius;
};

struct PlacedBox {
  Vec3 center;
  Vec3 half_extents;
  Quat orientation;
};

/// Space occupied in the global frame.
struct SpaceOccupancy {
  std::vector<PlacedSphere> spheres;
  std::vector<PlacedBox> boxes;

  bool empty() const { return spheres.empty() && boxes.empty(); }
  std::size_t size() const { return spheres.size() + boxes.size(); }
  void append(const SpaceOccupancy& other);
};

/// Local offsets of the parts of a composite, in the order given. Parts are
/// laid out tangentially along the local x axis and recentred so the
/// volume-weighted barycentre is at zero.
std::vector<Vec3> layout_offsets(std::span<const Primitive> parts);

SpaceOccupancy place(const Placement& mu, const Shape& shape);
SpaceOccupancy place_primitive(const Placement& mu, const Primitive& part);

bool overlap(const PlacedSphere& a, const PlacedSphere& b);
bool overlap(const PlacedSphere& a, const PlacedBox& b);
bool overlap(const PlacedBox& a, const PlacedBox& b);
bool overlap(const SpaceOccupancy& a, const SpaceOccupancy& b);

double distance(const Placement& a, const Placement& b);

/// Moves the origin by exactly omega in a uniformly random direction
/// (Marsaglia's method). Orientation is untouched.
Placement translate(double omega, const Placement& mu, CounterRng& rng);

bool contains(const Region& region, const SpaceOccupancy& occ);

/// Bounding sphere of an occupancy (centroid of part centres, enclosing radius).
struct BoundingSphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};
BoundingSphere bounding_sphere(const SpaceOccupancy& occ);

/// Finite box used to sample positions in `region`; `world` stands in for
/// the unbounded region.
BoxRegion sampling_bounds(const Region& region, const BoxRegion& world);
/// Uniform point in region (restricted to world for unbounded parts).
Vec3 sample_point(const Region& region, const BoxRegion& world, CounterRng& rng);

}  // namespace bioscape
