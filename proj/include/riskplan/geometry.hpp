#pragma once

#include <cmath>
#include <optional>

namespace riskplan::geom {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2&) const = default;

  double norm() const { return std::sqrt(x * x + y * y); }
};

inline double dist(Vec2 a, Vec2 b) { return (a - b).norm(); }

double dist_point_segment(Vec2 p, Vec2 a, Vec2 b);

struct Disc {
  Vec2 center;
  double radius = 0.0;
};

// Rectangle swept along the segment a→b with the given half width.
struct Corridor {
  Vec2 a;
  Vec2 b;
  double half_width = 0.0;
};

// Area covered by one skill execution: the approach/retreat corridor plus
// the grasp or placement envelope at its far end.
struct SweepRegion {
  std::optional<Corridor> corridor;
  std::optional<Disc> envelope;

  bool contains(Vec2 p) const;

  // Signed clearance of a disc against the region: negative iff the disc
  // strictly intersects the region.
  double clearance(Vec2 center, double radius) const;

  bool intersects_disc(Vec2 center, double radius) const {
    return clearance(center, radius) < 0.0;
  }

  // Contact normal used to push an intersecting disc aside. Points from the
  // region spine (corridor axis or envelope center) toward the disc center.
  Vec2 push_direction(Vec2 center) const;
};

}  // namespace riskplan::geom
