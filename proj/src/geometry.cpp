#include "riskplan/geometry.hpp"

#include <algorithm>

namespace riskplan::geom {

double dist_point_segment(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double len2 = ab.x * ab.x + ab.y * ab.y;
  if (len2 <= 0.0) return dist(p, a);
  double t = ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return dist(p, a + ab * t);
}

bool SweepRegion::contains(Vec2 p) const {
  if (corridor && dist_point_segment(p, corridor->a, corridor->b) <= corridor->half_width)
    return true;
  if (envelope && dist(p, envelope->center) <= envelope->radius) return true;
  return false;
}

double SweepRegion::clearance(Vec2 center, double radius) const {
  double c = 1e9;
  if (corridor)
    c = std::min(c, dist_point_segment(center, corridor->a, corridor->b) -
                        corridor->half_width - radius);
  if (envelope)
    c = std::min(c, dist(center, envelope->center) - envelope->radius - radius);
  return c;
}

Vec2 SweepRegion::push_direction(Vec2 center) const {
  // corridor contact wins when the disc touches it; otherwise radial from
  // the envelope center
  if (corridor) {
    double d = dist_point_segment(center, corridor->a, corridor->b);
    bool corridor_hit =
        d <= corridor->half_width + 1e-12 ||
        (!envelope || d - corridor->half_width <=
                          dist(center, envelope->center) - envelope->radius);
    if (corridor_hit || !envelope) {
      Vec2 ab = corridor->b - corridor->a;
      double len2 = ab.x * ab.x + ab.y * ab.y;
      Vec2 closest = corridor->a;
      if (len2 > 0.0) {
        double t = ((center.x - corridor->a.x) * ab.x + (center.y - corridor->a.y) * ab.y) / len2;
        closest = corridor->a + ab * std::clamp(t, 0.0, 1.0);
      }
      Vec2 n = center - closest;
      double nn = n.norm();
      if (nn > 1e-12) return n * (1.0 / nn);
      // disc center sits on the axis: push it ahead, away from the start
      double ln = ab.norm();
      if (ln > 1e-12) return ab * (1.0 / ln);
      return {1.0, 0.0};
    }
  }
  if (envelope) {
    Vec2 n = center - envelope->center;
    double nn = n.norm();
    if (nn > 1e-12) return n * (1.0 / nn);
  }
  return {1.0, 0.0};
}

}  // namespace riskplan::geom
