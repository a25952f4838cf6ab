#include "riskplan/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "riskplan/rng.hpp"

namespace riskplan::world {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRobotClearance = 0.12;

// View bin layout: three distance rings sized to the interaction zones
// (grasp envelope, chain reach, approach corridor), with double angular
// resolution in the far ring where corridor membership is decided.
//   ring 0: d < 0.14, 8 sectors of 45 deg,   bins 0..7
//   ring 1: d < 0.24, 8 sectors of 45 deg,   bins 8..15
//   ring 2: d < 1.00, 16 sectors of 22.5 deg, bins 16..31
constexpr double kRingBounds[3] = {0.14, 0.24, 1.00};
constexpr double kMassNorm = 0.05;  // radius that maps to occupancy mass 1.0

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Profile {
  double x0, x1, y0, y1;          // sampling box
  bool disc = false;              // sample within the inscribed disc
  geom::Vec2 disc_center;
  double disc_radius = 0.0;
  geom::Vec2 goal_pos;
  double goal_radius = 0.07;
};

Profile scene_profile(const std::string& scene) {
  if (scene == "table") return {0.15, 0.85, 0.15, 0.85, false, {}, 0.0, {0.87, 0.87}};
  if (scene == "counter") return {0.10, 0.90, 0.55, 0.90, false, {}, 0.0, {0.90, 0.40}};
  if (scene == "chair")
    return {0.28, 0.72, 0.38, 0.82, true, {0.5, 0.6}, 0.22, {0.85, 0.20}};
  throw std::runtime_error("unknown scene profile " + scene);
}

// staging candidates tried in order; away from the robot approach column
const std::vector<geom::Vec2>& staging_candidates() {
  static const std::vector<geom::Vec2> cells = {
      {0.07, 0.07}, {0.93, 0.07}, {0.07, 0.93}, {0.93, 0.93}, {0.07, 0.50},
      {0.93, 0.50}, {0.30, 0.06}, {0.70, 0.06}, {0.50, 0.94}, {0.06, 0.30}};
  return cells;
}

bool object_less(const ObjectInstance& a, const ObjectInstance& b) { return a.name < b.name; }

}  // namespace

const ObjectInstance* WorldState::find_object(const std::string& name) const {
  for (const auto& o : objects)
    if (o.name == name) return &o;
  return nullptr;
}

ObjectInstance* WorldState::find_object(const std::string& name) {
  for (auto& o : objects)
    if (o.name == name) return &o;
  return nullptr;
}

const Spot* WorldState::find_spot(const std::string& name) const {
  for (const auto& s : spots)
    if (s.name == name) return &s;
  return nullptr;
}

std::vector<std::pair<std::string, std::string>> WorldState::pddl_objects() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("table", "spot");
  for (const auto& s : spots) out.emplace_back(s.name, "spot");
  for (const auto& o : objects)
    out.emplace_back(o.name, o.kind == ObjectKind::container ? "container" : "item");
  return out;
}

void SceneConfig::validate() const {
  if (mode == SceneMode::easy && object_count != 3)
    throw std::runtime_error("easy mode requires exactly 3 objects");
  if (mode == SceneMode::hard && (object_count < 5 || object_count > 7))
    throw std::runtime_error("hard mode requires 5 to 7 objects");
  if (min_gap <= 0.0) throw std::runtime_error("min-gap must be positive");
  if (target_object.empty()) throw std::runtime_error("target object name empty");
}

WorldState generate_scene(const SceneConfig& cfg) {
  cfg.validate();
  Profile profile = scene_profile(cfg.scene);
  Rng rng(cfg.seed);

  WorldState w;
  w.scene = cfg.scene;
  w.mode = cfg.mode;
  w.min_gap = cfg.min_gap;
  w.target_object = cfg.target_object;
  w.goal_place = cfg.goal_place;
  w.rng_seed = cfg.seed;
  w.robot = {0.5, 0.02};
  w.spots.push_back(Spot{cfg.goal_place, profile.goal_pos, profile.goal_radius});

  int attempts = 0;
  auto draw_position = [&]() -> geom::Vec2 {
    while (true) {
      geom::Vec2 p{rng.next_range(profile.x0, profile.x1), rng.next_range(profile.y0, profile.y1)};
      if (!profile.disc) return p;
      if (geom::dist(p, profile.disc_center) <= profile.disc_radius) return p;
    }
  };

  for (int i = 0; i < cfg.object_count; ++i) {
    ObjectInstance obj;
    if (i == 0) {
      obj.name = cfg.target_object;
      obj.radius = 0.045;
    } else {
      obj.name = "box_" + std::to_string(i);
      obj.radius = rng.next_range(0.025, 0.055);
    }
    while (true) {
      if (++attempts > 10000)
        throw std::runtime_error("scene placement failed after 10000 attempts (min-gap infeasible)");
      geom::Vec2 p = draw_position();
      bool ok = geom::dist(p, w.robot) >= kRobotClearance;
      for (const auto& placed : w.objects)
        ok = ok && geom::dist(p, placed.pos) >= cfg.min_gap;
      for (const auto& s : w.spots)
        ok = ok && geom::dist(p, s.pos) >= s.radius + obj.radius + 0.02;
      if (ok) {
        obj.pos = p;
        break;
      }
    }
    w.objects.push_back(obj);
  }

  int staged = 0;
  for (const auto& cell : staging_candidates()) {
    if (staged == 4) break;
    bool ok = true;
    for (const auto& o : w.objects) ok = ok && geom::dist(cell, o.pos) >= 0.12;
    for (const auto& s : w.spots) ok = ok && geom::dist(cell, s.pos) >= 0.15;
    if (!ok) continue;
    w.spots.push_back(Spot{"staging_" + std::to_string(staged), cell, 0.06});
    ++staged;
  }
  if (staged < 2) throw std::runtime_error("could not place staging cells");
  return w;
}

WorldState clone_world(const WorldState& w) { return w; }

std::optional<geom::SweepRegion> sweep_region(const WorldState& w,
                                              const pddl::GroundedAction& skill,
                                              const SkillParams& params) {
  if (skill.op == "pick") {
    const ObjectInstance* target = w.find_object(skill.binding.at(0));
    if (!target || w.held == target->name) return std::nullopt;
    geom::SweepRegion region;
    region.corridor = geom::Corridor{w.robot, target->pos, params.corridor_half_width};
    region.envelope = geom::Disc{target->pos, target->radius + params.grasp_margin};
    return region;
  }
  if (skill.op == "place") {
    const ObjectInstance* carried = w.find_object(skill.binding.at(0));
    if (!carried) return std::nullopt;
    const std::string& dest = skill.binding.at(1);
    geom::Vec2 landing;
    if (const Spot* s = w.find_spot(dest)) {
      landing = s->pos;
    } else if (const ObjectInstance* c = w.find_object(dest)) {
      landing = c->pos;
    } else {
      return std::nullopt;
    }
    geom::SweepRegion region;
    region.corridor = geom::Corridor{w.robot, landing, params.corridor_half_width};
    region.envelope = geom::Disc{landing, carried->radius + params.grasp_margin};
    return region;
  }
  return std::nullopt;  // navigate sweeps nothing
}

namespace {

// Applies the sweep to every non-excluded object, then propagates chain
// displacements breadth-first up to params.chain_depth.
std::vector<CollisionEvent> sweep_and_chain(WorldState& w, const geom::SweepRegion& region,
                                            const std::vector<std::string>& robot_exclusions,
                                            const SkillParams& params) {
  std::vector<CollisionEvent> events;
  std::uint64_t next_tick = w.tick + 1;
  std::vector<std::pair<std::string, int>> chain;  // (displaced object, depth)

  auto excluded = [&](const std::string& name) {
    for (const auto& e : robot_exclusions)
      if (e == name) return true;
    return false;
  };
  auto already = [&events](const std::string& actor, const std::string& victim) {
    for (const auto& e : events)
      if (e.actor == actor && e.victim == victim) return true;
    return false;
  };
  auto displace = [&](ObjectInstance& obj, geom::Vec2 dir, const std::string& actor, int depth) {
    geom::Vec2 before = obj.pos;
    geom::Vec2 after = before + dir * params.displacement;
    after.x = std::clamp(after.x, obj.radius, 1.0 - obj.radius);
    after.y = std::clamp(after.y, obj.radius, 1.0 - obj.radius);
    obj.pos = after;
    double moved = geom::dist(before, after);
    int severity = moved > obj.radius ? 2 : 1;
    if (severity == 2) obj.toppled = true;
    events.push_back(CollisionEvent{actor, obj.name, severity, next_tick++});
    chain.emplace_back(obj.name, depth);
  };

  std::vector<ObjectInstance*> sorted;
  for (auto& o : w.objects) sorted.push_back(&o);
  std::sort(sorted.begin(), sorted.end(),
            [](const ObjectInstance* a, const ObjectInstance* b) { return object_less(*a, *b); });

  for (ObjectInstance* obj : sorted) {
    if (w.held == obj->name || excluded(obj->name)) continue;
    if (region.intersects_disc(obj->pos, obj->radius))
      displace(*obj, region.push_direction(obj->pos), "robot", 1);
  }

  for (std::size_t head = 0; head < chain.size(); ++head) {
    auto [mover_name, depth] = chain[head];
    if (depth >= params.chain_depth) continue;
    const ObjectInstance* mover = w.find_object(mover_name);
    for (ObjectInstance* obj : sorted) {
      if (obj->name == mover_name || w.held == obj->name) continue;
      if (geom::dist(mover->pos, obj->pos) >= mover->radius + obj->radius) continue;
      if (already(mover_name, obj->name)) continue;
      geom::Vec2 n = obj->pos - mover->pos;
      double nn = n.norm();
      geom::Vec2 dir = nn > 1e-12 ? n * (1.0 / nn) : geom::Vec2{1.0, 0.0};
      displace(*obj, dir, mover_name, depth + 1);
    }
  }
  return events;
}

int travel_ticks(geom::Vec2 a, geom::Vec2 b) {
  return 2 + static_cast<int>(std::ceil(geom::dist(a, b) / 0.05));
}

}  // namespace

SkillOutcome execute_skill(WorldState& w, const pddl::GroundedAction& skill,
                           const SkillParams& params) {
  if (skill.op != "pick" && skill.op != "place" && skill.op != "navigate")
    throw std::runtime_error("unknown skill " + skill.op);
  if (!pddl::is_applicable(extract_predicates(w), skill))
    throw std::runtime_error("precondition violation for " + skill.to_string());

  SkillOutcome out;
  if (skill.op == "navigate") {
    w.at_scene = skill.binding.at(0);
    out.succeeded = true;
    out.ticks_used = 1;
    w.tick += 1;
    return out;
  }

  if (skill.op == "pick") {
    ObjectInstance* target = w.find_object(skill.binding.at(0));
    if (!target) throw std::runtime_error("unknown object " + skill.binding.at(0));
    out.ticks_used = std::min(params.timeout_ticks, travel_ticks(w.robot, target->pos));
    if (target->toppled) {
      // a toppled disc offers no graspable rim; the attempt burns time
      out.succeeded = false;
      w.tick += out.ticks_used;
      return out;
    }
    auto region = sweep_region(w, skill, params);
    out.events = sweep_and_chain(w, *region, {target->name}, params);
    w.held = target->name;
    target->container.reset();
    out.succeeded = true;
    w.tick += out.ticks_used;
    return out;
  }

  // place
  ObjectInstance* carried = w.find_object(skill.binding.at(0));
  if (!carried) throw std::runtime_error("unknown object " + skill.binding.at(0));
  const std::string& dest = skill.binding.at(1);
  auto region = sweep_region(w, skill, params);
  if (!region) throw std::runtime_error("unknown destination " + dest);
  geom::Vec2 landing = region->envelope->center;
  out.ticks_used = std::min(params.timeout_ticks, travel_ticks(w.robot, landing));
  const ObjectInstance* dest_container = w.find_object(dest);
  std::vector<std::string> exclusions = {carried->name};
  if (dest_container) exclusions.push_back(dest);
  out.events = sweep_and_chain(w, *region, exclusions, params);
  carried->pos = landing;
  carried->container = dest_container ? std::optional<std::string>(dest) : std::nullopt;
  w.held.reset();
  out.succeeded = true;
  w.tick += out.ticks_used;
  return out;
}

pddl::SymbolicState extract_predicates(const WorldState& w) {
  pddl::SymbolicState s;
  s.atoms.insert(pddl::Atom{"at-scene", {w.at_scene}});
  if (w.held)
    s.atoms.insert(pddl::Atom{"holding", {*w.held}});
  else
    s.atoms.insert(pddl::Atom{"handempty", {}});

  auto held = [&w](const ObjectInstance& o) { return w.held == o.name; };

  for (const auto& o : w.objects) {
    if (held(o)) continue;
    std::string container;
    if (o.container) {
      container = *o.container;
    } else {
      for (const auto& c : w.objects) {
        if (c.name == o.name || c.kind != ObjectKind::container || held(c)) continue;
        if (geom::dist(o.pos, c.pos) <= c.radius) {
          container = c.name;
          break;
        }
      }
    }
    if (!container.empty()) {
      s.atoms.insert(pddl::Atom{"in", {o.name, container}});
      continue;
    }
    const Spot* on_spot = nullptr;
    for (const auto& spot : w.spots)
      if (geom::dist(o.pos, spot.pos) <= spot.radius) {
        on_spot = &spot;
        break;
      }
    s.atoms.insert(pddl::Atom{"on", {o.name, on_spot ? on_spot->name : "table"}});
  }

  for (const auto& spot : w.spots) {
    bool clear = true;
    for (const auto& o : w.objects)
      if (!held(o) && geom::dist(o.pos, spot.pos) <= spot.radius) clear = false;
    if (clear) s.atoms.insert(pddl::Atom{"clear", {spot.name}});
  }
  for (const auto& c : w.objects) {
    if (c.kind != ObjectKind::container || held(c)) continue;
    bool clear = true;
    for (const auto& o : w.objects) {
      if (o.name == c.name || held(o)) continue;
      if (o.container == c.name || geom::dist(o.pos, c.pos) <= c.radius) clear = false;
    }
    if (clear) s.atoms.insert(pddl::Atom{"clear", {c.name}});
  }
  return s;
}

ViewSet render_views(const WorldState& w, const std::string& object) {
  const ObjectInstance* center = w.find_object(object);
  if (!center) throw std::runtime_error("unknown object " + object);
  ViewSet views{};
  for (auto& v : views) v.fill(0.0);
  if (w.held == object) return views;  // held objects have no viewpoint

  // view 0 faces along the robot's approach bearing, so the corridor always
  // occupies the same sectors regardless of where the object sits
  double anchor =
      std::atan2(center->pos.y - w.robot.y, center->pos.x - w.robot.x) * 180.0 / kPi;

  // ring centers for the radial interpolation
  constexpr double kRingCenters[3] = {0.07, 0.19, 0.62};

  for (const auto& u : w.objects) {
    if (u.name == object || w.held == u.name) continue;
    double d = geom::dist(u.pos, center->pos);
    if (d >= kRingBounds[2]) continue;

    // bilinear deposits in both angle and distance keep the feature map
    // smooth in object positions
    double ring_weight[3] = {0.0, 0.0, 0.0};
    if (d <= kRingCenters[0]) {
      ring_weight[0] = 1.0;
    } else if (d >= kRingCenters[2]) {
      ring_weight[2] = 1.0;
    } else {
      int lo = d < kRingCenters[1] ? 0 : 1;
      double t = (d - kRingCenters[lo]) / (kRingCenters[lo + 1] - kRingCenters[lo]);
      ring_weight[lo] = 1.0 - t;
      ring_weight[lo + 1] = t;
    }

    double theta = std::atan2(u.pos.y - center->pos.y, u.pos.x - center->pos.x) * 180.0 / kPi;
    double mass = (u.radius / kMassNorm) * (u.radius / kMassNorm);
    for (int v = 0; v < kViewCount; ++v) {
      double rel = theta - anchor - 72.0 * v;
      rel = std::fmod(rel + 720.0, 360.0);
      for (int ring = 0; ring < 3; ++ring) {
        if (ring_weight[ring] == 0.0) continue;
        int sectors = ring == 2 ? 16 : 8;
        int base = ring == 0 ? 0 : ring == 1 ? 8 : 16;
        double width = 360.0 / sectors;
        double slot = rel / width;
        int lo = static_cast<int>(std::floor(slot)) % sectors;
        int hi = (lo + 1) % sectors;
        double frac = slot - std::floor(slot);
        views[v][base + lo] += mass * ring_weight[ring] * (1.0 - frac);
        views[v][base + hi] += mass * ring_weight[ring] * frac;
      }
    }
  }
  return views;
}

std::optional<std::string> first_free_staging(const WorldState& w) {
  pddl::SymbolicState s = extract_predicates(w);
  for (const auto& spot : w.spots) {
    if (spot.name.rfind("staging_", 0) != 0) continue;
    if (s.holds(pddl::Atom{"clear", {spot.name}})) return spot.name;
  }
  return std::nullopt;
}

std::string tabletop_domain_text() {
  return R"((define (domain tabletop)
  (:requirements :strips :typing)
  (:types
    thing loc - object
    item - thing
    spot container - loc)
  (:predicates
    (on ?o - thing ?p - loc)
    (in ?o - thing ?c - loc)
    (holding ?o - thing)
    (handempty)
    (at-scene ?p - spot)
    (clear ?d - loc))
  (:action pick
    :parameters (?o - thing ?p - loc)
    :precondition (and (on ?o ?p) (handempty))
    :effect (and (holding ?o) (not (on ?o ?p)) (not (handempty))))
  (:action place
    :parameters (?o - thing ?d - loc)
    :precondition (and (holding ?o) (clear ?d))
    :effect (and (on ?o ?d) (in ?o ?d) (handempty)
                 (not (holding ?o)) (not (clear ?d))))
  (:action navigate
    :parameters (?p - spot)
    :precondition (and)
    :effect (and (at-scene ?p))))
)";
}

const pddl::Domain& tabletop_domain() {
  static const pddl::Domain domain = pddl::parse_domain(tabletop_domain_text());
  return domain;
}

std::string save_scene(const WorldState& w) {
  std::ostringstream out;
  out << "# riskplan scene v1\n";
  out << "scene " << w.scene << "\n";
  out << "mode " << (w.mode == SceneMode::easy ? "easy" : "hard") << "\n";
  out << "seed " << w.rng_seed << "\n";
  out << "object-count " << w.objects.size() << "\n";
  out << "min-gap " << fmt(w.min_gap) << "\n";
  out << "target-object " << w.target_object << "\n";
  out << "goal-place " << w.goal_place << "\n";
  out << "robot " << fmt(w.robot.x) << " " << fmt(w.robot.y) << "\n";
  out << "at-scene " << w.at_scene << "\n";
  out << "held " << (w.held ? *w.held : "-") << "\n";
  out << "tick " << w.tick << "\n";
  for (const auto& s : w.spots)
    out << "spot " << s.name << " " << fmt(s.pos.x) << " " << fmt(s.pos.y) << " " << fmt(s.radius)
        << "\n";
  for (const auto& o : w.objects)
    out << "object " << o.name << " " << (o.kind == ObjectKind::container ? "container" : "item")
        << " " << fmt(o.radius) << " " << fmt(o.pos.x) << " " << fmt(o.pos.y) << " "
        << (o.toppled ? 1 : 0) << " " << (o.container ? *o.container : "-") << "\n";
  return out.str();
}

WorldState load_scene(const std::string& text) {
  WorldState w;
  w.spots.clear();
  std::istringstream in(text);
  std::string line;
  std::size_t declared_count = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "scene") {
      ls >> w.scene;
    } else if (key == "mode") {
      std::string m;
      ls >> m;
      if (m != "easy" && m != "hard") throw std::runtime_error("bad scene mode " + m);
      w.mode = m == "easy" ? SceneMode::easy : SceneMode::hard;
    } else if (key == "seed") {
      ls >> w.rng_seed;
    } else if (key == "object-count") {
      ls >> declared_count;
    } else if (key == "min-gap") {
      ls >> w.min_gap;
    } else if (key == "target-object") {
      ls >> w.target_object;
    } else if (key == "goal-place") {
      ls >> w.goal_place;
    } else if (key == "robot") {
      ls >> w.robot.x >> w.robot.y;
    } else if (key == "at-scene") {
      ls >> w.at_scene;
    } else if (key == "held") {
      std::string h;
      ls >> h;
      if (h != "-") w.held = h;
    } else if (key == "tick") {
      ls >> w.tick;
    } else if (key == "spot") {
      Spot s;
      ls >> s.name >> s.pos.x >> s.pos.y >> s.radius;
      w.spots.push_back(s);
    } else if (key == "object") {
      ObjectInstance o;
      std::string kind, container;
      int toppled = 0;
      ls >> o.name >> kind >> o.radius >> o.pos.x >> o.pos.y >> toppled >> container;
      if (kind != "item" && kind != "container")
        throw std::runtime_error("bad object kind " + kind);
      o.kind = kind == "container" ? ObjectKind::container : ObjectKind::item;
      o.toppled = toppled != 0;
      if (container != "-") o.container = container;
      if (o.radius < 0.02 || o.radius > 0.10)
        throw std::runtime_error("object radius out of range for " + o.name);
      if (o.pos.x < 0.0 || o.pos.x > 1.0 || o.pos.y < 0.0 || o.pos.y > 1.0)
        throw std::runtime_error("object position out of bounds for " + o.name);
      if (w.find_object(o.name)) throw std::runtime_error("duplicate object " + o.name);
      w.objects.push_back(o);
    } else if (!ls.fail()) {
      throw std::runtime_error("unknown scene line: " + line);
    }
  }
  if (declared_count != w.objects.size())
    throw std::runtime_error("object-count does not match object table");
  if (w.held && !w.find_object(*w.held)) throw std::runtime_error("held object not in table");
  return w;
}

std::string format_event(const CollisionEvent& e) {
  std::ostringstream out;
  out << e.tick << " " << e.actor << " " << e.victim << " " << e.severity;
  return out.str();
}

std::vector<CollisionEvent> parse_event_log(const std::string& text) {
  std::vector<CollisionEvent> events;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    CollisionEvent e;
    if (ls >> e.tick >> e.actor >> e.victim >> e.severity) events.push_back(e);
  }
  return events;
}

}  // namespace riskplan::world
