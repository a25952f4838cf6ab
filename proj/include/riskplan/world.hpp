#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riskplan/geometry.hpp"
#include "riskplan/pddl.hpp"

namespace riskplan::world {

inline constexpr int kViewCount = 5;
inline constexpr int kViewDim = 32;  // rings of 8, 8, and 16 angular sectors
using ViewVector = std::array<double, kViewDim>;
using ViewSet = std::array<ViewVector, kViewCount>;

enum class ObjectKind { item, container };

struct ObjectInstance {
  std::string name;
  ObjectKind kind = ObjectKind::item;
  double radius = 0.04;  // world units, valid range [0.02, 0.10]
  geom::Vec2 pos;
  bool toppled = false;
  std::optional<std::string> container;  // set when placed into a container

  bool operator==(const ObjectInstance&) const = default;
};

// Named table location: the goal spot plus the staging cells.
struct Spot {
  std::string name;
  geom::Vec2 pos;
  double radius = 0.06;
  bool operator==(const Spot&) const = default;
};

enum class SceneMode { easy, hard };

struct WorldState {
  std::string scene = "table";
  SceneMode mode = SceneMode::easy;
  double min_gap = 0.13;
  std::string target_object = "apple";
  std::string goal_place = "chair";
  std::vector<ObjectInstance> objects;
  std::vector<Spot> spots;
  geom::Vec2 robot{0.5, 0.02};  // approach origin on the table edge
  std::optional<std::string> held;
  std::string at_scene = "table";
  std::uint64_t rng_seed = 0;
  std::uint64_t tick = 0;

  bool operator==(const WorldState&) const = default;

  const ObjectInstance* find_object(const std::string& name) const;
  ObjectInstance* find_object(const std::string& name);
  const Spot* find_spot(const std::string& name) const;

  // Objects + spots as a typed PDDL object list; always includes the table.
  std::vector<std::pair<std::string, std::string>> pddl_objects() const;
};

struct SceneConfig {
  std::string scene = "table";  // placement profile: table | counter | chair
  SceneMode mode = SceneMode::easy;
  int object_count = 3;  // easy: exactly 3, hard: 5..7
  double min_gap = 0.13;
  std::uint64_t seed = 0;
  std::string target_object = "apple";
  std::string goal_place = "chair";

  void validate() const;  // throws std::runtime_error on bad combinations
};

// Geometry constants for skill execution. Defaults are the fixture values.
struct SkillParams {
  double corridor_half_width = 0.05;
  double grasp_margin = 0.04;  // envelope radius = object radius + margin
  double displacement = 0.03;
  int chain_depth = 3;
  int timeout_ticks = 50;
};

struct CollisionEvent {
  std::string actor;  // "robot" or an object name
  std::string victim;
  int severity = 1;  // 1 displaced, 2 toppled
  std::uint64_t tick = 0;

  bool operator==(const CollisionEvent&) const = default;
};

struct SkillOutcome {
  bool succeeded = false;
  std::vector<CollisionEvent> events;  // chronological
  int ticks_used = 0;
};

// Rejection-samples cfg.object_count objects with pairwise center distance
// >= cfg.min_gap. Deterministic given cfg.seed. Throws after 10000 failed
// placement attempts.
WorldState generate_scene(const SceneConfig& cfg);

WorldState clone_world(const WorldState& w);

// Geometric execution of pick/place/navigate. Mutates w; the outcome lists
// the collisions the sweep caused. Throws on unknown skills and on symbolic
// precondition violations.
SkillOutcome execute_skill(WorldState& w, const pddl::GroundedAction& skill,
                           const SkillParams& params = {});

// The swept region skill `a` would cover if executed now. Used by the
// clearing rule and the geometry oracle as well as by execute_skill itself.
std::optional<geom::SweepRegion> sweep_region(const WorldState& w,
                                              const pddl::GroundedAction& skill,
                                              const SkillParams& params = {});

// on/in/holding/handempty/at-scene/clear as a closed-world atom set.
pddl::SymbolicState extract_predicates(const WorldState& w);

// Five 32-bin occupancy snapshots around `object`, one per viewpoint at
// angles 0/72/144/216/288 degrees. A held object renders all-zero.
ViewSet render_views(const WorldState& w, const std::string& object);

// First staging cell that is currently clear, if any.
std::optional<std::string> first_free_staging(const WorldState& w);

// The canonical tabletop domain used by the planner and the risk oracle.
const pddl::Domain& tabletop_domain();
std::string tabletop_domain_text();

// Scene files: key-value header plus explicit spot and object tables.
// load_scene(save_scene(w)) == w.
std::string save_scene(const WorldState& w);
WorldState load_scene(const std::string& text);

// Event log lines: "tick actor victim severity".
std::string format_event(const CollisionEvent& e);
std::vector<CollisionEvent> parse_event_log(const std::string& text);

}  // namespace riskplan::world
