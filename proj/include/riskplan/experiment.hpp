#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskplan/backend.hpp"
#include "riskplan/planner.hpp"
#include "riskplan/safety.hpp"
#include "riskplan/world.hpp"

namespace riskplan::eval {

struct MethodSpec {
  bool safety_enabled = true;
  std::string backend = "search";  // search | llm | stub

  std::string name() const {
    std::string base = safety_enabled ? "sm-on" : "sm-off";
    return backend == "search" ? base : base + ":" + backend;
  }
  bool operator==(const MethodSpec&) const = default;
};

struct ExperimentConfig {
  std::vector<std::string> scenes = {"table", "counter", "chair"};
  std::vector<world::SceneMode> modes = {world::SceneMode::easy, world::SceneMode::hard};
  std::vector<MethodSpec> methods = {{true, "search"}, {false, "search"}};
  int episodes = 100;
  std::uint64_t base_seed = 20240811;
  double rho = 0.5;
  int step_budget = 20;
  std::string matrix_source = "oracle";  // "oracle" or "model:<path>"
  std::string out_dir;                   // empty = no files written
  bool parallel = true;

  // resolved by the caller from matrix_source / backend names
  const safety::ModelParameters* model = nullptr;
  llm::LlmBackend* llm_backend = nullptr;

  void validate() const;  // throws std::runtime_error before any episode runs
};

struct EpisodeMetrics {
  std::string scene;
  world::SceneMode mode = world::SceneMode::easy;
  std::string method;
  int index = 0;
  std::uint64_t scene_seed = 0;
  double collisions = 0.0;
  int success = 0;
  int steps = 0;
  double wall_ms = 0.0;
};

struct SummaryRow {
  std::string scene;
  world::SceneMode mode = world::SceneMode::easy;
  std::string method;
  int episodes = 0;
  double mean_collisions = 0.0;
  double success_rate = 0.0;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;  // ordered by (scene, mode, method) as configured
  const SummaryRow* find(const std::string& scene, world::SceneMode mode,
                         const std::string& method) const;
};

struct ExperimentResult {
  std::vector<EpisodeMetrics> episodes;  // ordered by (scene, mode, method, index)
  SummaryTable summary;
};

// Scene seeds derive from (base, scene, mode, index) only, so every method
// inside a cell replays the same scene draws: the comparison is paired.
std::uint64_t scene_seed(const ExperimentConfig& cfg, const std::string& scene,
                         world::SceneMode mode, int index);

// The fixed task instruction each episode translates and pursues.
std::string episode_instruction();

// Runs every (scene, mode, method, index) episode, independent worlds on a
// worker pool, results ordered before aggregation. Writes summary.csv,
// summary.md, episodes.log and traces/ when out_dir is set.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

SummaryTable summarize(const std::vector<EpisodeMetrics>& rows);

enum class TableFormat { csv, markdown };
std::string emit_table(const SummaryTable& table, TableFormat format);
SummaryTable parse_markdown_table(const std::string& text);

std::string episodes_log_text(const std::vector<EpisodeMetrics>& rows);

// Config file: "key value" lines, '#' comments. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& text);

std::string mode_name(world::SceneMode mode);

}  // namespace riskplan::eval
