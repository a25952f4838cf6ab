#include "riskplan/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "riskplan/rng.hpp"
#include "riskplan/translate.hpp"

namespace riskplan::eval {

namespace {

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += "\"\"";
    else quoted.push_back(c);
  }
  return quoted + "\"";
}

}  // namespace

std::string mode_name(world::SceneMode mode) {
  return mode == world::SceneMode::easy ? "easy" : "hard";
}

void ExperimentConfig::validate() const {
  if (episodes < 1) throw std::runtime_error("episodes must be >= 1");
  if (methods.empty()) throw std::runtime_error("method list is empty");
  if (scenes.empty()) throw std::runtime_error("scene list is empty");
  if (modes.empty()) throw std::runtime_error("mode list is empty");
  if (rho < 0.0) throw std::runtime_error("rho must be non-negative");
  if (matrix_source != "oracle" && matrix_source.rfind("model:", 0) != 0)
    throw std::runtime_error("matrix source must be 'oracle' or 'model:<path>'");
  if (matrix_source.rfind("model:", 0) == 0 && !model)
    throw std::runtime_error("matrix source names a model but none is loaded");
  for (const auto& m : methods) {
    if (m.backend != "search" && m.backend != "llm" && m.backend != "stub")
      throw std::runtime_error("unknown backend " + m.backend);
    if (m.backend != "search" && !llm_backend)
      throw std::runtime_error("method uses backend " + m.backend + " but none is configured");
  }
  for (const auto& s : scenes)
    if (s != "table" && s != "counter" && s != "chair")
      throw std::runtime_error("unknown scene fixture " + s);
}

std::uint64_t scene_seed(const ExperimentConfig& cfg, const std::string& scene,
                         world::SceneMode mode, int index) {
  return hash_combine(cfg.base_seed, scene + "/" + mode_name(mode),
                      static_cast<std::uint64_t>(index));
}

std::string episode_instruction() { return "Move the apple on the table to the chair"; }

namespace {

struct Cell {
  std::string scene;
  world::SceneMode mode;
  MethodSpec method;
};

EpisodeMetrics run_one(const ExperimentConfig& cfg, const Cell& cell, int index,
                       std::string* trace_text) {
  EpisodeMetrics m;
  m.scene = cell.scene;
  m.mode = cell.mode;
  m.method = cell.method.name();
  m.index = index;
  m.scene_seed = scene_seed(cfg, cell.scene, cell.mode, index);

  world::SceneConfig scene_cfg;
  scene_cfg.scene = cell.scene;
  scene_cfg.mode = cell.mode;
  scene_cfg.object_count =
      cell.mode == world::SceneMode::easy ? 3 : 5 + static_cast<int>(m.scene_seed % 3);
  scene_cfg.seed = m.scene_seed;
  world::WorldState w = world::generate_scene(scene_cfg);

  nl::Instruction ins{episode_instruction(), w.pddl_objects()};
  std::vector<pddl::Atom> goal = nl::translate_rule_based(ins).literals;

  plan::EpisodeOptions opts;
  opts.safety_enabled = cell.method.safety_enabled;
  opts.rho = cfg.rho;
  opts.step_budget = cfg.step_budget;
  opts.model = cell.method.safety_enabled ? cfg.model : nullptr;
  opts.backend = cell.method.backend == "search" ? nullptr : cfg.llm_backend;

  auto t0 = std::chrono::steady_clock::now();
  plan::EpisodeTrace trace = plan::run_episode(w, goal, opts);
  auto t1 = std::chrono::steady_clock::now();

  m.collisions = trace.total_collisions;
  m.success = trace.success ? 1 : 0;
  m.steps = trace.steps_used;
  m.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  if (trace_text) *trace_text = plan::trace_to_text(trace);
  return m;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();

  std::vector<Cell> cells;
  for (const auto& scene : cfg.scenes)
    for (world::SceneMode mode : cfg.modes)
      for (const auto& method : cfg.methods) cells.push_back({scene, mode, method});

  const std::int64_t total = static_cast<std::int64_t>(cells.size()) * cfg.episodes;
  std::vector<EpisodeMetrics> episodes(total);
  std::vector<std::string> traces(cfg.out_dir.empty() ? 0 : total);

  // a shared llm backend is stateful, so backend methods run sequentially
  bool use_parallel = cfg.parallel;
  for (const auto& m : cfg.methods) use_parallel = use_parallel && m.backend == "search";

  if (use_parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t k = 0; k < total; ++k) {
      const Cell& cell = cells[k / cfg.episodes];
      int index = static_cast<int>(k % cfg.episodes);
      episodes[k] = run_one(cfg, cell, index, traces.empty() ? nullptr : &traces[k]);
    }
  } else {
    for (std::int64_t k = 0; k < total; ++k) {
      const Cell& cell = cells[k / cfg.episodes];
      int index = static_cast<int>(k % cfg.episodes);
      episodes[k] = run_one(cfg, cell, index, traces.empty() ? nullptr : &traces[k]);
    }
  }

  ExperimentResult result;
  result.episodes = std::move(episodes);
  result.summary = summarize(result.episodes);

  if (!cfg.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(cfg.out_dir) / "traces");
    std::ofstream csv(fs::path(cfg.out_dir) / "summary.csv");
    csv << emit_table(result.summary, TableFormat::csv);
    std::ofstream md(fs::path(cfg.out_dir) / "summary.md");
    md << emit_table(result.summary, TableFormat::markdown);
    std::ofstream log(fs::path(cfg.out_dir) / "episodes.log");
    log << episodes_log_text(result.episodes);
    for (std::int64_t k = 0; k < total; ++k) {
      const EpisodeMetrics& m = result.episodes[k];
      std::ostringstream name;
      name << m.scene << "_" << mode_name(m.mode) << "_" << m.method << "_" << m.index << ".trace";
      std::ofstream trace(fs::path(cfg.out_dir) / "traces" / name.str());
      trace << traces[k];
    }
  }
  return result;
}

const SummaryRow* SummaryTable::find(const std::string& scene, world::SceneMode mode,
                                     const std::string& method) const {
  for (const auto& row : rows)
    if (row.scene == scene && row.mode == mode && row.method == method) return &row;
  return nullptr;
}

SummaryTable summarize(const std::vector<EpisodeMetrics>& rows) {
  if (rows.empty()) throw std::runtime_error("cannot summarize an empty episode log");
  SummaryTable table;
  for (const auto& row : rows) {
    SummaryRow* agg = nullptr;
    for (auto& existing : table.rows)
      if (existing.scene == row.scene && existing.mode == row.mode &&
          existing.method == row.method)
        agg = &existing;
    if (!agg) {
      table.rows.push_back({row.scene, row.mode, row.method, 0, 0.0, 0.0});
      agg = &table.rows.back();
    }
    agg->episodes += 1;
    agg->mean_collisions += row.collisions;
    agg->success_rate += row.success;
  }
  for (auto& row : table.rows) {
    if (row.episodes == 0) throw std::runtime_error("summary cell with zero episodes");
    row.mean_collisions /= row.episodes;
    row.success_rate /= row.episodes;
  }
  return table;
}

std::string emit_table(const SummaryTable& table, TableFormat format) {
  std::ostringstream out;
  if (format == TableFormat::csv) {
    out << "scene,mode,method,episodes,mean_collisions,success_rate\n";
    for (const auto& row : table.rows)
      out << csv_field(row.scene) << "," << mode_name(row.mode) << "," << csv_field(row.method)
          << "," << row.episodes << "," << fmt2(row.mean_collisions) << ","
          << fmt2(row.success_rate) << "\n";
    return out.str();
  }
  out << "| scene | mode | method | episodes | mean_collisions | success_rate |\n";
  out << "|---|---|---|---|---|---|\n";
  for (const auto& row : table.rows)
    out << "| " << row.scene << " | " << mode_name(row.mode) << " | " << row.method << " | "
        << row.episodes << " | " << fmt2(row.mean_collisions) << " | " << fmt2(row.success_rate)
        << " |\n";
  return out.str();
}

SummaryTable parse_markdown_table(const std::string& text) {
  SummaryTable table;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no <= 2 || line.empty()) continue;  // header + separator
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    std::getline(ls, field, '|');  // leading empty
    while (std::getline(ls, field, '|')) {
      while (!field.empty() && field.front() == ' ') field.erase(field.begin());
      while (!field.empty() && field.back() == ' ') field.pop_back();
      fields.push_back(field);
    }
    if (fields.size() < 6) continue;
    SummaryRow row;
    row.scene = fields[0];
    row.mode = fields[1] == "easy" ? world::SceneMode::easy : world::SceneMode::hard;
    row.method = fields[2];
    row.episodes = std::stoi(fields[3]);
    row.mean_collisions = std::stod(fields[4]);
    row.success_rate = std::stod(fields[5]);
    table.rows.push_back(row);
  }
  return table;
}

std::string episodes_log_text(const std::vector<EpisodeMetrics>& rows) {
  std::ostringstream out;
  out << "# scene mode method index seed collisions success steps wall_ms\n";
  for (const auto& m : rows) {
    char seed_hex[24];
    std::snprintf(seed_hex, sizeof(seed_hex), "%016llx",
                  static_cast<unsigned long long>(m.scene_seed));
    char collisions[32];
    std::snprintf(collisions, sizeof(collisions), "%.17g", m.collisions);
    out << m.scene << " " << mode_name(m.mode) << " " << m.method << " " << m.index << " "
        << seed_hex << " " << collisions << " " << m.success << " " << m.steps << " "
        << fmt2(m.wall_ms) << "\n";
  }
  return out.str();
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  auto split_csv = [](const std::string& value) {
    std::vector<std::string> items;
    std::istringstream vs(value);
    std::string item;
    while (std::getline(vs, item, ',')) items.push_back(item);
    return items;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key, value;
    ls >> key;
    std::getline(ls, value);
    while (!value.empty() && value.front() == ' ') value.erase(value.begin());
    if (key == "scenes") {
      cfg.scenes = split_csv(value);
    } else if (key == "modes") {
      cfg.modes.clear();
      for (const auto& m : split_csv(value)) {
        if (m != "easy" && m != "hard") throw std::runtime_error("bad mode " + m);
        cfg.modes.push_back(m == "easy" ? world::SceneMode::easy : world::SceneMode::hard);
      }
    } else if (key == "methods") {
      cfg.methods.clear();
      for (const auto& m : split_csv(value)) {
        MethodSpec spec;
        std::string base = m;
        if (auto colon = m.find(':'); colon != std::string::npos) {
          base = m.substr(0, colon);
          spec.backend = m.substr(colon + 1);
        }
        if (base == "sm-on") spec.safety_enabled = true;
        else if (base == "sm-off") spec.safety_enabled = false;
        else throw std::runtime_error("unknown method " + m);
        cfg.methods.push_back(spec);
      }
    } else if (key == "episodes") {
      cfg.episodes = std::stoi(value);
    } else if (key == "seed") {
      cfg.base_seed = std::stoull(value);
    } else if (key == "rho") {
      cfg.rho = std::stod(value);
    } else if (key == "budget") {
      cfg.step_budget = std::stoi(value);
    } else if (key == "matrix") {
      cfg.matrix_source = value;
    } else if (key == "out") {
      cfg.out_dir = value;
    } else {
      throw std::runtime_error("unknown config key " + key);
    }
  }
  return cfg;
}

}  // namespace riskplan::eval
