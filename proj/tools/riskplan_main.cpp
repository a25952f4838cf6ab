// riskplan: risk-aware tabletop task planning toolkit.
//
// Subcommands: plan, translate, collect, train, predict, experiment,
// validate. See README.md for the file formats involved.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "riskplan/backend.hpp"
#include "riskplan/experiment.hpp"
#include "riskplan/rng.hpp"
#include "riskplan/planner.hpp"
#include "riskplan/risk.hpp"
#include "riskplan/safety.hpp"
#include "riskplan/translate.hpp"
#include "riskplan/world.hpp"

namespace {

using namespace riskplan;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out.good()) throw std::runtime_error("cannot write " + path);
  out << content;
}

world::SceneMode parse_mode(const std::string& mode) {
  if (mode == "easy") return world::SceneMode::easy;
  if (mode == "hard") return world::SceneMode::hard;
  throw std::runtime_error("mode must be easy or hard");
}

struct SceneArgs {
  std::string scene_file;
  std::string profile;
  std::string mode = "easy";
  std::uint64_t seed = 7;
  int objects = 0;

  world::WorldState build() const {
    if (!scene_file.empty()) return world::load_scene(read_file(scene_file));
    if (profile.empty()) throw std::runtime_error("need --scene FILE or --scene-profile NAME");
    world::SceneConfig cfg;
    cfg.scene = profile;
    cfg.mode = parse_mode(mode);
    cfg.object_count = objects > 0 ? objects
                       : cfg.mode == world::SceneMode::easy ? 3
                                                            : 5 + static_cast<int>(seed % 3);
    cfg.seed = seed;
    return world::generate_scene(cfg);
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--scene", scene_file, "scene file to load");
    cmd->add_option("--scene-profile", profile, "generated scene profile: table|counter|chair");
    cmd->add_option("--mode", mode, "easy|hard (with --scene-profile)");
    cmd->add_option("--seed", seed, "scene seed (with --scene-profile)");
    cmd->add_option("--objects", objects, "object count override (with --scene-profile)");
  }
};

struct BackendArgs {
  std::string backend = "search";
  std::string stub_file;

  std::unique_ptr<llm::LlmBackend> make() const {
    if (backend == "search") return nullptr;
    if (backend == "stub") {
      if (stub_file.empty()) throw std::runtime_error("--backend stub needs --stub-file");
      return std::make_unique<llm::StubBackend>(llm::StubBackend::from_file(stub_file));
    }
    if (backend == "llm")
      return std::make_unique<llm::HttpBackend>(llm::http_config_from_env());
    throw std::runtime_error("backend must be search, llm, or stub");
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--backend", backend, "search|llm|stub");
    cmd->add_option("--stub-file", stub_file, "scripted replies for --backend stub");
  }
};

std::string matrix_to_text(const risk::SafetyMatrix& m) {
  std::ostringstream out;
  out << "skill\\object";
  for (const auto& o : m.objects) out << "\t" << o;
  out << "\n";
  for (std::size_t i = 0; i < m.skills.size(); ++i) {
    out << m.skills[i];
    for (std::size_t n = 0; n < m.objects.size(); ++n) {
      out << "\t";
      double v = m.at(i, n);
      if (std::isinf(v)) {
        out << "inf";
      } else {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", v);
        out << buf;
      }
    }
    out << "\n";
  }
  return out.str();
}

int cmd_plan(const SceneArgs& scene_args, const BackendArgs& backend_args,
             const std::string& instruction, const std::string& problem_path, bool sm_on,
             const std::string& matrix_source, double rho, int budget,
             const std::string& trace_out) {
  world::WorldState w = scene_args.build();

  std::vector<pddl::Atom> goal;
  if (!problem_path.empty()) {
    pddl::Problem problem =
        pddl::parse_problem(read_file(problem_path), world::tabletop_domain());
    goal = problem.goal;
  } else if (!instruction.empty()) {
    goal = nl::translate_rule_based({instruction, w.pddl_objects()}).literals;
  } else {
    throw std::runtime_error("need --instruction or --problem");
  }

  safety::ModelParameters model;
  plan::EpisodeOptions opts;
  opts.safety_enabled = sm_on;
  opts.rho = rho;
  opts.step_budget = budget;
  if (matrix_source.rfind("model:", 0) == 0) {
    model = safety::model_from_text(read_file(matrix_source.substr(6)));
    opts.model = &model;
  } else if (matrix_source != "oracle") {
    throw std::runtime_error("--matrix must be oracle or model:<path>");
  }
  auto backend = backend_args.make();
  opts.backend = backend.get();

  plan::EpisodeTrace trace = plan::run_episode(w, goal, opts);
  std::string text = plan::trace_to_text(trace);
  std::cout << text;
  if (!trace_out.empty()) write_file(trace_out, text);
  return trace.success ? 0 : 2;
}

int cmd_translate(const SceneArgs& scene_args, const BackendArgs& backend_args,
                  const std::string& instruction, const std::string& template_path) {
  world::WorldState w = scene_args.build();
  nl::Instruction ins{instruction, w.pddl_objects()};
  nl::GoalSpec goal;
  if (backend_args.backend == "search") {  // no backend: rule-based path
    goal = nl::translate_rule_based(ins);
  } else {
    auto backend = backend_args.make();
    std::string template_text = template_path.empty() ? nl::default_translation_template()
                                                      : read_file(template_path);
    goal = nl::translate_llm(ins, *backend, world::tabletop_domain(), template_text);
  }
  std::cout << nl::render_goal_pddl(goal) << "\n";
  std::cerr << "provenance: "
            << (goal.provenance == nl::Provenance::llm ? "llm" : "rule-based") << "\n";
  return 0;
}

int cmd_collect(const std::vector<std::string>& scenes, const std::string& mode, int episodes,
                std::uint64_t seed, const std::string& out_path) {
  std::vector<safety::TrajectoryRecord> all;
  for (const auto& scene : scenes) {
    safety::CollectOptions opts;
    opts.base.scene = scene;
    opts.base.mode = parse_mode(mode);
    opts.base.object_count = opts.base.mode == world::SceneMode::easy ? 3 : 5;
    opts.episodes = episodes;
    opts.base_seed = hash_combine(seed, scene, 0);
    auto records = safety::collect_dataset(opts);
    all.insert(all.end(), records.begin(), records.end());
  }
  write_file(out_path, safety::dataset_to_text(all));
  std::cout << "wrote " << all.size() << " records to " << out_path << "\n";
  return 0;
}

int cmd_train(const std::string& data_path, const std::string& out_path, double lr, int batch,
              int epochs, std::uint64_t seed, bool serial) {
  auto records = safety::dataset_from_text(read_file(data_path));
  safety::TrainOptions opts;
  opts.lr = lr;
  opts.batch = batch;
  opts.max_epochs = epochs;
  opts.seed = seed;
  opts.parallel = !serial;
  auto t0 = std::chrono::steady_clock::now();
  safety::TrainResult result = safety::train(safety::ModelParameters::init(seed), records, opts);
  auto t1 = std::chrono::steady_clock::now();
  write_file(out_path, safety::model_to_text(result.params));
  for (std::size_t e = 0; e < result.loss_curve.size(); ++e)
    if (e % 10 == 0 || e + 1 == result.loss_curve.size())
      std::cout << "epoch " << e << " loss " << result.loss_curve[e] << "\n";
  std::cout << "records " << records.size() << " final-loss " << result.final_loss << " wall-s "
            << std::chrono::duration<double>(t1 - t0).count() << "\n";
  std::cout << "wrote model to " << out_path << "\n";
  return 0;
}

int cmd_predict(const SceneArgs& scene_args, const std::string& model_path, bool oracle) {
  world::WorldState w = scene_args.build();
  risk::SafetyMatrix m;
  if (oracle) {
    m = risk::oracle_risk_matrix(w);
  } else {
    if (model_path.empty()) throw std::runtime_error("need --model PATH or --oracle");
    safety::ModelParameters model = safety::model_from_text(read_file(model_path));
    m = safety::predict_matrix(model, w);
  }
  std::cout << matrix_to_text(m);
  std::cout << "\n" << safety::matrix_to_ranking(m).sentence_text << "\n";
  return 0;
}

int cmd_validate(const std::string& domain_path, const std::string& problem_path,
                 const std::string& plan_path) {
  pddl::Domain domain = pddl::parse_domain(read_file(domain_path));
  pddl::Problem problem = pddl::parse_problem(read_file(problem_path), domain);
  pddl::Plan plan;
  std::istringstream lines(read_file(plan_path));
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    std::istringstream ls(line);
    std::string token, op;
    std::vector<std::string> args;
    while (ls >> token) {
      while (!token.empty() && (token.front() == '(')) token.erase(token.begin());
      while (!token.empty() && (token.back() == ')')) token.pop_back();
      if (token.empty()) continue;
      if (op.empty()) op = token;
      else args.push_back(token);
    }
    if (op.empty()) continue;
    const pddl::OperatorSchema* schema = domain.find_operator(op);
    if (!schema) throw std::runtime_error("unknown operator " + op);
    for (const auto& arg : args)
      if (!problem.type_of(arg)) throw std::runtime_error("unknown object " + arg);
    plan.steps.push_back(pddl::ground_operator(domain, *schema, args));
  }
  pddl::PlanCheck check = pddl::validate_plan(problem, domain, plan);
  if (check.valid) {
    std::cout << "valid\n";
    return 0;
  }
  if (check.failing_step)
    std::cout << "invalid at step " << *check.failing_step << ": "
              << plan.steps[*check.failing_step].to_string() << "\n";
  else
    std::cout << "invalid: goal not satisfied in the final state\n";
  return 2;
}

int cmd_experiment(std::string config_path, std::vector<std::string> scenes, std::string mode,
                   std::string sm, std::string backend, std::string stub_file, int episodes,
                   std::optional<std::uint64_t> seed, std::optional<double> rho,
                   std::string matrix_source, std::string out_dir, std::string format,
                   std::optional<int> budget, bool serial) {
  eval::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = eval::parse_config(read_file(config_path));
  if (!scenes.empty()) cfg.scenes = scenes;
  if (!mode.empty()) cfg.modes = {parse_mode(mode)};
  if (!sm.empty()) {
    if (sm == "on") cfg.methods = {{true, "search"}};
    else if (sm == "off") cfg.methods = {{false, "search"}};
    else throw std::runtime_error("--sm must be on or off");
  }
  if (!backend.empty())
    for (auto& m : cfg.methods) m.backend = backend;
  if (episodes > 0) cfg.episodes = episodes;
  if (seed) cfg.base_seed = *seed;
  if (rho) cfg.rho = *rho;
  if (budget) cfg.step_budget = *budget;
  if (!matrix_source.empty()) cfg.matrix_source = matrix_source;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (serial) cfg.parallel = false;

  safety::ModelParameters model;
  if (cfg.matrix_source.rfind("model:", 0) == 0) {
    model = safety::model_from_text(read_file(cfg.matrix_source.substr(6)));
    cfg.model = &model;
  }
  std::unique_ptr<llm::LlmBackend> llm_backend;
  bool needs_backend = false;
  for (const auto& m : cfg.methods) needs_backend = needs_backend || m.backend != "search";
  if (needs_backend) {
    BackendArgs args;
    args.backend = cfg.methods.front().backend;
    args.stub_file = stub_file;
    llm_backend = args.make();
    cfg.llm_backend = llm_backend.get();
  }

  auto t0 = std::chrono::steady_clock::now();
  eval::ExperimentResult result = eval::run_experiment(cfg);
  auto t1 = std::chrono::steady_clock::now();

  std::cout << eval::emit_table(result.summary, format == "markdown"
                                                    ? eval::TableFormat::markdown
                                                    : eval::TableFormat::csv);
  std::cerr << "episodes " << result.episodes.size() << " wall-s "
            << std::chrono::duration<double>(t1 - t0).count()
            << (cfg.out_dir.empty() ? "" : " outputs in " + cfg.out_dir) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"risk-aware tabletop task planning toolkit"};
  app.require_subcommand(1);

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "run one closed-loop episode and print its trace");
  SceneArgs plan_scene;
  BackendArgs plan_backend;
  plan_scene.attach(plan_cmd);
  plan_backend.attach(plan_cmd);
  std::string plan_instruction, plan_problem, plan_sm = "on", plan_matrix = "oracle",
              plan_trace_out;
  double plan_rho = 0.5;
  int plan_budget = 20;
  plan_cmd->add_option("--instruction", plan_instruction, "natural-language task");
  plan_cmd->add_option("--problem", plan_problem, "PDDL problem file providing the goal");
  plan_cmd->add_option("--sm", plan_sm, "safety module on|off");
  plan_cmd->add_option("--matrix", plan_matrix, "oracle or model:<path>");
  plan_cmd->add_option("--rho", plan_rho, "clearing threshold");
  plan_cmd->add_option("--budget", plan_budget, "step budget");
  plan_cmd->add_option("--trace-out", plan_trace_out, "write the trace to this file");

  // translate
  auto* translate_cmd = app.add_subcommand("translate", "translate an instruction to PDDL goals");
  SceneArgs translate_scene;
  BackendArgs translate_backend;
  translate_scene.attach(translate_cmd);
  translate_backend.attach(translate_cmd);
  std::string translate_instruction, translate_template;
  translate_cmd->add_option("--instruction", translate_instruction, "natural-language task")
      ->required();
  translate_cmd->add_option("--template", translate_template, "prompt template file");

  // collect
  auto* collect_cmd = app.add_subcommand("collect", "collect a labeled trajectory dataset");
  std::vector<std::string> collect_scenes = {"table", "counter", "chair"};
  std::string collect_mode = "hard", collect_out = "dataset.txt";
  int collect_episodes = 50;
  std::uint64_t collect_seed = 1;
  collect_cmd->add_option("--scenes", collect_scenes, "scene profiles")->delimiter(',');
  collect_cmd->add_option("--mode", collect_mode, "easy|hard");
  collect_cmd->add_option("--episodes", collect_episodes, "episodes per scene profile");
  collect_cmd->add_option("--seed", collect_seed, "base seed");
  collect_cmd->add_option("--out", collect_out, "dataset file to write");

  // train
  auto* train_cmd = app.add_subcommand("train", "train the safety regressor");
  std::string train_data, train_out = "model.txt";
  double train_lr = 1e-3;
  int train_batch = 32, train_epochs = 200;
  std::uint64_t train_seed = 0;
  bool train_serial = false;
  train_cmd->add_option("--data", train_data, "dataset file")->required();
  train_cmd->add_option("--out", train_out, "model file to write");
  train_cmd->add_option("--lr", train_lr, "learning rate");
  train_cmd->add_option("--batch", train_batch, "minibatch size");
  train_cmd->add_option("--epochs", train_epochs, "training epochs");
  train_cmd->add_option("--seed", train_seed, "shuffle/init seed");
  train_cmd->add_flag("--serial", train_serial, "disable the parallel gradient kernel");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "print the safety matrix for a scene");
  SceneArgs predict_scene;
  predict_scene.attach(predict_cmd);
  std::string predict_model;
  bool predict_oracle = false;
  predict_cmd->add_option("--model", predict_model, "model file");
  predict_cmd->add_flag("--oracle", predict_oracle, "use the exact simulator probe instead");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "check a plan against a PDDL problem");
  std::string validate_domain, validate_problem, validate_plan_path;
  validate_cmd->add_option("--domain", validate_domain, "domain file")->required();
  validate_cmd->add_option("--problem", validate_problem, "problem file")->required();
  validate_cmd->add_option("--plan", validate_plan_path, "plan file, one action per line")
      ->required();

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "run the seeded episode batch harness");
  std::string exp_config, exp_mode, exp_sm, exp_backend, exp_stub, exp_matrix, exp_out,
      exp_format = "csv";
  std::vector<std::string> exp_scenes;
  int exp_episodes = 0;
  bool exp_serial = false;
  std::optional<std::uint64_t> exp_seed;
  std::optional<double> exp_rho;
  std::optional<int> exp_budget;
  exp_cmd->add_option("--config", exp_config, "experiment config file");
  exp_cmd->add_option("--scenes", exp_scenes, "scene fixtures")->delimiter(',');
  exp_cmd->add_option("--mode", exp_mode, "restrict to easy|hard");
  exp_cmd->add_option("--sm", exp_sm, "restrict methods to on|off");
  exp_cmd->add_option("--backend", exp_backend, "search|llm|stub for all methods");
  exp_cmd->add_option("--stub-file", exp_stub, "scripted replies for stub backends");
  exp_cmd->add_option("--episodes", exp_episodes, "episodes per cell");
  exp_cmd->add_option("--seed", [&exp_seed](const std::vector<std::string>& v) {
    exp_seed = std::stoull(v[0]);
    return true;
  }, "base seed");
  exp_cmd->add_option("--rho", [&exp_rho](const std::vector<std::string>& v) {
    exp_rho = std::stod(v[0]);
    return true;
  }, "clearing threshold");
  exp_cmd->add_option("--budget", [&exp_budget](const std::vector<std::string>& v) {
    exp_budget = std::stoi(v[0]);
    return true;
  }, "step budget");
  exp_cmd->add_option("--matrix", exp_matrix, "oracle or model:<path>");
  exp_cmd->add_option("--out", exp_out, "output directory");
  exp_cmd->add_option("--format", exp_format, "csv|markdown stdout format");
  exp_cmd->add_flag("--serial", exp_serial, "run episodes sequentially");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plan_cmd->parsed())
      return cmd_plan(plan_scene, plan_backend, plan_instruction, plan_problem, plan_sm == "on",
                      plan_matrix, plan_rho, plan_budget, plan_trace_out);
    if (translate_cmd->parsed())
      return cmd_translate(translate_scene, translate_backend, translate_instruction,
                           translate_template);
    if (collect_cmd->parsed())
      return cmd_collect(collect_scenes, collect_mode, collect_episodes, collect_seed,
                         collect_out);
    if (train_cmd->parsed())
      return cmd_train(train_data, train_out, train_lr, train_batch, train_epochs, train_seed,
                       train_serial);
    if (predict_cmd->parsed()) return cmd_predict(predict_scene, predict_model, predict_oracle);
    if (validate_cmd->parsed())
      return cmd_validate(validate_domain, validate_problem, validate_plan_path);
    if (exp_cmd->parsed())
      return cmd_experiment(exp_config, exp_scenes, exp_mode, exp_sm, exp_backend, exp_stub,
                            exp_episodes, exp_seed, exp_rho, exp_matrix, exp_out, exp_format,
                            exp_budget, exp_serial);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
