// Serial-vs-OpenMP benchmark for the four parallel kernels: oracle risk
// matrices, model prediction, batch gradients, and experiment episodes.
// Every pair must agree bitwise; the program exits nonzero on any mismatch.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "riskplan/experiment.hpp"
#include "riskplan/risk.hpp"
#include "riskplan/rng.hpp"
#include "riskplan/safety.hpp"
#include "riskplan/world.hpp"

using namespace riskplan;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool g_all_equal = true;

void report(const char* kernel, double serial_ms, double parallel_ms, bool equal) {
  std::printf("%-22s %10.1f ms %10.1f ms %8.2fx   %s\n", kernel, serial_ms, parallel_ms,
              serial_ms / parallel_ms, equal ? "bitwise-equal" : "MISMATCH");
  g_all_equal = g_all_equal && equal;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: not available, parallel kernels run serially\n");
#endif
  std::printf("%-22s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

  // scene pool for the matrix kernels
  std::vector<world::WorldState> worlds;
  Rng rng(12021);
  for (int i = 0; i < 60; ++i) {
    world::SceneConfig cfg;
    cfg.scene = "chair";
    cfg.mode = world::SceneMode::hard;
    cfg.object_count = 7;
    cfg.seed = rng.next_u64();
    worlds.push_back(world::generate_scene(cfg));
  }

  {
    auto t0 = Clock::now();
    std::vector<risk::SafetyMatrix> serial;
    for (const auto& w : worlds)
      serial.push_back(risk::oracle_risk_matrix_serial(w, risk::all_skills(),
                                                       risk::object_names(w)));
    double serial_ms = ms_since(t0);
    t0 = Clock::now();
    std::vector<risk::SafetyMatrix> parallel;
    for (const auto& w : worlds)
      parallel.push_back(risk::oracle_risk_matrix(w, risk::all_skills(), risk::object_names(w)));
    double parallel_ms = ms_since(t0);
    bool equal = true;
    for (std::size_t i = 0; i < worlds.size(); ++i)
      equal = equal && serial[i].entries == parallel[i].entries;
    report("oracle risk matrix", serial_ms, parallel_ms, equal);
  }

  safety::ModelParameters model = safety::ModelParameters::init(5);
  {
    auto t0 = Clock::now();
    std::vector<risk::SafetyMatrix> serial;
    for (const auto& w : worlds)
      serial.push_back(
          safety::predict_matrix_serial(model, w, risk::all_skills(), risk::object_names(w)));
    double serial_ms = ms_since(t0);
    t0 = Clock::now();
    std::vector<risk::SafetyMatrix> parallel;
    for (const auto& w : worlds)
      parallel.push_back(safety::predict_matrix(model, w, risk::all_skills(),
                                                risk::object_names(w)));
    double parallel_ms = ms_since(t0);
    bool equal = true;
    for (std::size_t i = 0; i < worlds.size(); ++i)
      equal = equal && serial[i].entries == parallel[i].entries;
    report("predict matrix", serial_ms, parallel_ms, equal);
  }

  {
    safety::CollectOptions collect;
    collect.base.scene = "chair";
    collect.base.mode = world::SceneMode::hard;
    collect.base.object_count = 6;
    collect.episodes = 60;
    collect.base_seed = 99;
    std::vector<safety::TrajectoryRecord> data = safety::collect_dataset(collect);

    safety::TrainOptions opts;
    opts.max_epochs = 12;
    opts.seed = 3;
    opts.parallel = false;
    auto t0 = Clock::now();
    safety::TrainResult serial = safety::train(model, data, opts);
    double serial_ms = ms_since(t0);
    opts.parallel = true;
    t0 = Clock::now();
    safety::TrainResult parallel = safety::train(model, data, opts);
    double parallel_ms = ms_since(t0);
    report("training epochs", serial_ms, parallel_ms, serial.params == parallel.params);
  }

  {
    eval::ExperimentConfig cfg;
    cfg.scenes = {"chair"};
    cfg.modes = {world::SceneMode::hard};
    cfg.episodes = 30;
    cfg.base_seed = 777;
    cfg.parallel = false;
    auto t0 = Clock::now();
    eval::ExperimentResult serial = eval::run_experiment(cfg);
    double serial_ms = ms_since(t0);
    cfg.parallel = true;
    t0 = Clock::now();
    eval::ExperimentResult parallel = eval::run_experiment(cfg);
    double parallel_ms = ms_since(t0);
    bool equal = eval::emit_table(serial.summary, eval::TableFormat::csv) ==
                 eval::emit_table(parallel.summary, eval::TableFormat::csv);
    for (std::size_t i = 0; equal && i < serial.episodes.size(); ++i)
      equal = serial.episodes[i].collisions == parallel.episodes[i].collisions;
    report("experiment episodes", serial_ms, parallel_ms, equal);
  }

  return g_all_equal ? 0 : 1;
}
