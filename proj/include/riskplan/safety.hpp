#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riskplan/risk.hpp"
#include "riskplan/world.hpp"

namespace riskplan::safety {

inline constexpr int kEncoderDim = 16;
inline constexpr int kHiddenDim = 64;

// Multi-head risk regressor: a frozen seeded random projection encodes each
// view, a tanh recurrent cell aggregates the 5 encoded views in angular
// order, and one linear head per skill reads the final hidden state.
struct ModelParameters {
  std::vector<double> encoder;  // kViewDim x kEncoderDim, frozen after init
  std::vector<double> w_in;     // kEncoderDim x kHiddenDim
  std::vector<double> w_h;      // kHiddenDim x kHiddenDim
  std::vector<double> b_h;      // kHiddenDim
  std::vector<double> heads;    // kSkillCount x (kHiddenDim + 1), bias last
  std::uint64_t init_seed = 0;

  bool operator==(const ModelParameters&) const = default;

  static ModelParameters init(std::uint64_t seed);
  std::size_t trainable_count() const;
};

// Mutable views over the trainable arrays, in a fixed order shared with
// Gradient. The encoder is deliberately absent.
std::vector<std::vector<double>*> trainable_arrays(ModelParameters& p);
std::vector<const std::vector<double>*> trainable_arrays(const ModelParameters& p);

struct Gradient {
  std::vector<double> w_in;
  std::vector<double> w_h;
  std::vector<double> b_h;
  std::vector<double> heads;

  explicit Gradient(const ModelParameters& p);
  void zero();
  std::vector<std::vector<double>*> arrays();
};

struct TrajectoryRecord {
  std::string scene_ref;  // enough to regenerate the recorded scene
  int skill_index = 0;
  std::string object;
  world::ViewSet views{};
  double label = 0.0;
};

double forward(const ModelParameters& p, const world::ViewSet& views, int skill_index);

// Squared error of one record; adds d(loss)/d(trainables) into grad when
// grad is non-null.
double record_loss(const ModelParameters& p, const TrajectoryRecord& r, Gradient* grad = nullptr);

// Mean gradient over a batch of records. Per-record gradients are computed
// into private slots (in parallel by default) and reduced in index order, so
// the result is bitwise identical to the serial reference.
double batch_gradient(const ModelParameters& p, const std::vector<TrajectoryRecord>& data,
                      const std::vector<std::size_t>& indices, Gradient& out, bool parallel = true);

struct TrainOptions {
  double lr = 1e-3;
  int batch = 32;
  int max_epochs = 200;
  std::uint64_t seed = 0;
  bool parallel = true;
};

struct TrainResult {
  ModelParameters params;
  std::vector<double> loss_curve;  // per-epoch mean squared error
  double final_loss = 0.0;
};

// Adam (beta1 0.9, beta2 0.999, eps 1e-8) over the trainable arrays only.
// Deterministic given opts.seed. Throws on an empty dataset, non-finite
// labels, or a diverging (non-finite) loss.
TrainResult train(ModelParameters params, const std::vector<TrajectoryRecord>& data,
                  const TrainOptions& opts);

// Learned counterpart of risk::oracle_risk_matrix: forward() per applicable
// (skill, object) pair, +inf sentinel elsewhere.
risk::SafetyMatrix predict_matrix(const ModelParameters& p, const world::WorldState& w,
                                  const std::vector<risk::Skill>& skills,
                                  const std::vector<std::string>& objects);
risk::SafetyMatrix predict_matrix_serial(const ModelParameters& p, const world::WorldState& w,
                                         const std::vector<risk::Skill>& skills,
                                         const std::vector<std::string>& objects);
risk::SafetyMatrix predict_matrix(const ModelParameters& p, const world::WorldState& w);

struct SafetyRanking {
  struct Entry {
    std::string skill;
    std::string object;
    double value = 0.0;
  };
  std::vector<Entry> entries;  // ascending by value, ties object-then-skill, sentinels last
  std::string sentence_text;   // rendered for the planner prompt
};

SafetyRanking matrix_to_ranking(const risk::SafetyMatrix& m);

struct CollectOptions {
  world::SceneConfig base;  // template; seed and (in hard mode) count vary per episode
  int episodes = 1;
  std::uint64_t base_seed = 0;
  std::vector<risk::Skill> skills = risk::all_skills();
};

// One episode = one randomized scene. Every applicable (skill, object) pair
// is executed on a clone and recorded with its oracle label; place pairs are
// recorded from the post-pick state where they become applicable.
std::vector<TrajectoryRecord> collect_dataset(const CollectOptions& opts);

// Rebuilds the world a record was collected from (scene-ref round trip).
world::WorldState world_from_scene_ref(const std::string& scene_ref);

// Dataset file: one self-describing header line, then one record per line.
std::string dataset_to_text(const std::vector<TrajectoryRecord>& records);
std::vector<TrajectoryRecord> dataset_from_text(const std::string& text);

// Model file: versioned header plus flat arrays; loader validates shapes.
std::string model_to_text(const ModelParameters& p);
ModelParameters model_from_text(const std::string& text);

// Tie-corrected Spearman rank correlation; empty when either input is
// constant or the sizes differ.
std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace riskplan::safety
