#include "riskplan/safety.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "riskplan/rng.hpp"

namespace riskplan::safety {

using risk::kSkillCount;
using world::kViewCount;
using world::kViewDim;

namespace {

constexpr int kHeadSize = kHiddenDim + 1;  // weights + bias

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%.6e", v);
  return buf;
}

}  // namespace

ModelParameters ModelParameters::init(std::uint64_t seed) {
  ModelParameters p;
  p.init_seed = seed;
  Rng rng(hash_combine(seed, "model-init", 0));
  auto fill = [&rng](std::vector<double>& v, std::size_t n, double scale) {
    v.resize(n);
    for (auto& x : v) x = rng.next_range(-scale, scale);
  };
  fill(p.encoder, static_cast<std::size_t>(kViewDim) * kEncoderDim, 1.0 / std::sqrt(kViewDim));
  fill(p.w_in, static_cast<std::size_t>(kEncoderDim) * kHiddenDim, 1.0 / std::sqrt(kEncoderDim));
  fill(p.w_h, static_cast<std::size_t>(kHiddenDim) * kHiddenDim, 0.5 / std::sqrt(kHiddenDim));
  p.b_h.assign(kHiddenDim, 0.0);
  fill(p.heads, static_cast<std::size_t>(kSkillCount) * kHeadSize, 0.002);
  return p;
}

std::size_t ModelParameters::trainable_count() const {
  return w_in.size() + w_h.size() + b_h.size() + heads.size();
}

std::vector<std::vector<double>*> trainable_arrays(ModelParameters& p) {
  return {&p.w_in, &p.w_h, &p.b_h, &p.heads};
}

std::vector<const std::vector<double>*> trainable_arrays(const ModelParameters& p) {
  return {&p.w_in, &p.w_h, &p.b_h, &p.heads};
}

Gradient::Gradient(const ModelParameters& p)
    : w_in(p.w_in.size(), 0.0),
      w_h(p.w_h.size(), 0.0),
      b_h(p.b_h.size(), 0.0),
      heads(p.heads.size(), 0.0) {}

void Gradient::zero() {
  std::fill(w_in.begin(), w_in.end(), 0.0);
  std::fill(w_h.begin(), w_h.end(), 0.0);
  std::fill(b_h.begin(), b_h.end(), 0.0);
  std::fill(heads.begin(), heads.end(), 0.0);
}

std::vector<std::vector<double>*> Gradient::arrays() { return {&w_in, &w_h, &b_h, &heads}; }

namespace {

struct ForwardTrace {
  double encoded[kViewCount][kEncoderDim];
  double hidden[kViewCount + 1][kHiddenDim];  // hidden[0] is the zero state
  double prediction = 0.0;
};

void run_forward(const ModelParameters& p, const world::ViewSet& views, int skill_index,
                 ForwardTrace& t) {
  for (int k = 0; k < kViewCount; ++k)
    for (int j = 0; j < kEncoderDim; ++j) {
      double acc = 0.0;
      for (int i = 0; i < kViewDim; ++i) acc += views[k][i] * p.encoder[i * kEncoderDim + j];
      t.encoded[k][j] = acc;
    }
  for (int m = 0; m < kHiddenDim; ++m) t.hidden[0][m] = 0.0;
  for (int k = 0; k < kViewCount; ++k) {
    const double* e = t.encoded[k];
    const double* prev = t.hidden[k];
    double* next = t.hidden[k + 1];
    for (int m = 0; m < kHiddenDim; ++m) next[m] = p.b_h[m];
    for (int j = 0; j < kEncoderDim; ++j) {
      double ej = e[j];
      const double* row = &p.w_in[static_cast<std::size_t>(j) * kHiddenDim];
      for (int m = 0; m < kHiddenDim; ++m) next[m] += ej * row[m];
    }
    for (int l = 0; l < kHiddenDim; ++l) {
      double hl = prev[l];
      if (hl == 0.0) continue;
      const double* row = &p.w_h[static_cast<std::size_t>(l) * kHiddenDim];
      for (int m = 0; m < kHiddenDim; ++m) next[m] += hl * row[m];
    }
    for (int m = 0; m < kHiddenDim; ++m) next[m] = std::tanh(next[m]);
  }
  const double* head = &p.heads[static_cast<std::size_t>(skill_index) * kHeadSize];
  double acc = head[kHiddenDim];
  for (int m = 0; m < kHiddenDim; ++m) acc += head[m] * t.hidden[kViewCount][m];
  t.prediction = acc;
}

}  // namespace

double forward(const ModelParameters& p, const world::ViewSet& views, int skill_index) {
  if (skill_index < 0 || skill_index >= kSkillCount)
    throw std::runtime_error("skill index out of range");
  ForwardTrace t;
  run_forward(p, views, skill_index, t);
  return t.prediction;
}

double record_loss(const ModelParameters& p, const TrajectoryRecord& r, Gradient* grad) {
  if (r.skill_index < 0 || r.skill_index >= kSkillCount)
    throw std::runtime_error("skill index out of range");
  ForwardTrace t;
  run_forward(p, r.views, r.skill_index, t);
  double diff = t.prediction - r.label;
  double loss = diff * diff;
  if (!grad) return loss;

  double dpred = 2.0 * diff;
  double* dhead = &grad->heads[static_cast<std::size_t>(r.skill_index) * kHeadSize];
  const double* head = &p.heads[static_cast<std::size_t>(r.skill_index) * kHeadSize];
  double dh[kHiddenDim];
  for (int m = 0; m < kHiddenDim; ++m) {
    dhead[m] += dpred * t.hidden[kViewCount][m];
    dh[m] = dpred * head[m];
  }
  dhead[kHiddenDim] += dpred;

  double dz[kHiddenDim];
  double dprev[kHiddenDim];
  for (int k = kViewCount; k >= 1; --k) {
    const double* h = t.hidden[k];
    const double* prev = t.hidden[k - 1];
    const double* e = t.encoded[k - 1];
    for (int m = 0; m < kHiddenDim; ++m) dz[m] = dh[m] * (1.0 - h[m] * h[m]);
    for (int m = 0; m < kHiddenDim; ++m) grad->b_h[m] += dz[m];
    for (int j = 0; j < kEncoderDim; ++j) {
      double ej = e[j];
      if (ej == 0.0) continue;
      double* row = &grad->w_in[static_cast<std::size_t>(j) * kHiddenDim];
      for (int m = 0; m < kHiddenDim; ++m) row[m] += ej * dz[m];
    }
    for (int l = 0; l < kHiddenDim; ++l) {
      double hl = prev[l];
      const double* wrow = &p.w_h[static_cast<std::size_t>(l) * kHiddenDim];
      double acc = 0.0;
      if (hl != 0.0) {
        double* grow = &grad->w_h[static_cast<std::size_t>(l) * kHiddenDim];
        for (int m = 0; m < kHiddenDim; ++m) {
          grow[m] += hl * dz[m];
          acc += wrow[m] * dz[m];
        }
      } else {
        for (int m = 0; m < kHiddenDim; ++m) acc += wrow[m] * dz[m];
      }
      dprev[l] = acc;
    }
    for (int m = 0; m < kHiddenDim; ++m) dh[m] = dprev[m];
  }
  return loss;
}

double batch_gradient(const ModelParameters& p, const std::vector<TrajectoryRecord>& data,
                      const std::vector<std::size_t>& indices, Gradient& out, bool parallel) {
  out.zero();
  const std::size_t n = indices.size();
  if (n == 0) return 0.0;
  static thread_local std::vector<Gradient> slot_storage;
  while (slot_storage.size() < n) slot_storage.emplace_back(p);
  // plain reference so the OpenMP workers share the caller's storage instead
  // of resolving the thread_local to their own empty instance
  std::vector<Gradient>& slots = slot_storage;
  std::vector<double> losses(n, 0.0);

  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(n); ++k) {
      slots[k].zero();
      losses[k] = record_loss(p, data[indices[k]], &slots[k]);
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      slots[k].zero();
      losses[k] = record_loss(p, data[indices[k]], &slots[k]);
    }
  }

  // reduce in index order so thread count never changes the result
  double inv = 1.0 / static_cast<double>(n);
  auto out_arrays = out.arrays();
  for (std::size_t k = 0; k < n; ++k) {
    auto slot_arrays = slots[k].arrays();
    for (std::size_t a = 0; a < out_arrays.size(); ++a) {
      double* dst = out_arrays[a]->data();
      const double* src = slot_arrays[a]->data();
      for (std::size_t i = 0; i < out_arrays[a]->size(); ++i) dst[i] += src[i];
    }
  }
  double loss = 0.0;
  for (std::size_t k = 0; k < n; ++k) loss += losses[k];
  for (auto* arr : out_arrays)
    for (auto& x : *arr) x *= inv;
  return loss * inv;
}

TrainResult train(ModelParameters params, const std::vector<TrajectoryRecord>& data,
                  const TrainOptions& opts) {
  if (data.empty()) throw std::runtime_error("cannot train on an empty dataset");
  for (const auto& r : data)
    if (!std::isfinite(r.label)) throw std::runtime_error("non-finite label in dataset");
  if (opts.batch < 1 || opts.max_epochs < 1) throw std::runtime_error("bad training options");

  const std::vector<double> frozen_encoder = params.encoder;

  Gradient grad(params);
  std::vector<std::vector<double>> adam_m, adam_v;
  for (auto* arr : trainable_arrays(params)) {
    adam_m.emplace_back(arr->size(), 0.0);
    adam_v.emplace_back(arr->size(), 0.0);
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  std::size_t step = 0;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
    Rng rng(hash_combine(opts.seed, "train-epoch", static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.next_below(i)]);

    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += opts.batch) {
      std::size_t end = std::min(order.size(), begin + opts.batch);
      std::vector<std::size_t> batch(order.begin() + begin, order.begin() + end);
      double loss = batch_gradient(params, data, batch, grad, opts.parallel);
      if (!std::isfinite(loss))
        throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                 std::to_string(epoch));
      epoch_loss += loss * static_cast<double>(batch.size());

      ++step;
      double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      auto p_arrays = trainable_arrays(params);
      auto g_arrays = grad.arrays();
      for (std::size_t a = 0; a < p_arrays.size(); ++a) {
        double* theta = p_arrays[a]->data();
        const double* g = g_arrays[a]->data();
        double* m = adam_m[a].data();
        double* v = adam_v[a].data();
        for (std::size_t i = 0; i < p_arrays[a]->size(); ++i) {
          m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
          v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
          theta[i] -= opts.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kEps);
        }
      }
    }
    result.loss_curve.push_back(epoch_loss / static_cast<double>(data.size()));
  }

  params.encoder = frozen_encoder;  // belt and braces: nothing above touches it
  result.final_loss = result.loss_curve.back();
  result.params = std::move(params);
  return result;
}

namespace {

risk::SafetyMatrix predict_matrix_impl(const ModelParameters& p, const world::WorldState& w,
                                       const std::vector<risk::Skill>& skills,
                                       const std::vector<std::string>& objects, bool parallel) {
  risk::SafetyMatrix m;
  for (risk::Skill s : skills) m.skills.push_back(risk::skill_names()[static_cast<int>(s)]);
  m.objects = objects;
  m.entries.assign(skills.size() * objects.size(), 0.0);
  m.source = risk::SafetyMatrix::Source::predicted;
  pddl::SymbolicState state = world::extract_predicates(w);

  auto column = [&](std::size_t n) {
    world::ViewSet views = world::render_views(w, objects[n]);
    for (std::size_t i = 0; i < skills.size(); ++i) {
      auto action = risk::instantiate_skill(w, state, skills[i], objects[n]);
      if (!action || !pddl::is_applicable(state, *action))
        m.at(i, n) = risk::kInapplicable;
      else
        m.at(i, n) = forward(p, views, static_cast<int>(skills[i]));
    }
  };

  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t n = 0; n < static_cast<std::int64_t>(objects.size()); ++n)
      column(static_cast<std::size_t>(n));
  } else {
    for (std::size_t n = 0; n < objects.size(); ++n) column(n);
  }
  return m;
}

}  // namespace

risk::SafetyMatrix predict_matrix(const ModelParameters& p, const world::WorldState& w,
                                  const std::vector<risk::Skill>& skills,
                                  const std::vector<std::string>& objects) {
  return predict_matrix_impl(p, w, skills, objects, true);
}

risk::SafetyMatrix predict_matrix_serial(const ModelParameters& p, const world::WorldState& w,
                                         const std::vector<risk::Skill>& skills,
                                         const std::vector<std::string>& objects) {
  return predict_matrix_impl(p, w, skills, objects, false);
}

risk::SafetyMatrix predict_matrix(const ModelParameters& p, const world::WorldState& w) {
  return predict_matrix(p, w, risk::all_skills(), risk::object_names(w));
}

namespace {

std::string ordinal_phrase(std::size_t position) {
  static const char* words[] = {"second", "third", "fourth", "fifth", "sixth",
                                "seventh", "eighth", "ninth", "tenth"};
  if (position == 0) return "safest";
  if (position <= 9) return std::string(words[position - 1]) + " safest";
  return std::to_string(position + 1) + "-th safest";
}

}  // namespace

SafetyRanking matrix_to_ranking(const risk::SafetyMatrix& m) {
  SafetyRanking ranking;
  for (std::size_t i = 0; i < m.skills.size(); ++i)
    for (std::size_t n = 0; n < m.objects.size(); ++n)
      ranking.entries.push_back({m.skills[i], m.objects[n], m.at(i, n)});
  std::stable_sort(ranking.entries.begin(), ranking.entries.end(),
                   [](const SafetyRanking::Entry& a, const SafetyRanking::Entry& b) {
                     if (a.value != b.value) return a.value < b.value;
                     if (a.object != b.object) return a.object < b.object;
                     return a.skill < b.skill;
                   });
  std::ostringstream text;
  std::size_t position = 0;
  for (const auto& entry : ranking.entries) {
    if (std::isinf(entry.value)) break;  // sentinels sort last and stay unspoken
    if (position > 0) text << " ";
    text << "The " << ordinal_phrase(position) << " operator is to " << entry.skill << " the "
         << entry.object << ".";
    ++position;
  }
  ranking.sentence_text = text.str();
  return ranking;
}

namespace {

std::string mode_name(world::SceneMode mode) {
  return mode == world::SceneMode::easy ? "easy" : "hard";
}

std::string scene_ref_of(const world::SceneConfig& cfg) {
  char seed_hex[24];
  std::snprintf(seed_hex, sizeof(seed_hex), "%016llx",
                static_cast<unsigned long long>(cfg.seed));
  return cfg.scene + "/" + mode_name(cfg.mode) + "/" + std::to_string(cfg.object_count) + "/" +
         seed_hex;
}

}  // namespace

world::WorldState world_from_scene_ref(const std::string& scene_ref) {
  std::string ref = scene_ref;
  std::string pre_pick;
  if (auto pos = ref.find("/pick="); pos != std::string::npos) {
    pre_pick = ref.substr(pos + 6);
    ref = ref.substr(0, pos);
  }
  std::istringstream in(ref);
  std::string scene, mode, count, seed_hex;
  if (!std::getline(in, scene, '/') || !std::getline(in, mode, '/') ||
      !std::getline(in, count, '/') || !std::getline(in, seed_hex))
    throw std::runtime_error("malformed scene ref " + scene_ref);
  world::SceneConfig cfg;
  cfg.scene = scene;
  cfg.mode = mode == "easy" ? world::SceneMode::easy : world::SceneMode::hard;
  cfg.object_count = std::stoi(count);
  cfg.seed = std::stoull(seed_hex, nullptr, 16);
  world::WorldState w = world::generate_scene(cfg);
  if (!pre_pick.empty()) {
    pddl::SymbolicState s = world::extract_predicates(w);
    auto action = risk::instantiate_skill(w, s, risk::Skill::pick, pre_pick);
    if (!action) throw std::runtime_error("scene ref pick not instantiable: " + scene_ref);
    world::execute_skill(w, *action);
  }
  return w;
}

std::vector<TrajectoryRecord> collect_dataset(const CollectOptions& opts) {
  if (opts.episodes < 1) throw std::runtime_error("need at least one episode");
  std::vector<TrajectoryRecord> records;
  bool want_place = false;
  std::vector<risk::Skill> direct_skills;
  for (risk::Skill s : opts.skills) {
    if (s == risk::Skill::place)
      want_place = true;
    else
      direct_skills.push_back(s);
  }

  for (int e = 0; e < opts.episodes; ++e) {
    std::uint64_t seed = hash_combine(opts.base_seed, "collect-episode",
                                      static_cast<std::uint64_t>(e));
    world::SceneConfig cfg = opts.base;
    cfg.seed = seed;
    if (cfg.mode == world::SceneMode::hard) cfg.object_count = 5 + static_cast<int>(seed % 3);
    world::WorldState w = world::generate_scene(cfg);
    const std::string ref = scene_ref_of(cfg);

    if (!direct_skills.empty()) {
      risk::SafetyMatrix m = risk::oracle_risk_matrix(w, direct_skills, risk::object_names(w));
      for (std::size_t n = 0; n < m.objects.size(); ++n) {
        world::ViewSet views{};
        bool rendered = false;
        for (std::size_t i = 0; i < direct_skills.size(); ++i) {
          double label = m.at(i, n);
          if (!std::isfinite(label)) continue;
          if (!rendered) {
            views = world::render_views(w, m.objects[n]);
            rendered = true;
          }
          records.push_back(TrajectoryRecord{ref, static_cast<int>(direct_skills[i]), m.objects[n],
                                             views, label});
        }
      }
    }

    if (want_place) {
      pddl::SymbolicState s = world::extract_predicates(w);
      for (const auto& obj : w.objects) {
        auto pick = risk::instantiate_skill(w, s, risk::Skill::pick, obj.name);
        if (!pick || !pddl::is_applicable(s, *pick)) continue;
        world::WorldState post = world::clone_world(w);
        world::execute_skill(post, *pick);
        risk::SafetyMatrix pm = risk::oracle_risk_matrix(post, {risk::Skill::place}, {obj.name});
        if (!std::isfinite(pm.at(0, 0))) continue;  // no staging cell free
        records.push_back(TrajectoryRecord{ref + "/pick=" + obj.name,
                                           static_cast<int>(risk::Skill::place), obj.name,
                                           world::render_views(post, obj.name), pm.at(0, 0)});
      }
    }
  }
  return records;
}

std::string dataset_to_text(const std::vector<TrajectoryRecord>& records) {
  std::ostringstream out;
  out << "I=" << kSkillCount << " VIEWDIM=" << kViewDim << " VIEWS=" << kViewCount << " SKILLS=";
  for (int i = 0; i < kSkillCount; ++i) out << (i ? "," : "") << risk::skill_names()[i];
  out << "\n";
  for (const auto& r : records) {
    out << r.scene_ref << " " << r.skill_index << " " << r.object << " " << fmt6(r.label);
    for (const auto& view : r.views)
      for (double v : view) out << " " << fmt6(v);
    out << "\n";
  }
  return out.str();
}

std::vector<TrajectoryRecord> dataset_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty dataset");
  std::ostringstream expect;
  expect << "I=" << kSkillCount << " VIEWDIM=" << kViewDim << " VIEWS=" << kViewCount
         << " SKILLS=";
  for (int i = 0; i < kSkillCount; ++i) expect << (i ? "," : "") << risk::skill_names()[i];
  if (header != expect.str())
    throw std::runtime_error("dataset header mismatch: " + header);
  std::vector<TrajectoryRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    TrajectoryRecord r;
    if (!(ls >> r.scene_ref >> r.skill_index >> r.object >> r.label))
      throw std::runtime_error("malformed dataset record: " + line);
    for (auto& view : r.views)
      for (double& v : view)
        if (!(ls >> v)) throw std::runtime_error("truncated views in record: " + line);
    if (r.skill_index < 0 || r.skill_index >= kSkillCount)
      throw std::runtime_error("bad skill index in record: " + line);
    records.push_back(std::move(r));
  }
  return records;
}

std::string model_to_text(const ModelParameters& p) {
  std::ostringstream out;
  out << "riskmodel v1\n";
  out << "I=" << kSkillCount << " VIEWDIM=" << kViewDim << " VIEWS=" << kViewCount
      << " ENC=" << kEncoderDim << " HIDDEN=" << kHiddenDim << " SEED=" << p.init_seed << "\n";
  out << "SKILLS=";
  for (int i = 0; i < kSkillCount; ++i) out << (i ? "," : "") << risk::skill_names()[i];
  out << "\n";
  auto dump = [&out](const char* name, const std::vector<double>& v) {
    out << name;
    for (double x : v) out << " " << fmt17(x);
    out << "\n";
  };
  dump("encoder", p.encoder);
  dump("w_in", p.w_in);
  dump("w_h", p.w_h);
  dump("b_h", p.b_h);
  dump("heads", p.heads);
  return out.str();
}

ModelParameters model_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "riskmodel v1")
    throw std::runtime_error("not a riskmodel file");
  if (!std::getline(in, line)) throw std::runtime_error("missing model header");
  ModelParameters p;
  {
    std::istringstream hs(line);
    std::string tok;
    int i = -1, viewdim = -1, views = -1, enc = -1, hidden = -1;
    while (hs >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) throw std::runtime_error("bad header token " + tok);
      std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
      if (key == "I") i = std::stoi(value);
      else if (key == "VIEWDIM") viewdim = std::stoi(value);
      else if (key == "VIEWS") views = std::stoi(value);
      else if (key == "ENC") enc = std::stoi(value);
      else if (key == "HIDDEN") hidden = std::stoi(value);
      else if (key == "SEED") p.init_seed = std::stoull(value);
    }
    if (i != kSkillCount || viewdim != kViewDim || views != kViewCount || enc != kEncoderDim ||
        hidden != kHiddenDim)
      throw std::runtime_error("model dimensions do not match this build");
  }
  if (!std::getline(in, line) || line.rfind("SKILLS=", 0) != 0)
    throw std::runtime_error("missing SKILLS line");

  auto read_array = [&in](const char* name, std::vector<double>& v, std::size_t expected) {
    std::string row;
    if (!std::getline(in, row)) throw std::runtime_error(std::string("missing array ") + name);
    std::istringstream rs(row);
    std::string label;
    rs >> label;
    if (label != name) throw std::runtime_error("expected array " + std::string(name) + ", got " + label);
    v.clear();
    double x;
    while (rs >> x) v.push_back(x);
    if (v.size() != expected)
      throw std::runtime_error(std::string("array ") + name + " has wrong length");
  };
  read_array("encoder", p.encoder, static_cast<std::size_t>(kViewDim) * kEncoderDim);
  read_array("w_in", p.w_in, static_cast<std::size_t>(kEncoderDim) * kHiddenDim);
  read_array("w_h", p.w_h, static_cast<std::size_t>(kHiddenDim) * kHiddenDim);
  read_array("b_h", p.b_h, kHiddenDim);
  read_array("heads", p.heads, static_cast<std::size_t>(kSkillCount) * kHeadSize);
  return p;
}

std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) return std::nullopt;
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&v](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size(), 0.0);
    std::size_t i = 0;
    while (i < idx.size()) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // average rank of the tie group
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  std::vector<double> ra = ranks(a), rb = ranks(b);
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= static_cast<double>(ra.size());
  mb /= static_cast<double>(rb.size());
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va <= 0.0 || vb <= 0.0) return std::nullopt;
  return cov / std::sqrt(va * vb);
}

}  // namespace riskplan::safety
