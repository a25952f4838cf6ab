#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "riskplan/risk.hpp"
#include "riskplan/rng.hpp"
#include "riskplan/safety.hpp"
#include "test_fixtures.hpp"

using namespace riskplan;
using namespace riskplan::safety;

namespace {

// Central finite differences over every trainable coordinate: the
// independent oracle the analytic backward pass is checked against.
double max_grad_rel_error(ModelParameters params, const TrajectoryRecord& record,
                          double eps = 1e-5) {
  Gradient analytic(params);
  record_loss(params, record, &analytic);
  auto arrays = trainable_arrays(params);
  auto grads = analytic.arrays();
  double worst = 0.0;
  for (std::size_t a = 0; a < arrays.size(); ++a) {
    for (std::size_t i = 0; i < arrays[a]->size(); ++i) {
      double saved = (*arrays[a])[i];
      (*arrays[a])[i] = saved + eps;
      double up = record_loss(params, record);
      (*arrays[a])[i] = saved - eps;
      double down = record_loss(params, record);
      (*arrays[a])[i] = saved;
      double fd = (up - down) / (2.0 * eps);
      double an = (*grads[a])[i];
      double denom = std::max(std::abs(fd), std::abs(an));
      // below ~1e-5 the central difference sits at its cancellation noise
      // floor and a relative comparison stops meaning anything
      if (denom < 1e-5) continue;
      worst = std::max(worst, std::abs(fd - an) / denom);
    }
  }
  return worst;
}

TrajectoryRecord random_record(Rng& rng) {
  TrajectoryRecord r;
  r.scene_ref = "synthetic";
  r.skill_index = static_cast<int>(rng.next_below(risk::kSkillCount));
  r.object = "obj";
  for (auto& view : r.views)
    for (double& v : view) v = rng.next_below(3) == 0 ? rng.next_range(0.0, 2.0) : 0.0;
  r.label = rng.next_range(0.0, 5.0);
  return r;
}

std::vector<TrajectoryRecord> small_corpus(int episodes, std::uint64_t seed) {
  CollectOptions opts;
  opts.base.scene = "chair";
  opts.base.mode = world::SceneMode::hard;
  opts.base.object_count = 6;
  opts.episodes = episodes;
  opts.base_seed = seed;
  return collect_dataset(opts);
}

}  // namespace

TEST_CASE("zero-initialized heads predict zero for any input") {
  ModelParameters p = ModelParameters::init(11);
  std::fill(p.heads.begin(), p.heads.end(), 0.0);
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    TrajectoryRecord r = random_record(rng);
    CHECK(forward(p, r.views, r.skill_index) == 0.0);
  }
}

TEST_CASE("forward is deterministic") {
  ModelParameters p = ModelParameters::init(11);
  Rng rng(4);
  TrajectoryRecord r = random_record(rng);
  CHECK(forward(p, r.views, r.skill_index) == forward(p, r.views, r.skill_index));
  CHECK_THROWS_AS(forward(p, r.views, 99), std::runtime_error);
}

TEST_CASE("freshly initialized heads keep predictions far below the clearing threshold") {
  ModelParameters p = ModelParameters::init(2024);
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    TrajectoryRecord r = random_record(rng);
    CHECK(std::abs(forward(p, r.views, r.skill_index)) < 0.5);
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(90210);
  for (int point = 0; point < 2; ++point) {
    ModelParameters p = ModelParameters::init(rng.next_u64());
    // move off the init point so w_h gradients are exercised at generic values
    for (auto* arr : trainable_arrays(p))
      for (auto& x : *arr) x += rng.next_range(-0.05, 0.05);
    for (int rec = 0; rec < 2; ++rec) {
      TrajectoryRecord r = random_record(rng);
      CHECK(max_grad_rel_error(p, r) <= 1e-4);
    }
  }
}

TEST_CASE("gradients of unused heads are zero") {
  ModelParameters p = ModelParameters::init(7);
  Rng rng(8);
  TrajectoryRecord r = random_record(rng);
  r.skill_index = 0;
  Gradient g(p);
  record_loss(p, r, &g);
  for (int i = 1; i < risk::kSkillCount; ++i)
    for (int m = 0; m <= kHiddenDim; ++m)
      CHECK(g.heads[static_cast<std::size_t>(i) * (kHiddenDim + 1) + m] == 0.0);
}

TEST_CASE("one record is memorized to near-zero loss") {
  Rng rng(17);
  TrajectoryRecord r = random_record(rng);
  r.label = 2.0;
  ModelParameters p = ModelParameters::init(1);
  TrainOptions opts;
  opts.lr = 1e-2;
  opts.max_epochs = 600;
  opts.batch = 1;
  TrainResult result = train(p, {r}, opts);
  CHECK(result.final_loss < 1e-4);
}

TEST_CASE("training refuses empty data and non-finite labels") {
  ModelParameters p = ModelParameters::init(1);
  CHECK_THROWS_AS(train(p, {}, TrainOptions{}), std::runtime_error);
  Rng rng(18);
  TrajectoryRecord r = random_record(rng);
  r.label = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train(p, {r}, TrainOptions{}), std::runtime_error);
}

TEST_CASE("the encoder is bitwise frozen through training") {
  std::vector<TrajectoryRecord> data = small_corpus(3, 555);
  REQUIRE(!data.empty());
  ModelParameters p = ModelParameters::init(42);
  std::vector<double> encoder_before = p.encoder;
  TrainOptions opts;
  opts.max_epochs = 5;
  TrainResult result = train(p, data, opts);
  CHECK(result.params.encoder == encoder_before);
  // something did train
  CHECK(result.params.heads != p.heads);
}

TEST_CASE("training is deterministic given equal seeds") {
  std::vector<TrajectoryRecord> data = small_corpus(3, 556);
  ModelParameters p = ModelParameters::init(9);
  TrainOptions opts;
  opts.max_epochs = 4;
  opts.seed = 77;
  TrainResult a = train(p, data, opts);
  TrainResult b = train(p, data, opts);
  CHECK(a.params == b.params);
  CHECK(a.loss_curve == b.loss_curve);
}

TEST_CASE("parallel batch gradients are bitwise equal to the serial reference") {
  std::vector<TrajectoryRecord> data = small_corpus(2, 557);
  REQUIRE(data.size() >= 4);
  ModelParameters p = ModelParameters::init(10);
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < data.size(); ++i) indices.push_back(i);
  Gradient gp(p), gs(p);
  double lp = batch_gradient(p, data, indices, gp, true);
  double ls = batch_gradient(p, data, indices, gs, false);
  CHECK(lp == ls);
  CHECK(gp.w_in == gs.w_in);
  CHECK(gp.w_h == gs.w_h);
  CHECK(gp.b_h == gs.b_h);
  CHECK(gp.heads == gs.heads);
}

TEST_CASE("one easy episode with pick only yields one record per object") {
  CollectOptions opts;
  opts.base.scene = "table";
  opts.base.mode = world::SceneMode::easy;
  opts.base.object_count = 3;
  opts.episodes = 1;
  opts.base_seed = 31;
  opts.skills = {risk::Skill::pick};
  std::vector<TrajectoryRecord> records = collect_dataset(opts);
  CHECK(records.size() == 3);
  for (const auto& r : records) CHECK(r.skill_index == static_cast<int>(risk::Skill::pick));
}

TEST_CASE("collection is deterministic given the base seed") {
  CollectOptions opts;
  opts.base.scene = "counter";
  opts.base.mode = world::SceneMode::hard;
  opts.base.object_count = 5;
  opts.episodes = 4;
  opts.base_seed = 42;
  std::vector<TrajectoryRecord> a = collect_dataset(opts);
  std::vector<TrajectoryRecord> b = collect_dataset(opts);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].scene_ref == b[i].scene_ref);
    CHECK(a[i].label == b[i].label);
    CHECK(a[i].views == b[i].views);
  }
}

TEST_CASE("every record label equals the oracle entry on its regenerated scene") {
  std::vector<TrajectoryRecord> records = small_corpus(2, 558);
  REQUIRE(!records.empty());
  bool saw_place = false;
  for (const auto& r : records) {
    world::WorldState w = world_from_scene_ref(r.scene_ref);
    risk::Skill skill = static_cast<risk::Skill>(r.skill_index);
    risk::SafetyMatrix m = risk::oracle_risk_matrix(w, {skill}, {r.object});
    CHECK(m.at(0, 0) == doctest::Approx(r.label).epsilon(1e-12));
    CHECK(world::render_views(w, r.object) == r.views);
    saw_place = saw_place || skill == risk::Skill::place;
  }
  CHECK(saw_place);
}

TEST_CASE("dataset text round-trips") {
  std::vector<TrajectoryRecord> records = small_corpus(1, 559);
  REQUIRE(!records.empty());
  std::string text = dataset_to_text(records);
  std::vector<TrajectoryRecord> back = dataset_from_text(text);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(back[i].scene_ref == records[i].scene_ref);
    CHECK(back[i].skill_index == records[i].skill_index);
    CHECK(back[i].object == records[i].object);
    CHECK(back[i].label == doctest::Approx(records[i].label).epsilon(1e-6));
  }
  CHECK_THROWS_AS(dataset_from_text("I=9 VIEWDIM=1 VIEWS=1 SKILLS=x\n"), std::runtime_error);
}

TEST_CASE("model text round-trips bitwise and validates dimensions") {
  ModelParameters p = ModelParameters::init(654);
  ModelParameters q = model_from_text(model_to_text(p));
  CHECK(p == q);
  CHECK_THROWS_AS(model_from_text("riskmodel v1\nI=2 VIEWDIM=32 VIEWS=5 ENC=16 HIDDEN=64 SEED=0\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(model_from_text("something else"), std::runtime_error);
}

TEST_CASE("predict_matrix has the contract shape and sentinel pattern") {
  ModelParameters p = ModelParameters::init(2);
  world::WorldState w = testing::three_in_a_row();
  w.objects.push_back({"bin", world::ObjectKind::container, 0.08, {0.2, 0.8}});
  risk::SafetyMatrix m = predict_matrix(p, w);
  CHECK(m.skills.size() == 3);
  CHECK(m.objects.size() == 4);
  CHECK(m.entries.size() == 12);
  CHECK(m.source == risk::SafetyMatrix::Source::predicted);
  for (std::size_t n = 0; n < 3; ++n) {
    CHECK(std::isfinite(m.at(0, n)));   // pick on items
    CHECK(std::isinf(m.at(1, n)));      // place while handempty
    CHECK(std::isfinite(m.at(2, n)));   // navigate
  }
  CHECK(std::isinf(m.at(0, 3)));  // containers are not pickable

  risk::SafetyMatrix empty = predict_matrix(p, w, risk::all_skills(), {});
  CHECK(empty.entries.empty());

  risk::SafetyMatrix serial = predict_matrix_serial(p, w, risk::all_skills(), risk::object_names(w));
  CHECK(serial.entries == m.entries);
}

TEST_CASE("ranking renders the safest-first sentence block") {
  risk::SafetyMatrix m;
  m.skills = {"pick"};
  m.objects = {"apple", "bowl"};
  m.entries = {0.7, 0.2};
  SafetyRanking ranking = matrix_to_ranking(m);
  REQUIRE(ranking.entries.size() == 2);
  CHECK(ranking.entries[0].object == "bowl");
  CHECK(ranking.sentence_text ==
        "The safest operator is to pick the bowl. "
        "The second safest operator is to pick the apple.");
}

TEST_CASE("ranking ties break lexicographically by object then skill") {
  risk::SafetyMatrix m;
  m.skills = {"pick"};
  m.objects = {"bowl", "apple"};
  m.entries = {0.5, 0.5};
  SafetyRanking ranking = matrix_to_ranking(m);
  CHECK(ranking.entries[0].object == "apple");
  CHECK(ranking.entries[1].object == "bowl");
}

TEST_CASE("ranking is invariant under strictly increasing transforms") {
  Rng rng(808);
  risk::SafetyMatrix m;
  m.skills = {"pick", "place", "navigate"};
  m.objects = {"a", "b", "c", "d"};
  for (int i = 0; i < 12; ++i) m.entries.push_back(rng.next_range(0.0, 4.0));
  risk::SafetyMatrix warped = m;
  for (auto& v : warped.entries) v = std::exp(v) * 3.0 + 1.0;
  SafetyRanking r1 = matrix_to_ranking(m);
  SafetyRanking r2 = matrix_to_ranking(warped);
  REQUIRE(r1.entries.size() == r2.entries.size());
  for (std::size_t i = 0; i < r1.entries.size(); ++i) {
    CHECK(r1.entries[i].skill == r2.entries[i].skill);
    CHECK(r1.entries[i].object == r2.entries[i].object);
  }
}

TEST_CASE("sentinel entries rank last and stay out of the sentences") {
  risk::SafetyMatrix m;
  m.skills = {"pick"};
  m.objects = {"apple", "bin"};
  m.entries = {1.5, risk::kInapplicable};
  SafetyRanking ranking = matrix_to_ranking(m);
  CHECK(ranking.entries.back().object == "bin");
  CHECK(ranking.sentence_text == "The safest operator is to pick the apple.");
}

TEST_CASE("ordinals continue numerically past tenth") {
  risk::SafetyMatrix m;
  m.skills = {"pick"};
  for (int i = 0; i < 12; ++i) {
    m.objects.push_back("o" + std::string(1, static_cast<char>('a' + i)));
    m.entries.push_back(static_cast<double>(i));
  }
  SafetyRanking ranking = matrix_to_ranking(m);
  CHECK(ranking.sentence_text.find("The tenth safest operator") != std::string::npos);
  CHECK(ranking.sentence_text.find("The 11-th safest operator") != std::string::npos);
}

TEST_CASE("spearman handles perfect, reversed, and degenerate inputs") {
  CHECK(*spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(*spearman({1, 2, 3, 4}, {9, 7, 5, 3}) == doctest::Approx(-1.0));
  CHECK_FALSE(spearman({1, 1, 1}, {1, 2, 3}).has_value());
  CHECK_FALSE(spearman({1, 2}, {1, 2, 3}).has_value());
}

TEST_CASE("a trained model ranks the middle of three-in-a-row as riskiest") {
  std::vector<TrajectoryRecord> data;
  for (const char* scene : {"table", "chair"}) {
    CollectOptions opts;
    opts.base.scene = scene;
    opts.base.mode = world::SceneMode::hard;
    opts.base.object_count = 6;
    opts.episodes = 60;
    opts.base_seed = hash_combine(4242, scene, 0);
    auto records = collect_dataset(opts);
    data.insert(data.end(), records.begin(), records.end());
  }
  ModelParameters p = ModelParameters::init(88);
  TrainOptions opts;
  opts.max_epochs = 60;
  opts.seed = 5;
  TrainResult result = train(p, data, opts);
  CHECK(result.final_loss < result.loss_curve.front());

  world::WorldState w = testing::three_in_a_row();
  risk::SafetyMatrix m = predict_matrix(result.params, w);
  double left = *m.value("pick", "left");
  double mid = *m.value("pick", "mid");
  double right = *m.value("pick", "right");
  CHECK(mid > left);
  CHECK(mid > right);

  // an isolated object renders all-zero views; the trained model keeps its
  // prediction near the zero-risk label such records carry
  world::ViewSet zero{};
  for (auto& view : zero) view.fill(0.0);
  CHECK(std::abs(forward(result.params, zero, static_cast<int>(risk::Skill::pick))) < 0.5);
}
