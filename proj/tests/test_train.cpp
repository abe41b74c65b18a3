#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "helpers/fixtures.hpp"

#include "chartfc/errors.hpp"
#include "chartfc/fusion.hpp"
#include "chartfc/image.hpp"
#include "chartfc/train.hpp"

using namespace chartfc;
using testutil::TempDir;

namespace {

ModelConfig tiny_model_cfg() {
  ModelConfig cfg;
  cfg.layers = 1;
  cfg.hidden = 8;
  cfg.heads = 2;
  cfg.ffn = 12;
  cfg.max_len = 8;
  cfg.vocab_tokens = 10;
  return cfg;
}

TrainConfig tiny_train_cfg() {
  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.lr = 1e-3;
  cfg.max_epochs = 5;
  cfg.patience = 5;
  cfg.seed = 7;
  cfg.model_cfg = tiny_model_cfg();
  return cfg;
}

// [CLS] key [SEP] padded; the key token alone decides the label.
DataSample keyed_sample(const std::string& id, int key, Label gold, int max_len = 8,
                        bool with_vision = false) {
  DataSample s;
  s.id = id;
  s.enc.gold = gold;
  for (int i = 0; i < max_len; ++i) {
    const bool active = i < 3;
    const int tok = i == 0 ? 2 : i == 1 ? key : i == 2 ? 3 : 0;
    s.enc.token_ids.push_back(active ? tok : 0);
    s.enc.segment_ids.push_back(0);
    s.enc.position_ids.push_back(i);
    s.enc.x_bucket_ids.push_back(0);
    s.enc.y_bucket_ids.push_back(0);
    s.enc.label_ids.push_back(0);
    s.enc.attention_mask.push_back(active ? 1 : 0);
  }
  if (with_vision) {
    s.vision.resize(static_cast<size_t>(kVisionW) * kVisionH);
    for (size_t i = 0; i < s.vision.size(); ++i)
      s.vision[i] = static_cast<double>((i + key) % 7) / 7.0;
  }
  return s;
}

// key 5 always Supports, key 6 always Refutes: linearly separable.
Dataset keyed_dataset(int train_per_class, int valid_per_class, int test_per_class,
                      bool with_vision = false) {
  Dataset d;
  auto fill = [&](std::vector<DataSample>& split, const char* tag, int per_class) {
    for (int i = 0; i < per_class; ++i) {
      split.push_back(keyed_sample(std::string(tag) + "_s" + std::to_string(i), 5,
                                   Label::Supports, 8, with_vision));
      split.push_back(keyed_sample(std::string(tag) + "_r" + std::to_string(i), 6,
                                   Label::Refutes, 8, with_vision));
    }
  };
  fill(d.train, "tr", train_per_class);
  fill(d.valid, "va", valid_per_class);
  fill(d.test, "te", test_per_class);
  return d;
}

bool params_equal(const Params& a, const Params& b) {
  if (a.named.size() != b.named.size()) return false;
  for (size_t i = 0; i < a.named.size(); ++i)
    if (a.named[i].first != b.named[i].first || !(a.named[i].second == b.named[i].second))
      return false;
  return true;
}

}  // namespace

TEST_CASE("enum names round trip") {
  for (ModelKind k : {ModelKind::ChartBert, ModelKind::Vl, ModelKind::ClaimOnly})
    CHECK(model_kind_from_string(to_string(k)) == k);
  for (FusionKind k : {FusionKind::Concat, FusionKind::Mult, FusionKind::ConcatGru,
                       FusionKind::Mcb, FusionKind::Transformer})
    CHECK(fusion_kind_from_string(to_string(k)) == k);
  for (SeqgenMode m : {SeqgenMode::Concat, SeqgenMode::Tmp1, SeqgenMode::Tmp2,
                       SeqgenMode::Tmp3, SeqgenMode::None})
    CHECK(seqgen_mode_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(model_kind_from_string("resnet"), ConfigError);
  CHECK_THROWS_AS(fusion_kind_from_string("sum"), ConfigError);
  CHECK_THROWS_AS(seqgen_mode_from_string("tmp4"), ConfigError);
}

TEST_CASE("train config enforces the hyperparameter grids") {
  TrainConfig cfg = tiny_train_cfg();
  CHECK_NOTHROW(cfg.validate());

  TrainConfig bad = cfg;
  bad.batch_size = 7;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.lr = 2e-3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.max_epochs = 51;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.patience = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  // free_grid lifts the grids but still wants sane values
  bad = cfg;
  bad.free_grid = true;
  bad.batch_size = 7;
  bad.lr = 2e-3;
  CHECK_NOTHROW(bad.validate());
  bad.lr = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  CHECK(TrainConfig::from_json(cfg.to_json()).to_json() == cfg.to_json());
  CHECK_THROWS_AS(TrainConfig::from_json("{}"), ConfigError);
  CHECK_THROWS_AS(TrainConfig::from_json("not json"), ConfigError);
}

TEST_CASE("stratified batches balance every chunk") {
  std::vector<Label> golds;
  for (int i = 0; i < 70; ++i) golds.push_back(Label::Supports);
  for (int i = 0; i < 30; ++i) golds.push_back(Label::Refutes);

  const auto batches = stratified_batches(golds, 10, 4);
  REQUIRE(batches.size() == 10);
  std::vector<int> seen(100, 0);
  for (const auto& batch : batches) {
    REQUIRE(batch.size() == 10);
    int supports = 0;
    for (size_t idx : batch) {
      ++seen[idx];
      if (golds[idx] == Label::Supports) ++supports;
    }
    CHECK(supports == 7);
  }
  for (int c : seen) CHECK(c == 1);

  // ragged final batch still lands within one of the global ratio
  const auto ragged = stratified_batches(golds, 32, 4);
  REQUIRE(ragged.size() == 4);
  CHECK(ragged.back().size() == 4);
  for (const auto& batch : ragged) {
    int supports = 0;
    for (size_t idx : batch)
      if (golds[idx] == Label::Supports) ++supports;
    const double want = 0.7 * static_cast<double>(batch.size());
    CHECK(std::fabs(supports - want) <= 1.0);
  }

  CHECK(stratified_batches(golds, 10, 4) == batches);
  CHECK(stratified_batches(golds, 10, 5) != batches);

  CHECK_THROWS_AS(stratified_batches(golds, 0, 4), ConfigError);
  CHECK_THROWS_AS(stratified_batches(std::vector<Label>(8, Label::Supports), 4, 1),
                  SingleClassDataset);
}

TEST_CASE("metrics match hand counts") {
  using L = Label;
  // 885 gold Supports + 706 gold Refutes, everything predicted Supports
  std::vector<Label> gold, pred;
  for (int i = 0; i < 885; ++i) gold.push_back(L::Supports);
  for (int i = 0; i < 706; ++i) gold.push_back(L::Refutes);
  pred.assign(gold.size(), L::Supports);

  const Metrics m = metrics_from_predictions(gold, pred);
  CHECK(m.total == 1591);
  CHECK(m.correct == 885);
  CHECK(m.tp == 885);
  CHECK(m.fp == 706);
  CHECK(m.fn == 0);
  CHECK(m.tn == 0);
  CHECK(m.accuracy == doctest::Approx(885.0 / 1591.0).epsilon(1e-12));
  CHECK(m.supports.precision == doctest::Approx(885.0 / 1591.0).epsilon(1e-12));
  CHECK(m.supports.recall == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.supports.f1 == doctest::Approx(1770.0 / 2476.0).epsilon(1e-12));
  CHECK(m.refutes.f1 == 0.0);
  CHECK(m.macro_f1 == doctest::Approx(885.0 / 2476.0).epsilon(1e-12));

  // perfect predictions
  const Metrics perfect = metrics_from_predictions(gold, gold);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.macro_f1 == 1.0);

  // fully inverted predictions
  std::vector<Label> inverted;
  for (Label l : gold)
    inverted.push_back(l == L::Supports ? L::Refutes : L::Supports);
  const Metrics zero = metrics_from_predictions(gold, inverted);
  CHECK(zero.accuracy == 0.0);
  CHECK(zero.macro_f1 == 0.0);

  CHECK_THROWS_AS(metrics_from_predictions({}, {}), EmptySplit);
  CHECK_THROWS_AS(metrics_from_predictions(gold, std::vector<Label>(3, L::Supports)),
                  ShapeMismatch);
}

TEST_CASE("build_model is deterministic and claim-only shares the encoder") {
  TrainConfig cfg = tiny_train_cfg();
  const Model a = build_model(cfg);
  const Model b = build_model(cfg);
  CHECK(params_equal(a.params, b.params));

  TrainConfig other = cfg;
  other.seed = 8;
  CHECK_FALSE(params_equal(a.params, build_model(other).params));

  TrainConfig claim_only = cfg;
  claim_only.model = ModelKind::ClaimOnly;
  claim_only.seqgen = SeqgenMode::None;
  const Model c = build_model(claim_only);
  CHECK(params_equal(a.params, c.params));
  const DataSample s = keyed_sample("x", 5, Label::Supports);
  CHECK(a.predict({&s})[0] == c.predict({&s})[0]);
}

TEST_CASE("every fusion kind builds and predicts a probability") {
  for (FusionKind fusion : {FusionKind::Concat, FusionKind::Mult, FusionKind::ConcatGru,
                            FusionKind::Mcb, FusionKind::Transformer}) {
    TrainConfig cfg = tiny_train_cfg();
    cfg.model = ModelKind::Vl;
    cfg.vl_fusion = fusion;
    const Model m = build_model(cfg);
    CHECK(m.params.has("vision.w"));
    CHECK(m.params.has("text.word"));
    CHECK(m.params.has("cls.w1"));
    const DataSample s = keyed_sample("v", 5, Label::Supports, 8, true);
    const double p = m.predict({&s})[0];
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }

  // mcb sketches live in the registry and are seed-stable
  TrainConfig cfg = tiny_train_cfg();
  cfg.model = ModelKind::Vl;
  cfg.vl_fusion = FusionKind::Mcb;
  const Model m1 = build_model(cfg);
  const Model m2 = build_model(cfg);
  CHECK(m1.params.has("fuse.a.sketch_h"));
  CHECK(m1.params.has("fuse.b.sketch_sign"));
  CHECK(params_equal(m1.params, m2.params));

  // a vl sample without vision features is refused
  const DataSample dry = keyed_sample("d", 5, Label::Supports, 8, false);
  CHECK_THROWS_AS(m1.predict({&dry}), ShapeMismatch);
}

TEST_CASE("training is reproducible bit for bit") {
  const TrainConfig cfg = tiny_train_cfg();
  const Dataset data = keyed_dataset(6, 4, 2);
  const TrainResult r1 = train(cfg, data);
  const TrainResult r2 = train(cfg, data);
  CHECK(params_equal(r1.model.params, r2.model.params));
  CHECK(r1.best_epoch == r2.best_epoch);
  CHECK(r1.best_valid_acc == r2.best_valid_acc);
  REQUIRE(r1.history.size() == r2.history.size());
  for (size_t i = 0; i < r1.history.size(); ++i) {
    CHECK(r1.history[i].train_loss == r2.history[i].train_loss);
    CHECK(r1.history[i].valid_acc == r2.history[i].valid_acc);
  }
}

TEST_CASE("training learns a separable toy task") {
  TrainConfig cfg = tiny_train_cfg();
  cfg.max_epochs = 30;
  cfg.patience = 8;
  const Dataset data = keyed_dataset(8, 4, 2);
  const TrainResult r = train(cfg, data);
  CHECK(r.best_valid_acc >= 0.75);
  CHECK(r.best_valid_acc >= r.baseline_valid_acc);
  CHECK(r.history.size() <= 30);
  for (size_t i = 0; i < r.history.size(); ++i)
    CHECK(r.history[i].epoch == static_cast<int>(i) + 1);
  // the returned model reproduces the best validation accuracy
  const Metrics valid = evaluate(r.model, data.valid);
  CHECK(valid.accuracy == doctest::Approx(r.best_valid_acc).epsilon(1e-12));
}

TEST_CASE("an unimprovable run stops after the patience window") {
  TrainConfig cfg = tiny_train_cfg();
  cfg.patience = 2;
  cfg.max_epochs = 50;
  // contradictory validation pairs pin accuracy at one half forever
  Dataset data = keyed_dataset(4, 0, 1);
  for (int i = 0; i < 2; ++i) {
    data.valid.push_back(keyed_sample("cs" + std::to_string(i), 5, Label::Supports));
    data.valid.push_back(keyed_sample("cr" + std::to_string(i), 5, Label::Refutes));
  }
  const TrainResult r = train(cfg, data);
  CHECK(r.baseline_valid_acc == 0.5);
  CHECK(r.best_epoch == 0);
  CHECK(r.best_valid_acc == 0.5);
  CHECK(r.history.size() == 3);  // patience 2 tolerates two stale epochs

  // the best checkpoint is the untrained baseline
  const Model fresh = build_model(cfg);
  CHECK(params_equal(r.model.params, fresh.params));
}

TEST_CASE("train refuses empty splits") {
  const TrainConfig cfg = tiny_train_cfg();
  Dataset data = keyed_dataset(2, 2, 0);
  Dataset no_train = data;
  no_train.train.clear();
  CHECK_THROWS_AS(train(cfg, no_train), EmptySplit);
  Dataset no_valid = data;
  no_valid.valid.clear();
  CHECK_THROWS_AS(train(cfg, no_valid), EmptySplit);
}

TEST_CASE("evaluation does not depend on sample order") {
  const TrainConfig cfg = tiny_train_cfg();
  const Model m = build_model(cfg);
  Dataset data = keyed_dataset(0, 3, 0);
  const Metrics fwd = evaluate(m, data.valid);
  std::reverse(data.valid.begin(), data.valid.end());
  const Metrics rev = evaluate(m, data.valid);
  CHECK(fwd.accuracy == rev.accuracy);
  CHECK(fwd.macro_f1 == rev.macro_f1);
  CHECK(fwd.tp == rev.tp);
  CHECK(fwd.tn == rev.tn);

  CHECK_THROWS_AS(evaluate(m, std::vector<DataSample>{}), EmptySplit);
  CHECK_THROWS_AS(predict_labels(m, std::vector<DataSample>{}), EmptySplit);
}

TEST_CASE("annotation files parse with line errors") {
  TempDir dir("annot");
  const std::string path = dir.sub("a.txt");
  write_file_text(path,
                  "c1 retrieve_value, compare\n"
                  "c2\tfilter\n"
                  "\n"
                  "c3 find_extremum,determine_range \r\n");
  const auto annot = read_annotations(path);
  REQUIRE(annot.size() == 3);
  CHECK(annot.at("c1") ==
        std::set<ReasoningType>{ReasoningType::RetrieveValue, ReasoningType::Compare});
  CHECK(annot.at("c2") == std::set<ReasoningType>{ReasoningType::Filter});
  CHECK(annot.at("c3") == std::set<ReasoningType>{ReasoningType::FindExtremum,
                                                  ReasoningType::DetermineRange});

  write_file_text(path, "c1 retrieve_value\nc2 guesswork\n");
  try {
    read_annotations(path);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  write_file_text(path, "c1\n");
  CHECK_THROWS_AS(read_annotations(path), InputError);
}

TEST_CASE("the reasoning report fans samples out per annotated type") {
  Dataset data = keyed_dataset(0, 0, 0);
  data.test.push_back(keyed_sample("s1", 5, Label::Supports));
  data.test.push_back(keyed_sample("s2", 6, Label::Refutes));
  data.test.push_back(keyed_sample("s3", 5, Label::Supports));
  const std::vector<Label> pred = {Label::Supports, Label::Supports, Label::Supports};

  std::map<std::string, std::set<ReasoningType>> annot;
  annot["s1"] = {ReasoningType::RetrieveValue, ReasoningType::Compare};
  annot["s2"] = {ReasoningType::Compare};

  const auto rows = reasoning_report(data.test, pred, annot);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].type == ReasoningType::RetrieveValue);
  CHECK(rows[0].count == 1);
  CHECK(rows[0].correct == 1);
  CHECK(rows[0].accuracy == 1.0);
  CHECK(rows[1].type == ReasoningType::Compare);
  CHECK(rows[1].count == 2);
  CHECK(rows[1].correct == 1);
  CHECK(rows[1].accuracy == 0.5);

  annot["ghost"] = {ReasoningType::Filter};
  CHECK_THROWS_AS(reasoning_report(data.test, pred, annot), UnknownSampleId);
  annot.erase("ghost");
  CHECK_THROWS_AS(reasoning_report(data.test, {Label::Supports}, annot), ShapeMismatch);
  CHECK(reasoning_report(data.test, pred, {}).empty());
}

TEST_CASE("the subset curve sizes its slices per class") {
  TrainConfig cfg = tiny_train_cfg();
  cfg.max_epochs = 1;
  cfg.patience = 0;
  const Dataset data = keyed_dataset(6, 2, 2);

  const auto points = subset_curve(cfg, data, {1, 50, 100});
  REQUIRE(points.size() == 3);
  CHECK(points[0].fraction == 1);
  CHECK(points[0].train_size == 2);  // one per class floor
  CHECK(points[1].train_size == 6);
  CHECK(points[2].train_size == 12);
  for (const CurvePoint& p : points) {
    CHECK(p.test_accuracy >= 0.0);
    CHECK(p.test_accuracy <= 1.0);
  }

  CHECK_THROWS_AS(subset_curve(cfg, data, {}), ConfigError);
  CHECK_THROWS_AS(subset_curve(cfg, data, {0}), ConfigError);
  CHECK_THROWS_AS(subset_curve(cfg, data, {101}), ConfigError);

  Dataset lopsided = data;
  for (DataSample& s : lopsided.train) s.enc.gold = Label::Supports;
  CHECK_THROWS_AS(subset_curve(cfg, lopsided, {50}), SingleClassDataset);
}
