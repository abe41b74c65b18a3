#include "doctest.h"

#include <cmath>

#include "helpers/fixtures.hpp"

#include "chartfc/errors.hpp"
#include "chartfc/image.hpp"
#include "chartfc/model.hpp"

using namespace chartfc;
using nn::Graph;
using nn::Tensor;
using testutil::TempDir;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.layers = 1;
  cfg.hidden = 8;
  cfg.heads = 2;
  cfg.ffn = 12;
  cfg.max_len = 10;
  cfg.vocab_tokens = 12;
  cfg.init_seed = 5;
  return cfg;
}

EncodedInput tiny_input(int filled, int max_len, Label gold = Label::Supports) {
  EncodedInput enc;
  enc.gold = gold;
  for (int i = 0; i < max_len; ++i) {
    const bool active = i < filled;
    enc.token_ids.push_back(active ? (i % 7) + 2 : 0);
    enc.segment_ids.push_back(active && i >= filled / 2 ? 1 : 0);
    enc.position_ids.push_back(i);
    enc.x_bucket_ids.push_back(active && i >= filled / 2 ? (i % kCoordBuckets) + 1 : 0);
    enc.y_bucket_ids.push_back(active && i >= filled / 2 ? (i % 5) + 1 : 0);
    enc.label_ids.push_back(active && i == filled / 2 ? 1 : 0);
    enc.attention_mask.push_back(active ? 1 : 0);
  }
  return enc;
}

double run_loss(const Params& params, const ModelConfig& cfg,
                const std::vector<const EncodedInput*>& batch,
                const std::vector<double>& targets) {
  Graph g;
  const StagedParams staged = stage_params(g, params);
  const int probs = forward_chartbert(g, staged, cfg, batch);
  const int loss = g.bce_mean(probs, targets);
  return g.value(loss)(0, 0);
}

}  // namespace

TEST_CASE("model config validation and json round trip") {
  ModelConfig cfg = tiny_config();
  CHECK_NOTHROW(cfg.validate());
  CHECK(ModelConfig::from_json(cfg.to_json()) == cfg);

  ModelConfig bad = cfg;
  bad.hidden = 7;  // not divisible by heads
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.dropout = 0.5;  // declared but not implemented, must be refused
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.vocab_tokens = 3;  // cannot hold the reserved ids
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("weight initialization is deterministic and leaves norms alone") {
  const ModelConfig cfg = tiny_config();
  const Params a = init_chartbert(cfg);
  const Params b = init_chartbert(cfg);
  REQUIRE(a.named.size() == b.named.size());
  for (size_t i = 0; i < a.named.size(); ++i) {
    CHECK(a.named[i].first == b.named[i].first);
    CHECK(a.named[i].second == b.named[i].second);
  }

  ModelConfig other = cfg;
  other.init_seed = 6;
  const Params c = init_chartbert(other);
  bool any_differs = false;
  for (size_t i = 0; i < a.named.size(); ++i)
    if (!(a.named[i].second == c.named[i].second)) any_differs = true;
  CHECK(any_differs);

  for (double v : a.get("enc.l0.ln1_g").data) CHECK(v == 1.0);
  for (double v : a.get("enc.l0.ln1_b").data) CHECK(v == 0.0);
  for (double v : a.get("head.b").data) CHECK(v == 0.0);
  bool head_nonzero = false;
  for (double v : a.get("head.w").data)
    if (v != 0.0) head_nonzero = true;
  CHECK(head_nonzero);

  // structural rows for id 0 are neutral
  const Tensor& xb = a.get("emb.xbucket");
  for (int c2 = 0; c2 < xb.cols(); ++c2) CHECK(xb(0, c2) == 0.0);
}

TEST_CASE("every initial weight survives the f32 grid exactly") {
  const Params p = init_chartbert(tiny_config());
  for (const auto& [name, tensor] : p.named)
    for (double v : tensor.data)
      CHECK(static_cast<double>(static_cast<float>(v)) == v);
}

TEST_CASE("chartbert end to end gradients match finite differences") {
  const ModelConfig cfg = tiny_config();
  Params params = init_chartbert(cfg);
  const EncodedInput in1 = tiny_input(8, cfg.max_len, Label::Supports);
  const EncodedInput in2 = tiny_input(6, cfg.max_len, Label::Refutes);
  const std::vector<const EncodedInput*> batch = {&in1, &in2};
  const std::vector<double> targets = {1.0, 0.0};

  Graph g;
  const StagedParams staged = stage_params(g, params);
  const int loss = g.bce_mean(forward_chartbert(g, staged, cfg, batch), targets);
  g.backward(loss);
  const std::vector<Tensor> analytic = collect_grads(g, staged);

  Rng rng(77);
  const GradCheckReport report = grad_check(
      [&](const Params& p) { return run_loss(p, cfg, batch, targets); }, params,
      analytic, 1e-5, 4, rng);
  CHECK(report.entries_checked >= params.named.size() * 2);
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("a transformer layer alone passes the gradient check") {
  Params params;
  init_transformer_layer(params, "l", 6, 10);
  randomize_weights(params, 3);
  Rng data_rng(8);
  Tensor x(4, 6);
  for (double& v : x.data) v = data_rng.normal();

  const auto loss_of = [&](const Params& p) {
    Graph g;
    const StagedParams staged = stage_params(g, p);
    const int out = transformer_layer(g, staged, "l", g.leaf(x), 6, 2);
    return g.value(g.mean_all(out))(0, 0);
  };

  Graph g;
  const StagedParams staged = stage_params(g, params);
  const int out = transformer_layer(g, staged, "l", g.leaf(x), 6, 2);
  g.backward(g.mean_all(out));
  const std::vector<Tensor> analytic = collect_grads(g, staged);

  Rng rng(9);
  const GradCheckReport report = grad_check(loss_of, params, analytic, 1e-5, 6, rng);
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("the lstm encoder passes the gradient check") {
  Params params = init_lstm(10, 5, 6, 21);
  const std::vector<int> tokens = {2, 5, 9, 1};

  const auto loss_of = [&](const Params& p) {
    Graph g;
    const StagedParams staged = stage_params(g, p);
    const int states = lstm_encode(g, staged, tokens, 5, 6);
    return g.value(g.mean_all(states))(0, 0);
  };

  Graph g;
  const StagedParams staged = stage_params(g, params);
  g.backward(g.mean_all(lstm_encode(g, staged, tokens, 5, 6)));
  const std::vector<Tensor> analytic = collect_grads(g, staged);

  Rng rng(22);
  const GradCheckReport report = grad_check(loss_of, params, analytic, 1e-5, 6, rng);
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("a gru cell passes the gradient check and saturates correctly") {
  Params params;
  init_gru(params, "g", 4, 5);
  randomize_weights(params, 31);
  Rng data_rng(32);
  Tensor x(1, 4), h(1, 5);
  for (double& v : x.data) v = data_rng.normal();
  for (double& v : h.data) v = data_rng.normal();

  const auto loss_of = [&](const Params& p) {
    Graph g;
    const StagedParams staged = stage_params(g, p);
    const int out = gru_cell(g, staged, "g", g.leaf(x), g.leaf(h));
    return g.value(g.mean_all(out))(0, 0);
  };

  Graph g;
  const StagedParams staged = stage_params(g, params);
  g.backward(g.mean_all(gru_cell(g, staged, "g", g.leaf(x), g.leaf(h))));
  const std::vector<Tensor> analytic = collect_grads(g, staged);

  Rng rng(33);
  const GradCheckReport report = grad_check(loss_of, params, analytic, 1e-5, 6, rng);
  CHECK(report.max_rel_err < 1e-4);

  // With zero weights the update gate bias decides everything: a large
  // negative bias keeps the old state, a large positive one replaces it
  // with the zero candidate tanh(0).
  Params sat;
  init_gru(sat, "g", 4, 5);
  for (double& v : sat.get("g.bz").data) v = -50.0;
  Graph g2;
  const int keep = gru_cell(g2, stage_params(g2, sat), "g", g2.leaf(x), g2.leaf(h));
  for (int c = 0; c < 5; ++c)
    CHECK(g2.value(keep)(0, c) == doctest::Approx(h(0, c)).epsilon(1e-9));

  for (double& v : sat.get("g.bz").data) v = 50.0;
  Graph g3;
  const int wipe = gru_cell(g3, stage_params(g3, sat), "g", g3.leaf(x), g3.leaf(h));
  for (int c = 0; c < 5; ++c)
    CHECK(g3.value(wipe)(0, c) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("padding cannot influence the prediction") {
  ModelConfig short_cfg = tiny_config();
  short_cfg.max_len = 10;
  ModelConfig long_cfg = short_cfg;
  long_cfg.max_len = 16;

  const Params params = init_chartbert(long_cfg);  // same weights work for both
  const EncodedInput a = tiny_input(7, 10);
  const EncodedInput b = tiny_input(7, 16);

  const std::vector<double> pa = predict_chartbert(params, short_cfg, {&a});
  const std::vector<double> pb = predict_chartbert(params, long_cfg, {&b});
  REQUIRE(pa.size() == 1);
  REQUIRE(pb.size() == 1);
  CHECK(pa[0] == doctest::Approx(pb[0]).epsilon(1e-12));
}

TEST_CASE("a non prefix attention mask is refused") {
  const ModelConfig cfg = tiny_config();
  const Params params = init_chartbert(cfg);
  EncodedInput enc = tiny_input(6, cfg.max_len);
  enc.attention_mask[2] = 0;  // hole in the prefix
  CHECK_THROWS_AS(predict_chartbert(params, cfg, {&enc}), ShapeMismatch);
}

TEST_CASE("all zero parameters predict one half") {
  const ModelConfig cfg = tiny_config();
  Params params = init_chartbert(cfg);
  for (auto& [name, tensor] : params.named)
    std::fill(tensor.data.begin(), tensor.data.end(), 0.0);
  const EncodedInput enc = tiny_input(5, cfg.max_len);
  const std::vector<double> p = predict_chartbert(params, cfg, {&enc});
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("adam takes a bias corrected first step") {
  Params params;
  Tensor w(1, 2);
  w.data = {1.0, -2.0};
  params.add("w", w);
  Tensor grad(1, 2);
  grad.data = {0.5, -0.25};
  AdamState state;
  adam_step(params, {grad}, state, 0.1);
  // first step moves by lr * g / (|g| + eps), i.e. lr * sign(g)
  CHECK(params.get("w")(0, 0) == doctest::Approx(1.0 - 0.1).epsilon(1e-6));
  CHECK(params.get("w")(0, 1) == doctest::Approx(-2.0 + 0.1).epsilon(1e-6));
  CHECK(state.t == 1);
}

TEST_CASE("checkpoints round trip bit for bit") {
  TempDir dir("ckpt");
  const ModelConfig cfg = tiny_config();
  const Params params = init_chartbert(cfg);
  const std::string path = dir.sub("model.cfck");
  save_checkpoint(params, cfg.to_json(), path);

  const LoadedCheckpoint loaded = load_checkpoint(path);
  CHECK(ModelConfig::from_json(loaded.config_json) == cfg);
  REQUIRE(loaded.params.named.size() == params.named.size());
  for (size_t i = 0; i < params.named.size(); ++i) {
    CHECK(loaded.params.named[i].first == params.named[i].first);
    CHECK(loaded.params.named[i].second == params.named[i].second);
  }

  const std::string copy = dir.sub("copy.cfck");
  save_checkpoint(loaded.params, loaded.config_json, copy);
  CHECK(read_file_bytes(copy) == read_file_bytes(path));
}

TEST_CASE("corrupt checkpoints fail loudly") {
  TempDir dir("ckpt_bad");
  const Params params = init_chartbert(tiny_config());
  const std::string path = dir.sub("model.cfck");
  save_checkpoint(params, "", path);

  std::vector<uint8_t> bytes = read_file_bytes(path);

  auto rewrite = [&](std::vector<uint8_t> b, const std::string& to) {
    write_file_bytes(to, b);
    return to;
  };

  std::vector<uint8_t> magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(load_checkpoint(rewrite(magic, dir.sub("magic.cfck"))), BadMagic);

  std::vector<uint8_t> version = bytes;
  version[4] = 9;
  CHECK_THROWS_AS(load_checkpoint(rewrite(version, dir.sub("version.cfck"))), BadMagic);

  std::vector<uint8_t> truncated(bytes.begin(), bytes.end() - 7);
  CHECK_THROWS_AS(load_checkpoint(rewrite(truncated, dir.sub("trunc.cfck"))), IoFailure);

  std::vector<uint8_t> padded = bytes;
  padded.push_back(0);
  CHECK_THROWS_AS(load_checkpoint(rewrite(padded, dir.sub("pad.cfck"))), IoFailure);
}

TEST_CASE("ensure_compatible flags renames and reshapes") {
  const ModelConfig cfg = tiny_config();
  const Params expected = init_chartbert(cfg);

  Params renamed = expected;
  renamed.named[0].first = "something.else";
  CHECK_THROWS_AS(ensure_compatible(renamed, expected), ShapeMismatch);

  Params reshaped = expected;
  reshaped.named[1].second = Tensor(1, 1);
  CHECK_THROWS_AS(ensure_compatible(reshaped, expected), ShapeMismatch);

  Params shorter = expected;
  shorter.named.pop_back();
  CHECK_THROWS_AS(ensure_compatible(shorter, expected), ShapeMismatch);

  CHECK_NOTHROW(ensure_compatible(expected, expected));
}
