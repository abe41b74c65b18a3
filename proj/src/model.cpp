#include "chartfc/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "json.hpp"

#include "chartfc/errors.hpp"
#include "chartfc/image.hpp"
#include "chartfc/rng.hpp"

namespace chartfc {

using nn::Graph;
using nn::Tensor;
using json = nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are little-endian");

void ModelConfig::validate() const {
  if (layers < 1 || hidden < 1 || heads < 1 || ffn < 1 || max_len < 4)
    throw ConfigError("model dimensions must be positive (max_len >= 4)");
  if (hidden % heads != 0)
    throw ConfigError("hidden size must be divisible by the head count");
  if (vocab_tokens < 5) throw ConfigError("token vocabulary is missing reserved entries");
  if (vocab_segments < 2 || x_buckets < 2 || y_buckets < 2 || labels < 2)
    throw ConfigError("structural vocabularies need at least two entries");
  if (dropout != 0.0)
    throw ConfigError("dropout is accepted in configs but only 0 is supported");
}

std::string ModelConfig::to_json() const {
  json j;
  j["layers"] = layers;
  j["hidden"] = hidden;
  j["heads"] = heads;
  j["ffn"] = ffn;
  j["max_len"] = max_len;
  j["vocab_tokens"] = vocab_tokens;
  j["vocab_segments"] = vocab_segments;
  j["x_buckets"] = x_buckets;
  j["y_buckets"] = y_buckets;
  j["labels"] = labels;
  j["dropout"] = dropout;
  j["init_seed"] = init_seed;
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  ModelConfig cfg;
  try {
    json j = json::parse(text);
    cfg.layers = j.at("layers").get<int>();
    cfg.hidden = j.at("hidden").get<int>();
    cfg.heads = j.at("heads").get<int>();
    cfg.ffn = j.at("ffn").get<int>();
    cfg.max_len = j.at("max_len").get<int>();
    cfg.vocab_tokens = j.at("vocab_tokens").get<int>();
    cfg.vocab_segments = j.at("vocab_segments").get<int>();
    cfg.x_buckets = j.at("x_buckets").get<int>();
    cfg.y_buckets = j.at("y_buckets").get<int>();
    cfg.labels = j.at("labels").get<int>();
    cfg.dropout = j.at("dropout").get<double>();
    cfg.init_seed = j.at("init_seed").get<uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

void Params::add(const std::string& name, Tensor t) {
  if (has(name)) throw ShapeMismatch("duplicate parameter name: " + name);
  named.emplace_back(name, std::move(t));
}

Tensor& Params::get(const std::string& name) {
  for (auto& [n, t] : named)
    if (n == name) return t;
  throw ShapeMismatch("unknown parameter: " + name);
}

const Tensor& Params::get(const std::string& name) const {
  for (const auto& [n, t] : named)
    if (n == name) return t;
  throw ShapeMismatch("unknown parameter: " + name);
}

bool Params::has(const std::string& name) const {
  for (const auto& [n, t] : named)
    if (n == name) return true;
  return false;
}

StagedParams stage_params(Graph& g, const Params& params) {
  StagedParams staged;
  staged.nodes.reserve(params.named.size());
  for (const auto& [name, t] : params.named)
    staged.nodes.emplace_back(name, g.leaf(t, true));
  return staged;
}

int StagedParams::node_of(const std::string& name) const {
  for (const auto& [n, id] : nodes)
    if (n == name) return id;
  throw ShapeMismatch("parameter not staged: " + name);
}

std::vector<Tensor> collect_grads(const Graph& g, const StagedParams& staged) {
  std::vector<Tensor> out;
  out.reserve(staged.nodes.size());
  for (const auto& [name, id] : staged.nodes) out.push_back(g.grad(id));
  return out;
}

// Every stored value passes through float so that a save/load cycle is
// the identity on parameters.
static double f32_grid(double v) { return static_cast<double>(static_cast<float>(v)); }

static void zero_row(Tensor& t, size_t row) {
  for (size_t c = 0; c < t.cols(); ++c) t(row, c) = 0.0;
}

void init_transformer_layer(Params& params, const std::string& prefix, int hidden,
                            int ffn) {
  // Shapes only; randomize_weights fills values later. The registry
  // order here fixes RNG consumption order for every caller.
  const size_t d = static_cast<size_t>(hidden);
  const size_t f = static_cast<size_t>(ffn);
  params.add(prefix + ".attn.wq", Tensor::zeros(d, d));
  params.add(prefix + ".attn.bq", Tensor::zeros(1, d));
  params.add(prefix + ".attn.wk", Tensor::zeros(d, d));
  params.add(prefix + ".attn.bk", Tensor::zeros(1, d));
  params.add(prefix + ".attn.wv", Tensor::zeros(d, d));
  params.add(prefix + ".attn.bv", Tensor::zeros(1, d));
  params.add(prefix + ".attn.wo", Tensor::zeros(d, d));
  params.add(prefix + ".attn.bo", Tensor::zeros(1, d));
  params.add(prefix + ".ln1_g", Tensor::full(1, d, 1.0));
  params.add(prefix + ".ln1_b", Tensor::zeros(1, d));
  params.add(prefix + ".ffn.w1", Tensor::zeros(d, f));
  params.add(prefix + ".ffn.b1", Tensor::zeros(1, f));
  params.add(prefix + ".ffn.w2", Tensor::zeros(f, d));
  params.add(prefix + ".ffn.b2", Tensor::zeros(1, d));
  params.add(prefix + ".ln2_g", Tensor::full(1, d, 1.0));
  params.add(prefix + ".ln2_b", Tensor::zeros(1, d));
}

// Weight matrices get random draws; biases (leaf starting "b"), norm
// parameters ("*_g"/"*_b"), and sketch hashes ("sketch*") do not.
static bool is_weight_name(const std::string& name) {
  auto ends_with = [&](const char* suf) {
    const size_t n = std::strlen(suf);
    return name.size() >= n && name.compare(name.size() - n, n, suf) == 0;
  };
  if (ends_with("_g") || ends_with("_b")) return false;
  const size_t dot = name.rfind('.');
  const std::string leaf = dot == std::string::npos ? name : name.substr(dot + 1);
  if (leaf.rfind("sketch", 0) == 0) return false;
  return !leaf.empty() && leaf[0] != 'b';
}

void randomize_weights(Params& params, uint64_t seed) {
  Rng rng(seed);
  for (auto& [name, t] : params.named) {
    if (!is_weight_name(name)) continue;
    for (double& v : t.data) v = f32_grid(rng.truncated_normal(0.02));
  }
}

Params init_chartbert(const ModelConfig& cfg) {
  cfg.validate();
  Params p;
  const size_t d = static_cast<size_t>(cfg.hidden);
  p.add("emb.token", Tensor::zeros(static_cast<size_t>(cfg.vocab_tokens), d));
  p.add("emb.segment", Tensor::zeros(static_cast<size_t>(cfg.vocab_segments), d));
  p.add("emb.position", Tensor::zeros(static_cast<size_t>(cfg.max_len), d));
  p.add("emb.xbucket", Tensor::zeros(static_cast<size_t>(cfg.x_buckets), d));
  p.add("emb.ybucket", Tensor::zeros(static_cast<size_t>(cfg.y_buckets), d));
  p.add("emb.label", Tensor::zeros(static_cast<size_t>(cfg.labels), d));
  p.add("emb.ln_g", Tensor::full(1, d, 1.0));
  p.add("emb.ln_b", Tensor::zeros(1, d));
  for (int l = 0; l < cfg.layers; ++l)
    init_transformer_layer(p, "enc.l" + std::to_string(l), cfg.hidden, cfg.ffn);
  p.add("head.w", Tensor::zeros(d, 1));
  p.add("head.b", Tensor::zeros(1, 1));
  randomize_weights(p, cfg.init_seed);
  // Id 0 in the structural vocabularies means "not applicable"; its
  // embedding stays exactly zero so claim tokens carry no phantom
  // geometry at initialization.
  zero_row(p.get("emb.xbucket"), 0);
  zero_row(p.get("emb.ybucket"), 0);
  zero_row(p.get("emb.label"), 0);
  return p;
}

int transformer_layer(Graph& g, const StagedParams& staged, const std::string& prefix,
                      int x, int hidden, int heads) {
  const int dh = hidden / heads;
  auto proj = [&](const char* w, const char* b) {
    return g.add_rowvec(g.matmul(x, staged.node_of(prefix + w)),
                        staged.node_of(prefix + b));
  };
  const int q = proj(".attn.wq", ".attn.bq");
  const int k = proj(".attn.wk", ".attn.bk");
  const int v = proj(".attn.wv", ".attn.bv");
  std::vector<int> ctx;
  ctx.reserve(static_cast<size_t>(heads));
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int h = 0; h < heads; ++h) {
    const int lo = h * dh;
    const int qh = g.slice_cols(q, lo, lo + dh);
    const int kh = g.slice_cols(k, lo, lo + dh);
    const int vh = g.slice_cols(v, lo, lo + dh);
    const int scores = g.scale(g.matmul(qh, g.transpose(kh)), inv_sqrt_dh);
    ctx.push_back(g.matmul(g.softmax_rows(scores), vh));
  }
  const int merged = heads == 1 ? ctx[0] : g.concat_cols(ctx);
  const int attn = g.add_rowvec(g.matmul(merged, staged.node_of(prefix + ".attn.wo")),
                                staged.node_of(prefix + ".attn.bo"));
  int out = g.layer_norm(g.add(x, attn), staged.node_of(prefix + ".ln1_g"),
                         staged.node_of(prefix + ".ln1_b"));
  const int inner = g.gelu(g.add_rowvec(
      g.matmul(out, staged.node_of(prefix + ".ffn.w1")), staged.node_of(prefix + ".ffn.b1")));
  const int f = g.add_rowvec(g.matmul(inner, staged.node_of(prefix + ".ffn.w2")),
                             staged.node_of(prefix + ".ffn.b2"));
  return g.layer_norm(g.add(out, f), staged.node_of(prefix + ".ln2_g"),
                      staged.node_of(prefix + ".ln2_b"));
}

static size_t active_length(const EncodedInput& enc) {
  size_t n = 0;
  while (n < enc.attention_mask.size() && enc.attention_mask[n] == 1) ++n;
  for (size_t i = n; i < enc.attention_mask.size(); ++i)
    if (enc.attention_mask[i] != 0)
      throw ShapeMismatch("attention mask is not a prefix of ones");
  return n;
}

static std::vector<int> clamp_ids(const std::vector<int>& ids, size_t n, int limit,
                                  const char* what) {
  std::vector<int> out(ids.begin(), ids.begin() + static_cast<long>(n));
  for (int id : out)
    if (id < 0 || id >= limit)
      throw ShapeMismatch(std::string(what) + " id out of range");
  return out;
}

int forward_chartbert(Graph& g, const StagedParams& staged, const ModelConfig& cfg,
                      const std::vector<const EncodedInput*>& batch) {
  if (batch.empty()) throw ShapeMismatch("empty batch");
  std::vector<int> probs;
  probs.reserve(batch.size());
  for (const EncodedInput* enc : batch) {
    const size_t n = active_length(*enc);
    if (n == 0) throw ShapeMismatch("sample with empty attention mask");
    if (enc->length() > static_cast<size_t>(cfg.max_len))
      throw ShapeMismatch("sample longer than the configured maximum");
    int x = g.rows_lookup(staged.node_of("emb.token"),
                          clamp_ids(enc->token_ids, n, cfg.vocab_tokens, "token"));
    x = g.add(x, g.rows_lookup(staged.node_of("emb.segment"),
                               clamp_ids(enc->segment_ids, n, cfg.vocab_segments, "segment")));
    x = g.add(x, g.rows_lookup(staged.node_of("emb.position"),
                               clamp_ids(enc->position_ids, n, cfg.max_len, "position")));
    x = g.add(x, g.rows_lookup(staged.node_of("emb.xbucket"),
                               clamp_ids(enc->x_bucket_ids, n, cfg.x_buckets, "x bucket")));
    x = g.add(x, g.rows_lookup(staged.node_of("emb.ybucket"),
                               clamp_ids(enc->y_bucket_ids, n, cfg.y_buckets, "y bucket")));
    x = g.add(x, g.rows_lookup(staged.node_of("emb.label"),
                               clamp_ids(enc->label_ids, n, cfg.labels, "label")));
    x = g.layer_norm(x, staged.node_of("emb.ln_g"), staged.node_of("emb.ln_b"));
    for (int l = 0; l < cfg.layers; ++l)
      x = transformer_layer(g, staged, "enc.l" + std::to_string(l), x, cfg.hidden,
                            cfg.heads);
    const int cls = g.slice_rows(x, 0, 1);
    const int logit =
        g.add_rowvec(g.matmul(cls, staged.node_of("head.w")), staged.node_of("head.b"));
    probs.push_back(g.sigmoid(logit));
  }
  return probs.size() == 1 ? probs[0] : g.concat_rows(probs);
}

std::vector<double> predict_chartbert(const Params& params, const ModelConfig& cfg,
                                      const std::vector<const EncodedInput*>& batch) {
  std::vector<double> out;
  out.reserve(batch.size());
  // One graph per sample keeps peak memory at a single trace.
  for (const EncodedInput* enc : batch) {
    Graph g;
    const StagedParams staged = stage_params(g, params);
    const int p = forward_chartbert(g, staged, cfg, {enc});
    out.push_back(g.value(p)(0, 0));
  }
  return out;
}

Params init_lstm(int vocab, int emb_dim, int hidden, uint64_t seed) {
  if (vocab < 1 || emb_dim < 1 || hidden < 1)
    throw ConfigError("lstm dimensions must be positive");
  Params p;
  const size_t e = static_cast<size_t>(emb_dim);
  const size_t h = static_cast<size_t>(hidden);
  p.add("lstm.emb", Tensor::zeros(static_cast<size_t>(vocab), e));
  p.add("lstm.l0.wih", Tensor::zeros(e, 4 * h));
  p.add("lstm.l0.whh", Tensor::zeros(h, 4 * h));
  p.add("lstm.l0.b", Tensor::zeros(1, 4 * h));
  p.add("lstm.l1.wih", Tensor::zeros(h, 4 * h));
  p.add("lstm.l1.whh", Tensor::zeros(h, 4 * h));
  p.add("lstm.l1.b", Tensor::zeros(1, 4 * h));
  randomize_weights(p, seed);
  return p;
}

// Gates are packed [i | f | g | o] along the columns.
static int lstm_layer(Graph& g, int inputs, int wih, int whh, int b, int hidden) {
  const int T = static_cast<int>(g.value(inputs).rows());
  int h = g.leaf(Tensor::zeros(1, static_cast<size_t>(hidden)), false);
  int c = g.leaf(Tensor::zeros(1, static_cast<size_t>(hidden)), false);
  std::vector<int> states;
  states.reserve(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) {
    const int xt = g.slice_rows(inputs, t, t + 1);
    const int gates =
        g.add_rowvec(g.add(g.matmul(xt, wih), g.matmul(h, whh)), b);
    const int gi = g.sigmoid(g.slice_cols(gates, 0, hidden));
    const int gf = g.sigmoid(g.slice_cols(gates, hidden, 2 * hidden));
    const int gg = g.tanh_op(g.slice_cols(gates, 2 * hidden, 3 * hidden));
    const int go = g.sigmoid(g.slice_cols(gates, 3 * hidden, 4 * hidden));
    c = g.add(g.mul(gf, c), g.mul(gi, gg));
    h = g.mul(go, g.tanh_op(c));
    states.push_back(h);
  }
  return states.size() == 1 ? states[0] : g.concat_rows(states);
}

int lstm_encode(Graph& g, const StagedParams& staged, const std::vector<int>& token_ids,
                int emb_dim, int hidden) {
  if (token_ids.empty()) throw ShapeMismatch("lstm_encode needs at least one token");
  (void)emb_dim;
  const int embedded = g.rows_lookup(staged.node_of("lstm.emb"), token_ids);
  const int l0 =
      lstm_layer(g, embedded, staged.node_of("lstm.l0.wih"), staged.node_of("lstm.l0.whh"),
                 staged.node_of("lstm.l0.b"), hidden);
  return lstm_layer(g, l0, staged.node_of("lstm.l1.wih"), staged.node_of("lstm.l1.whh"),
                    staged.node_of("lstm.l1.b"), hidden);
}

void init_gru(Params& params, const std::string& prefix, int in_dim, int hidden) {
  const size_t in = static_cast<size_t>(in_dim);
  const size_t h = static_cast<size_t>(hidden);
  params.add(prefix + ".wxz", Tensor::zeros(in, h));
  params.add(prefix + ".whz", Tensor::zeros(h, h));
  params.add(prefix + ".bz", Tensor::zeros(1, h));
  params.add(prefix + ".wxr", Tensor::zeros(in, h));
  params.add(prefix + ".whr", Tensor::zeros(h, h));
  params.add(prefix + ".br", Tensor::zeros(1, h));
  params.add(prefix + ".wxn", Tensor::zeros(in, h));
  params.add(prefix + ".whn", Tensor::zeros(h, h));
  params.add(prefix + ".bn", Tensor::zeros(1, h));
}

int gru_cell(Graph& g, const StagedParams& staged, const std::string& prefix, int x,
             int h) {
  auto gate = [&](const char* wx, const char* wh, const char* b) {
    return g.add_rowvec(g.add(g.matmul(x, staged.node_of(prefix + wx)),
                              g.matmul(h, staged.node_of(prefix + wh))),
                        staged.node_of(prefix + b));
  };
  const int z = g.sigmoid(gate(".wxz", ".whz", ".bz"));
  const int r = g.sigmoid(gate(".wxr", ".whr", ".br"));
  const int cand = g.tanh_op(g.add_rowvec(
      g.add(g.matmul(x, staged.node_of(prefix + ".wxn")),
            g.mul(r, g.matmul(h, staged.node_of(prefix + ".whn")))),
      staged.node_of(prefix + ".bn")));
  const int one = g.leaf(Tensor::full(1, g.value(z).cols(), 1.0), false);
  return g.add(g.mul(z, cand), g.mul(g.sub(one, z), h));
}

void adam_step(Params& params, const std::vector<Tensor>& grads, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
  if (grads.size() != params.named.size())
    throw ShapeMismatch("gradient list does not match the parameter registry");
  if (state.m.empty()) {
    for (const auto& [name, t] : params.named) {
      state.m.push_back(Tensor::zeros(t.rows(), t.cols()));
      state.v.push_back(Tensor::zeros(t.rows(), t.cols()));
    }
  }
  if (state.m.size() != params.named.size())
    throw ShapeMismatch("optimizer state does not match the parameter registry");
  ++state.t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.named.size(); ++i) {
    Tensor& p = params.named[i].second;
    const Tensor& gr = grads[i];
    if (!p.same_shape(gr))
      throw ShapeMismatch("gradient shape mismatch for " + params.named[i].first);
    for (size_t k = 0; k < p.data.size(); ++k) {
      const double gv = gr.data[k];
      state.m[i].data[k] = beta1 * state.m[i].data[k] + (1.0 - beta1) * gv;
      state.v[i].data[k] = beta2 * state.v[i].data[k] + (1.0 - beta2) * gv * gv;
      const double mhat = state.m[i].data[k] / bc1;
      const double vhat = state.v[i].data[k] / bc2;
      p.data[k] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

static void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

static void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void save_checkpoint(const Params& params, const std::string& config_json,
                     const std::string& path) {
  json header;
  header["version"] = 1;
  header["config"] = config_json.empty() ? json() : json::parse(config_json);
  json tensors = json::array();
  for (const auto& [name, t] : params.named) {
    json entry;
    entry["name"] = name;
    entry["dtype"] = "f32";
    entry["shape"] = {t.rows(), t.cols()};
    tensors.push_back(entry);
  }
  header["tensors"] = tensors;
  const std::string htext = header.dump();

  std::vector<uint8_t> bytes;
  bytes.push_back('C');
  bytes.push_back('F');
  bytes.push_back('C');
  bytes.push_back('K');
  put_u32(bytes, 1);
  put_u64(bytes, htext.size());
  bytes.insert(bytes.end(), htext.begin(), htext.end());
  for (const auto& [name, t] : params.named) {
    for (double v : t.data) {
      const float f = static_cast<float>(v);
      uint32_t raw;
      std::memcpy(&raw, &f, 4);
      put_u32(bytes, raw);
    }
  }
  write_file_bytes(path, bytes);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file_bytes(path);
  if (bytes.size() < 16 || bytes[0] != 'C' || bytes[1] != 'F' || bytes[2] != 'C' ||
      bytes[3] != 'K')
    throw BadMagic("not a checkpoint file: " + path);
  uint32_t version = 0;
  for (int i = 0; i < 4; ++i) version |= static_cast<uint32_t>(bytes[4 + i]) << (8 * i);
  if (version != 1)
    throw BadMagic("unsupported checkpoint version " + std::to_string(version));
  uint64_t hlen = 0;
  for (int i = 0; i < 8; ++i) hlen |= static_cast<uint64_t>(bytes[8 + i]) << (8 * i);
  if (16 + hlen > bytes.size()) throw IoFailure("checkpoint header is truncated");
  json header;
  try {
    header = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<long>(hlen));
  } catch (const json::exception& e) {
    throw BadMagic(std::string("malformed checkpoint header: ") + e.what());
  }

  LoadedCheckpoint out;
  size_t offset = 16 + static_cast<size_t>(hlen);
  try {
    if (!header.at("config").is_null()) out.config_json = header.at("config").dump();
    for (const auto& entry : header.at("tensors")) {
      const std::string name = entry.at("name").get<std::string>();
      const std::string dtype = entry.at("dtype").get<std::string>();
      if (dtype != "f32")
        throw ShapeMismatch("unsupported tensor dtype \"" + dtype + "\" for " + name);
      const auto shape = entry.at("shape").get<std::vector<int64_t>>();
      if (shape.size() != 2 || shape[0] < 1 || shape[1] < 1)
        throw ShapeMismatch("bad tensor shape for " + name);
      const size_t rows = static_cast<size_t>(shape[0]);
      const size_t cols = static_cast<size_t>(shape[1]);
      const size_t count = rows * cols;
      if (offset + 4 * count > bytes.size())
        throw IoFailure("checkpoint payload is truncated at " + name);
      Tensor t = Tensor::zeros(rows, cols);
      for (size_t k = 0; k < count; ++k) {
        uint32_t raw = 0;
        for (int i = 0; i < 4; ++i)
          raw |= static_cast<uint32_t>(bytes[offset + 4 * k + i]) << (8 * i);
        float f;
        std::memcpy(&f, &raw, 4);
        t.data[k] = static_cast<double>(f);
      }
      offset += 4 * count;
      out.params.add(name, std::move(t));
    }
  } catch (const json::exception& e) {
    throw BadMagic(std::string("malformed checkpoint header: ") + e.what());
  }
  if (offset != bytes.size())
    throw IoFailure("checkpoint has trailing bytes after the last tensor");
  return out;
}

void ensure_compatible(const Params& loaded, const Params& expected) {
  if (loaded.named.size() != expected.named.size())
    throw ShapeMismatch("checkpoint has " + std::to_string(loaded.named.size()) +
                        " tensors, expected " + std::to_string(expected.named.size()));
  for (size_t i = 0; i < expected.named.size(); ++i) {
    const auto& [ln, lt] = loaded.named[i];
    const auto& [en, et] = expected.named[i];
    if (ln != en)
      throw ShapeMismatch("checkpoint tensor \"" + ln + "\" where \"" + en +
                          "\" was expected");
    if (!lt.same_shape(et))
      throw ShapeMismatch("checkpoint shape mismatch for " + ln);
  }
}

GradCheckReport grad_check(const std::function<double(const Params&)>& loss_fn,
                           Params& params, const std::vector<Tensor>& analytic,
                           double step, int samples_per_tensor, Rng& rng) {
  if (analytic.size() != params.named.size())
    throw ShapeMismatch("analytic gradient list does not match the registry");
  GradCheckReport report;
  for (size_t i = 0; i < params.named.size(); ++i) {
    Tensor& t = params.named[i].second;
    const size_t n = t.data.size();
    const size_t samples = std::min<size_t>(n, static_cast<size_t>(samples_per_tensor));
    for (size_t s = 0; s < samples; ++s) {
      const size_t k = n <= samples ? s : static_cast<size_t>(rng.below(n));
      const double saved = t.data[k];
      t.data[k] = saved + step;
      const double up = loss_fn(params);
      t.data[k] = saved - step;
      const double down = loss_fn(params);
      t.data[k] = saved;
      const double fd = (up - down) / (2.0 * step);
      const double an = analytic[i].data[k];
      const double denom = std::max({1.0, std::fabs(fd), std::fabs(an)});
      report.max_rel_err = std::max(report.max_rel_err, std::fabs(fd - an) / denom);
      ++report.entries_checked;
    }
  }
  return report;
}

}  // namespace chartfc
