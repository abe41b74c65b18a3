#include "chartfc/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "chartfc/errors.hpp"
#include "chartfc/fusion.hpp"
#include "chartfc/image.hpp"
#include "chartfc/rng.hpp"

namespace chartfc {

using nn::Graph;
using nn::Tensor;
using json = nlohmann::json;

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::ChartBert: return "chartbert";
    case ModelKind::Vl: return "vl";
    case ModelKind::ClaimOnly: return "claim-only";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "chartbert") return ModelKind::ChartBert;
  if (name == "vl") return ModelKind::Vl;
  if (name == "claim-only") return ModelKind::ClaimOnly;
  throw ConfigError("unknown model kind: " + name);
}

const char* to_string(FusionKind k) {
  switch (k) {
    case FusionKind::Concat: return "concat";
    case FusionKind::Mult: return "mult";
    case FusionKind::ConcatGru: return "concat-gru";
    case FusionKind::Mcb: return "mcb";
    case FusionKind::Transformer: return "transformer";
  }
  return "?";
}

FusionKind fusion_kind_from_string(const std::string& name) {
  if (name == "concat") return FusionKind::Concat;
  if (name == "mult") return FusionKind::Mult;
  if (name == "concat-gru") return FusionKind::ConcatGru;
  if (name == "mcb") return FusionKind::Mcb;
  if (name == "transformer") return FusionKind::Transformer;
  throw ConfigError("unknown fusion kind: " + name);
}

const char* to_string(SeqgenMode m) {
  switch (m) {
    case SeqgenMode::Concat: return "concat";
    case SeqgenMode::Tmp1: return "tmp1";
    case SeqgenMode::Tmp2: return "tmp2";
    case SeqgenMode::Tmp3: return "tmp3";
    case SeqgenMode::None: return "none";
  }
  return "?";
}

SeqgenMode seqgen_mode_from_string(const std::string& name) {
  if (name == "concat") return SeqgenMode::Concat;
  if (name == "tmp1") return SeqgenMode::Tmp1;
  if (name == "tmp2") return SeqgenMode::Tmp2;
  if (name == "tmp3") return SeqgenMode::Tmp3;
  if (name == "none") return SeqgenMode::None;
  throw ConfigError("unknown seqgen mode: " + name);
}

void TrainConfig::validate() const {
  model_cfg.validate();
  if (free_grid) {
    if (batch_size < 1 || lr <= 0 || max_epochs < 1 || patience < 0)
      throw ConfigError("hyperparameters must be positive");
    return;
  }
  if (batch_size != 8 && batch_size != 16 && batch_size != 32)
    throw ConfigError("batch size must be one of 8, 16, 32");
  static const double kLrGrid[] = {1e-3, 7e-4, 5e-5, 5e-6, 5e-7};
  bool lr_ok = false;
  for (double v : kLrGrid)
    if (std::fabs(lr - v) <= v * 1e-9) lr_ok = true;
  if (!lr_ok) throw ConfigError("learning rate outside the declared grid");
  if (max_epochs < 1 || max_epochs > 50)
    throw ConfigError("max epochs must lie in 1..50");
  if (patience < 0) throw ConfigError("patience must be non-negative");
}

std::string TrainConfig::to_json() const {
  json j;
  j["batch_size"] = batch_size;
  j["lr"] = lr;
  j["max_epochs"] = max_epochs;
  j["patience"] = patience;
  j["seed"] = seed;
  j["model"] = to_string(model);
  j["vl_fusion"] = to_string(vl_fusion);
  j["seqgen"] = to_string(seqgen);
  j["free_grid"] = free_grid;
  j["model_cfg"] = json::parse(model_cfg.to_json());
  return j.dump();
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  TrainConfig cfg;
  try {
    json j = json::parse(text);
    cfg.batch_size = j.at("batch_size").get<int>();
    cfg.lr = j.at("lr").get<double>();
    cfg.max_epochs = j.at("max_epochs").get<int>();
    cfg.patience = j.at("patience").get<int>();
    cfg.seed = j.at("seed").get<uint64_t>();
    cfg.model = model_kind_from_string(j.at("model").get<std::string>());
    cfg.vl_fusion = fusion_kind_from_string(j.at("vl_fusion").get<std::string>());
    cfg.seqgen = seqgen_mode_from_string(j.at("seqgen").get<std::string>());
    cfg.free_grid = j.at("free_grid").get<bool>();
    cfg.model_cfg = ModelConfig::from_json(j.at("model_cfg").dump());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed train config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

Model build_model(const TrainConfig& cfg) {
  cfg.validate();
  Model m;
  m.kind = cfg.model;
  m.fusion = cfg.vl_fusion;
  m.cfg = cfg.model_cfg;
  m.cfg.init_seed = mix_seed(cfg.seed, 1);
  if (m.kind != ModelKind::Vl) {
    m.params = init_chartbert(m.cfg);
    return m;
  }
  const int d = m.cfg.hidden;
  init_embedder(m.params, "text", m.cfg.vocab_tokens, m.cfg.max_len, d);
  init_fc_vision(m.params, "vision", d);
  int joint = 0;
  switch (m.fusion) {
    case FusionKind::Concat:
      joint = 2 * d;
      break;
    case FusionKind::Mult:
      init_fuse_mult(m.params, "fuse", d, d, d);
      joint = d;
      break;
    case FusionKind::ConcatGru:
      init_fuse_concat_gru(m.params, "fuse", kConcatGruChannels, d);
      joint = 2 * d;
      break;
    case FusionKind::Mcb:
      joint = kMcbSketchDim;
      break;
    case FusionKind::Transformer:
      init_fuse_transformer(m.params, "fuse", d, m.cfg.heads, m.cfg.ffn,
                            kFuseTransformerLayers);
      joint = d;
      break;
  }
  init_classify_joint(m.params, "cls", joint, d);
  randomize_weights(m.params, m.cfg.init_seed);
  if (m.fusion == FusionKind::Mcb) {
    // Sketches are drawn after the weight pass and never randomized, so
    // the weight stream stays identical across fusion kinds.
    SketchSpec::make(d, kMcbSketchDim, mix_seed(cfg.seed, 2)).add_to(m.params, "fuse.a");
    SketchSpec::make(d, kMcbSketchDim, mix_seed(cfg.seed, 3)).add_to(m.params, "fuse.b");
  }
  return m;
}

// Claim span for the vl text encoder: segment-0 tokens, boundary
// markers included, so the sequence is never empty.
static std::vector<int> claim_span(const EncodedInput& enc) {
  std::vector<int> ids;
  for (size_t i = 0; i < enc.token_ids.size(); ++i) {
    if (enc.attention_mask[i] != 1 || enc.segment_ids[i] != 0) break;
    ids.push_back(enc.token_ids[i]);
  }
  if (ids.empty()) throw ShapeMismatch("sample has no claim span");
  return ids;
}

static int mean_rows(Graph& g, int x) {
  const size_t t = g.value(x).rows();
  return g.matmul(g.leaf(Tensor::full(1, t, 1.0 / static_cast<double>(t)), false), x);
}

static int forward_vl_sample(Graph& g, const StagedParams& staged, const Model& m,
                             const DataSample& s) {
  if (s.vision.empty()) throw ShapeMismatch("sample lacks vision features: " + s.id);
  Tensor pixels = Tensor::zeros(1, s.vision.size());
  pixels.data = s.vision;
  const int h_img = g.add_rowvec(
      g.matmul(g.leaf(std::move(pixels), false), staged.node_of("vision.w")),
      staged.node_of("vision.b"));
  const int text_tokens = embedder_text_encode(g, staged, "text", claim_span(s.enc));
  int joint = 0;
  switch (m.fusion) {
    case FusionKind::Concat:
      joint = fuse_concat(g, mean_rows(g, text_tokens), h_img);
      break;
    case FusionKind::Mult:
      joint = fuse_mult(g, staged, "fuse", mean_rows(g, text_tokens), h_img);
      break;
    case FusionKind::ConcatGru:
      joint = fuse_concat_gru(g, staged, "fuse", mean_rows(g, text_tokens), h_img);
      break;
    case FusionKind::Mcb: {
      const SketchSpec sa = SketchSpec::from_params(m.params, "fuse.a");
      const SketchSpec sb = SketchSpec::from_params(m.params, "fuse.b");
      joint = mcb_fuse_node(g, mean_rows(g, text_tokens), h_img, sa, sb);
      break;
    }
    case FusionKind::Transformer:
      joint = fuse_transformer(g, staged, "fuse", text_tokens, h_img, m.cfg.heads,
                               kFuseTransformerLayers);
      break;
  }
  return classify_joint(g, staged, "cls", joint);
}

int Model::forward(Graph& g, const StagedParams& staged,
                   const std::vector<const DataSample*>& batch) const {
  if (batch.empty()) throw ShapeMismatch("empty batch");
  if (kind != ModelKind::Vl) {
    std::vector<const EncodedInput*> encs;
    encs.reserve(batch.size());
    for (const DataSample* s : batch) encs.push_back(&s->enc);
    return forward_chartbert(g, staged, cfg, encs);
  }
  std::vector<int> probs;
  probs.reserve(batch.size());
  for (const DataSample* s : batch) probs.push_back(forward_vl_sample(g, staged, *this, *s));
  return probs.size() == 1 ? probs[0] : g.concat_rows(probs);
}

std::vector<double> Model::predict(const std::vector<const DataSample*>& batch) const {
  std::vector<double> out;
  out.reserve(batch.size());
  for (const DataSample* s : batch) {
    Graph g;
    const StagedParams staged = stage_params(g, params);
    out.push_back(g.value(forward(g, staged, {s}))(0, 0));
  }
  return out;
}

std::vector<std::vector<size_t>> stratified_batches(const std::vector<Label>& golds,
                                                    int batch_size, uint64_t seed) {
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  std::vector<size_t> pos, neg;
  for (size_t i = 0; i < golds.size(); ++i)
    (golds[i] == Label::Supports ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty())
    throw SingleClassDataset("stratified batching needs both labels present");
  Rng rng_pos(mix_seed(seed, 11));
  Rng rng_neg(mix_seed(seed, 13));
  rng_pos.shuffle(pos);
  rng_neg.shuffle(neg);
  // Bresenham interleave keeps any window's class mix within one of the
  // global ratio, so each chunk of batch_size is automatically balanced.
  const size_t n = golds.size();
  const size_t np = pos.size();
  std::vector<size_t> order;
  order.reserve(n);
  size_t ip = 0, in = 0;
  for (size_t i = 0; i < n; ++i) {
    const bool take_pos = (i + 1) * np / n > i * np / n;
    if (take_pos && ip < pos.size())
      order.push_back(pos[ip++]);
    else if (in < neg.size())
      order.push_back(neg[in++]);
    else
      order.push_back(pos[ip++]);
  }
  std::vector<std::vector<size_t>> batches;
  for (size_t start = 0; start < n; start += static_cast<size_t>(batch_size)) {
    const size_t end = std::min(n, start + static_cast<size_t>(batch_size));
    batches.emplace_back(order.begin() + static_cast<long>(start),
                         order.begin() + static_cast<long>(end));
  }
  return batches;
}

static std::vector<Label> predict_split(const Model& model,
                                        const std::vector<DataSample>& split) {
  std::vector<Label> pred;
  pred.reserve(split.size());
  std::vector<const DataSample*> one(1);
  for (const DataSample& s : split) {
    one[0] = &s;
    const double p = model.predict(one)[0];
    pred.push_back(p >= 0.5 ? Label::Supports : Label::Refutes);
  }
  return pred;
}

std::vector<Label> predict_labels(const Model& model,
                                  const std::vector<DataSample>& split) {
  if (split.empty()) throw EmptySplit("cannot predict on an empty split");
  return predict_split(model, split);
}

Metrics metrics_from_predictions(const std::vector<Label>& gold,
                                 const std::vector<Label>& pred) {
  if (gold.empty()) throw EmptySplit("cannot evaluate an empty split");
  if (gold.size() != pred.size())
    throw ShapeMismatch("gold and prediction counts differ");
  Metrics m;
  m.total = static_cast<long long>(gold.size());
  for (size_t i = 0; i < gold.size(); ++i) {
    const bool g = gold[i] == Label::Supports;
    const bool p = pred[i] == Label::Supports;
    if (g && p) ++m.tp;
    if (!g && p) ++m.fp;
    if (g && !p) ++m.fn;
    if (!g && !p) ++m.tn;
  }
  m.correct = m.tp + m.tn;
  m.accuracy = static_cast<double>(m.correct) / static_cast<double>(m.total);
  auto prf = [](long long tp, long long fp, long long fn) {
    ClassMetrics c;
    c.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0;
    c.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0;
    c.f1 = c.precision + c.recall > 0
               ? 2 * c.precision * c.recall / (c.precision + c.recall)
               : 0;
    return c;
  };
  m.supports = prf(m.tp, m.fp, m.fn);
  m.refutes = prf(m.tn, m.fn, m.fp);
  m.macro_f1 = (m.supports.f1 + m.refutes.f1) / 2.0;
  return m;
}

std::vector<Label> gold_labels(const std::vector<DataSample>& split) {
  std::vector<Label> gold;
  gold.reserve(split.size());
  for (const DataSample& s : split) gold.push_back(s.enc.gold);
  return gold;
}

Metrics evaluate(const Model& model, const std::vector<DataSample>& split) {
  if (split.empty()) throw EmptySplit("cannot evaluate an empty split");
  return metrics_from_predictions(gold_labels(split), predict_split(model, split));
}

TrainResult train(const TrainConfig& cfg, const Dataset& data) {
  cfg.validate();
  if (data.train.empty()) throw EmptySplit("train split is empty");
  if (data.valid.empty()) throw EmptySplit("valid split is empty");

  TrainResult result;
  result.model = build_model(cfg);
  Model& model = result.model;

  const std::vector<Label> train_golds = gold_labels(data.train);
  std::vector<double> targets_all;
  targets_all.reserve(train_golds.size());
  for (Label l : train_golds) targets_all.push_back(l == Label::Supports ? 1.0 : 0.0);

  double best_acc = evaluate(model, data.valid).accuracy;
  Params best_params = model.params;
  int best_epoch = 0;
  result.baseline_valid_acc = best_acc;

  AdamState adam;
  int since_best = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto batches =
        stratified_batches(train_golds, cfg.batch_size, mix_seed(cfg.seed, 1000 + epoch));
    double loss_sum = 0;
    size_t loss_count = 0;
    for (const auto& batch : batches) {
      Graph g;
      const StagedParams staged = stage_params(g, model.params);
      std::vector<const DataSample*> items;
      std::vector<double> targets;
      items.reserve(batch.size());
      targets.reserve(batch.size());
      for (size_t idx : batch) {
        items.push_back(&data.train[idx]);
        targets.push_back(targets_all[idx]);
      }
      const int probs = model.forward(g, staged, items);
      const int loss = g.bce_mean(probs, targets);
      g.backward(loss);
      loss_sum += g.value(loss)(0, 0) * static_cast<double>(batch.size());
      loss_count += batch.size();
      adam_step(model.params, collect_grads(g, staged), adam, cfg.lr);
    }
    const double epoch_loss = loss_sum / static_cast<double>(loss_count);
    const double valid_acc = evaluate(model, data.valid).accuracy;
    result.history.push_back({epoch, epoch_loss, valid_acc});
    if (valid_acc > best_acc) {
      best_acc = valid_acc;
      best_params = model.params;
      best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (since_best > cfg.patience) break;
  }
  model.params = std::move(best_params);
  result.best_epoch = best_epoch;
  result.best_valid_acc = best_acc;
  return result;
}

std::map<std::string, std::set<ReasoningType>> read_annotations(const std::string& path) {
  const std::string text = read_file_text(path);
  std::map<std::string, std::set<ReasoningType>> out;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string id, rest;
    fields >> id;
    std::getline(fields, rest);
    std::set<ReasoningType> types;
    std::string name;
    std::istringstream typestream(rest);
    while (std::getline(typestream, name, ',')) {
      const auto b = name.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      const auto e = name.find_last_not_of(" \t");
      const std::string trimmed = name.substr(b, e - b + 1);
      const auto parsed = parse_reasoning_type(trimmed);
      if (!parsed)
        throw InputError("unknown reasoning type \"" + trimmed + "\" on line " +
                         std::to_string(lineno));
      types.insert(*parsed);
    }
    if (types.empty())
      throw InputError("no reasoning types on line " + std::to_string(lineno));
    out[id] = types;
  }
  return out;
}

std::vector<ReasoningRow> reasoning_report(
    const std::vector<DataSample>& split, const std::vector<Label>& pred,
    const std::map<std::string, std::set<ReasoningType>>& annotations) {
  if (split.size() != pred.size())
    throw ShapeMismatch("prediction count does not match the split");
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < split.size(); ++i) index[split[i].id] = i;
  std::map<ReasoningType, std::pair<long long, long long>> tally;  // count, correct
  for (const auto& [id, types] : annotations) {
    const auto it = index.find(id);
    if (it == index.end())
      throw UnknownSampleId("annotated sample not in the split: " + id);
    const bool correct = pred[it->second] == split[it->second].enc.gold;
    for (ReasoningType t : types) {
      auto& cell = tally[t];
      ++cell.first;
      if (correct) ++cell.second;
    }
  }
  std::vector<ReasoningRow> rows;
  for (ReasoningType t : kAllReasoningTypes) {
    const auto it = tally.find(t);
    if (it == tally.end()) continue;
    ReasoningRow row;
    row.type = t;
    row.count = it->second.first;
    row.correct = it->second.second;
    row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.count);
    rows.push_back(row);
  }
  return rows;
}

std::vector<CurvePoint> subset_curve(const TrainConfig& cfg, const Dataset& data,
                                     const std::vector<int>& fractions) {
  cfg.validate();
  if (fractions.empty()) throw ConfigError("no fractions given");
  for (int f : fractions)
    if (f < 1 || f > 100) throw ConfigError("fractions must lie in 1..100");
  if (data.test.empty()) throw EmptySplit("test split is empty");

  std::vector<size_t> pos, neg;
  for (size_t i = 0; i < data.train.size(); ++i)
    (data.train[i].enc.gold == Label::Supports ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty())
    throw SingleClassDataset("subset curve needs both labels in train");

  std::vector<CurvePoint> out;
  for (int f : fractions) {
    auto take = [&](const std::vector<size_t>& cls, Rng& rng) {
      std::vector<size_t> picked = cls;
      rng.shuffle(picked);
      size_t want = static_cast<size_t>(std::llround(
          static_cast<double>(cls.size()) * static_cast<double>(f) / 100.0));
      want = std::max<size_t>(1, std::min(want, cls.size()));
      picked.resize(want);
      return picked;
    };
    Rng rng(mix_seed(cfg.seed, 2000 + static_cast<uint64_t>(f)));
    std::vector<size_t> chosen = take(pos, rng);
    const std::vector<size_t> negs = take(neg, rng);
    chosen.insert(chosen.end(), negs.begin(), negs.end());
    std::sort(chosen.begin(), chosen.end());

    Dataset subset;
    subset.valid = data.valid;
    subset.test = data.test;
    subset.train.reserve(chosen.size());
    for (size_t idx : chosen) subset.train.push_back(data.train[idx]);

    const TrainResult run = train(cfg, subset);
    CurvePoint point;
    point.fraction = f;
    point.train_size = subset.train.size();
    point.test_accuracy = evaluate(run.model, data.test).accuracy;
    out.push_back(point);
  }
  return out;
}

}  // namespace chartfc
