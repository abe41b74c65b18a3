#include "chartfc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "json.hpp"

#include "chartfc/chart.hpp"
#include "chartfc/errors.hpp"
#include "chartfc/fusion.hpp"
#include "chartfc/image.hpp"
#include "chartfc/linker.hpp"
#include "chartfc/rng.hpp"
#include "chartfc/text.hpp"

namespace chartfc {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "generate.style_seed", "generate.split_seed", "generate.canvas_w",
      "generate.canvas_h",   "generate.split_train", "generate.split_valid",
      "generate.split_test", "reader.kind",          "reader.ocr_endpoint",
      "reader.p_drop",       "reader.p_sub",         "reader.jitter_px",
      "reader.noise_seed",   "seqgen.template",      "encode.template",
      "encode.max_len",      "encode.min_count",     "model.layers",
      "model.hidden",        "model.heads",          "model.ffn",
      "model.dropout",       "train.batch_size",     "train.lr",
      "train.max_epochs",    "train.patience",       "train.seed",
      "train.model",         "train.vl_fusion",      "train.free_grid",
      "train.grid",          "eval.split",           "curve.fractions",
  };
  return keys;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  RunConfig cfg;
  const std::string text = read_file_text(path);
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        " is not \"key = value\"");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    cfg.set(key, value);
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (known_keys().count(key) == 0) throw ConfigError("unknown config key: " + key);
  values[key] = value;
}

bool RunConfig::has(const std::string& key) const { return values.count(key) > 0; }

std::string RunConfig::get_str(const std::string& key, const std::string& fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

long long RunConfig::get_int(const std::string& key, long long fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    size_t used = 0;
    const long long v = std::stoll(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not an integer: " + it->second);
  }
}

uint64_t RunConfig::get_u64(const std::string& key, uint64_t fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    size_t used = 0;
    const unsigned long long v = std::stoull(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not an unsigned integer: " + it->second);
  }
}

double RunConfig::get_real(const std::string& key, double fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not a number: " + it->second);
  }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ConfigError("config key " + key + " is not a boolean: " + it->second);
}

uint64_t effective_seed(const RunConfig& cfg, const std::string& key, uint64_t fallback) {
  return cfg.get_u64(key, fallback);
}

namespace {

// Writes that remember their paths so an input error can undo them.
struct TrackedWriter {
  std::vector<std::string> paths;

  void bytes(const std::string& path, const std::vector<uint8_t>& data) {
    write_file_bytes(path, data);
    paths.push_back(path);
  }
  void text(const std::string& path, const std::string& data) {
    write_file_text(path, data);
    paths.push_back(path);
  }
  void remove_all() {
    for (const std::string& p : paths) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
};

}  // namespace

GenerateStats generate_dataset(const std::string& seed_dir, const std::string& out_dir,
                               const RunConfig& cfg) {
  GenerateStats stats;
  stats.style_seed = effective_seed(cfg, "generate.style_seed", 1);
  stats.split_seed = effective_seed(cfg, "generate.split_seed", 2);
  const int canvas_w = static_cast<int>(cfg.get_int("generate.canvas_w", 640));
  const int canvas_h = static_cast<int>(cfg.get_int("generate.canvas_h", 480));
  SplitRatio ratio;
  ratio.train = static_cast<int>(cfg.get_int("generate.split_train", 8));
  ratio.valid = static_cast<int>(cfg.get_int("generate.split_valid", 1));
  ratio.test = static_cast<int>(cfg.get_int("generate.split_test", 1));

  const SeedData seed = load_seed(seed_dir);
  std::map<std::string, const Table*> tables;
  for (const Table& t : seed.tables) tables[t.id] = &t;

  fs::create_directories(out_dir + "/images");
  fs::create_directories(out_dir + "/sidecars");

  TrackedWriter writer;
  try {
    std::vector<Sample> samples;
    std::string rejections;
    for (const auto& [claim, table_id] : seed.claims) {
      const Table& table = *tables.at(table_id);
      try {
        const TokenizedText tok = tokenize_lemmatize(claim.text);
        const std::vector<LinkResult> links = link_claim(tok, table);
        SubTable st = extract_subtable(table, links);
        ChartSpec spec;
        spec.subtable = std::move(st);
        spec.style = style_for(claim.id, stats.style_seed);
        spec.canvas_w = canvas_w;
        spec.canvas_h = canvas_h;
        const ChartArtifact art = render(spec);
        Sample s;
        s.claim = claim;
        s.subtable_ref = table_id + ":" + spec.subtable.category_header + "|" +
                         spec.subtable.value_header;
        s.image_path = "images/" + claim.id + ".ppm";
        s.sidecar_path = "sidecars/" + claim.id + ".json";
        writer.bytes(out_dir + "/" + s.image_path, art.image);
        writer.text(out_dir + "/" + s.sidecar_path,
                    sidecar_to_json(art.spec, art.layout.regions));
        samples.push_back(std::move(s));
      } catch (const Rejected& r) {
        rejections += claim.id;
        rejections += '\t';
        rejections += to_string(r.reason);
        rejections += '\t';
        rejections += r.what();
        rejections += '\n';
        ++stats.rejected;
      } catch (const LayoutOverflow& e) {
        // Not part of the linking filter, but still a per-sample drop:
        // the chart cannot be drawn at this canvas size.
        rejections += claim.id;
        rejections += "\tlayout_overflow\t";
        rejections += e.what();
        rejections += '\n';
        ++stats.rejected;
      }
    }
    if (!samples.empty()) assign_splits(samples, ratio, stats.split_seed);
    const std::string manifest_path = out_dir + "/manifest.jsonl";
    write_manifest(samples, manifest_path);
    writer.paths.push_back(manifest_path);
    writer.text(out_dir + "/rejections.log", rejections);
    stats.written = samples.size();
  } catch (const InputError&) {
    writer.remove_all();
    throw;
  }
  return stats;
}

static std::vector<Sample> load_manifest_dir(const std::string& dataset_dir) {
  return read_manifest(dataset_dir + "/manifest.jsonl");
}

static const Sample& find_sample(const std::vector<Sample>& samples,
                                 const std::string& id) {
  for (const Sample& s : samples)
    if (s.claim.id == id) return s;
  throw InputError("unknown sample id: " + id);
}

size_t render_dataset(const std::string& dataset_dir, const std::string& only_id) {
  const std::vector<Sample> samples = load_manifest_dir(dataset_dir);
  if (!only_id.empty()) (void)find_sample(samples, only_id);
  size_t count = 0;
  for (const Sample& s : samples) {
    if (!only_id.empty() && s.claim.id != only_id) continue;
    const Sidecar sc = sidecar_from_json(read_file_text(dataset_dir + "/" + s.sidecar_path));
    const ChartArtifact art = render(sc.spec);
    write_file_bytes(dataset_dir + "/" + s.image_path, art.image);
    ++count;
  }
  return count;
}

std::string read_output_to_json(const ReadOutput& out) {
  json j;
  j["canvas_w"] = out.canvas_w;
  j["canvas_h"] = out.canvas_h;
  json regions = json::array();
  for (const TextRegion& r : out.regions) {
    json e;
    e["text"] = r.text;
    e["x"] = r.x;
    e["y"] = r.y;
    e["w"] = r.w;
    e["h"] = r.h;
    regions.push_back(e);
  }
  j["regions"] = regions;
  return j.dump();
}

ReadOutput read_output_from_json(const std::string& text) {
  ReadOutput out;
  try {
    json j = json::parse(text);
    out.canvas_w = j.at("canvas_w").get<int>();
    out.canvas_h = j.at("canvas_h").get<int>();
    for (const auto& e : j.at("regions")) {
      TextRegion r;
      r.text = e.at("text").get<std::string>();
      r.x = e.at("x").get<int>();
      r.y = e.at("y").get<int>();
      r.w = e.at("w").get<int>();
      r.h = e.at("h").get<int>();
      out.regions.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed read output: ") + e.what());
  }
  return out;
}

ReaderChoice reader_from_config(const RunConfig& cfg) {
  ReaderChoice choice;
  const std::string kind = cfg.get_str("reader.kind", "oracle");
  if (kind == "ocr")
    choice.use_ocr = true;
  else if (kind != "oracle")
    throw ConfigError("reader.kind must be oracle or ocr");
  choice.endpoint = cfg.get_str("reader.ocr_endpoint", "");
  if (choice.use_ocr && choice.endpoint.empty())
    throw ConfigError("reader.kind = ocr requires reader.ocr_endpoint");
  choice.noise.p_drop = cfg.get_real("reader.p_drop", 0.0);
  choice.noise.p_sub = cfg.get_real("reader.p_sub", 0.0);
  choice.noise.jitter_px = static_cast<int>(cfg.get_int("reader.jitter_px", 0));
  choice.noise_seed = cfg.get_u64("reader.noise_seed", 3);
  return choice;
}

ReadOutput read_sample(const std::string& dataset_dir, const Sample& sample,
                       const ReaderChoice& reader, bool allow_stored) {
  const std::string stored = dataset_dir + "/reads/" + sample.claim.id + ".json";
  if (allow_stored && fs::exists(stored))
    return read_output_from_json(read_file_text(stored));
  ReadOutput out = reader.use_ocr
                       ? read_ocr_file(dataset_dir + "/" + sample.image_path,
                                       reader.endpoint)
                       : read_oracle(dataset_dir + "/" + sample.sidecar_path);
  if (reader.noise.p_drop > 0 || reader.noise.p_sub > 0 || reader.noise.jitter_px > 0)
    out = perturb(out, reader.noise,
                  mix_seed(reader.noise_seed, stable_hash(sample.claim.id)));
  return out;
}

size_t read_dataset(const std::string& dataset_dir, const ReaderChoice& reader,
                    const std::string& only_id) {
  const std::vector<Sample> samples = load_manifest_dir(dataset_dir);
  if (!only_id.empty()) (void)find_sample(samples, only_id);
  fs::create_directories(dataset_dir + "/reads");
  size_t count = 0;
  for (const Sample& s : samples) {
    if (!only_id.empty() && s.claim.id != only_id) continue;
    const ReadOutput out = read_sample(dataset_dir, s, reader, false);
    write_file_text(dataset_dir + "/reads/" + s.claim.id + ".json",
                    read_output_to_json(out));
    ++count;
  }
  return count;
}

SeqgenStats seqgen_dataset(const std::string& dataset_dir, TemplateKind tmpl,
                           const ReaderChoice& reader) {
  const std::vector<Sample> samples = load_manifest_dir(dataset_dir);
  fs::create_directories(dataset_dir + "/sequences");
  SeqgenStats stats;
  std::string lines, failures;
  for (const Sample& s : samples) {
    try {
      const ReadOutput out = read_sample(dataset_dir, s, reader, true);
      const SequenceResult seq =
          tmpl == TemplateKind::Concat ? seq_concat(out) : seq_template(out, tmpl);
      json j;
      j["id"] = s.claim.id;
      j["text"] = seq.text();
      j["tokens"] = seq.tokens;
      j["alignment"] = seq.alignment;
      lines += j.dump();
      lines += '\n';
      ++stats.written;
    } catch (const InputError& e) {
      failures += s.claim.id;
      failures += '\t';
      failures += e.what();
      failures += '\n';
      ++stats.failed;
    }
  }
  const std::string base = dataset_dir + "/sequences/" + to_string(tmpl);
  write_file_text(base + ".jsonl", lines);
  write_file_text(base + ".rejects.log", failures);
  return stats;
}

namespace {

json encoded_to_json(const std::string& id, const EncodedInput& enc) {
  json j;
  j["id"] = id;
  j["gold"] = to_string(enc.gold);
  j["token_ids"] = enc.token_ids;
  j["segment_ids"] = enc.segment_ids;
  j["position_ids"] = enc.position_ids;
  j["x_bucket_ids"] = enc.x_bucket_ids;
  j["y_bucket_ids"] = enc.y_bucket_ids;
  j["label_ids"] = enc.label_ids;
  j["attention_mask"] = enc.attention_mask;
  return j;
}

DataSample encoded_from_json(const json& j) {
  DataSample s;
  s.id = j.at("id").get<std::string>();
  s.enc.gold = parse_label(j.at("gold").get<std::string>());
  s.enc.token_ids = j.at("token_ids").get<std::vector<int>>();
  s.enc.segment_ids = j.at("segment_ids").get<std::vector<int>>();
  s.enc.position_ids = j.at("position_ids").get<std::vector<int>>();
  s.enc.x_bucket_ids = j.at("x_bucket_ids").get<std::vector<int>>();
  s.enc.y_bucket_ids = j.at("y_bucket_ids").get<std::vector<int>>();
  s.enc.label_ids = j.at("label_ids").get<std::vector<int>>();
  s.enc.attention_mask = j.at("attention_mask").get<std::vector<int>>();
  return s;
}

struct PreparedSample {
  const Sample* sample = nullptr;
  ReadOutput read;
  ClassifyResult roles;
  bool has_roles = false;
  SequenceResult seq;
};

}  // namespace

EncodeStats encode_dataset(const std::string& dataset_dir,
                           const std::string& template_name, int max_len, int min_count,
                           const ReaderChoice& reader) {
  if (max_len < 8) throw ConfigError("encode.max_len must be at least 8");
  if (min_count < 1) throw ConfigError("encode.min_count must be at least 1");
  const bool none = template_name == "none";
  TemplateKind tmpl = TemplateKind::Concat;
  if (!none) tmpl = template_from_string(template_name);

  const std::vector<Sample> samples = load_manifest_dir(dataset_dir);
  const std::string out_base = dataset_dir + "/encoded/" + template_name;
  fs::create_directories(out_base);

  std::vector<PreparedSample> prepared;
  std::string failures;
  for (const Sample& s : samples) {
    PreparedSample p;
    p.sample = &s;
    try {
      if (!none) {
        p.read = read_sample(dataset_dir, s, reader, true);
        if (tmpl == TemplateKind::Concat) {
          p.seq = seq_concat(p.read);
        } else {
          p.roles = classify_roles(p.read);
          p.has_roles = true;
          p.seq = seq_template(p.roles, tmpl);
        }
      }
      prepared.push_back(std::move(p));
    } catch (const InputError& e) {
      failures += s.claim.id;
      failures += '\t';
      failures += e.what();
      failures += '\n';
    }
  }

  // Vocabulary from the train split only, so valid/test stay unseen.
  std::vector<std::vector<std::string>> corpus;
  for (const PreparedSample& p : prepared) {
    if (p.sample->split != Split::Train) continue;
    corpus.push_back(tokenize_lemmatize(p.sample->claim.text).tokens);
    corpus.push_back(p.seq.tokens);
  }
  const Vocab vocab = build_vocab(corpus, min_count);

  EncodeStats stats;
  stats.vocab_size = vocab.size();
  stats.max_len = max_len;
  std::string lines_train, lines_valid, lines_test;
  for (const PreparedSample& p : prepared) {
    try {
      const EncodedInput enc =
          encode(p.sample->claim, p.seq, p.read, p.has_roles ? &p.roles : nullptr, vocab,
                 max_len);
      std::string* sink = &lines_train;
      if (p.sample->split == Split::Valid) sink = &lines_valid;
      if (p.sample->split == Split::Test) sink = &lines_test;
      *sink += encoded_to_json(p.sample->claim.id, enc).dump();
      *sink += '\n';
      ++stats.written;
    } catch (const InputError& e) {
      failures += p.sample->claim.id;
      failures += '\t';
      failures += e.what();
      failures += '\n';
    }
  }

  json meta;
  meta["template"] = template_name;
  meta["max_len"] = max_len;
  meta["min_count"] = min_count;
  meta["vocab_size"] = vocab.size();
  write_file_text(out_base + "/meta.json", meta.dump());
  write_file_text(out_base + "/vocab.json", vocab.to_json());
  write_file_text(out_base + "/train.jsonl", lines_train);
  write_file_text(out_base + "/valid.jsonl", lines_valid);
  write_file_text(out_base + "/test.jsonl", lines_test);
  write_file_text(out_base + "/rejects.log", failures);
  return stats;
}

static std::vector<DataSample> load_encoded_file(const std::string& path) {
  std::vector<DataSample> out;
  if (!fs::exists(path)) throw InputError("missing encoded split: " + path);
  const std::string text = read_file_text(path);
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (trim(line).empty()) continue;
    try {
      out.push_back(encoded_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw InputError(std::string("malformed encoded sample: ") + e.what());
    }
  }
  return out;
}

struct EncodedMeta {
  std::string template_name;
  int max_len = 0;
  int vocab_size = 0;
};

static EncodedMeta load_encoded_meta(const std::string& dataset_dir,
                                     const std::string& template_name) {
  const std::string path = dataset_dir + "/encoded/" + template_name + "/meta.json";
  if (!fs::exists(path))
    throw InputError("no encoded inputs for template \"" + template_name +
                     "\"; run the encode command first");
  EncodedMeta meta;
  try {
    json j = json::parse(read_file_text(path));
    meta.template_name = j.at("template").get<std::string>();
    meta.max_len = j.at("max_len").get<int>();
    meta.vocab_size = j.at("vocab_size").get<int>();
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed encoded meta: ") + e.what());
  }
  return meta;
}

Dataset load_encoded_dataset(const std::string& dataset_dir,
                             const std::string& template_name, bool with_vision) {
  const std::string base = dataset_dir + "/encoded/" + template_name;
  Dataset data;
  data.train = load_encoded_file(base + "/train.jsonl");
  data.valid = load_encoded_file(base + "/valid.jsonl");
  data.test = load_encoded_file(base + "/test.jsonl");
  if (with_vision) {
    std::map<std::string, std::string> image_paths;
    for (const Sample& s : load_manifest_dir(dataset_dir))
      image_paths[s.claim.id] = s.image_path;
    auto attach = [&](std::vector<DataSample>& split) {
      for (DataSample& s : split) {
        const auto it = image_paths.find(s.id);
        if (it == image_paths.end())
          throw InputError("encoded sample missing from manifest: " + s.id);
        const Image img =
            Image::decode_ppm(read_file_bytes(dataset_dir + "/" + it->second));
        s.vision = img.grayscale_downsample(kVisionW, kVisionH);
      }
    };
    attach(data.train);
    attach(data.valid);
    attach(data.test);
  }
  return data;
}

TrainConfig train_config_from(const RunConfig& cfg) {
  TrainConfig tc;
  tc.batch_size = static_cast<int>(cfg.get_int("train.batch_size", 16));
  tc.lr = cfg.get_real("train.lr", 1e-3);
  tc.max_epochs = static_cast<int>(cfg.get_int("train.max_epochs", 10));
  tc.patience = static_cast<int>(cfg.get_int("train.patience", 5));
  tc.seed = cfg.get_u64("train.seed", 1);
  tc.model = model_kind_from_string(cfg.get_str("train.model", "chartbert"));
  tc.vl_fusion = fusion_kind_from_string(cfg.get_str("train.vl_fusion", "concat"));
  const std::string default_template =
      tc.model == ModelKind::ClaimOnly ? "none" : "tmp1";
  tc.seqgen = seqgen_mode_from_string(cfg.get_str("encode.template", default_template));
  tc.free_grid = cfg.get_bool("train.free_grid", false);
  tc.model_cfg.layers = static_cast<int>(cfg.get_int("model.layers", 2));
  tc.model_cfg.hidden = static_cast<int>(cfg.get_int("model.hidden", 128));
  tc.model_cfg.heads = static_cast<int>(cfg.get_int("model.heads", 4));
  tc.model_cfg.ffn = static_cast<int>(cfg.get_int("model.ffn", 256));
  tc.model_cfg.dropout = cfg.get_real("model.dropout", 0.0);
  return tc;
}

static std::string history_to_jsonl(const TrainResult& result) {
  std::string lines;
  json base;
  base["epoch"] = 0;
  base["valid_acc"] = result.baseline_valid_acc;
  lines += base.dump();
  lines += '\n';
  for (const EpochStats& e : result.history) {
    json j;
    j["epoch"] = e.epoch;
    j["train_loss"] = e.train_loss;
    j["valid_acc"] = e.valid_acc;
    lines += j.dump();
    lines += '\n';
  }
  return lines;
}

static TrainConfig finished_train_config(const RunConfig& cfg,
                                         const std::string& dataset_dir) {
  TrainConfig tc = train_config_from(cfg);
  const EncodedMeta meta = load_encoded_meta(dataset_dir, to_string(tc.seqgen));
  tc.model_cfg.max_len = meta.max_len;
  tc.model_cfg.vocab_tokens = meta.vocab_size;
  tc.validate();
  return tc;
}

TrainArtifacts train_command(const std::string& dataset_dir, const std::string& out_dir,
                             const RunConfig& cfg) {
  const TrainConfig tc = finished_train_config(cfg, dataset_dir);
  const Dataset data = load_encoded_dataset(dataset_dir, to_string(tc.seqgen),
                                            tc.model == ModelKind::Vl);
  fs::create_directories(out_dir);
  TrainArtifacts artifacts;
  artifacts.result = train(tc, data);
  artifacts.checkpoint_path = out_dir + "/checkpoint.cfck";
  artifacts.history_path = out_dir + "/history.jsonl";
  save_checkpoint(artifacts.result.model.params, tc.to_json(), artifacts.checkpoint_path);
  write_file_text(artifacts.history_path, history_to_jsonl(artifacts.result));
  return artifacts;
}

std::vector<GridRow> train_grid_command(const std::string& dataset_dir,
                                        const std::string& out_dir, const RunConfig& cfg) {
  const TrainConfig base = finished_train_config(cfg, dataset_dir);
  const Dataset data = load_encoded_dataset(dataset_dir, to_string(base.seqgen),
                                            base.model == ModelKind::Vl);
  fs::create_directories(out_dir);
  static const int kBatchGrid[] = {8, 16, 32};
  static const double kLrGrid[] = {1e-3, 7e-4, 5e-5, 5e-6, 5e-7};
  std::vector<GridRow> rows;
  std::string lines;
  bool have_best = false;
  double best_acc = 0;
  for (int bs : kBatchGrid) {
    for (double lr : kLrGrid) {
      TrainConfig tc = base;
      tc.batch_size = bs;
      tc.lr = lr;
      const TrainResult result = train(tc, data);
      GridRow row;
      row.batch_size = bs;
      row.lr = lr;
      row.best_epoch = result.best_epoch;
      row.best_valid_acc = result.best_valid_acc;
      rows.push_back(row);
      json j;
      j["batch_size"] = bs;
      j["lr"] = lr;
      j["best_epoch"] = row.best_epoch;
      j["best_valid_acc"] = row.best_valid_acc;
      lines += j.dump();
      lines += '\n';
      if (!have_best || row.best_valid_acc > best_acc) {
        have_best = true;
        best_acc = row.best_valid_acc;
        save_checkpoint(result.model.params, tc.to_json(), out_dir + "/checkpoint.cfck");
        write_file_text(out_dir + "/history.jsonl", history_to_jsonl(result));
      }
    }
  }
  write_file_text(out_dir + "/grid_summary.jsonl", lines);
  return rows;
}

Model model_from_checkpoint(const std::string& checkpoint_path, TrainConfig* out_cfg) {
  LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
  if (loaded.config_json.empty())
    throw BadMagic("checkpoint carries no training config: " + checkpoint_path);
  const TrainConfig tc = TrainConfig::from_json(loaded.config_json);
  Model model = build_model(tc);
  ensure_compatible(loaded.params, model.params);
  model.params = std::move(loaded.params);
  if (out_cfg) *out_cfg = tc;
  return model;
}

static const std::vector<DataSample>& pick_split(const Dataset& data,
                                                 const std::string& name) {
  if (name == "train") return data.train;
  if (name == "valid") return data.valid;
  if (name == "test") return data.test;
  throw ConfigError("split must be train, valid, or test: " + name);
}

std::string metrics_to_json(const Metrics& m) {
  json j;
  j["total"] = m.total;
  j["correct"] = m.correct;
  j["accuracy"] = m.accuracy;
  j["macro_f1"] = m.macro_f1;
  j["supports"] = {{"precision", m.supports.precision},
                   {"recall", m.supports.recall},
                   {"f1", m.supports.f1}};
  j["refutes"] = {{"precision", m.refutes.precision},
                  {"recall", m.refutes.recall},
                  {"f1", m.refutes.f1}};
  j["confusion"] = {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}};
  return j.dump();
}

Metrics eval_command(const std::string& checkpoint_path, const std::string& dataset_dir,
                     const std::string& split_name, const std::string& metrics_out) {
  TrainConfig tc;
  const Model model = model_from_checkpoint(checkpoint_path, &tc);
  const Dataset data = load_encoded_dataset(dataset_dir, to_string(tc.seqgen),
                                            tc.model == ModelKind::Vl);
  const Metrics metrics = evaluate(model, pick_split(data, split_name));
  if (!metrics_out.empty()) write_file_text(metrics_out, metrics_to_json(metrics));
  return metrics;
}

std::vector<ReasoningRow> report_command(const std::string& checkpoint_path,
                                         const std::string& dataset_dir,
                                         const std::string& annotations_path,
                                         const std::string& report_out) {
  TrainConfig tc;
  const Model model = model_from_checkpoint(checkpoint_path, &tc);
  const Dataset data = load_encoded_dataset(dataset_dir, to_string(tc.seqgen),
                                            tc.model == ModelKind::Vl);
  const std::vector<Label> pred = predict_labels(model, data.test);
  const auto annotations = read_annotations(annotations_path);
  const std::vector<ReasoningRow> rows = reasoning_report(data.test, pred, annotations);
  if (!report_out.empty()) {
    std::string lines;
    for (const ReasoningRow& r : rows) {
      json j;
      j["type"] = to_string(r.type);
      j["count"] = r.count;
      j["correct"] = r.correct;
      j["accuracy"] = r.accuracy;
      lines += j.dump();
      lines += '\n';
    }
    write_file_text(report_out, lines);
  }
  return rows;
}

std::vector<CurvePoint> curve_command(const std::string& dataset_dir,
                                      const std::string& out_dir, const RunConfig& cfg) {
  const TrainConfig tc = finished_train_config(cfg, dataset_dir);
  const Dataset data = load_encoded_dataset(dataset_dir, to_string(tc.seqgen),
                                            tc.model == ModelKind::Vl);
  std::vector<int> fractions = kDefaultCurveFractions;
  if (cfg.has("curve.fractions")) {
    fractions.clear();
    std::istringstream parts(cfg.get_str("curve.fractions", ""));
    std::string part;
    while (std::getline(parts, part, ',')) {
      try {
        fractions.push_back(std::stoi(trim(part)));
      } catch (const std::exception&) {
        throw ConfigError("curve.fractions must be a comma list of percents");
      }
    }
  }
  const std::vector<CurvePoint> points = subset_curve(tc, data, fractions);
  fs::create_directories(out_dir);
  std::string lines;
  for (const CurvePoint& p : points) {
    json j;
    j["fraction"] = p.fraction;
    j["train_size"] = p.train_size;
    j["test_accuracy"] = p.test_accuracy;
    lines += j.dump();
    lines += '\n';
  }
  write_file_text(out_dir + "/curve.jsonl", lines);
  return points;
}

static std::string fixed(double v, int decimals) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(decimals);
  s << v;
  return s.str();
}

std::string format_metrics_table(const Metrics& m) {
  std::ostringstream s;
  s << "samples   " << m.total << "\n";
  s << "correct   " << m.correct << "\n";
  s << "accuracy  " << fixed(m.accuracy * 100, 2) << "%\n";
  s << "macro F1  " << fixed(m.macro_f1 * 100, 2) << "\n";
  s << "class      precision  recall  f1\n";
  s << "Supports   " << fixed(m.supports.precision, 4) << "     " << fixed(m.supports.recall, 4)
    << "  " << fixed(m.supports.f1, 4) << "\n";
  s << "Refutes    " << fixed(m.refutes.precision, 4) << "     " << fixed(m.refutes.recall, 4)
    << "  " << fixed(m.refutes.f1, 4) << "\n";
  s << "confusion  tp=" << m.tp << " fp=" << m.fp << " fn=" << m.fn << " tn=" << m.tn
    << "\n";
  return s.str();
}

std::string format_reasoning_table(const std::vector<ReasoningRow>& rows) {
  std::ostringstream s;
  s << "reasoning type        count  correct  accuracy\n";
  for (const ReasoningRow& r : rows) {
    std::string name = to_string(r.type);
    name.resize(20, ' ');
    s << name << "  " << r.count << "      " << r.correct << "        "
      << fixed(r.accuracy * 100, 1) << "%\n";
  }
  if (rows.empty()) s << "(no annotated samples)\n";
  return s.str();
}

std::string format_curve_table(const std::vector<CurvePoint>& points) {
  std::ostringstream s;
  s << "fraction  train size  test accuracy\n";
  for (const CurvePoint& p : points)
    s << p.fraction << "%\t" << p.train_size << "\t" << fixed(p.test_accuracy * 100, 2)
      << "%\n";
  return s.str();
}

}  // namespace chartfc
