#pragma once
// Dataset-directory plumbing shared by the CLI commands: run
// configuration, generation from seed files, intermediate artifact I/O,
// and the train/eval/report/curve drivers.
//
// A dataset directory looks like:
//   manifest.jsonl
//   rejections.log
//   images/<id>.ppm        sidecars/<id>.json
//   reads/<id>.json        sequences/<template>.jsonl
//   encoded/<template>/{meta.json, vocab.json, train|valid|test.jsonl}

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chartfc/core.hpp"
#include "chartfc/reader.hpp"
#include "chartfc/seqgen.hpp"
#include "chartfc/train.hpp"

namespace chartfc {

// Flat dotted-key configuration. Files hold "key = value" lines, '#'
// comments, blank lines. Unknown keys are rejected so typos cannot
// silently fall back to defaults; flags override file values.
struct RunConfig {
  std::map<std::string, std::string> values;

  static RunConfig from_file(const std::string& path);
  void set(const std::string& key, const std::string& value);  // validates the key

  bool has(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  uint64_t get_u64(const std::string& key, uint64_t fallback) const;
  double get_real(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
};

// The single seed every stage derives its streams from, echoed by each
// command so runs are reconstructible from their logs.
uint64_t effective_seed(const RunConfig& cfg, const std::string& key, uint64_t fallback);

struct GenerateStats {
  size_t written = 0;
  size_t rejected = 0;
  uint64_t style_seed = 0;
  uint64_t split_seed = 0;
};

// Seed tables + claims -> manifest, chart images, sidecars, and a
// rejection log with one reason-coded line per dropped claim. On an
// input error everything this run wrote is removed before rethrowing.
GenerateStats generate_dataset(const std::string& seed_dir, const std::string& out_dir,
                               const RunConfig& cfg);

// Re-renders every image (or one sample) from the stored sidecars.
size_t render_dataset(const std::string& dataset_dir, const std::string& only_id);

// ReadOutput JSON round-trip used by the reads/ artifacts and the OCR
// stub in the test helpers.
std::string read_output_to_json(const ReadOutput& out);
ReadOutput read_output_from_json(const std::string& text);

struct ReaderChoice {
  bool use_ocr = false;
  std::string endpoint;
  NoiseConfig noise;
  uint64_t noise_seed = 0;
};

ReaderChoice reader_from_config(const RunConfig& cfg);

// Reads one sample with the chosen backend, preferring a stored
// reads/<id>.json when allow_stored is set.
ReadOutput read_sample(const std::string& dataset_dir, const Sample& sample,
                       const ReaderChoice& reader, bool allow_stored);

size_t read_dataset(const std::string& dataset_dir, const ReaderChoice& reader,
                    const std::string& only_id);

struct SeqgenStats {
  size_t written = 0;
  size_t failed = 0;
};

SeqgenStats seqgen_dataset(const std::string& dataset_dir, TemplateKind tmpl,
                           const ReaderChoice& reader);

struct EncodeStats {
  size_t written = 0;
  int vocab_size = 0;
  int max_len = 0;
};

// template_name is a TemplateKind name or "none" (claim-only inputs).
// The vocabulary is built from the train split only.
EncodeStats encode_dataset(const std::string& dataset_dir, const std::string& template_name,
                           int max_len, int min_count, const ReaderChoice& reader);

// Loads the encoded splits for the template recorded in the config;
// with_vision also decodes and downsamples every chart image.
Dataset load_encoded_dataset(const std::string& dataset_dir,
                             const std::string& template_name, bool with_vision);

TrainConfig train_config_from(const RunConfig& cfg);

struct TrainArtifacts {
  TrainResult result;
  std::string checkpoint_path;
  std::string history_path;
};

TrainArtifacts train_command(const std::string& dataset_dir, const std::string& out_dir,
                             const RunConfig& cfg);

// One training run per (batch size, lr) grid point; returns summary
// rows and saves the best run's checkpoint.
struct GridRow {
  int batch_size = 0;
  double lr = 0;
  int best_epoch = 0;
  double best_valid_acc = 0;
};
std::vector<GridRow> train_grid_command(const std::string& dataset_dir,
                                        const std::string& out_dir, const RunConfig& cfg);

// Rebuilds the model a checkpoint was trained as, shape-checked.
Model model_from_checkpoint(const std::string& checkpoint_path, TrainConfig* out_cfg);

Metrics eval_command(const std::string& checkpoint_path, const std::string& dataset_dir,
                     const std::string& split_name, const std::string& metrics_out);

std::vector<ReasoningRow> report_command(const std::string& checkpoint_path,
                                         const std::string& dataset_dir,
                                         const std::string& annotations_path,
                                         const std::string& report_out);

std::vector<CurvePoint> curve_command(const std::string& dataset_dir,
                                      const std::string& out_dir, const RunConfig& cfg);

std::string metrics_to_json(const Metrics& m);
std::string format_metrics_table(const Metrics& m);
std::string format_reasoning_table(const std::vector<ReasoningRow>& rows);
std::string format_curve_table(const std::vector<CurvePoint>& points);

}  // namespace chartfc
