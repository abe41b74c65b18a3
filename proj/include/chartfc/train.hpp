#pragma once
// Training loops, metrics, stratified batching, early stopping,
// reasoning-type breakdown reports, and the training-set-size curve.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "chartfc/core.hpp"
#include "chartfc/encoder.hpp"
#include "chartfc/model.hpp"

namespace chartfc {

enum class ModelKind { ChartBert, Vl, ClaimOnly };
const char* to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& name);

enum class FusionKind { Concat, Mult, ConcatGru, Mcb, Transformer };
const char* to_string(FusionKind k);
FusionKind fusion_kind_from_string(const std::string& name);

enum class SeqgenMode { Concat, Tmp1, Tmp2, Tmp3, None };
const char* to_string(SeqgenMode m);
SeqgenMode seqgen_mode_from_string(const std::string& name);

struct TrainConfig {
  int batch_size = 16;      // {8, 16, 32}
  double lr = 1e-3;         // {1e-3, 7e-4, 5e-5, 5e-6, 5e-7}
  int max_epochs = 10;      // <= 50
  int patience = 5;
  uint64_t seed = 0;
  ModelKind model = ModelKind::ChartBert;
  FusionKind vl_fusion = FusionKind::Concat;
  SeqgenMode seqgen = SeqgenMode::Tmp1;
  bool free_grid = false;   // lifts the hyperparameter grids
  ModelConfig model_cfg;

  // Grid membership unless free_grid; model_cfg validated always.
  void validate() const;
  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);
};

struct DataSample {
  std::string id;
  EncodedInput enc;
  std::vector<double> vision;  // 64x48 grayscale, only for the vl model
};

struct Dataset {
  std::vector<DataSample> train, valid, test;
};

// A model kind plus its parameters; forward builds probability nodes
// for a batch inside the caller's graph.
struct Model {
  ModelKind kind = ModelKind::ChartBert;
  FusionKind fusion = FusionKind::Concat;
  ModelConfig cfg;
  Params params;

  int forward(nn::Graph& g, const StagedParams& staged,
              const std::vector<const DataSample*>& batch) const;
  std::vector<double> predict(const std::vector<const DataSample*>& batch) const;
};

inline constexpr int kMcbSketchDim = 256;
inline constexpr int kConcatGruChannels = 4;
inline constexpr int kFuseTransformerLayers = 3;

// Fresh parameters drawn from mix_seed(config.seed, 1).
Model build_model(const TrainConfig& cfg);

// Index batches over samples, each batch's class counts within +-1 of
// the global ratio scaled to the batch. Every index appears exactly
// once; order is deterministic in the seed.
std::vector<std::vector<size_t>> stratified_batches(const std::vector<Label>& golds,
                                                    int batch_size, uint64_t seed);

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0;
  double valid_acc = 0;
};

struct TrainResult {
  Model model;  // best-validation parameters
  double baseline_valid_acc = 0;  // untrained model, before epoch 1
  std::vector<EpochStats> history;
  int best_epoch = 0;  // 0 means no epoch beat the baseline
  double best_valid_acc = 0;
};

// Adam on mean BCE. The untrained model's validation accuracy is the
// baseline to beat, so a run that never improves still returns a
// well-defined best checkpoint. Stops once epochs since the best
// exceed the patience.
TrainResult train(const TrainConfig& cfg, const Dataset& data);

struct ClassMetrics {
  double precision = 0, recall = 0, f1 = 0;
};

struct Metrics {
  long long total = 0;
  long long correct = 0;
  double accuracy = 0;
  double macro_f1 = 0;
  ClassMetrics supports, refutes;
  // Confusion counts with Supports as the positive class.
  long long tp = 0, fp = 0, fn = 0, tn = 0;
};

// Decision threshold 0.5; exactly 0.5 counts as Supports. A class with
// no predictions and no gold members scores F1 0.
Metrics metrics_from_predictions(const std::vector<Label>& gold,
                                 const std::vector<Label>& pred);
std::vector<Label> gold_labels(const std::vector<DataSample>& split);
std::vector<Label> predict_labels(const Model& model,
                                  const std::vector<DataSample>& split);
Metrics evaluate(const Model& model, const std::vector<DataSample>& split);

struct ReasoningRow {
  ReasoningType type = ReasoningType::RetrieveValue;
  long long count = 0;
  long long correct = 0;
  double accuracy = 0;
};

// Annotation file: one sample per line, id then comma-separated type
// names, whitespace between id and the list.
std::map<std::string, std::set<ReasoningType>> read_annotations(const std::string& path);

// A sample with k annotated types contributes to k rows. Types never
// annotated produce no row.
std::vector<ReasoningRow> reasoning_report(
    const std::vector<DataSample>& split, const std::vector<Label>& pred,
    const std::map<std::string, std::set<ReasoningType>>& annotations);

struct CurvePoint {
  int fraction = 0;        // percent of the train split
  size_t train_size = 0;
  double test_accuracy = 0;
};

inline const std::vector<int> kDefaultCurveFractions = {1, 25, 50, 75, 100};

// Per fraction: stratified subset of the train split (at least one
// sample per class), fresh model, full training run, full-test eval.
std::vector<CurvePoint> subset_curve(const TrainConfig& cfg, const Dataset& data,
                                     const std::vector<int>& fractions);

}  // namespace chartfc
