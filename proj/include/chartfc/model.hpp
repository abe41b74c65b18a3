#pragma once
// Model assembly on top of the autodiff graph: parameter registries,
// initializers, the structural-embedding transformer classifier, LSTM
// and GRU building blocks, Adam, checkpoint I/O, and finite-difference
// gradient checking. The Graph built per batch doubles as the forward
// trace: it retains every activation backward needs.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "chartfc/encoder.hpp"
#include "chartfc/nn.hpp"
#include "chartfc/rng.hpp"

namespace chartfc {

struct ModelConfig {
  int layers = 2;
  int hidden = 128;
  int heads = 4;
  int ffn = 256;
  int max_len = 256;
  int vocab_tokens = 5;  // set from the built Vocab
  int vocab_segments = 2;
  int x_buckets = kCoordBuckets + 1;
  int y_buckets = kCoordBuckets + 1;
  int labels = 3;
  double dropout = 0.0;
  uint64_t init_seed = 0;

  void validate() const;  // throws ShapeMismatch on bad combinations
  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
  bool operator==(const ModelConfig&) const = default;
};

// Ordered name -> tensor registry. Order is the initialization and
// serialization order, so it is part of the reproducibility contract.
struct Params {
  std::vector<std::pair<std::string, nn::Tensor>> named;

  void add(const std::string& name, nn::Tensor t);
  nn::Tensor& get(const std::string& name);
  const nn::Tensor& get(const std::string& name) const;
  bool has(const std::string& name) const;
};

// Parameters staged into a graph as differentiable leaves, in registry
// order. node_of resolves names for forward functions.
struct StagedParams {
  std::vector<std::pair<std::string, int>> nodes;
  int node_of(const std::string& name) const;
};

StagedParams stage_params(nn::Graph& g, const Params& params);

// Gradients for every parameter, in registry order, after backward().
std::vector<nn::Tensor> collect_grads(const nn::Graph& g, const StagedParams& staged);

// Fills every weight tensor with truncated-normal(0.02) draws from one
// stream, in registry order, quantized to the f32 grid so checkpoints
// round-trip bit-identically. Biases, norm parameters, and sketch
// tensors are left untouched.
void randomize_weights(Params& params, uint64_t seed);

// Truncated-normal(0.02) weights, zero biases, unit layer-norm gains,
// zeroed structural rows for id 0.
Params init_chartbert(const ModelConfig& cfg);

// Probabilities [n,1] for a batch. Padding is dropped before the graph
// is built, so padded content cannot influence the output.
int forward_chartbert(nn::Graph& g, const StagedParams& staged, const ModelConfig& cfg,
                      const std::vector<const EncodedInput*>& batch);
std::vector<double> predict_chartbert(const Params& params, const ModelConfig& cfg,
                                      const std::vector<const EncodedInput*>& batch);

// One post-norm transformer encoder layer (self-attention + GELU FFN).
// Parameter names are "<prefix>.attn.{wq,bq,wk,bk,wv,bv,wo,bo}",
// "<prefix>.{ln1_g,ln1_b,ln2_g,ln2_b}", "<prefix>.ffn.{w1,b1,w2,b2}".
int transformer_layer(nn::Graph& g, const StagedParams& staged, const std::string& prefix,
                      int x, int hidden, int heads);
void init_transformer_layer(Params& params, const std::string& prefix, int hidden, int ffn);

// Two-layer LSTM over embedded tokens; returns the second layer's hidden
// states [T, hidden]. Gate order i,f,g,o.
Params init_lstm(int vocab, int emb_dim, int hidden, uint64_t seed);
int lstm_encode(nn::Graph& g, const StagedParams& staged, const std::vector<int>& token_ids,
                int emb_dim, int hidden);

// Single GRU step; h' = z*candidate + (1-z)*h, so a saturated update
// gate hands over to the candidate state entirely.
void init_gru(Params& params, const std::string& prefix, int in_dim, int hidden);
int gru_cell(nn::Graph& g, const StagedParams& staged, const std::string& prefix, int x,
             int h);

struct AdamState {
  long long t = 0;
  std::vector<nn::Tensor> m, v;
};

void adam_step(Params& params, const std::vector<nn::Tensor>& grads, AdamState& state,
               double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// Checkpoint container: "CFCK", u32 version, u64 header length, header
// JSON ({config, tensors:[{name,dtype,shape}]}), then f32 little-endian
// payloads in header order.
void save_checkpoint(const Params& params, const std::string& config_json,
                     const std::string& path);
struct LoadedCheckpoint {
  Params params;
  std::string config_json;
};
LoadedCheckpoint load_checkpoint(const std::string& path);

// Throws ShapeMismatch when the loaded registry disagrees with the
// expected one in names, order, or shapes.
void ensure_compatible(const Params& loaded, const Params& expected);

struct GradCheckReport {
  double max_rel_err = 0;
  size_t entries_checked = 0;
};

// Central finite differences against analytic gradients on randomly
// sampled tensor entries. loss_fn must be a pure function of params.
GradCheckReport grad_check(const std::function<double(const Params&)>& loss_fn,
                           Params& params, const std::vector<nn::Tensor>& analytic,
                           double step, int samples_per_tensor, Rng& rng);

}  // namespace chartfc
