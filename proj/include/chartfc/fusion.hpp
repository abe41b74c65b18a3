#pragma once
// Multimodal fusion building blocks: a small fully-connected vision
// encoder, an embedder-style text encoder, and five ways to join the
// two feature streams (concat, elementwise product, conv+GRU, compact
// bilinear via count sketch, and a shallow cross-modal transformer),
// plus the shared two-layer sigmoid classification head.

#include <cstdint>
#include <string>
#include <vector>

#include "chartfc/image.hpp"
#include "chartfc/model.hpp"
#include "chartfc/nn.hpp"

namespace chartfc {

inline constexpr int kVisionW = 64;
inline constexpr int kVisionH = 48;

// Count-sketch projection: index and sign hashes drawn once from the
// seed and kept with the model so sketches survive save/load.
struct SketchSpec {
  int d_in = 0;
  int d_out = 0;
  std::vector<int> h;       // [d_in] -> [0, d_out)
  std::vector<int> sign;    // [d_in] -> {-1, +1}
  uint64_t seed = 0;

  static SketchSpec make(int d_in, int d_out, uint64_t seed);
  // Hashes as two [1, d_in] tensors for checkpoint storage; exact in
  // f32 as long as d_out stays below 2^24.
  void add_to(Params& params, const std::string& prefix) const;
  static SketchSpec from_params(const Params& params, const std::string& prefix);
};

std::vector<double> count_sketch(const std::vector<double>& x, const SketchSpec& spec);

// Compact bilinear fusion: circular convolution of the two sketches,
// computed in Fourier space. Optional signed-sqrt + L2 postprocessing.
std::vector<double> mcb_fuse(const std::vector<double>& a, const std::vector<double>& b,
                             const SketchSpec& spec_a, const SketchSpec& spec_b,
                             bool signed_sqrt_l2 = false);

// Graph counterparts operating on [1,d] nodes.
int count_sketch_node(nn::Graph& g, int x, const SketchSpec& spec);
int mcb_fuse_node(nn::Graph& g, int a, int b, const SketchSpec& spec_a,
                  const SketchSpec& spec_b);

// The init_* functions below reserve shapes only (weights zero, norm
// gains one); call randomize_weights once on the finished registry to
// draw initial values. Sketch tensors are never randomized.

// Grayscale 64x48 downsample, flattened, through one affine layer.
// Parameters: "<prefix>.w" [3072, d], "<prefix>.b" [1, d].
void init_fc_vision(Params& params, const std::string& prefix, int d);
int fc_vision_encode(nn::Graph& g, const StagedParams& staged, const std::string& prefix,
                     const Image& image);
int fc_vision_encode_ppm(nn::Graph& g, const StagedParams& staged,
                         const std::string& prefix, const std::vector<uint8_t>& ppm);

// Word + position embeddings summed, then layer-norm, per token.
// Parameters: "<prefix>.word" [vocab, d], "<prefix>.pos" [max_len, d],
// "<prefix>.ln_g" / "<prefix>.ln_b" [1, d].
void init_embedder(Params& params, const std::string& prefix, int vocab, int max_len,
                   int d);
int embedder_text_encode(nn::Graph& g, const StagedParams& staged,
                         const std::string& prefix, const std::vector<int>& token_ids);

// Plain concatenation along the feature axis.
int fuse_concat(nn::Graph& g, int a, int b);

// Elementwise product after projecting both sides to a common dim.
// Parameters: "<prefix>.wa" [da, d], "<prefix>.wb" [db, d].
void init_fuse_mult(Params& params, const std::string& prefix, int da, int db, int d);
int fuse_mult(nn::Graph& g, const StagedParams& staged, const std::string& prefix, int a,
              int b);

// Concat -> two pointwise conv layers over the feature axis -> one GRU
// running forward and one backward -> concatenated final states [1, 2h].
// The two directions hold separate weights.
void init_fuse_concat_gru(Params& params, const std::string& prefix, int channels,
                          int hidden);
int fuse_concat_gru(nn::Graph& g, const StagedParams& staged, const std::string& prefix,
                    int a, int b);

// Token sequences from both modalities, tagged with modality segment
// embeddings, through transformer layers; the first position's state
// is the joint feature.
void init_fuse_transformer(Params& params, const std::string& prefix, int d, int heads,
                           int ffn, int layers);
int fuse_transformer(nn::Graph& g, const StagedParams& staged, const std::string& prefix,
                     int a_tokens, int b_tokens, int heads, int layers);

// sigmoid(FC2(relu(FC1(h)))). Parameters: "<prefix>.w1" [d, dh],
// "<prefix>.b1", "<prefix>.w2" [dh, 1], "<prefix>.b2" [1, 1].
void init_classify_joint(Params& params, const std::string& prefix, int d, int dh);
int classify_joint(nn::Graph& g, const StagedParams& staged, const std::string& prefix,
                   int h_joint);

}  // namespace chartfc
