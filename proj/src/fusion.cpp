#include "chartfc/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "chartfc/errors.hpp"
#include "chartfc/rng.hpp"

namespace chartfc {

using nn::Graph;
using nn::Tensor;

SketchSpec SketchSpec::make(int d_in, int d_out, uint64_t seed) {
  if (d_in < 1 || d_out < 1) throw ShapeMismatch("sketch dimensions must be positive");
  if (d_out >= (1 << 24))
    throw ShapeMismatch("sketch output dim too large to store exactly");
  SketchSpec spec;
  spec.d_in = d_in;
  spec.d_out = d_out;
  spec.seed = seed;
  Rng rng(seed);
  spec.h.reserve(static_cast<size_t>(d_in));
  spec.sign.reserve(static_cast<size_t>(d_in));
  for (int i = 0; i < d_in; ++i) {
    spec.h.push_back(static_cast<int>(rng.below(static_cast<uint64_t>(d_out))));
    spec.sign.push_back(rng.bernoulli(0.5) ? 1 : -1);
  }
  return spec;
}

// Stored as integer-valued tensors; every entry is exact in f32. The
// seed is split into 16-bit limbs for the same reason.
void SketchSpec::add_to(Params& params, const std::string& prefix) const {
  Tensor th = Tensor::zeros(1, static_cast<size_t>(d_in));
  Tensor ts = Tensor::zeros(1, static_cast<size_t>(d_in));
  for (int i = 0; i < d_in; ++i) {
    th.data[static_cast<size_t>(i)] = static_cast<double>(h[static_cast<size_t>(i)]);
    ts.data[static_cast<size_t>(i)] = static_cast<double>(sign[static_cast<size_t>(i)]);
  }
  Tensor meta = Tensor::zeros(1, 5);
  meta.data[0] = static_cast<double>(d_out);
  for (int i = 0; i < 4; ++i)
    meta.data[static_cast<size_t>(1 + i)] =
        static_cast<double>((seed >> (16 * i)) & 0xffffULL);
  params.add(prefix + ".sketch_h", std::move(th));
  params.add(prefix + ".sketch_sign", std::move(ts));
  params.add(prefix + ".sketch_meta", std::move(meta));
}

SketchSpec SketchSpec::from_params(const Params& params, const std::string& prefix) {
  const Tensor& th = params.get(prefix + ".sketch_h");
  const Tensor& ts = params.get(prefix + ".sketch_sign");
  const Tensor& meta = params.get(prefix + ".sketch_meta");
  if (th.rows() != 1 || ts.rows() != 1 || !th.same_shape(ts) || meta.rows() != 1 ||
      meta.cols() != 5)
    throw ShapeMismatch("malformed sketch tensors under " + prefix);
  SketchSpec spec;
  spec.d_in = static_cast<int>(th.cols());
  spec.d_out = static_cast<int>(meta.data[0]);
  if (spec.d_out < 1) throw ShapeMismatch("malformed sketch output dim");
  spec.seed = 0;
  for (int i = 0; i < 4; ++i)
    spec.seed |= static_cast<uint64_t>(meta.data[static_cast<size_t>(1 + i)])
                 << (16 * i);
  spec.h.resize(static_cast<size_t>(spec.d_in));
  spec.sign.resize(static_cast<size_t>(spec.d_in));
  for (size_t i = 0; i < th.cols(); ++i) {
    spec.h[i] = static_cast<int>(th.data[i]);
    spec.sign[i] = static_cast<int>(ts.data[i]);
    if (spec.h[i] < 0 || spec.h[i] >= spec.d_out ||
        (spec.sign[i] != 1 && spec.sign[i] != -1))
      throw ShapeMismatch("malformed sketch hashes under " + prefix);
  }
  return spec;
}

std::vector<double> count_sketch(const std::vector<double>& x, const SketchSpec& spec) {
  if (static_cast<int>(x.size()) != spec.d_in)
    throw ShapeMismatch("count_sketch input dim mismatch");
  std::vector<double> out(static_cast<size_t>(spec.d_out), 0.0);
  for (size_t i = 0; i < x.size(); ++i)
    out[static_cast<size_t>(spec.h[i])] += static_cast<double>(spec.sign[i]) * x[i];
  return out;
}

std::vector<double> mcb_fuse(const std::vector<double>& a, const std::vector<double>& b,
                             const SketchSpec& spec_a, const SketchSpec& spec_b,
                             bool signed_sqrt_l2) {
  if (spec_a.d_out != spec_b.d_out)
    throw ShapeMismatch("sketch output dims must match for fusion");
  const std::vector<double> sa = count_sketch(a, spec_a);
  const std::vector<double> sb = count_sketch(b, spec_b);
  const size_t n = sa.size();
  std::vector<double> out;
  if (nn::is_power_of_two(n) && n > 1) {
    std::vector<double> re_a(sa), im_a(n, 0.0), re_b(sb), im_b(n, 0.0);
    nn::fft_radix2(re_a, im_a, false);
    nn::fft_radix2(re_b, im_b, false);
    for (size_t k = 0; k < n; ++k) {
      const double re = re_a[k] * re_b[k] - im_a[k] * im_b[k];
      const double im = re_a[k] * im_b[k] + im_a[k] * re_b[k];
      re_a[k] = re;
      im_a[k] = im;
    }
    nn::fft_radix2(re_a, im_a, true);
    out = std::move(re_a);
  } else {
    out = nn::circular_conv_direct(sa, sb);
  }
  if (signed_sqrt_l2) {
    double norm_sq = 0.0;
    for (double& v : out) {
      v = (v >= 0 ? 1.0 : -1.0) * std::sqrt(std::fabs(v));
      norm_sq += v * v;
    }
    const double norm = std::sqrt(norm_sq);
    if (norm > 0)
      for (double& v : out) v /= norm;
  }
  return out;
}

int count_sketch_node(Graph& g, int x, const SketchSpec& spec) {
  if (g.value(x).rows() != 1 || static_cast<int>(g.value(x).cols()) != spec.d_in)
    throw ShapeMismatch("count_sketch input dim mismatch");
  return g.count_sketch_op(x, spec.h, spec.sign, spec.d_out);
}

int mcb_fuse_node(Graph& g, int a, int b, const SketchSpec& spec_a,
                  const SketchSpec& spec_b) {
  if (spec_a.d_out != spec_b.d_out)
    throw ShapeMismatch("sketch output dims must match for fusion");
  return g.circular_conv(count_sketch_node(g, a, spec_a),
                         count_sketch_node(g, b, spec_b));
}

void init_fc_vision(Params& params, const std::string& prefix, int d) {
  const size_t in = static_cast<size_t>(kVisionW) * static_cast<size_t>(kVisionH);
  params.add(prefix + ".w", Tensor::zeros(in, static_cast<size_t>(d)));
  params.add(prefix + ".b", Tensor::zeros(1, static_cast<size_t>(d)));
}

int fc_vision_encode(Graph& g, const StagedParams& staged, const std::string& prefix,
                     const Image& image) {
  const std::vector<double> pixels = image.grayscale_downsample(kVisionW, kVisionH);
  Tensor input = Tensor::zeros(1, pixels.size());
  input.data = pixels;
  const int x = g.leaf(std::move(input), false);
  return g.add_rowvec(g.matmul(x, staged.node_of(prefix + ".w")),
                      staged.node_of(prefix + ".b"));
}

int fc_vision_encode_ppm(Graph& g, const StagedParams& staged, const std::string& prefix,
                         const std::vector<uint8_t>& ppm) {
  return fc_vision_encode(g, staged, prefix, Image::decode_ppm(ppm));
}

void init_embedder(Params& params, const std::string& prefix, int vocab, int max_len,
                   int d) {
  const size_t dd = static_cast<size_t>(d);
  params.add(prefix + ".word", Tensor::zeros(static_cast<size_t>(vocab), dd));
  params.add(prefix + ".pos", Tensor::zeros(static_cast<size_t>(max_len), dd));
  params.add(prefix + ".ln_g", Tensor::full(1, dd, 1.0));
  params.add(prefix + ".ln_b", Tensor::zeros(1, dd));
}

int embedder_text_encode(Graph& g, const StagedParams& staged, const std::string& prefix,
                         const std::vector<int>& token_ids) {
  if (token_ids.empty()) throw ShapeMismatch("embedder needs at least one token");
  std::vector<int> positions(token_ids.size());
  for (size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<int>(i);
  const int words = g.rows_lookup(staged.node_of(prefix + ".word"), token_ids);
  const int pos = g.rows_lookup(staged.node_of(prefix + ".pos"), positions);
  return g.layer_norm(g.add(words, pos), staged.node_of(prefix + ".ln_g"),
                      staged.node_of(prefix + ".ln_b"));
}

int fuse_concat(Graph& g, int a, int b) {
  if (g.value(a).rows() != 1 || g.value(b).rows() != 1)
    throw ShapeMismatch("fuse_concat expects [1,d] features");
  return g.concat_cols({a, b});
}

void init_fuse_mult(Params& params, const std::string& prefix, int da, int db, int d) {
  params.add(prefix + ".wa",
             Tensor::zeros(static_cast<size_t>(da), static_cast<size_t>(d)));
  params.add(prefix + ".wb",
             Tensor::zeros(static_cast<size_t>(db), static_cast<size_t>(d)));
}

int fuse_mult(Graph& g, const StagedParams& staged, const std::string& prefix, int a,
              int b) {
  return g.mul(g.matmul(a, staged.node_of(prefix + ".wa")),
               g.matmul(b, staged.node_of(prefix + ".wb")));
}

void init_fuse_concat_gru(Params& params, const std::string& prefix, int channels,
                          int hidden) {
  const size_t c = static_cast<size_t>(channels);
  params.add(prefix + ".conv1.w", Tensor::zeros(1, c));
  params.add(prefix + ".conv1.b", Tensor::zeros(1, c));
  params.add(prefix + ".conv2.w", Tensor::zeros(c, c));
  params.add(prefix + ".conv2.b", Tensor::zeros(1, c));
  init_gru(params, prefix + ".gru_f", channels, hidden);
  init_gru(params, prefix + ".gru_b", channels, hidden);
}

int fuse_concat_gru(Graph& g, const StagedParams& staged, const std::string& prefix,
                    int a, int b) {
  const int hidden = static_cast<int>(g.value(staged.node_of(prefix + ".gru_f.bz")).cols());
  // The fused vector becomes a length-L sequence of 1-channel steps.
  const int seq = g.transpose(fuse_concat(g, a, b));
  const int c1 = g.relu(g.add_rowvec(g.matmul(seq, staged.node_of(prefix + ".conv1.w")),
                                     staged.node_of(prefix + ".conv1.b")));
  const int c2 = g.relu(g.add_rowvec(g.matmul(c1, staged.node_of(prefix + ".conv2.w")),
                                     staged.node_of(prefix + ".conv2.b")));
  const int L = static_cast<int>(g.value(c2).rows());
  int hf = g.leaf(Tensor::zeros(1, static_cast<size_t>(hidden)), false);
  int hb = g.leaf(Tensor::zeros(1, static_cast<size_t>(hidden)), false);
  for (int t = 0; t < L; ++t) {
    hf = gru_cell(g, staged, prefix + ".gru_f", g.slice_rows(c2, t, t + 1), hf);
    const int rt = L - 1 - t;
    hb = gru_cell(g, staged, prefix + ".gru_b", g.slice_rows(c2, rt, rt + 1), hb);
  }
  return g.concat_cols({hf, hb});
}

void init_fuse_transformer(Params& params, const std::string& prefix, int d, int heads,
                           int ffn, int layers) {
  if (d % heads != 0)
    throw ShapeMismatch("fusion transformer dim must be divisible by heads");
  params.add(prefix + ".seg", Tensor::zeros(2, static_cast<size_t>(d)));
  for (int l = 0; l < layers; ++l)
    init_transformer_layer(params, prefix + ".l" + std::to_string(l), d, ffn);
}

int fuse_transformer(Graph& g, const StagedParams& staged, const std::string& prefix,
                     int a_tokens, int b_tokens, int heads, int layers) {
  const Tensor& ta = g.value(a_tokens);
  const Tensor& tb = g.value(b_tokens);
  if (ta.cols() != tb.cols())
    throw ShapeMismatch("modality token features must share one dim");
  const int seg = staged.node_of(prefix + ".seg");
  const int a_tagged =
      g.add(a_tokens, g.rows_lookup(seg, std::vector<int>(ta.rows(), 0)));
  const int b_tagged =
      g.add(b_tokens, g.rows_lookup(seg, std::vector<int>(tb.rows(), 1)));
  int x = g.concat_rows({a_tagged, b_tagged});
  const int d = static_cast<int>(ta.cols());
  for (int l = 0; l < layers; ++l)
    x = transformer_layer(g, staged, prefix + ".l" + std::to_string(l), x, d, heads);
  return g.slice_rows(x, 0, 1);
}

void init_classify_joint(Params& params, const std::string& prefix, int d, int dh) {
  params.add(prefix + ".w1",
             Tensor::zeros(static_cast<size_t>(d), static_cast<size_t>(dh)));
  params.add(prefix + ".b1", Tensor::zeros(1, static_cast<size_t>(dh)));
  params.add(prefix + ".w2", Tensor::zeros(static_cast<size_t>(dh), 1));
  params.add(prefix + ".b2", Tensor::zeros(1, 1));
}

int classify_joint(Graph& g, const StagedParams& staged, const std::string& prefix,
                   int h_joint) {
  const int inner = g.relu(g.add_rowvec(g.matmul(h_joint, staged.node_of(prefix + ".w1")),
                                        staged.node_of(prefix + ".b1")));
  return g.sigmoid(g.add_rowvec(g.matmul(inner, staged.node_of(prefix + ".w2")),
                                staged.node_of(prefix + ".b2")));
}

}  // namespace chartfc
