#pragma once
// Dense 2-D tensors and a tape-based reverse-mode autodiff graph. Values
// are kept in f64 so finite-difference checks stay well-conditioned;
// checkpoints store f32 (see model.hpp).
//
// A Graph owns every node created through it. Node ids are ints; parents
// always precede children, so backward is a reverse sweep over creation
// order. Graphs are rebuilt per batch and thrown away.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace chartfc::nn {

struct Tensor {
  std::vector<int> shape;  // always [rows, cols]
  std::vector<double> data;

  Tensor() : shape{0, 0} {}
  Tensor(int r, int c) : shape{r, c}, data(static_cast<size_t>(r) * c, 0.0) {}

  static Tensor zeros(int r, int c) { return Tensor(r, c); }
  static Tensor full(int r, int c, double v) {
    Tensor t(r, c);
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }
  static Tensor row(const std::vector<double>& v) {
    Tensor t(1, static_cast<int>(v.size()));
    t.data = v;
    return t;
  }

  int rows() const { return shape[0]; }
  int cols() const { return shape[1]; }
  int64_t numel() const { return static_cast<int64_t>(rows()) * cols(); }
  double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols() + c]; }
  double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols() + c]; }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool operator==(const Tensor&) const = default;
};

class Graph {
public:
  int leaf(Tensor t, bool requires_grad = false);

  const Tensor& value(int id) const { return nodes_[id].value; }
  const Tensor& grad(int id) const { return nodes_[id].grad; }
  size_t size() const { return nodes_.size(); }

  // Seeds the [1,1] node with gradient 1 and sweeps the tape backwards.
  void backward(int node);

  int add(int a, int b);
  int sub(int a, int b);
  int add_rowvec(int a, int b);  // [r,c] + [1,c]
  int mul(int a, int b);
  int scale(int a, double s);
  int matmul(int a, int b);
  int transpose(int a);
  int rows_lookup(int table, std::vector<int> ids);
  int layer_norm(int x, int gamma, int beta);  // rowwise, eps 1e-5
  int gelu(int x);
  int relu(int x);
  int sigmoid(int x);
  int tanh_op(int x);
  int softmax_rows(int x);
  int concat_cols(const std::vector<int>& parts);
  int slice_cols(int a, int c0, int c1);
  int concat_rows(const std::vector<int>& parts);
  int slice_rows(int a, int r0, int r1);
  int reverse_rows(int a);
  int mean_all(int a);
  int sum_all(int a);
  // p [n,1] against targets in {0,1}; probabilities clamped to
  // [1e-7, 1-1e-7]; returns the batch mean.
  int bce_mean(int p, std::vector<double> targets);
  // out[h[i]] += s[i] * x[i]; x is [1,n], h/s have length n.
  int count_sketch_op(int x, const std::vector<int>& h, const std::vector<int>& sign,
                      int d_out);
  // Circular convolution of two [1,n] vectors, computed via FFT when n
  // is a power of two.
  int circular_conv(int a, int b);

private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::function<void(Graph&, int)> back;  // accumulates into parents
  };

  int push(Tensor value, bool requires_grad, std::function<void(Graph&, int)> back);
  Tensor& grad_mut(int id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
};

// Raw helpers shared with non-graph code paths.
void fft_radix2(std::vector<double>& re, std::vector<double>& im, bool invert);
bool is_power_of_two(size_t n);
std::vector<double> circular_conv_direct(const std::vector<double>& a,
                                         const std::vector<double>& b);

}  // namespace chartfc::nn
