#include "chartfc/nn.hpp"

#include <algorithm>
#include <cmath>

#include "chartfc/errors.hpp"

namespace chartfc::nn {
namespace {

constexpr double kLnEps = 1e-5;
constexpr double kBceClamp = 1e-7;
constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kTwoPi = 6.283185307179586;

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeMismatch(what);
}

// c += a * b
void mm_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  int m = a.rows(), k = a.cols(), n = b.cols();
  for (int i = 0; i < m; ++i) {
    const double* arow = &a.data[static_cast<size_t>(i) * k];
    double* crow = &c.data[static_cast<size_t>(i) * n];
    for (int p = 0; p < k; ++p) {
      double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = &b.data[static_cast<size_t>(p) * n];
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c += a * b^T
void mm_nt_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  int m = a.rows(), k = a.cols(), n = b.rows();
  for (int i = 0; i < m; ++i) {
    const double* arow = &a.data[static_cast<size_t>(i) * k];
    double* crow = &c.data[static_cast<size_t>(i) * n];
    for (int j = 0; j < n; ++j) {
      const double* brow = &b.data[static_cast<size_t>(j) * k];
      double acc = 0;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

// c += a^T * b
void mm_tn_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  int m = a.cols(), k = a.rows(), n = b.cols();
  for (int p = 0; p < k; ++p) {
    const double* arow = &a.data[static_cast<size_t>(p) * m];
    const double* brow = &b.data[static_cast<size_t>(p) * n];
    for (int i = 0; i < m; ++i) {
      double av = arow[i];
      if (av == 0.0) continue;
      double* crow = &c.data[static_cast<size_t>(i) * n];
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

bool is_power_of_two(size_t n) { return n > 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<double>& re, std::vector<double>& im, bool invert) {
  size_t n = re.size();
  if (!is_power_of_two(n)) throw ShapeMismatch("fft length must be a power of two");
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = kTwoPi / static_cast<double>(len) * (invert ? 1 : -1);
    double wr = std::cos(ang), wi = std::sin(ang);
    for (size_t i = 0; i < n; i += len) {
      double cur_r = 1, cur_i = 0;
      for (size_t j = 0; j < len / 2; ++j) {
        double ur = re[i + j], ui = im[i + j];
        double vr = re[i + j + len / 2] * cur_r - im[i + j + len / 2] * cur_i;
        double vi = re[i + j + len / 2] * cur_i + im[i + j + len / 2] * cur_r;
        re[i + j] = ur + vr;
        im[i + j] = ui + vi;
        re[i + j + len / 2] = ur - vr;
        im[i + j + len / 2] = ui - vi;
        double nr = cur_r * wr - cur_i * wi;
        cur_i = cur_r * wi + cur_i * wr;
        cur_r = nr;
      }
    }
  }
  if (invert) {
    for (size_t i = 0; i < n; ++i) {
      re[i] /= static_cast<double>(n);
      im[i] /= static_cast<double>(n);
    }
  }
}

std::vector<double> circular_conv_direct(const std::vector<double>& a,
                                         const std::vector<double>& b) {
  size_t n = a.size();
  std::vector<double> out(n, 0.0);
  for (size_t k = 0; k < n; ++k)
    for (size_t i = 0; i < n; ++i) out[k] += a[i] * b[(k + n - i) % n];
  return out;
}

int Graph::push(Tensor value, bool requires_grad, std::function<void(Graph&, int)> back) {
  Node node;
  node.grad = Tensor::zeros(value.rows(), value.cols());
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  node.back = std::move(back);
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

int Graph::leaf(Tensor t, bool requires_grad) {
  return push(std::move(t), requires_grad, nullptr);
}

void Graph::backward(int node) {
  require(nodes_[node].value.numel() == 1, "backward needs a scalar node");
  grad_mut(node).data[0] = 1.0;
  for (int id = node; id >= 0; --id)
    if (nodes_[id].back) nodes_[id].back(*this, id);
}

int Graph::add(int a, int b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.same_shape(tb), "add shapes differ");
  Tensor out = ta;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += tb.data[i];
  return push(std::move(out), true, [a, b](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    Tensor& ga = g.grad_mut(a);
    Tensor& gb = g.grad_mut(b);
    for (size_t i = 0; i < go.data.size(); ++i) {
      ga.data[i] += go.data[i];
      gb.data[i] += go.data[i];
    }
  });
}

int Graph::sub(int a, int b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.same_shape(tb), "sub shapes differ");
  Tensor out = ta;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= tb.data[i];
  return push(std::move(out), true, [a, b](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    Tensor& ga = g.grad_mut(a);
    Tensor& gb = g.grad_mut(b);
    for (size_t i = 0; i < go.data.size(); ++i) {
      ga.data[i] += go.data[i];
      gb.data[i] -= go.data[i];
    }
  });
}

int Graph::add_rowvec(int a, int b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(tb.rows() == 1 && tb.cols() == ta.cols(), "add_rowvec needs a [1,c] bias");
  Tensor out = ta;
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) out(r, c) += tb(0, c);
  return push(std::move(out), true, [a, b](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    Tensor& ga = g.grad_mut(a);
    Tensor& gb = g.grad_mut(b);
    for (int r = 0; r < go.rows(); ++r)
      for (int c = 0; c < go.cols(); ++c) {
        ga(r, c) += go(r, c);
        gb(0, c) += go(r, c);
      }
  });
}

int Graph::mul(int a, int b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.same_shape(tb), "mul shapes differ");
  Tensor out = ta;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= tb.data[i];
  return push(std::move(out), true, [a, b](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    const Tensor& va = g.value(a);
    const Tensor& vb = g.value(b);
    Tensor& ga = g.grad_mut(a);
    Tensor& gb = g.grad_mut(b);
    for (size_t i = 0; i < go.data.size(); ++i) {
      ga.data[i] += go.data[i] * vb.data[i];
      gb.data[i] += go.data[i] * va.data[i];
    }
  });
}

int Graph::scale(int a, double s) {
  Tensor out = value(a);
  for (double& v : out.data) v *= s;
  return push(std::move(out), true, [a, s](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    Tensor& ga = g.grad_mut(a);
    for (size_t i = 0; i < go.data.size(); ++i) ga.data[i] += go.data[i] * s;
  });
}

int Graph::matmul(int a, int b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.cols() == tb.rows(), "matmul inner dims differ");
  Tensor out(ta.rows(), tb.cols());
  mm_acc(ta, tb, out);
  return push(std::move(out), true, [a, b](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    mm_nt_acc(go, g.value(b), g.grad_mut(a));  // dA += dC B^T
    mm_tn_acc(g.value(a), go, g.grad_mut(b));  // dB += A^T dC
  });
}

int Graph::transpose(int a) {
  const Tensor& ta = value(a);
  Tensor out(ta.cols(), ta.rows());
  for (int r = 0; r < ta.rows(); ++r)
    for (int c = 0; c < ta.cols(); ++c) out(c, r) = ta(r, c);
  return push(std::move(out), true, [a](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    Tensor& ga = g.grad_mut(a);
    for (int r = 0; r < go.rows(); ++r)
      for (int c = 0; c < go.cols(); ++c) ga(c, r) += go(r, c);
  });
}

int Graph::rows_lookup(int table, std::vector<int> ids) {
  const Tensor& tab = value(table);
  for (int id : ids)
    require(id >= 0 && id < tab.rows(), "lookup id outside the table");
  Tensor out(static_cast<int>(ids.size()), tab.cols());
  for (size_t r = 0; r < ids.size(); ++r)
    for (int c = 0; c < tab.cols(); ++c) out(static_cast<int>(r), c) = tab(ids[r], c);
  return push(std::move(out), true, [table, ids = std::move(ids)](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    Tensor& gt = g.grad_mut(table);
    for (size_t r = 0; r < ids.size(); ++r)
      for (int c = 0; c < go.cols(); ++c) gt(ids[r], c) += go(static_cast<int>(r), c);
  });
}

int Graph::layer_norm(int x, int gamma, int beta) {
  const Tensor& tx = value(x);
  const Tensor& tg = value(gamma);
  const Tensor& tb = value(beta);
  require(tg.rows() == 1 && tg.cols() == tx.cols(), "layer_norm gamma shape");
  require(tb.rows() == 1 && tb.cols() == tx.cols(), "layer_norm beta shape");
  int n = tx.cols();
  Tensor out(tx.rows(), n);
  std::vector<double> inv_std(tx.rows());
  Tensor xhat(tx.rows(), n);
  for (int r = 0; r < tx.rows(); ++r) {
    double mean = 0;
    for (int c = 0; c < n; ++c) mean += tx(r, c);
    mean /= n;
    double var = 0;
    for (int c = 0; c < n; ++c) {
      double d = tx(r, c) - mean;
      var += d * d;
    }
    var /= n;
    double is = 1.0 / std::sqrt(var + kLnEps);
    inv_std[r] = is;
    for (int c = 0; c < n; ++c) {
      xhat(r, c) = (tx(r, c) - mean) * is;
      out(r, c) = xhat(r, c) * tg(0, c) + tb(0, c);
    }
  }
  return push(std::move(out), true,
              [x, gamma, beta, xhat = std::move(xhat),
               inv_std = std::move(inv_std)](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    const Tensor& tg = g.value(gamma);
    Tensor& gx = g.grad_mut(x);
    Tensor& gg = g.grad_mut(gamma);
    Tensor& gb = g.grad_mut(beta);
    int n = go.cols();
    for (int r = 0; r < go.rows(); ++r) {
      double sum_dxhat = 0, sum_dxhat_xhat = 0;
      for (int c = 0; c < n; ++c) {
        double dxhat = go(r, c) * tg(0, c);
        sum_dxhat += dxhat;
        sum_dxhat_xhat += dxhat * xhat(r, c);
        gg(0, c) += go(r, c) * xhat(r, c);
        gb(0, c) += go(r, c);
      }
      for (int c = 0; c < n; ++c) {
        double dxhat = go(r, c) * tg(0, c);
        gx(r, c) += inv_std[r] *
                    (dxhat - sum_dxhat / n - xhat(r, c) * sum_dxhat_xhat / n);
      }
    }
  });
}

int Graph::gelu(int x) {
  const Tensor& tx = value(x);
  Tensor out = tx;
  for (double& v : out.data) v = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  return push(std::move(out), true, [x](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    const Tensor& vx = g.value(x);
    Tensor& gx = g.grad_mut(x);
    for (size_t i = 0; i < go.data.size(); ++i) {
      double v = vx.data[i];
      double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
      double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
      gx.data[i] += go.data[i] * (cdf + v * pdf);
    }
  });
}

int Graph::relu(int x) {
  Tensor out = value(x);
  for (double& v : out.data) v = v > 0 ? v : 0;
  return push(std::move(out), true, [x](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    const Tensor& vx = g.value(x);
    Tensor& gx = g.grad_mut(x);
    for (size_t i = 0; i < go.data.size(); ++i)
      if (vx.data[i] > 0) gx.data[i] += go.data[i];
  });
}

int Graph::sigmoid(int x) {
  Tensor out = value(x);
  for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
  return push(std::move(out), true, [x](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    const Tensor& vy = g.value(self);
    Tensor& gx = g.grad_mut(x);
    for (size_t i = 0; i < go.data.size(); ++i) {
      double y = vy.data[i];
      gx.data[i] += go.data[i] * y * (1.0 - y);
    }
  });
}

int Graph::tanh_op(int x) {
  Tensor out = value(x);
  for (double& v : out.data) v = std::tanh(v);
  return push(std::move(out), true, [x](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    const Tensor& vy = g.value(self);
    Tensor& gx = g.grad_mut(x);
    for (size_t i = 0; i < go.data.size(); ++i)
      gx.data[i] += go.data[i] * (1.0 - vy.data[i] * vy.data[i]);
  });
}

int Graph::softmax_rows(int x) {
  const Tensor& tx = value(x);
  Tensor out(tx.rows(), tx.cols());
  for (int r = 0; r < tx.rows(); ++r) {
    double mx = tx(r, 0);
    for (int c = 1; c < tx.cols(); ++c) mx = std::max(mx, tx(r, c));
    double sum = 0;
    for (int c = 0; c < tx.cols(); ++c) {
      out(r, c) = std::exp(tx(r, c) - mx);
      sum += out(r, c);
    }
    for (int c = 0; c < tx.cols(); ++c) out(r, c) /= sum;
  }
  return push(std::move(out), true, [x](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    const Tensor& p = g.value(self);
    Tensor& gx = g.grad_mut(x);
    for (int r = 0; r < go.rows(); ++r) {
      double dot = 0;
      for (int c = 0; c < go.cols(); ++c) dot += go(r, c) * p(r, c);
      for (int c = 0; c < go.cols(); ++c)
        gx(r, c) += p(r, c) * (go(r, c) - dot);
    }
  });
}

int Graph::concat_cols(const std::vector<int>& parts) {
  require(!parts.empty(), "concat_cols needs inputs");
  int rows = value(parts[0]).rows();
  int total = 0;
  for (int p : parts) {
    require(value(p).rows() == rows, "concat_cols row counts differ");
    total += value(p).cols();
  }
  Tensor out(rows, total);
  int off = 0;
  for (int p : parts) {
    const Tensor& tp = value(p);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < tp.cols(); ++c) out(r, off + c) = tp(r, c);
    off += tp.cols();
  }
  return push(std::move(out), true, [parts](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    int off = 0;
    for (int p : parts) {
      Tensor& gp = g.grad_mut(p);
      for (int r = 0; r < go.rows(); ++r)
        for (int c = 0; c < gp.cols(); ++c) gp(r, c) += go(r, off + c);
      off += gp.cols();
    }
  });
}

int Graph::slice_cols(int a, int c0, int c1) {
  const Tensor& ta = value(a);
  require(0 <= c0 && c0 < c1 && c1 <= ta.cols(), "slice_cols bounds");
  Tensor out(ta.rows(), c1 - c0);
  for (int r = 0; r < ta.rows(); ++r)
    for (int c = c0; c < c1; ++c) out(r, c - c0) = ta(r, c);
  return push(std::move(out), true, [a, c0](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    Tensor& ga = g.grad_mut(a);
    for (int r = 0; r < go.rows(); ++r)
      for (int c = 0; c < go.cols(); ++c) ga(r, c0 + c) += go(r, c);
  });
}

int Graph::concat_rows(const std::vector<int>& parts) {
  require(!parts.empty(), "concat_rows needs inputs");
  int cols = value(parts[0]).cols();
  int total = 0;
  for (int p : parts) {
    require(value(p).cols() == cols, "concat_rows col counts differ");
    total += value(p).rows();
  }
  Tensor out(total, cols);
  int off = 0;
  for (int p : parts) {
    const Tensor& tp = value(p);
    for (int r = 0; r < tp.rows(); ++r)
      for (int c = 0; c < cols; ++c) out(off + r, c) = tp(r, c);
    off += tp.rows();
  }
  return push(std::move(out), true, [parts](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    int off = 0;
    for (int p : parts) {
      Tensor& gp = g.grad_mut(p);
      for (int r = 0; r < gp.rows(); ++r)
        for (int c = 0; c < go.cols(); ++c) gp(r, c) += go(off + r, c);
      off += gp.rows();
    }
  });
}

int Graph::slice_rows(int a, int r0, int r1) {
  const Tensor& ta = value(a);
  require(0 <= r0 && r0 < r1 && r1 <= ta.rows(), "slice_rows bounds");
  Tensor out(r1 - r0, ta.cols());
  for (int r = r0; r < r1; ++r)
    for (int c = 0; c < ta.cols(); ++c) out(r - r0, c) = ta(r, c);
  return push(std::move(out), true, [a, r0](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    Tensor& ga = g.grad_mut(a);
    for (int r = 0; r < go.rows(); ++r)
      for (int c = 0; c < go.cols(); ++c) ga(r0 + r, c) += go(r, c);
  });
}

int Graph::reverse_rows(int a) {
  const Tensor& ta = value(a);
  Tensor out(ta.rows(), ta.cols());
  for (int r = 0; r < ta.rows(); ++r)
    for (int c = 0; c < ta.cols(); ++c) out(ta.rows() - 1 - r, c) = ta(r, c);
  return push(std::move(out), true, [a](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    Tensor& ga = g.grad_mut(a);
    int rows = go.rows();
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < go.cols(); ++c) ga(rows - 1 - r, c) += go(r, c);
  });
}

int Graph::mean_all(int a) {
  const Tensor& ta = value(a);
  double sum = 0;
  for (double v : ta.data) sum += v;
  double inv = 1.0 / static_cast<double>(ta.numel());
  Tensor out(1, 1);
  out.data[0] = sum * inv;
  return push(std::move(out), true, [a, inv](Graph& g, int self) {
    double go = g.grad(self).data[0];
    Tensor& ga = g.grad_mut(a);
    for (double& v : ga.data) v += go * inv;
  });
}

int Graph::sum_all(int a) {
  const Tensor& ta = value(a);
  double sum = 0;
  for (double v : ta.data) sum += v;
  Tensor out(1, 1);
  out.data[0] = sum;
  return push(std::move(out), true, [a](Graph& g, int self) {
    double go = g.grad(self).data[0];
    Tensor& ga = g.grad_mut(a);
    for (double& v : ga.data) v += go;
  });
}

int Graph::bce_mean(int p, std::vector<double> targets) {
  const Tensor& tp = value(p);
  require(tp.cols() == 1 && tp.rows() == static_cast<int>(targets.size()),
          "bce needs [n,1] probabilities matching targets");
  int n = tp.rows();
  double loss = 0;
  std::vector<double> clamped(n);
  for (int i = 0; i < n; ++i) {
    double q = std::clamp(tp(i, 0), kBceClamp, 1.0 - kBceClamp);
    clamped[i] = q;
    loss -= targets[i] * std::log(q) + (1.0 - targets[i]) * std::log(1.0 - q);
  }
  Tensor out(1, 1);
  out.data[0] = loss / n;
  return push(std::move(out), true,
              [p, targets = std::move(targets), clamped = std::move(clamped)](Graph& g,
                                                                              int self) {
    double go = g.grad(self).data[0];
    const Tensor& tp = g.value(p);
    Tensor& gp = g.grad_mut(p);
    int n = tp.rows();
    for (int i = 0; i < n; ++i) {
      double q = clamped[i];
      if (tp(i, 0) != q) continue;  // clamped flat region
      gp(i, 0) += go * (-targets[i] / q + (1.0 - targets[i]) / (1.0 - q)) / n;
    }
  });
}

int Graph::count_sketch_op(int x, const std::vector<int>& h, const std::vector<int>& sign,
                           int d_out) {
  const Tensor& tx = value(x);
  require(tx.rows() == 1, "count_sketch expects a [1,n] vector");
  require(h.size() == static_cast<size_t>(tx.cols()) && sign.size() == h.size(),
          "count_sketch hash length mismatch");
  Tensor out(1, d_out);
  for (int i = 0; i < tx.cols(); ++i) {
    require(h[i] >= 0 && h[i] < d_out, "count_sketch hash out of range");
    out(0, h[i]) += sign[i] * tx(0, i);
  }
  return push(std::move(out), true, [x, h, sign](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    Tensor& gx = g.grad_mut(x);
    for (int i = 0; i < gx.cols(); ++i) gx(0, i) += sign[i] * go(0, h[i]);
  });
}

int Graph::circular_conv(int a, int b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.rows() == 1 && tb.rows() == 1 && ta.cols() == tb.cols(),
          "circular_conv needs two [1,n] vectors of one length");
  size_t n = static_cast<size_t>(ta.cols());
  Tensor out(1, ta.cols());
  if (is_power_of_two(n)) {
    std::vector<double> ar(ta.data), ai(n, 0.0), br(tb.data), bi(n, 0.0);
    fft_radix2(ar, ai, false);
    fft_radix2(br, bi, false);
    for (size_t i = 0; i < n; ++i) {
      double re = ar[i] * br[i] - ai[i] * bi[i];
      double im = ar[i] * bi[i] + ai[i] * br[i];
      ar[i] = re;
      ai[i] = im;
    }
    fft_radix2(ar, ai, true);
    out.data = std::move(ar);
  } else {
    out.data = circular_conv_direct(ta.data, tb.data);
  }
  return push(std::move(out), true, [a, b](Graph& g, int self) {
    const Tensor& go = g.grad(self);
    const Tensor& va = g.value(a);
    const Tensor& vb = g.value(b);
    Tensor& ga = g.grad_mut(a);
    Tensor& gb = g.grad_mut(b);
    size_t n = go.data.size();
    // d out[k] / d a[i] = b[(k-i) mod n]; correlation with the gradient.
    for (size_t i = 0; i < n; ++i) {
      double acc_a = 0, acc_b = 0;
      for (size_t k = 0; k < n; ++k) {
        acc_a += go.data[k] * vb.data[(k + n - i) % n];
        acc_b += go.data[k] * va.data[(k + n - i) % n];
      }
      ga.data[i] += acc_a;
      gb.data[i] += acc_b;
    }
  });
}

}  // namespace chartfc::nn
