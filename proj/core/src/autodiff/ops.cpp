/* Copyright 2026 The LS-Transducer Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#include "lst/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lst/common.hpp"

namespace lst::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const Matrix& a, const Matrix& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + a.shape_string() +
                       " and " + b.shape_string());
}

enum class Broadcast { kNone, kRow, kColumn };

Broadcast broadcast_kind(const char* op, const Matrix& a, const Matrix& b) {
  if (a.same_shape(b)) return Broadcast::kNone;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::kRow;
  if (b.cols() == 1 && b.rows() == a.rows()) return Broadcast::kColumn;
  shape_error(op, a, b);
}

inline std::size_t bindex(Broadcast kind, std::size_t r, std::size_t c, std::size_t cols) {
  switch (kind) {
    case Broadcast::kRow:
      return c;
    case Broadcast::kColumn:
      return r;
    default:
      return r * cols + c;
  }
}

// Adds `g` into the gradient of `parent`, reducing over broadcast axes.
void accumulate(Node& parent, const Matrix& g, Broadcast kind) {
  if (!parent.requires_grad) return;
  Matrix& pg = parent.ensure_grad();
  const std::size_t cols = g.cols();
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < cols; ++c) pg[bindex(kind, r, c, cols)] += g(r, c);
}

template <typename F>
Value unary(const Value& a, const char* op, F forward_fn,
            std::function<void(Node&)> bwd) {
  Matrix out(a.rows(), a.cols());
  const Matrix& x = a.data();
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = forward_fn(x[i]);
  return make_result(std::move(out), op, {a}, std::move(bwd));
}

}  // namespace

Value matmul(const Value& a, const Value& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a.data(), b.data());
  return make_result(ad::matmul(a.data(), b.data()), "matmul", {a, b}, [](Node& out) {
    Node& pa = *out.parents[0];
    Node& pb = *out.parents[1];
    if (pa.requires_grad) pa.ensure_grad() += ad::matmul_nt(out.grad, pb.data);
    if (pb.requires_grad) pb.ensure_grad() += ad::matmul_tn(pa.data, out.grad);
  });
}

Value matmul_nt(const Value& a, const Value& b) {
  if (a.cols() != b.cols()) shape_error("matmul_nt", a.data(), b.data());
  return make_result(ad::matmul_nt(a.data(), b.data()), "matmul_nt", {a, b}, [](Node& out) {
    Node& pa = *out.parents[0];
    Node& pb = *out.parents[1];
    if (pa.requires_grad) pa.ensure_grad() += ad::matmul(out.grad, pb.data);
    if (pb.requires_grad) pb.ensure_grad() += ad::matmul_tn(out.grad, pa.data);
  });
}

Value transpose(const Value& a) {
  return make_result(ad::transpose(a.data()), "transpose", {a}, [](Node& out) {
    Node& pa = *out.parents[0];
    pa.ensure_grad() += ad::transpose(out.grad);
  });
}

Value add(const Value& a, const Value& b) {
  const Broadcast kind = broadcast_kind("add", a.data(), b.data());
  Matrix out = a.data();
  const Matrix& y = b.data();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += y[bindex(kind, r, c, out.cols())];
  return make_result(std::move(out), "add", {a, b}, [kind](Node& out) {
    accumulate(*out.parents[0], out.grad, Broadcast::kNone);
    accumulate(*out.parents[1], out.grad, kind);
  });
}

Value sub(const Value& a, const Value& b) {
  const Broadcast kind = broadcast_kind("sub", a.data(), b.data());
  Matrix out = a.data();
  const Matrix& y = b.data();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) -= y[bindex(kind, r, c, out.cols())];
  return make_result(std::move(out), "sub", {a, b}, [kind](Node& out) {
    accumulate(*out.parents[0], out.grad, Broadcast::kNone);
    Matrix neg = out.grad;
    for (double& v : neg.values()) v = -v;
    accumulate(*out.parents[1], neg, kind);
  });
}

Value mul(const Value& a, const Value& b) {
  const Broadcast kind = broadcast_kind("mul", a.data(), b.data());
  Matrix out = a.data();
  const Matrix& y = b.data();
  const std::size_t cols = out.cols();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < cols; ++c) out(r, c) *= y[bindex(kind, r, c, cols)];
  return make_result(std::move(out), "mul", {a, b}, [kind](Node& out) {
    Node& pa = *out.parents[0];
    Node& pb = *out.parents[1];
    const std::size_t cols = out.grad.cols();
    if (pa.requires_grad) {
      Matrix g = out.grad;
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < cols; ++c) g(r, c) *= pb.data[bindex(kind, r, c, cols)];
      accumulate(pa, g, Broadcast::kNone);
    }
    if (pb.requires_grad) {
      Matrix g = out.grad;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= pa.data[i];
      accumulate(pb, g, kind);
    }
  });
}

Value scale(const Value& a, double s) {
  return unary(a, "scale", [s](double x) { return x * s; }, [s](Node& out) {
    Matrix& g = out.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * out.grad[i];
  });
}

Value add_scalar(const Value& a, double s) {
  return unary(a, "add_scalar", [s](double x) { return x + s; }, [](Node& out) {
    out.parents[0]->ensure_grad() += out.grad;
  });
}

Value sigmoid(const Value& a) {
  return unary(
      a, "sigmoid", [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](Node& out) {
        Matrix& g = out.parents[0]->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = out.data[i];
          g[i] += out.grad[i] * y * (1.0 - y);
        }
      });
}

Value tanh(const Value& a) {
  return unary(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](Node& out) {
        Matrix& g = out.parents[0]->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = out.data[i];
          g[i] += out.grad[i] * (1.0 - y * y);
        }
      });
}

Value relu(const Value& a) {
  return unary(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](Node& out) {
        Node& p = *out.parents[0];
        Matrix& g = p.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i)
          if (p.data[i] > 0.0) g[i] += out.grad[i];
      });
}

namespace {
constexpr double kGeluK = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluC = 0.044715;
}  // namespace

Value gelu(const Value& a) {
  return unary(
      a, "gelu",
      [](double x) { return 0.5 * x * (1.0 + std::tanh(kGeluK * (x + kGeluC * x * x * x))); },
      [](Node& out) {
        Node& p = *out.parents[0];
        Matrix& g = p.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double x = p.data[i];
          const double t = std::tanh(kGeluK * (x + kGeluC * x * x * x));
          const double d = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluK * (1.0 + 3.0 * kGeluC * x * x);
          g[i] += out.grad[i] * d;
        }
      });
}

Value abs(const Value& a) {
  return unary(
      a, "abs", [](double x) { return std::fabs(x); },
      [](Node& out) {
        Node& p = *out.parents[0];
        Matrix& g = p.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double x = p.data[i];
          // Subgradient 0 at the kink.
          const double sign = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
          g[i] += out.grad[i] * sign;
        }
      });
}

namespace {

// Row-wise softmax with max subtraction. Rows whose entries are all -inf
// produce all zeros.
Matrix softmax_forward(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row_span(r);
    auto out = y.row_span(r);
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : in) mx = std::max(mx, v);
    if (mx == -std::numeric_limits<double>::infinity()) continue;
    double s = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      out[c] = std::exp(in[c] - mx);
      s += out[c];
    }
    for (double& v : out) v /= s;
  }
  return y;
}

}  // namespace

Value softmax_rows(const Value& a) {
  return make_result(softmax_forward(a.data()), "softmax_rows", {a}, [](Node& out) {
    Matrix& g = out.parents[0]->ensure_grad();
    for (std::size_t r = 0; r < out.data.rows(); ++r) {
      auto y = out.data.row_span(r);
      auto gy = out.grad.row_span(r);
      double dot = 0.0;
      for (std::size_t c = 0; c < y.size(); ++c) dot += y[c] * gy[c];
      for (std::size_t c = 0; c < y.size(); ++c) g(r, c) += y[c] * (gy[c] - dot);
    }
  });
}

Value log_softmax_rows(const Value& a) {
  const Matrix& x = a.data();
  Matrix y(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double lse = log_sum_exp(x.row_span(r));
    for (std::size_t c = 0; c < x.cols(); ++c) y(r, c) = x(r, c) - lse;
  }
  return make_result(std::move(y), "log_softmax_rows", {a}, [](Node& out) {
    Matrix& g = out.parents[0]->ensure_grad();
    for (std::size_t r = 0; r < out.data.rows(); ++r) {
      auto ly = out.data.row_span(r);
      auto gy = out.grad.row_span(r);
      double total = 0.0;
      for (double v : gy) total += v;
      for (std::size_t c = 0; c < ly.size(); ++c) g(r, c) += gy[c] - std::exp(ly[c]) * total;
    }
  });
}

Value embedding(const Value& table, std::span<const int> ids) {
  const std::size_t cols = table.cols();
  Matrix out(ids.size(), cols);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= table.rows()) {
      throw DimensionError("embedding: id " + std::to_string(ids[i]) +
                           " out of range for table " + table.data().shape_string());
    }
    auto src = table.data().row_span(static_cast<std::size_t>(ids[i]));
    std::copy(src.begin(), src.end(), out.row_span(i).begin());
  }
  std::vector<int> saved(ids.begin(), ids.end());
  return make_result(std::move(out), "embedding", {table}, [saved](Node& out) {
    Matrix& g = out.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < saved.size(); ++i) {
      auto dst = g.row_span(static_cast<std::size_t>(saved[i]));
      auto src = out.grad.row_span(i);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
  });
}

Value concat_cols(const std::vector<Value>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no operands");
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) shape_error("concat_cols", parts.front().data(), p.data());
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < p.cols(); ++c) out(r, off + c) = p(r, c);
    off += p.cols();
  }
  return make_result(std::move(out), "concat_cols", parts, [offsets](Node& out) {
    for (std::size_t k = 0; k < out.parents.size(); ++k) {
      Node& p = *out.parents[k];
      if (!p.requires_grad) continue;
      Matrix& g = p.ensure_grad();
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) g(r, c) += out.grad(r, offsets[k] + c);
    }
  });
}

Value concat_rows(const std::vector<Value>& parts) {
  if (parts.empty()) throw ContractError("concat_rows: no operands");
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) shape_error("concat_rows", parts.front().data(), p.data());
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    std::copy(p.data().values().begin(), p.data().values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(off * cols));
    off += p.rows();
  }
  return make_result(std::move(out), "concat_rows", parts, [offsets](Node& out) {
    const std::size_t cols = out.grad.cols();
    for (std::size_t k = 0; k < out.parents.size(); ++k) {
      Node& p = *out.parents[k];
      if (!p.requires_grad) continue;
      Matrix& g = p.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += out.grad[offsets[k] * cols + i];
    }
  });
}

Value slice_cols(const Value& a, std::size_t begin, std::size_t end) {
  if (begin > end || end > a.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") out of range for " + a.data().shape_string());
  }
  Matrix out(a.rows(), end - begin);
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = begin; c < end; ++c) out(r, c - begin) = a(r, c);
  return make_result(std::move(out), "slice_cols", {a}, [begin](Node& out) {
    Matrix& g = out.parents[0]->ensure_grad();
    for (std::size_t r = 0; r < out.grad.rows(); ++r)
      for (std::size_t c = 0; c < out.grad.cols(); ++c) g(r, begin + c) += out.grad(r, c);
  });
}

Value slice_rows(const Value& a, std::size_t begin, std::size_t end) {
  if (begin > end || end > a.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") out of range for " + a.data().shape_string());
  }
  const std::size_t cols = a.cols();
  const auto& src = a.data().values();
  std::vector<double> vals(src.begin() + static_cast<std::ptrdiff_t>(begin * cols),
                           src.begin() + static_cast<std::ptrdiff_t>(end * cols));
  return make_result(Matrix(end - begin, cols, std::move(vals)), "slice_rows", {a},
                     [begin](Node& out) {
                       Matrix& g = out.parents[0]->ensure_grad();
                       const std::size_t off = begin * out.grad.cols();
                       for (std::size_t i = 0; i < out.grad.size(); ++i) g[off + i] += out.grad[i];
                     });
}

Value layer_norm(const Value& x, const Value& gain, const Value& bias, double eps) {
  const std::size_t rows = x.rows(), cols = x.cols();
  if (gain.rows() != 1 || gain.cols() != cols) shape_error("layer_norm", x.data(), gain.data());
  if (bias.rows() != 1 || bias.cols() != cols) shape_error("layer_norm", x.data(), bias.data());
  Matrix xhat(rows, cols);
  std::vector<double> inv_std(rows);
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    auto in = x.data().row_span(r);
    double mu = 0.0;
    for (double v : in) mu += v;
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (double v : in) var += (v - mu) * (v - mu);
    var /= static_cast<double>(cols);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) {
      xhat(r, c) = (in[c] - mu) * inv_std[r];
      out(r, c) = xhat(r, c) * gain(0, c) + bias(0, c);
    }
  }
  return make_result(std::move(out), "layer_norm", {x, gain, bias},
                     [xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& out) {
                       Node& px = *out.parents[0];
                       Node& pg = *out.parents[1];
                       Node& pb = *out.parents[2];
                       const std::size_t rows = out.grad.rows(), cols = out.grad.cols();
                       if (pg.requires_grad || pb.requires_grad) {
                         Matrix& gg = pg.ensure_grad();
                         Matrix& gb = pb.ensure_grad();
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t c = 0; c < cols; ++c) {
                             if (pg.requires_grad) gg(0, c) += out.grad(r, c) * xhat(r, c);
                             if (pb.requires_grad) gb(0, c) += out.grad(r, c);
                           }
                       }
                       if (!px.requires_grad) return;
                       Matrix& gx = px.ensure_grad();
                       const double n = static_cast<double>(cols);
                       std::vector<double> dxhat(cols);
                       for (std::size_t r = 0; r < rows; ++r) {
                         double m1 = 0.0, m2 = 0.0;
                         for (std::size_t c = 0; c < cols; ++c) {
                           dxhat[c] = out.grad(r, c) * pg.data(0, c);
                           m1 += dxhat[c];
                           m2 += dxhat[c] * xhat(r, c);
                         }
                         m1 /= n;
                         m2 /= n;
                         for (std::size_t c = 0; c < cols; ++c)
                           gx(r, c) += inv_std[r] * (dxhat[c] - m1 - xhat(r, c) * m2);
                       }
                     });
}

Value cross_entropy_with_logits(const Value& logits, std::span<const int> targets) {
  if (targets.size() != logits.rows()) {
    throw DimensionError("cross_entropy_with_logits: " + std::to_string(targets.size()) +
                         " targets for logits " + logits.data().shape_string());
  }
  const Matrix& x = logits.data();
  Matrix probs(x.rows(), x.cols());
  double loss = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const int t = targets[r];
    if (t < 0 || static_cast<std::size_t>(t) >= x.cols()) {
      throw DimensionError("cross_entropy_with_logits: target " + std::to_string(t) +
                           " outside " + std::to_string(x.cols()) + " classes");
    }
    const double lse = log_sum_exp(x.row_span(r));
    loss -= x(r, static_cast<std::size_t>(t)) - lse;
    for (std::size_t c = 0; c < x.cols(); ++c) probs(r, c) = std::exp(x(r, c) - lse);
  }
  std::vector<int> saved(targets.begin(), targets.end());
  return make_result(Matrix(1, 1, loss), "cross_entropy_with_logits", {logits},
                     [probs = std::move(probs), saved](Node& out) {
                       Matrix& g = out.parents[0]->ensure_grad();
                       const double up = out.grad(0, 0);
                       for (std::size_t r = 0; r < probs.rows(); ++r) {
                         for (std::size_t c = 0; c < probs.cols(); ++c) g(r, c) += up * probs(r, c);
                         g(r, static_cast<std::size_t>(saved[r])) -= up;
                       }
                     });
}

Value sum(const Value& a) {
  double s = 0.0;
  for (double v : a.data().values()) s += v;
  return make_result(Matrix(1, 1, s), "sum", {a}, [](Node& out) {
    Matrix& g = out.parents[0]->ensure_grad();
    const double up = out.grad(0, 0);
    for (double& v : g.values()) v += up;
  });
}

Value mean(const Value& a) {
  if (a.data().empty()) throw DimensionError("mean: empty operand");
  const double n = static_cast<double>(a.data().size());
  double s = 0.0;
  for (double v : a.data().values()) s += v;
  return make_result(Matrix(1, 1, s / n), "mean", {a}, [n](Node& out) {
    Matrix& g = out.parents[0]->ensure_grad();
    const double up = out.grad(0, 0) / n;
    for (double& v : g.values()) v += up;
  });
}

Value masked_fill(const Value& a, const std::vector<unsigned char>& mask, double fill) {
  if (mask.size() != a.data().size()) {
    throw DimensionError("masked_fill: mask of " + std::to_string(mask.size()) +
                         " entries for " + a.data().shape_string());
  }
  Matrix out = a.data();
  for (std::size_t i = 0; i < out.size(); ++i)
    if (mask[i]) out[i] = fill;
  return make_result(std::move(out), "masked_fill", {a}, [mask](Node& out) {
    Matrix& g = out.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!mask[i]) g[i] += out.grad[i];
  });
}

}  // namespace lst::ad
