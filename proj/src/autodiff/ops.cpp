// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/autodiff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tsmi::ad {
namespace {

using Strides = std::vector<std::size_t>;

// Contiguous strides of `in`, right-aligned against `out`; broadcast axes get 0.
Strides aligned_strides(const Shape& in, const Shape& out) {
  Strides strides(out.size(), 0);
  std::size_t stride = 1;
  const std::size_t offset = out.size() - in.size();
  for (std::size_t i = in.size(); i-- > 0;) {
    strides[offset + i] = (in[i] == 1 && out[offset + i] != 1) ? 0 : stride;
    stride *= in[i];
  }
  return strides;
}

// Calls f(out_index, a_index, b_index) for every position of `out`.
template <class F>
void visit(const Shape& out, const Strides& sa, const Strides& sb, F&& f) {
  const std::size_t rank = out.size();
  const std::size_t total = element_count(out);
  if (total == 0) return;
  if (rank == 0) {
    f(0, 0, 0);
    return;
  }
  const std::size_t inner = out[rank - 1];
  const std::size_t ia = sa[rank - 1];
  const std::size_t ib = sb[rank - 1];
  std::vector<std::size_t> counter(rank, 0);
  std::size_t oa = 0, ob = 0;
  for (std::size_t base = 0; base < total; base += inner) {
    for (std::size_t j = 0; j < inner; ++j) f(base + j, oa + j * ia, ob + j * ib);
    for (std::size_t axis = rank - 1; axis-- > 0;) {
      if (++counter[axis] < out[axis]) {
        oa += sa[axis];
        ob += sb[axis];
        break;
      }
      oa -= sa[axis] * (out[axis] - 1);
      ob -= sb[axis] * (out[axis] - 1);
      counter[axis] = 0;
    }
  }
}

template <class F>
std::vector<double> map_values(const Tensor& x, F&& f) {
  auto in = x.values();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return out;
}

template <class F>
std::vector<double> zip_values(std::string_view kind, const Tensor& a, const Tensor& b,
                               Shape& out_shape, F&& f) {
  if (a.shape() == b.shape()) {
    out_shape = a.shape();
    auto va = a.values();
    auto vb = b.values();
    std::vector<double> out(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) out[i] = f(va[i], vb[i]);
    return out;
  }
  try {
    out_shape = broadcast_shapes(a.shape(), b.shape());
  } catch (const ShapeError&) {
    throw ShapeError(kind, a.shape(), b.shape());
  }
  auto va = a.values();
  auto vb = b.values();
  if (b.numel() == 1) {
    const double s = vb[0];
    std::vector<double> out(element_count(out_shape));
    if (va.size() == out.size()) {
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(va[i], s);
      return out;
    }
  }
  std::vector<double> out(element_count(out_shape));
  visit(out_shape, aligned_strides(a.shape(), out_shape), aligned_strides(b.shape(), out_shape),
        [&](std::size_t o, std::size_t i, std::size_t j) { out[o] = f(va[i], vb[j]); });
  return out;
}

struct AxisView {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisView axis_view(std::string_view kind, const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw ShapeError(kind, shape, "axis " + std::to_string(axis) + " out of range");
  }
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= shape[i];
  v.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

}  // namespace

Shape broadcast_shapes(const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank, 1);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t ea = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::size_t eb = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (ea != eb && ea != 1 && eb != 1) throw ShapeError("broadcast", a, b);
    out[i] = ea == 1 ? eb : ea;
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  Shape shape;
  auto values = zip_values("add", a, b, shape, [](double x, double y) { return x + y; });
  return Tensor::make_result(std::move(shape), std::move(values), "add", {a, b},
                             [](const Tensor& g, const Tensor&, const std::vector<Tensor>& in) {
                               return std::vector<Tensor>{sum_to(g, in[0].shape()),
                                                          sum_to(g, in[1].shape())};
                             });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  Shape shape;
  auto values = zip_values("sub", a, b, shape, [](double x, double y) { return x - y; });
  return Tensor::make_result(std::move(shape), std::move(values), "sub", {a, b},
                             [](const Tensor& g, const Tensor&, const std::vector<Tensor>& in) {
                               return std::vector<Tensor>{sum_to(g, in[0].shape()),
                                                          sum_to(neg(g), in[1].shape())};
                             });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  Shape shape;
  auto values = zip_values("mul", a, b, shape, [](double x, double y) { return x * y; });
  return Tensor::make_result(
      std::move(shape), std::move(values), "mul", {a, b},
      [](const Tensor& g, const Tensor&, const std::vector<Tensor>& in) {
        std::vector<Tensor> out(2);
        if (in[0].requires_grad()) out[0] = sum_to(mul(g, in[1]), in[0].shape());
        if (in[1].requires_grad()) out[1] = sum_to(mul(g, in[0]), in[1].shape());
        return out;
      });
}

Tensor div(const Tensor& a, const Tensor& b) {
  Shape shape;
  auto values = zip_values("div", a, b, shape, [](double x, double y) { return x / y; });
  return Tensor::make_result(
      std::move(shape), std::move(values), "div", {a, b},
      [](const Tensor& g, const Tensor& out, const std::vector<Tensor>& in) {
        std::vector<Tensor> grads(2);
        if (in[0].requires_grad()) grads[0] = sum_to(div(g, in[1]), in[0].shape());
        if (in[1].requires_grad()) grads[1] = sum_to(neg(div(mul(g, out), in[1])), in[1].shape());
        return grads;
      });
}

Tensor neg(const Tensor& x) {
  return Tensor::make_result(x.shape(), map_values(x, [](double v) { return -v; }), "neg", {x},
                             [](const Tensor& g, const Tensor&, const std::vector<Tensor>&) {
                               return std::vector<Tensor>{neg(g)};
                             });
}

Tensor scale(const Tensor& x, double factor) {
  return Tensor::make_result(
      x.shape(), map_values(x, [factor](double v) { return v * factor; }), "scale", {x},
      [factor](const Tensor& g, const Tensor&, const std::vector<Tensor>&) {
        return std::vector<Tensor>{scale(g, factor)};
      });
}

Tensor add_scalar(const Tensor& x, double offset) {
  return Tensor::make_result(x.shape(), map_values(x, [offset](double v) { return v + offset; }),
                             "add_scalar", {x},
                             [](const Tensor& g, const Tensor&, const std::vector<Tensor>&) {
                               return std::vector<Tensor>{g};
                             });
}

Tensor square(const Tensor& x) {
  return Tensor::make_result(x.shape(), map_values(x, [](double v) { return v * v; }), "square",
                             {x},
                             [](const Tensor& g, const Tensor&, const std::vector<Tensor>& in) {
                               return std::vector<Tensor>{mul(g, scale(in[0], 2.0))};
                             });
}

Tensor exp(const Tensor& x) {
  return Tensor::make_result(x.shape(), map_values(x, [](double v) { return std::exp(v); }), "exp",
                             {x},
                             [](const Tensor& g, const Tensor& out, const std::vector<Tensor>&) {
                               return std::vector<Tensor>{mul(g, out)};
                             });
}

Tensor log(const Tensor& x) {
  return Tensor::make_result(x.shape(), map_values(x, [](double v) { return std::log(v); }), "log",
                             {x},
                             [](const Tensor& g, const Tensor&, const std::vector<Tensor>& in) {
                               return std::vector<Tensor>{div(g, in[0])};
                             });
}

namespace {
double stable_sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}
}  // namespace

Tensor sigmoid(const Tensor& x) {
  return Tensor::make_result(
      x.shape(), map_values(x, stable_sigmoid), "sigmoid", {x},
      [](const Tensor& g, const Tensor& out, const std::vector<Tensor>&) {
        // s' = s (1 - s)
        return std::vector<Tensor>{mul(g, mul(out, add_scalar(neg(out), 1.0)))};
      });
}

Tensor softplus(const Tensor& x) {
  return Tensor::make_result(
      x.shape(),
      map_values(x, [](double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); }),
      "softplus", {x}, [](const Tensor& g, const Tensor&, const std::vector<Tensor>& in) {
        return std::vector<Tensor>{mul(g, sigmoid(in[0]))};
      });
}

Tensor tanh(const Tensor& x) {
  return Tensor::make_result(
      x.shape(), map_values(x, [](double v) { return std::tanh(v); }), "tanh", {x},
      [](const Tensor& g, const Tensor& out, const std::vector<Tensor>&) {
        return std::vector<Tensor>{mul(g, add_scalar(neg(square(out)), 1.0))};
      });
}

Tensor relu(const Tensor& x) {
  return Tensor::make_result(
      x.shape(), map_values(x, [](double v) { return v > 0 ? v : 0.0; }), "relu", {x},
      [](const Tensor& g, const Tensor&, const std::vector<Tensor>& in) {
        auto mask = Tensor::constant(in[0].shape(),
                                     map_values(in[0], [](double v) { return v > 0 ? 1.0 : 0.0; }));
        return std::vector<Tensor>{mul(g, mask)};
      });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (b.rank() != 2) throw ShapeError("matmul", a.shape(), b.shape());
  return gemm(a, b, false, false);
}

Tensor gemm(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b) {
  if (a.rank() < 2 || b.rank() < 2) throw ShapeError("matmul", a.shape(), b.shape());
  const std::size_t a_cols = a.shape().back();
  const std::size_t a_rows = a_cols ? a.numel() / a_cols : 0;
  const std::size_t b_cols = b.shape().back();
  const std::size_t b_rows = b_cols ? b.numel() / b_cols : 0;
  const std::size_t k = trans_a ? a_rows : a_cols;
  const std::size_t m = trans_a ? a_cols : a_rows;
  const std::size_t n = trans_b ? b_rows : b_cols;
  if ((trans_b ? b_cols : b_rows) != k) throw ShapeError("matmul", a.shape(), b.shape());
  Shape shape;
  if (trans_a) {
    shape = {m, n};
  } else {
    shape = a.shape();
    shape.back() = n;
  }
  std::vector<double> values(m * n, 0.0);
  if (m && n && k) {
    MutMap c(values.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    ConstMap am(a.values().data(), static_cast<Eigen::Index>(a_rows), static_cast<Eigen::Index>(a_cols));
    ConstMap bm(b.values().data(), static_cast<Eigen::Index>(b_rows), static_cast<Eigen::Index>(b_cols));
    if (!trans_a && !trans_b) c.noalias() = am * bm;
    if (!trans_a && trans_b) c.noalias() = am * bm.transpose();
    if (trans_a && !trans_b) c.noalias() = am.transpose() * bm;
    if (trans_a && trans_b) c.noalias() = am.transpose() * bm.transpose();
  }
  return Tensor::make_result(
      std::move(shape), std::move(values), "matmul", {a, b},
      [trans_a, trans_b](const Tensor& g, const Tensor&, const std::vector<Tensor>& in) {
        const auto& lhs = in[0];
        const auto& rhs = in[1];
        auto fit = [](Tensor t, const Shape& target) {
          return t.shape() == target ? t : reshape(t, target);
        };
        std::vector<Tensor> grads(2);
        if (lhs.requires_grad()) {
          grads[0] = trans_a ? fit(gemm(rhs, g, trans_b, true), lhs.shape())
                             : gemm(g, rhs, false, !trans_b);
        }
        if (rhs.requires_grad()) {
          grads[1] = trans_b ? fit(gemm(g, lhs, true, trans_a), rhs.shape())
                             : fit(gemm(lhs, g, !trans_a, false), rhs.shape());
        }
        return grads;
      });
}

Tensor transpose(const Tensor& x) {
  if (x.rank() < 2) throw ShapeError("transpose", x.shape(), "rank must be at least 2");
  const std::size_t m = x.dim(x.rank() - 2);
  const std::size_t n = x.dim(x.rank() - 1);
  const std::size_t batch = (m != 0 && n != 0) ? x.numel() / (m * n) : 0;
  Shape shape = x.shape();
  std::swap(shape[shape.size() - 1], shape[shape.size() - 2]);
  std::vector<double> values(x.numel());
  auto in = x.values();
  for (std::size_t b = 0; b < batch; ++b) {
    ConstMap src(in.data() + b * m * n, static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    MutMap dst(values.data() + b * m * n, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    dst = src.transpose();
  }
  return Tensor::make_result(std::move(shape), std::move(values), "transpose", {x},
                             [](const Tensor& g, const Tensor&, const std::vector<Tensor>&) {
                               return std::vector<Tensor>{transpose(g)};
                             });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (element_count(shape) != x.numel()) throw ShapeError("reshape", x.shape(), shape);
  return Tensor::make_result(std::move(shape), {x.values().begin(), x.values().end()}, "reshape",
                             {x},
                             [](const Tensor& g, const Tensor&, const std::vector<Tensor>& in) {
                               return std::vector<Tensor>{reshape(g, in[0].shape())};
                             });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  return Tensor::make_result({}, {total}, "sum", {x},
                             [](const Tensor& g, const Tensor&, const std::vector<Tensor>& in) {
                               return std::vector<Tensor>{broadcast_to(g, in[0].shape())};
                             });
}

Tensor sum(const Tensor& x, std::size_t axis, bool keepdim) {
  const auto v = axis_view("sum", x.shape(), axis);
  Shape shape = x.shape();
  if (keepdim) {
    shape[axis] = 1;
  } else {
    shape.erase(shape.begin() + static_cast<std::ptrdiff_t>(axis));
  }
  std::vector<double> values(v.outer * v.inner, 0.0);
  auto in = x.values();
  for (std::size_t o = 0; o < v.outer; ++o)
    for (std::size_t e = 0; e < v.extent; ++e) {
      const double* src = in.data() + (o * v.extent + e) * v.inner;
      double* dst = values.data() + o * v.inner;
      for (std::size_t i = 0; i < v.inner; ++i) dst[i] += src[i];
    }
  return Tensor::make_result(std::move(shape), std::move(values), "sum_axis", {x},
                             [axis](const Tensor& g, const Tensor&, const std::vector<Tensor>& in) {
                               Shape kept = in[0].shape();
                               kept[axis] = 1;
                               return std::vector<Tensor>{
                                   broadcast_to(reshape(g, kept), in[0].shape())};
                             });
}

Tensor mean(const Tensor& x) {
  if (x.numel() == 0) throw ShapeError("mean", x.shape(), "empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor mean(const Tensor& x, std::size_t axis, bool keepdim) {
  const auto v = axis_view("mean", x.shape(), axis);
  if (v.extent == 0) throw ShapeError("mean", x.shape(), "empty axis");
  return scale(sum(x, axis, keepdim), 1.0 / static_cast<double>(v.extent));
}

Tensor broadcast_to(const Tensor& x, const Shape& shape) {
  if (x.shape() == shape) return x;
  Shape check;
  try {
    check = broadcast_shapes(x.shape(), shape);
  } catch (const ShapeError&) {
    throw ShapeError("broadcast_to", x.shape(), shape);
  }
  if (check != shape) throw ShapeError("broadcast_to", x.shape(), shape);
  std::vector<double> values(element_count(shape));
  auto in = x.values();
  if (x.numel() == 1) {
    std::fill(values.begin(), values.end(), in[0]);
  } else {
    visit(shape, aligned_strides(x.shape(), shape), Strides(shape.size(), 0),
          [&](std::size_t o, std::size_t i, std::size_t) { values[o] = in[i]; });
  }
  return Tensor::make_result(shape, std::move(values), "broadcast_to", {x},
                             [](const Tensor& g, const Tensor&, const std::vector<Tensor>& in) {
                               return std::vector<Tensor>{sum_to(g, in[0].shape())};
                             });
}

Tensor sum_to(const Tensor& x, const Shape& shape) {
  if (x.shape() == shape) return x;
  Shape check;
  try {
    check = broadcast_shapes(shape, x.shape());
  } catch (const ShapeError&) {
    throw ShapeError("sum_to", x.shape(), shape);
  }
  if (check != x.shape()) throw ShapeError("sum_to", x.shape(), shape);
  std::vector<double> values(element_count(shape), 0.0);
  auto in = x.values();
  if (values.size() == 1) {
    double total = 0.0;
    for (double v : in) total += v;
    values[0] = total;
  } else {
    Strides contiguous(x.rank());
    std::size_t stride = 1;
    for (std::size_t i = x.rank(); i-- > 0;) {
      contiguous[i] = stride;
      stride *= x.dim(i);
    }
    visit(x.shape(), contiguous, aligned_strides(shape, x.shape()),
          [&](std::size_t, std::size_t i, std::size_t o) { values[o] += in[i]; });
  }
  return Tensor::make_result(shape, std::move(values), "sum_to", {x},
                             [](const Tensor& g, const Tensor&, const std::vector<Tensor>& in) {
                               return std::vector<Tensor>{broadcast_to(g, in[0].shape())};
                             });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length) {
  const auto v = axis_view("slice", x.shape(), axis);
  if (start + length > v.extent) {
    throw ShapeError("slice", x.shape(),
                     "range [" + std::to_string(start) + ", " + std::to_string(start + length) +
                         ") exceeds axis " + std::to_string(axis));
  }
  Shape shape = x.shape();
  shape[axis] = length;
  std::vector<double> values(v.outer * length * v.inner);
  auto in = x.values();
  for (std::size_t o = 0; o < v.outer; ++o) {
    const double* src = in.data() + (o * v.extent + start) * v.inner;
    std::copy(src, src + length * v.inner, values.data() + o * length * v.inner);
  }
  const std::size_t extent = v.extent;
  return Tensor::make_result(
      std::move(shape), std::move(values), "slice", {x},
      [axis, start, length, extent](const Tensor& g, const Tensor&, const std::vector<Tensor>&) {
        return std::vector<Tensor>{pad(g, axis, start, extent - start - length)};
      });
}

Tensor pad(const Tensor& x, std::size_t axis, std::size_t before, std::size_t after) {
  const auto v = axis_view("pad", x.shape(), axis);
  const std::size_t extent = v.extent + before + after;
  Shape shape = x.shape();
  shape[axis] = extent;
  std::vector<double> values(v.outer * extent * v.inner, 0.0);
  auto in = x.values();
  for (std::size_t o = 0; o < v.outer; ++o) {
    const double* src = in.data() + o * v.extent * v.inner;
    std::copy(src, src + v.extent * v.inner, values.data() + (o * extent + before) * v.inner);
  }
  const std::size_t length = v.extent;
  return Tensor::make_result(
      std::move(shape), std::move(values), "pad", {x},
      [axis, before, length](const Tensor& g, const Tensor&, const std::vector<Tensor>&) {
        return std::vector<Tensor>{slice(g, axis, before, length)};
      });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat", Shape{}, "no inputs");
  const Shape& first = parts[0].shape();
  axis_view("concat", first, axis);
  std::size_t extent = 0;
  for (const auto& p : parts) {
    Shape a = p.shape(), b = first;
    if (a.size() != b.size()) throw ShapeError("concat", a, b);
    a[axis] = b[axis] = 0;
    if (a != b) throw ShapeError("concat", p.shape(), first);
    extent += p.dim(axis);
  }
  const auto v = axis_view("concat", first, axis);
  Shape shape = first;
  shape[axis] = extent;
  std::vector<double> values(v.outer * extent * v.inner);
  std::size_t offset = 0;
  std::vector<std::size_t> starts;
  for (const auto& p : parts) {
    const std::size_t e = p.dim(axis);
    auto in = p.values();
    for (std::size_t o = 0; o < v.outer; ++o) {
      const double* src = in.data() + o * e * v.inner;
      std::copy(src, src + e * v.inner, values.data() + (o * extent + offset) * v.inner);
    }
    starts.push_back(offset);
    offset += e;
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return Tensor::make_result(
      std::move(shape), std::move(values), "concat", std::move(inputs),
      [axis, starts](const Tensor& g, const Tensor&, const std::vector<Tensor>& in) {
        std::vector<Tensor> grads(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) {
          if (in[i].requires_grad()) grads[i] = slice(g, axis, starts[i], in[i].dim(axis));
        }
        return grads;
      });
}

Tensor gather(const Tensor& x, std::size_t axis, std::span<const std::size_t> indices) {
  const auto v = axis_view("gather", x.shape(), axis);
  for (auto idx : indices) {
    if (idx >= v.extent) {
      throw ShapeError("gather", x.shape(), "index " + std::to_string(idx) + " out of range");
    }
  }
  Shape shape = x.shape();
  shape[axis] = indices.size();
  std::vector<double> values(v.outer * indices.size() * v.inner);
  auto in = x.values();
  for (std::size_t o = 0; o < v.outer; ++o)
    for (std::size_t j = 0; j < indices.size(); ++j) {
      const double* src = in.data() + (o * v.extent + indices[j]) * v.inner;
      std::copy(src, src + v.inner, values.data() + (o * indices.size() + j) * v.inner);
    }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  const std::size_t extent = v.extent;
  return Tensor::make_result(
      std::move(shape), std::move(values), "gather", {x},
      [axis, idx, extent](const Tensor& g, const Tensor&, const std::vector<Tensor>&) {
        return std::vector<Tensor>{scatter_add(g, axis, idx, extent)};
      });
}

Tensor scatter_add(const Tensor& x, std::size_t axis, std::span<const std::size_t> indices,
                   std::size_t extent) {
  const auto v = axis_view("scatter_add", x.shape(), axis);
  if (v.extent != indices.size()) {
    throw ShapeError("scatter_add", x.shape(), "index count does not match axis extent");
  }
  for (auto idx : indices) {
    if (idx >= extent) {
      throw ShapeError("scatter_add", x.shape(), "index " + std::to_string(idx) + " out of range");
    }
  }
  Shape shape = x.shape();
  shape[axis] = extent;
  std::vector<double> values(v.outer * extent * v.inner, 0.0);
  auto in = x.values();
  for (std::size_t o = 0; o < v.outer; ++o)
    for (std::size_t j = 0; j < indices.size(); ++j) {
      const double* src = in.data() + (o * v.extent + j) * v.inner;
      double* dst = values.data() + (o * extent + indices[j]) * v.inner;
      for (std::size_t i = 0; i < v.inner; ++i) dst[i] += src[i];
    }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return Tensor::make_result(std::move(shape), std::move(values), "scatter_add", {x},
                             [axis, idx](const Tensor& g, const Tensor&, const std::vector<Tensor>&) {
                               return std::vector<Tensor>{gather(g, axis, idx)};
                             });
}

Tensor softmax(const Tensor& x) {
  if (x.rank() == 0) throw ShapeError("softmax", x.shape(), "rank must be at least 1");
  const std::size_t n = x.shape().back();
  const std::size_t rows = n ? x.numel() / n : 0;
  std::vector<double> values(x.numel());
  auto in = x.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = in.data() + r * n;
    double* dst = values.data() + r * n;
    const double m = *std::max_element(src, src + n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += (dst[i] = std::exp(src[i] - m));
    for (std::size_t i = 0; i < n; ++i) dst[i] /= total;
  }
  return Tensor::make_result(
      x.shape(), std::move(values), "softmax", {x},
      [](const Tensor& g, const Tensor& out, const std::vector<Tensor>&) {
        const std::size_t last = out.rank() - 1;
        auto dot = sum(mul(g, out), last, true);
        return std::vector<Tensor>{mul(out, sub(g, dot))};
      });
}

}  // namespace tsmi::ad
