// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tsmi/autodiff/tensor.hpp"

namespace tsmi::ad {

// Binary elementwise ops broadcast with numpy rules (trailing axes aligned,
// extent-1 axes stretch).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor neg(const Tensor& x);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double offset);
Tensor square(const Tensor& x);

Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor softplus(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);

/// A[..., m, k] x B[k, n] -> [..., m, n]. Leading axes of A are batch axes.
Tensor matmul(const Tensor& a, const Tensor& b);
/// General product with optional transposes. A is read as a matrix
/// [rows, last axis]. Without trans_a the leading axes of A are kept as batch
/// axes; with trans_a the product contracts over all rows of A and is 2-D.
/// B is likewise read as a matrix, [n, k] when trans_b.
Tensor gemm(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b);
/// Swaps the last two axes.
Tensor transpose(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);

Tensor sum(const Tensor& x);
Tensor sum(const Tensor& x, std::size_t axis, bool keepdim);
Tensor mean(const Tensor& x);
Tensor mean(const Tensor& x, std::size_t axis, bool keepdim);

Tensor broadcast_to(const Tensor& x, const Shape& shape);
/// Sums `x` down to `shape`, the inverse of broadcasting.
Tensor sum_to(const Tensor& x, const Shape& shape);

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length);
/// Zero padding along one axis.
Tensor pad(const Tensor& x, std::size_t axis, std::size_t before, std::size_t after);
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor gather(const Tensor& x, std::size_t axis, std::span<const std::size_t> indices);
/// Adjoint of gather: out has `extent` along `axis`; rows of `x` are added at `indices`.
Tensor scatter_add(const Tensor& x, std::size_t axis, std::span<const std::size_t> indices,
                   std::size_t extent);

/// Softmax along the last axis.
Tensor softmax(const Tensor& x);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& x) { return neg(x); }
inline Tensor operator*(const Tensor& x, double c) { return scale(x, c); }
inline Tensor operator*(double c, const Tensor& x) { return scale(x, c); }
inline Tensor operator+(const Tensor& x, double c) { return add_scalar(x, c); }
inline Tensor operator-(const Tensor& x, double c) { return add_scalar(x, -c); }

Shape broadcast_shapes(const Shape& a, const Shape& b);

}  // namespace tsmi::ad
