// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "tsmi/autodiff/tensor.hpp"

namespace tsmi::ad {

struct GradOptions {
  /// Record the backward pass so returned gradients can be differentiated again.
  bool create_graph = false;
};

/// Gradients keyed by leaf id. `unreachable` lists requested tensors that the
/// output does not depend on; their entries are explicit zeros.
struct GradientMap {
  std::map<std::uint64_t, Tensor> by_leaf;
  std::vector<std::uint64_t> unreachable;

  const Tensor& at(const Tensor& leaf) const { return by_leaf.at(leaf.id()); }
  bool contains(const Tensor& leaf) const { return by_leaf.contains(leaf.id()); }
};

/// Reverse-mode gradients of a scalar `output` with respect to every
/// requires-grad leaf reachable from it.
GradientMap backward(const Tensor& output, GradOptions options = {});

/// Gradients of a scalar `output` with respect to `wrt`, in order. Tensors
/// the output does not depend on get zero gradients; `unreachable` (if given)
/// receives their positions.
std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> wrt,
                         GradOptions options = {}, std::vector<std::size_t>* unreachable = nullptr);

/// Producer records in topological order ending at `output` (graph nodes that
/// require grad only).
std::vector<std::shared_ptr<Node>> topological_order(const Tensor& output);

/// Max over leaves of ||analytic - central difference|| / (||analytic|| + 1e-8).
/// `fn` must rebuild its graph from the leaves it is handed.
double finite_difference_check(const std::function<Tensor(std::span<const Tensor>)>& fn,
                               std::span<const Tensor> point, double step);

}  // namespace tsmi::ad
