// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/autodiff/grad.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "tsmi/autodiff/ops.hpp"

namespace tsmi::ad {
namespace {

void require_scalar(const Tensor& output) {
  if (!output.defined() || output.numel() != 1) {
    throw ShapeError("backward", output.defined() ? output.shape() : Shape{},
                     "output must be a scalar");
  }
}

// Runs reverse accumulation from `output`. Gradients are kept for nodes in
// `keep` (or every leaf when `keep` is null) and released for everything else
// as soon as they have been propagated.
std::unordered_map<const Node*, Tensor> accumulate(const Tensor& output,
                                                   const std::unordered_set<const Node*>* keep,
                                                   bool create_graph) {
  std::unordered_map<const Node*, Tensor> grads;
  if (!output.requires_grad()) return grads;

  const auto order = topological_order(output);
  GradModeGuard mode(create_graph);
  grads.emplace(output.node().get(), Tensor::full(output.shape(), 1.0));

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto& node = *it;
    auto found = grads.find(node.get());
    if (found == grads.end()) continue;
    if (!node->op) continue;
    Tensor g = found->second;
    if (!keep || !keep->contains(node.get())) grads.erase(found);

    const auto& inputs = node->op->inputs;
    auto input_grads = node->op->backward(g, Tensor::from_node(node), inputs);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (!inputs[i].requires_grad() || !input_grads[i].defined()) continue;
      const Node* key = inputs[i].node().get();
      auto slot = grads.find(key);
      if (slot == grads.end()) {
        grads.emplace(key, input_grads[i]);
      } else {
        slot->second = add(slot->second, input_grads[i]);
      }
    }
  }
  return grads;
}

}  // namespace

std::vector<std::shared_ptr<Node>> topological_order(const Tensor& output) {
  std::vector<std::shared_ptr<Node>> order;
  if (!output.requires_grad()) return order;
  std::unordered_set<const Node*> visited;
  std::vector<std::pair<std::shared_ptr<Node>, std::size_t>> stack;
  stack.emplace_back(output.node(), 0);
  visited.insert(output.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    const std::size_t n_inputs = node->op ? node->op->inputs.size() : 0;
    if (next < n_inputs) {
      const auto& child = node->op->inputs[next++].node();
      if (child->requires_grad && visited.insert(child.get()).second) {
        stack.emplace_back(child, 0);
      }
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }
  return order;
}

GradientMap backward(const Tensor& output, GradOptions options) {
  require_scalar(output);
  GradientMap result;
  auto grads = accumulate(output, nullptr, options.create_graph);
  for (const auto& node : topological_order(output)) {
    if (node->op) continue;
    auto found = grads.find(node.get());
    if (found != grads.end()) {
      result.by_leaf.emplace(node->id, found->second);
    } else {
      result.by_leaf.emplace(node->id, Tensor::zeros(node->shape));
      result.unreachable.push_back(node->id);
    }
  }
  return result;
}

std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> wrt, GradOptions options,
                         std::vector<std::size_t>* unreachable) {
  require_scalar(output);
  std::unordered_set<const Node*> keep;
  for (const auto& t : wrt) keep.insert(t.node().get());
  auto grads = accumulate(output, &keep, options.create_graph);
  std::vector<Tensor> out;
  out.reserve(wrt.size());
  for (std::size_t i = 0; i < wrt.size(); ++i) {
    auto found = grads.find(wrt[i].node().get());
    if (found != grads.end()) {
      out.push_back(found->second);
    } else {
      out.push_back(Tensor::zeros(wrt[i].shape()));
      if (unreachable) unreachable->push_back(i);
    }
  }
  return out;
}

double finite_difference_check(const std::function<Tensor(std::span<const Tensor>)>& fn,
                               std::span<const Tensor> point, double step) {
  if (!(step > 0)) throw std::invalid_argument("finite_difference_check: step must be positive");
  constexpr double kDenominatorEpsilon = 1e-8;

  std::vector<Tensor> leaves;
  leaves.reserve(point.size());
  for (const auto& p : point) leaves.push_back(p.as_leaf(true));

  const Tensor base = fn(leaves);
  if (!std::isfinite(base.item())) {
    throw std::runtime_error("finite_difference_check: non-finite value at base point");
  }
  const auto analytic = grad(base, leaves);

  auto evaluate = [&](std::size_t leaf, std::size_t element, double delta) {
    std::vector<Tensor> probe = leaves;
    std::vector<double> values(leaves[leaf].values().begin(), leaves[leaf].values().end());
    values[element] += delta;
    probe[leaf] = Tensor::leaf(leaves[leaf].shape(), std::move(values), true);
    const double v = fn(probe).item();
    if (!std::isfinite(v)) {
      throw std::runtime_error("finite_difference_check: non-finite value perturbing leaf " +
                               std::to_string(leaf) + " element " + std::to_string(element));
    }
    return v;
  };

  double worst = 0.0;
  for (std::size_t leaf = 0; leaf < leaves.size(); ++leaf) {
    double diff2 = 0.0, norm2 = 0.0;
    for (std::size_t e = 0; e < leaves[leaf].numel(); ++e) {
      const double numeric = (evaluate(leaf, e, step) - evaluate(leaf, e, -step)) / (2.0 * step);
      const double a = analytic[leaf][e];
      if (!std::isfinite(a)) {
        throw std::runtime_error("finite_difference_check: non-finite gradient at leaf " +
                                 std::to_string(leaf));
      }
      diff2 += (a - numeric) * (a - numeric);
      norm2 += a * a;
    }
    worst = std::max(worst, std::sqrt(diff2) / (std::sqrt(norm2) + kDenominatorEpsilon));
  }
  return worst;
}

}  // namespace tsmi::ad
