// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/autodiff/tensor.hpp"

#include <atomic>
#include <sstream>

namespace tsmi::ad {
namespace {

thread_local bool g_grad_enabled = true;
std::atomic<std::uint64_t> g_next_id{1};

std::shared_ptr<Node> new_node(Shape shape, std::vector<double> values, bool requires_grad) {
  if (element_count(shape) != values.size()) {
    throw ShapeError("tensor", shape,
                     "holds " + std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<Node>();
  node->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  node->shape = std::move(shape);
  node->values = std::move(values);
  node->requires_grad = requires_grad;
  return node;
}

}  // namespace

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

ShapeError::ShapeError(std::string_view primitive, const Shape& a, const Shape& b)
    : std::invalid_argument(std::string(primitive) + ": shape mismatch " + shape_string(a) +
                            " vs " + shape_string(b)) {}

ShapeError::ShapeError(std::string_view primitive, const Shape& a, std::string_view detail)
    : std::invalid_argument(std::string(primitive) + ": invalid shape " + shape_string(a) + " (" +
                            std::string(detail) + ")") {}

Tensor Tensor::leaf(Shape shape, std::vector<double> values, bool requires_grad) {
  return Tensor(new_node(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
  return leaf(std::move(shape), std::move(values), false);
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  const auto n = element_count(shape);
  return constant(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return constant({}, {value}); }

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::numel() const { return node_->values.size(); }

std::span<const double> Tensor::values() const { return node_->values; }

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item", shape(), "expected a single element");
  return node_->values[0];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

bool Tensor::is_leaf() const { return node_->op == nullptr; }

std::uint64_t Tensor::id() const { return node_->id; }

std::string_view Tensor::op_kind() const {
  return node_->op ? node_->op->kind : std::string_view("leaf");
}

Tensor Tensor::detach() const { return constant(shape(), node_->values); }

Tensor Tensor::as_leaf(bool requires_grad) const {
  return leaf(shape(), node_->values, requires_grad);
}

Tensor Tensor::from_node(std::shared_ptr<Node> node) { return Tensor(std::move(node)); }

Tensor Tensor::make_result(Shape shape, std::vector<double> values, std::string_view kind,
                           std::vector<Tensor> inputs, BackwardRule rule) {
  bool track = false;
  if (g_grad_enabled) {
    for (const auto& in : inputs) track = track || in.requires_grad();
  }
  auto node = new_node(std::move(shape), std::move(values), track);
  if (track) {
    node->op = std::make_unique<OpRecord>(OpRecord{kind, std::move(inputs), std::move(rule)});
  }
  return Tensor(std::move(node));
}

bool grad_mode_enabled() { return g_grad_enabled; }

GradModeGuard::GradModeGuard(bool enabled) : previous_(g_grad_enabled) {
  g_grad_enabled = enabled;
}

GradModeGuard::~GradModeGuard() { g_grad_enabled = previous_; }

}  // namespace tsmi::ad
