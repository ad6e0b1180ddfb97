// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tsmi::ad {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Raised when operand shapes do not conform for a primitive. The message
/// names the primitive and every offending shape.
class ShapeError : public std::invalid_argument {
 public:
  ShapeError(std::string_view primitive, const Shape& a, const Shape& b);
  ShapeError(std::string_view primitive, const Shape& a, std::string_view detail);
};

class Tensor;
struct Node;

using BackwardRule = std::function<std::vector<Tensor>(
    const Tensor& grad_output, const Tensor& output, const std::vector<Tensor>& inputs)>;

/// One recorded operation: its kind, the tensors it consumed and the rule that
/// maps the output gradient onto input gradients. Backward rules are written
/// in terms of Tensor primitives, so running them while recording produces a
/// differentiable gradient graph.
struct OpRecord {
  std::string_view kind;
  std::vector<Tensor> inputs;
  BackwardRule backward;
};

struct Node {
  std::uint64_t id = 0;
  Shape shape;
  std::vector<double> values;
  bool requires_grad = false;
  std::unique_ptr<OpRecord> op;  // null for leaves and constants
};

/// Shaped array of doubles that may participate in a reverse-mode graph.
/// Copies share the underlying node; tensors are immutable once created.
class Tensor {
 public:
  Tensor() = default;

  static Tensor leaf(Shape shape, std::vector<double> values, bool requires_grad = true);
  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const { return shape().at(axis); }
  std::size_t numel() const;
  std::span<const double> values() const;
  double item() const;
  double operator[](std::size_t flat_index) const { return values()[flat_index]; }

  bool requires_grad() const;
  bool is_leaf() const;
  std::uint64_t id() const;
  std::string_view op_kind() const;

  /// Same values, no graph attachment, requires-grad false.
  Tensor detach() const;
  /// Fresh leaf with the same values.
  Tensor as_leaf(bool requires_grad = true) const;

  const std::shared_ptr<Node>& node() const { return node_; }
  static Tensor from_node(std::shared_ptr<Node> node);

  /// Records `kind` as the producer of a new tensor when grad mode is on and
  /// any input requires grad; otherwise returns a constant.
  static Tensor make_result(Shape shape, std::vector<double> values, std::string_view kind,
                            std::vector<Tensor> inputs, BackwardRule rule);

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

bool grad_mode_enabled();

/// RAII scope that sets whether new operations are recorded.
class GradModeGuard {
 public:
  explicit GradModeGuard(bool enabled);
  ~GradModeGuard();
  GradModeGuard(const GradModeGuard&) = delete;
  GradModeGuard& operator=(const GradModeGuard&) = delete;

 private:
  bool previous_;
};

class NoGradGuard : public GradModeGuard {
 public:
  NoGradGuard() : GradModeGuard(false) {}
};

}  // namespace tsmi::ad
