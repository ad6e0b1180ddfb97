// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsmi/autodiff/tensor.hpp"

namespace tsmi::ad {

/// Ordered, named collection of parameter tensors. Entries may be leaves
/// (trainable state) or graph nodes (e.g. parameters after a virtual step).
class ParameterSet {
 public:
  void add(std::string name, Tensor tensor);
  const Tensor& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::span<const Tensor> tensors() const { return tensors_; }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return tensors_.size(); }
  std::size_t parameter_count() const;

  /// Same names, new tensors (positionally matched).
  ParameterSet with_tensors(std::vector<Tensor> tensors) const;
  /// Fresh requires-grad leaves holding the current values.
  ParameterSet as_leaves() const;
  ParameterSet detached() const;

  /// FNV-1a over names, shapes and value bits.
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
};

}  // namespace tsmi::ad
