// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/autodiff/parameters.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace tsmi::ad {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

}  // namespace

void ParameterSet::add(std::string name, Tensor tensor) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(tensor));
}

const Tensor& ParameterSet::get(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::out_of_range("unknown parameter: " + std::string(name));
  return tensors_[static_cast<std::size_t>(it - names_.begin())];
}

bool ParameterSet::contains(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t ParameterSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.numel();
  return n;
}

ParameterSet ParameterSet::with_tensors(std::vector<Tensor> tensors) const {
  if (tensors.size() != tensors_.size()) {
    throw std::invalid_argument("with_tensors: expected " + std::to_string(tensors_.size()) +
                                " tensors, got " + std::to_string(tensors.size()));
  }
  ParameterSet out;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].shape() != tensors_[i].shape()) {
      throw ShapeError("with_tensors", tensors[i].shape(), tensors_[i].shape());
    }
    out.add(names_[i], std::move(tensors[i]));
  }
  return out;
}

ParameterSet ParameterSet::as_leaves() const {
  ParameterSet out;
  for (std::size_t i = 0; i < tensors_.size(); ++i) out.add(names_[i], tensors_[i].as_leaf(true));
  return out;
}

ParameterSet ParameterSet::detached() const {
  ParameterSet out;
  for (std::size_t i = 0; i < tensors_.size(); ++i) out.add(names_[i], tensors_[i].detach());
  return out;
}

std::uint64_t ParameterSet::fingerprint() const {
  std::uint64_t h = kFnvOffset;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    fnv_bytes(h, names_[i].data(), names_[i].size());
    for (auto e : tensors_[i].shape()) {
      const auto extent = static_cast<std::uint64_t>(e);
      fnv_bytes(h, &extent, sizeof extent);
    }
    for (double v : tensors_[i].values()) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      fnv_bytes(h, &bits, sizeof bits);
    }
  }
  return h;
}

}  // namespace tsmi::ad
