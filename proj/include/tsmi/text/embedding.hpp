// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "tsmi/autodiff/tensor.hpp"
#include "tsmi/data/dataset.hpp"
#include "tsmi/text/description.hpp"

namespace tsmi::text {

/// Malformed embedding file.
class FormatError : public data::IoError {
 public:
  enum class Kind { kBadMagic, kVersionMismatch, kTruncated, kDuplicateKey, kBadHeader };

  FormatError(Kind kind, const std::string& message) : data::IoError(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// A key with no entry in the table.
class MissingKeyError : public std::out_of_range {
 public:
  explicit MissingKeyError(std::uint64_t key);
  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

/// Key -> float32 vector. Values are widened to double on lookup, so a
/// written and reloaded table is bit-identical.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::uint32_t dim = 4096);

  std::uint32_t dim() const { return dim_; }
  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }
  const std::vector<std::uint64_t>& keys() const { return keys_; }

  /// Returns false (and leaves the table unchanged) when the key is present.
  bool insert(std::uint64_t key, std::span<const double> values);
  bool insert_f32(std::uint64_t key, std::vector<float> values);
  bool contains(std::uint64_t key) const { return entries_.count(key) > 0; }
  std::vector<double> lookup(std::uint64_t key) const;
  std::span<const float> raw(std::uint64_t key) const;

  bool operator==(const EmbeddingTable& other) const;

 private:
  std::uint32_t dim_;
  std::vector<std::uint64_t> keys_;
  std::unordered_map<std::uint64_t, std::vector<float>> entries_;
};

/// File layout: "LTSE" | u16 version = 1 | u16 reserved = 0 | u32 dim |
/// u32 count | count x (u64 key, dim x f32). Little-endian. Written to a
/// temporary file and renamed into place.
void write_embedding_file(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable load_embedding_file(const std::filesystem::path& path);

/// Standard-normal draws seeded by (key, seed), scaled to unit L2 norm.
std::vector<double> fallback_embed(const Description& description, std::size_t dim,
                                   std::uint64_t seed);

/// Where text vectors come from during training: a loaded table, or the
/// fallback embedder.
class TextEmbedder {
 public:
  static TextEmbedder from_table(EmbeddingTable table, bool normalize = true);
  static TextEmbedder fallback(std::size_t dim, std::uint64_t seed, bool normalize = true);

  std::size_t dim() const;
  bool uses_table() const { return table_.has_value(); }
  /// Throws MissingKeyError for keys absent from the table.
  std::vector<double> embed(const Description& description) const;
  /// Mean over channels of the per-channel vectors; one row per window.
  ad::Tensor embed_windows(const std::vector<std::vector<Description>>& windows) const;

 private:
  std::optional<EmbeddingTable> table_;
  std::size_t dim_ = 0;
  std::uint64_t seed_ = 0;
  bool normalize_ = true;
};

/// JSON Lines, one {"key": "<16 hex>", "text": "..."} object per line.
void write_descriptions(const std::vector<Description>& descriptions, const std::filesystem::path& path);
/// Validates that every key matches its text.
std::vector<Description> read_descriptions(const std::filesystem::path& path);

}  // namespace tsmi::text
