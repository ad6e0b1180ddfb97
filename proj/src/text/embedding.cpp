// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/text/embedding.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "tsmi/common/rng.hpp"

namespace tsmi::text {
namespace {

constexpr char kMagic[4] = {'L', 'T', 'S', 'E'};
constexpr std::uint16_t kVersion = 1;

template <typename U>
void put(std::string& out, U bits) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

template <typename U>
U get(const std::string& bytes, std::size_t& pos) {
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bits |= static_cast<U>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
  }
  pos += sizeof(U);
  return bits;
}

void normalize_in_place(std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0) {
    for (double& x : v) x /= norm;
  }
}

void write_atomic(const std::string& bytes, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw data::IoError("cannot open " + tmp.string() + " for writing");
    file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!file) throw data::IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw data::IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace

MissingKeyError::MissingKeyError(std::uint64_t key)
    : std::out_of_range("no embedding for description key " + key_hex(key)), key_(key) {}

EmbeddingTable::EmbeddingTable(std::uint32_t dim) : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("embedding dim must be positive");
}

bool EmbeddingTable::insert(std::uint64_t key, std::span<const double> values) {
  std::vector<float> v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) v[i] = static_cast<float>(values[i]);
  return insert_f32(key, std::move(v));
}

bool EmbeddingTable::insert_f32(std::uint64_t key, std::vector<float> values) {
  if (values.size() != dim_) {
    throw std::invalid_argument("embedding length " + std::to_string(values.size()) +
                                " does not match table dim " + std::to_string(dim_));
  }
  if (!entries_.emplace(key, std::move(values)).second) return false;
  keys_.push_back(key);
  return true;
}

std::span<const float> EmbeddingTable::raw(std::uint64_t key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw MissingKeyError(key);
  return it->second;
}

std::vector<double> EmbeddingTable::lookup(std::uint64_t key) const {
  auto v = raw(key);
  return {v.begin(), v.end()};
}

bool EmbeddingTable::operator==(const EmbeddingTable& other) const {
  if (dim_ != other.dim_ || keys_ != other.keys_) return false;
  for (auto key : keys_) {
    const auto& a = entries_.at(key);
    const auto& b = other.entries_.at(key);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::bit_cast<std::uint32_t>(a[i]) != std::bit_cast<std::uint32_t>(b[i])) return false;
    }
  }
  return true;
}

void write_embedding_file(const EmbeddingTable& table, const std::filesystem::path& path) {
  if (table.empty()) throw std::invalid_argument("refusing to write an empty embedding table");
  std::string out(kMagic, 4);
  out.reserve(16 + table.size() * (8 + 4 * std::size_t{table.dim()}));
  put<std::uint16_t>(out, kVersion);
  put<std::uint16_t>(out, 0);
  put<std::uint32_t>(out, table.dim());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(table.size()));
  for (auto key : table.keys()) {
    put<std::uint64_t>(out, key);
    for (float v : table.raw(key)) put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  write_atomic(out, path);
}

EmbeddingTable load_embedding_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw data::IoError("cannot open " + path.string());
  const std::string bytes(std::istreambuf_iterator<char>(file), {});
  const std::string where = "embedding file " + path.string() + ": ";
  using Kind = FormatError::Kind;
  if (bytes.size() < 4 || bytes.compare(0, 4, kMagic, 4) != 0) throw FormatError(Kind::kBadMagic, where + "bad magic");
  if (bytes.size() < 16) throw FormatError(Kind::kTruncated, where + "truncated header");
  std::size_t pos = 4;
  const auto version = get<std::uint16_t>(bytes, pos);
  if (version != kVersion) {
    throw FormatError(Kind::kVersionMismatch, where + "version " + std::to_string(version) +
                                                  ", expected " + std::to_string(kVersion));
  }
  if (get<std::uint16_t>(bytes, pos) != 0) throw FormatError(Kind::kBadHeader, where + "reserved field is not zero");
  const auto dim = get<std::uint32_t>(bytes, pos);
  const auto count = get<std::uint32_t>(bytes, pos);
  if (dim == 0) throw FormatError(Kind::kBadHeader, where + "dim is zero");
  const std::size_t record = 8 + 4 * std::size_t{dim};
  EmbeddingTable table(dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (bytes.size() - pos < record) {
      throw FormatError(Kind::kTruncated, where + "truncated record " + std::to_string(i));
    }
    const auto key = get<std::uint64_t>(bytes, pos);
    std::vector<float> v(dim);
    for (float& x : v) x = std::bit_cast<float>(get<std::uint32_t>(bytes, pos));
    if (!table.insert_f32(key, std::move(v))) {
      throw FormatError(Kind::kDuplicateKey, where + "duplicate key " + key_hex(key));
    }
  }
  if (pos != bytes.size()) throw FormatError(Kind::kBadHeader, where + "trailing bytes after " + std::to_string(count) + " records");
  return table;
}

std::vector<double> fallback_embed(const Description& description, std::size_t dim,
                                   std::uint64_t seed) {
  if (dim == 0) throw std::invalid_argument("fallback_embed: dim must be positive");
  Rng rng(mix_seed(description.key, seed));
  std::vector<double> v(dim);
  for (double& x : v) x = rng.normal();
  normalize_in_place(v);
  return v;
}

TextEmbedder TextEmbedder::from_table(EmbeddingTable table, bool normalize) {
  TextEmbedder e;
  e.dim_ = table.dim();
  e.table_ = std::move(table);
  e.normalize_ = normalize;
  return e;
}

TextEmbedder TextEmbedder::fallback(std::size_t dim, std::uint64_t seed, bool normalize) {
  if (dim == 0) throw std::invalid_argument("embedding dim must be positive");
  TextEmbedder e;
  e.dim_ = dim;
  e.seed_ = seed;
  e.normalize_ = normalize;
  return e;
}

std::size_t TextEmbedder::dim() const { return dim_; }

std::vector<double> TextEmbedder::embed(const Description& description) const {
  auto v = table_ ? table_->lookup(description.key) : fallback_embed(description, dim_, seed_);
  if (normalize_) normalize_in_place(v);
  return v;
}

ad::Tensor TextEmbedder::embed_windows(const std::vector<std::vector<Description>>& windows) const {
  std::vector<double> out(windows.size() * dim_, 0.0);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].empty()) throw std::invalid_argument("embed_windows: window without descriptions");
    const double share = 1.0 / static_cast<double>(windows[i].size());
    for (const auto& d : windows[i]) {
      const auto v = embed(d);
      for (std::size_t j = 0; j < dim_; ++j) out[i * dim_ + j] += share * v[j];
    }
  }
  return ad::Tensor::constant({windows.size(), dim_}, std::move(out));
}

void write_descriptions(const std::vector<Description>& descriptions, const std::filesystem::path& path) {
  std::string out;
  for (const auto& d : descriptions) {
    nlohmann::ordered_json j;
    j["key"] = key_hex(d.key);
    j["text"] = d.text;
    out += j.dump();
    out += '\n';
  }
  write_atomic(out, path);
}

std::vector<Description> read_descriptions(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw data::IoError("cannot open " + path.string());
  std::vector<Description> out;
  std::string line;
  for (std::size_t n = 1; std::getline(file, line); ++n) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Description d;
      d.text = j.at("text").get<std::string>();
      d.key = parse_key_hex(j.at("key").get<std::string>());
      if (d.key != fnv1a64(d.text)) throw std::invalid_argument("key does not match text");
      out.push_back(std::move(d));
    } catch (const std::exception& e) {
      throw data::DataError(path.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace tsmi::text
