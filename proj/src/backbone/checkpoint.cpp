// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsmi/backbone/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tsmi/data/dataset.hpp"

namespace tsmi::backbone {
namespace {

constexpr char kMagic[4] = {'L', 'T', 'S', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(std::string bytes, std::string path) : bytes_(std::move(bytes)), path_(std::move(path)) {}

  template <typename T>
  T take() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    need(sizeof(U));
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }

  std::string take_bytes(std::size_t count) {
    need(count);
    std::string s = bytes_.substr(pos_, count);
    pos_ += count;
    return s;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t count) const {
    if (bytes_.size() - pos_ < count) {
      throw data::IoError("checkpoint " + path_ + ": truncated at byte " + std::to_string(pos_));
    }
  }

  std::string bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_checkpoint(const ad::ParameterSet& params, const std::filesystem::path& path) {
  std::string out(kMagic, 4);
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& name = params.names()[i];
    const auto& t = params.tensors()[i];
    put(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put(out, static_cast<std::uint32_t>(t.rank()));
    for (auto e : t.shape()) put(out, static_cast<std::uint64_t>(e));
    for (double v : t.values()) put(out, v);
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw data::IoError("cannot open " + path.string() + " for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw data::IoError("write failed: " + path.string());
}

ad::ParameterSet read_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw data::IoError("cannot open " + path.string());
  Reader in(std::string(std::istreambuf_iterator<char>(file), {}), path.string());
  if (in.take_bytes(4) != std::string(kMagic, 4)) {
    throw data::IoError("checkpoint " + path.string() + ": bad magic");
  }
  const auto version = in.take<std::uint32_t>();
  if (version != kVersion) {
    throw data::IoError("checkpoint " + path.string() + ": unsupported version " + std::to_string(version));
  }
  const auto count = in.take<std::uint32_t>();
  ad::ParameterSet params;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = in.take_bytes(in.take<std::uint32_t>());
    const auto rank = in.take<std::uint32_t>();
    ad::Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(in.take<std::uint64_t>());
    std::vector<double> values(ad::element_count(shape));
    for (double& v : values) v = in.take<double>();
    try {
      params.add(std::move(name), ad::Tensor::leaf(std::move(shape), std::move(values)));
    } catch (const std::invalid_argument& e) {
      throw data::IoError("checkpoint " + path.string() + ": " + e.what());
    }
  }
  if (!in.at_end()) throw data::IoError("checkpoint " + path.string() + ": trailing bytes");
  return params;
}

ad::ParameterSet with_prefix(const ad::ParameterSet& params, const std::string& prefix) {
  ad::ParameterSet out;
  for (std::size_t i = 0; i < params.size(); ++i) out.add(prefix + params.names()[i], params.tensors()[i]);
  return out;
}

ad::ParameterSet strip_prefix(const ad::ParameterSet& params, const std::string& prefix) {
  ad::ParameterSet out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& name = params.names()[i];
    if (name.starts_with(prefix)) out.add(name.substr(prefix.size()), params.tensors()[i]);
  }
  return out;
}

ad::ParameterSet merge(const ad::ParameterSet& a, const ad::ParameterSet& b) {
  ad::ParameterSet out = a;
  for (std::size_t i = 0; i < b.size(); ++i) out.add(b.names()[i], b.tensors()[i]);
  return out;
}

}  // namespace tsmi::backbone
