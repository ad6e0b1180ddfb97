// Copyright 2026 The tsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "tsmi/autodiff/parameters.hpp"

namespace tsmi::backbone {

/// Binary parameter file: "LTSP", u32 version, u32 count, then per tensor
/// u32 name length, name bytes, u32 rank, u64 extents, f64 values. All
/// integers and floats little-endian.
void write_checkpoint(const ad::ParameterSet& params, const std::filesystem::path& path);

/// Tensors come back as requires-grad leaves. Throws data::IoError.
ad::ParameterSet read_checkpoint(const std::filesystem::path& path);

/// Copy of `params` with every name prefixed.
ad::ParameterSet with_prefix(const ad::ParameterSet& params, const std::string& prefix);
/// Entries whose name starts with `prefix`, prefix removed.
ad::ParameterSet strip_prefix(const ad::ParameterSet& params, const std::string& prefix);
/// Concatenation; duplicate names throw.
ad::ParameterSet merge(const ad::ParameterSet& a, const ad::ParameterSet& b);

}  // namespace tsmi::backbone
