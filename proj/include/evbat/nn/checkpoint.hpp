#pragma once

#include "evbat/nn/tensor.hpp"

#include <filesystem>
#include <string>

namespace evbat::nn {

/// JSON checkpoint of named tensors with shapes and a config hash.
/// Double values round-trip exactly.
void save_checkpoint(const std::filesystem::path& path, const TensorRefs& params,
                     const std::string& config_hash);

/// Restores values into the given tensors (matched by name, shape-checked).
/// Returns the stored config hash.
std::string load_checkpoint(const std::filesystem::path& path,
                            const TensorRefs& params);

/// FNV-1a hex digest used as the checkpoint's config hash.
std::string config_hash(const std::string& serialized_config);

}  // namespace evbat::nn
