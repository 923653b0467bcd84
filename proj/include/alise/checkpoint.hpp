#pragma once

#include <string>

#include "alise/graph.hpp"

namespace alise {

/// Versioned container of named parameter tensors (little-endian float32)
/// plus a config snapshot. Loading verifies every name and shape against the
/// receiving store.
void save_checkpoint(const std::string& path, const ParamStore& ps, const std::string& config_text);

/// Returns the stored config snapshot.
std::string load_checkpoint(const std::string& path, ParamStore& ps);

/// Config snapshot without touching parameters.
std::string read_checkpoint_config(const std::string& path);

}  // namespace alise
