#pragma once

#include <filesystem>

#include "pixkit/tensor.hpp"

namespace pixkit {

// ".tsr" tensor file: one JSON header line {"shape":[...],"dtype":"f64"}
// terminated by '\n', then the raw little-endian f64 payload.
void save_tsr(const Tensor& t, const std::filesystem::path& path);
Tensor load_tsr(const std::filesystem::path& path);

}  // namespace pixkit
