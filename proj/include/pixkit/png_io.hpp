#pragma once

#include <filesystem>

#include "pixkit/image.hpp"

namespace pixkit {

/// writes 8-bit RGB, no alpha, fixed compression settings so repeated runs
/// produce byte-identical files
void save_png(const RgbImage& img, const std::filesystem::path& path);

/// reads any PNG and normalizes to 8-bit RGB (palette expanded, 16-bit
/// narrowed, alpha stripped, gray promoted)
RgbImage load_png(const std::filesystem::path& path);

}  // namespace pixkit
