#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pixkit/image.hpp"

namespace pixkit::metrics {

struct MetricReport {
    std::string name;
    double value = 0.0;
    bool infinite = false;  // PSNR of identical images
    size_t count = 0;       // pixels or instances aggregated
};

/// 10*log10(255^2 / MSE) over all channels; identical images come back with
/// the infinite flag set instead of a value
MetricReport psnr(const RgbImage& a, const RgbImage& b);

/// mean local SSIM: 8x8 uniform window, stride 1, C1=(0.01*255)^2,
/// C2=(0.03*255)^2, computed on BT.601 luma. Needs at least 8x8 input.
MetricReport ssim(const RgbImage& a, const RgbImage& b);

/// sqrt(mean squared meter error)
MetricReport rmse(const DepthMap& pred, const DepthMap& gt);

/// mean over pixels of arccos(clamp(dot,-1,1)), in degrees
MetricReport mean_angle_error(const NormalMap& pred, const NormalMap& gt);

/// mean IoU over the classes present in either map; classes absent from
/// both are skipped
MetricReport miou(const LabelMap& pred, const LabelMap& gt, uint32_t num_classes);

/// cumulative IoU: sum of intersections over sum of unions across the whole
/// set (not the mean of per-pair IoUs); 0/0 pairs are skipped
MetricReport ciou(const std::vector<BinaryMask>& preds, const std::vector<BinaryMask>& gts);

/// mean absolute per-channel difference, normalized to [0,1]
MetricReport l1_distance(const RgbImage& a, const RgbImage& b);

}  // namespace pixkit::metrics
