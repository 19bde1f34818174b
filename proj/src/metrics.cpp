#include "pixkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace pixkit::metrics {

static void check_dims(bool ok, const char* op) {
    if (!ok) throw std::invalid_argument(std::string(op) + ": dimension mismatch");
}

MetricReport psnr(const RgbImage& a, const RgbImage& b) {
    check_dims(a.same_dims(b), "psnr");
    double se = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = static_cast<double>(a.pixels[i]) - b.pixels[i];
        se += d * d;
    }
    const size_t n = a.pixels.size();
    MetricReport r{"psnr", 0.0, false, static_cast<size_t>(a.height) * a.width};
    if (se == 0.0) {
        r.infinite = true;
        return r;
    }
    const double mse = se / static_cast<double>(n);
    r.value = 10.0 * std::log10(255.0 * 255.0 / mse);
    return r;
}

static std::vector<double> luma(const RgbImage& img) {
    std::vector<double> y(static_cast<size_t>(img.height) * img.width);
    for (size_t i = 0; i < y.size(); ++i) {
        const uint8_t* p = img.pixels.data() + 3 * i;
        y[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    }
    return y;
}

MetricReport ssim(const RgbImage& a, const RgbImage& b) {
    check_dims(a.same_dims(b), "ssim");
    constexpr int win = 8;
    if (a.height < win || a.width < win) {
        throw std::invalid_argument("ssim: image smaller than the 8x8 window");
    }
    constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    const std::vector<double> ya = luma(a);
    const std::vector<double> yb = luma(b);
    const int w = a.width;
    double total = 0.0;
    size_t windows = 0;
    for (int y0 = 0; y0 + win <= a.height; ++y0) {
        for (int x0 = 0; x0 + win <= a.width; ++x0) {
            double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
            for (int dy = 0; dy < win; ++dy) {
                for (int dx = 0; dx < win; ++dx) {
                    const double va = ya[static_cast<size_t>(y0 + dy) * w + x0 + dx];
                    const double vb = yb[static_cast<size_t>(y0 + dy) * w + x0 + dx];
                    sa += va; sb += vb;
                    saa += va * va; sbb += vb * vb; sab += va * vb;
                }
            }
            constexpr double n = win * win;
            const double mu_a = sa / n, mu_b = sb / n;
            const double var_a = saa / n - mu_a * mu_a;
            const double var_b = sbb / n - mu_b * mu_b;
            const double cov = sab / n - mu_a * mu_b;
            total += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
                     ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
            ++windows;
        }
    }
    return {"ssim", total / static_cast<double>(windows), false, windows};
}

MetricReport rmse(const DepthMap& pred, const DepthMap& gt) {
    check_dims(pred.height == gt.height && pred.width == gt.width, "rmse");
    double se = 0.0;
    for (size_t i = 0; i < pred.values.size(); ++i) {
        const double d = pred.values[i] - gt.values[i];
        se += d * d;
    }
    return {"rmse", std::sqrt(se / static_cast<double>(pred.values.size())), false,
            pred.values.size()};
}

MetricReport mean_angle_error(const NormalMap& pred, const NormalMap& gt) {
    check_dims(pred.height == gt.height && pred.width == gt.width, "mean_angle_error");
    double total = 0.0;
    const size_t n = static_cast<size_t>(pred.height) * pred.width;
    for (size_t i = 0; i < n; ++i) {
        const double* p = pred.vectors.data() + 3 * i;
        const double* g = gt.vectors.data() + 3 * i;
        const double d = std::clamp(p[0] * g[0] + p[1] * g[1] + p[2] * g[2], -1.0, 1.0);
        total += std::acos(d) * 180.0 / M_PI;
    }
    return {"mean_angle_error_deg", total / static_cast<double>(n), false, n};
}

MetricReport miou(const LabelMap& pred, const LabelMap& gt, uint32_t num_classes) {
    check_dims(pred.height == gt.height && pred.width == gt.width, "miou");
    std::vector<size_t> inter(num_classes, 0), in_pred(num_classes, 0), in_gt(num_classes, 0);
    for (size_t i = 0; i < pred.labels.size(); ++i) {
        const uint32_t p = pred.labels[i], g = gt.labels[i];
        if (p >= num_classes || g >= num_classes) {
            throw std::invalid_argument("miou: label >= num_classes");
        }
        ++in_pred[p];
        ++in_gt[g];
        if (p == g) ++inter[p];
    }
    double total = 0.0;
    size_t present = 0;
    for (uint32_t c = 0; c < num_classes; ++c) {
        const size_t uni = in_pred[c] + in_gt[c] - inter[c];
        if (uni == 0) continue;  // class absent from both
        total += static_cast<double>(inter[c]) / static_cast<double>(uni);
        ++present;
    }
    return {"miou", present ? total / static_cast<double>(present) : 0.0, false, present};
}

MetricReport ciou(const std::vector<BinaryMask>& preds, const std::vector<BinaryMask>& gts) {
    if (preds.size() != gts.size()) throw std::invalid_argument("ciou: length mismatch");
    size_t inter = 0, uni = 0;
    for (size_t k = 0; k < preds.size(); ++k) {
        check_dims(preds[k].same_dims(gts[k]), "ciou");
        for (size_t i = 0; i < preds[k].bits.size(); ++i) {
            const bool p = preds[k].bits[i], g = gts[k].bits[i];
            inter += (p && g);
            uni += (p || g);
        }
    }
    // all-empty set has no defined value; report 0 over 0 instances
    return {"ciou", uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0, false,
            preds.size()};
}

MetricReport l1_distance(const RgbImage& a, const RgbImage& b) {
    check_dims(a.same_dims(b), "l1_distance");
    double total = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        total += std::abs(static_cast<double>(a.pixels[i]) - b.pixels[i]);
    }
    return {"l1", total / static_cast<double>(a.pixels.size()) / 255.0, false,
            static_cast<size_t>(a.height) * a.width};
}

}  // namespace pixkit::metrics
