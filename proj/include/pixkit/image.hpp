#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace pixkit {

using Rgb = std::array<uint8_t, 3>;

// 8-bit RGB image, row-major, no alpha. The universal carrier: every task
// in this toolkit reads and writes these.
struct RgbImage {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> pixels;  // height*width*3

    RgbImage() = default;
    RgbImage(int h, int w);
    RgbImage(int h, int w, Rgb fill);

    uint8_t* px(int y, int x) { return pixels.data() + 3 * (static_cast<size_t>(y) * width + x); }
    const uint8_t* px(int y, int x) const {
        return pixels.data() + 3 * (static_cast<size_t>(y) * width + x);
    }
    void set(int y, int x, Rgb c) {
        uint8_t* p = px(y, x);
        p[0] = c[0]; p[1] = c[1]; p[2] = c[2];
    }
    Rgb get(int y, int x) const {
        const uint8_t* p = px(y, x);
        return {p[0], p[1], p[2]};
    }
    bool same_dims(const RgbImage& o) const { return height == o.height && width == o.width; }
};

// per-pixel metric depth, f64
struct DepthMap {
    int height = 0;
    int width = 0;
    std::vector<double> values;  // height*width

    DepthMap() = default;
    DepthMap(int h, int w, double fill = 0.0)
        : height(h), width(w), values(static_cast<size_t>(h) * w, fill) {}
    double& at(int y, int x) { return values[static_cast<size_t>(y) * width + x]; }
    double at(int y, int x) const { return values[static_cast<size_t>(y) * width + x]; }
};

// per-pixel class ids
struct LabelMap {
    int height = 0;
    int width = 0;
    std::vector<uint32_t> labels;

    LabelMap() = default;
    LabelMap(int h, int w, uint32_t fill = 0)
        : height(h), width(w), labels(static_cast<size_t>(h) * w, fill) {}
    uint32_t& at(int y, int x) { return labels[static_cast<size_t>(y) * width + x]; }
    uint32_t at(int y, int x) const { return labels[static_cast<size_t>(y) * width + x]; }
};

// per-pixel unit vectors (x,y,z)
struct NormalMap {
    int height = 0;
    int width = 0;
    std::vector<double> vectors;  // height*width*3

    NormalMap() = default;
    NormalMap(int h, int w) : height(h), width(w), vectors(static_cast<size_t>(h) * w * 3, 0.0) {}
    double* vec(int y, int x) { return vectors.data() + 3 * (static_cast<size_t>(y) * width + x); }
    const double* vec(int y, int x) const {
        return vectors.data() + 3 * (static_cast<size_t>(y) * width + x);
    }
};

struct BinaryMask {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> bits;  // 0 or 1

    BinaryMask() = default;
    BinaryMask(int h, int w, bool fill = false)
        : height(h), width(w), bits(static_cast<size_t>(h) * w, fill ? 1 : 0) {}
    uint8_t& at(int y, int x) { return bits[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int y, int x) const { return bits[static_cast<size_t>(y) * width + x]; }
    size_t count_true() const;
    double true_fraction() const;
    bool same_dims(const BinaryMask& o) const { return height == o.height && width == o.width; }
};

// pixel coordinates, inclusive on both corners
struct BBox {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    int box_width() const { return x1 - x0 + 1; }
    int box_height() const { return y1 - y0 + 1; }
    bool operator==(const BBox&) const = default;
};

}  // namespace pixkit
