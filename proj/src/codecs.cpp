#include "pixkit/codecs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pixkit {

RgbImage::RgbImage(int h, int w)
    : height(h), width(w), pixels(static_cast<size_t>(h) * w * 3, 0) {
    if (h < 1 || w < 1) throw std::invalid_argument("RgbImage: dimensions must be >= 1");
}

RgbImage::RgbImage(int h, int w, Rgb fill) : RgbImage(h, w) {
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) set(y, x, fill);
}

size_t BinaryMask::count_true() const {
    size_t n = 0;
    for (uint8_t b : bits) n += b;
    return n;
}

double BinaryMask::true_fraction() const {
    if (bits.empty()) return 0.0;
    return static_cast<double>(count_true()) / static_cast<double>(bits.size());
}

namespace codecs {

static uint8_t quantize01(double v01) {
    return static_cast<uint8_t>(std::lround(std::clamp(v01, 0.0, 1.0) * 255.0));
}

// ---------------------------------------------------------------------------
// depth
// ---------------------------------------------------------------------------

RgbImage encode_depth(const DepthMap& d, const DepthCodecParams& p) {
    if (!(p.d_min < p.d_max)) throw std::invalid_argument("encode_depth: d_min must be < d_max");
    RgbImage img(d.height, d.width);
    const double range = p.d_max - p.d_min;
    for (int y = 0; y < d.height; ++y) {
        for (int x = 0; x < d.width; ++x) {
            const double v = d.at(y, x);
            if (!(v >= p.d_min && v <= p.d_max)) {
                throw std::runtime_error("encode_depth: depth " + std::to_string(v) +
                                         " out of range at pixel (" + std::to_string(x) + "," +
                                         std::to_string(y) + ")");
            }
            const uint8_t q = static_cast<uint8_t>(std::lround(255.0 * (v - p.d_min) / range));
            img.set(y, x, {q, q, q});
        }
    }
    return img;
}

DepthMap decode_depth(const RgbImage& img, const DepthCodecParams& p) {
    if (!(p.d_min < p.d_max)) throw std::invalid_argument("decode_depth: d_min must be < d_max");
    DepthMap d(img.height, img.width);
    const double range = p.d_max - p.d_min;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const Rgb c = img.get(y, x);
            const double mean = (static_cast<double>(c[0]) + c[1] + c[2]) / 3.0;
            d.at(y, x) = std::clamp(p.d_min + mean / 255.0 * range, p.d_min, p.d_max);
        }
    }
    return d;
}

// ---------------------------------------------------------------------------
// semantic labels
// ---------------------------------------------------------------------------

void Palette::validate() const {
    if (entries.empty()) throw std::invalid_argument("Palette: empty");
    for (size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].first == 0 && entries[i].second != Rgb{0, 0, 0}) {
            throw std::invalid_argument("Palette: class 0 must map to (0,0,0)");
        }
        for (size_t j = i + 1; j < entries.size(); ++j) {
            if (entries[i].second == entries[j].second) {
                throw std::invalid_argument("Palette: duplicate color for classes " +
                                            std::to_string(entries[i].first) + " and " +
                                            std::to_string(entries[j].first));
            }
            if (entries[i].first == entries[j].first) {
                throw std::invalid_argument("Palette: duplicate class id " +
                                            std::to_string(entries[i].first));
            }
        }
    }
}

std::optional<Rgb> Palette::color_of(uint32_t id) const {
    for (const auto& [cid, rgb] : entries)
        if (cid == id) return rgb;
    return std::nullopt;
}

RgbImage encode_labels(const LabelMap& l, const Palette& pal) {
    pal.validate();
    RgbImage img(l.height, l.width);
    for (int y = 0; y < l.height; ++y) {
        for (int x = 0; x < l.width; ++x) {
            const uint32_t id = l.at(y, x);
            const auto c = pal.color_of(id);
            if (!c) throw std::runtime_error("encode_labels: label " + std::to_string(id) +
                                             " not in palette");
            img.set(y, x, *c);
        }
    }
    return img;
}

LabelMap decode_labels(const RgbImage& img, const Palette& pal) {
    pal.validate();
    LabelMap l(img.height, img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const Rgb c = img.get(y, x);
            long best_d = std::numeric_limits<long>::max();
            uint32_t best_id = 0;
            for (const auto& [id, pc] : pal.entries) {
                const long dr = static_cast<long>(c[0]) - pc[0];
                const long dg = static_cast<long>(c[1]) - pc[1];
                const long db = static_cast<long>(c[2]) - pc[2];
                const long d = dr * dr + dg * dg + db * db;
                if (d < best_d || (d == best_d && id < best_id)) {
                    best_d = d;
                    best_id = id;
                }
            }
            l.at(y, x) = best_id;
        }
    }
    return l;
}

// ---------------------------------------------------------------------------
// surface normals
// ---------------------------------------------------------------------------

RgbImage encode_normals(const NormalMap& n) {
    RgbImage img(n.height, n.width);
    for (int y = 0; y < n.height; ++y) {
        for (int x = 0; x < n.width; ++x) {
            const double* v = n.vec(y, x);
            const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
            if (std::abs(norm - 1.0) > 1e-6) {
                throw std::runtime_error("encode_normals: non-unit vector (norm " +
                                         std::to_string(norm) + ") at pixel (" +
                                         std::to_string(x) + "," + std::to_string(y) + ")");
            }
            img.set(y, x, {quantize01((v[0] + 1.0) / 2.0), quantize01((v[1] + 1.0) / 2.0),
                           quantize01((v[2] + 1.0) / 2.0)});
        }
    }
    return img;
}

NormalMap decode_normals(const RgbImage& img) {
    NormalMap n(img.height, img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const Rgb c = img.get(y, x);
            double v[3];
            for (int k = 0; k < 3; ++k) v[k] = 2.0 * c[k] / 255.0 - 1.0;
            const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
            double* out = n.vec(y, x);
            if (norm < 1e-2) {
                out[0] = 0.0; out[1] = 0.0; out[2] = 1.0;
            } else {
                out[0] = v[0] / norm; out[1] = v[1] / norm; out[2] = v[2] / norm;
            }
        }
    }
    return n;
}

// ---------------------------------------------------------------------------
// binary masks and grounding overlays
// ---------------------------------------------------------------------------

RgbImage mask_to_rgb(const BinaryMask& m) {
    RgbImage img(m.height, m.width);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.at(y, x)) img.set(y, x, {255, 255, 255});
    return img;
}

BinaryMask rgb_to_mask(const RgbImage& img, int threshold) {
    BinaryMask m(img.height, img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const Rgb c = img.get(y, x);
            m.at(y, x) = (static_cast<int>(c[0]) + c[1] + c[2] >= 3 * threshold) ? 1 : 0;
        }
    }
    return m;
}

RgbImage overlay_mask(const RgbImage& img, const BinaryMask& m, Rgb color, double alpha) {
    if (img.height != m.height || img.width != m.width) {
        throw std::invalid_argument("overlay_mask: image/mask dimension mismatch");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("overlay_mask: alpha must be in [0,1]");
    }
    RgbImage out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (!m.at(y, x)) continue;
            const Rgb c = img.get(y, x);
            Rgb blended;
            for (int k = 0; k < 3; ++k) {
                blended[k] = static_cast<uint8_t>(
                    std::lround((1.0 - alpha) * c[k] + alpha * color[k]));
            }
            out.set(y, x, blended);
        }
    }
    return out;
}

struct Hsv {
    double hue_deg;   // [0, 360)
    double sat;       // [0, 1]
    double val;       // [0, 1]
    bool hue_defined; // false for grays
};

static Hsv rgb_to_hsv(Rgb c) {
    const double r = c[0] / 255.0, g = c[1] / 255.0, b = c[2] / 255.0;
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double chroma = mx - mn;
    Hsv out{0.0, 0.0, mx, chroma > 0.0};
    if (mx > 0.0) out.sat = chroma / mx;
    if (!out.hue_defined) return out;
    double h;
    if (mx == r) h = std::fmod((g - b) / chroma, 6.0);
    else if (mx == g) h = (b - r) / chroma + 2.0;
    else h = (r - g) / chroma + 4.0;
    h *= 60.0;
    if (h < 0.0) h += 360.0;
    out.hue_deg = h;
    return out;
}

static double hue_distance(double a, double b) {
    const double d = std::fabs(a - b);
    return std::min(d, 360.0 - d);
}

BinaryMask extract_mask_hsv(const RgbImage& rendered, Rgb color, double hue_tol_deg,
                            double sat_min) {
    const Hsv target = rgb_to_hsv(color);
    if (!target.hue_defined) {
        throw std::invalid_argument("extract_mask_hsv: target color is gray (undefined hue)");
    }
    BinaryMask m(rendered.height, rendered.width);
    for (int y = 0; y < rendered.height; ++y) {
        for (int x = 0; x < rendered.width; ++x) {
            const Hsv h = rgb_to_hsv(rendered.get(y, x));
            if (!h.hue_defined) continue;
            if (h.sat >= sat_min && hue_distance(h.hue_deg, target.hue_deg) <= hue_tol_deg) {
                m.at(y, x) = 1;
            }
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// bounding boxes
// ---------------------------------------------------------------------------

static void check_bbox(const BBox& b, int h, int w, const char* op) {
    if (!(0 <= b.x0 && b.x0 <= b.x1 && b.x1 < w && 0 <= b.y0 && b.y0 <= b.y1 && b.y1 < h)) {
        throw std::invalid_argument(std::string(op) + ": box out of bounds");
    }
}

RgbImage draw_bbox(const RgbImage& img, const BBox& b, Rgb color, int thickness) {
    check_bbox(b, img.height, img.width, "draw_bbox");
    if (thickness < 1) throw std::invalid_argument("draw_bbox: thickness must be >= 1");
    if (2 * thickness >= std::min(b.box_width(), b.box_height())) {
        throw std::invalid_argument(
            "draw_bbox: thickness " + std::to_string(thickness) +
            " leaves no interior for box " + std::to_string(b.box_width()) + "x" +
            std::to_string(b.box_height()));
    }
    RgbImage out = img;
    for (int y = b.y0; y <= b.y1; ++y) {
        for (int x = b.x0; x <= b.x1; ++x) {
            const bool frame = (y - b.y0 < thickness) || (b.y1 - y < thickness) ||
                               (x - b.x0 < thickness) || (b.x1 - x < thickness);
            if (frame) out.set(y, x, color);
        }
    }
    return out;
}

BBox extract_bbox(const RgbImage& rendered, Rgb color, int tol) {
    int x0 = rendered.width, y0 = rendered.height, x1 = -1, y1 = -1;
    for (int y = 0; y < rendered.height; ++y) {
        for (int x = 0; x < rendered.width; ++x) {
            const Rgb c = rendered.get(y, x);
            if (std::abs(static_cast<int>(c[0]) - color[0]) <= tol &&
                std::abs(static_cast<int>(c[1]) - color[1]) <= tol &&
                std::abs(static_cast<int>(c[2]) - color[2]) <= tol) {
                x0 = std::min(x0, x); x1 = std::max(x1, x);
                y0 = std::min(y0, y); y1 = std::max(y1, y);
            }
        }
    }
    if (x1 < 0) throw std::runtime_error("extract_bbox: no box found");
    return BBox{x0, y0, x1, y1};
}

// ---------------------------------------------------------------------------
// mask generators
// ---------------------------------------------------------------------------

static void stamp_disk(BinaryMask& m, double cy, double cx, double r) {
    const int y_lo = std::max(0, static_cast<int>(std::floor(cy - r)));
    const int y_hi = std::min(m.height - 1, static_cast<int>(std::ceil(cy + r)));
    const int x_lo = std::max(0, static_cast<int>(std::floor(cx - r)));
    const int x_hi = std::min(m.width - 1, static_cast<int>(std::ceil(cx + r)));
    for (int y = y_lo; y <= y_hi; ++y)
        for (int x = x_lo; x <= x_hi; ++x)
            if ((y - cy) * (y - cy) + (x - cx) * (x - cx) <= r * r) m.at(y, x) = 1;
}

static void stamp_rect(BinaryMask& m, int y0, int x0, int rh, int rw) {
    for (int y = y0; y < y0 + rh; ++y)
        for (int x = x0; x < x0 + rw; ++x) m.at(y, x) = 1;
}

// true when the rectangle, expanded by one pixel, intersects existing mask
// content; keeping a gap means rectangle components never merge
static bool rect_touches(const BinaryMask& m, int y0, int x0, int rh, int rw) {
    const int ylo = std::max(0, y0 - 1), yhi = std::min(m.height - 1, y0 + rh);
    const int xlo = std::max(0, x0 - 1), xhi = std::min(m.width - 1, x0 + rw);
    for (int y = ylo; y <= yhi; ++y)
        for (int x = xlo; x <= xhi; ++x)
            if (m.at(y, x)) return true;
    return false;
}

static void add_freeform_stroke(BinaryMask& m, RngState& rng, double target_px) {
    const double radius = std::max(1.5, std::sqrt(target_px) / 5.0);
    double cy = rng.next_uniform() * m.height;
    double cx = rng.next_uniform() * m.width;
    double angle = rng.next_uniform() * 2.0 * M_PI;
    const size_t before = m.count_true();
    const int max_steps = 64 + static_cast<int>(target_px / (radius * radius));
    for (int step = 0; step < max_steps; ++step) {
        stamp_disk(m, cy, cx, radius);
        if (static_cast<double>(m.count_true() - before) >= target_px) break;
        angle += (rng.next_uniform() - 0.5) * 1.2;
        cy = std::clamp(cy + std::sin(angle) * radius, 0.0, m.height - 1.0);
        cx = std::clamp(cx + std::cos(angle) * radius, 0.0, m.width - 1.0);
    }
}

BinaryMask gen_inpaint_mask(RngState& rng, int h, int w, const InpaintMaskSpec& spec) {
    if (!(spec.area_min > 0.0 && spec.area_max < 1.0 && spec.area_min <= spec.area_max)) {
        throw std::invalid_argument("gen_inpaint_mask: area fraction range must be within (0,1)");
    }
    if (!(spec.circles || spec.rectangles || spec.freeform)) {
        throw std::invalid_argument("gen_inpaint_mask: no shape kinds enabled");
    }
    if (spec.count_min < 1 || spec.count_max < spec.count_min) {
        throw std::invalid_argument("gen_inpaint_mask: bad count range");
    }
    std::vector<int> kinds;  // 0 circle, 1 rectangle, 2 freeform
    if (spec.circles) kinds.push_back(0);
    if (spec.rectangles) kinds.push_back(1);
    if (spec.freeform) kinds.push_back(2);

    const double total_px = static_cast<double>(h) * w;
    for (int attempt = 0; attempt < 100; ++attempt) {
        BinaryMask m(h, w);
        const int count =
            spec.count_min + static_cast<int>(rng.next_below(spec.count_max - spec.count_min + 1));
        const double target_frac =
            spec.area_min + rng.next_uniform() * (spec.area_max - spec.area_min);
        for (int s = 0; s < count; ++s) {
            // re-aim each shape at the remaining deficit
            const double remaining =
                std::max(0.0, target_frac * total_px - static_cast<double>(m.count_true()));
            const double shape_px = remaining / (count - s);
            if (shape_px < 1.0) break;
            const int kind = kinds[rng.next_below(kinds.size())];
            if (kind == 0) {
                const double r = std::min({std::sqrt(shape_px / M_PI), h / 2.0, w / 2.0});
                const double cy = r + rng.next_uniform() * std::max(0.0, h - 2.0 * r);
                const double cx = r + rng.next_uniform() * std::max(0.0, w - 2.0 * r);
                stamp_disk(m, cy, cx, r);
            } else if (kind == 1) {
                const double aspect = std::exp((rng.next_uniform() - 0.5) * 2.0 * std::log(2.5));
                int rw = std::clamp(static_cast<int>(std::lround(std::sqrt(shape_px * aspect))), 1, w);
                int rh = std::clamp(static_cast<int>(std::lround(shape_px / rw)), 1, h);
                bool placed = false;
                for (int tries = 0; tries < 20 && !placed; ++tries) {
                    const int y0 = static_cast<int>(rng.next_below(h - rh + 1));
                    const int x0 = static_cast<int>(rng.next_below(w - rw + 1));
                    if (!rect_touches(m, y0, x0, rh, rw)) {
                        stamp_rect(m, y0, x0, rh, rw);
                        placed = true;
                    }
                }
            } else {
                add_freeform_stroke(m, rng, shape_px);
            }
        }
        const double frac = m.true_fraction();
        if (frac >= spec.area_min && frac <= spec.area_max) return m;
    }
    throw std::runtime_error("gen_inpaint_mask: could not satisfy spec after 100 attempts");
}

std::pair<BinaryMask, BBox> gen_outpaint_mask(RngState& rng, int h, int w, double keep_frac_min,
                                              double keep_frac_max) {
    if (!(keep_frac_min > 0.0 && keep_frac_min <= keep_frac_max && keep_frac_max <= 1.0)) {
        throw std::invalid_argument("gen_outpaint_mask: keep fraction range must be within (0,1]");
    }
    const double f = keep_frac_min + rng.next_uniform() * (keep_frac_max - keep_frac_min);
    // not limited to square crops: log-uniform aspect in [1/2, 2]
    const double aspect = std::exp((rng.next_uniform() - 0.5) * 2.0 * std::log(2.0));
    const double area = f * h * w;
    int kw = std::clamp(static_cast<int>(std::lround(std::sqrt(area * aspect))), 1, w);
    int kh = std::max(1, static_cast<int>(std::lround(area / kw)));
    if (kh > h) {
        // aspect ran past the image; trade it back for the requested area
        kh = h;
        kw = std::clamp(static_cast<int>(std::lround(area / kh)), 1, w);
    }
    const int y0 = (h - kh) / 2;
    const int x0 = (w - kw) / 2;
    const BBox kept{x0, y0, x0 + kw - 1, y0 + kh - 1};
    BinaryMask m(h, w, true);
    for (int y = kept.y0; y <= kept.y1; ++y)
        for (int x = kept.x0; x <= kept.x1; ++x) m.at(y, x) = 0;
    return {m, kept};
}

BinaryMask extend_right_mask(int h, int w, double frac) {
    if (!(frac > 0.0 && frac < 1.0)) {
        throw std::invalid_argument("extend_right_mask: frac must be in (0,1)");
    }
    const int cols = static_cast<int>(std::lround(frac * w));
    BinaryMask m(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = w - cols; x < w; ++x) m.at(y, x) = 1;
    return m;
}

RgbImage blank_canvas(int h, int w, MaskFill fill) {
    const uint8_t v = fill == MaskFill::white ? 255 : 0;
    return RgbImage(h, w, {v, v, v});
}

RgbImage apply_mask_fill(const RgbImage& img, const BinaryMask& m, MaskFill fill) {
    if (img.height != m.height || img.width != m.width) {
        throw std::invalid_argument("apply_mask_fill: dimension mismatch");
    }
    const uint8_t v = fill == MaskFill::white ? 255 : 0;
    RgbImage out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (m.at(y, x)) out.set(y, x, {v, v, v});
    return out;
}

}  // namespace codecs
}  // namespace pixkit
