#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pixkit/image.hpp"
#include "pixkit/rng.hpp"

namespace pixkit::codecs {

// ---------------------------------------------------------------------------
// dense-prediction codecs
//
// Heterogeneous labels (depth, classes, normals, masks) travel through the
// same 8-bit RGB carrier so a single image-to-image model can emit them.
// Every encoder has a decoder that accepts arbitrary model output.
// ---------------------------------------------------------------------------

struct DepthCodecParams {
    double d_min = 0.0;
    double d_max = 10.0;
};

/// v = round(255*(d-d_min)/(d_max-d_min)), written to all three channels.
/// Depth outside [d_min, d_max] is an error naming the offending pixel.
RgbImage encode_depth(const DepthMap& d, const DepthCodecParams& p);

/// d = d_min + mean(r,g,b)/255 * (d_max-d_min), clamped to [d_min, d_max].
/// Accepts arbitrary images; the roundtrip error is at most
/// (d_max-d_min)/510 per pixel.
DepthMap decode_depth(const RgbImage& img, const DepthCodecParams& p);

struct Palette {
    // ordered (class_id, color); id 0 is background and must map to (0,0,0)
    std::vector<std::pair<uint32_t, Rgb>> entries;

    void validate() const;  // distinct colors, class 0 rule
    std::optional<Rgb> color_of(uint32_t id) const;
};

/// paints each pixel with its class color; unknown label is an error
RgbImage encode_labels(const LabelMap& l, const Palette& pal);

/// nearest palette color by L2 distance in RGB; ties break to the lowest
/// class id
LabelMap decode_labels(const RgbImage& img, const Palette& pal);

/// channel = round(255*(component+1)/2), x->r y->g z->b. Vectors whose norm
/// deviates from 1 by more than 1e-6 are an error.
RgbImage encode_normals(const NormalMap& n);

/// component = 2*channel/255 - 1 then L2-renormalized; a degenerate
/// near-zero vector (norm < 1e-2 before renormalization, e.g. all-gray
/// input) decodes to (0,0,1)
NormalMap decode_normals(const RgbImage& img);

// ---------------------------------------------------------------------------
// grounding encodings and their extractors
// ---------------------------------------------------------------------------

/// true -> white, false -> black, replicated across the three channels
RgbImage mask_to_rgb(const BinaryMask& m);

/// pixel true iff mean(r,g,b) >= threshold; boundary inclusive
BinaryMask rgb_to_mask(const RgbImage& img, int threshold = 128);

/// masked pixels become round((1-alpha)*img + alpha*color), composited in
/// float and rounded once; unmasked pixels pass through
RgbImage overlay_mask(const RgbImage& img, const BinaryMask& m, Rgb color, double alpha);

/// Recovers an overlay mask from a rendered image: pixel true iff the
/// circular hue distance to the target color is <= hue_tol degrees AND
/// saturation >= sat_min. The target color must have a defined hue
/// (not gray).
BinaryMask extract_mask_hsv(const RgbImage& rendered, Rgb color, double hue_tol_deg = 18.0,
                            double sat_min = 0.3);

/// paints a rectangular frame of the given thickness; the frame must leave a
/// nonempty interior (2*thickness < min box extent), otherwise error
RgbImage draw_bbox(const RgbImage& img, const BBox& b, Rgb color, int thickness);

/// bounding box (min/max over pixels within tol per channel of the color);
/// "no box found" error when nothing matches. Disjoint clusters produce the
/// hull box spanning all of them.
BBox extract_bbox(const RgbImage& rendered, Rgb color, int tol = 8);

// ---------------------------------------------------------------------------
// mask generators for inpainting / outpainting and the blank canvas
// ---------------------------------------------------------------------------

enum class MaskFill { black, white };

struct InpaintMaskSpec {
    bool circles = true;
    bool rectangles = true;
    bool freeform = true;
    int count_min = 1;
    int count_max = 4;
    double area_min = 0.4;   // fraction of image area
    double area_max = 0.5;
    MaskFill fill = MaskFill::black;
};

/// Random mask built from the requested shape kinds, rejection-sampled until
/// the true-area fraction falls inside [area_min, area_max] (up to 100
/// attempts, then error). Rectangles are placed without touching existing
/// mask content so the components stay rectangular. Deterministic given rng.
BinaryMask gen_inpaint_mask(RngState& rng, int h, int w, const InpaintMaskSpec& spec);

/// Crops a centered rectangle of random area fraction (within
/// keep_frac_range) and random aspect ratio; returns the surround mask
/// (true = region to generate) plus the kept rectangle. The mask is the
/// exact complement of the rectangle.
std::pair<BinaryMask, BBox> gen_outpaint_mask(RngState& rng, int h, int w,
                                              double keep_frac_min, double keep_frac_max);

/// rightmost round(frac*w) columns true
BinaryMask extend_right_mask(int h, int w, double frac);

/// constant white or black image ("drawing" input for text-to-image)
RgbImage blank_canvas(int h, int w, MaskFill fill);

/// paints masked pixels solid black or white (how an inpainting input is
/// produced from an image plus a generated mask)
RgbImage apply_mask_fill(const RgbImage& img, const BinaryMask& m, MaskFill fill);

}  // namespace pixkit::codecs
