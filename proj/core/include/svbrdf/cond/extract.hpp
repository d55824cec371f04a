#pragma once

#include "svbrdf/material/image.hpp"

#include <array>
#include <string>
#include <vector>

namespace svbrdf::cond {

struct PaletteColor {
    double L = 0, a = 0, b = 0; // CIELAB, D65
    double weight = 0;          // fraction of pixels, descending
};
using Palette = std::vector<PaletteColor>;

// sRGB in [0,1] -> CIELAB under D65 (standard sRGB linearization).
std::array<double, 3> srgb_to_lab(double r, double g, double b);
double cie76(const std::array<double, 3>& lab1, const std::array<double, 3>& lab2);

// Greedy count-ordered clustering: quantize to 8 bits, iterate colors by
// descending count, merge into the nearest cluster centroid within the
// CIE76 threshold (count-weighted centroid update) or open a new cluster;
// return the top-k clusters by total count with weights normalized by the
// pixel count.
Palette extract_palette(const material::Image& image, int k, double delta_threshold);

// grayscale -> Sobel magnitude -> normalize by max -> binarize at 0.25
material::Image extract_sketch(const material::Image& image);

// Deterministic global appearance vector: 48-bin RGB histogram plus 16-bin
// gradient-orientation histogram, projected by a frozen random matrix to 64
// dimensions and L2-normalized.
std::vector<double> image_embedding(const material::Image& image);
inline constexpr int kEmbeddingDim = 64;

// text format: one "L a b weight" line per color
void save_palette(const std::string& path, const Palette& p);
Palette load_palette(const std::string& path);

} // namespace svbrdf::cond
