#pragma once

#include <string>
#include <vector>

namespace svbrdf::material {

// Dense HWC double image, values nominally in [0,1].
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> v;

    Image() = default;
    Image(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c),
          v(static_cast<size_t>(h) * w * c, fill) {}

    double& at(int y, int x, int c) { return v[(static_cast<size_t>(y) * width + x) * channels + c]; }
    double at(int y, int x, int c) const { return v[(static_cast<size_t>(y) * width + x) * channels + c]; }
    size_t size() const { return v.size(); }
    bool same_shape(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

// 8-bit PNG (gray, gray+alpha, RGB or RGBA; alpha ignored). Gray stays
// 1-channel. Throws std::runtime_error on IO or format problems.
Image read_png(const std::string& path);

// channels must be 1 or 3; values clamped to [0,1] and rounded half-to-even.
void write_png(const std::string& path, const Image& img);

Image resize_bilinear(const Image& img, int out_h, int out_w);
Image crop(const Image& img, int y0, int x0, int h, int w);

Image to_gamma22(const Image& linear); // clamp + 1/2.2 encode
Image to_grayscale(const Image& img);  // Rec.709 luma for 3-channel input
Image replicate_channels(const Image& img, int channels);
double clamp01(double x);

} // namespace svbrdf::material
