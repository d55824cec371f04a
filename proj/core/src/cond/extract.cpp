#include "svbrdf/cond/extract.hpp"

#include "svbrdf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace svbrdf::cond {

using material::Image;

namespace {

double srgb_linearize(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
    constexpr double d = 6.0 / 29.0;
    return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
}

} // namespace

std::array<double, 3> srgb_to_lab(double r, double g, double b) {
    const double rl = srgb_linearize(r), gl = srgb_linearize(g), bl = srgb_linearize(b);
    // sRGB D65 matrix
    const double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
    const double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
    const double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
    // D65 white point
    const double xn = 0.95047, yn = 1.0, zn = 1.08883;
    const double fx = lab_f(x / xn), fy = lab_f(y / yn), fz = lab_f(z / zn);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

double cie76(const std::array<double, 3>& lab1, const std::array<double, 3>& lab2) {
    const double dl = lab1[0] - lab2[0], da = lab1[1] - lab2[1], db = lab1[2] - lab2[2];
    return std::sqrt(dl * dl + da * da + db * db);
}

Palette extract_palette(const Image& image, int k, double delta_threshold) {
    if (image.size() == 0) throw std::invalid_argument("extract_palette: empty image");
    if (k < 1) throw std::invalid_argument("extract_palette: k must be >= 1");
    if (delta_threshold <= 0.0) throw std::invalid_argument("extract_palette: threshold must be positive");

    // count 8-bit-quantized colors; map keys give a deterministic order
    std::map<std::array<int, 3>, int64_t> counts;
    const int ch = image.channels;
    const size_t npix = static_cast<size_t>(image.height) * image.width;
    for (size_t p = 0; p < npix; ++p) {
        std::array<int, 3> key{};
        for (int c = 0; c < 3; ++c) {
            const double v = material::clamp01(image.v[p * ch + std::min(c, ch - 1)]);
            key[c] = static_cast<int>(std::nearbyint(v * 255.0));
        }
        counts[key]++;
    }
    struct ColorCount {
        std::array<int, 3> rgb;
        int64_t count;
    };
    std::vector<ColorCount> ordered;
    ordered.reserve(counts.size());
    for (const auto& [rgb, n] : counts) ordered.push_back({rgb, n});
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const ColorCount& a, const ColorCount& b) { return a.count > b.count; });

    struct Cluster {
        std::array<double, 3> lab;
        int64_t count = 0;
        size_t order = 0;
    };
    std::vector<Cluster> clusters;
    for (const ColorCount& cc : ordered) {
        const auto lab = srgb_to_lab(cc.rgb[0] / 255.0, cc.rgb[1] / 255.0, cc.rgb[2] / 255.0);
        int best = -1;
        double best_d = delta_threshold;
        for (size_t i = 0; i < clusters.size(); ++i) {
            const double d = cie76(lab, clusters[i].lab);
            if (d <= best_d) { // ties keep the earlier cluster
                if (best < 0 || d < best_d) {
                    best = static_cast<int>(i);
                    best_d = d;
                }
            }
        }
        if (best >= 0) {
            Cluster& cl = clusters[best];
            const double wn = static_cast<double>(cc.count) / (cl.count + cc.count);
            for (int c = 0; c < 3; ++c) cl.lab[c] = cl.lab[c] * (1.0 - wn) + lab[c] * wn;
            cl.count += cc.count;
        } else {
            clusters.push_back({lab, cc.count, clusters.size()});
        }
    }
    std::stable_sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.order < b.order;
    });

    Palette out;
    const double total = static_cast<double>(npix);
    for (size_t i = 0; i < clusters.size() && static_cast<int>(i) < k; ++i) {
        out.push_back({clusters[i].lab[0], clusters[i].lab[1], clusters[i].lab[2],
                       clusters[i].count / total});
    }
    return out;
}

Image extract_sketch(const Image& image) {
    const Image gray = material::to_grayscale(image);
    const int h = gray.height, w = gray.width;
    Image mag(h, w, 1);
    auto px = [&](int y, int x) {
        y = std::min(std::max(y, 0), h - 1);
        x = std::min(std::max(x, 0), w - 1);
        return gray.at(y, x, 0);
    };
    double mx = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = (px(y - 1, x + 1) + 2 * px(y, x + 1) + px(y + 1, x + 1)) -
                              (px(y - 1, x - 1) + 2 * px(y, x - 1) + px(y + 1, x - 1));
            const double gy = (px(y + 1, x - 1) + 2 * px(y + 1, x) + px(y + 1, x + 1)) -
                              (px(y - 1, x - 1) + 2 * px(y - 1, x) + px(y - 1, x + 1));
            const double m = std::sqrt(gx * gx + gy * gy);
            mag.at(y, x, 0) = m;
            mx = std::max(mx, m);
        }
    }
    Image out(h, w, 1);
    if (mx > 0.0) {
        for (size_t i = 0; i < mag.v.size(); ++i) out.v[i] = mag.v[i] / mx >= 0.25 ? 1.0 : 0.0;
    }
    return out;
}

std::vector<double> image_embedding(const Image& image) {
    constexpr int kRgbBins = 16;   // per channel, 48 total
    constexpr int kOriBins = 16;
    std::vector<double> raw(kRgbBins * 3 + kOriBins, 0.0);

    const int ch = image.channels;
    const size_t npix = static_cast<size_t>(image.height) * image.width;
    for (size_t p = 0; p < npix; ++p) {
        for (int c = 0; c < 3; ++c) {
            const double v = material::clamp01(image.v[p * ch + std::min(c, ch - 1)]);
            int bin = std::min(static_cast<int>(v * kRgbBins), kRgbBins - 1);
            raw[c * kRgbBins + bin] += 1.0 / static_cast<double>(npix);
        }
    }
    const Image gray = material::to_grayscale(image);
    const int h = gray.height, w = gray.width;
    auto px = [&](int y, int x) {
        y = std::min(std::max(y, 0), h - 1);
        x = std::min(std::max(x, 0), w - 1);
        return gray.at(y, x, 0);
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = (px(y - 1, x + 1) + 2 * px(y, x + 1) + px(y + 1, x + 1)) -
                              (px(y - 1, x - 1) + 2 * px(y, x - 1) + px(y + 1, x - 1));
            const double gy = (px(y + 1, x - 1) + 2 * px(y + 1, x) + px(y + 1, x + 1)) -
                              (px(y - 1, x - 1) + 2 * px(y - 1, x) + px(y - 1, x + 1));
            const double m = std::sqrt(gx * gx + gy * gy);
            if (m < 1e-12) continue;
            const double ang = std::atan2(gy, gx); // [-pi, pi]
            int bin = static_cast<int>((ang + 3.14159265358979323846) / (2 * 3.14159265358979323846) * kOriBins);
            bin = std::min(std::max(bin, 0), kOriBins - 1);
            raw[kRgbBins * 3 + bin] += m / static_cast<double>(npix);
        }
    }

    // frozen projection defines the embedding space; never reseeded
    static const std::vector<double> proj = [] {
        Rng rng(derive_seed(0x5bdfu, "embedding_projection"));
        std::vector<double> m(static_cast<size_t>(kEmbeddingDim) * kEmbeddingDim);
        for (double& x : m) x = rng.normal() / 8.0;
        return m;
    }();

    std::vector<double> out(kEmbeddingDim, 0.0);
    for (int i = 0; i < kEmbeddingDim; ++i) {
        for (int j = 0; j < kEmbeddingDim; ++j) out[i] += proj[static_cast<size_t>(i) * kEmbeddingDim + j] * raw[j];
    }
    double norm = 0.0;
    for (double v : out) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 1e-12) {
        for (double& v : out) v /= norm;
    }
    return out;
}

void save_palette(const std::string& path, const Palette& p) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write palette: " + path);
    f.precision(17);
    for (const PaletteColor& c : p) f << c.L << ' ' << c.a << ' ' << c.b << ' ' << c.weight << '\n';
}

Palette load_palette(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read palette: " + path);
    Palette p;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream is(line);
        PaletteColor c;
        if (!(is >> c.L >> c.a >> c.b >> c.weight)) {
            throw std::runtime_error("malformed palette line: " + line);
        }
        p.push_back(c);
    }
    return p;
}

} // namespace svbrdf::cond
