#include "svbrdf/material/toy.hpp"

#include <cmath>
#include <stdexcept>

namespace svbrdf::material {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Field {
    std::vector<double> v;
    int res;
    double& at(int y, int x) { return v[static_cast<size_t>(y) * res + x]; }
    double at(int y, int x) const { return v[static_cast<size_t>(y) * res + x]; }
};

// central differences in plane units (the surface spans [-1,1]^2)
void height_to_normals(const Field& h, Image& normal) {
    const int res = h.res;
    const double px = 2.0 / res;
    for (int y = 0; y < res; ++y) {
        for (int x = 0; x < res; ++x) {
            const int xm = std::max(x - 1, 0), xp = std::min(x + 1, res - 1);
            const int ym = std::max(y - 1, 0), yp = std::min(y + 1, res - 1);
            const double dhdx = (h.at(y, xp) - h.at(y, xm)) / ((xp - xm) * px);
            const double dhdy = (h.at(ym, x) - h.at(yp, x)) / ((yp - ym) * px); // +y up, rows go down
            double nx = -dhdx, ny = -dhdy, nz = 1.0;
            const double len = std::sqrt(nx * nx + ny * ny + nz * nz);
            auto enc = encode_normal(nx / len, ny / len, nz / len);
            for (int c = 0; c < 3; ++c) normal.at(y, x, c) = enc[c];
        }
    }
}

std::array<double, 3> random_color(Rng& rng) {
    return {rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
}

void fill_pixel(Image& img, int y, int x, const std::array<double, 3>& c) {
    for (int i = 0; i < 3; ++i) img.at(y, x, i) = clamp01(c[i]);
}

void fill_scalar(Image& img, int y, int x, double s) {
    for (int i = 0; i < 3; ++i) img.at(y, x, i) = clamp01(s);
}

} // namespace

Image normals_from_height(const std::vector<double>& height, int resolution) {
    if (height.size() != static_cast<size_t>(resolution) * resolution) {
        throw std::invalid_argument("height field size does not match resolution");
    }
    Field f{height, resolution};
    Image normal(resolution, resolution, 3);
    height_to_normals(f, normal);
    return normal;
}

ToyKind toy_kind_from_string(const std::string& s) {
    if (s == "checker") return ToyKind::checker;
    if (s == "stripes") return ToyKind::stripes;
    if (s == "blobs") return ToyKind::blobs;
    if (s == "cells") return ToyKind::cells;
    throw std::invalid_argument("unknown toy material kind: " + s);
}

const char* to_string(ToyKind k) {
    switch (k) {
        case ToyKind::checker: return "checker";
        case ToyKind::stripes: return "stripes";
        case ToyKind::blobs: return "blobs";
        default: return "cells";
    }
}

ToyKind toy_kind_cycle(uint64_t i) {
    return static_cast<ToyKind>(i % 4);
}

MaterialMaps generate_toy_material(uint64_t seed, ToyKind kind, int resolution) {
    if (resolution < 16 || !is_power_of_two(resolution)) {
        throw std::invalid_argument("toy material resolution must be a power of two >= 16");
    }
    Rng rng(derive_seed(seed, to_string(kind), static_cast<uint64_t>(resolution)));
    const int res = resolution;

    MaterialMaps m;
    m.diffuse = Image(res, res, 3);
    m.normal = Image(res, res, 3);
    m.roughness = Image(res, res, 3);
    m.specular = Image(res, res, 3);
    Field height{std::vector<double>(static_cast<size_t>(res) * res, 0.0), res};

    switch (kind) {
        case ToyKind::checker: {
            const int cells = (rng.uniform() < 0.5) ? 4 : 8;
            const auto c0 = random_color(rng);
            const auto c1 = random_color(rng);
            const double r0 = rng.uniform(0.2, 0.5), r1 = rng.uniform(0.5, 0.85);
            const double s0 = rng.uniform(0.03, 0.1), s1 = rng.uniform(0.3, 0.65);
            const double amp = rng.uniform(0.05, 0.14);
            const int cw = res / cells;
            for (int y = 0; y < res; ++y) {
                for (int x = 0; x < res; ++x) {
                    const int par = ((x / cw) + (y / cw)) % 2;
                    fill_pixel(m.diffuse, y, x, par ? c1 : c0);
                    fill_scalar(m.roughness, y, x, par ? r1 : r0);
                    fill_scalar(m.specular, y, x, par ? s1 : s0);
                    // cushioned cells so normals vary inside each square
                    const double u = kPi * cells * (x + 0.5) / res;
                    const double v = kPi * cells * (y + 0.5) / res;
                    height.at(y, x) = amp * std::fabs(std::sin(u) * std::sin(v)) * (par ? 1.0 : 0.5);
                }
            }
            break;
        }
        case ToyKind::stripes: {
            const int stripes = 4 + static_cast<int>(rng.uniform_index(5)); // 4..8
            const bool vertical = rng.uniform() < 0.5;
            const int ncol = 2 + static_cast<int>(rng.uniform_index(2));    // 2..3
            std::array<std::array<double, 3>, 3> colors{};
            for (int i = 0; i < ncol; ++i) colors[i] = random_color(rng);
            const double amp = rng.uniform(0.04, 0.12);
            const double rbase = rng.uniform(0.2, 0.6);
            const double sshiny = rng.uniform(0.35, 0.7);
            for (int y = 0; y < res; ++y) {
                for (int x = 0; x < res; ++x) {
                    const int t = vertical ? x : y;
                    const int band = (t * stripes) / res;
                    fill_pixel(m.diffuse, y, x, colors[band % ncol]);
                    fill_scalar(m.roughness, y, x, (band % 2) ? rbase : rbase + 0.25);
                    fill_scalar(m.specular, y, x, (band % ncol == 0) ? sshiny : 0.05);
                    height.at(y, x) = amp * std::sin(kPi * stripes * (t + 0.5) / res) *
                                      std::sin(kPi * stripes * (t + 0.5) / res);
                }
            }
            break;
        }
        case ToyKind::blobs: {
            const int nblobs = 3 + static_cast<int>(rng.uniform_index(4)); // 3..6
            std::vector<std::array<double, 4>> blobs;                      // cx, cy, sigma, sign
            for (int i = 0; i < nblobs; ++i) {
                blobs.push_back({rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7),
                                 rng.uniform(0.18, 0.4), rng.uniform() < 0.75 ? 1.0 : -1.0});
            }
            const auto base = random_color(rng);
            const auto tint = random_color(rng);
            const double amp = rng.uniform(0.05, 0.13);
            for (int y = 0; y < res; ++y) {
                for (int x = 0; x < res; ++x) {
                    const double px = -1.0 + 2.0 * (x + 0.5) / res;
                    const double py = 1.0 - 2.0 * (y + 0.5) / res;
                    double field = 0.0;
                    for (const auto& b : blobs) {
                        const double dx = px - b[0], dy = py - b[1];
                        field += b[3] * std::exp(-(dx * dx + dy * dy) / (2.0 * b[2] * b[2]));
                    }
                    const double t = clamp01(0.5 + 0.5 * field);
                    fill_pixel(m.diffuse, y, x,
                               {base[0] * (1 - t) + tint[0] * t, base[1] * (1 - t) + tint[1] * t,
                                base[2] * (1 - t) + tint[2] * t});
                    fill_scalar(m.roughness, y, x, 0.25 + 0.55 * (1.0 - t));
                    fill_scalar(m.specular, y, x, 0.04 + 0.45 * t);
                    height.at(y, x) = amp * field;
                }
            }
            break;
        }
        case ToyKind::cells: {
            const int nsites = 4 + static_cast<int>(rng.uniform_index(5)); // 4..8
            std::vector<std::array<double, 2>> sites;
            std::vector<std::array<double, 3>> colors;
            std::vector<double> roughs, specs;
            for (int i = 0; i < nsites; ++i) {
                sites.push_back({rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9)});
                colors.push_back(random_color(rng));
                roughs.push_back(rng.uniform(0.2, 0.8));
                specs.push_back(rng.uniform() < 0.4 ? rng.uniform(0.3, 0.65) : rng.uniform(0.03, 0.1));
            }
            const double amp = rng.uniform(0.05, 0.12);
            for (int y = 0; y < res; ++y) {
                for (int x = 0; x < res; ++x) {
                    const double px = -1.0 + 2.0 * (x + 0.5) / res;
                    const double py = 1.0 - 2.0 * (y + 0.5) / res;
                    int best = 0;
                    double bd = 1e9;
                    for (int i = 0; i < nsites; ++i) {
                        const double dx = px - sites[i][0], dy = py - sites[i][1];
                        const double d = dx * dx + dy * dy;
                        if (d < bd) { bd = d; best = i; }
                    }
                    fill_pixel(m.diffuse, y, x, colors[best]);
                    fill_scalar(m.roughness, y, x, roughs[best]);
                    fill_scalar(m.specular, y, x, specs[best]);
                    height.at(y, x) = amp * std::exp(-bd / 0.18);
                }
            }
            break;
        }
    }

    height_to_normals(height, m.normal);
    m.validate();
    return m;
}

} // namespace svbrdf::material
