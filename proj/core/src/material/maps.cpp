#include "svbrdf/material/maps.hpp"

#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace svbrdf::material {

namespace fs = std::filesystem;

Image& MaterialMaps::map(int i) {
    switch (i) {
        case 0: return diffuse;
        case 1: return normal;
        case 2: return roughness;
        default: return specular;
    }
}

const Image& MaterialMaps::map(int i) const {
    return const_cast<MaterialMaps*>(this)->map(i);
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

void MaterialMaps::validate() const {
    const int res = diffuse.height;
    if (res <= 0) throw std::invalid_argument("material has empty maps");
    if (diffuse.width != res) throw std::invalid_argument("material maps must be square");
    if (!is_power_of_two(res)) {
        throw std::invalid_argument("material resolution " + std::to_string(res) + " is not a power of two");
    }
    for (int i = 0; i < kNumMaps; ++i) {
        const Image& m = map(i);
        if (m.height != res || m.width != res) {
            throw std::invalid_argument(std::string("map resolution mismatch: ") + kMapNames[i]);
        }
        if (m.channels != 3) {
            throw std::invalid_argument(std::string("map must have 3 channels: ") + kMapNames[i]);
        }
        for (double v : m.v) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::invalid_argument(std::string("map value outside [0,1]: ") + kMapNames[i]);
            }
        }
    }
    for (int y = 0; y < res; ++y) {
        for (int x = 0; x < res; ++x) {
            const double nx = 2.0 * normal.at(y, x, 0) - 1.0;
            const double ny = 2.0 * normal.at(y, x, 1) - 1.0;
            const double nz = 2.0 * normal.at(y, x, 2) - 1.0;
            const double len = std::sqrt(nx * nx + ny * ny + nz * nz);
            if (len < 1e-6) throw std::invalid_argument("normal map contains a zero vector");
            // renormalized by construction; the check guards the decode path
            const double renorm = std::sqrt((nx / len) * (nx / len) + (ny / len) * (ny / len) + (nz / len) * (nz / len));
            if (renorm < 1.0 - 1e-3 || renorm > 1.0 + 1e-3) {
                throw std::invalid_argument("decoded normal norm outside tolerance");
            }
        }
    }
}

MaterialMaps load_material(const std::string& dir) {
    MaterialMaps maps;
    int res = -1;
    for (int i = 0; i < kNumMaps; ++i) {
        const fs::path p = fs::path(dir) / (std::string(kMapNames[i]) + ".png");
        if (!fs::exists(p)) {
            throw std::invalid_argument(std::string("missing map: ") + kMapNames[i]);
        }
        Image img = read_png(p.string());
        if (img.height != img.width) {
            throw std::invalid_argument(std::string("map is not square: ") + kMapNames[i]);
        }
        if (!is_power_of_two(img.height)) {
            throw std::invalid_argument(std::string("map size is not a power of two: ") + kMapNames[i]);
        }
        if (res < 0) {
            res = img.height;
        } else if (img.height != res) {
            throw std::invalid_argument(std::string("map size mismatch: ") + kMapNames[i]);
        }
        maps.map(i) = replicate_channels(img, 3);
    }
    // renormalize decoded normals against 8-bit quantization drift
    for (int y = 0; y < res; ++y) {
        for (int x = 0; x < res; ++x) {
            auto n = decode_normal(maps.normal, y, x);
            auto enc = encode_normal(n[0], n[1], n[2]);
            for (int c = 0; c < 3; ++c) maps.normal.at(y, x, c) = enc[c];
        }
    }
    return maps;
}

void save_material(const MaterialMaps& maps, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) {
        throw std::runtime_error("cannot create material directory: " + dir);
    }
    for (int i = 0; i < kNumMaps; ++i) {
        const Image& m = maps.map(i);
        const fs::path p = fs::path(dir) / (std::string(kMapNames[i]) + ".png");
        if (i >= 2) {
            Image gray(m.height, m.width, 1);
            for (int y = 0; y < m.height; ++y)
                for (int x = 0; x < m.width; ++x)
                    gray.at(y, x, 0) = (m.at(y, x, 0) + m.at(y, x, 1) + m.at(y, x, 2)) / 3.0;
            write_png(p.string(), gray);
        } else {
            write_png(p.string(), m);
        }
    }
}

std::array<double, 3> decode_normal(const Image& normal_map, int y, int x) {
    double nx = 2.0 * normal_map.at(y, x, 0) - 1.0;
    double ny = 2.0 * normal_map.at(y, x, 1) - 1.0;
    double nz = 2.0 * normal_map.at(y, x, 2) - 1.0;
    const double len = std::sqrt(nx * nx + ny * ny + nz * nz);
    if (len > 1e-12) {
        nx /= len;
        ny /= len;
        nz /= len;
    }
    return {nx, ny, nz};
}

std::array<double, 3> encode_normal(double nx, double ny, double nz) {
    return {clamp01(0.5 * (nx + 1.0)), clamp01(0.5 * (ny + 1.0)), clamp01(0.5 * (nz + 1.0))};
}

double rmse(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("rmse shape mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.v.size(); ++i) {
        const double d = a.v[i] - b.v[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(a.v.size()));
}

std::array<double, kNumMaps> rmse_maps(const MaterialMaps& a, const MaterialMaps& b) {
    std::array<double, kNumMaps> out{};
    for (int i = 0; i < kNumMaps; ++i) out[i] = rmse(a.map(i), b.map(i));
    return out;
}

} // namespace svbrdf::material
