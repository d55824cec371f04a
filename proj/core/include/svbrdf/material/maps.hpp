#pragma once

#include "svbrdf/material/image.hpp"

#include <array>
#include <string>

namespace svbrdf::material {

inline constexpr int kNumMaps = 4;
inline constexpr std::array<const char*, kNumMaps> kMapNames{"diffuse", "normal", "roughness", "specular"};

// The four-map SVBRDF record. Every map is H x W x 3 in [0,1] at one shared
// square power-of-two resolution; the normal map encodes n = 2 v - 1.
struct MaterialMaps {
    Image diffuse, normal, roughness, specular;

    int resolution() const { return diffuse.height; }
    Image& map(int i);
    const Image& map(int i) const;

    // Throws std::invalid_argument describing the first violated invariant:
    // shared square power-of-two resolution, channel range, decodable normals.
    void validate() const;
};

bool is_power_of_two(int v);

// Directory layout <dir>/{diffuse,normal,roughness,specular}.png.
// Single-channel roughness/specular files are replicated to 3 channels;
// normals are renormalized after decode.
MaterialMaps load_material(const std::string& dir);

// Writes diffuse/normal as RGB, roughness/specular as grayscale (channel
// mean), 8-bit, rounded half-to-even.
void save_material(const MaterialMaps& maps, const std::string& dir);

// decoded, renormalized normal at a pixel
std::array<double, 3> decode_normal(const Image& normal_map, int y, int x);

// re-encode a [-1,1]^3 vector into map values
std::array<double, 3> encode_normal(double nx, double ny, double nz);

double rmse(const Image& a, const Image& b);
std::array<double, kNumMaps> rmse_maps(const MaterialMaps& a, const MaterialMaps& b);

} // namespace svbrdf::material
