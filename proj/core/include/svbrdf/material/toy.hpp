#pragma once

#include "svbrdf/material/maps.hpp"
#include "svbrdf/rng.hpp"

namespace svbrdf::material {

enum class ToyKind { checker, stripes, blobs, cells };

ToyKind toy_kind_from_string(const std::string& s); // throws on unknown kind
const char* to_string(ToyKind k);
ToyKind toy_kind_cycle(uint64_t i); // round-robin over the four kinds

// Deterministic procedural material. Diffuse carries the pattern, the normal
// map is derived from a synthetic height field, roughness and specular vary
// with the same structure so the rendering loss sees real geometric signal.
MaterialMaps generate_toy_material(uint64_t seed, ToyKind kind, int resolution);

// Encoded normals from a row-major res x res height field over [-1,1]^2
// (central differences; constant height maps to (0,0,1) everywhere).
Image normals_from_height(const std::vector<double>& height, int resolution);

} // namespace svbrdf::material
