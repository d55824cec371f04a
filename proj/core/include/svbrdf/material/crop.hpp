#pragma once

#include "svbrdf/material/maps.hpp"

namespace svbrdf::material {

struct CropLevel {
    int divisor = 1; // 2^level
    std::vector<MaterialMaps> crops; // 4^level crops, resized to the source resolution
};

struct CropPyramid {
    MaterialMaps source;
    std::vector<CropLevel> levels;
    size_t total_crops() const;
};

// Raw non-overlapping tiles at one level, row-major, before any resize.
// Level l yields 4^l tiles of size resolution / 2^l.
std::vector<MaterialMaps> tile_crops(const MaterialMaps& maps, int level);

// Multi-scale crop pyramid: level l holds 4^l tiles, each resized (bilinear)
// back to the source resolution; normals are renormalized after resize.
// Requires resolution / 2^max_level >= 16.
CropPyramid crop_pyramid(const MaterialMaps& maps, int max_level);

MaterialMaps resize_material(const MaterialMaps& maps, int resolution);

} // namespace svbrdf::material
