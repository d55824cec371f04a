#include "svbrdf/material/crop.hpp"

#include <cmath>
#include <stdexcept>

namespace svbrdf::material {

size_t CropPyramid::total_crops() const {
    size_t n = 0;
    for (const auto& l : levels) n += l.crops.size();
    return n;
}

std::vector<MaterialMaps> tile_crops(const MaterialMaps& maps, int level) {
    const int res = maps.resolution();
    const int div = 1 << level;
    if (res % div != 0) {
        throw std::invalid_argument("resolution " + std::to_string(res) +
                                    " not divisible by 2^" + std::to_string(level));
    }
    const int side = res / div;
    std::vector<MaterialMaps> out;
    out.reserve(static_cast<size_t>(div) * div);
    for (int ty = 0; ty < div; ++ty) {
        for (int tx = 0; tx < div; ++tx) {
            MaterialMaps c;
            for (int i = 0; i < kNumMaps; ++i) {
                c.map(i) = crop(maps.map(i), ty * side, tx * side, side, side);
            }
            out.push_back(std::move(c));
        }
    }
    return out;
}

MaterialMaps resize_material(const MaterialMaps& maps, int resolution) {
    MaterialMaps out;
    for (int i = 0; i < kNumMaps; ++i) {
        out.map(i) = resize_bilinear(maps.map(i), resolution, resolution);
        for (double& v : out.map(i).v) v = clamp01(v);
    }
    // bilinear filtering shortens interpolated normals
    for (int y = 0; y < resolution; ++y) {
        for (int x = 0; x < resolution; ++x) {
            auto n = decode_normal(out.normal, y, x);
            auto enc = encode_normal(n[0], n[1], n[2]);
            for (int c = 0; c < 3; ++c) out.normal.at(y, x, c) = enc[c];
        }
    }
    return out;
}

CropPyramid crop_pyramid(const MaterialMaps& maps, int max_level) {
    const int res = maps.resolution();
    if (max_level < 0) throw std::invalid_argument("max_level must be >= 0");
    if (res % (1 << max_level) != 0) {
        throw std::invalid_argument("resolution not divisible by 2^max_level");
    }
    if (res / (1 << max_level) < 16) {
        throw std::invalid_argument("max_level " + std::to_string(max_level) +
                                    " too deep for resolution " + std::to_string(res));
    }
    CropPyramid pyr;
    pyr.source = maps;
    for (int level = 0; level <= max_level; ++level) {
        CropLevel lvl;
        lvl.divisor = 1 << level;
        for (MaterialMaps& tile : tile_crops(maps, level)) {
            lvl.crops.push_back(level == 0 ? std::move(tile) : resize_material(tile, res));
        }
        pyr.levels.push_back(std::move(lvl));
    }
    return pyr;
}

} // namespace svbrdf::material
