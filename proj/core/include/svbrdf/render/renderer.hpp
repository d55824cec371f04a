#pragma once

#include "svbrdf/material/maps.hpp"
#include "svbrdf/nd/ops.hpp"
#include "svbrdf/rng.hpp"

#include <array>

namespace svbrdf::render {

enum class Tone { linear, gamma22 };

// Point light over the unit plane z = 0, x,y in [-1,1]. Light and camera
// must sit strictly above the plane.
struct RenderConfig {
    std::array<double, 3> light_pos{0.0, 0.0, 1.0};
    double light_intensity = 3.14159265358979323846;
    std::array<double, 3> camera_pos{0.0, 0.0, 2.0};
    Tone tone = Tone::linear;

    void validate() const; // throws on z <= 0 or intensity <= 0
};

struct LightingSet {
    std::vector<RenderConfig> configs;
    int size() const { return static_cast<int>(configs.size()); }
};

// K light positions uniform on x,y in [-0.8,0.8], z in [0.5,2.0]; camera
// fixed at (0,0,2) with one grazing camera per three lights. Intensity
// pi * z^2 keeps overhead pixels near unit radiance.
LightingSet sample_lighting(uint64_t seed, int k);

// Colocated light/camera at (0,0,2), the canonical condition image view.
RenderConfig flash_config();

// The four maps as H x W x 3 tensors (graph-tracked when training).
struct MapTensors {
    nd::Tensor diffuse, normal, roughness, specular;
};

MapTensors to_tensors(const material::MaterialMaps& maps);
material::MaterialMaps to_maps(const MapTensors& t); // clamps to [0,1]

// Cook-Torrance with GGX distribution, Schlick-GGX geometry (k = alpha/2)
// and Schlick Fresnel; alpha = roughness^2. Returns linear radiance
// (unclamped), differentiable w.r.t. all four maps:
//   L = [ albedo/pi + D G F / (4 (n.l)(n.v) + 1e-6) ] * (I / r^2) * max(n.l, 0)
nd::Tensor render(const MapTensors& maps, const RenderConfig& cfg);

// Mean over configs of mean |log(0.01 + Ra) - log(0.01 + Rb)|.
nd::Tensor render_loss(const MapTensors& a, const MapTensors& b, const LightingSet& lights);

material::Image render_image(const material::MaterialMaps& maps, const RenderConfig& cfg);
// clamped, gamma-2.2 encoded
material::Image render_preview(const material::MaterialMaps& maps, const RenderConfig& cfg);

// GGX normal distribution and Schlick Fresnel at a single sample, exposed
// for physics tests.
double ggx_ndf(double n_dot_h, double roughness);
double schlick_fresnel(double h_dot_v, double f0);

} // namespace svbrdf::render
