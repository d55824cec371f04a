#include "svbrdf/render/renderer.hpp"

#include <cmath>
#include <stdexcept>

namespace svbrdf::render {

using nd::Tensor;
using material::Image;
using material::MaterialMaps;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct PixelGeometry {
    // constants per (cfg, H, W): unit directions and irradiance terms
    Tensor l;        // [H,W,3] unit vector to light
    Tensor v;        // [H,W,3] unit vector to camera
    Tensor h;        // [H,W,3] half vector
    Tensor irr;      // [H,W,1] I / r^2
    Tensor fres_pow; // [H,W,1] (1 - h.v)^5
};

PixelGeometry pixel_geometry(const RenderConfig& cfg, int hres, int wres) {
    std::vector<double> lv(static_cast<size_t>(hres) * wres * 3);
    std::vector<double> vv(lv.size());
    std::vector<double> hv(lv.size());
    std::vector<double> irr(static_cast<size_t>(hres) * wres);
    std::vector<double> fp(irr.size());
    size_t i3 = 0, i1 = 0;
    for (int y = 0; y < hres; ++y) {
        for (int x = 0; x < wres; ++x) {
            const double px = -1.0 + 2.0 * (x + 0.5) / wres;
            const double py = 1.0 - 2.0 * (y + 0.5) / hres;
            double lx = cfg.light_pos[0] - px, ly = cfg.light_pos[1] - py, lz = cfg.light_pos[2];
            const double r2 = lx * lx + ly * ly + lz * lz;
            const double rl = std::sqrt(r2);
            lx /= rl; ly /= rl; lz /= rl;
            double vx = cfg.camera_pos[0] - px, vy = cfg.camera_pos[1] - py, vz = cfg.camera_pos[2];
            const double rv = std::sqrt(vx * vx + vy * vy + vz * vz);
            vx /= rv; vy /= rv; vz /= rv;
            double hx = lx + vx, hy = ly + vy, hz = lz + vz;
            const double rh = std::sqrt(hx * hx + hy * hy + hz * hz);
            if (rh > 1e-12) { hx /= rh; hy /= rh; hz /= rh; }
            lv[i3] = lx; vv[i3] = vx; hv[i3] = hx; ++i3;
            lv[i3] = ly; vv[i3] = vy; hv[i3] = hy; ++i3;
            lv[i3] = lz; vv[i3] = vz; hv[i3] = hz; ++i3;
            irr[i1] = cfg.light_intensity / r2;
            const double hdotv = std::min(std::max(hx * vx + hy * vy + hz * vz, 0.0), 1.0);
            const double omh = 1.0 - hdotv;
            // (1e-9)^5 is far below double significance; snapping keeps
            // colocated light/camera geometry exactly specular-free at F0=0
            fp[i1] = omh <= 1e-9 ? 0.0 : std::pow(omh, 5.0);
            ++i1;
        }
    }
    PixelGeometry g;
    g.l = Tensor::from_data({hres, wres, 3}, std::move(lv));
    g.v = Tensor::from_data({hres, wres, 3}, std::move(vv));
    g.h = Tensor::from_data({hres, wres, 3}, std::move(hv));
    g.irr = Tensor::from_data({hres, wres, 1}, std::move(irr));
    g.fres_pow = Tensor::from_data({hres, wres, 1}, std::move(fp));
    return g;
}

Tensor decoded_normal(const Tensor& normal_map) {
    Tensor n_raw = nd::add_scalar(nd::mul_scalar(normal_map, 2.0), -1.0);
    Tensor norm2 = nd::sum_last_keepdim(nd::square(n_raw));
    return nd::mul(n_raw, nd::pow_scalar(nd::add_scalar(norm2, 1e-12), -0.5));
}

// x / (x (1-k) + k) on the clamped cosine
Tensor g1_schlick(const Tensor& cos_t, const Tensor& k) {
    Tensor xc = nd::relu(cos_t);
    Tensor denom = nd::add(nd::mul(xc, nd::add_scalar(nd::neg(k), 1.0)), k);
    return nd::div(xc, denom);
}

} // namespace

void RenderConfig::validate() const {
    if (light_pos[2] <= 0.0) throw std::invalid_argument("light must be above the surface plane (z > 0)");
    if (camera_pos[2] <= 0.0) throw std::invalid_argument("camera must be above the surface plane (z > 0)");
    if (light_intensity <= 0.0) throw std::invalid_argument("light intensity must be positive");
}

LightingSet sample_lighting(uint64_t seed, int k) {
    if (k < 1) throw std::invalid_argument("lighting set needs k >= 1");
    Rng rng(derive_seed(seed, "lighting"));
    LightingSet set;
    for (int i = 0; i < k; ++i) {
        RenderConfig cfg;
        cfg.light_pos = {rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8), rng.uniform(0.5, 2.0)};
        cfg.light_intensity = kPi * cfg.light_pos[2] * cfg.light_pos[2];
        cfg.camera_pos = (i % 3 == 2) ? std::array<double, 3>{1.4, 0.0, 0.35}
                                      : std::array<double, 3>{0.0, 0.0, 2.0};
        cfg.validate();
        set.configs.push_back(cfg);
    }
    return set;
}

RenderConfig flash_config() {
    RenderConfig cfg;
    cfg.light_pos = {0.0, 0.0, 2.0};
    cfg.camera_pos = {0.0, 0.0, 2.0};
    cfg.light_intensity = 4.0 * kPi;
    return cfg;
}

MapTensors to_tensors(const MaterialMaps& maps) {
    auto t = [](const Image& img) {
        return Tensor::from_data({img.height, img.width, img.channels}, img.v);
    };
    return {t(maps.diffuse), t(maps.normal), t(maps.roughness), t(maps.specular)};
}

MaterialMaps to_maps(const MapTensors& t) {
    auto img = [](const Tensor& x) {
        Image out(x.dim(0), x.dim(1), x.dim(2));
        for (size_t i = 0; i < x.size(); ++i) out.v[i] = material::clamp01(x[i]);
        return out;
    };
    return {img(t.diffuse), img(t.normal), img(t.roughness), img(t.specular)};
}

Tensor render(const MapTensors& maps, const RenderConfig& cfg) {
    cfg.validate();
    const int hres = maps.diffuse.dim(0);
    const int wres = maps.diffuse.dim(1);
    PixelGeometry geo = pixel_geometry(cfg, hres, wres);

    Tensor n = decoded_normal(maps.normal);
    Tensor nl = nd::sum_last_keepdim(nd::mul(n, geo.l));
    Tensor nv = nd::sum_last_keepdim(nd::mul(n, geo.v));
    Tensor nh = nd::sum_last_keepdim(nd::mul(n, geo.h));

    Tensor rough = nd::mean_last_keepdim(maps.roughness);
    Tensor alpha = nd::square(rough);
    Tensor alpha2 = nd::square(alpha);

    // D = alpha^2 / (pi ((n.h)^2 (alpha^2 - 1) + 1)^2)
    Tensor tden = nd::add_scalar(nd::mul(nd::square(nh), nd::add_scalar(alpha2, -1.0)), 1.0);
    Tensor d_ggx = nd::div(nd::mul_scalar(alpha2, 1.0 / kPi), nd::square(tden));

    Tensor k = nd::mul_scalar(alpha, 0.5);
    Tensor g_term = nd::mul(g1_schlick(nl, k), g1_schlick(nv, k));

    // F = F0 + (1 - F0)(1 - h.v)^5
    Tensor fres = nd::add(maps.specular, nd::mul(nd::add_scalar(nd::neg(maps.specular), 1.0), geo.fres_pow));

    Tensor denom = nd::add_scalar(nd::mul_scalar(nd::mul(nl, nv), 4.0), 1e-6);
    Tensor spec_term = nd::div(nd::mul(nd::mul(d_ggx, g_term), fres), denom);

    Tensor brdf = nd::add(nd::mul_scalar(maps.diffuse, 1.0 / kPi), spec_term);
    return nd::mul(nd::mul(brdf, geo.irr), nd::relu(nl));
}

Tensor render_loss(const MapTensors& a, const MapTensors& b, const LightingSet& lights) {
    if (lights.configs.empty()) throw std::invalid_argument("render_loss needs a non-empty lighting set");
    Tensor total;
    for (const RenderConfig& cfg : lights.configs) {
        Tensor la = nd::log_op(nd::add_scalar(render(a, cfg), 0.01));
        Tensor lb = nd::log_op(nd::add_scalar(render(b, cfg), 0.01));
        Tensor term = nd::mean_abs_diff(la, lb);
        total = total.defined() ? nd::add(total, term) : term;
    }
    return nd::mul_scalar(total, 1.0 / lights.size());
}

Image render_image(const MaterialMaps& maps, const RenderConfig& cfg) {
    Tensor out = render(to_tensors(maps), cfg);
    Image img(out.dim(0), out.dim(1), 3);
    img.v = out.values();
    return img;
}

Image render_preview(const MaterialMaps& maps, const RenderConfig& cfg) {
    return material::to_gamma22(render_image(maps, cfg));
}

double ggx_ndf(double n_dot_h, double roughness) {
    const double alpha = roughness * roughness;
    const double a2 = alpha * alpha;
    const double t = n_dot_h * n_dot_h * (a2 - 1.0) + 1.0;
    return a2 / (kPi * t * t);
}

double schlick_fresnel(double h_dot_v, double f0) {
    const double c = std::min(std::max(h_dot_v, 0.0), 1.0);
    return f0 + (1.0 - f0) * std::pow(1.0 - c, 5.0);
}

} // namespace svbrdf::render
