#include "svbrdf/diffusion/sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace svbrdf::diffusion {

using nd::Tensor;

void SamplerConfig::validate(const NoiseSchedule& sched) const {
    if (steps < 1 || steps > sched.t_train) {
        throw std::invalid_argument("sampler steps must lie in 1..T_train");
    }
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("eta must lie in [0,1]");
}

Tensor diffusion_loss(const DenoiserUNet& net, const Tensor& z0, const DenoiserInput& cond,
                      Rng& rng, const NoiseSchedule& sched) {
    const int t = 1 + static_cast<int>(rng.uniform_index(static_cast<uint64_t>(sched.t_train)));
    Tensor eps = randn_like(z0, rng);
    Tensor z_t = q_sample(z0.detach(), t, eps, sched);
    Tensor pred = net.forward(z_t, t, cond.tokens, cond.local);
    return nd::mean_sq_diff(eps, pred);
}

double ddim_sigma(const NoiseSchedule& sched, int t, int t_prev, double eta) {
    const double ab_t = sched.alpha_bar(t);
    const double ab_p = sched.alpha_bar(t_prev);
    return eta * std::sqrt((1.0 - ab_p) / (1.0 - ab_t)) * std::sqrt(1.0 - ab_t / ab_p);
}

Tensor ddim_step(const DenoiserUNet& net, const Tensor& z_t, int t, int t_prev, double eta,
                 const DenoiserInput& cond, Rng* rng, const NoiseSchedule& sched) {
    if (t_prev >= t || t_prev < 0) {
        throw std::invalid_argument("ddim_step needs t_prev < t, got t=" + std::to_string(t) +
                                    " t_prev=" + std::to_string(t_prev));
    }
    const double ab_t = sched.alpha_bar(t);
    const double ab_p = sched.alpha_bar(t_prev);
    Tensor eps = net.forward(z_t, t, cond.tokens, cond.local).detach();
    Tensor zhat0 = nd::mul_scalar(nd::sub(z_t.detach(), nd::mul_scalar(eps, std::sqrt(1.0 - ab_t))),
                                  1.0 / std::sqrt(ab_t));
    const double sigma = eta == 0.0 ? 0.0 : ddim_sigma(sched, t, t_prev, eta);
    const double dir = std::sqrt(std::max(0.0, 1.0 - ab_p - sigma * sigma));
    Tensor out = nd::add(nd::mul_scalar(zhat0, std::sqrt(ab_p)), nd::mul_scalar(eps, dir));
    if (sigma > 0.0) {
        if (!rng) throw std::invalid_argument("stochastic ddim_step needs an rng");
        out = nd::add(out, nd::mul_scalar(randn_like(out, *rng), sigma));
    }
    return out;
}

std::vector<int> sampling_timesteps(const NoiseSchedule& sched, int steps) {
    // evenly spaced subsequence of 1..T, always containing T
    std::vector<int> ts(steps);
    for (int k = 0; k < steps; ++k) {
        ts[k] = static_cast<int>(std::llround(static_cast<double>(sched.t_train) * (k + 1) / steps));
        ts[k] = std::max(1, ts[k]);
    }
    return ts; // ascending; the chain walks it backwards
}

Tensor ddim_sample_raw(const DenoiserUNet& net, const DenoiserInput& cond,
                       const SamplerConfig& cfg, const NoiseSchedule& sched) {
    cfg.validate(sched);
    const UNetConfig& uc = net.config();
    Rng rng(derive_seed(cfg.seed, "ddim"));
    Tensor z = randn_like(Tensor::zeros({uc.latent_channels, uc.latent_resolution, uc.latent_resolution}), rng);
    std::vector<int> ts = sampling_timesteps(sched, cfg.steps);
    for (int k = static_cast<int>(ts.size()) - 1; k >= 0; --k) {
        const int t = ts[k];
        const int t_prev = k > 0 ? ts[k - 1] : 0;
        z = ddim_step(net, z, t, t_prev, cfg.eta, cond, &rng, sched);
    }
    return z;
}

Tensor sample(const DenoiserUNet& net, const DenoiserInput& cond, const SamplerConfig& cfg,
              const NoiseSchedule& sched, const vq::VqModel& vq_model, double latent_scale) {
    Tensor z = ddim_sample_raw(net, cond, cfg, sched);
    z = nd::mul_scalar(z, latent_scale);
    return vq_model.quantize_generated(z);
}

} // namespace svbrdf::diffusion
