#pragma once

#include "svbrdf/diffusion/schedule.hpp"
#include "svbrdf/diffusion/unet.hpp"
#include "svbrdf/vq/model.hpp"

namespace svbrdf::diffusion {

struct SamplerConfig {
    int steps = 100;  // <= t_train
    double eta = 0.0; // 0 deterministic, 1 ancestral-equivalent variance
    uint64_t seed = 0;

    void validate(const NoiseSchedule& sched) const;
};

// Encoded conditions ready for the denoiser.
struct DenoiserInput {
    nd::Tensor tokens; // [m, d_tau]
    nd::Tensor local;  // [local_channels, h, w]
};

// E || eps - eps_theta(z_t, t, cond) ||^2 with t ~ U{1..T}, eps ~ N(0,I).
nd::Tensor diffusion_loss(const DenoiserUNet& net, const nd::Tensor& z0, const DenoiserInput& cond,
                          Rng& rng, const NoiseSchedule& sched);

// One DDIM update t -> t_prev (t_prev < t, 0 allowed):
//   zhat0   = (z_t - sqrt(1-abar_t) eps) / sqrt(abar_t)
//   z_prev  = sqrt(abar_prev) zhat0 + sqrt(1-abar_prev-sigma^2) eps + sigma xi
//   sigma   = eta sqrt((1-abar_prev)/(1-abar_t)) sqrt(1-abar_t/abar_prev)
nd::Tensor ddim_step(const DenoiserUNet& net, const nd::Tensor& z_t, int t, int t_prev, double eta,
                     const DenoiserInput& cond, Rng* rng, const NoiseSchedule& sched);

// closed-form sigma for tests and the sampler
double ddim_sigma(const NoiseSchedule& sched, int t, int t_prev, double eta);

// evenly spaced strictly decreasing timesteps ending at 0
std::vector<int> sampling_timesteps(const NoiseSchedule& sched, int steps);

// Full chain from z_T ~ N(0,I); returns the raw denoised latent (the
// caller rescales and quantizes).
nd::Tensor ddim_sample_raw(const DenoiserUNet& net, const DenoiserInput& cond,
                           const SamplerConfig& cfg, const NoiseSchedule& sched);

// Chain + rescale by latent_scale + per-map codebook snap: the returned grid
// is decoder-ready.
nd::Tensor sample(const DenoiserUNet& net, const DenoiserInput& cond, const SamplerConfig& cfg,
                  const NoiseSchedule& sched, const vq::VqModel& vq_model, double latent_scale);

} // namespace svbrdf::diffusion
