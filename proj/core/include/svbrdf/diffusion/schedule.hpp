#pragma once

#include "svbrdf/nd/ops.hpp"
#include "svbrdf/rng.hpp"

namespace svbrdf::diffusion {

// Linear beta schedule with cached alpha products. alpha_bar(0) == 1 so a
// DDIM chain can land exactly on the clean latent.
struct NoiseSchedule {
    int t_train = 1000;
    std::vector<double> betas;      // index t-1 holds beta_t
    std::vector<double> alpha_bars; // index t-1 holds alpha_bar_t

    static NoiseSchedule linear(int t_train = 1000, double beta_start = 1e-4, double beta_end = 0.02);

    double beta(int t) const;      // t in 1..T
    double alpha(int t) const { return 1.0 - beta(t); }
    double alpha_bar(int t) const; // t in 0..T

    // strictly increasing betas in (0,1), strictly decreasing alpha_bar,
    // alpha_bar(T) < 0.01
    void validate() const;
};

// closed form z_t = sqrt(abar_t) z0 + sqrt(1 - abar_t) eps
nd::Tensor q_sample(const nd::Tensor& z0, int t, const nd::Tensor& eps, const NoiseSchedule& sched);

// stepwise product form, one Gaussian draw per step
nd::Tensor iterate_forward(const nd::Tensor& z0, int t, Rng& rng, const NoiseSchedule& sched);

nd::Tensor randn_like(const nd::Tensor& t, Rng& rng);

} // namespace svbrdf::diffusion
