#include "svbrdf/diffusion/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace svbrdf::diffusion {

using nd::Tensor;

NoiseSchedule NoiseSchedule::linear(int t_train, double beta_start, double beta_end) {
    if (t_train < 2) throw std::invalid_argument("schedule needs at least 2 steps");
    NoiseSchedule s;
    s.t_train = t_train;
    s.betas.resize(t_train);
    s.alpha_bars.resize(t_train);
    double prod = 1.0;
    for (int t = 1; t <= t_train; ++t) {
        const double b = beta_start + (beta_end - beta_start) * (t - 1) / static_cast<double>(t_train - 1);
        s.betas[t - 1] = b;
        prod *= 1.0 - b;
        s.alpha_bars[t - 1] = prod;
    }
    s.validate();
    return s;
}

double NoiseSchedule::beta(int t) const {
    if (t < 1 || t > t_train) throw std::invalid_argument("timestep " + std::to_string(t) + " out of range");
    return betas[t - 1];
}

double NoiseSchedule::alpha_bar(int t) const {
    if (t == 0) return 1.0;
    if (t < 1 || t > t_train) throw std::invalid_argument("timestep " + std::to_string(t) + " out of range");
    return alpha_bars[t - 1];
}

void NoiseSchedule::validate() const {
    if (betas.empty() || static_cast<int>(betas.size()) != t_train) {
        throw std::invalid_argument("schedule tables not initialized");
    }
    for (int t = 1; t <= t_train; ++t) {
        if (!(betas[t - 1] > 0.0 && betas[t - 1] < 1.0)) throw std::invalid_argument("beta out of (0,1)");
        if (t > 1 && !(betas[t - 1] > betas[t - 2])) throw std::invalid_argument("betas must strictly increase");
        if (t > 1 && !(alpha_bars[t - 1] < alpha_bars[t - 2])) {
            throw std::invalid_argument("alpha_bar must strictly decrease");
        }
    }
    if (!(alpha_bars[t_train - 1] < 0.01)) {
        throw std::invalid_argument("alpha_bar at T must fall below 0.01");
    }
}

Tensor randn_like(const Tensor& t, Rng& rng) {
    std::vector<double> v(t.size());
    for (double& x : v) x = rng.normal();
    return Tensor::from_data(t.shape(), std::move(v));
}

Tensor q_sample(const Tensor& z0, int t, const Tensor& eps, const NoiseSchedule& sched) {
    if (eps.shape() != z0.shape()) {
        throw std::invalid_argument("noise shape " + nd::shape_str(eps.shape()) +
                                    " does not match latent " + nd::shape_str(z0.shape()));
    }
    const double ab = sched.alpha_bar(t); // validates t
    return nd::add(nd::mul_scalar(z0, std::sqrt(ab)), nd::mul_scalar(eps, std::sqrt(1.0 - ab)));
}

Tensor iterate_forward(const Tensor& z0, int t, Rng& rng, const NoiseSchedule& sched) {
    if (t < 1 || t > sched.t_train) throw std::invalid_argument("timestep out of range");
    Tensor z = z0;
    for (int s = 1; s <= t; ++s) {
        const double b = sched.beta(s);
        z = nd::add(nd::mul_scalar(z, std::sqrt(1.0 - b)),
                    nd::mul_scalar(randn_like(z0, rng), std::sqrt(b)));
    }
    return z;
}

} // namespace svbrdf::diffusion
