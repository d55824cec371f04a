#pragma once

#include "svbrdf/vq/discriminator.hpp"
#include "svbrdf/vq/model.hpp"

namespace svbrdf::vq {

// Fixed random strided conv features (seed-frozen, never trained). Stands in
// for a pretrained feature extractor: distance is the summed per-layer MSE of
// activations, zero iff the inputs match layer-for-layer.
class PerceptualStack {
public:
    explicit PerceptualStack(uint64_t seed);
    nd::Tensor distance(const nd::Tensor& a_chw, const nd::Tensor& b_chw) const;
    nd::Tensor distance_maps(const render::MapTensors& a, const render::MapTensors& b) const;

private:
    std::vector<nd::Tensor> features(const nd::Tensor& x) const;
    nd::Tensor k1_, k2_, k3_; // frozen kernels
};

struct LossWeights {
    double gamma = 0.9;       // rendering term
    double delta = 0.6;       // perceptual term
    double adv_weight = 1.0;
    double beta_commit = 0.25;
    bool use_render = true;
    bool use_perceptual = true;
    bool use_adversarial = true;
};

struct CompressionLossTerms {
    nd::Tensor pixel, render, perceptual, adv, reg_q, reg_c, total;
    bool adv_active = false;
};

// L = L_pixel + gamma L_render + delta L_perceptual + L_adv + sum(L_q + beta L_c).
// Disabled or not-yet-enabled terms contribute exactly zero.
CompressionLossTerms compression_loss(const render::MapTensors& input,
                                      const render::MapTensors& recon,
                                      const VqModel::QuantizedLatent& q,
                                      const PatchDiscriminator* disc,
                                      const PerceptualStack* perceptual,
                                      const render::LightingSet& lights,
                                      const LossWeights& weights,
                                      bool adv_enabled);

} // namespace svbrdf::vq
