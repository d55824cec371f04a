#pragma once

#include "svbrdf/render/renderer.hpp"

namespace svbrdf::vq {

// PatchGAN over the channel-concatenated 12-channel map stack: a strided
// conv tower ending in one real/fake logit per receptive-field patch.
class PatchDiscriminator {
public:
    PatchDiscriminator() = default;
    PatchDiscriminator(uint64_t seed, int in_ch = 12, int base_width = 16);

    nd::Tensor logits(const render::MapTensors& maps) const; // [1, H/4, W/4]
    nd::Tensor logits_chw(const nd::Tensor& stacked) const;

    // hinge: mean relu(1 - D(real)) + mean relu(1 + D(fake))
    nd::Tensor hinge_loss(const render::MapTensors& real, const render::MapTensors& fake) const;
    // generator term: -mean D(fake)
    nd::Tensor generator_loss(const render::MapTensors& fake) const;

    std::vector<nd::Param*> parameters();

private:
    nd::Conv2dLayer c1_, c2_, c3_;
    nd::GroupNormLayer n1_, n2_;
};

} // namespace svbrdf::vq
