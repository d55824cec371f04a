#include "svbrdf/vq/discriminator.hpp"

namespace svbrdf::vq {

using nd::Tensor;

PatchDiscriminator::PatchDiscriminator(uint64_t seed, int in_ch, int base_width) {
    Rng rng(derive_seed(seed, "discriminator"));
    c1_ = nd::Conv2dLayer("disc.c1", in_ch, base_width, 3, 2, 1, rng);
    n1_ = nd::GroupNormLayer("disc.n1", base_width);
    c2_ = nd::Conv2dLayer("disc.c2", base_width, base_width * 2, 3, 2, 1, rng);
    n2_ = nd::GroupNormLayer("disc.n2", base_width * 2);
    c3_ = nd::Conv2dLayer("disc.c3", base_width * 2, 1, 3, 1, 1, rng);
}

Tensor PatchDiscriminator::logits_chw(const Tensor& stacked) const {
    Tensor h = nd::silu(n1_(c1_(stacked)));
    h = nd::silu(n2_(c2_(h)));
    return c3_(h);
}

Tensor PatchDiscriminator::logits(const render::MapTensors& maps) const {
    Tensor stacked = nd::concat0({nd::hwc_to_chw(maps.diffuse), nd::hwc_to_chw(maps.normal),
                                  nd::hwc_to_chw(maps.roughness), nd::hwc_to_chw(maps.specular)});
    return logits_chw(stacked);
}

Tensor PatchDiscriminator::hinge_loss(const render::MapTensors& real, const render::MapTensors& fake) const {
    Tensor lr = nd::mean_all(nd::relu(nd::add_scalar(nd::neg(logits(real)), 1.0)));
    Tensor lf = nd::mean_all(nd::relu(nd::add_scalar(logits(fake), 1.0)));
    return nd::add(lr, lf);
}

Tensor PatchDiscriminator::generator_loss(const render::MapTensors& fake) const {
    return nd::neg(nd::mean_all(logits(fake)));
}

std::vector<nd::Param*> PatchDiscriminator::parameters() {
    std::vector<nd::Param*> out;
    c1_.collect(out);
    n1_.collect(out);
    c2_.collect(out);
    n2_.collect(out);
    c3_.collect(out);
    return out;
}

} // namespace svbrdf::vq
