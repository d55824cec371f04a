#include "svbrdf/vq/losses.hpp"

namespace svbrdf::vq {

using nd::Tensor;

PerceptualStack::PerceptualStack(uint64_t seed) {
    Rng rng(derive_seed(seed, "perceptual"));
    k1_ = nd::randn_tensor({8, 3, 3, 3}, rng, std::sqrt(2.0 / 27.0));
    k2_ = nd::randn_tensor({16, 8, 3, 3}, rng, std::sqrt(2.0 / 72.0));
    k3_ = nd::randn_tensor({16, 16, 3, 3}, rng, std::sqrt(2.0 / 144.0));
}

std::vector<Tensor> PerceptualStack::features(const Tensor& x) const {
    std::vector<Tensor> f;
    f.push_back(nd::silu(nd::conv2d(x, k1_, 2, 1)));
    f.push_back(nd::silu(nd::conv2d(f[0], k2_, 2, 1)));
    f.push_back(nd::conv2d(f[1], k3_, 2, 1));
    return f;
}

Tensor PerceptualStack::distance(const Tensor& a_chw, const Tensor& b_chw) const {
    std::vector<Tensor> fa = features(a_chw);
    std::vector<Tensor> fb = features(b_chw);
    Tensor total;
    for (size_t i = 0; i < fa.size(); ++i) {
        Tensor term = nd::mean_sq_diff(fa[i], fb[i]);
        total = total.defined() ? nd::add(total, term) : term;
    }
    return total;
}

Tensor PerceptualStack::distance_maps(const render::MapTensors& a, const render::MapTensors& b) const {
    Tensor d = distance(nd::hwc_to_chw(a.diffuse), nd::hwc_to_chw(b.diffuse));
    d = nd::add(d, distance(nd::hwc_to_chw(a.normal), nd::hwc_to_chw(b.normal)));
    d = nd::add(d, distance(nd::hwc_to_chw(a.roughness), nd::hwc_to_chw(b.roughness)));
    d = nd::add(d, distance(nd::hwc_to_chw(a.specular), nd::hwc_to_chw(b.specular)));
    return nd::mul_scalar(d, 0.25);
}

CompressionLossTerms compression_loss(const render::MapTensors& input,
                                      const render::MapTensors& recon,
                                      const VqModel::QuantizedLatent& q,
                                      const PatchDiscriminator* disc,
                                      const PerceptualStack* perceptual,
                                      const render::LightingSet& lights,
                                      const LossWeights& w,
                                      bool adv_enabled) {
    CompressionLossTerms t;
    Tensor pixel = nd::mean_abs_diff(recon.diffuse, input.diffuse);
    pixel = nd::add(pixel, nd::mean_abs_diff(recon.normal, input.normal));
    pixel = nd::add(pixel, nd::mean_abs_diff(recon.roughness, input.roughness));
    pixel = nd::add(pixel, nd::mean_abs_diff(recon.specular, input.specular));
    t.pixel = nd::mul_scalar(pixel, 0.25);

    t.render = w.use_render ? render::render_loss(recon, input, lights) : Tensor::scalar(0.0);
    t.perceptual = (w.use_perceptual && perceptual) ? perceptual->distance_maps(recon, input)
                                                    : Tensor::scalar(0.0);
    t.adv_active = w.use_adversarial && adv_enabled && disc != nullptr;
    t.adv = t.adv_active ? disc->generator_loss(recon) : Tensor::scalar(0.0);
    t.reg_q = q.l_q;
    t.reg_c = q.l_c;

    Tensor total = t.pixel;
    if (w.use_render) total = nd::add(total, nd::mul_scalar(t.render, w.gamma));
    if (w.use_perceptual && perceptual) total = nd::add(total, nd::mul_scalar(t.perceptual, w.delta));
    if (t.adv_active) total = nd::add(total, nd::mul_scalar(t.adv, w.adv_weight));
    total = nd::add(total, nd::add(t.reg_q, nd::mul_scalar(t.reg_c, w.beta_commit)));
    t.total = total;
    return t;
}

} // namespace svbrdf::vq
