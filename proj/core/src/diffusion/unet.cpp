#include "svbrdf/diffusion/unet.hpp"

#include "svbrdf/nd/ops.hpp"

#include <cmath>
#include <stdexcept>

namespace svbrdf::diffusion {

using nd::Tensor;

void UNetConfig::validate() const {
    if (latent_resolution < 2) throw std::invalid_argument("latent resolution must be >= 2");
    if (width % (4 * heads) != 0) {
        throw std::invalid_argument("width must be divisible by 4*heads for norm groups and attention");
    }
    if (latent_channels < 1 || local_channels < 0) throw std::invalid_argument("bad channel configuration");
}

namespace {

Tensor to_tokens(const Tensor& x) {
    const int ch = x.dim(0);
    const int hw = x.dim(1) * x.dim(2);
    return nd::transpose2d(nd::reshape(x, {ch, hw}));
}

Tensor from_tokens(const Tensor& t, int h, int w) {
    const int ch = t.dim(1);
    return nd::reshape(nd::transpose2d(t), {ch, h, w});
}

} // namespace

DenoiserUNet::DenoiserUNet(const UNetConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(derive_seed(cfg.seed, "denoiser"));
    const int n_down = cfg.down_stages();
    const int emb_dim = 2 * cfg.time_dim;

    stage_widths_.clear();
    for (int i = 0; i < n_down; ++i) stage_widths_.push_back(cfg.width << std::min(i, 1));
    const int bottleneck = cfg.width << 1;

    in_conv_ = nd::Conv2dLayer("dm.in", cfg.latent_channels + cfg.local_channels, stage_widths_[0], 3, 1, 1, rng);
    time_l1_ = nd::LinearLayer("dm.time.l1", cfg.time_dim, emb_dim, rng);
    time_l2_ = nd::LinearLayer("dm.time.l2", emb_dim, emb_dim, rng);

    for (int i = 0; i < n_down; ++i) {
        const std::string p = "dm.down" + std::to_string(i);
        down_blocks_.emplace_back(p + ".res", stage_widths_[i], stage_widths_[i], rng, emb_dim);
        const bool cross = i >= n_down - 1;
        down_has_cross_.push_back(cross);
        down_cross_.emplace_back();
        if (cross) down_cross_[i] = cond::AttentionBlock(p + ".xattn", stage_widths_[i], cfg.d_tau, cfg.heads, rng);
        const int next = (i + 1 < n_down) ? stage_widths_[i + 1] : bottleneck;
        down_convs_.emplace_back(p + ".down", stage_widths_[i], next, 3, 2, 1, rng);
    }
    mid1_ = nd::ResBlock("dm.mid1", bottleneck, bottleneck, rng, emb_dim);
    mid_self_ = cond::AttentionBlock("dm.mid.sattn", bottleneck, bottleneck, cfg.heads, rng);
    mid_cross_ = cond::AttentionBlock("dm.mid.xattn", bottleneck, cfg.d_tau, cfg.heads, rng);
    mid2_ = nd::ResBlock("dm.mid2", bottleneck, bottleneck, rng, emb_dim);

    for (int i = n_down - 1; i >= 0; --i) {
        const std::string p = "dm.up" + std::to_string(i);
        const int from = (i + 1 < n_down) ? stage_widths_[i + 1] : bottleneck;
        up_convs_.emplace_back(p + ".conv", from, stage_widths_[i], 3, 1, 1, rng);
        up_blocks_.emplace_back(p + ".res", 2 * stage_widths_[i], stage_widths_[i], rng, emb_dim);
    }
    out_norm_ = nd::GroupNormLayer("dm.out.norm", stage_widths_[0]);
    out_conv_ = nd::Conv2dLayer("dm.out.conv", stage_widths_[0], cfg.latent_channels, 3, 1, 1, rng);
}

Tensor DenoiserUNet::time_embedding(int t) const {
    const int half = cfg_.time_dim / 2;
    std::vector<double> v(cfg_.time_dim);
    for (int i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * i / std::max(1, half - 1));
        v[i] = std::sin(t * freq);
        v[half + i] = std::cos(t * freq);
    }
    return Tensor::from_data({1, cfg_.time_dim}, std::move(v));
}

Tensor DenoiserUNet::forward(const Tensor& z_t, int t, const Tensor& cond_tokens, const Tensor& local) const {
    if (z_t.ndim() != 3 || z_t.dim(0) != cfg_.latent_channels || z_t.dim(1) != cfg_.latent_resolution) {
        throw std::invalid_argument("denoiser input must be [" + std::to_string(cfg_.latent_channels) + "," +
                                    std::to_string(cfg_.latent_resolution) + "," +
                                    std::to_string(cfg_.latent_resolution) + "], got " +
                                    nd::shape_str(z_t.shape()));
    }
    if (local.dim(0) != cfg_.local_channels || local.dim(1) != z_t.dim(1)) {
        throw std::invalid_argument("local condition block mismatch: " + nd::shape_str(local.shape()));
    }
    Tensor emb = time_l2_(nd::silu(time_l1_(time_embedding(t))));

    Tensor x = in_conv_(nd::concat0({z_t, local}));
    std::vector<Tensor> skips;
    for (size_t i = 0; i < down_blocks_.size(); ++i) {
        x = down_blocks_[i].forward(x, emb);
        if (down_has_cross_[i]) {
            x = from_tokens(down_cross_[i].forward(to_tokens(x), cond_tokens), x.dim(1), x.dim(2));
        }
        skips.push_back(x);
        x = down_convs_[i](x);
    }

    x = mid1_.forward(x, emb);
    Tensor tok = to_tokens(x);
    tok = mid_self_.forward(tok, tok);
    tok = mid_cross_.forward(tok, cond_tokens);
    x = from_tokens(tok, x.dim(1), x.dim(2));
    x = mid2_.forward(x, emb);

    for (size_t u = 0; u < up_convs_.size(); ++u) {
        const size_t i = down_blocks_.size() - 1 - u; // matching skip level
        x = up_convs_[u](nd::upsample_nearest2(x));
        x = nd::concat0({x, skips[i]});
        x = up_blocks_[u].forward(x, emb);
    }
    return out_conv_(nd::silu(out_norm_(x)));
}

std::vector<nd::Param*> DenoiserUNet::parameters() {
    std::vector<nd::Param*> out;
    in_conv_.collect(out);
    time_l1_.collect(out);
    time_l2_.collect(out);
    for (size_t i = 0; i < down_blocks_.size(); ++i) {
        down_blocks_[i].collect(out);
        if (down_has_cross_[i]) down_cross_[i].collect(out);
        down_convs_[i].collect(out);
    }
    mid1_.collect(out);
    mid_self_.collect(out);
    mid_cross_.collect(out);
    mid2_.collect(out);
    for (size_t i = 0; i < up_convs_.size(); ++i) {
        up_convs_[i].collect(out);
        up_blocks_[i].collect(out);
    }
    out_norm_.collect(out);
    out_conv_.collect(out);
    return out;
}

} // namespace svbrdf::diffusion
