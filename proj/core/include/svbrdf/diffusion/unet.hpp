#pragma once

#include "svbrdf/cond/attention.hpp"
#include "svbrdf/nd/nn.hpp"

namespace svbrdf::diffusion {

struct UNetConfig {
    int latent_channels = 16;   // c, the denoised state
    int local_channels = 8;     // concatenated condition channels
    int latent_resolution = 4;  // h = w
    int width = 64;             // first-stage width, doubled at the bottleneck
    int heads = 4;
    int d_tau = 64;             // global condition token width
    int time_dim = 64;          // sinusoidal embedding size
    uint64_t seed = 0;

    int down_stages() const { return latent_resolution >= 8 ? 2 : 1; }
    void validate() const;
};

// Epsilon-prediction U-Net on the latent grid: residual stages with
// timestep embeddings, self-attention at the bottleneck and cross-attention
// over the condition tokens at the two lowest resolutions. Local condition
// channels ride along as extra input channels; the output shape always
// equals the latent shape.
class DenoiserUNet {
public:
    DenoiserUNet() = default;
    explicit DenoiserUNet(const UNetConfig& cfg);

    // z_t [c,h,w], cond_tokens [m,d_tau], local [local_channels,h,w]
    nd::Tensor forward(const nd::Tensor& z_t, int t, const nd::Tensor& cond_tokens,
                       const nd::Tensor& local) const;

    std::vector<nd::Param*> parameters();
    const UNetConfig& config() const { return cfg_; }

private:
    nd::Tensor time_embedding(int t) const; // [1, 2*time_dim]

    UNetConfig cfg_;
    nd::Conv2dLayer in_conv_;
    nd::LinearLayer time_l1_, time_l2_;
    std::vector<nd::ResBlock> down_blocks_;
    std::vector<nd::Conv2dLayer> down_convs_;
    std::vector<cond::AttentionBlock> down_cross_; // empty entries where disabled
    std::vector<bool> down_has_cross_;
    nd::ResBlock mid1_, mid2_;
    cond::AttentionBlock mid_self_, mid_cross_;
    std::vector<nd::Conv2dLayer> up_convs_;
    std::vector<nd::ResBlock> up_blocks_;
    nd::GroupNormLayer out_norm_;
    nd::Conv2dLayer out_conv_;
    std::vector<int> stage_widths_;
};

} // namespace svbrdf::diffusion
