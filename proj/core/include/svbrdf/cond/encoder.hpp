#pragma once

#include "svbrdf/cond/attention.hpp"
#include "svbrdf/cond/extract.hpp"

#include <optional>

namespace svbrdf::cond {

enum CondSlot { kEmbedding = 0, kPalette = 1, kSketch = 2, kRender = 3, kNumConditions = 4 };

// Optional global (embedding, palette) and local (sketch, render) controls.
// drop_mask[i] == true means the slot is masked out for the denoiser.
struct ConditionSet {
    std::optional<std::vector<double>> embedding;  // kEmbeddingDim
    std::optional<Palette> palette;
    std::optional<material::Image> sketch;         // H x W x 1, values {0,1}
    std::optional<material::Image> render_image;   // H x W x 3
    std::array<bool, kNumConditions> drop_mask{false, false, false, false};

    bool has(int slot) const;
    static ConditionSet none(); // nothing present, everything dropped
};

// Extract all four conditions from a display-space render of a material.
ConditionSet conditions_from_render(const material::Image& render_display, int palette_k,
                                    double palette_threshold);

// Three-branch protocol: with probability 0.1 keep everything, 0.1 drop
// everything, otherwise drop each condition independently with probability
// 0.5. Absent conditions are always marked dropped.
ConditionSet drop_conditions(const ConditionSet& set, Rng& rng);

struct ConditionEncoderConfig {
    int d_tau = 64;          // global token width
    int palette_k = 5;
    int resolution = 32;     // material resolution the local heads expect
    int downsample = 8;      // must match the VQ latent grid
    int local_channels = 4;  // per local condition
    uint64_t seed = 0;
};

// Parallel per-condition heads. Globals become a fixed-length token
// sequence [embedding, k palette tokens] with learned nulls standing in for
// dropped or absent entries; locals are conv-encoded to the latent grid
// with dropped blocks forced to zero.
class ConditionEncoder {
public:
    ConditionEncoder() = default;
    explicit ConditionEncoder(const ConditionEncoderConfig& cfg);

    // [1 + palette_k, d_tau]
    nd::Tensor global_tokens(const ConditionSet& set) const;
    // [2 * local_channels, h, w]; sketch block first
    nd::Tensor local_channels(const ConditionSet& set) const;

    std::vector<nd::Param*> parameters();
    const ConditionEncoderConfig& config() const { return cfg_; }

private:
    struct LocalHead {
        std::vector<nd::Conv2dLayer> convs;
        std::vector<nd::GroupNormLayer> norms;
        nd::Tensor forward(const nd::Tensor& x) const;
        void collect(std::vector<nd::Param*>& out);
    };
    LocalHead make_local_head(const std::string& name, int in_ch, Rng& rng);

    ConditionEncoderConfig cfg_;
    nd::LinearLayer embed_l1_, embed_l2_; // embedding head
    nd::LinearLayer pal_l1_, pal_l2_;     // shared per-color palette head
    nd::Param null_embed_, null_palette_; // learned null tokens
    LocalHead sketch_head_, render_head_;
};

} // namespace svbrdf::cond
