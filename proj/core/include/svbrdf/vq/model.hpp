#pragma once

#include "svbrdf/render/renderer.hpp"
#include "svbrdf/vq/codebook.hpp"

namespace svbrdf::vq {

struct VqConfig {
    int resolution = 32;
    int downsample = 8; // f = 2^m
    bool multi_encoder = true;
    int codebook_total = 256;        // 64 per map when split
    int latent_channels_per_map = 4; // c^i
    int encoder_width = 8;           // per-map encoder stem width (stages w, 2w, 4w)
    int single_encoder_width = 16;   // stem width when maps are concatenated
    int decoder_width = 16;          // decoder top width (stages 4w, 2w, w)
    double beta_commit = 0.25;
    int dead_entry_steps = 200;
    uint64_t seed = 0;

    int latent_channels() const { return material::kNumMaps * latent_channels_per_map; }
    int latent_resolution() const { return resolution / downsample; }
    void validate() const;
};

// Strided conv encoder, downsampling by 2^stages.
class MapEncoder {
public:
    MapEncoder() = default;
    MapEncoder(const std::string& name, int in_ch, int out_ch, int base_width, int stages, Rng& rng);
    nd::Tensor forward(const nd::Tensor& x_chw) const;
    void collect(std::vector<nd::Param*>& out);

private:
    nd::Conv2dLayer stem_;
    std::vector<nd::Conv2dLayer> downs_;
    std::vector<nd::ResBlock> blocks_;
    nd::GroupNormLayer out_norm_;
    nd::Conv2dLayer out_conv_;
};

// Mirror decoder: nearest x2 upsampling followed by conv at each stage,
// sigmoid-squashed 12-channel output.
class MapDecoder {
public:
    MapDecoder() = default;
    MapDecoder(const std::string& name, int in_ch, int out_ch, int top_width, int stages, Rng& rng);
    nd::Tensor forward(const nd::Tensor& z_chw) const;
    void collect(std::vector<nd::Param*>& out);

private:
    nd::Conv2dLayer in_conv_;
    nd::ResBlock in_block_;
    std::vector<nd::Conv2dLayer> ups_;
    std::vector<nd::ResBlock> blocks_;
    nd::GroupNormLayer out_norm_;
    nd::Conv2dLayer out_conv_;
};

// Multi-encoder VQ autoencoder over the four maps (or the single-encoder
// baseline over their channel concatenation). Latent layout is fixed:
// channels [0,c^i) diffuse, then normal, roughness, specular.
class VqModel {
public:
    explicit VqModel(const VqConfig& cfg);

    // per-map (multi) or single-element (single) pre-quantization latents
    std::vector<nd::Tensor> encode(const render::MapTensors& maps) const;

    struct QuantizedLatent {
        nd::Tensor z;                           // [c,h,w] straight-through latent
        nd::Tensor z_pre;                       // [c,h,w] pre-quantization latent
        std::vector<std::vector<int>> indices;  // per codebook
        nd::Tensor l_q, l_c;                    // summed over codebooks
        std::vector<std::vector<int>> counts;
    };
    QuantizedLatent encode_quantize(const render::MapTensors& maps);

    render::MapTensors decode(const nd::Tensor& z_chw) const;

    // snap a generated latent onto the codebooks (per-map channel slices)
    nd::Tensor quantize_generated(const nd::Tensor& z_chw) const;

    std::vector<nd::Param*> parameters();

    const VqConfig& config() const { return cfg_; }
    std::vector<Codebook>& codebooks() { return books_; }
    const std::vector<Codebook>& codebooks() const { return books_; }

private:
    VqConfig cfg_;
    std::vector<MapEncoder> encoders_; // 4 or 1
    std::vector<Codebook> books_;      // 4 or 1
    MapDecoder decoder_;
};

} // namespace svbrdf::vq
