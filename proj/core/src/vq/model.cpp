#include "svbrdf/vq/model.hpp"

#include <cmath>
#include <stdexcept>

namespace svbrdf::vq {

using nd::Tensor;

void VqConfig::validate() const {
    if (!material::is_power_of_two(resolution)) throw std::invalid_argument("resolution must be a power of two");
    if (!material::is_power_of_two(downsample) || downsample < 2) {
        throw std::invalid_argument("downsample factor must be a power of two >= 2");
    }
    if (resolution % downsample != 0 || resolution / downsample < 2) {
        throw std::invalid_argument("resolution " + std::to_string(resolution) +
                                    " not divisible into latents by f=" + std::to_string(downsample));
    }
    if (latent_channels_per_map < 1) throw std::invalid_argument("latent channels per map must be >= 1");
    codebook_layout(multi_encoder, codebook_total);
}

namespace {
int stage_count(int downsample) {
    int m = 0;
    while ((1 << m) < downsample) ++m;
    return m;
}
int stage_width(int base, int stage) { return base << std::min(stage, 2); }
} // namespace

MapEncoder::MapEncoder(const std::string& name, int in_ch, int out_ch, int base_width, int stages, Rng& rng) {
    stem_ = nd::Conv2dLayer(name + ".stem", in_ch, base_width, 3, 1, 1, rng);
    int ch = base_width;
    for (int s = 0; s < stages; ++s) {
        const int next = stage_width(base_width, s + 1);
        downs_.emplace_back(name + ".down" + std::to_string(s), ch, next, 3, 2, 1, rng);
        blocks_.emplace_back(name + ".res" + std::to_string(s), next, next, rng);
        ch = next;
    }
    out_norm_ = nd::GroupNormLayer(name + ".on", ch);
    out_conv_ = nd::Conv2dLayer(name + ".out", ch, out_ch, 1, 1, 0, rng);
}

Tensor MapEncoder::forward(const Tensor& x_chw) const {
    Tensor h = stem_(x_chw);
    for (size_t s = 0; s < downs_.size(); ++s) {
        h = downs_[s](h);
        h = blocks_[s].forward(h);
    }
    return out_conv_(nd::silu(out_norm_(h)));
}

void MapEncoder::collect(std::vector<nd::Param*>& out) {
    stem_.collect(out);
    for (size_t s = 0; s < downs_.size(); ++s) {
        downs_[s].collect(out);
        blocks_[s].collect(out);
    }
    out_norm_.collect(out);
    out_conv_.collect(out);
}

MapDecoder::MapDecoder(const std::string& name, int in_ch, int out_ch, int top_width, int stages, Rng& rng) {
    const int top = stage_width(top_width, 2); // widest at the latent end
    in_conv_ = nd::Conv2dLayer(name + ".in", in_ch, top, 3, 1, 1, rng);
    in_block_ = nd::ResBlock(name + ".inres", top, top, rng);
    int ch = top;
    for (int s = 0; s < stages; ++s) {
        const int next = stage_width(top_width, std::max(0, stages - 2 - s));
        ups_.emplace_back(name + ".up" + std::to_string(s), ch, next, 3, 1, 1, rng);
        blocks_.emplace_back(name + ".res" + std::to_string(s), next, next, rng);
        ch = next;
    }
    out_norm_ = nd::GroupNormLayer(name + ".on", ch);
    out_conv_ = nd::Conv2dLayer(name + ".out", ch, out_ch, 3, 1, 1, rng);
}

Tensor MapDecoder::forward(const Tensor& z_chw) const {
    Tensor h = in_block_.forward(in_conv_(z_chw));
    for (size_t s = 0; s < ups_.size(); ++s) {
        h = ups_[s](nd::upsample_nearest2(h));
        h = blocks_[s].forward(h);
    }
    return nd::sigmoid(out_conv_(nd::silu(out_norm_(h))));
}

void MapDecoder::collect(std::vector<nd::Param*>& out) {
    in_conv_.collect(out);
    in_block_.collect(out);
    for (size_t s = 0; s < ups_.size(); ++s) {
        ups_[s].collect(out);
        blocks_[s].collect(out);
    }
    out_norm_.collect(out);
    out_conv_.collect(out);
}

VqModel::VqModel(const VqConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(derive_seed(cfg.seed, "vq_model"));
    const int stages = stage_count(cfg.downsample);
    const int c = cfg.latent_channels();
    const std::vector<int> layout = codebook_layout(cfg.multi_encoder, cfg.codebook_total);

    if (cfg.multi_encoder) {
        for (int i = 0; i < material::kNumMaps; ++i) {
            encoders_.emplace_back(std::string("enc.") + material::kMapNames[i], 3,
                                   cfg.latent_channels_per_map, cfg.encoder_width, stages, rng);
            books_.emplace_back(std::string("book.") + material::kMapNames[i], layout[i],
                                cfg.latent_channels_per_map, rng);
        }
    } else {
        encoders_.emplace_back("enc.joint", 3 * material::kNumMaps, c, cfg.single_encoder_width, stages, rng);
        books_.emplace_back("book.joint", layout[0], c, rng);
    }
    decoder_ = MapDecoder("dec", c, 3 * material::kNumMaps, cfg.decoder_width, stages, rng);
}

std::vector<Tensor> VqModel::encode(const render::MapTensors& maps) const {
    std::vector<Tensor> chw;
    chw.push_back(nd::hwc_to_chw(maps.diffuse));
    chw.push_back(nd::hwc_to_chw(maps.normal));
    chw.push_back(nd::hwc_to_chw(maps.roughness));
    chw.push_back(nd::hwc_to_chw(maps.specular));
    if (chw[0].dim(1) % cfg_.downsample != 0) {
        throw std::invalid_argument("map resolution " + std::to_string(chw[0].dim(1)) +
                                    " not divisible by downsample factor " + std::to_string(cfg_.downsample));
    }
    std::vector<Tensor> out;
    if (cfg_.multi_encoder) {
        for (int i = 0; i < material::kNumMaps; ++i) out.push_back(encoders_[i].forward(chw[i]));
    } else {
        out.push_back(encoders_[0].forward(nd::concat0(chw)));
    }
    return out;
}

VqModel::QuantizedLatent VqModel::encode_quantize(const render::MapTensors& maps) {
    std::vector<Tensor> latents = encode(maps);
    QuantizedLatent q;
    std::vector<Tensor> quantized;
    for (size_t i = 0; i < latents.size(); ++i) {
        auto r = books_[i].quantize(latents[i]);
        quantized.push_back(r.zq);
        q.indices.push_back(std::move(r.indices));
        q.counts.push_back(std::move(r.counts));
        q.l_q = q.l_q.defined() ? nd::add(q.l_q, r.l_q) : r.l_q;
        q.l_c = q.l_c.defined() ? nd::add(q.l_c, r.l_c) : r.l_c;
    }
    q.z = quantized.size() == 1 ? quantized[0] : nd::concat0(quantized);
    q.z_pre = latents.size() == 1 ? latents[0] : nd::concat0(latents);
    return q;
}

render::MapTensors VqModel::decode(const Tensor& z_chw) const {
    if (z_chw.ndim() != 3 || z_chw.dim(0) != cfg_.latent_channels()) {
        throw std::invalid_argument("latent must have " + std::to_string(cfg_.latent_channels()) +
                                    " channels, got " + nd::shape_str(z_chw.shape()));
    }
    Tensor out = decoder_.forward(z_chw);
    render::MapTensors maps;
    maps.diffuse = nd::chw_to_hwc(nd::slice0(out, 0, 3));
    maps.normal = nd::chw_to_hwc(nd::slice0(out, 3, 6));
    maps.roughness = nd::chw_to_hwc(nd::slice0(out, 6, 9));
    maps.specular = nd::chw_to_hwc(nd::slice0(out, 9, 12));
    return maps;
}

Tensor VqModel::quantize_generated(const Tensor& z_chw) const {
    const int h = z_chw.dim(1), w = z_chw.dim(2);
    std::vector<Tensor> parts;
    if (cfg_.multi_encoder) {
        const int ci = cfg_.latent_channels_per_map;
        for (int i = 0; i < material::kNumMaps; ++i) {
            Tensor slice = nd::slice0(z_chw, i * ci, (i + 1) * ci).detach();
            parts.push_back(books_[i].lookup_grid(books_[i].nearest_indices(slice), h, w));
        }
        return nd::concat0(parts);
    }
    Tensor z = z_chw.detach();
    return books_[0].lookup_grid(books_[0].nearest_indices(z), h, w);
}

std::vector<nd::Param*> VqModel::parameters() {
    std::vector<nd::Param*> out;
    for (auto& e : encoders_) e.collect(out);
    for (auto& b : books_) b.collect(out);
    decoder_.collect(out);
    return out;
}

} // namespace svbrdf::vq
