#include "svbrdf/cond/encoder.hpp"

#include "svbrdf/nd/ops.hpp"

#include <stdexcept>

namespace svbrdf::cond {

using nd::Tensor;

bool ConditionSet::has(int slot) const {
    switch (slot) {
        case kEmbedding: return embedding.has_value();
        case kPalette: return palette.has_value();
        case kSketch: return sketch.has_value();
        case kRender: return render_image.has_value();
        default: return false;
    }
}

ConditionSet ConditionSet::none() {
    ConditionSet s;
    s.drop_mask = {true, true, true, true};
    return s;
}

ConditionSet conditions_from_render(const material::Image& render_display, int palette_k,
                                    double palette_threshold) {
    ConditionSet s;
    s.embedding = image_embedding(render_display);
    s.palette = extract_palette(render_display, palette_k, palette_threshold);
    s.sketch = extract_sketch(render_display);
    s.render_image = render_display;
    s.drop_mask = {false, false, false, false};
    return s;
}

ConditionSet drop_conditions(const ConditionSet& set, Rng& rng) {
    ConditionSet out = set;
    const double u = rng.uniform();
    if (u < 0.1) {
        out.drop_mask = {false, false, false, false};
    } else if (u < 0.2) {
        out.drop_mask = {true, true, true, true};
    } else {
        for (int i = 0; i < kNumConditions; ++i) out.drop_mask[i] = rng.uniform() < 0.5;
    }
    for (int i = 0; i < kNumConditions; ++i) {
        if (!out.has(i)) out.drop_mask[i] = true;
    }
    return out;
}

Tensor ConditionEncoder::LocalHead::forward(const Tensor& x) const {
    Tensor h = x;
    for (size_t i = 0; i < convs.size(); ++i) {
        h = convs[i](h);
        if (i + 1 < convs.size()) h = nd::silu(norms[i](h));
    }
    return h;
}

void ConditionEncoder::LocalHead::collect(std::vector<nd::Param*>& out) {
    for (auto& c : convs) c.collect(out);
    for (auto& n : norms) n.collect(out);
}

ConditionEncoder::LocalHead ConditionEncoder::make_local_head(const std::string& name, int in_ch, Rng& rng) {
    LocalHead head;
    int stages = 0;
    while ((1 << stages) < cfg_.downsample) ++stages;
    int ch = in_ch;
    for (int s = 0; s < stages; ++s) {
        const bool last = s + 1 == stages;
        const int next = last ? cfg_.local_channels : 8 << std::min(s, 1);
        head.convs.emplace_back(name + ".c" + std::to_string(s), ch, next, 3, 2, 1, rng);
        if (!last) head.norms.emplace_back(name + ".n" + std::to_string(s), next);
        ch = next;
    }
    return head;
}

ConditionEncoder::ConditionEncoder(const ConditionEncoderConfig& cfg) : cfg_(cfg) {
    Rng rng(derive_seed(cfg.seed, "cond_encoder"));
    embed_l1_ = nd::LinearLayer("cond.embed.l1", kEmbeddingDim, cfg.d_tau, rng);
    embed_l2_ = nd::LinearLayer("cond.embed.l2", cfg.d_tau, cfg.d_tau, rng);
    pal_l1_ = nd::LinearLayer("cond.pal.l1", 4, 32, rng);
    pal_l2_ = nd::LinearLayer("cond.pal.l2", 32, cfg.d_tau, rng);
    Tensor ne = nd::randn_tensor({1, cfg.d_tau}, rng, 0.3);
    null_embed_ = nd::Param{"cond.null_embed", Tensor::param(ne.shape(), ne.values())};
    Tensor np = nd::randn_tensor({1, cfg.d_tau}, rng, 0.3);
    null_palette_ = nd::Param{"cond.null_palette", Tensor::param(np.shape(), np.values())};
    sketch_head_ = make_local_head("cond.sketch", 1, rng);
    render_head_ = make_local_head("cond.render", 3, rng);
}

Tensor ConditionEncoder::global_tokens(const ConditionSet& set) const {
    std::vector<Tensor> tokens;
    if (!set.drop_mask[kEmbedding] && set.embedding) {
        if (static_cast<int>(set.embedding->size()) != kEmbeddingDim) {
            throw std::invalid_argument("embedding must have dimension " + std::to_string(kEmbeddingDim));
        }
        Tensor e = Tensor::from_data({1, kEmbeddingDim}, *set.embedding);
        tokens.push_back(embed_l2_(nd::silu(embed_l1_(e))));
    } else {
        tokens.push_back(null_embed_.t);
    }
    const Palette* pal = (!set.drop_mask[kPalette] && set.palette) ? &*set.palette : nullptr;
    for (int i = 0; i < cfg_.palette_k; ++i) {
        if (pal && i < static_cast<int>(pal->size())) {
            const PaletteColor& c = (*pal)[i];
            // Lab scaled to O(1)
            Tensor v = Tensor::from_data({1, 4}, {c.L / 100.0, c.a / 100.0, c.b / 100.0, c.weight});
            tokens.push_back(pal_l2_(nd::silu(pal_l1_(v))));
        } else {
            tokens.push_back(null_palette_.t);
        }
    }
    return nd::concat0(tokens);
}

Tensor ConditionEncoder::local_channels(const ConditionSet& set) const {
    const int h = cfg_.resolution / cfg_.downsample;
    auto zero_block = [&] { return Tensor::zeros({cfg_.local_channels, h, h}); };
    auto to_chw = [](const material::Image& img) {
        std::vector<double> v(img.size());
        const int hh = img.height, ww = img.width, cc = img.channels;
        for (int c = 0; c < cc; ++c)
            for (int y = 0; y < hh; ++y)
                for (int x = 0; x < ww; ++x)
                    v[(static_cast<size_t>(c) * hh + y) * ww + x] = img.at(y, x, c);
        return Tensor::from_data({cc, hh, ww}, std::move(v));
    };

    Tensor sketch_block, render_block;
    if (!set.drop_mask[kSketch] && set.sketch) {
        if (set.sketch->height != cfg_.resolution || set.sketch->channels != 1) {
            throw std::invalid_argument("sketch must be " + std::to_string(cfg_.resolution) + "^2 single-channel");
        }
        sketch_block = sketch_head_.forward(to_chw(*set.sketch));
    } else {
        sketch_block = zero_block();
    }
    if (!set.drop_mask[kRender] && set.render_image) {
        if (set.render_image->height != cfg_.resolution || set.render_image->channels != 3) {
            throw std::invalid_argument("render condition must be " + std::to_string(cfg_.resolution) + "^2 RGB");
        }
        render_block = render_head_.forward(to_chw(*set.render_image));
    } else {
        render_block = zero_block();
    }
    return nd::concat0({sketch_block, render_block});
}

std::vector<nd::Param*> ConditionEncoder::parameters() {
    std::vector<nd::Param*> out;
    embed_l1_.collect(out);
    embed_l2_.collect(out);
    pal_l1_.collect(out);
    pal_l2_.collect(out);
    out.push_back(&null_embed_);
    out.push_back(&null_palette_);
    sketch_head_.collect(out);
    render_head_.collect(out);
    return out;
}

} // namespace svbrdf::cond
