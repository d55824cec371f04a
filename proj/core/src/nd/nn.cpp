#include "svbrdf/nd/nn.hpp"

#include <cmath>

namespace svbrdf::nd {

Tensor randn_tensor(Shape shape, Rng& rng, double stdev) {
    size_t n = numel(shape);
    std::vector<double> v(n);
    for (size_t i = 0; i < n; ++i) v[i] = rng.normal() * stdev;
    return Tensor::from_data(std::move(shape), std::move(v));
}

Conv2dLayer::Conv2dLayer(const std::string& name, int in_ch, int out_ch, int ksize, int stride, int pad, Rng& rng)
    : stride_(stride), pad_(pad) {
    const double stdev = std::sqrt(2.0 / (static_cast<double>(in_ch) * ksize * ksize));
    Tensor wv = randn_tensor({out_ch, in_ch, ksize, ksize}, rng, stdev);
    w = Param{name + ".w", Tensor::param(wv.shape(), wv.values())};
    b = Param{name + ".b", Tensor::param({out_ch}, std::vector<double>(out_ch, 0.0))};
}

void Conv2dLayer::collect(std::vector<Param*>& out) {
    out.push_back(&w);
    out.push_back(&b);
}

LinearLayer::LinearLayer(const std::string& name, int in_dim, int out_dim, Rng& rng) {
    const double stdev = std::sqrt(2.0 / static_cast<double>(in_dim));
    Tensor wv = randn_tensor({out_dim, in_dim}, rng, stdev);
    w = Param{name + ".w", Tensor::param(wv.shape(), wv.values())};
    b = Param{name + ".b", Tensor::param({1, out_dim}, std::vector<double>(out_dim, 0.0))};
}

Tensor LinearLayer::operator()(const Tensor& x) const {
    return add(matmul(x, transpose2d(w.t)), b.t);
}

void LinearLayer::collect(std::vector<Param*>& out) {
    out.push_back(&w);
    out.push_back(&b);
}

GroupNormLayer::GroupNormLayer(const std::string& name, int channels, int groups) : groups_(groups) {
    gamma = Param{name + ".g", Tensor::param({channels}, std::vector<double>(channels, 1.0))};
    beta = Param{name + ".b", Tensor::param({channels}, std::vector<double>(channels, 0.0))};
}

void GroupNormLayer::collect(std::vector<Param*>& out) {
    out.push_back(&gamma);
    out.push_back(&beta);
}

ResBlock::ResBlock(const std::string& name, int in_ch, int out_ch, Rng& rng, int emb_dim)
    : n1_(name + ".n1", in_ch),
      n2_(name + ".n2", out_ch),
      c1_(name + ".c1", in_ch, out_ch, 3, 1, 1, rng),
      c2_(name + ".c2", out_ch, out_ch, 3, 1, 1, rng),
      out_ch_(out_ch) {
    if (in_ch != out_ch) {
        skip_ = Conv2dLayer(name + ".skip", in_ch, out_ch, 1, 1, 0, rng);
        has_skip_ = true;
    }
    if (emb_dim > 0) {
        emb_proj_ = LinearLayer(name + ".emb", emb_dim, out_ch, rng);
        has_emb_ = true;
    }
}

Tensor ResBlock::forward(const Tensor& x) const {
    Tensor h = c1_(silu(n1_(x)));
    h = c2_(silu(n2_(h)));
    Tensor s = has_skip_ ? skip_(x) : x;
    return add(s, h);
}

Tensor ResBlock::forward(const Tensor& x, const Tensor& emb) const {
    Tensor h = c1_(silu(n1_(x)));
    if (has_emb_) {
        Tensor e = emb_proj_(silu(emb));          // [1,out_ch]
        h = add(h, reshape(e, {out_ch_, 1, 1}));  // broadcast over H,W
    }
    h = c2_(silu(n2_(h)));
    Tensor s = has_skip_ ? skip_(x) : x;
    return add(s, h);
}

void ResBlock::collect(std::vector<Param*>& out) {
    n1_.collect(out);
    c1_.collect(out);
    if (has_emb_) emb_proj_.collect(out);
    n2_.collect(out);
    c2_.collect(out);
    if (has_skip_) skip_.collect(out);
}

} // namespace svbrdf::nd
