#pragma once

#include "svbrdf/nd/ops.hpp"
#include "svbrdf/rng.hpp"

#include <string>
#include <vector>

namespace svbrdf::nd {

// Named trainable tensor. Modules expose Param pointers; the optimizer
// replaces p->t with updated values (tensors themselves stay immutable).
struct Param {
    std::string name;
    Tensor t;
};

Tensor randn_tensor(Shape shape, Rng& rng, double stdev = 1.0);

class Conv2dLayer {
public:
    Conv2dLayer() = default;
    Conv2dLayer(const std::string& name, int in_ch, int out_ch, int ksize, int stride, int pad, Rng& rng);
    Tensor operator()(const Tensor& x) const { return conv2d(x, w.t, b.t, stride_, pad_); }
    void collect(std::vector<Param*>& out);
    Param w, b;

private:
    int stride_ = 1, pad_ = 0;
};

// y = x W^T + b for x [n,in] -> [n,out]
class LinearLayer {
public:
    LinearLayer() = default;
    LinearLayer(const std::string& name, int in_dim, int out_dim, Rng& rng);
    Tensor operator()(const Tensor& x) const;
    void collect(std::vector<Param*>& out);
    Param w, b;
};

class GroupNormLayer {
public:
    GroupNormLayer() = default;
    GroupNormLayer(const std::string& name, int channels, int groups = 4);
    Tensor operator()(const Tensor& x) const { return group_norm(x, groups_, gamma.t, beta.t); }
    void collect(std::vector<Param*>& out);
    Param gamma, beta;

private:
    int groups_ = 4;
};

// norm -> silu -> conv, twice, with a learned 1x1 skip when channels change.
// Optional per-block timestep embedding added after the first conv.
class ResBlock {
public:
    ResBlock() = default;
    ResBlock(const std::string& name, int in_ch, int out_ch, Rng& rng, int emb_dim = 0);
    Tensor forward(const Tensor& x) const;
    Tensor forward(const Tensor& x, const Tensor& emb) const; // emb [1,emb_dim]
    void collect(std::vector<Param*>& out);

private:
    GroupNormLayer n1_, n2_;
    Conv2dLayer c1_, c2_, skip_;
    LinearLayer emb_proj_;
    bool has_skip_ = false;
    bool has_emb_ = false;
    int out_ch_ = 0;
};

} // namespace svbrdf::nd
