#include "svbrdf/cond/attention.hpp"

#include "svbrdf/nd/ops.hpp"

#include <cmath>
#include <stdexcept>

namespace svbrdf::cond {

using nd::Tensor;

AttentionBlock::AttentionBlock(const std::string& name, int d_model, int d_cond, int heads, Rng& rng)
    : d_model_(d_model), heads_(heads) {
    if (heads < 1 || d_model % heads != 0) {
        throw std::invalid_argument("attention head count must divide d_model");
    }
    auto init = [&](const std::string& n, int rows, int cols) {
        Tensor t = nd::randn_tensor({rows, cols}, rng, 1.0 / std::sqrt(static_cast<double>(cols)));
        return nd::Param{n, Tensor::param(t.shape(), t.values())};
    };
    wq = init(name + ".wq", d_model, d_model);
    wk = init(name + ".wk", d_model, d_cond);
    wv = init(name + ".wv", d_model, d_cond);
}

namespace {

// contiguous column slice of a row-major matrix
Tensor slice_cols(const Tensor& m, int from, int to) {
    return nd::transpose2d(nd::slice0(nd::transpose2d(m), from, to));
}

} // namespace

Tensor AttentionBlock::forward(const Tensor& tokens, const Tensor& cond) const {
    if (tokens.ndim() != 2 || tokens.dim(1) != d_model_) {
        throw std::invalid_argument("attention tokens must be [n," + std::to_string(d_model_) + "], got " +
                                    nd::shape_str(tokens.shape()));
    }
    if (cond.ndim() != 2 || cond.dim(1) != wk.t.dim(1)) {
        throw std::invalid_argument("attention cond must be [m," + std::to_string(wk.t.dim(1)) + "], got " +
                                    nd::shape_str(cond.shape()));
    }
    Tensor q = nd::matmul(tokens, nd::transpose2d(wq.t)); // [n, d]
    Tensor k = nd::matmul(cond, nd::transpose2d(wk.t));   // [m, d]
    Tensor v = nd::matmul(cond, nd::transpose2d(wv.t));   // [m, d]

    const int dh = d_model_ / heads_;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<Tensor> head_out;
    for (int h = 0; h < heads_; ++h) {
        Tensor qh = slice_cols(q, h * dh, (h + 1) * dh);
        Tensor kh = slice_cols(k, h * dh, (h + 1) * dh);
        Tensor vh = slice_cols(v, h * dh, (h + 1) * dh);
        Tensor scores = nd::mul_scalar(nd::matmul(qh, nd::transpose2d(kh)), scale);
        Tensor attn = nd::softmax(scores, -1);
        head_out.push_back(nd::transpose2d(nd::matmul(attn, vh))); // [dh, n]
    }
    Tensor mixed = nd::transpose2d(nd::concat0(head_out)); // [n, d]
    return nd::add(tokens, mixed);
}

std::vector<Tensor> AttentionBlock::weights(const Tensor& tokens, const Tensor& cond) const {
    Tensor q = nd::matmul(tokens.detach(), nd::transpose2d(wq.t.detach()));
    Tensor k = nd::matmul(cond.detach(), nd::transpose2d(wk.t.detach()));
    const int dh = d_model_ / heads_;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<Tensor> out;
    for (int h = 0; h < heads_; ++h) {
        Tensor qh = slice_cols(q, h * dh, (h + 1) * dh);
        Tensor kh = slice_cols(k, h * dh, (h + 1) * dh);
        out.push_back(nd::softmax(nd::mul_scalar(nd::matmul(qh, nd::transpose2d(kh)), scale), -1));
    }
    return out;
}

void AttentionBlock::collect(std::vector<nd::Param*>& out) {
    out.push_back(&wq);
    out.push_back(&wk);
    out.push_back(&wv);
}

Tensor cross_attend(const AttentionBlock& block, const Tensor& latent_tokens, const Tensor& cond_vecs) {
    return block.forward(latent_tokens, cond_vecs);
}

} // namespace svbrdf::cond
