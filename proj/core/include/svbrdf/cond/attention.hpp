#pragma once

#include "svbrdf/nd/nn.hpp"

namespace svbrdf::cond {

// Multi-head attention with residual output: out = tokens + softmax(Q K^T /
// sqrt(d_k)) V, Q from the tokens, K/V projected from the conditioning
// sequence. Head outputs are concatenated back to d_model; there is no
// output projection.
class AttentionBlock {
public:
    AttentionBlock() = default;
    AttentionBlock(const std::string& name, int d_model, int d_cond, int heads, Rng& rng);

    // tokens [n, d_model], cond [m, d_cond] -> [n, d_model]
    nd::Tensor forward(const nd::Tensor& tokens, const nd::Tensor& cond) const;

    // attention weights per head, [heads][n, m] (no gradient), for tests
    std::vector<nd::Tensor> weights(const nd::Tensor& tokens, const nd::Tensor& cond) const;

    void collect(std::vector<nd::Param*>& out);
    int heads() const { return heads_; }

    nd::Param wq, wk, wv; // [d_model, d_model], [d_model, d_cond], [d_model, d_cond]

private:
    int d_model_ = 0, heads_ = 1;
};

// Eq-style entry point used by the denoiser and tests.
nd::Tensor cross_attend(const AttentionBlock& block, const nd::Tensor& latent_tokens,
                        const nd::Tensor& cond_vecs);

} // namespace svbrdf::cond
