#pragma once

#include "svbrdf/nd/nn.hpp"

namespace svbrdf::vq {

// Discrete embedding table for one latent slice. Quantization snaps every
// spatial vector to its nearest entry (squared Euclidean, ties break to the
// lowest index); gradients reach the encoder through the straight-through
// estimator and reach the entries only through the quantization loss.
class Codebook {
public:
    Codebook() = default;
    Codebook(const std::string& name, int entries, int dim, Rng& rng);

    struct QuantizeResult {
        nd::Tensor zq;            // [d,h,w] straight-through latent
        std::vector<int> indices; // h*w row-major
        nd::Tensor l_q;           // || sg[z] - e ||^2, drives the entries
        nd::Tensor l_c;           // || z - sg[e] ||^2, drives the encoder
        std::vector<int> counts;  // per-entry assignments, sums to h*w
    };

    QuantizeResult quantize(const nd::Tensor& z_chw);

    // entry values laid out as a [d,h,w] grid (no gradient), for sampling
    nd::Tensor lookup_grid(const std::vector<int>& indices, int h, int w) const;

    // nearest-entry indices for a generated (graph-free) latent
    std::vector<int> nearest_indices(const nd::Tensor& z_chw) const;

    int entry_count() const { return entries_; }
    int dim() const { return dim_; }

    void collect(std::vector<nd::Param*>& out) { out.push_back(&table); }

    // collapse mitigation: overwrite one entry with a fresh vector
    void reseed_entry(int index, const std::vector<double>& vec);

    nd::Param table; // [V, d]
    std::vector<int64_t> usage;  // cumulative assignment counts
    std::vector<int> staleness;  // steps since last assignment (trainer-owned)

private:
    int entries_ = 0;
    int dim_ = 0;
};

// Codebook sizing for the two architecture modes: multi-encoder splits the
// total across the four maps, single-encoder keeps one table over the
// concatenated latent. total must be a power of two, and >= 4 when split.
std::vector<int> codebook_layout(bool multi_encoder, int total_entries);

} // namespace svbrdf::vq
