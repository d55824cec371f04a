#include "svbrdf/vq/codebook.hpp"

#include "svbrdf/nd/graph.hpp"
#include "svbrdf/nd/ops.hpp"

#include <cmath>
#include <stdexcept>

namespace svbrdf::vq {

using nd::Tensor;

Codebook::Codebook(const std::string& name, int entries, int dim, Rng& rng)
    : entries_(0), dim_(0) {
    if (entries < 2) throw std::invalid_argument("codebook needs at least 2 entries");
    entries_ = entries;
    dim_ = dim;
    Tensor init = nd::randn_tensor({entries, dim}, rng, 0.5);
    table = nd::Param{name + ".entries", Tensor::param(init.shape(), init.values())};
    usage.assign(entries, 0);
    staleness.assign(entries, 0);
}

std::vector<int> Codebook::nearest_indices(const Tensor& z_chw) const {
    if (z_chw.ndim() != 3 || z_chw.dim(0) != dim_) {
        throw std::invalid_argument("latent channel dim " + nd::shape_str(z_chw.shape()) +
                                    " does not match codebook dim " + std::to_string(dim_));
    }
    const int h = z_chw.dim(1), w = z_chw.dim(2);
    const size_t hw = static_cast<size_t>(h) * w;
    const double* z = z_chw.data();
    const double* e = table.t.data();
    std::vector<int> indices(hw);
    for (size_t p = 0; p < hw; ++p) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int k = 0; k < entries_; ++k) {
            double d = 0.0;
            for (int c = 0; c < dim_; ++c) {
                const double diff = z[c * hw + p] - e[static_cast<size_t>(k) * dim_ + c];
                d += diff * diff;
            }
            if (d < best_d) { // strict: equal distances keep the lower index
                best_d = d;
                best = k;
            }
        }
        indices[p] = best;
    }
    return indices;
}

Tensor Codebook::lookup_grid(const std::vector<int>& indices, int h, int w) const {
    const size_t hw = static_cast<size_t>(h) * w;
    if (indices.size() != hw) throw std::invalid_argument("index count does not match grid");
    std::vector<double> v(static_cast<size_t>(dim_) * hw);
    const double* e = table.t.data();
    for (size_t p = 0; p < hw; ++p) {
        const double* row = e + static_cast<size_t>(indices[p]) * dim_;
        for (int c = 0; c < dim_; ++c) v[c * hw + p] = row[c];
    }
    return Tensor::from_data({dim_, h, w}, std::move(v));
}

Codebook::QuantizeResult Codebook::quantize(const Tensor& z_chw) {
    const int h = z_chw.dim(1), w = z_chw.dim(2);
    const size_t hw = static_cast<size_t>(h) * w;
    QuantizeResult r;
    r.indices = nearest_indices(z_chw);
    r.counts.assign(entries_, 0);
    for (int idx : r.indices) r.counts[idx]++;
    for (int k = 0; k < entries_; ++k) usage[k] += r.counts[k];

    // straight-through: zq = z + sg(e[idx] - z)
    Tensor grid = lookup_grid(r.indices, h, w);
    std::vector<double> delta(grid.size());
    for (size_t i = 0; i < delta.size(); ++i) delta[i] = grid[i] - z_chw[i];
    r.zq = nd::add(z_chw, Tensor::from_data(grid.shape(), std::move(delta)));

    // losses on [hw, d] views; selection itself is treated as constant
    Tensor z_mat = nd::transpose2d(nd::reshape(z_chw, {dim_, static_cast<int>(hw)}));
    Tensor e_sel = nd::gather_rows(table.t, r.indices);
    r.l_q = nd::mean_sq_diff(z_mat.detach(), e_sel);
    r.l_c = nd::mean_sq_diff(z_mat, e_sel.detach());
    return r;
}

void Codebook::reseed_entry(int index, const std::vector<double>& vec) {
    if (index < 0 || index >= entries_ || static_cast<int>(vec.size()) != dim_) {
        throw std::invalid_argument("bad codebook reseed");
    }
    std::vector<double> v = table.t.values();
    std::copy(vec.begin(), vec.end(), v.begin() + static_cast<size_t>(index) * dim_);
    table.t = Tensor::param(table.t.shape(), std::move(v));
    staleness[index] = 0;
}

std::vector<int> codebook_layout(bool multi_encoder, int total_entries) {
    if (total_entries < 2 || (total_entries & (total_entries - 1)) != 0) {
        throw std::invalid_argument("codebook size must be a power of two, got " +
                                    std::to_string(total_entries));
    }
    if (!multi_encoder) return {total_entries};
    if (total_entries < 4) throw std::invalid_argument("multi-encoder mode needs at least 4 entries to split");
    return std::vector<int>(4, total_entries / 4);
}

} // namespace svbrdf::vq
