#include "svbrdf/nd/ops.hpp"

#include "svbrdf/nd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svbrdf::nd {

namespace {

using Storage = std::shared_ptr<const std::vector<double>>;

// ---------------------------------------------------------------------------
// GEMM kernels, row-major, accumulate into C. Fixed summation order keeps
// results bitwise reproducible.
// ---------------------------------------------------------------------------

// C[M,N] += A[M,K] * B[K,N]
void gemm_nn(int M, int N, int K, const double* A, const double* B, double* C) {
    for (int m = 0; m < M; ++m) {
        double* c = C + static_cast<size_t>(m) * N;
        const double* a = A + static_cast<size_t>(m) * K;
        for (int k = 0; k < K; ++k) {
            const double av = a[k];
            const double* b = B + static_cast<size_t>(k) * N;
            for (int n = 0; n < N; ++n) c[n] += av * b[n];
        }
    }
}

// C[M,N] += A[M,K] * B[N,K]^T
void gemm_nt(int M, int N, int K, const double* A, const double* B, double* C) {
    for (int m = 0; m < M; ++m) {
        const double* a = A + static_cast<size_t>(m) * K;
        double* c = C + static_cast<size_t>(m) * N;
        for (int n = 0; n < N; ++n) {
            const double* b = B + static_cast<size_t>(n) * K;
            double acc = 0.0;
            for (int k = 0; k < K; ++k) acc += a[k] * b[k];
            c[n] += acc;
        }
    }
}

// C[M,N] += A[K,M]^T * B[K,N]
void gemm_tn(int M, int N, int K, const double* A, const double* B, double* C) {
    for (int k = 0; k < K; ++k) {
        const double* a = A + static_cast<size_t>(k) * M;
        const double* b = B + static_cast<size_t>(k) * N;
        for (int m = 0; m < M; ++m) {
            const double av = a[m];
            double* c = C + static_cast<size_t>(m) * N;
            for (int n = 0; n < N; ++n) c[n] += av * b[n];
        }
    }
}

// ---------------------------------------------------------------------------
// Broadcast machinery
// ---------------------------------------------------------------------------

// stride of `in` along each dim of `out` (0 where broadcast)
std::vector<size_t> aligned_strides(const Shape& in, const Shape& out) {
    std::vector<size_t> st(out.size(), 0);
    size_t stride = 1;
    for (size_t i = 0; i < in.size(); ++i) {
        size_t oi = out.size() - 1 - i;
        int d = in[in.size() - 1 - i];
        st[oi] = (d == 1) ? 0 : stride;
        stride *= static_cast<size_t>(d);
    }
    return st;
}

template <class F>
void broadcast_walk(const Shape& out, const std::vector<size_t>& sa, const std::vector<size_t>& sb, F&& body) {
    const int nd = static_cast<int>(out.size());
    const size_t n = numel(out);
    if (nd == 0) { body(0, 0, 0); return; }
    std::vector<int> idx(nd, 0);
    size_t ia = 0, ib = 0;
    for (size_t i = 0; i < n; ++i) {
        body(i, ia, ib);
        for (int d = nd - 1; d >= 0; --d) {
            ++idx[d];
            ia += sa[d];
            ib += sb[d];
            if (idx[d] < out[d]) break;
            ia -= static_cast<size_t>(out[d]) * sa[d];
            ib -= static_cast<size_t>(out[d]) * sb[d];
            idx[d] = 0;
        }
    }
}

template <class F, class DA, class DB>
Tensor binary_op(const Tensor& a, const Tensor& b, F f, DA da, DB db) {
    Shape out_shape = broadcast_shape(a.shape(), b.shape());
    const size_t n = numel(out_shape);
    std::vector<double> out(n);

    const bool same = a.shape() == b.shape();
    if (same) {
        const double* pa = a.data();
        const double* pb = b.data();
        for (size_t i = 0; i < n; ++i) out[i] = f(pa[i], pb[i]);
    } else {
        auto sa = aligned_strides(a.shape(), out_shape);
        auto sb = aligned_strides(b.shape(), out_shape);
        const double* pa = a.data();
        const double* pb = b.data();
        broadcast_walk(out_shape, sa, sb, [&](size_t i, size_t ia, size_t ib) {
            out[i] = f(pa[ia], pb[ib]);
        });
    }

    Storage as = a.storage(), bs = b.storage();
    Shape ash = a.shape(), bsh = b.shape(), osh = out_shape;
    auto backward = [=](const std::vector<double>& g, const std::vector<NodePtr>& parents) {
        Node* na = parents[0].get();
        Node* nb = parents[1].get();
        const double* pa = as->data();
        const double* pb = bs->data();
        if (same) {
            if (na) {
                std::vector<double> ga(g.size());
                for (size_t i = 0; i < g.size(); ++i) ga[i] = da(pa[i], pb[i]) * g[i];
                na->accumulate(ga.data(), ga.size());
            }
            if (nb) {
                std::vector<double> gb(g.size());
                for (size_t i = 0; i < g.size(); ++i) gb[i] = db(pa[i], pb[i]) * g[i];
                nb->accumulate(gb.data(), gb.size());
            }
        } else {
            auto sa = aligned_strides(ash, osh);
            auto sb = aligned_strides(bsh, osh);
            std::vector<double> ga(na ? numel(ash) : 0, 0.0);
            std::vector<double> gb(nb ? numel(bsh) : 0, 0.0);
            broadcast_walk(osh, sa, sb, [&](size_t i, size_t ia, size_t ib) {
                if (na) ga[ia] += da(pa[ia], pb[ib]) * g[i];
                if (nb) gb[ib] += db(pa[ia], pb[ib]) * g[i];
            });
            if (na) na->accumulate(ga.data(), ga.size());
            if (nb) nb->accumulate(gb.data(), gb.size());
        }
    };
    return Tensor::make_op(std::move(out_shape), std::move(out), {&a, &b}, backward);
}

// y = f(x); dfdx receives (x, y)
template <class F, class DF>
Tensor unary_op(const Tensor& a, F f, DF dfdx) {
    const size_t n = a.size();
    std::vector<double> out(n);
    const double* pa = a.data();
    for (size_t i = 0; i < n; ++i) out[i] = f(pa[i]);

    Storage as = a.storage();
    auto ys = std::make_shared<const std::vector<double>>(std::move(out));
    auto backward = [=](const std::vector<double>& g, const std::vector<NodePtr>& parents) {
        Node* na = parents[0].get();
        if (!na) return;
        const double* x = as->data();
        const double* y = ys->data();
        std::vector<double> ga(g.size());
        for (size_t i = 0; i < g.size(); ++i) ga[i] = dfdx(x[i], y[i]) * g[i];
        na->accumulate(ga.data(), ga.size());
    };
    return Tensor::make_op(a.shape(), ys, {&a}, backward);
}

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

// ---------------------------------------------------------------------------
// Elementwise
// ---------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_op(a, b,
        [](double x, double y) { return x + y; },
        [](double, double) { return 1.0; },
        [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_op(a, b,
        [](double x, double y) { return x - y; },
        [](double, double) { return 1.0; },
        [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_op(a, b,
        [](double x, double y) { return x * y; },
        [](double, double y) { return y; },
        [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
    return binary_op(a, b,
        [](double x, double y) { return x / y; },
        [](double, double y) { return 1.0 / y; },
        [](double x, double y) { return -x / (y * y); });
}

Tensor add_scalar(const Tensor& a, double s) {
    return unary_op(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Tensor mul_scalar(const Tensor& a, double s) {
    return unary_op(a, [s](double x) { return x * s; }, [s](double, double) { return s; });
}

Tensor neg(const Tensor& a) { return mul_scalar(a, -1.0); }

Tensor log_op(const Tensor& a) {
    return unary_op(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor exp_op(const Tensor& a) {
    return unary_op(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor pow_scalar(const Tensor& a, double p) {
    return unary_op(a,
        [p](double x) { return std::pow(x, p); },
        [p](double x, double) { return p * std::pow(x, p - 1.0); });
}

Tensor sqrt_op(const Tensor& a) {
    return unary_op(a,
        [](double x) { return std::sqrt(x); },
        [](double, double y) { return 0.5 / y; });
}

Tensor sigmoid(const Tensor& a) {
    return unary_op(a,
        [](double x) { return stable_sigmoid(x); },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor silu(const Tensor& a) {
    return unary_op(a,
        [](double x) { return x * stable_sigmoid(x); },
        [](double x, double) {
            double s = stable_sigmoid(x);
            return s * (1.0 + x * (1.0 - s));
        });
}

Tensor relu(const Tensor& a) {
    return unary_op(a,
        [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor abs_op(const Tensor& a) {
    return unary_op(a,
        [](double x) { return std::fabs(x); },
        [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor square(const Tensor& a) {
    return unary_op(a,
        [](double x) { return x * x; },
        [](double x, double) { return 2.0 * x; });
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

Tensor sum_all(const Tensor& a) {
    double s = 0.0;
    const double* p = a.data();
    for (size_t i = 0; i < a.size(); ++i) s += p[i];
    size_t n = a.size();
    auto backward = [n](const std::vector<double>& g, const std::vector<NodePtr>& parents) {
        Node* na = parents[0].get();
        if (!na) return;
        std::vector<double> ga(n, g[0]);
        na->accumulate(ga.data(), n);
    };
    return Tensor::make_op({1}, {s}, {&a}, backward);
}

Tensor mean_all(const Tensor& a) {
    return mul_scalar(sum_all(a), 1.0 / static_cast<double>(a.size()));
}

static Tensor reduce_last(const Tensor& a, bool mean) {
    if (a.ndim() < 1) throw std::invalid_argument("reduce_last requires ndim >= 1");
    Shape out_shape = a.shape();
    const int d = out_shape.back();
    out_shape.back() = 1;
    const size_t rows = numel(out_shape);
    const double scale = mean ? 1.0 / d : 1.0;
    std::vector<double> out(rows, 0.0);
    const double* p = a.data();
    for (size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (int j = 0; j < d; ++j) s += p[r * d + j];
        out[r] = s * scale;
    }
    auto backward = [rows, d, scale](const std::vector<double>& g, const std::vector<NodePtr>& parents) {
        Node* na = parents[0].get();
        if (!na) return;
        std::vector<double> ga(rows * static_cast<size_t>(d));
        for (size_t r = 0; r < rows; ++r)
            for (int j = 0; j < d; ++j) ga[r * d + j] = g[r] * scale;
        na->accumulate(ga.data(), ga.size());
    };
    return Tensor::make_op(std::move(out_shape), std::move(out), {&a}, backward);
}

Tensor sum_last_keepdim(const Tensor& a) { return reduce_last(a, false); }
Tensor mean_last_keepdim(const Tensor& a) { return reduce_last(a, true); }

// ---------------------------------------------------------------------------
// Matrix ops
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 2 || b.ndim() != 2) {
        throw std::invalid_argument("matmul requires 2-D tensors, got " +
                                    shape_str(a.shape()) + " and " + shape_str(b.shape()));
    }
    const int m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
    if (k != k2) {
        throw std::invalid_argument("matmul inner dimensions differ: " +
                                    shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
    std::vector<double> out(static_cast<size_t>(m) * n, 0.0);
    gemm_nn(m, n, k, a.data(), b.data(), out.data());

    Storage as = a.storage(), bs = b.storage();
    auto backward = [=](const std::vector<double>& g, const std::vector<NodePtr>& parents) {
        Node* na = parents[0].get();
        Node* nb = parents[1].get();
        if (na) { // dA = G * B^T
            std::vector<double> ga(static_cast<size_t>(m) * k, 0.0);
            gemm_nt(m, k, n, g.data(), bs->data(), ga.data());
            na->accumulate(ga.data(), ga.size());
        }
        if (nb) { // dB = A^T * G
            std::vector<double> gb(static_cast<size_t>(k) * n, 0.0);
            gemm_tn(k, n, m, as->data(), g.data(), gb.data());
            nb->accumulate(gb.data(), gb.size());
        }
    };
    return Tensor::make_op({m, n}, std::move(out), {&a, &b}, backward);
}

Tensor transpose2d(const Tensor& a) {
    if (a.ndim() != 2) throw std::invalid_argument("transpose2d requires a 2-D tensor");
    const int m = a.dim(0), n = a.dim(1);
    std::vector<double> out(a.size());
    const double* p = a.data();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out[static_cast<size_t>(j) * m + i] = p[static_cast<size_t>(i) * n + j];
    auto backward = [=](const std::vector<double>& g, const std::vector<NodePtr>& parents) {
        Node* na = parents[0].get();
        if (!na) return;
        std::vector<double> ga(g.size());
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < m; ++i) ga[static_cast<size_t>(i) * n + j] = g[static_cast<size_t>(j) * m + i];
        na->accumulate(ga.data(), ga.size());
    };
    return Tensor::make_op({n, m}, std::move(out), {&a}, backward);
}

// ---------------------------------------------------------------------------
// Convolution
// ---------------------------------------------------------------------------

namespace {

struct ConvDims {
    int n, c, h, w, o, kh, kw, oh, ow;
    bool batched;
};

ConvDims conv_dims(const Tensor& input, const Tensor& kernel, int stride, int pad) {
    if (kernel.ndim() != 4) throw std::invalid_argument("conv2d kernel must be [O,C,kh,kw]");
    if (stride < 1) throw std::invalid_argument("conv2d stride must be >= 1");
    if (pad < 0) throw std::invalid_argument("conv2d pad must be >= 0");
    ConvDims d{};
    if (input.ndim() == 4) {
        d.batched = true;
        d.n = input.dim(0); d.c = input.dim(1); d.h = input.dim(2); d.w = input.dim(3);
    } else if (input.ndim() == 3) {
        d.batched = false;
        d.n = 1; d.c = input.dim(0); d.h = input.dim(1); d.w = input.dim(2);
    } else {
        throw std::invalid_argument("conv2d input must be [N,C,H,W] or [C,H,W], got " + shape_str(input.shape()));
    }
    d.o = kernel.dim(0); d.kh = kernel.dim(2); d.kw = kernel.dim(3);
    if (kernel.dim(1) != d.c) {
        throw std::invalid_argument("conv2d channel mismatch: input " + shape_str(input.shape()) +
                                    " vs kernel " + shape_str(kernel.shape()));
    }
    if (d.kh > d.h + 2 * pad || d.kw > d.w + 2 * pad) {
        throw std::invalid_argument("conv2d kernel exceeds padded input: kernel " + shape_str(kernel.shape()) +
                                    " input " + shape_str(input.shape()));
    }
    d.oh = (d.h + 2 * pad - d.kh) / stride + 1;
    d.ow = (d.w + 2 * pad - d.kw) / stride + 1;
    if (d.oh <= 0 || d.ow <= 0) {
        throw std::invalid_argument("conv2d output has zero size for input " + shape_str(input.shape()));
    }
    return d;
}

// col [C*kh*kw, oh*ow] for one item
void im2col(const double* x, const ConvDims& d, int stride, int pad, double* col) {
    const int P = d.oh * d.ow;
    for (int c = 0; c < d.c; ++c) {
        for (int ky = 0; ky < d.kh; ++ky) {
            for (int kx = 0; kx < d.kw; ++kx) {
                double* row = col + (static_cast<size_t>(c) * d.kh * d.kw + ky * d.kw + kx) * P;
                for (int oy = 0; oy < d.oh; ++oy) {
                    const int iy = oy * stride + ky - pad;
                    for (int ox = 0; ox < d.ow; ++ox) {
                        const int ix = ox * stride + kx - pad;
                        row[oy * d.ow + ox] =
                            (iy >= 0 && iy < d.h && ix >= 0 && ix < d.w)
                                ? x[(static_cast<size_t>(c) * d.h + iy) * d.w + ix]
                                : 0.0;
                    }
                }
            }
        }
    }
}

void col2im_add(const double* col, const ConvDims& d, int stride, int pad, double* x) {
    const int P = d.oh * d.ow;
    for (int c = 0; c < d.c; ++c) {
        for (int ky = 0; ky < d.kh; ++ky) {
            for (int kx = 0; kx < d.kw; ++kx) {
                const double* row = col + (static_cast<size_t>(c) * d.kh * d.kw + ky * d.kw + kx) * P;
                for (int oy = 0; oy < d.oh; ++oy) {
                    const int iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= d.h) continue;
                    for (int ox = 0; ox < d.ow; ++ox) {
                        const int ix = ox * stride + kx - pad;
                        if (ix < 0 || ix >= d.w) continue;
                        x[(static_cast<size_t>(c) * d.h + iy) * d.w + ix] += row[oy * d.ow + ox];
                    }
                }
            }
        }
    }
}

} // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride, int pad) {
    const ConvDims d = conv_dims(input, kernel, stride, pad);
    const bool has_bias = bias.defined();
    if (has_bias && (bias.ndim() != 1 || bias.dim(0) != d.o)) {
        throw std::invalid_argument("conv2d bias must be [O]");
    }
    const int K = d.c * d.kh * d.kw;
    const int P = d.oh * d.ow;
    const size_t item_in = static_cast<size_t>(d.c) * d.h * d.w;
    const size_t item_out = static_cast<size_t>(d.o) * P;

    std::vector<double> out(static_cast<size_t>(d.n) * item_out, 0.0);
    std::vector<double> col(static_cast<size_t>(K) * P);
    for (int i = 0; i < d.n; ++i) {
        im2col(input.data() + i * item_in, d, stride, pad, col.data());
        gemm_nn(d.o, P, K, kernel.data(), col.data(), out.data() + i * item_out);
        if (has_bias) {
            double* po = out.data() + i * item_out;
            for (int o = 0; o < d.o; ++o) {
                const double b = bias[static_cast<size_t>(o)];
                for (int p = 0; p < P; ++p) po[static_cast<size_t>(o) * P + p] += b;
            }
        }
    }

    Shape out_shape = d.batched ? Shape{d.n, d.o, d.oh, d.ow} : Shape{d.o, d.oh, d.ow};
    Storage xs = input.storage(), ws = kernel.storage();
    auto backward = [=](const std::vector<double>& g, const std::vector<NodePtr>& parents) {
        Node* nx = parents[0].get();
        Node* nw = parents[1].get();
        Node* nb = parents.size() > 2 ? parents[2].get() : nullptr;
        std::vector<double> colbuf(static_cast<size_t>(K) * P);
        std::vector<double> gx(nx ? static_cast<size_t>(d.n) * item_in : 0, 0.0);
        std::vector<double> gw(nw ? static_cast<size_t>(d.o) * K : 0, 0.0);
        std::vector<double> gcol;
        if (nx) gcol.resize(static_cast<size_t>(K) * P);
        for (int i = 0; i < d.n; ++i) {
            const double* gi = g.data() + i * item_out;
            if (nw) im2col(xs->data() + i * item_in, d, stride, pad, colbuf.data());
            if (nw) gemm_nt(d.o, K, P, gi, colbuf.data(), gw.data());
            if (nx) {
                std::fill(gcol.begin(), gcol.end(), 0.0);
                gemm_tn(K, P, d.o, ws->data(), gi, gcol.data());
                col2im_add(gcol.data(), d, stride, pad, gx.data() + i * item_in);
            }
        }
        if (nx) nx->accumulate(gx.data(), gx.size());
        if (nw) nw->accumulate(gw.data(), gw.size());
        if (nb) {
            std::vector<double> gb(static_cast<size_t>(d.o), 0.0);
            for (int i = 0; i < d.n; ++i) {
                const double* gi = g.data() + i * item_out;
                for (int o = 0; o < d.o; ++o)
                    for (int p = 0; p < P; ++p) gb[o] += gi[static_cast<size_t>(o) * P + p];
            }
            nb->accumulate(gb.data(), gb.size());
        }
    };
    std::vector<const Tensor*> inputs{&input, &kernel};
    if (has_bias) inputs.push_back(&bias);
    return Tensor::make_op(std::move(out_shape), std::move(out), inputs, backward);
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, int stride, int pad) {
    return conv2d(input, kernel, Tensor{}, stride, pad);
}

// ---------------------------------------------------------------------------
// Softmax
// ---------------------------------------------------------------------------

Tensor softmax(const Tensor& a, int axis) {
    const int nd = a.ndim();
    if (axis < 0) axis += nd;
    if (axis < 0 || axis >= nd) {
        throw std::invalid_argument("softmax axis out of range for " + shape_str(a.shape()));
    }
    const int d = a.dim(axis);
    size_t inner = 1, outer = 1;
    for (int i = axis + 1; i < nd; ++i) inner *= static_cast<size_t>(a.dim(i));
    for (int i = 0; i < axis; ++i) outer *= static_cast<size_t>(a.dim(i));

    std::vector<double> out(a.size());
    const double* p = a.data();
    for (size_t ou = 0; ou < outer; ++ou) {
        for (size_t in = 0; in < inner; ++in) {
            const size_t base = ou * d * inner + in;
            double mx = p[base];
            for (int j = 1; j < d; ++j) mx = std::max(mx, p[base + j * inner]);
            double sum = 0.0;
            for (int j = 0; j < d; ++j) {
                double e = std::exp(p[base + j * inner] - mx);
                out[base + j * inner] = e;
                sum += e;
            }
            const double inv = 1.0 / sum;
            for (int j = 0; j < d; ++j) out[base + j * inner] *= inv;
        }
    }

    auto ys = std::make_shared<const std::vector<double>>(std::move(out));
    auto backward = [=](const std::vector<double>& g, const std::vector<NodePtr>& parents) {
        Node* na = parents[0].get();
        if (!na) return;
        const double* y = ys->data();
        std::vector<double> ga(g.size());
        for (size_t ou = 0; ou < outer; ++ou) {
            for (size_t in = 0; in < inner; ++in) {
                const size_t base = ou * d * inner + in;
                double dot = 0.0;
                for (int j = 0; j < d; ++j) dot += g[base + j * inner] * y[base + j * inner];
                for (int j = 0; j < d; ++j) {
                    const size_t k = base + j * inner;
                    ga[k] = y[k] * (g[k] - dot);
                }
            }
        }
        na->accumulate(ga.data(), ga.size());
    };
    return Tensor::make_op(a.shape(), ys, {&a}, backward);
}

// ---------------------------------------------------------------------------
// Shape ops
// ---------------------------------------------------------------------------

Tensor reshape(const Tensor& a, Shape shape) {
    if (numel(shape) != a.size()) {
        throw std::invalid_argument("reshape from " + shape_str(a.shape()) + " to " + shape_str(shape) +
                                    " changes element count");
    }
    auto backward = [](const std::vector<double>& g, const std::vector<NodePtr>& parents) {
        Node* na = parents[0].get();
        if (na) na->accumulate(g.data(), g.size());
    };
    return Tensor::make_op(std::move(shape), a.values(), {&a}, backward);
}

Tensor concat0(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat0 of zero tensors");
    Shape rest(parts[0].shape().begin() + 1, parts[0].shape().end());
    int total0 = 0;
    size_t total = 0;
    for (const Tensor& t : parts) {
        Shape r(t.shape().begin() + 1, t.shape().end());
        if (r != rest) {
            throw std::invalid_argument("concat0 trailing shape mismatch: " + shape_str(parts[0].shape()) +
                                        " vs " + shape_str(t.shape()));
        }
        total0 += t.dim(0);
        total += t.size();
    }
    std::vector<double> out;
    out.reserve(total);
    std::vector<size_t> sizes;
    for (const Tensor& t : parts) {
        out.insert(out.end(), t.values().begin(), t.values().end());
        sizes.push_back(t.size());
    }
    Shape out_shape;
    out_shape.push_back(total0);
    out_shape.insert(out_shape.end(), rest.begin(), rest.end());

    auto backward = [sizes](const std::vector<double>& g, const std::vector<NodePtr>& parents) {
        size_t off = 0;
        for (size_t i = 0; i < parents.size(); ++i) {
            if (parents[i]) parents[i]->accumulate(g.data() + off, sizes[i]);
            off += sizes[i];
        }
    };
    std::vector<const Tensor*> inputs;
    for (const Tensor& t : parts) inputs.push_back(&t);
    return Tensor::make_op(std::move(out_shape), std::move(out), inputs, backward);
}

Tensor slice0(const Tensor& a, int begin, int end) {
    if (a.ndim() < 1 || begin < 0 || end > a.dim(0) || begin >= end) {
        throw std::invalid_argument("slice0 [" + std::to_string(begin) + "," + std::to_string(end) +
                                    ") invalid for " + shape_str(a.shape()));
    }
    size_t inner = 1;
    for (int i = 1; i < a.ndim(); ++i) inner *= static_cast<size_t>(a.dim(i));
    Shape out_shape = a.shape();
    out_shape[0] = end - begin;
    std::vector<double> out(a.values().begin() + begin * inner, a.values().begin() + end * inner);
    const size_t full = a.size();
    auto backward = [=](const std::vector<double>& g, const std::vector<NodePtr>& parents) {
        Node* na = parents[0].get();
        if (!na) return;
        std::vector<double> ga(full, 0.0);
        std::copy(g.begin(), g.end(), ga.begin() + begin * inner);
        na->accumulate(ga.data(), ga.size());
    };
    return Tensor::make_op(std::move(out_shape), std::move(out), {&a}, backward);
}

Tensor gather_rows(const Tensor& table, const std::vector<int>& indices) {
    if (table.ndim() != 2) throw std::invalid_argument("gather_rows table must be 2-D");
    const int v = table.dim(0), dcol = table.dim(1);
    std::vector<double> out(indices.size() * static_cast<size_t>(dcol));
    const double* p = table.data();
    for (size_t i = 0; i < indices.size(); ++i) {
        const int r = indices[i];
        if (r < 0 || r >= v) throw std::invalid_argument("gather_rows index out of range");
        std::copy(p + static_cast<size_t>(r) * dcol, p + static_cast<size_t>(r + 1) * dcol,
                  out.begin() + i * dcol);
    }
    auto idx = indices;
    const size_t table_size = table.size();
    auto backward = [=](const std::vector<double>& g, const std::vector<NodePtr>& parents) {
        Node* nt = parents[0].get();
        if (!nt) return;
        std::vector<double> gt(table_size, 0.0);
        for (size_t i = 0; i < idx.size(); ++i) {
            double* row = gt.data() + static_cast<size_t>(idx[i]) * dcol;
            const double* gr = g.data() + i * dcol;
            for (int j = 0; j < dcol; ++j) row[j] += gr[j];
        }
        nt->accumulate(gt.data(), gt.size());
    };
    return Tensor::make_op({static_cast<int>(indices.size()), dcol}, std::move(out), {&table}, backward);
}

Tensor upsample_nearest2(const Tensor& a) {
    if (a.ndim() != 3) throw std::invalid_argument("upsample_nearest2 input must be [C,H,W]");
    const int c = a.dim(0), h = a.dim(1), w = a.dim(2);
    std::vector<double> out(static_cast<size_t>(c) * 4 * h * w);
    const double* p = a.data();
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < 2 * h; ++y)
            for (int x = 0; x < 2 * w; ++x)
                out[(static_cast<size_t>(ch) * 2 * h + y) * 2 * w + x] =
                    p[(static_cast<size_t>(ch) * h + y / 2) * w + x / 2];
    auto backward = [=](const std::vector<double>& g, const std::vector<NodePtr>& parents) {
        Node* na = parents[0].get();
        if (!na) return;
        std::vector<double> ga(static_cast<size_t>(c) * h * w, 0.0);
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < 2 * h; ++y)
                for (int x = 0; x < 2 * w; ++x)
                    ga[(static_cast<size_t>(ch) * h + y / 2) * w + x / 2] +=
                        g[(static_cast<size_t>(ch) * 2 * h + y) * 2 * w + x];
        na->accumulate(ga.data(), ga.size());
    };
    return Tensor::make_op({c, 2 * h, 2 * w}, std::move(out), {&a}, backward);
}

// ---------------------------------------------------------------------------
// Group normalization
// ---------------------------------------------------------------------------

Tensor group_norm(const Tensor& x, int groups, const Tensor& gamma, const Tensor& beta, double eps) {
    if (x.ndim() != 3) throw std::invalid_argument("group_norm input must be [C,H,W]");
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    if (groups < 1 || c % groups != 0) {
        throw std::invalid_argument("group_norm: channels " + std::to_string(c) +
                                    " not divisible by groups " + std::to_string(groups));
    }
    if (gamma.size() != static_cast<size_t>(c) || beta.size() != static_cast<size_t>(c)) {
        throw std::invalid_argument("group_norm affine parameters must have one entry per channel");
    }
    const int cg = c / groups;
    const size_t gm = static_cast<size_t>(cg) * h * w; // elements per group
    const size_t hw = static_cast<size_t>(h) * w;

    std::vector<double> out(x.size());
    auto xhat = std::make_shared<std::vector<double>>(x.size());
    auto inv_std = std::make_shared<std::vector<double>>(static_cast<size_t>(groups));
    const double* p = x.data();
    const double* gw = gamma.data();
    const double* bw = beta.data();
    for (int g = 0; g < groups; ++g) {
        const size_t base = static_cast<size_t>(g) * gm;
        double mean = 0.0;
        for (size_t i = 0; i < gm; ++i) mean += p[base + i];
        mean /= static_cast<double>(gm);
        double var = 0.0;
        for (size_t i = 0; i < gm; ++i) {
            const double d = p[base + i] - mean;
            var += d * d;
        }
        var /= static_cast<double>(gm);
        const double is = 1.0 / std::sqrt(var + eps);
        (*inv_std)[g] = is;
        for (size_t i = 0; i < gm; ++i) {
            const double xh = (p[base + i] - mean) * is;
            (*xhat)[base + i] = xh;
            const int ch = g * cg + static_cast<int>(i / hw);
            out[base + i] = gw[ch] * xh + bw[ch];
        }
    }

    Storage gs = gamma.storage();
    auto backward = [=](const std::vector<double>& g, const std::vector<NodePtr>& parents) {
        Node* nx = parents[0].get();
        Node* ng = parents[1].get();
        Node* nb = parents[2].get();
        const double* xh = xhat->data();
        const double* gam = gs->data();
        if (ng || nb) {
            std::vector<double> dg(ng ? static_cast<size_t>(c) : 0, 0.0);
            std::vector<double> db(nb ? static_cast<size_t>(c) : 0, 0.0);
            for (int ch = 0; ch < c; ++ch) {
                const size_t base = static_cast<size_t>(ch) * hw;
                for (size_t i = 0; i < hw; ++i) {
                    if (ng) dg[ch] += g[base + i] * xh[base + i];
                    if (nb) db[ch] += g[base + i];
                }
            }
            if (ng) ng->accumulate(dg.data(), dg.size());
            if (nb) nb->accumulate(db.data(), db.size());
        }
        if (nx) {
            std::vector<double> gx(g.size());
            for (int gr = 0; gr < groups; ++gr) {
                const size_t base = static_cast<size_t>(gr) * gm;
                double mean_gy = 0.0, mean_gyx = 0.0;
                for (size_t i = 0; i < gm; ++i) {
                    const int ch = gr * cg + static_cast<int>(i / hw);
                    const double gy = g[base + i] * gam[ch];
                    mean_gy += gy;
                    mean_gyx += gy * xh[base + i];
                }
                mean_gy /= static_cast<double>(gm);
                mean_gyx /= static_cast<double>(gm);
                const double is = (*inv_std)[gr];
                for (size_t i = 0; i < gm; ++i) {
                    const int ch = gr * cg + static_cast<int>(i / hw);
                    const double gy = g[base + i] * gam[ch];
                    gx[base + i] = is * (gy - mean_gy - xh[base + i] * mean_gyx);
                }
            }
            nx->accumulate(gx.data(), gx.size());
        }
    };
    return Tensor::make_op(x.shape(), std::move(out), {&x, &gamma, &beta}, backward);
}

// ---------------------------------------------------------------------------
// Layout permutes
// ---------------------------------------------------------------------------

Tensor hwc_to_chw(const Tensor& a) {
    if (a.ndim() != 3) throw std::invalid_argument("hwc_to_chw input must be [H,W,C]");
    const int h = a.dim(0), w = a.dim(1), c = a.dim(2);
    std::vector<double> out(a.size());
    const double* p = a.data();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch)
                out[(static_cast<size_t>(ch) * h + y) * w + x] = p[(static_cast<size_t>(y) * w + x) * c + ch];
    auto backward = [=](const std::vector<double>& g, const std::vector<NodePtr>& parents) {
        Node* na = parents[0].get();
        if (!na) return;
        std::vector<double> ga(g.size());
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int ch = 0; ch < c; ++ch)
                    ga[(static_cast<size_t>(y) * w + x) * c + ch] = g[(static_cast<size_t>(ch) * h + y) * w + x];
        na->accumulate(ga.data(), ga.size());
    };
    return Tensor::make_op({c, h, w}, std::move(out), {&a}, backward);
}

Tensor chw_to_hwc(const Tensor& a) {
    if (a.ndim() != 3) throw std::invalid_argument("chw_to_hwc input must be [C,H,W]");
    const int c = a.dim(0), h = a.dim(1), w = a.dim(2);
    std::vector<double> out(a.size());
    const double* p = a.data();
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out[(static_cast<size_t>(y) * w + x) * c + ch] = p[(static_cast<size_t>(ch) * h + y) * w + x];
    auto backward = [=](const std::vector<double>& g, const std::vector<NodePtr>& parents) {
        Node* na = parents[0].get();
        if (!na) return;
        std::vector<double> ga(g.size());
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    ga[(static_cast<size_t>(ch) * h + y) * w + x] = g[(static_cast<size_t>(y) * w + x) * c + ch];
        na->accumulate(ga.data(), ga.size());
    };
    return Tensor::make_op({h, w, c}, std::move(out), {&a}, backward);
}

Tensor mean_abs_diff(const Tensor& a, const Tensor& b) { return mean_all(abs_op(sub(a, b))); }
Tensor mean_sq_diff(const Tensor& a, const Tensor& b) { return mean_all(square(sub(a, b))); }

bool all_finite(const Tensor& a) {
    const double* p = a.data();
    for (size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

} // namespace svbrdf::nd
