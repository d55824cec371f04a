#pragma once

#include "svbrdf/nd/tensor.hpp"

namespace svbrdf::nd {

// Elementwise with trailing-dimension broadcasting. All ops are pure,
// deterministic, and differentiable w.r.t. every tracked input.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor add_scalar(const Tensor& a, double s);
Tensor mul_scalar(const Tensor& a, double s);

Tensor neg(const Tensor& a);
Tensor log_op(const Tensor& a);
Tensor exp_op(const Tensor& a);
Tensor pow_scalar(const Tensor& a, double p); // defined for positive inputs when p is fractional
Tensor sqrt_op(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor silu(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor abs_op(const Tensor& a);
Tensor square(const Tensor& a);

Tensor sum_all(const Tensor& a);   // -> [1]
Tensor mean_all(const Tensor& a);  // -> [1]
Tensor sum_last_keepdim(const Tensor& a);
Tensor mean_last_keepdim(const Tensor& a);

// 2-D matrix product [m,k] x [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose2d(const Tensor& a);

// input [N,C,H,W] or [C,H,W], kernel [O,C,kh,kw], optional bias [O].
// Output spatial size floor((H + 2 pad - kh)/stride) + 1; zero-size output
// and kernels larger than the padded input are rejected.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              int stride, int pad);
Tensor conv2d(const Tensor& input, const Tensor& kernel, int stride, int pad);

// Max-subtracted softmax along `axis` (negative axis counts from the back).
Tensor softmax(const Tensor& a, int axis);

Tensor reshape(const Tensor& a, Shape shape);
Tensor concat0(const std::vector<Tensor>& parts);
Tensor slice0(const Tensor& a, int begin, int end);

// table [V,d], indices into rows -> [n,d]; backward scatter-adds into table.
Tensor gather_rows(const Tensor& table, const std::vector<int>& indices);

// [C,H,W] -> [C,2H,2W]
Tensor upsample_nearest2(const Tensor& a);

// Per-group normalization over (C/groups, H, W) with per-channel affine.
Tensor group_norm(const Tensor& x, int groups, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-6);

Tensor hwc_to_chw(const Tensor& a); // [H,W,C] -> [C,H,W]
Tensor chw_to_hwc(const Tensor& a); // [C,H,W] -> [H,W,C]

// mean |a-b| and mean (a-b)^2 over all elements
Tensor mean_abs_diff(const Tensor& a, const Tensor& b);
Tensor mean_sq_diff(const Tensor& a, const Tensor& b);

bool all_finite(const Tensor& a);

} // namespace svbrdf::nd
