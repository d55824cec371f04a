#pragma once

#include "svbrdf/nd/nn.hpp"

#include <functional>

namespace svbrdf::nd {

// Compares the reverse-mode gradient of a scalar function against central
// finite differences, per coordinate. Returns the worst relative error
// |g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|).
//
// `mask`, when given, restricts the check to coordinates flagged true
// (used to step around clamp kinks). Rejects non-finite f(x).
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                  double eps = 1e-4, const std::vector<bool>* mask = nullptr);

struct ParamGradError {
    std::string name;
    double rel_error;
};

// Same check for every coordinate of every parameter of a model. `loss`
// must re-evaluate the forward pass from the parameters' current tensors.
std::vector<ParamGradError> grad_check_params(const std::function<Tensor()>& loss,
                                              const std::vector<Param*>& params,
                                              double eps = 1e-4);

double worst_error(const std::vector<ParamGradError>& errs);

} // namespace svbrdf::nd
