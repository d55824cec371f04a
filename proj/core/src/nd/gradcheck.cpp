#include "svbrdf/nd/gradcheck.hpp"

#include "svbrdf/nd/graph.hpp"

#include <cmath>
#include <stdexcept>

namespace svbrdf::nd {

namespace {

double rel_error(double ad, double fd) {
    return std::fabs(ad - fd) / std::max(1e-8, std::fabs(ad) + std::fabs(fd));
}

} // namespace

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                  double eps, const std::vector<bool>* mask) {
    Tensor xp = Tensor::param(x.shape(), x.values());
    Tensor y = f(xp);
    if (y.size() != 1) throw std::invalid_argument("grad_check target must be scalar");
    if (!std::isfinite(y.item())) throw std::invalid_argument("grad_check: f(x) is not finite");
    if (y.node()) backward(y); // constant targets have a zero gradient
    Tensor g_ad = xp.grad();

    double worst = 0.0;
    std::vector<double> v = x.values();
    for (size_t i = 0; i < v.size(); ++i) {
        if (mask && !(*mask)[i]) continue;
        const double orig = v[i];
        v[i] = orig + eps;
        double fp = f(Tensor::from_data(x.shape(), v)).item();
        v[i] = orig - eps;
        double fm = f(Tensor::from_data(x.shape(), v)).item();
        v[i] = orig;
        const double fd = (fp - fm) / (2.0 * eps);
        worst = std::max(worst, rel_error(g_ad[i], fd));
    }
    return worst;
}

std::vector<ParamGradError> grad_check_params(const std::function<Tensor()>& loss,
                                              const std::vector<Param*>& params,
                                              double eps) {
    Tensor y = loss();
    if (!std::isfinite(y.item())) throw std::invalid_argument("grad_check_params: loss is not finite");
    if (y.node()) backward(y);
    std::vector<Tensor> grads;
    grads.reserve(params.size());
    for (Param* p : params) grads.push_back(p->t.grad());

    std::vector<ParamGradError> report;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Param* p = params[pi];
        const Tensor saved = p->t;
        std::vector<double> v = saved.values();
        double worst = 0.0;
        for (size_t i = 0; i < v.size(); ++i) {
            const double orig = v[i];
            v[i] = orig + eps;
            p->t = Tensor::param(saved.shape(), v);
            double fp = loss().item();
            v[i] = orig - eps;
            p->t = Tensor::param(saved.shape(), v);
            double fm = loss().item();
            v[i] = orig;
            const double fd = (fp - fm) / (2.0 * eps);
            worst = std::max(worst, rel_error(grads[pi][i], fd));
        }
        p->t = saved;
        report.push_back({p->name, worst});
    }
    for (Param* p : params) clear_grad(p->t);
    return report;
}

double worst_error(const std::vector<ParamGradError>& errs) {
    double w = 0.0;
    for (const auto& e : errs) w = std::max(w, e.rel_error);
    return w;
}

} // namespace svbrdf::nd
