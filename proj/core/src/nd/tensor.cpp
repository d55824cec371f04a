#include "svbrdf/nd/tensor.hpp"

#include "svbrdf/nd/graph.hpp"

#include <sstream>
#include <stdexcept>

namespace svbrdf::nd {

size_t numel(const Shape& s) {
    size_t n = 1;
    for (int d : s) n *= static_cast<size_t>(d);
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) os << ',';
        os << s[i];
    }
    os << ']';
    return os.str();
}

bool same_shape(const Shape& a, const Shape& b) { return a == b; }

bool broadcastable(const Shape& a, const Shape& b) {
    size_t n = std::max(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) {
        int da = i < a.size() ? a[a.size() - 1 - i] : 1;
        int db = i < b.size() ? b[b.size() - 1 - i] : 1;
        if (da != db && da != 1 && db != 1) return false;
    }
    return true;
}

Shape broadcast_shape(const Shape& a, const Shape& b) {
    if (!broadcastable(a, b)) {
        throw std::invalid_argument("shapes not broadcastable: " + shape_str(a) + " vs " + shape_str(b));
    }
    size_t n = std::max(a.size(), b.size());
    Shape out(n);
    for (size_t i = 0; i < n; ++i) {
        int da = i < a.size() ? a[a.size() - 1 - i] : 1;
        int db = i < b.size() ? b[b.size() - 1 - i] : 1;
        out[n - 1 - i] = std::max(da, db);
    }
    return out;
}

static void check_count(const Shape& shape, size_t count) {
    if (numel(shape) != count) {
        throw std::invalid_argument("value count " + std::to_string(count) +
                                    " does not match shape " + shape_str(shape));
    }
}

Tensor Tensor::from_data(Shape shape, std::vector<double> values) {
    check_count(shape, values.size());
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::make_shared<const std::vector<double>>(std::move(values));
    return t;
}

Tensor Tensor::zeros(Shape shape) {
    size_t n = numel(shape);
    return from_data(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::ones(Shape shape) { return full(std::move(shape), 1.0); }

Tensor Tensor::full(Shape shape, double v) {
    size_t n = numel(shape);
    return from_data(std::move(shape), std::vector<double>(n, v));
}

Tensor Tensor::scalar(double v) { return from_data({1}, {v}); }

Tensor Tensor::param(Shape shape, std::vector<double> values) {
    Tensor t = from_data(std::move(shape), std::move(values));
    t.node_ = std::make_shared<Node>();
    t.node_->shape = t.shape_;
    t.node_->is_leaf = true;
    return t;
}

double Tensor::item() const {
    if (size() != 1) {
        throw std::invalid_argument("item() requires a single-element tensor, got " + shape_str(shape_));
    }
    return (*data_)[0];
}

bool Tensor::grad_enabled() const { return node_ != nullptr; }

Tensor Tensor::grad() const {
    if (node_ && node_->has_grad()) {
        return Tensor::from_data(shape_, node_->grad);
    }
    return Tensor::zeros(shape_);
}

Tensor Tensor::detach() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = data_;
    return t;
}

Tensor Tensor::make_op(Shape shape, std::vector<double> values,
                       const std::vector<const Tensor*>& inputs,
                       std::function<void(const std::vector<double>&, const std::vector<NodePtr>&)> backward) {
    auto storage = std::make_shared<const std::vector<double>>(std::move(values));
    return make_op(std::move(shape), std::move(storage), inputs, std::move(backward));
}

Tensor Tensor::make_op(Shape shape, std::shared_ptr<const std::vector<double>> values,
                       const std::vector<const Tensor*>& inputs,
                       std::function<void(const std::vector<double>&, const std::vector<NodePtr>&)> backward) {
    check_count(shape, values->size());
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::move(values);

    bool tracked = false;
    for (const Tensor* in : inputs) {
        if (in && in->node_) { tracked = true; break; }
    }
    if (tracked) {
        t.node_ = std::make_shared<Node>();
        t.node_->shape = t.shape_;
        t.node_->parents.reserve(inputs.size());
        for (const Tensor* in : inputs) {
            t.node_->parents.push_back(in ? in->node_ : nullptr);
        }
        t.node_->backward_fn = std::move(backward);
    }
    return t;
}

} // namespace svbrdf::nd
