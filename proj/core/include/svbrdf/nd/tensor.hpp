#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace svbrdf::nd {

using Shape = std::vector<int>;

size_t numel(const Shape& s);
std::string shape_str(const Shape& s);
bool same_shape(const Shape& a, const Shape& b);

// Trailing-dimension broadcast: shapes are right-aligned, each pair of dims
// must be equal or contain a 1. Throws std::invalid_argument naming both
// shapes on mismatch.
Shape broadcast_shape(const Shape& a, const Shape& b);
bool broadcastable(const Shape& a, const Shape& b);

class Node;
using NodePtr = std::shared_ptr<Node>;

// Immutable dense double array. Copies are cheap handles to shared storage.
// A Tensor is connected to the compute graph iff node() is non-null; leaf
// tensors created with Tensor::param are gradient roots.
class Tensor {
public:
    Tensor() = default;

    static Tensor from_data(Shape shape, std::vector<double> values);
    static Tensor zeros(Shape shape);
    static Tensor ones(Shape shape);
    static Tensor full(Shape shape, double v);
    static Tensor scalar(double v);
    // grad-enabled leaf
    static Tensor param(Shape shape, std::vector<double> values);

    bool defined() const { return data_ != nullptr; }
    const Shape& shape() const { return shape_; }
    int ndim() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    size_t size() const { return data_ ? data_->size() : 0; }

    const std::vector<double>& values() const { return *data_; }
    const double* data() const { return data_->data(); }
    double operator[](size_t i) const { return (*data_)[i]; }
    // requires size() == 1
    double item() const;

    bool grad_enabled() const;
    const NodePtr& node() const { return node_; }

    // gradient accumulated by the last backward pass; zeros if this tensor
    // never participated or has no node
    Tensor grad() const;

    // same values, disconnected from the graph (stop-gradient)
    Tensor detach() const;

    // internal: wrap an op result. parents may contain null entries for
    // inputs that do not track gradients.
    static Tensor make_op(Shape shape, std::vector<double> values,
                          const std::vector<const Tensor*>& inputs,
                          std::function<void(const std::vector<double>&, const std::vector<NodePtr>&)> backward);
    static Tensor make_op(Shape shape, std::shared_ptr<const std::vector<double>> values,
                          const std::vector<const Tensor*>& inputs,
                          std::function<void(const std::vector<double>&, const std::vector<NodePtr>&)> backward);

    std::shared_ptr<const std::vector<double>> storage() const { return data_; }

private:
    std::shared_ptr<const std::vector<double>> data_;
    Shape shape_;
    NodePtr node_;
};

} // namespace svbrdf::nd
