#pragma once

#include "svbrdf/nd/tensor.hpp"

namespace svbrdf::nd {

// One op record: cached output shape, parent links and the backward closure
// (which owns whatever forward activations it needs).
class Node {
public:
    Shape shape;
    std::vector<NodePtr> parents;
    // accumulates into parents' grad buffers; null for leaves
    std::function<void(const std::vector<double>& grad_out, const std::vector<NodePtr>& parents)> backward_fn;
    std::vector<double> grad; // empty until a backward pass touches this node
    bool is_leaf = false;
    uint64_t visit_mark = 0;

    void accumulate(const double* g, size_t n);
    bool has_grad() const { return !grad.empty(); }
};

// Reverse-mode pass over the subgraph reachable from a scalar root.
// Visits each node exactly once; grads of all reachable nodes are reset
// before accumulation, so repeated passes do not leak stale gradients.
class ComputeGraph {
public:
    explicit ComputeGraph(const Tensor& root);

    void backward();
    size_t node_count() const { return order_.size(); }

private:
    NodePtr root_;
    std::vector<Node*> order_; // root first, parents after children
};

// Convenience: build the graph from a scalar loss and run backward once.
void backward(const Tensor& loss);

// Drop gradient buffers of the given leaves (typically parameters) so the
// next pass starts clean even if they were not reachable from its root.
void clear_grad(const Tensor& t);

} // namespace svbrdf::nd
