#include "svbrdf/nd/graph.hpp"

#include <stdexcept>

namespace svbrdf::nd {

namespace {
uint64_t g_visit_epoch = 0; // single-threaded by contract
}

void Node::accumulate(const double* g, size_t n) {
    if (grad.size() != n) grad.assign(n, 0.0);
    for (size_t i = 0; i < n; ++i) grad[i] += g[i];
}

ComputeGraph::ComputeGraph(const Tensor& root) : root_(root.node()) {
    if (!root_) {
        throw std::invalid_argument("backward root is not connected to a compute graph");
    }
    if (numel(root.shape()) != 1) {
        throw std::invalid_argument("backward root must be scalar, got " + shape_str(root.shape()));
    }
    // iterative DFS; post-order reversed puts every node before its parents
    uint64_t epoch = ++g_visit_epoch;
    std::vector<std::pair<Node*, size_t>> stack;
    std::vector<Node*> post;
    if (root_->visit_mark != epoch) {
        root_->visit_mark = epoch;
        stack.push_back({root_.get(), 0});
    }
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->parents.size()) {
            Node* p = node->parents[idx].get();
            ++idx;
            if (p && p->visit_mark != epoch) {
                p->visit_mark = epoch;
                stack.push_back({p, 0});
            }
        } else {
            post.push_back(node);
            stack.pop_back();
        }
    }
    order_.assign(post.rbegin(), post.rend());
}

void ComputeGraph::backward() {
    for (Node* n : order_) n->grad.assign(numel(n->shape), 0.0);
    root_->grad[0] = 1.0;
    for (Node* n : order_) {
        if (n->backward_fn) n->backward_fn(n->grad, n->parents);
    }
}

void backward(const Tensor& loss) {
    ComputeGraph g(loss);
    g.backward();
}

void clear_grad(const Tensor& t) {
    if (t.node()) t.node()->grad.clear();
}

} // namespace svbrdf::nd
