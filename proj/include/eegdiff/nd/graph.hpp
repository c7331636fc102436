#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "eegdiff/nd/tensor.hpp"

namespace eegdiff::nd {

/// Gradients of a scalar root with respect to the leaves that require grad.
class Gradients {
public:
    bool contains(const Tensor& leaf) const;
    /// Gradient with the leaf's shape; zeros when the leaf was unreachable.
    Tensor of(const Tensor& leaf) const;
    std::span<const double> view(const Tensor& leaf) const;
    std::size_t size() const { return grads_.size(); }

private:
    friend class Graph;
    std::unordered_map<std::uint64_t, std::vector<double>> grads_;
};

/// Topologically ordered record of the ops that lead to a root.
class Graph {
public:
    static Graph trace(const Tensor& root);

    const std::vector<NodePtr>& nodes() const { return order_; }
    const Tensor& root() const { return root_; }

    /// Reverse-mode sweep in exact reverse topological order. Pure: the graph is
    /// not modified, so repeated calls return identical gradients.
    Gradients backward() const;

private:
    Tensor root_;
    std::vector<NodePtr> order_;
};

/// Throws ShapeError unless `root` holds exactly one element.
Gradients backward(const Tensor& root);

} // namespace eegdiff::nd
