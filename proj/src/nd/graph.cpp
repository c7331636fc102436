#include "eegdiff/nd/graph.hpp"

#include <unordered_set>

namespace eegdiff::nd {

bool Gradients::contains(const Tensor& leaf) const { return grads_.count(leaf.id()) != 0; }

Tensor Gradients::of(const Tensor& leaf) const {
    auto it = grads_.find(leaf.id());
    if (it == grads_.end()) return Tensor::zeros(leaf.shape());
    return Tensor::from(leaf.shape(), it->second);
}

std::span<const double> Gradients::view(const Tensor& leaf) const {
    auto it = grads_.find(leaf.id());
    if (it == grads_.end()) return {};
    return it->second;
}

Graph Graph::trace(const Tensor& root) {
    Graph graph;
    graph.root_ = root;
    if (!root.requires_grad()) return graph;

    // Iterative post-order DFS; children precede parents in the result.
    std::unordered_set<const Node*> visited;
    std::vector<std::pair<const NodePtr*, std::size_t>> stack;
    stack.emplace_back(&root.node(), 0);
    visited.insert(root.node().get());
    while (!stack.empty()) {
        auto& [node, next_child] = stack.back();
        const auto& inputs = (*node)->inputs;
        if (next_child < inputs.size()) {
            const NodePtr& child = inputs[next_child++];
            if (child->requires_grad && visited.insert(child.get()).second) {
                stack.emplace_back(&child, 0);
            }
        } else {
            graph.order_.push_back(*node);
            stack.pop_back();
        }
    }
    return graph;
}

Gradients Graph::backward() const {
    if (root_.size() != 1) {
        throw ShapeError("backward: root must be scalar, got shape " + shape_str(root_.shape()));
    }
    Gradients result;
    if (order_.empty()) return result;

    std::unordered_map<const Node*, std::size_t> position;
    position.reserve(order_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) position[order_[i].get()] = i;

    std::vector<std::vector<double>> grads(order_.size());
    grads.back().assign(1, 1.0);

    std::vector<std::span<double>> in_spans;
    for (std::size_t i = order_.size(); i-- > 0;) {
        const Node& node = *order_[i];
        if (node.kind == OpKind::leaf) continue;
        if (grads[i].empty()) continue;
        in_spans.assign(node.inputs.size(), std::span<double>{});
        for (std::size_t k = 0; k < node.inputs.size(); ++k) {
            const Node* in = node.inputs[k].get();
            if (!in->requires_grad) continue;
            auto& g = grads[position.at(in)];
            if (g.empty()) g.assign(in->value.size(), 0.0);
            in_spans[k] = g;
        }
        node.backward(node, grads[i], in_spans);
        // Intermediate gradients are no longer needed once propagated.
        std::vector<double>().swap(grads[i]);
    }

    for (std::size_t i = 0; i < order_.size(); ++i) {
        const Node& node = *order_[i];
        if (node.kind != OpKind::leaf) continue;
        auto& g = grads[i];
        if (g.empty()) g.assign(node.value.size(), 0.0);
        result.grads_.emplace(node.id, std::move(g));
    }
    return result;
}

Gradients backward(const Tensor& root) { return Graph::trace(root).backward(); }

} // namespace eegdiff::nd
