#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eegdiff::nd {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Raised for incompatible operand shapes; the message names the op and the shapes.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a forward op would produce a non-finite value.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class OpKind {
    leaf,
    matmul,
    add,
    sub,
    mul,
    scalar_mul,
    add_scalar,
    abs,
    minimum,
    sigmoid,
    relu,
    softmax,
    layer_norm,
    batch_norm,
    mean,
    sum,
    concat,
    reshape,
    permute,
    exp,
    log,
    power,
    cosine_similarity,
    broadcast_to,
    conv2d,
    avg_pool2,
    upsample2,
};

const char* op_name(OpKind kind);

struct Node;
using NodePtr = std::shared_ptr<Node>;

// Accumulates the op's vector-Jacobian product into the input gradient buffers.
// An input that does not require grad receives an empty span. Saved activations
// are read through `self` (its value and its inputs' values).
using BackwardFn = std::function<void(const Node& self, std::span<const double> grad_out,
                                      std::span<const std::span<double>> grad_in)>;

struct Node {
    std::uint64_t id = 0;
    OpKind kind = OpKind::leaf;
    Shape shape;
    std::vector<double> value;
    bool requires_grad = false;
    std::vector<NodePtr> inputs;
    BackwardFn backward;
};

/// Shared handle to a node of the computation graph. Copies alias the same node.
class Tensor {
public:
    Tensor();
    explicit Tensor(NodePtr node);

    static Tensor zeros(const Shape& shape, bool requires_grad = false);
    static Tensor full(const Shape& shape, double value, bool requires_grad = false);
    static Tensor from(const Shape& shape, std::vector<double> values, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const { return node_->value.size(); }

    std::span<const double> data() const { return node_->value; }
    // Only meaningful on leaves; mutating a node that already feeds a graph
    // invalidates that graph's saved activations.
    std::span<double> mutable_data() { return node_->value; }
    std::vector<double> to_vector() const { return node_->value; }

    double item() const;
    double at(std::initializer_list<std::size_t> index) const;

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool flag);
    bool is_leaf() const { return node_->kind == OpKind::leaf; }

    std::uint64_t id() const { return node_->id; }
    OpKind kind() const { return node_->kind; }
    const NodePtr& node() const { return node_; }

    /// Independent leaf holding a copy of this tensor's values.
    Tensor detach() const;
    Tensor clone_leaf(bool requires_grad) const;

    bool defined() const { return static_cast<bool>(node_); }

private:
    NodePtr node_;
};

/// Disables graph construction on this thread for the guard's lifetime.
/// Results computed under the guard are plain constants.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

bool grad_enabled();

namespace detail {

std::uint64_t next_node_id();

// Builds a result node. Inputs and the backward closure are attached only when
// at least one input requires grad, so evaluation-only forward passes keep no graph.
Tensor make_result(OpKind kind, Shape shape, std::vector<double> value,
                   std::vector<Tensor> inputs, BackwardFn backward);

void check_finite(OpKind kind, std::span<const double> values);

} // namespace detail

} // namespace eegdiff::nd
