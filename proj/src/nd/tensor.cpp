#include "eegdiff/nd/tensor.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

namespace eegdiff::nd {

std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out << ", ";
        out << shape[i];
    }
    out << ')';
    return out.str();
}

const char* op_name(OpKind kind) {
    switch (kind) {
    case OpKind::leaf: return "leaf";
    case OpKind::matmul: return "matmul";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::scalar_mul: return "scalar-mul";
    case OpKind::add_scalar: return "add-scalar";
    case OpKind::abs: return "abs";
    case OpKind::minimum: return "elementwise-min";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::relu: return "relu";
    case OpKind::softmax: return "softmax";
    case OpKind::layer_norm: return "layer-normalize";
    case OpKind::batch_norm: return "batch-normalize";
    case OpKind::mean: return "mean";
    case OpKind::sum: return "sum";
    case OpKind::concat: return "concat";
    case OpKind::reshape: return "reshape";
    case OpKind::permute: return "permute";
    case OpKind::exp: return "exp";
    case OpKind::log: return "log";
    case OpKind::power: return "power";
    case OpKind::cosine_similarity: return "cosine-similarity";
    case OpKind::broadcast_to: return "broadcast-to";
    case OpKind::conv2d: return "conv2d";
    case OpKind::avg_pool2: return "avg-pool2";
    case OpKind::upsample2: return "upsample2";
    }
    return "unknown";
}

namespace detail {

namespace {
thread_local bool t_grad_enabled = true;
}

std::uint64_t next_node_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

Tensor make_result(OpKind kind, Shape shape, std::vector<double> value,
                   std::vector<Tensor> inputs, BackwardFn backward) {
    auto node = std::make_shared<Node>();
    node->id = next_node_id();
    node->kind = kind;
    node->shape = std::move(shape);
    node->value = std::move(value);
    bool needs_grad = false;
    if (grad_enabled()) {
        for (const auto& in : inputs) needs_grad = needs_grad || in.requires_grad();
    }
    if (needs_grad) {
        node->requires_grad = true;
        node->inputs.reserve(inputs.size());
        for (auto& in : inputs) node->inputs.push_back(in.node());
        node->backward = std::move(backward);
    }
    return Tensor(std::move(node));
}

void check_finite(OpKind kind, std::span<const double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw DomainError(std::string(op_name(kind)) + ": non-finite result");
        }
    }
}

} // namespace detail

Tensor::Tensor() = default;

Tensor::Tensor(NodePtr node) : node_(std::move(node)) {}

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
    return full(shape, 0.0, requires_grad);
}

Tensor Tensor::full(const Shape& shape, double value, bool requires_grad) {
    return from(shape, std::vector<double>(numel(shape), value), requires_grad);
}

Tensor Tensor::from(const Shape& shape, std::vector<double> values, bool requires_grad) {
    if (numel(shape) != values.size()) {
        throw ShapeError("tensor: shape " + shape_str(shape) + " holds " +
                         std::to_string(numel(shape)) + " elements, got " +
                         std::to_string(values.size()));
    }
    for (auto d : shape) {
        if (d == 0) throw ShapeError("tensor: zero-length axis in " + shape_str(shape));
    }
    auto node = std::make_shared<Node>();
    node->id = detail::next_node_id();
    node->shape = shape;
    node->value = std::move(values);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from({1}, {value}, requires_grad);
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= rank()) {
        throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_str(shape()));
    }
    return node_->shape[axis];
}

double Tensor::item() const {
    if (size() != 1) throw ShapeError("item: tensor of shape " + shape_str(shape()) + " is not scalar");
    return node_->value[0];
}

double Tensor::at(std::initializer_list<std::size_t> index) const {
    if (index.size() != rank()) throw ShapeError("at: index rank mismatch for " + shape_str(shape()));
    std::size_t flat = 0;
    std::size_t axis = 0;
    for (auto i : index) {
        if (i >= node_->shape[axis]) throw ShapeError("at: index out of range for " + shape_str(shape()));
        flat = flat * node_->shape[axis] + i;
        ++axis;
    }
    return node_->value[flat];
}

void Tensor::set_requires_grad(bool flag) {
    if (!is_leaf()) throw std::logic_error("set_requires_grad on a non-leaf tensor");
    node_->requires_grad = flag;
}

Tensor Tensor::detach() const { return clone_leaf(false); }

Tensor Tensor::clone_leaf(bool requires_grad) const {
    return from(shape(), node_->value, requires_grad);
}

NoGradGuard::NoGradGuard() : previous_(detail::t_grad_enabled) { detail::t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { detail::t_grad_enabled = previous_; }

bool grad_enabled() { return detail::t_grad_enabled; }

} // namespace eegdiff::nd
