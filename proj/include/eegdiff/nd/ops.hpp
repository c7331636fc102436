#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "eegdiff/nd/tensor.hpp"

namespace eegdiff::nd {

// Elementwise binary ops broadcast numpy-style (trailing axes aligned).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
/// Elementwise minimum; at ties the gradient routes to `a`.
Tensor minimum(const Tensor& a, const Tensor& b);

Tensor scalar_mul(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);

Tensor abs(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
/// Raises DomainError when any input exceeds the float64 exponent range.
Tensor exp(const Tensor& a);
/// Raises DomainError on non-positive inputs.
Tensor log(const Tensor& a);
/// x^p for a scalar exponent. Raises DomainError for 0^p with p < 0 and for
/// negative bases with non-integer p.
Tensor power(const Tensor& a, double p);

/// Matrix product over the last two axes. `b` is either rank 2 (shared by every
/// batch entry of `a`) or has the same leading batch axes as `a`.
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor softmax(const Tensor& a, std::ptrdiff_t axis = -1);
Tensor sum(const Tensor& a, std::ptrdiff_t axis, bool keepdim = false);
Tensor mean(const Tensor& a, std::ptrdiff_t axis, bool keepdim = false);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

/// Normalizes each slice along the last axis to zero mean and unit variance
/// (biased variance, no affine parameters).
Tensor layer_norm(const Tensor& a, double eps = 1e-10);

/// Running statistics for batch_norm, updated in training mode as
/// running = momentum * running + (1 - momentum) * batch.
struct BatchNormState {
    Tensor running_mean;
    Tensor running_var;
    double momentum = 0.9;
    double eps = 1e-5;

    explicit BatchNormState(std::size_t features);
};

/// Per-feature normalization over every axis except the last. Training mode
/// uses batch statistics and updates `state`; evaluation uses running statistics.
Tensor batch_norm(const Tensor& a, BatchNormState& state, bool training);

Tensor concat(std::span<const Tensor> parts, std::ptrdiff_t axis);
Tensor concat(std::initializer_list<Tensor> parts, std::ptrdiff_t axis);
Tensor reshape(const Tensor& a, const Shape& shape);
Tensor permute(const Tensor& a, const std::vector<std::size_t>& order);
/// Swaps the last two axes.
Tensor transpose(const Tensor& a);
Tensor broadcast_to(const Tensor& a, const Shape& shape);

/// Cosine similarity along `axis` of equally shaped operands. Norms are clamped
/// below at 1e-12 so zero vectors give similarity 0 with a finite gradient.
Tensor cosine_similarity(const Tensor& a, const Tensor& b, std::ptrdiff_t axis = -1);

/// 2-D convolution, stride 1, zero "same" padding. x: (N, Cin, H, W),
/// w: (Cout, Cin, k, k) with odd k.
Tensor conv2d(const Tensor& x, const Tensor& w);
Tensor avg_pool2(const Tensor& x);
Tensor upsample2(const Tensor& x);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(const Tensor& a, double s) { return scalar_mul(a, s); }
inline Tensor operator*(double s, const Tensor& a) { return scalar_mul(a, s); }
inline Tensor operator+(const Tensor& a, double s) { return add_scalar(a, s); }
inline Tensor operator-(const Tensor& a) { return scalar_mul(a, -1.0); }

} // namespace eegdiff::nd
