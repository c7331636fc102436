#include "eegdiff/nd/ops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace eegdiff::nd {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

[[noreturn]] void shape_fail(OpKind kind, const Shape& a, const Shape& b, const std::string& why = {}) {
    std::string msg = std::string(op_name(kind)) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b);
    if (!why.empty()) msg += " (" + why + ")";
    throw ShapeError(msg);
}

std::size_t normalize_axis(OpKind kind, std::ptrdiff_t axis, std::size_t rank) {
    const auto r = static_cast<std::ptrdiff_t>(rank);
    const std::ptrdiff_t a = axis < 0 ? axis + r : axis;
    if (a < 0 || a >= r) {
        throw ShapeError(std::string(op_name(kind)) + ": axis " + std::to_string(axis) +
                         " out of range for rank " + std::to_string(rank));
    }
    return static_cast<std::size_t>(a);
}

// (outer, len, inner) view of a shape around one axis.
struct AxisSplit {
    std::size_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
    AxisSplit s;
    for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
    s.len = shape[axis];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
    return s;
}

Shape broadcast_shape(OpKind kind, const Shape& a, const Shape& b) {
    const std::size_t rank = std::max(a.size(), b.size());
    Shape out(rank, 1);
    for (std::size_t i = 0; i < rank; ++i) {
        const std::size_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
        const std::size_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
        if (da != db && da != 1 && db != 1) shape_fail(kind, a, b, "not broadcastable");
        out[i] = std::max(da, db);
    }
    return out;
}

// Flat offsets into `src` for every element of `target` under broadcasting.
std::vector<std::size_t> broadcast_offsets(const Shape& src, const Shape& target) {
    const std::size_t rank = target.size();
    const std::size_t pad = rank - src.size();
    std::vector<std::size_t> strides(rank, 0);
    std::size_t stride = 1;
    for (std::size_t i = rank; i-- > pad;) {
        const std::size_t d = src[i - pad];
        strides[i] = d == 1 ? 0 : stride;
        stride *= d;
    }
    const std::size_t n = numel(target);
    std::vector<std::size_t> offsets(n);
    std::vector<std::size_t> idx(rank, 0);
    std::size_t off = 0;
    for (std::size_t flat = 0; flat < n; ++flat) {
        offsets[flat] = off;
        for (std::size_t i = rank; i-- > 0;) {
            if (++idx[i] < target[i]) {
                off += strides[i];
                break;
            }
            off -= strides[i] * (target[i] - 1);
            idx[i] = 0;
        }
    }
    return offsets;
}

template <typename Fwd, typename GradA, typename GradB>
Tensor binary(OpKind kind, const Tensor& a, const Tensor& b, Fwd fwd, GradA grad_a, GradB grad_b) {
    if (a.shape() == b.shape()) {
        const auto av = a.data();
        const auto bv = b.data();
        std::vector<double> out(av.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i], bv[i]);
        return detail::make_result(
            kind, a.shape(), std::move(out), {a, b},
            [grad_a, grad_b](const Node& self, std::span<const double> g, std::span<const std::span<double>> gin) {
                const auto& x = self.inputs[0]->value;
                const auto& y = self.inputs[1]->value;
                if (!gin[0].empty())
                    for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i] * grad_a(x[i], y[i]);
                if (!gin[1].empty())
                    for (std::size_t i = 0; i < g.size(); ++i) gin[1][i] += g[i] * grad_b(x[i], y[i]);
            });
    }
    Shape out_shape = broadcast_shape(kind, a.shape(), b.shape());
    auto oa = std::make_shared<std::vector<std::size_t>>(broadcast_offsets(a.shape(), out_shape));
    auto ob = std::make_shared<std::vector<std::size_t>>(broadcast_offsets(b.shape(), out_shape));
    const auto av = a.data();
    const auto bv = b.data();
    std::vector<double> out(numel(out_shape));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[(*oa)[i]], bv[(*ob)[i]]);
    return detail::make_result(
        kind, std::move(out_shape), std::move(out), {a, b},
        [oa, ob, grad_a, grad_b](const Node& self, std::span<const double> g,
                                 std::span<const std::span<double>> gin) {
            const auto& x = self.inputs[0]->value;
            const auto& y = self.inputs[1]->value;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double xi = x[(*oa)[i]];
                const double yi = y[(*ob)[i]];
                if (!gin[0].empty()) gin[0][(*oa)[i]] += g[i] * grad_a(xi, yi);
                if (!gin[1].empty()) gin[1][(*ob)[i]] += g[i] * grad_b(xi, yi);
            }
        });
}

template <typename Fwd, typename Grad>
Tensor unary(OpKind kind, const Tensor& a, Fwd fwd, Grad grad) {
    const auto av = a.data();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i]);
    return detail::make_result(
        kind, a.shape(), std::move(out), {a},
        [grad](const Node& self, std::span<const double> g, std::span<const std::span<double>> gin) {
            const auto& x = self.inputs[0]->value;
            const auto& y = self.value;
            for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i] * grad(x[i], y[i]);
        });
}

double stable_sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return binary(
        OpKind::add, a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
        [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary(
        OpKind::sub, a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
        [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary(
        OpKind::mul, a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
        [](double x, double) { return x; });
}

Tensor minimum(const Tensor& a, const Tensor& b) {
    return binary(
        OpKind::minimum, a, b, [](double x, double y) { return y < x ? y : x; },
        [](double x, double y) { return x <= y ? 1.0 : 0.0; },
        [](double x, double y) { return x <= y ? 0.0 : 1.0; });
}

Tensor scalar_mul(const Tensor& a, double s) {
    return unary(
        OpKind::scalar_mul, a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor& a, double s) {
    return unary(
        OpKind::add_scalar, a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Tensor abs(const Tensor& a) {
    return unary(
        OpKind::abs, a, [](double x) { return std::fabs(x); },
        [](double x, double) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

Tensor sigmoid(const Tensor& a) {
    return unary(OpKind::sigmoid, a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& a) {
    return unary(
        OpKind::relu, a, [](double x) { return x > 0 ? x : 0.0; },
        [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& a) {
    for (double x : a.data()) {
        if (!(x < 709.0)) throw DomainError("exp: argument " + std::to_string(x) + " overflows float64");
    }
    return unary(
        OpKind::exp, a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
    for (double x : a.data()) {
        if (!(x > 0.0)) throw DomainError("log: non-positive argument " + std::to_string(x));
    }
    return unary(
        OpKind::log, a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor power(const Tensor& a, double p) {
    const bool integral = std::floor(p) == p;
    for (double x : a.data()) {
        if (x < 0 && !integral) throw DomainError("power: negative base with non-integer exponent");
        if (x == 0 && p < 0) throw DomainError("power: zero base with negative exponent");
    }
    Tensor out = unary(
        OpKind::power, a, [p](double x) { return std::pow(x, p); },
        [p](double x, double) { return p == 0 ? 0.0 : p * std::pow(x, p - 1.0); });
    detail::check_finite(OpKind::power, out.data());
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() < 2 || b.rank() < 2) shape_fail(OpKind::matmul, a.shape(), b.shape(), "operands need rank >= 2");
    const std::size_t m = a.shape()[a.rank() - 2];
    const std::size_t k = a.shape()[a.rank() - 1];
    const std::size_t kb = b.shape()[b.rank() - 2];
    const std::size_t n = b.shape()[b.rank() - 1];
    if (k != kb) shape_fail(OpKind::matmul, a.shape(), b.shape(), "inner dimensions differ");
    const bool shared_b = b.rank() == 2;
    if (!shared_b) {
        if (b.rank() != a.rank() || !std::equal(a.shape().begin(), a.shape().end() - 2, b.shape().begin())) {
            shape_fail(OpKind::matmul, a.shape(), b.shape(), "batch axes differ");
        }
    }
    const std::size_t batch = a.size() / (m * k);
    Shape out_shape(a.shape().begin(), a.shape().end() - 1);
    out_shape.push_back(n);
    std::vector<double> out(batch * m * n);

    const double* ap = a.data().data();
    const double* bp = b.data().data();
    if (shared_b) {
        MutMap(out.data(), batch * m, n).noalias() = ConstMap(ap, batch * m, k) * ConstMap(bp, k, n);
    } else {
        for (std::size_t i = 0; i < batch; ++i) {
            MutMap(out.data() + i * m * n, m, n).noalias() =
                ConstMap(ap + i * m * k, m, k) * ConstMap(bp + i * k * n, k, n);
        }
    }
    return detail::make_result(
        OpKind::matmul, std::move(out_shape), std::move(out), {a, b},
        [batch, m, k, n, shared_b](const Node& self, std::span<const double> g,
                                   std::span<const std::span<double>> gin) {
            const double* x = self.inputs[0]->value.data();
            const double* y = self.inputs[1]->value.data();
            if (shared_b) {
                ConstMap gm(g.data(), batch * m, n);
                if (!gin[0].empty())
                    MutMap(gin[0].data(), batch * m, k).noalias() += gm * ConstMap(y, k, n).transpose();
                if (!gin[1].empty())
                    MutMap(gin[1].data(), k, n).noalias() += ConstMap(x, batch * m, k).transpose() * gm;
                return;
            }
            for (std::size_t i = 0; i < batch; ++i) {
                ConstMap gm(g.data() + i * m * n, m, n);
                if (!gin[0].empty())
                    MutMap(gin[0].data() + i * m * k, m, k).noalias() +=
                        gm * ConstMap(y + i * k * n, k, n).transpose();
                if (!gin[1].empty())
                    MutMap(gin[1].data() + i * k * n, k, n).noalias() +=
                        ConstMap(x + i * m * k, m, k).transpose() * gm;
            }
        });
}

Tensor softmax(const Tensor& a, std::ptrdiff_t axis) {
    const std::size_t ax = normalize_axis(OpKind::softmax, axis, a.rank());
    const AxisSplit s = split_at(a.shape(), ax);
    const auto x = a.data();
    std::vector<double> out(x.size());
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t in = 0; in < s.inner; ++in) {
            const std::size_t base = o * s.len * s.inner + in;
            double mx = x[base];
            for (std::size_t j = 1; j < s.len; ++j) mx = std::max(mx, x[base + j * s.inner]);
            double total = 0.0;
            for (std::size_t j = 0; j < s.len; ++j) {
                const double e = std::exp(x[base + j * s.inner] - mx);
                out[base + j * s.inner] = e;
                total += e;
            }
            for (std::size_t j = 0; j < s.len; ++j) out[base + j * s.inner] /= total;
        }
    }
    return detail::make_result(
        OpKind::softmax, a.shape(), std::move(out), {a},
        [s](const Node& self, std::span<const double> g, std::span<const std::span<double>> gin) {
            const auto& y = self.value;
            for (std::size_t o = 0; o < s.outer; ++o) {
                for (std::size_t in = 0; in < s.inner; ++in) {
                    const std::size_t base = o * s.len * s.inner + in;
                    double dot = 0.0;
                    for (std::size_t j = 0; j < s.len; ++j) dot += g[base + j * s.inner] * y[base + j * s.inner];
                    for (std::size_t j = 0; j < s.len; ++j) {
                        const std::size_t idx = base + j * s.inner;
                        gin[0][idx] += y[idx] * (g[idx] - dot);
                    }
                }
            }
        });
}

namespace {

Tensor reduce_axis(OpKind kind, const Tensor& a, std::ptrdiff_t axis, bool keepdim, double scale) {
    const std::size_t ax = normalize_axis(kind, axis, a.rank());
    const AxisSplit s = split_at(a.shape(), ax);
    Shape out_shape = a.shape();
    if (keepdim) {
        out_shape[ax] = 1;
    } else {
        out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(ax));
        if (out_shape.empty()) out_shape.push_back(1);
    }
    const auto x = a.data();
    std::vector<double> out(s.outer * s.inner, 0.0);
    for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t j = 0; j < s.len; ++j)
            for (std::size_t in = 0; in < s.inner; ++in)
                out[o * s.inner + in] += x[(o * s.len + j) * s.inner + in];
    if (scale != 1.0)
        for (auto& v : out) v *= scale;
    return detail::make_result(
        kind, std::move(out_shape), std::move(out), {a},
        [s, scale](const Node&, std::span<const double> g, std::span<const std::span<double>> gin) {
            for (std::size_t o = 0; o < s.outer; ++o)
                for (std::size_t j = 0; j < s.len; ++j)
                    for (std::size_t in = 0; in < s.inner; ++in)
                        gin[0][(o * s.len + j) * s.inner + in] += scale * g[o * s.inner + in];
        });
}

Tensor reduce_all(OpKind kind, const Tensor& a, double scale) {
    double total = 0.0;
    for (double v : a.data()) total += v;
    return detail::make_result(
        kind, {1}, {total * scale}, {a},
        [scale](const Node&, std::span<const double> g, std::span<const std::span<double>> gin) {
            const double gv = g[0] * scale;
            for (auto& v : gin[0]) v += gv;
        });
}

} // namespace

Tensor sum(const Tensor& a, std::ptrdiff_t axis, bool keepdim) {
    return reduce_axis(OpKind::sum, a, axis, keepdim, 1.0);
}

Tensor mean(const Tensor& a, std::ptrdiff_t axis, bool keepdim) {
    const std::size_t ax = normalize_axis(OpKind::mean, axis, a.rank());
    return reduce_axis(OpKind::mean, a, axis, keepdim, 1.0 / static_cast<double>(a.shape()[ax]));
}

Tensor sum(const Tensor& a) { return reduce_all(OpKind::sum, a, 1.0); }

Tensor mean(const Tensor& a) { return reduce_all(OpKind::mean, a, 1.0 / static_cast<double>(a.size())); }

Tensor layer_norm(const Tensor& a, double eps) {
    const std::size_t len = a.shape().back();
    const std::size_t rows = a.size() / len;
    const auto x = a.data();
    std::vector<double> out(x.size());
    auto inv_std = std::make_shared<std::vector<double>>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = x.data() + r * len;
        double mu = 0.0;
        for (std::size_t j = 0; j < len; ++j) mu += row[j];
        mu /= static_cast<double>(len);
        double var = 0.0;
        for (std::size_t j = 0; j < len; ++j) var += (row[j] - mu) * (row[j] - mu);
        var /= static_cast<double>(len);
        const double is = 1.0 / std::sqrt(var + eps);
        (*inv_std)[r] = is;
        for (std::size_t j = 0; j < len; ++j) out[r * len + j] = (row[j] - mu) * is;
    }
    return detail::make_result(
        OpKind::layer_norm, a.shape(), std::move(out), {a},
        [len, rows, inv_std](const Node& self, std::span<const double> g, std::span<const std::span<double>> gin) {
            const auto& y = self.value;
            const double n = static_cast<double>(len);
            for (std::size_t r = 0; r < rows; ++r) {
                double gm = 0.0, gy = 0.0;
                for (std::size_t j = 0; j < len; ++j) {
                    gm += g[r * len + j];
                    gy += g[r * len + j] * y[r * len + j];
                }
                gm /= n;
                gy /= n;
                const double is = (*inv_std)[r];
                for (std::size_t j = 0; j < len; ++j) {
                    const std::size_t i = r * len + j;
                    gin[0][i] += is * (g[i] - gm - y[i] * gy);
                }
            }
        });
}

BatchNormState::BatchNormState(std::size_t features)
    : running_mean(Tensor::zeros({features})), running_var(Tensor::full({features}, 1.0)) {}

Tensor batch_norm(const Tensor& a, BatchNormState& state, bool training) {
    const std::size_t f = a.shape().back();
    if (state.running_mean.size() != f) {
        shape_fail(OpKind::batch_norm, a.shape(), state.running_mean.shape(), "feature count differs");
    }
    const std::size_t rows = a.size() / f;
    const auto x = a.data();
    std::vector<double> out(x.size());
    auto inv_std = std::make_shared<std::vector<double>>(f);

    if (!training) {
        const auto rm = state.running_mean.data();
        const auto rv = state.running_var.data();
        for (std::size_t c = 0; c < f; ++c) (*inv_std)[c] = 1.0 / std::sqrt(rv[c] + state.eps);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < f; ++c) out[r * f + c] = (x[r * f + c] - rm[c]) * (*inv_std)[c];
        return detail::make_result(
            OpKind::batch_norm, a.shape(), std::move(out), {a},
            [f, rows, inv_std](const Node&, std::span<const double> g, std::span<const std::span<double>> gin) {
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < f; ++c) gin[0][r * f + c] += g[r * f + c] * (*inv_std)[c];
            });
    }

    std::vector<double> mu(f, 0.0), var(f, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < f; ++c) mu[c] += x[r * f + c];
    for (auto& m : mu) m /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < f; ++c) {
            const double d = x[r * f + c] - mu[c];
            var[c] += d * d;
        }
    for (auto& v : var) v /= static_cast<double>(rows);
    for (std::size_t c = 0; c < f; ++c) (*inv_std)[c] = 1.0 / std::sqrt(var[c] + state.eps);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < f; ++c) out[r * f + c] = (x[r * f + c] - mu[c]) * (*inv_std)[c];

    auto rm = state.running_mean.mutable_data();
    auto rv = state.running_var.mutable_data();
    for (std::size_t c = 0; c < f; ++c) {
        rm[c] = state.momentum * rm[c] + (1.0 - state.momentum) * mu[c];
        rv[c] = state.momentum * rv[c] + (1.0 - state.momentum) * var[c];
    }

    return detail::make_result(
        OpKind::batch_norm, a.shape(), std::move(out), {a},
        [f, rows, inv_std](const Node& self, std::span<const double> g, std::span<const std::span<double>> gin) {
            const auto& y = self.value;
            const double n = static_cast<double>(rows);
            std::vector<double> gm(f, 0.0), gy(f, 0.0);
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < f; ++c) {
                    gm[c] += g[r * f + c];
                    gy[c] += g[r * f + c] * y[r * f + c];
                }
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < f; ++c) {
                    const std::size_t i = r * f + c;
                    gin[0][i] += (*inv_std)[c] * (g[i] - gm[c] / n - y[i] * gy[c] / n);
                }
        });
}

Tensor concat(std::span<const Tensor> parts, std::ptrdiff_t axis) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    const Shape& first = parts[0].shape();
    const std::size_t ax = normalize_axis(OpKind::concat, axis, first.size());
    Shape out_shape = first;
    out_shape[ax] = 0;
    std::vector<std::size_t> lens;
    for (const auto& p : parts) {
        const Shape& s = p.shape();
        bool ok = s.size() == first.size();
        for (std::size_t i = 0; ok && i < s.size(); ++i) ok = i == ax || s[i] == first[i];
        if (!ok) shape_fail(OpKind::concat, first, s, "non-concat axes differ");
        lens.push_back(s[ax]);
        out_shape[ax] += s[ax];
    }
    const AxisSplit os = split_at(out_shape, ax);
    std::vector<double> out(numel(out_shape));
    std::size_t offset = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        const auto x = parts[p].data();
        const std::size_t chunk = lens[p] * os.inner;
        for (std::size_t o = 0; o < os.outer; ++o)
            std::copy_n(x.data() + o * chunk, chunk, out.data() + o * os.len * os.inner + offset * os.inner);
        offset += lens[p];
    }
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    return detail::make_result(
        OpKind::concat, std::move(out_shape), std::move(out), std::move(inputs),
        [os, lens](const Node&, std::span<const double> g, std::span<const std::span<double>> gin) {
            std::size_t offset = 0;
            for (std::size_t p = 0; p < lens.size(); ++p) {
                const std::size_t chunk = lens[p] * os.inner;
                if (!gin[p].empty()) {
                    for (std::size_t o = 0; o < os.outer; ++o) {
                        const double* src = g.data() + o * os.len * os.inner + offset * os.inner;
                        double* dst = gin[p].data() + o * chunk;
                        for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
                    }
                }
                offset += lens[p];
            }
        });
}

Tensor concat(std::initializer_list<Tensor> parts, std::ptrdiff_t axis) {
    return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
}

Tensor reshape(const Tensor& a, const Shape& shape) {
    if (numel(shape) != a.size()) shape_fail(OpKind::reshape, a.shape(), shape, "element counts differ");
    return detail::make_result(
        OpKind::reshape, shape, a.to_vector(), {a},
        [](const Node&, std::span<const double> g, std::span<const std::span<double>> gin) {
            for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i];
        });
}

Tensor permute(const Tensor& a, const std::vector<std::size_t>& order) {
    const std::size_t rank = a.rank();
    std::vector<bool> seen(rank, false);
    if (order.size() != rank) shape_fail(OpKind::permute, a.shape(), Shape(order.begin(), order.end()), "bad order");
    for (auto o : order) {
        if (o >= rank || seen[o]) shape_fail(OpKind::permute, a.shape(), Shape(order.begin(), order.end()), "bad order");
        seen[o] = true;
    }
    std::vector<std::size_t> in_strides(rank, 1);
    for (std::size_t i = rank - 1; i-- > 0;) in_strides[i] = in_strides[i + 1] * a.shape()[i + 1];
    Shape out_shape(rank);
    std::vector<std::size_t> strides(rank);
    for (std::size_t i = 0; i < rank; ++i) {
        out_shape[i] = a.shape()[order[i]];
        strides[i] = in_strides[order[i]];
    }
    auto src = std::make_shared<std::vector<std::size_t>>(numel(out_shape));
    {
        std::vector<std::size_t> idx(rank, 0);
        std::size_t off = 0;
        for (std::size_t flat = 0; flat < src->size(); ++flat) {
            (*src)[flat] = off;
            for (std::size_t i = rank; i-- > 0;) {
                if (++idx[i] < out_shape[i]) {
                    off += strides[i];
                    break;
                }
                off -= strides[i] * (out_shape[i] - 1);
                idx[i] = 0;
            }
        }
    }
    const auto x = a.data();
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[(*src)[i]];
    return detail::make_result(
        OpKind::permute, std::move(out_shape), std::move(out), {a},
        [src](const Node&, std::span<const double> g, std::span<const std::span<double>> gin) {
            for (std::size_t i = 0; i < g.size(); ++i) gin[0][(*src)[i]] += g[i];
        });
}

Tensor transpose(const Tensor& a) {
    if (a.rank() < 2) throw ShapeError("transpose: rank " + std::to_string(a.rank()) + " < 2");
    std::vector<std::size_t> order(a.rank());
    std::iota(order.begin(), order.end(), 0);
    std::swap(order[a.rank() - 1], order[a.rank() - 2]);
    return permute(a, order);
}

Tensor broadcast_to(const Tensor& a, const Shape& shape) {
    if (broadcast_shape(OpKind::broadcast_to, a.shape(), shape) != shape) {
        shape_fail(OpKind::broadcast_to, a.shape(), shape, "target is not a broadcast of the input");
    }
    auto src = std::make_shared<std::vector<std::size_t>>(broadcast_offsets(a.shape(), shape));
    const auto x = a.data();
    std::vector<double> out(src->size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[(*src)[i]];
    return detail::make_result(
        OpKind::broadcast_to, shape, std::move(out), {a},
        [src](const Node&, std::span<const double> g, std::span<const std::span<double>> gin) {
            for (std::size_t i = 0; i < g.size(); ++i) gin[0][(*src)[i]] += g[i];
        });
}

Tensor cosine_similarity(const Tensor& a, const Tensor& b, std::ptrdiff_t axis) {
    static constexpr double kEps = 1e-12;
    if (a.shape() != b.shape()) shape_fail(OpKind::cosine_similarity, a.shape(), b.shape());
    const std::size_t ax = normalize_axis(OpKind::cosine_similarity, axis, a.rank());
    const AxisSplit s = split_at(a.shape(), ax);
    Shape out_shape = a.shape();
    out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(ax));
    if (out_shape.empty()) out_shape.push_back(1);

    const auto x = a.data();
    const auto y = b.data();
    const std::size_t n = s.outer * s.inner;
    std::vector<double> out(n);
    // Per output element: |a|, |b|.
    auto norms = std::make_shared<std::vector<double>>(2 * n);
    for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t in = 0; in < s.inner; ++in) {
            double dot = 0.0, na = 0.0, nb = 0.0;
            for (std::size_t j = 0; j < s.len; ++j) {
                const std::size_t i = (o * s.len + j) * s.inner + in;
                dot += x[i] * y[i];
                na += x[i] * x[i];
                nb += y[i] * y[i];
            }
            na = std::sqrt(na);
            nb = std::sqrt(nb);
            const std::size_t r = o * s.inner + in;
            (*norms)[2 * r] = na;
            (*norms)[2 * r + 1] = nb;
            out[r] = dot / (std::max(na, kEps) * std::max(nb, kEps));
        }
    }
    return detail::make_result(
        OpKind::cosine_similarity, std::move(out_shape), std::move(out), {a, b},
        [s, norms](const Node& self, std::span<const double> g, std::span<const std::span<double>> gin) {
            const auto& x = self.inputs[0]->value;
            const auto& y = self.inputs[1]->value;
            for (std::size_t o = 0; o < s.outer; ++o) {
                for (std::size_t in = 0; in < s.inner; ++in) {
                    const std::size_t r = o * s.inner + in;
                    const double na = (*norms)[2 * r];
                    const double nb = (*norms)[2 * r + 1];
                    const double c = self.value[r];
                    // A clamped norm is constant, so its direction term vanishes.
                    const double pa = 1.0 / std::max(na, kEps);
                    const double pb = 1.0 / std::max(nb, kEps);
                    const double ka = na > kEps ? c / (na * na) : 0.0;
                    const double kb = nb > kEps ? c / (nb * nb) : 0.0;
                    for (std::size_t j = 0; j < s.len; ++j) {
                        const std::size_t i = (o * s.len + j) * s.inner + in;
                        if (!gin[0].empty()) gin[0][i] += g[r] * (y[i] * pa * pb - ka * x[i]);
                        if (!gin[1].empty()) gin[1][i] += g[r] * (x[i] * pa * pb - kb * y[i]);
                    }
                }
            }
        });
}

namespace {

// Column buffer (Cin*k*k, H*W) for one image.
void im2col(const double* img, std::size_t cin, std::size_t h, std::size_t w, std::size_t k, double* cols) {
    const auto pad = static_cast<std::ptrdiff_t>(k / 2);
    const std::size_t hw = h * w;
    for (std::size_t c = 0; c < cin; ++c)
        for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx) {
                double* row = cols + ((c * k + ky) * k + kx) * hw;
                for (std::size_t yy = 0; yy < h; ++yy) {
                    const auto sy = static_cast<std::ptrdiff_t>(yy) + static_cast<std::ptrdiff_t>(ky) - pad;
                    for (std::size_t xx = 0; xx < w; ++xx) {
                        const auto sx = static_cast<std::ptrdiff_t>(xx) + static_cast<std::ptrdiff_t>(kx) - pad;
                        const bool inside = sy >= 0 && sy < static_cast<std::ptrdiff_t>(h) && sx >= 0 &&
                                            sx < static_cast<std::ptrdiff_t>(w);
                        row[yy * w + xx] = inside ? img[(c * h + static_cast<std::size_t>(sy)) * w +
                                                        static_cast<std::size_t>(sx)]
                                                  : 0.0;
                    }
                }
            }
}

void col2im_add(const double* cols, std::size_t cin, std::size_t h, std::size_t w, std::size_t k, double* img) {
    const auto pad = static_cast<std::ptrdiff_t>(k / 2);
    const std::size_t hw = h * w;
    for (std::size_t c = 0; c < cin; ++c)
        for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx) {
                const double* row = cols + ((c * k + ky) * k + kx) * hw;
                for (std::size_t yy = 0; yy < h; ++yy) {
                    const auto sy = static_cast<std::ptrdiff_t>(yy) + static_cast<std::ptrdiff_t>(ky) - pad;
                    if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
                    for (std::size_t xx = 0; xx < w; ++xx) {
                        const auto sx = static_cast<std::ptrdiff_t>(xx) + static_cast<std::ptrdiff_t>(kx) - pad;
                        if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w)) continue;
                        img[(c * h + static_cast<std::size_t>(sy)) * w + static_cast<std::size_t>(sx)] +=
                            row[yy * w + xx];
                    }
                }
            }
}

} // namespace

Tensor conv2d(const Tensor& x, const Tensor& w) {
    if (x.rank() != 4 || w.rank() != 4) shape_fail(OpKind::conv2d, x.shape(), w.shape(), "expected rank-4 operands");
    const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::size_t cout = w.dim(0), k = w.dim(2);
    if (w.dim(1) != cin || w.dim(3) != k || k % 2 == 0) {
        shape_fail(OpKind::conv2d, x.shape(), w.shape(), "kernel must be (Cout, Cin, k, k) with odd k");
    }
    const std::size_t hw = h * wd;
    const std::size_t ck = cin * k * k;
    std::vector<double> out(n * cout * hw);
    std::vector<double> cols(ck * hw);
    ConstMap wm(w.data().data(), cout, ck);
    for (std::size_t i = 0; i < n; ++i) {
        im2col(x.data().data() + i * cin * hw, cin, h, wd, k, cols.data());
        MutMap(out.data() + i * cout * hw, cout, hw).noalias() = wm * ConstMap(cols.data(), ck, hw);
    }
    return detail::make_result(
        OpKind::conv2d, {n, cout, h, wd}, std::move(out), {x, w},
        [n, cin, h, wd, cout, k, hw, ck](const Node& self, std::span<const double> g,
                                         std::span<const std::span<double>> gin) {
            const double* xv = self.inputs[0]->value.data();
            ConstMap wm(self.inputs[1]->value.data(), cout, ck);
            std::vector<double> cols(ck * hw);
            std::vector<double> dcols(ck * hw);
            for (std::size_t i = 0; i < n; ++i) {
                ConstMap gm(g.data() + i * cout * hw, cout, hw);
                if (!gin[1].empty()) {
                    im2col(xv + i * cin * hw, cin, h, wd, k, cols.data());
                    MutMap(gin[1].data(), cout, ck).noalias() += gm * ConstMap(cols.data(), ck, hw).transpose();
                }
                if (!gin[0].empty()) {
                    MutMap(dcols.data(), ck, hw).noalias() = wm.transpose() * gm;
                    col2im_add(dcols.data(), cin, h, wd, k, gin[0].data() + i * cin * hw);
                }
            }
        });
}

Tensor avg_pool2(const Tensor& x) {
    if (x.rank() != 4 || x.dim(2) % 2 || x.dim(3) % 2) {
        throw ShapeError("avg-pool2: expected (N, C, H, W) with even H and W, got " + shape_str(x.shape()));
    }
    const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::size_t oh = h / 2, ow = w / 2;
    const auto v = x.data();
    std::vector<double> out(planes * oh * ow);
    for (std::size_t p = 0; p < planes; ++p)
        for (std::size_t yy = 0; yy < oh; ++yy)
            for (std::size_t xx = 0; xx < ow; ++xx) {
                const double* base = v.data() + p * h * w + 2 * yy * w + 2 * xx;
                out[(p * oh + yy) * ow + xx] = 0.25 * (base[0] + base[1] + base[w] + base[w + 1]);
            }
    return detail::make_result(
        OpKind::avg_pool2, {x.dim(0), x.dim(1), oh, ow}, std::move(out), {x},
        [planes, h, w, oh, ow](const Node&, std::span<const double> g, std::span<const std::span<double>> gin) {
            for (std::size_t p = 0; p < planes; ++p)
                for (std::size_t yy = 0; yy < oh; ++yy)
                    for (std::size_t xx = 0; xx < ow; ++xx) {
                        const double gv = 0.25 * g[(p * oh + yy) * ow + xx];
                        double* base = gin[0].data() + p * h * w + 2 * yy * w + 2 * xx;
                        base[0] += gv;
                        base[1] += gv;
                        base[w] += gv;
                        base[w + 1] += gv;
                    }
        });
}

Tensor upsample2(const Tensor& x) {
    if (x.rank() != 4) throw ShapeError("upsample2: expected (N, C, H, W), got " + shape_str(x.shape()));
    const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::size_t oh = 2 * h, ow = 2 * w;
    const auto v = x.data();
    std::vector<double> out(planes * oh * ow);
    for (std::size_t p = 0; p < planes; ++p)
        for (std::size_t yy = 0; yy < oh; ++yy)
            for (std::size_t xx = 0; xx < ow; ++xx)
                out[(p * oh + yy) * ow + xx] = v[(p * h + yy / 2) * w + xx / 2];
    return detail::make_result(
        OpKind::upsample2, {x.dim(0), x.dim(1), oh, ow}, std::move(out), {x},
        [planes, h, w, oh, ow](const Node&, std::span<const double> g, std::span<const std::span<double>> gin) {
            for (std::size_t p = 0; p < planes; ++p)
                for (std::size_t yy = 0; yy < oh; ++yy)
                    for (std::size_t xx = 0; xx < ow; ++xx)
                        gin[0][(p * h + yy / 2) * w + xx / 2] += g[(p * oh + yy) * ow + xx];
        });
}

} // namespace eegdiff::nd
