#include "eegdiff/nd/params.hpp"

#include <algorithm>
#include <stdexcept>

namespace eegdiff::nd {

Tensor ParamStore::add(const std::string& name, Tensor tensor) {
    if (entries_.count(name)) throw std::invalid_argument("duplicate parameter name '" + name + "'");
    tensor.set_requires_grad(true);
    entries_.emplace(name, tensor);
    buffer_flags_.emplace(name, false);
    return tensor;
}

Tensor ParamStore::add_buffer(const std::string& name, Tensor tensor) {
    if (entries_.count(name)) throw std::invalid_argument("duplicate parameter name '" + name + "'");
    tensor.set_requires_grad(false);
    entries_.emplace(name, tensor);
    buffer_flags_.emplace(name, true);
    return tensor;
}

bool ParamStore::contains(const std::string& name) const { return entries_.count(name) != 0; }

bool ParamStore::is_buffer(const std::string& name) const {
    auto it = buffer_flags_.find(name);
    return it != buffer_flags_.end() && it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::out_of_range("unknown parameter '" + name + "'");
    return it->second;
}

std::vector<std::string> ParamStore::parameter_names() const {
    std::vector<std::string> names;
    for (const auto& [name, _] : entries_)
        if (!is_buffer(name)) names.push_back(name);
    return names;
}

std::size_t ParamStore::parameter_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : entries_)
        if (!is_buffer(name)) n += t.size();
    return n;
}

void ParamStore::set_requires_grad(bool flag) {
    for (auto& [name, t] : entries_)
        if (!is_buffer(name)) {
            Tensor handle = t;
            handle.set_requires_grad(flag);
        }
}

std::map<std::string, std::vector<double>> ParamStore::snapshot() const {
    std::map<std::string, std::vector<double>> out;
    for (const auto& [name, t] : entries_) out.emplace(name, t.to_vector());
    return out;
}

void ParamStore::assign(const std::map<std::string, Tensor>& values) {
    for (const auto& [name, target] : entries_) {
        auto it = values.find(name);
        if (it == values.end()) throw std::runtime_error("checkpoint is missing tensor '" + name + "'");
        if (it->second.shape() != target.shape()) {
            throw ShapeError("shape mismatch for tensor '" + name + "': checkpoint " + shape_str(it->second.shape()) +
                             " vs model " + shape_str(target.shape()));
        }
    }
    for (auto& [name, target] : entries_) {
        Tensor handle = target;
        const auto src = values.at(name).data();
        std::copy(src.begin(), src.end(), handle.mutable_data().begin());
    }
}

} // namespace eegdiff::nd
