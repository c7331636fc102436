#pragma once

#include <map>
#include <string>
#include <vector>

#include "eegdiff/nd/tensor.hpp"

namespace eegdiff::nd {

/// Named model state. Parameters are trainable leaves; buffers (e.g. running
/// statistics) are persisted but never optimized. Handles alias the tensors
/// held by the owning module, so in-place updates are visible to both.
class ParamStore {
public:
    Tensor add(const std::string& name, Tensor tensor);
    Tensor add_buffer(const std::string& name, Tensor tensor);

    bool contains(const std::string& name) const;
    bool is_buffer(const std::string& name) const;
    const Tensor& at(const std::string& name) const;

    /// Sorted parameter names (buffers excluded).
    std::vector<std::string> parameter_names() const;
    /// Parameters and buffers, sorted by name.
    const std::map<std::string, Tensor>& entries() const { return entries_; }

    std::size_t parameter_count() const;
    void set_requires_grad(bool flag);

    /// Copy of every value, for audits and rollbacks.
    std::map<std::string, std::vector<double>> snapshot() const;

    /// Copies values into the existing tensors. Every stored name must be
    /// present with an identical shape; the error names the offending tensor.
    void assign(const std::map<std::string, Tensor>& values);

private:
    std::map<std::string, Tensor> entries_;
    std::map<std::string, bool> buffer_flags_;
};

} // namespace eegdiff::nd
