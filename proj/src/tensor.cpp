#include "octmesh/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace octmesh {

Tensor Tensor::zeros(std::vector<int> shape) {
    Tensor t;
    t.shape = std::move(shape);
    t.data.assign(static_cast<std::size_t>(t.size()), 0.0);
    return t;
}

Tensor Tensor::full(std::vector<int> shape, double value) {
    Tensor t = zeros(std::move(shape));
    for (double& v : t.data) v = value;
    return t;
}

Tensor Tensor::row(std::vector<double> values) {
    Tensor t;
    t.shape = {1, static_cast<int>(values.size())};
    t.data = std::move(values);
    return t;
}

Tensor Tensor::vec(std::vector<double> values) {
    Tensor t;
    t.shape = {static_cast<int>(values.size())};
    t.data = std::move(values);
    return t;
}

Tensor Tensor::identity(int n) {
    Tensor t = zeros({n, n});
    for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

Tensor Tensor::xavier(int fan_in, int fan_out, Rng& rng) {
    Tensor t = zeros({fan_in, fan_out});
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& v : t.data) v = rng.next_range(-limit, limit);
    return t;
}

std::string Tensor::shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i)
        s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
}

Param& ParamStore::add(const std::string& name, Tensor init, bool requires_grad) {
    if (index_.count(name)) throw std::logic_error("duplicate parameter name '" + name + "'");
    index_[name] = params_.size();
    Param p;
    p.name = name;
    p.grad = Tensor::zeros(init.shape);
    p.value = std::move(init);
    p.requires_grad = requires_grad;
    params_.push_back(std::move(p));
    return params_.back();
}

Param& ParamStore::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::logic_error("unknown parameter '" + name + "'");
    return params_[it->second];
}

const Param& ParamStore::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::logic_error("unknown parameter '" + name + "'");
    return params_[it->second];
}

void ParamStore::zero_grad() {
    for (Param& p : params_)
        for (double& g : p.grad.data) g = 0.0;
    has_new_grads_ = false;
}

void ParamStore::set_requires_grad_prefix(const std::string& prefix, bool requires_grad) {
    for (Param& p : params_)
        if (p.name.rfind(prefix, 0) == 0) p.requires_grad = requires_grad;
}

}  // namespace octmesh
