#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "octmesh/rng.hpp"

namespace octmesh {

// Dense row-major f64 tensor. Rank 1 or 2 everywhere in this codebase.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {}

    static Tensor zeros(std::vector<int> shape);
    static Tensor full(std::vector<int> shape, double value);
    static Tensor row(std::vector<double> values);            // shape {1, n}
    static Tensor vec(std::vector<double> values);            // shape {n}
    static Tensor identity(int n);
    // Xavier-uniform in [-sqrt(6/(fan_in+fan_out)), +...), shape {fan_in, fan_out}.
    static Tensor xavier(int fan_in, int fan_out, Rng& rng);

    std::int64_t size() const {
        std::int64_t n = 1;
        for (int d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }
    int rows() const { return shape.size() == 2 ? shape[0] : 1; }
    int cols() const { return shape.empty() ? 0 : shape.back(); }
    double& at(int i, int j) { return data[std::size_t(i) * cols() + j]; }
    double at(int i, int j) const { return data[std::size_t(i) * cols() + j]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    std::string shape_str() const;

    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.shape == b.shape && a.data == b.data;
    }
};

// A named trainable tensor with its gradient accumulator.
struct Param {
    std::string name;
    Tensor value;
    Tensor grad;
    bool requires_grad = true;
};

// Named parameters in stable insertion order. References returned by add()
// and at() stay valid as the store grows.
class ParamStore {
  public:
    Param& add(const std::string& name, Tensor init, bool requires_grad = true);
    Param& at(const std::string& name);
    const Param& at(const std::string& name) const;
    bool has(const std::string& name) const { return index_.count(name) != 0; }
    std::size_t size() const { return params_.size(); }

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    void zero_grad();
    // Set by Tape::backward; optimizer steps consume and clear it.
    bool has_new_grads() const { return has_new_grads_; }
    void mark_new_grads() { has_new_grads_ = true; }
    void clear_new_grads() { has_new_grads_ = false; }

    // Freeze/unfreeze by name prefix (e.g. all encoder weights).
    void set_requires_grad_prefix(const std::string& prefix, bool requires_grad);

  private:
    std::deque<Param> params_;
    std::map<std::string, std::size_t> index_;
    bool has_new_grads_ = false;
};

}  // namespace octmesh
