#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <unordered_map>
#include <vector>

#include "octmesh/tensor.hpp"

namespace octmesh {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid until Tape::clear().
class Var {
  public:
    Var() = default;
    Var(Tape* t, int id) : tape_(t), id_(id) {}
    const Tensor& value() const;
    Tape* tape() const { return tape_; }
    int id() const { return id_; }
    bool valid() const { return tape_ != nullptr; }

  private:
    Tape* tape_ = nullptr;
    int id_ = -1;
};

// Define-by-run reverse-mode tape. Every op records its output value plus a
// closure that scatters the output gradient onto its inputs; backward() walks
// nodes in reverse creation order (a topological order by construction).
// A tape belongs to one thread; clear() between steps reuses its storage.
class Tape {
  public:
    struct Node {
        Tensor value;
        std::vector<double> grad;  // allocated on demand during backward
        bool touched = false;
        const char* op = "leaf";
        Param* param = nullptr;
        std::function<void(Tape&)> backward;
    };

    // Leaf with no gradient path.
    Var constant(Tensor value);
    // Leaf bound to a parameter; repeated calls for the same Param reuse the
    // node. Gradients accumulate into param.grad (unless requires_grad is off).
    Var param(Param& p);
    // Unbound differentiable leaf (tests, probes); read its grad after backward.
    Var leaf(Tensor value);

    // loss must be scalar. Accumulates into bound ParamStore grads and marks
    // the stores that received gradients.
    void backward(Var loss, ParamStore* store = nullptr);

    const Tensor& value(int id) const { return nodes_[id].value; }
    const std::vector<double>& grad(Var v) const { return nodes_[v.id()].grad; }

    void clear();
    std::size_t size() const { return nodes_.size(); }

    // --- internal op plumbing ---
    int push(Tensor value, std::function<void(Tape&)> bw, const char* op_name);
    Node& node(int id) { return nodes_[id]; }
    // Zero-initialized gradient buffer of node `id`, marked as carrying signal.
    double* grad_of(int id);

  private:
    std::deque<Node> nodes_;  // deque: node references stay valid as the tape grows
    std::unordered_map<const Param*, int> param_nodes_;
};

// --- op suite -------------------------------------------------------------
Var add(Var a, Var b);                 // same shape
Var sub(Var a, Var b);
Var mul(Var a, Var b);                 // elementwise
Var scalar_mul(Var a, double c);
Var matmul(Var a, Var b);              // (m x k) . (k x n)
Var matmul_nt(Var a, Var b);           // (m x k) . (n x k)^T
Var linear(Var x, Var w, Var b);       // x.w + bias broadcast over rows
Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
// index -1 produces a zero row and receives no gradient
Var gather_rows(Var a, std::vector<int> indices);
// row i of `a` lands at indices[i] (accumulating; -1 drops the row)
Var scatter_rows(Var a, std::vector<int> indices, int out_rows);
Var slice_cols(Var a, int c0, int c1);
Var mean_axis(Var a, int axis);        // 2-D only; axis 0 -> [cols], axis 1 -> [rows]
Var sum_all(Var a);                    // scalar
Var mean_all(Var a);                   // scalar
Var reshape(Var a, std::vector<int> shape);
// Population variance over the last axis, then per-channel affine.
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
Var softmax(Var x);                    // last axis
// Rows softmax over valid columns only; invalid columns get exactly 0.
Var masked_softmax(Var scores, std::vector<std::uint8_t> col_valid);
Var gelu(Var x);                       // exact erf form
// out[i] = x[i] + bias + sum over occupied stencil offsets o of
// kernel[o] (elementwise) x[neighbors[i*27+o]]. neighbors entries < 0 are
// treated as empty (zero padding).
Var cpe_conv(Var x, Var kernel, Var bias, std::vector<int> neighbors);
Var softmax_cross_entropy(Var logits, int label);  // logits [C] or [1 x C]
// Mean over rows of the per-row cross entropy; one label per row.
Var softmax_cross_entropy_rows(Var logits, std::vector<int> labels);

}  // namespace octmesh
