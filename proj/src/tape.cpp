#include "octmesh/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "octmesh/errors.hpp"

namespace octmesh {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void check_finite(const Tensor& t, const char* op) {
    for (double v : t.data)
        if (!std::isfinite(v))
            throw NumericError(std::string("non-finite value produced by op '") + op + "'");
}

[[noreturn]] void shape_fail(const char* op, const std::string& detail) {
    throw NumericError(std::string("shape mismatch in op '") + op + "': " + detail);
}

void require(bool ok, const char* op, const std::string& detail) {
    if (!ok) shape_fail(op, detail);
}

Tape* common_tape(Var a, Var b) {
    if (a.tape() != b.tape() || !a.valid())
        throw std::logic_error("operands belong to different tapes");
    return a.tape();
}

// C[m x n] += A[m x k] . B[k x n]
void mm_acc(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + std::size_t(i) * k;
        double* ci = c + std::size_t(i) * n;
        for (int p = 0; p < k; ++p) {
            const double av = ai[p];
            const double* bp = b + std::size_t(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

// C[m x n] += A[m x k] . B[n x k]^T
void mm_nt_acc(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + std::size_t(i) * k;
        for (int j = 0; j < n; ++j) {
            const double* bj = b + std::size_t(j) * k;
            double acc = 0;
            for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
            c[std::size_t(i) * n + j] += acc;
        }
    }
}

// C[m x n] += A[k x m]^T . B[k x n]
void mm_tn_acc(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int p = 0; p < k; ++p) {
        const double* ap = a + std::size_t(p) * m;
        const double* bp = b + std::size_t(p) * n;
        for (int i = 0; i < m; ++i) {
            const double av = ap[i];
            if (av == 0.0) continue;
            double* ci = c + std::size_t(i) * n;
            for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

}  // namespace

const Tensor& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, false, "constant", nullptr, nullptr});
    return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::leaf(Tensor value) { return constant(std::move(value)); }

Var Tape::param(Param& p) {
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return Var(this, it->second);
    nodes_.push_back(Node{p.value, {}, false, "param", &p, nullptr});
    const int id = static_cast<int>(nodes_.size()) - 1;
    param_nodes_[&p] = id;
    return Var(this, id);
}

int Tape::push(Tensor value, std::function<void(Tape&)> bw, const char* op_name) {
    check_finite(value, op_name);
    nodes_.push_back(Node{std::move(value), {}, false, op_name, nullptr, std::move(bw)});
    return static_cast<int>(nodes_.size()) - 1;
}

double* Tape::grad_of(int id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) n.grad.assign(n.value.data.size(), 0.0);
    n.touched = true;
    return n.grad.data();
}

void Tape::backward(Var loss, ParamStore* store) {
    if (loss.tape() != this) throw std::logic_error("loss lives on a different tape");
    if (nodes_[loss.id()].value.size() != 1)
        throw std::logic_error("backward requires a scalar loss, got shape " +
                               nodes_[loss.id()].value.shape_str());
    grad_of(loss.id())[0] = 1.0;
    for (int id = loss.id(); id >= 0; --id) {
        Node& n = nodes_[id];
        if (!n.touched) continue;
        if (n.backward) n.backward(*this);
        if (n.param && n.param->requires_grad) {
            double* g = n.param->grad.data.data();
            for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i];
        }
    }
    if (store) store->mark_new_grads();
}

void Tape::clear() {
    nodes_.clear();
    param_nodes_.clear();
}

// --- elementwise and scalar ------------------------------------------------

Var add(Var a, Var b) {
    Tape* t = common_tape(a, b);
    require(a.value().same_shape(b.value()), "add",
            a.value().shape_str() + " vs " + b.value().shape_str());
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.value().data[i];
    int id = t->push(std::move(out), nullptr, "add");
    t->node(id).backward = [id, aid = a.id(), bid = b.id()](Tape& tp) {
        const auto& g = tp.node(id).grad;
        double* ga = tp.grad_of(aid);
        double* gb = tp.grad_of(bid);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i];
            gb[i] += g[i];
        }
    };
    return Var(t, id);
}

Var sub(Var a, Var b) {
    Tape* t = common_tape(a, b);
    require(a.value().same_shape(b.value()), "sub",
            a.value().shape_str() + " vs " + b.value().shape_str());
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.value().data[i];
    int id = t->push(std::move(out), nullptr, "sub");
    t->node(id).backward = [id, aid = a.id(), bid = b.id()](Tape& tp) {
        const auto& g = tp.node(id).grad;
        double* ga = tp.grad_of(aid);
        double* gb = tp.grad_of(bid);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i];
            gb[i] -= g[i];
        }
    };
    return Var(t, id);
}

Var mul(Var a, Var b) {
    Tape* t = common_tape(a, b);
    require(a.value().same_shape(b.value()), "mul",
            a.value().shape_str() + " vs " + b.value().shape_str());
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.value().data[i];
    int id = t->push(std::move(out), nullptr, "mul");
    t->node(id).backward = [id, aid = a.id(), bid = b.id()](Tape& tp) {
        const auto& g = tp.node(id).grad;
        const auto& av = tp.value(aid).data;
        const auto& bv = tp.value(bid).data;
        double* ga = tp.grad_of(aid);
        double* gb = tp.grad_of(bid);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i] * bv[i];
            gb[i] += g[i] * av[i];
        }
    };
    return Var(t, id);
}

Var scalar_mul(Var a, double c) {
    Tape* t = a.tape();
    Tensor out = a.value();
    for (double& v : out.data) v *= c;
    int id = t->push(std::move(out), nullptr, "scalar_mul");
    t->node(id).backward = [id, aid = a.id(), c](Tape& tp) {
        const auto& g = tp.node(id).grad;
        double* ga = tp.grad_of(aid);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
    };
    return Var(t, id);
}

// --- matrix products ---------------------------------------------------------

Var matmul(Var a, Var b) {
    Tape* t = common_tape(a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    require(av.shape.size() == 2 && bv.shape.size() == 2 && av.shape[1] == bv.shape[0], "matmul",
            av.shape_str() + " . " + bv.shape_str());
    const int m = av.shape[0], k = av.shape[1], n = bv.shape[1];
    Tensor out = Tensor::zeros({m, n});
    mm_acc(av.data.data(), bv.data.data(), out.data.data(), m, k, n);
    int id = t->push(std::move(out), nullptr, "matmul");
    t->node(id).backward = [id, aid = a.id(), bid = b.id(), m, k, n](Tape& tp) {
        const double* g = tp.node(id).grad.data();
        mm_nt_acc(g, tp.value(bid).data.data(), tp.grad_of(aid), m, n, k);
        mm_tn_acc(tp.value(aid).data.data(), g, tp.grad_of(bid), k, m, n);
    };
    return Var(t, id);
}

Var matmul_nt(Var a, Var b) {
    Tape* t = common_tape(a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    require(av.shape.size() == 2 && bv.shape.size() == 2 && av.shape[1] == bv.shape[1],
            "matmul_nt", av.shape_str() + " . " + bv.shape_str() + "^T");
    const int m = av.shape[0], k = av.shape[1], n = bv.shape[0];
    Tensor out = Tensor::zeros({m, n});
    mm_nt_acc(av.data.data(), bv.data.data(), out.data.data(), m, k, n);
    int id = t->push(std::move(out), nullptr, "matmul_nt");
    t->node(id).backward = [id, aid = a.id(), bid = b.id(), m, k, n](Tape& tp) {
        const double* g = tp.node(id).grad.data();
        mm_acc(g, tp.value(bid).data.data(), tp.grad_of(aid), m, n, k);
        mm_tn_acc(g, tp.value(aid).data.data(), tp.grad_of(bid), n, m, k);
    };
    return Var(t, id);
}

Var linear(Var x, Var w, Var b) {
    Tape* t = common_tape(x, w);
    common_tape(w, b);
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    const Tensor& bv = b.value();
    require(xv.shape.size() == 2 && wv.shape.size() == 2 && xv.shape[1] == wv.shape[0], "linear",
            xv.shape_str() + " . " + wv.shape_str());
    require(int(bv.size()) == wv.shape[1], "linear",
            "bias " + bv.shape_str() + " for output width " + std::to_string(wv.shape[1]));
    const int m = xv.shape[0], k = xv.shape[1], n = wv.shape[1];
    Tensor out = Tensor::zeros({m, n});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out.data[std::size_t(i) * n + j] = bv.data[j];
    mm_acc(xv.data.data(), wv.data.data(), out.data.data(), m, k, n);
    int id = t->push(std::move(out), nullptr, "linear");
    t->node(id).backward = [id, xid = x.id(), wid = w.id(), bid = b.id(), m, k, n](Tape& tp) {
        const double* g = tp.node(id).grad.data();
        mm_nt_acc(g, tp.value(wid).data.data(), tp.grad_of(xid), m, n, k);
        mm_tn_acc(tp.value(xid).data.data(), g, tp.grad_of(wid), k, m, n);
        double* gb = tp.grad_of(bid);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) gb[j] += g[std::size_t(i) * n + j];
    };
    return Var(t, id);
}

// --- structure ops -----------------------------------------------------------

Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::logic_error("concat_cols of nothing");
    Tape* t = parts[0].tape();
    const int m = parts[0].value().shape[0];
    int total = 0;
    for (const Var& p : parts) {
        require(p.value().shape.size() == 2 && p.value().shape[0] == m, "concat_cols",
                "all parts need identical row counts");
        total += p.value().shape[1];
    }
    Tensor out = Tensor::zeros({m, total});
    std::vector<int> offsets;
    int off = 0;
    for (const Var& p : parts) {
        offsets.push_back(off);
        const Tensor& pv = p.value();
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < pv.shape[1]; ++j) out.at(i, off + j) = pv.at(i, j);
        off += pv.shape[1];
    }
    std::vector<int> ids;
    for (const Var& p : parts) ids.push_back(p.id());
    int id = t->push(std::move(out), nullptr, "concat_cols");
    t->node(id).backward = [id, ids, offsets, m, total](Tape& tp) {
        const double* g = tp.node(id).grad.data();
        for (std::size_t p = 0; p < ids.size(); ++p) {
            double* gp = tp.grad_of(ids[p]);
            const int w = tp.value(ids[p]).shape[1];
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < w; ++j)
                    gp[std::size_t(i) * w + j] += g[std::size_t(i) * total + offsets[p] + j];
        }
    };
    return Var(t, id);
}

Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::logic_error("concat_rows of nothing");
    Tape* t = parts[0].tape();
    const int n = parts[0].value().shape.back();
    int total = 0;
    for (const Var& p : parts) {
        require(p.value().shape.size() == 2 && p.value().shape[1] == n, "concat_rows",
                "all parts need identical column counts");
        total += p.value().shape[0];
    }
    Tensor out = Tensor::zeros({total, n});
    int off = 0;
    std::vector<int> offsets;
    for (const Var& p : parts) {
        offsets.push_back(off);
        const Tensor& pv = p.value();
        std::copy(pv.data.begin(), pv.data.end(), out.data.begin() + std::size_t(off) * n);
        off += pv.shape[0];
    }
    std::vector<int> ids;
    for (const Var& p : parts) ids.push_back(p.id());
    int id = t->push(std::move(out), nullptr, "concat_rows");
    t->node(id).backward = [id, ids, offsets, n](Tape& tp) {
        const double* g = tp.node(id).grad.data();
        for (std::size_t p = 0; p < ids.size(); ++p) {
            double* gp = tp.grad_of(ids[p]);
            const std::size_t count = tp.value(ids[p]).data.size();
            const double* gsrc = g + std::size_t(offsets[p]) * n;
            for (std::size_t i = 0; i < count; ++i) gp[i] += gsrc[i];
        }
    };
    return Var(t, id);
}

Var gather_rows(Var a, std::vector<int> indices) {
    Tape* t = a.tape();
    const Tensor& av = a.value();
    require(av.shape.size() == 2, "gather_rows", "needs a matrix, got " + av.shape_str());
    const int n = av.shape[1], rows = av.shape[0];
    Tensor out = Tensor::zeros({static_cast<int>(indices.size()), n});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const int r = indices[i];
        if (r < 0) continue;
        require(r < rows, "gather_rows", "row index out of range");
        std::copy(av.data.begin() + std::size_t(r) * n, av.data.begin() + std::size_t(r + 1) * n,
                  out.data.begin() + i * n);
    }
    int id = t->push(std::move(out), nullptr, "gather_rows");
    t->node(id).backward = [id, aid = a.id(), idx = std::move(indices), n](Tape& tp) {
        const double* g = tp.node(id).grad.data();
        double* ga = tp.grad_of(aid);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] < 0) continue;
            double* dst = ga + std::size_t(idx[i]) * n;
            const double* src = g + i * n;
            for (int j = 0; j < n; ++j) dst[j] += src[j];
        }
    };
    return Var(t, id);
}

Var scatter_rows(Var a, std::vector<int> indices, int out_rows) {
    Tape* t = a.tape();
    const Tensor& av = a.value();
    require(av.shape.size() == 2, "scatter_rows", "needs a matrix, got " + av.shape_str());
    require(int(indices.size()) == av.shape[0], "scatter_rows",
            "one target index per source row");
    const int n = av.shape[1];
    Tensor out = Tensor::zeros({out_rows, n});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const int r = indices[i];
        if (r < 0) continue;
        require(r < out_rows, "scatter_rows", "target row out of range");
        double* dst = out.data.data() + std::size_t(r) * n;
        const double* src = av.data.data() + i * n;
        for (int j = 0; j < n; ++j) dst[j] += src[j];
    }
    int id = t->push(std::move(out), nullptr, "scatter_rows");
    t->node(id).backward = [id, aid = a.id(), idx = std::move(indices), n](Tape& tp) {
        const double* g = tp.node(id).grad.data();
        double* ga = tp.grad_of(aid);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] < 0) continue;
            const double* src = g + std::size_t(idx[i]) * n;
            double* dst = ga + i * n;
            for (int j = 0; j < n; ++j) dst[j] += src[j];
        }
    };
    return Var(t, id);
}

Var slice_cols(Var a, int c0, int c1) {
    Tape* t = a.tape();
    const Tensor& av = a.value();
    require(av.shape.size() == 2 && 0 <= c0 && c0 < c1 && c1 <= av.shape[1], "slice_cols",
            "range [" + std::to_string(c0) + "," + std::to_string(c1) + ") of " + av.shape_str());
    const int m = av.shape[0], n = av.shape[1], w = c1 - c0;
    Tensor out = Tensor::zeros({m, w});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < w; ++j) out.at(i, j) = av.at(i, c0 + j);
    int id = t->push(std::move(out), nullptr, "slice_cols");
    t->node(id).backward = [id, aid = a.id(), c0, m, n, w](Tape& tp) {
        const double* g = tp.node(id).grad.data();
        double* ga = tp.grad_of(aid);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < w; ++j)
                ga[std::size_t(i) * n + c0 + j] += g[std::size_t(i) * w + j];
    };
    return Var(t, id);
}

// --- reductions ---------------------------------------------------------------

Var mean_axis(Var a, int axis) {
    Tape* t = a.tape();
    const Tensor& av = a.value();
    require(av.shape.size() == 2 && (axis == 0 || axis == 1), "mean_axis",
            "axis " + std::to_string(axis) + " of " + av.shape_str());
    const int m = av.shape[0], n = av.shape[1];
    require(axis == 0 ? m > 0 : n > 0, "mean_axis", "mean over an empty axis");
    Tensor out = Tensor::zeros({axis == 0 ? n : m});
    if (axis == 0) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) out.data[j] += av.at(i, j);
        for (double& v : out.data) v /= m;
    } else {
        for (int i = 0; i < m; ++i) {
            double acc = 0;
            for (int j = 0; j < n; ++j) acc += av.at(i, j);
            out.data[i] = acc / n;
        }
    }
    int id = t->push(std::move(out), nullptr, "mean_axis");
    t->node(id).backward = [id, aid = a.id(), axis, m, n](Tape& tp) {
        const double* g = tp.node(id).grad.data();
        double* ga = tp.grad_of(aid);
        if (axis == 0) {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j) ga[std::size_t(i) * n + j] += g[j] / m;
        } else {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j) ga[std::size_t(i) * n + j] += g[i] / n;
        }
    };
    return Var(t, id);
}

Var sum_all(Var a) {
    Tape* t = a.tape();
    double acc = 0;
    for (double v : a.value().data) acc += v;
    int id = t->push(Tensor({1}, {acc}), nullptr, "sum_all");
    t->node(id).backward = [id, aid = a.id()](Tape& tp) {
        const double g = tp.node(id).grad[0];
        double* ga = tp.grad_of(aid);
        const std::size_t count = tp.value(aid).data.size();
        for (std::size_t i = 0; i < count; ++i) ga[i] += g;
    };
    return Var(t, id);
}

Var mean_all(Var a) {
    const std::size_t count = a.value().data.size();
    require(count > 0, "mean_all", "mean of an empty tensor");
    return scalar_mul(sum_all(a), 1.0 / double(count));
}

Var reshape(Var a, std::vector<int> shape) {
    Tape* t = a.tape();
    Tensor out(shape, a.value().data);
    require(out.size() == a.value().size(), "reshape",
            a.value().shape_str() + " -> " + out.shape_str());
    int id = t->push(std::move(out), nullptr, "reshape");
    t->node(id).backward = [id, aid = a.id()](Tape& tp) {
        const auto& g = tp.node(id).grad;
        double* ga = tp.grad_of(aid);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    };
    return Var(t, id);
}

// --- row-wise nonlinearities ---------------------------------------------------

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
    Tape* t = common_tape(x, gamma);
    common_tape(gamma, beta);
    const Tensor& xv = x.value();
    const int n = xv.cols();
    require(n > 0 && int(gamma.value().size()) == n && int(beta.value().size()) == n,
            "layer_norm", "affine size must match last axis " + std::to_string(n));
    const int rows = static_cast<int>(xv.data.size()) / n;

    Tensor out = Tensor::zeros(xv.shape);
    std::vector<double> norm(xv.data.size());   // (x - mu) / s per element
    std::vector<double> inv_std(rows);
    const double* gdat = gamma.value().data.data();
    const double* bdat = beta.value().data.data();
    for (int r = 0; r < rows; ++r) {
        const double* row = xv.data.data() + std::size_t(r) * n;
        double mu = 0;
        for (int j = 0; j < n; ++j) mu += row[j];
        mu /= n;
        double var = 0;
        for (int j = 0; j < n; ++j) var += (row[j] - mu) * (row[j] - mu);
        var /= n;
        const double s = 1.0 / std::sqrt(var + eps);
        inv_std[r] = s;
        for (int j = 0; j < n; ++j) {
            const double y = (row[j] - mu) * s;
            norm[std::size_t(r) * n + j] = y;
            out.data[std::size_t(r) * n + j] = y * gdat[j] + bdat[j];
        }
    }
    int id = t->push(std::move(out), nullptr, "layer_norm");
    t->node(id).backward = [id, xid = x.id(), gid = gamma.id(), bid = beta.id(),
                            norm = std::move(norm), inv_std = std::move(inv_std), rows,
                            n](Tape& tp) {
        const double* g = tp.node(id).grad.data();
        const double* gamma_v = tp.value(gid).data.data();
        double* gx = tp.grad_of(xid);
        double* gg = tp.grad_of(gid);
        double* gb = tp.grad_of(bid);
        for (int r = 0; r < rows; ++r) {
            const double* grow = g + std::size_t(r) * n;
            const double* yrow = norm.data() + std::size_t(r) * n;
            double mean_gy = 0, mean_gyy = 0;
            for (int j = 0; j < n; ++j) {
                const double gy = grow[j] * gamma_v[j];
                mean_gy += gy;
                mean_gyy += gy * yrow[j];
                gg[j] += grow[j] * yrow[j];
                gb[j] += grow[j];
            }
            mean_gy /= n;
            mean_gyy /= n;
            double* gxrow = gx + std::size_t(r) * n;
            for (int j = 0; j < n; ++j) {
                const double gy = grow[j] * gamma_v[j];
                gxrow[j] += (gy - mean_gy - yrow[j] * mean_gyy) * inv_std[r];
            }
        }
    };
    return Var(t, id);
}

Var softmax(Var x) {
    Tape* t = x.tape();
    const Tensor& xv = x.value();
    const int n = xv.cols();
    require(n > 0, "softmax", "empty last axis");
    const int rows = static_cast<int>(xv.data.size()) / n;
    Tensor out = Tensor::zeros(xv.shape);
    for (int r = 0; r < rows; ++r) {
        const double* row = xv.data.data() + std::size_t(r) * n;
        double* orow = out.data.data() + std::size_t(r) * n;
        double mx = row[0];
        for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
        double denom = 0;
        for (int j = 0; j < n; ++j) {
            orow[j] = std::exp(row[j] - mx);
            denom += orow[j];
        }
        for (int j = 0; j < n; ++j) orow[j] /= denom;
    }
    int id = t->push(std::move(out), nullptr, "softmax");
    t->node(id).backward = [id, xid = x.id(), rows, n](Tape& tp) {
        const double* g = tp.node(id).grad.data();
        const double* p = tp.value(id).data.data();
        double* gx = tp.grad_of(xid);
        for (int r = 0; r < rows; ++r) {
            const double* prow = p + std::size_t(r) * n;
            const double* grow = g + std::size_t(r) * n;
            double dot = 0;
            for (int j = 0; j < n; ++j) dot += prow[j] * grow[j];
            double* gxrow = gx + std::size_t(r) * n;
            for (int j = 0; j < n; ++j) gxrow[j] += prow[j] * (grow[j] - dot);
        }
    };
    return Var(t, id);
}

Var masked_softmax(Var scores, std::vector<std::uint8_t> col_valid) {
    Tape* t = scores.tape();
    const Tensor& xv = scores.value();
    require(xv.shape.size() == 2, "masked_softmax", "needs a matrix, got " + xv.shape_str());
    const int rows = xv.shape[0], n = xv.shape[1];
    require(int(col_valid.size()) == n, "masked_softmax", "one validity flag per column");
    Tensor out = Tensor::zeros(xv.shape);
    for (int r = 0; r < rows; ++r) {
        const double* row = xv.data.data() + std::size_t(r) * n;
        double* orow = out.data.data() + std::size_t(r) * n;
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j)
            if (col_valid[j]) mx = std::max(mx, row[j]);
        if (!std::isfinite(mx)) continue;  // no valid column: all-zero row
        double denom = 0;
        for (int j = 0; j < n; ++j) {
            if (!col_valid[j]) continue;
            orow[j] = std::exp(row[j] - mx);
            denom += orow[j];
        }
        for (int j = 0; j < n; ++j)
            if (col_valid[j]) orow[j] /= denom;
    }
    int id = t->push(std::move(out), nullptr, "masked_softmax");
    t->node(id).backward = [id, xid = scores.id(), valid = std::move(col_valid), rows,
                            n](Tape& tp) {
        const double* g = tp.node(id).grad.data();
        const double* p = tp.value(id).data.data();
        double* gx = tp.grad_of(xid);
        for (int r = 0; r < rows; ++r) {
            const double* prow = p + std::size_t(r) * n;
            const double* grow = g + std::size_t(r) * n;
            double dot = 0;
            for (int j = 0; j < n; ++j)
                if (valid[j]) dot += prow[j] * grow[j];
            double* gxrow = gx + std::size_t(r) * n;
            for (int j = 0; j < n; ++j)
                if (valid[j]) gxrow[j] += prow[j] * (grow[j] - dot);
        }
    };
    return Var(t, id);
}

Var gelu(Var x) {
    Tape* t = x.tape();
    Tensor out = x.value();
    for (double& v : out.data) v = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
    int id = t->push(std::move(out), nullptr, "gelu");
    t->node(id).backward = [id, xid = x.id()](Tape& tp) {
        const auto& g = tp.node(id).grad;
        const auto& xv = tp.value(xid).data;
        double* gx = tp.grad_of(xid);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double v = xv[i];
            const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
            const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
            gx[i] += g[i] * (cdf + v * pdf);
        }
    };
    return Var(t, id);
}

Var cpe_conv(Var x, Var kernel, Var bias, std::vector<int> neighbors) {
    Tape* t = common_tape(x, kernel);
    common_tape(kernel, bias);
    const Tensor& xv = x.value();
    const Tensor& kv = kernel.value();
    require(xv.shape.size() == 2, "cpe_conv", "tokens must be a matrix");
    const int l = xv.shape[0], d = xv.shape[1];
    require(kv.shape == std::vector<int>{27, d}, "cpe_conv",
            "kernel must be 27 x " + std::to_string(d) + ", got " + kv.shape_str());
    require(int(bias.value().size()) == d, "cpe_conv", "bias width mismatch");
    require(int(neighbors.size()) == l * 27, "cpe_conv", "neighbor table must be L x 27");

    Tensor out = xv;
    const double* bdat = bias.value().data.data();
    for (int i = 0; i < l; ++i) {
        double* orow = out.data.data() + std::size_t(i) * d;
        for (int j = 0; j < d; ++j) orow[j] += bdat[j];
        for (int o = 0; o < 27; ++o) {
            const int nbr = neighbors[std::size_t(i) * 27 + o];
            if (nbr < 0) continue;
            const double* krow = kv.data.data() + std::size_t(o) * d;
            const double* nrow = xv.data.data() + std::size_t(nbr) * d;
            for (int j = 0; j < d; ++j) orow[j] += krow[j] * nrow[j];
        }
    }
    int id = t->push(std::move(out), nullptr, "cpe_conv");
    t->node(id).backward = [id, xid = x.id(), kid = kernel.id(), bid = bias.id(),
                            nbrs = std::move(neighbors), l, d](Tape& tp) {
        const double* g = tp.node(id).grad.data();
        const double* xv2 = tp.value(xid).data.data();
        const double* kv2 = tp.value(kid).data.data();
        double* gx = tp.grad_of(xid);
        double* gk = tp.grad_of(kid);
        double* gb = tp.grad_of(bid);
        for (int i = 0; i < l; ++i) {
            const double* grow = g + std::size_t(i) * d;
            double* gxi = gx + std::size_t(i) * d;
            for (int j = 0; j < d; ++j) {
                gxi[j] += grow[j];  // residual
                gb[j] += grow[j];
            }
            for (int o = 0; o < 27; ++o) {
                const int nbr = nbrs[std::size_t(i) * 27 + o];
                if (nbr < 0) continue;
                const double* krow = kv2 + std::size_t(o) * d;
                const double* nrow = xv2 + std::size_t(nbr) * d;
                double* gn = gx + std::size_t(nbr) * d;
                double* gkrow = gk + std::size_t(o) * d;
                for (int j = 0; j < d; ++j) {
                    gn[j] += grow[j] * krow[j];
                    gkrow[j] += grow[j] * nrow[j];
                }
            }
        }
    };
    return Var(t, id);
}

Var softmax_cross_entropy(Var logits, int label) {
    Tape* t = logits.tape();
    const Tensor& lv = logits.value();
    const int c = lv.cols();
    require(int(lv.data.size()) == c && c > 0, "softmax_cross_entropy",
            "logits must be a single row, got " + lv.shape_str());
    require(0 <= label && label < c, "softmax_cross_entropy", "label out of range");
    double mx = lv.data[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, lv.data[j]);
    double denom = 0;
    std::vector<double> p(c);
    for (int j = 0; j < c; ++j) {
        p[j] = std::exp(lv.data[j] - mx);
        denom += p[j];
    }
    for (int j = 0; j < c; ++j) p[j] /= denom;
    const double loss = std::log(denom) + mx - lv.data[label];
    int id = t->push(Tensor({1}, {loss}), nullptr, "softmax_cross_entropy");
    t->node(id).backward = [id, lid = logits.id(), p = std::move(p), label](Tape& tp) {
        const double g = tp.node(id).grad[0];
        double* gl = tp.grad_of(lid);
        for (std::size_t j = 0; j < p.size(); ++j)
            gl[j] += g * (p[j] - (int(j) == label ? 1.0 : 0.0));
    };
    return Var(t, id);
}

Var softmax_cross_entropy_rows(Var logits, std::vector<int> labels) {
    Tape* t = logits.tape();
    const Tensor& lv = logits.value();
    require(lv.shape.size() == 2, "softmax_cross_entropy_rows",
            "logits must be a matrix, got " + lv.shape_str());
    const int rows = lv.shape[0], c = lv.shape[1];
    require(int(labels.size()) == rows, "softmax_cross_entropy_rows", "one label per row");
    std::vector<double> p(lv.data.size());
    double loss = 0;
    for (int r = 0; r < rows; ++r) {
        const double* row = lv.data.data() + std::size_t(r) * c;
        double* prow = p.data() + std::size_t(r) * c;
        require(0 <= labels[r] && labels[r] < c, "softmax_cross_entropy_rows",
                "label out of range");
        double mx = row[0];
        for (int j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        double denom = 0;
        for (int j = 0; j < c; ++j) {
            prow[j] = std::exp(row[j] - mx);
            denom += prow[j];
        }
        for (int j = 0; j < c; ++j) prow[j] /= denom;
        loss += std::log(denom) + mx - row[labels[r]];
    }
    loss /= rows;
    int id = t->push(Tensor({1}, {loss}), nullptr, "softmax_cross_entropy_rows");
    t->node(id).backward = [id, lid = logits.id(), p = std::move(p),
                            labels = std::move(labels), rows, c](Tape& tp) {
        const double g = tp.node(id).grad[0] / rows;
        double* gl = tp.grad_of(lid);
        for (int r = 0; r < rows; ++r)
            for (int j = 0; j < c; ++j)
                gl[std::size_t(r) * c + j] +=
                    g * (p[std::size_t(r) * c + j] - (j == labels[r] ? 1.0 : 0.0));
    };
    return Var(t, id);
}

}  // namespace octmesh
