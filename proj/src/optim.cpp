#include "octmesh/optim.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "octmesh/errors.hpp"

namespace octmesh {

void AdamState::ensure(const ParamStore& store) {
    std::size_t i = 0;
    for (const Param& p : store) {
        if (i >= m.size()) {
            m.push_back(Tensor::zeros(p.value.shape));
            v.push_back(Tensor::zeros(p.value.shape));
        }
        ++i;
    }
}

namespace {

void require_grads(const ParamStore& store) {
    if (!store.has_new_grads())
        throw std::logic_error("optimizer step without a preceding backward pass");
}

}  // namespace

void sgd_step(ParamStore& store, double lr, double weight_decay) {
    require_grads(store);
    for (Param& p : store) {
        if (!p.requires_grad) continue;
        for (std::size_t i = 0; i < p.value.data.size(); ++i) {
            const double g = p.grad.data[i] + weight_decay * p.value.data[i];
            p.value.data[i] -= lr * g;
        }
    }
    store.zero_grad();
}

void adam_step(ParamStore& store, AdamState& state, double lr, double beta1, double beta2,
               double eps, double weight_decay) {
    require_grads(store);
    state.ensure(store);
    state.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, double(state.step));
    const double bc2 = 1.0 - std::pow(beta2, double(state.step));
    std::size_t idx = 0;
    for (Param& p : store) {
        Tensor& m = state.m[idx];
        Tensor& v = state.v[idx];
        ++idx;
        if (!p.requires_grad) continue;
        for (std::size_t i = 0; i < p.value.data.size(); ++i) {
            const double g = p.grad.data[i] + weight_decay * p.value.data[i];
            m.data[i] = beta1 * m.data[i] + (1.0 - beta1) * g;
            v.data[i] = beta2 * v.data[i] + (1.0 - beta2) * g * g;
            const double mhat = m.data[i] / bc1;
            const double vhat = v.data[i] / bc2;
            p.value.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
    store.zero_grad();
}

// --- checkpoint serialization ----------------------------------------------

namespace {

constexpr char kMagic[9] = "OMCKPT01";

void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = char((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw DataError("checkpoint truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

void put_f64_array(std::ostream& out, const std::vector<double>& data) {
    for (double d : data) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        put_u64(out, bits);
    }
}

void get_f64_array(std::istream& in, std::vector<double>& data) {
    for (double& d : data) {
        std::uint64_t bits = get_u64(in);
        std::memcpy(&d, &bits, 8);
    }
}

void put_entry(std::ostream& out, const std::string& name, const Tensor& t) {
    put_u64(out, name.size());
    out.write(name.data(), std::streamsize(name.size()));
    put_u64(out, t.shape.size());
    for (int d : t.shape) put_u64(out, std::uint64_t(d));
    put_f64_array(out, t.data);
}

std::pair<std::string, Tensor> get_entry(std::istream& in) {
    const std::uint64_t name_len = get_u64(in);
    std::string name(name_len, '\0');
    in.read(name.data(), std::streamsize(name_len));
    const std::uint64_t ndim = get_u64(in);
    std::vector<int> shape(ndim);
    for (auto& d : shape) d = int(get_u64(in));
    Tensor t = Tensor::zeros(shape);
    get_f64_array(in, t.data);
    if (!in) throw DataError("checkpoint truncated inside entry '" + name + "'");
    return {name, std::move(t)};
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& params, const AdamState* opt,
                     const nlohmann::json& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot open for writing");
    out.write(kMagic, 8);

    nlohmann::json man = manifest;
    man["format"] = "OMCKPT01";
    std::vector<std::string> frozen;
    for (const Param& p : params)
        if (!p.requires_grad) frozen.push_back(p.name);
    man["frozen"] = frozen;
    if (opt) man["optimizer"] = {{"algo", "adam"}, {"step", opt->step}};
    const std::string man_str = man.dump();
    put_u64(out, man_str.size());
    out.write(man_str.data(), std::streamsize(man_str.size()));

    std::uint64_t count = params.size();
    if (opt) count += 2 * params.size();
    put_u64(out, count);
    for (const Param& p : params) put_entry(out, p.name, p.value);
    if (opt) {
        std::size_t idx = 0;
        for (const Param& p : params) {
            put_entry(out, "opt.m." + p.name, opt->m[idx]);
            put_entry(out, "opt.v." + p.name, opt->v[idx]);
            ++idx;
        }
    }
    if (!out) throw DataError(path + ": write failure");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path + ": cannot open checkpoint");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw DataError(path + ": not a checkpoint file (bad magic)");

    LoadedCheckpoint ck;
    const std::uint64_t man_len = get_u64(in);
    std::string man_str(man_len, '\0');
    in.read(man_str.data(), std::streamsize(man_len));
    ck.manifest = nlohmann::json::parse(man_str, nullptr, false);
    if (ck.manifest.is_discarded()) throw DataError(path + ": corrupt manifest JSON");

    std::vector<std::pair<std::string, Tensor>> moments;
    const std::uint64_t count = get_u64(in);
    for (std::uint64_t i = 0; i < count; ++i) {
        auto [name, tensor] = get_entry(in);
        if (name.rfind("opt.", 0) == 0)
            moments.emplace_back(name, std::move(tensor));
        else
            ck.params.add(name, std::move(tensor));
    }
    if (ck.manifest.contains("optimizer")) {
        ck.has_opt = true;
        ck.opt.step = ck.manifest["optimizer"]["step"].get<std::int64_t>();
        for (const Param& p : ck.params) {
            bool found_m = false, found_v = false;
            for (auto& [name, tensor] : moments) {
                if (name == "opt.m." + p.name) {
                    ck.opt.m.push_back(tensor);
                    found_m = true;
                } else if (name == "opt.v." + p.name) {
                    ck.opt.v.push_back(tensor);
                    found_v = true;
                }
            }
            if (!found_m || !found_v)
                throw DataError(path + ": missing optimizer moments for '" + p.name + "'");
        }
    }
    if (ck.manifest.contains("frozen"))
        for (const auto& name : ck.manifest["frozen"])
            if (ck.params.has(name.get<std::string>()))
                ck.params.at(name.get<std::string>()).requires_grad = false;
    return ck;
}

}  // namespace octmesh
