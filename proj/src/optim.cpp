#include "madegan/optim.hpp"

#include <cmath>

namespace madegan {

Tensor& ParamSet::add(const std::string& name, Tensor t) {
    if (params_.count(name)) throw TensorError("ParamSet: duplicate parameter '" + name + "'");
    order_.push_back(name);
    return params_.emplace(name, std::move(t)).first->second;
}

Tensor& ParamSet::at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw TensorError("ParamSet: unknown parameter '" + name + "'");
    return it->second;
}

const Tensor& ParamSet::at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw TensorError("ParamSet: unknown parameter '" + name + "'");
    return it->second;
}

bool ParamSet::has(const std::string& name) const { return params_.count(name) != 0; }

void ParamSet::zero_grad() {
    for (auto& name : order_) params_.at(name).zero_grad();
}

double ParamSet::checksum() const {
    double s = 0.0;
    for (auto& name : order_)
        for (double v : params_.at(name).values()) s += std::fabs(v);
    return s;
}

void ParamSet::load_values_from(const ParamSet& other) {
    for (auto& name : order_) {
        const Tensor& src = other.at(name);
        Tensor& dst = params_.at(name);
        if (src.shape() != dst.shape())
            throw TensorError("ParamSet: shape mismatch loading '" + name + "'");
        std::copy(src.values().begin(), src.values().end(), dst.values().begin());
    }
}

Adam::Adam(double lr_, double beta1_, double beta2_, double eps_)
    : lr(lr_), beta1(beta1_), beta2(beta2_), eps(eps_) {}

void Adam::step(ParamSet& params) {
    ++step_count_;
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count_));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count_));
    for (auto& name : params.names()) {
        Tensor& p = params.at(name);
        if (!p.requires_grad()) continue;
        if (!p.has_grad())
            throw TensorError("adam_step: parameter '" + name + "' has no gradient");
        auto g = p.grad();
        auto& mom = state_[name];
        if (mom.m.empty()) {
            mom.m.assign(p.numel(), 0.0);
            mom.v.assign(p.numel(), 0.0);
        }
        auto vals = p.values();
        for (std::size_t i = 0; i < vals.size(); ++i) {
            mom.m[i] = beta1 * mom.m[i] + (1.0 - beta1) * g[i];
            mom.v[i] = beta2 * mom.v[i] + (1.0 - beta2) * g[i] * g[i];
            double mhat = mom.m[i] / bc1;
            double vhat = mom.v[i] / bc2;
            vals[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

}  // namespace madegan
