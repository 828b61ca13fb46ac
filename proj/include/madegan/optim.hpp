#pragma once

#include <map>
#include <string>
#include <vector>

#include "madegan/tensor.hpp"

namespace madegan {

// Named parameter collection with deterministic (insertion) order.
// Non-trainable buffers (running batch-norm statistics) live here too with
// requires_grad=false so they serialize with the model.
class ParamSet {
public:
    Tensor& add(const std::string& name, Tensor t);
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    bool has(const std::string& name) const;
    const std::vector<std::string>& names() const { return order_; }

    void zero_grad();
    // Sum of |values| over all tensors; cheap content fingerprint.
    double checksum() const;
    // Copy values from another set (matching names/shapes required).
    void load_values_from(const ParamSet& other);

private:
    std::vector<std::string> order_;
    std::map<std::string, Tensor> params_;
};

// Adam with bias correction. Moment buffers are keyed by parameter name;
// one shared step counter per optimizer instance.
class Adam {
public:
    Adam(double lr = 2e-4, double beta1 = 0.5, double beta2 = 0.999, double eps = 1e-8);

    // Updates every requires_grad parameter. Throws naming the parameter
    // if its gradient has never been populated.
    void step(ParamSet& params);

    long step_count() const { return step_count_; }
    double lr;
    double beta1;
    double beta2;
    double eps;

private:
    struct Moments {
        std::vector<double> m, v;
    };
    std::map<std::string, Moments> state_;
    long step_count_ = 0;
};

}  // namespace madegan
