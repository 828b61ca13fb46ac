#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace madegan {

struct TensorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

namespace detail {

struct Node {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;  // empty until first accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    // Accumulates parent grads given this node's grad; empty for leaves.
    std::function<void(Node&)> backward_fn;

    std::size_t numel() const { return values.size(); }
    void ensure_grad() {
        if (grad.empty()) grad.assign(values.size(), 0.0);
    }
};

}  // namespace detail

// N-d array of doubles with optional reverse-mode gradient tracking.
// Value-semantic handle: copies share the underlying node.
class Tensor {
public:
    Tensor() = default;
    Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);
    static Tensor randn(Shape shape, std::mt19937_64& rng, double stddev, bool requires_grad = false);
    static Tensor uniform(Shape shape, std::mt19937_64& rng, double lo, double hi, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
    std::size_t numel() const { return node_->numel(); }
    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool rg) { node_->requires_grad = rg; }

    std::span<double> values() { return node_->values; }
    std::span<const double> values() const { return node_->values; }
    double* data() { return node_->values.data(); }
    const double* data() const { return node_->values.data(); }

    bool has_grad() const { return !node_->grad.empty(); }
    std::span<double> grad();             // allocates zeros on first use
    std::span<const double> grad() const; // throws if absent
    double grad_norm() const;
    void zero_grad();

    double item() const;  // scalar tensors only

    // Same values, no graph history, no gradient flow.
    Tensor detach() const;

    // Reverse-mode accumulation from a scalar tensor into all reachable
    // leaves. Repeated calls accumulate.
    void backward();

    std::shared_ptr<detail::Node> node_;  // op implementation access

    static Tensor from_node(std::shared_ptr<detail::Node> n);
};

// Throws TensorError if any value is NaN or Inf.
void check_finite(std::span<const double> v, const std::string& what);

}  // namespace madegan
