#include "madegan/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace madegan {

std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (auto e : s) n *= e;
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << "]";
    return os.str();
}

void check_finite(std::span<const double> v, const std::string& what) {
    for (double x : v)
        if (!std::isfinite(x)) throw TensorError(what + ": non-finite value");
}

Tensor Tensor::from_node(std::shared_ptr<detail::Node> n) {
    Tensor t;
    t.node_ = std::move(n);
    return t;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
    if (shape_numel(shape) != values.size())
        throw TensorError("tensor: " + std::to_string(values.size()) +
                          " values for shape " + shape_str(shape));
    check_finite(values, "tensor");
    node_ = std::make_shared<detail::Node>();
    node_->shape = std::move(shape);
    node_->values = std::move(values);
    node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    std::size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    std::size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return Tensor({}, {value}, requires_grad);
}

Tensor Tensor::randn(Shape shape, std::mt19937_64& rng, double stddev, bool requires_grad) {
    std::normal_distribution<double> dist(0.0, stddev);
    std::vector<double> v(shape_numel(shape));
    for (double& x : v) x = dist(rng);
    return Tensor(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::uniform(Shape shape, std::mt19937_64& rng, double lo, double hi, bool requires_grad) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(shape_numel(shape));
    for (double& x : v) x = dist(rng);
    return Tensor(std::move(shape), std::move(v), requires_grad);
}

std::span<double> Tensor::grad() {
    node_->ensure_grad();
    return node_->grad;
}

std::span<const double> Tensor::grad() const {
    if (node_->grad.empty()) throw TensorError("grad: not populated");
    return node_->grad;
}

double Tensor::grad_norm() const {
    if (node_->grad.empty()) return 0.0;
    double s = 0.0;
    for (double g : node_->grad) s += g * g;
    return std::sqrt(s);
}

void Tensor::zero_grad() {
    std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

double Tensor::item() const {
    if (numel() != 1) throw TensorError("item: tensor has " + std::to_string(numel()) + " elements");
    return node_->values[0];
}

Tensor Tensor::detach() const {
    return Tensor(node_->shape, node_->values, false);
}

void Tensor::backward() {
    if (numel() != 1) throw TensorError("backward: loss must be scalar, got " + shape_str(shape()));

    // Topological order via iterative DFS on the parent links.
    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> visited;
    struct Frame {
        detail::Node* n;
        std::size_t next;
    };
    std::vector<Frame> stack{{node_.get(), 0}};
    visited.insert(node_.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next < f.n->parents.size()) {
            detail::Node* p = f.n->parents[f.next++].get();
            if (visited.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(f.n);
            stack.pop_back();
        }
    }

    // Intermediate grads are transient per backward pass; only leaves
    // accumulate across calls.
    for (auto* n : order)
        if (n->backward_fn) std::fill(n->grad.begin(), n->grad.end(), 0.0);

    node_->ensure_grad();
    node_->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node* n = *it;
        if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
    }
}

}  // namespace madegan
