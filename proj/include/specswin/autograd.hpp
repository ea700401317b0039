#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "specswin/tensor.hpp"

namespace specswin::ag {

struct Node {
    Tensor value;
    Tensor grad;  // lazily allocated, same shape as value
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> inputs;
    std::function<void(Node&)> backward_fn;

    Tensor& ensure_grad();
};

/// Handle to a node in the reverse-mode graph. Cheap to copy.
class Var {
public:
    Var() = default;
    explicit Var(Tensor value, bool requires_grad = false);

    const Tensor& value() const { return node_->value; }
    Tensor& mutable_value() { return node_->value; }
    const Shape& shape() const { return node_->value.shape(); }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    bool defined() const noexcept { return static_cast<bool>(node_); }

    /// Gradient accumulated by backward(); zeros if none reached this node.
    Tensor& grad() { return node_->ensure_grad(); }
    bool has_grad() const { return node_ && node_->grad.size() == node_->value.size() && node_->value.size() > 0; }
    void zero_grad();

    const std::shared_ptr<Node>& node() const { return node_; }

    /// Builds the output of an op. Records inputs and the backward closure only
    /// when gradient recording is on and some input requires a gradient.
    static Var make(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> backward_fn);

private:
    std::shared_ptr<Node> node_;
};

bool grad_enabled();

/// Disables graph recording for the current thread while alive.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

/// Reverse sweep from a scalar. Seeds d(root)/d(root) = 1.
void backward(const Var& root);

}  // namespace specswin::ag
