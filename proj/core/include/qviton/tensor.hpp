// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file
 * Dense row-major tensors with a reverse-mode gradient tape.
 *
 * A Tensor is a cheap handle onto a shared node. Operations that consume
 * tensors requiring gradients record their inputs and a backward closure
 * on the result node; the resulting DAG is the tape. Calling backward() on
 * a scalar walks it once in reverse topological order.
 */

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace qviton {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape &shape);
std::string shape_str(const Shape &shape);

/// Thread-local switch controlling whether ops record onto the tape.
class GradMode {
  public:
    static bool enabled();
    static void set_enabled(bool enabled);
};

/// Disables tape recording for the lifetime of the guard.
class NoGradGuard {
  public:
    NoGradGuard() : previous_(GradMode::enabled()) { GradMode::set_enabled(false); }
    ~NoGradGuard() { GradMode::set_enabled(previous_); }
    NoGradGuard(const NoGradGuard &) = delete;
    NoGradGuard &operator=(const NoGradGuard &) = delete;

  private:
    bool previous_;
};

namespace detail {

template <typename T> struct Node {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    // Reads this node's grad and accumulates into parents' grads.
    std::function<void(Node &)> backward_fn;

    std::vector<T> &ensure_grad() {
        if (grad.size() != data.size()) {
            grad.assign(data.size(), T{0});
        }
        return grad;
    }

    /// Gradient buffer of parent `i`, or nullptr when it does not need one.
    T *parent_grad(std::size_t i) {
        Node &p = *parents[i];
        return p.requires_grad ? p.ensure_grad().data() : nullptr;
    }
};

} // namespace detail

template <typename T> class Tensor {
  public:
    using value_type = T;
    using NodeType = detail::Node<T>;
    using BackwardFn = std::function<void(NodeType &)>;

    Tensor() = default;

    /// Zero-filled tensor.
    explicit Tensor(Shape shape, bool requires_grad = false);
    Tensor(Shape shape, std::vector<T> data, bool requires_grad = false);

    static Tensor full(Shape shape, T value);
    static Tensor scalar(T value);

    /// Result node for an op. Records `parents` and `backward` only when
    /// grad mode is on and at least one parent requires a gradient.
    static Tensor make_result(Shape shape, std::vector<T> data,
                              std::vector<Tensor> parents, BackwardFn backward);

    [[nodiscard]] bool defined() const { return static_cast<bool>(node_); }
    [[nodiscard]] const Shape &shape() const { return node_->shape; }
    [[nodiscard]] std::size_t rank() const { return node_->shape.size(); }
    [[nodiscard]] std::size_t dim(std::size_t i) const;
    [[nodiscard]] std::size_t numel() const { return node_->data.size(); }

    [[nodiscard]] std::span<T> data() { return node_->data; }
    [[nodiscard]] std::span<const T> data() const { return node_->data; }
    [[nodiscard]] T item() const;

    [[nodiscard]] bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool flag) { node_->requires_grad = flag; }

    /// Empty span until a gradient has been accumulated or zeroed in.
    [[nodiscard]] std::span<const T> grad() const { return node_->grad; }
    [[nodiscard]] std::span<T> mutable_grad() { return node_->ensure_grad(); }
    void zero_grad();

    /// Reverse-mode sweep from this scalar. Leaf gradients accumulate;
    /// interior gradients are reset on every call.
    void backward() const;

    /// Same values, new node, no history.
    [[nodiscard]] Tensor detach() const;

    /// Differentiable reshape (copies data).
    [[nodiscard]] Tensor reshape(Shape shape) const;

    [[nodiscard]] bool same_node(const Tensor &other) const { return node_ == other.node_; }
    [[nodiscard]] NodeType *node() const { return node_.get(); }

  private:
    explicit Tensor(std::shared_ptr<NodeType> node) : node_(std::move(node)) {}
    std::shared_ptr<NodeType> node_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

} // namespace qviton
