// Copyright 2026 The qviton Authors
// SPDX-License-Identifier: Apache-2.0

#include "qviton/tensor.hpp"

#include <numeric>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "qviton/error.hpp"

namespace qviton {

std::size_t shape_numel(const Shape &shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
}

std::string shape_str(const Shape &shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        os << (i ? "x" : "") << shape[i];
    }
    os << ']';
    return os.str();
}

namespace {
thread_local bool grad_mode_enabled = true;
} // namespace

bool GradMode::enabled() { return grad_mode_enabled; }
void GradMode::set_enabled(bool enabled) { grad_mode_enabled = enabled; }

template <typename T>
Tensor<T>::Tensor(Shape shape, bool requires_grad)
    : node_(std::make_shared<NodeType>()) {
    node_->data.assign(shape_numel(shape), T{0});
    node_->shape = std::move(shape);
    node_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data, bool requires_grad)
    : node_(std::make_shared<NodeType>()) {
    if (shape_numel(shape) != data.size()) {
        throw DimensionError("tensor data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
    }
    node_->shape = std::move(shape);
    node_->data = std::move(data);
    node_->requires_grad = requires_grad;
}

template <typename T> Tensor<T> Tensor<T>::full(Shape shape, T value) {
    const std::size_t n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<T>(n, value));
}

template <typename T> Tensor<T> Tensor<T>::scalar(T value) {
    return Tensor(Shape{}, std::vector<T>{value});
}

template <typename T>
Tensor<T> Tensor<T>::make_result(Shape shape, std::vector<T> data,
                                 std::vector<Tensor> parents, BackwardFn backward) {
    Tensor out(std::move(shape), std::move(data));
    if (!GradMode::enabled()) {
        return out;
    }
    bool any = false;
    for (const auto &p : parents) {
        any = any || p.requires_grad();
    }
    if (!any) {
        return out;
    }
    out.node_->requires_grad = true;
    out.node_->parents.reserve(parents.size());
    for (auto &p : parents) {
        out.node_->parents.push_back(std::move(p.node_));
    }
    out.node_->backward_fn = std::move(backward);
    return out;
}

template <typename T> std::size_t Tensor<T>::dim(std::size_t i) const {
    if (i >= rank()) {
        throw IndexError("dimension " + std::to_string(i) + " out of range for shape " +
                         shape_str(shape()));
    }
    return node_->shape[i];
}

template <typename T> T Tensor<T>::item() const {
    if (numel() != 1) {
        throw ContractError("item() requires a single-element tensor, got " +
                            shape_str(shape()));
    }
    return node_->data[0];
}

template <typename T> void Tensor<T>::zero_grad() {
    node_->grad.assign(node_->data.size(), T{0});
}

template <typename T> void Tensor<T>::backward() const {
    if (numel() != 1) {
        throw ContractError("backward() requires a scalar loss, got shape " +
                            shape_str(shape()));
    }
    if (!requires_grad()) {
        throw ContractError("backward() called on a tensor that is not on the tape");
    }

    // Iterative post-order DFS; each node appears exactly once.
    std::vector<NodeType *> order;
    std::unordered_set<NodeType *> visited;
    std::vector<std::pair<NodeType *, std::size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    visited.insert(node_.get());
    while (!stack.empty()) {
        auto &[node, next] = stack.back();
        if (next < node->parents.size()) {
            NodeType *parent = node->parents[next++].get();
            if (parent->requires_grad && visited.insert(parent).second) {
                stack.emplace_back(parent, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    for (NodeType *node : order) {
        if (node->backward_fn) {
            node->grad.assign(node->data.size(), T{0});
        }
    }
    node_->ensure_grad()[0] += T{1};
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if ((*it)->backward_fn) {
            (*it)->backward_fn(**it);
        }
    }
}

template <typename T> Tensor<T> Tensor<T>::detach() const {
    return Tensor(node_->shape, node_->data);
}

template <typename T> Tensor<T> Tensor<T>::reshape(Shape shape) const {
    if (shape_numel(shape) != numel()) {
        throw DimensionError("cannot reshape " + shape_str(this->shape()) + " to " +
                             shape_str(shape));
    }
    return make_result(std::move(shape), node_->data, {*this}, [](NodeType &self) {
        if (T *g = self.parent_grad(0)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                g[i] += self.grad[i];
            }
        }
    });
}

template class Tensor<float>;
template class Tensor<double>;

} // namespace qviton
