#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "core/matrix.hpp"

/**
 * @file tensor.hpp
 *
 * @brief Dense 2-D reverse-mode automatic differentiation.
 *
 * A `Tensor` is a shared handle to a value (and optionally a gradient
 * accumulator). Leaves are created with `Tensor::constant()` or
 * `Tensor::parameter()`; every other tensor is produced by a `Tape`, which
 * records the operation together with its backward rule whenever at least one
 * input requires a gradient. Recording order is creation order, so a reverse
 * sweep over the tape is a valid topological traversal.
 *
 * Gradients of leaves accumulate across `backward()` calls until
 * `Tensor::zero_grad()` is called. Gradients of intermediate tensors are
 * reset at the start of every backward sweep.
 *
 * Every operation checks its forward output for NaN/Inf and throws
 * `NumericalError` naming the operation.
 */

namespace mgg::ad {

namespace detail {
struct Node;
}

class Tensor {
public:
    Tensor() = default;

    /// Leaf that never receives a gradient.
    static Tensor constant(Matrix value);

    /// Leaf with `requires_grad` set; gradients accumulate into it.
    static Tensor parameter(Matrix value);

    bool defined() const { return static_cast<bool>(node_); }
    Index rows() const;
    Index cols() const;

    const Matrix& value() const;

    /// In-place access for optimizers and finite-difference probes.
    Matrix& mutable_value();

    /// Value of a 1x1 tensor.
    double item() const;

    bool requires_grad() const;

    /// Only meaningful on leaves: freezes or unfreezes a parameter.
    void set_requires_grad(bool flag);

    bool is_leaf() const;
    bool has_grad() const;
    const Matrix& grad() const;

    /// Sets the gradient to an all-zero matrix of the value's shape.
    void zero_grad();

    bool same_node(const Tensor& other) const { return node_ == other.node_; }

private:
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

    std::shared_ptr<detail::Node> node_;

    friend class Tape;
};

enum class ElementwiseOp { add, sub, mul, relu, sigmoid, abs, square, max_with_zero };
enum class ReductionOp { mean, sum, row_mean };

/**
 * @brief Records operations and runs the reverse sweep.
 *
 * A tape is confined to one thread. It keeps every recorded tensor alive until
 * it is destroyed, so tapes are meant to be short-lived (one optimizer step).
 */
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;
    Tape(Tape&&) = default;
    Tape& operator=(Tape&&) = default;
    ~Tape();

    Tensor matmul(const Tensor& a, const Tensor& b);
    Tensor transpose(const Tensor& a);

    Tensor add(const Tensor& a, const Tensor& b);
    Tensor sub(const Tensor& a, const Tensor& b);
    Tensor mul(const Tensor& a, const Tensor& b);
    /// Elementwise max; ties send the gradient to `a`.
    Tensor maximum(const Tensor& a, const Tensor& b);

    Tensor relu(const Tensor& a);
    Tensor max_with_zero(const Tensor& a) { return relu(a); }
    Tensor sigmoid(const Tensor& a);
    Tensor abs(const Tensor& a);
    Tensor square(const Tensor& a);
    Tensor sqrt(const Tensor& a);
    Tensor reciprocal(const Tensor& a);
    Tensor log(const Tensor& a);
    /// Gradient passes only where lo < a < hi.
    Tensor clamp(const Tensor& a, double lo, double hi);

    Tensor scale(const Tensor& a, double factor);
    Tensor add_scalar(const Tensor& a, double offset);
    /// `a * s` with `s` a 1x1 tensor.
    Tensor mul_scalar(const Tensor& a, const Tensor& s);
    /// `a / s` with `s` a 1x1 tensor.
    Tensor div_scalar(const Tensor& a, const Tensor& s);

    Tensor elementwise(ElementwiseOp op, const Tensor& a);
    Tensor elementwise(ElementwiseOp op, const Tensor& a, const Tensor& b);

    Tensor mean(const Tensor& a);
    Tensor sum(const Tensor& a);
    /// Average of the rows: a 1 x cols row vector.
    Tensor row_mean(const Tensor& a);
    Tensor reduce(ReductionOp op, const Tensor& a);

    /**
     * Builds a `rows x cols` tensor whose flat (row-major) entry k is the flat
     * entry `indices[k]` of `a`, or 0 when `indices[k] < 0`. The backward rule
     * scatter-adds, so repeated indices are allowed.
     */
    Tensor gather(const Tensor& a, const std::vector<Index>& indices, Index rows, Index cols);
    Tensor select_rows(const Tensor& a, const std::vector<Index>& rows);
    Tensor vstack(const std::vector<Tensor>& parts);

    /// Same value, cut from the graph.
    Tensor detach(const Tensor& a);

    /**
     * Propagates d(loss)/d(x) into every reachable tensor with `requires_grad`.
     * Each recorded operation's backward rule runs exactly once.
     *
     * @throws ContractError if `loss` is not 1x1 or the tape is empty while
     * `loss` requires a gradient.
     */
    void backward(const Tensor& loss);

    /// Number of recorded operations.
    std::size_t size() const { return ops_.size(); }

    /// Backward-rule invocations performed by the most recent `backward()`.
    std::size_t last_backward_invocations() const { return last_invocations_; }

private:
    struct Op {
        const char* name;
        std::shared_ptr<detail::Node> output;
        std::function<void(const Matrix&)> backward;
    };

    Tensor record(const char* name, Matrix value, bool requires_grad,
                  std::function<void(const Matrix&)> backward);

    std::vector<Op> ops_;
    std::size_t last_invocations_ = 0;
};

} // namespace mgg::ad
