#include "autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/error.hpp"

namespace mgg::ad {

namespace detail {

struct Node {
    Matrix value;
    Matrix grad; // 0x0 until the first accumulation
    bool requires_grad = false;
    bool leaf = true;
};

} // namespace detail

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

namespace {

std::string shape_of(const Matrix& m) {
    std::ostringstream out;
    out << m.rows() << "x" << m.cols();
    return out.str();
}

void require_defined(const Tensor& t, const char* op) {
    if (!t.defined()) {
        throw ContractError(std::string(op) + ": undefined tensor operand");
    }
}

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_of(a) + " vs " + shape_of(b));
    }
}

void require_scalar(const char* op, const Matrix& s) {
    if (s.rows() != 1 || s.cols() != 1) {
        throw DimensionError(std::string(op) + ": expected a 1x1 scalar operand, got " + shape_of(s));
    }
}

void accumulate(Node& node, const Matrix& delta) {
    if (!node.requires_grad) {
        return;
    }
    if (node.grad.size() == 0) {
        node.grad = delta;
    } else {
        node.grad += delta;
    }
}

} // namespace

Index Tensor::rows() const { return value().rows(); }
Index Tensor::cols() const { return value().cols(); }

Tensor Tensor::constant(Matrix value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    return Tensor(std::move(node));
}

Tensor Tensor::parameter(Matrix value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->requires_grad = true;
    return Tensor(std::move(node));
}

const Matrix& Tensor::value() const {
    if (!node_) {
        throw ContractError("Tensor::value on an undefined tensor");
    }
    return node_->value;
}

Matrix& Tensor::mutable_value() {
    if (!node_) {
        throw ContractError("Tensor::mutable_value on an undefined tensor");
    }
    return node_->value;
}

double Tensor::item() const {
    const auto& v = value();
    if (v.rows() != 1 || v.cols() != 1) {
        throw ContractError("Tensor::item on a " + shape_of(v) + " tensor");
    }
    return v(0, 0);
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool flag) {
    if (!node_) {
        throw ContractError("set_requires_grad on an undefined tensor");
    }
    if (!node_->leaf) {
        throw ContractError("set_requires_grad is only allowed on leaf tensors");
    }
    node_->requires_grad = flag;
}

bool Tensor::is_leaf() const { return node_ && node_->leaf; }

bool Tensor::has_grad() const { return node_ && node_->grad.size() != 0; }

const Matrix& Tensor::grad() const {
    if (!has_grad()) {
        throw ContractError("Tensor::grad: no gradient has been accumulated");
    }
    return node_->grad;
}

void Tensor::zero_grad() {
    if (!node_) {
        return;
    }
    node_->grad = Matrix::Zero(node_->value.rows(), node_->value.cols());
}

Tape::~Tape() = default;

Tensor Tape::record(const char* name, Matrix value, bool requires_grad,
                    std::function<void(const Matrix&)> backward) {
    if (!value.allFinite()) {
        throw NumericalError(std::string(name) + ": non-finite value in forward output");
    }
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->leaf = false;
    node->requires_grad = requires_grad;
    if (requires_grad) {
        ops_.push_back(Op{name, node, std::move(backward)});
    }
    return Tensor(std::move(node));
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
    require_defined(a, "matmul");
    require_defined(b, "matmul");
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: inner dimensions differ, " + shape_of(a.value()) + " x " +
                             shape_of(b.value()));
    }
    NodePtr na = a.node_, nb = b.node_;
    Matrix out = na->value * nb->value;
    return record("matmul", std::move(out), na->requires_grad || nb->requires_grad,
                  [na, nb](const Matrix& g) {
                      if (na->requires_grad) {
                          accumulate(*na, g * nb->value.transpose());
                      }
                      if (nb->requires_grad) {
                          accumulate(*nb, na->value.transpose() * g);
                      }
                  });
}

Tensor Tape::transpose(const Tensor& a) {
    require_defined(a, "transpose");
    NodePtr na = a.node_;
    Matrix out = na->value.transpose();
    return record("transpose", std::move(out), na->requires_grad,
                  [na](const Matrix& g) { accumulate(*na, g.transpose()); });
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
    require_defined(a, "add");
    require_defined(b, "add");
    require_same_shape("add", a.value(), b.value());
    NodePtr na = a.node_, nb = b.node_;
    Matrix out = na->value + nb->value;
    return record("add", std::move(out), na->requires_grad || nb->requires_grad,
                  [na, nb](const Matrix& g) {
                      accumulate(*na, g);
                      accumulate(*nb, g);
                  });
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
    require_defined(a, "sub");
    require_defined(b, "sub");
    require_same_shape("sub", a.value(), b.value());
    NodePtr na = a.node_, nb = b.node_;
    Matrix out = na->value - nb->value;
    return record("sub", std::move(out), na->requires_grad || nb->requires_grad,
                  [na, nb](const Matrix& g) {
                      accumulate(*na, g);
                      if (nb->requires_grad) {
                          accumulate(*nb, -g);
                      }
                  });
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
    require_defined(a, "mul");
    require_defined(b, "mul");
    require_same_shape("mul", a.value(), b.value());
    NodePtr na = a.node_, nb = b.node_;
    Matrix out = na->value.cwiseProduct(nb->value);
    return record("mul", std::move(out), na->requires_grad || nb->requires_grad,
                  [na, nb](const Matrix& g) {
                      if (na->requires_grad) {
                          accumulate(*na, g.cwiseProduct(nb->value));
                      }
                      if (nb->requires_grad) {
                          accumulate(*nb, g.cwiseProduct(na->value));
                      }
                  });
}

Tensor Tape::maximum(const Tensor& a, const Tensor& b) {
    require_defined(a, "maximum");
    require_defined(b, "maximum");
    require_same_shape("maximum", a.value(), b.value());
    NodePtr na = a.node_, nb = b.node_;
    Matrix pick_a = (na->value.array() >= nb->value.array()).cast<double>().matrix();
    Matrix out = na->value.cwiseMax(nb->value);
    return record("maximum", std::move(out), na->requires_grad || nb->requires_grad,
                  [na, nb, pick_a](const Matrix& g) {
                      if (na->requires_grad) {
                          accumulate(*na, g.cwiseProduct(pick_a));
                      }
                      if (nb->requires_grad) {
                          Matrix pick_b = (1.0 - pick_a.array()).matrix();
                          accumulate(*nb, g.cwiseProduct(pick_b));
                      }
                  });
}

Tensor Tape::relu(const Tensor& a) {
    require_defined(a, "relu");
    NodePtr na = a.node_;
    // subgradient 0 at 0
    Matrix mask = (na->value.array() > 0.0).cast<double>().matrix();
    Matrix out = na->value.cwiseMax(0.0);
    return record("relu", std::move(out), na->requires_grad,
                  [na, mask](const Matrix& g) { accumulate(*na, g.cwiseProduct(mask)); });
}

Tensor Tape::sigmoid(const Tensor& a) {
    require_defined(a, "sigmoid");
    NodePtr na = a.node_;
    Matrix out = na->value.unaryExpr([](double x) {
        if (x >= 0.0) {
            return 1.0 / (1.0 + std::exp(-x));
        }
        const double e = std::exp(x);
        return e / (1.0 + e);
    });
    Matrix slope = out.array() * (1.0 - out.array());
    return record("sigmoid", std::move(out), na->requires_grad,
                  [na, slope](const Matrix& g) { accumulate(*na, g.cwiseProduct(slope)); });
}

Tensor Tape::abs(const Tensor& a) {
    require_defined(a, "abs");
    NodePtr na = a.node_;
    Matrix sign = na->value.unaryExpr([](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
    Matrix out = na->value.cwiseAbs();
    return record("abs", std::move(out), na->requires_grad,
                  [na, sign](const Matrix& g) { accumulate(*na, g.cwiseProduct(sign)); });
}

Tensor Tape::square(const Tensor& a) {
    require_defined(a, "square");
    NodePtr na = a.node_;
    Matrix out = na->value.cwiseAbs2();
    return record("square", std::move(out), na->requires_grad,
                  [na](const Matrix& g) { accumulate(*na, 2.0 * g.cwiseProduct(na->value)); });
}

Tensor Tape::sqrt(const Tensor& a) {
    require_defined(a, "sqrt");
    NodePtr na = a.node_;
    if ((na->value.array() < 0.0).any()) {
        throw NumericalError("sqrt: negative input");
    }
    Matrix out = na->value.cwiseSqrt();
    Matrix slope = (0.5 / out.array()).matrix();
    if (na->requires_grad && !slope.allFinite()) {
        throw NumericalError("sqrt: derivative undefined at 0");
    }
    return record("sqrt", std::move(out), na->requires_grad,
                  [na, slope](const Matrix& g) { accumulate(*na, g.cwiseProduct(slope)); });
}

Tensor Tape::reciprocal(const Tensor& a) {
    require_defined(a, "reciprocal");
    NodePtr na = a.node_;
    Matrix out = na->value.cwiseInverse();
    Matrix slope = (-out.array().square()).matrix();
    return record("reciprocal", std::move(out), na->requires_grad,
                  [na, slope](const Matrix& g) { accumulate(*na, g.cwiseProduct(slope)); });
}

Tensor Tape::log(const Tensor& a) {
    require_defined(a, "log");
    NodePtr na = a.node_;
    if ((na->value.array() <= 0.0).any()) {
        throw NumericalError("log: non-positive input");
    }
    Matrix out = na->value.array().log().matrix();
    return record("log", std::move(out), na->requires_grad, [na](const Matrix& g) {
        accumulate(*na, g.cwiseQuotient(na->value));
    });
}

Tensor Tape::clamp(const Tensor& a, double lo, double hi) {
    require_defined(a, "clamp");
    if (!(lo <= hi)) {
        throw ContractError("clamp: lo must not exceed hi");
    }
    NodePtr na = a.node_;
    Matrix pass = ((na->value.array() > lo) && (na->value.array() < hi)).cast<double>().matrix();
    Matrix out = na->value.cwiseMax(lo).cwiseMin(hi);
    return record("clamp", std::move(out), na->requires_grad,
                  [na, pass](const Matrix& g) { accumulate(*na, g.cwiseProduct(pass)); });
}

Tensor Tape::scale(const Tensor& a, double factor) {
    require_defined(a, "scale");
    NodePtr na = a.node_;
    Matrix out = na->value * factor;
    return record("scale", std::move(out), na->requires_grad,
                  [na, factor](const Matrix& g) { accumulate(*na, g * factor); });
}

Tensor Tape::add_scalar(const Tensor& a, double offset) {
    require_defined(a, "add_scalar");
    NodePtr na = a.node_;
    Matrix out = (na->value.array() + offset).matrix();
    return record("add_scalar", std::move(out), na->requires_grad,
                  [na](const Matrix& g) { accumulate(*na, g); });
}

Tensor Tape::mul_scalar(const Tensor& a, const Tensor& s) {
    require_defined(a, "mul_scalar");
    require_defined(s, "mul_scalar");
    require_scalar("mul_scalar", s.value());
    NodePtr na = a.node_, ns = s.node_;
    Matrix out = na->value * ns->value(0, 0);
    return record("mul_scalar", std::move(out), na->requires_grad || ns->requires_grad,
                  [na, ns](const Matrix& g) {
                      if (na->requires_grad) {
                          accumulate(*na, g * ns->value(0, 0));
                      }
                      if (ns->requires_grad) {
                          Matrix d(1, 1);
                          d(0, 0) = g.cwiseProduct(na->value).sum();
                          accumulate(*ns, d);
                      }
                  });
}

Tensor Tape::div_scalar(const Tensor& a, const Tensor& s) {
    require_defined(a, "div_scalar");
    require_defined(s, "div_scalar");
    require_scalar("div_scalar", s.value());
    NodePtr na = a.node_, ns = s.node_;
    const double denom = ns->value(0, 0);
    if (denom == 0.0) {
        throw NumericalError("div_scalar: division by zero");
    }
    Matrix out = na->value / denom;
    return record("div_scalar", std::move(out), na->requires_grad || ns->requires_grad,
                  [na, ns](const Matrix& g) {
                      const double d = ns->value(0, 0);
                      if (na->requires_grad) {
                          accumulate(*na, g / d);
                      }
                      if (ns->requires_grad) {
                          Matrix ds(1, 1);
                          ds(0, 0) = -g.cwiseProduct(na->value).sum() / (d * d);
                          accumulate(*ns, ds);
                      }
                  });
}

Tensor Tape::elementwise(ElementwiseOp op, const Tensor& a) {
    switch (op) {
    case ElementwiseOp::relu:
        return relu(a);
    case ElementwiseOp::max_with_zero:
        return max_with_zero(a);
    case ElementwiseOp::sigmoid:
        return sigmoid(a);
    case ElementwiseOp::abs:
        return abs(a);
    case ElementwiseOp::square:
        return square(a);
    default:
        throw ContractError("elementwise: binary operation called with one operand");
    }
}

Tensor Tape::elementwise(ElementwiseOp op, const Tensor& a, const Tensor& b) {
    switch (op) {
    case ElementwiseOp::add:
        return add(a, b);
    case ElementwiseOp::sub:
        return sub(a, b);
    case ElementwiseOp::mul:
        return mul(a, b);
    default:
        throw ContractError("elementwise: unary operation called with two operands");
    }
}

Tensor Tape::mean(const Tensor& a) {
    require_defined(a, "mean");
    if (a.value().size() == 0) {
        throw ContractError("mean: empty tensor");
    }
    NodePtr na = a.node_;
    Matrix out(1, 1);
    out(0, 0) = na->value.mean();
    const double share = 1.0 / static_cast<double>(na->value.size());
    return record("mean", std::move(out), na->requires_grad, [na, share](const Matrix& g) {
        accumulate(*na, Matrix::Constant(na->value.rows(), na->value.cols(), g(0, 0) * share));
    });
}

Tensor Tape::sum(const Tensor& a) {
    require_defined(a, "sum");
    if (a.value().size() == 0) {
        throw ContractError("sum: empty tensor");
    }
    NodePtr na = a.node_;
    Matrix out(1, 1);
    out(0, 0) = na->value.sum();
    return record("sum", std::move(out), na->requires_grad, [na](const Matrix& g) {
        accumulate(*na, Matrix::Constant(na->value.rows(), na->value.cols(), g(0, 0)));
    });
}

Tensor Tape::row_mean(const Tensor& a) {
    require_defined(a, "row_mean");
    if (a.value().size() == 0) {
        throw ContractError("row_mean: empty tensor");
    }
    NodePtr na = a.node_;
    Matrix out = na->value.colwise().mean();
    const double share = 1.0 / static_cast<double>(na->value.rows());
    return record("row_mean", std::move(out), na->requires_grad, [na, share](const Matrix& g) {
        accumulate(*na, (g * share).replicate(na->value.rows(), 1));
    });
}

Tensor Tape::reduce(ReductionOp op, const Tensor& a) {
    switch (op) {
    case ReductionOp::mean:
        return mean(a);
    case ReductionOp::sum:
        return sum(a);
    case ReductionOp::row_mean:
        return row_mean(a);
    }
    throw ContractError("reduce: unknown operation");
}

Tensor Tape::gather(const Tensor& a, const std::vector<Index>& indices, Index rows, Index cols) {
    require_defined(a, "gather");
    if (static_cast<Index>(indices.size()) != rows * cols) {
        throw DimensionError("gather: index count does not match output shape");
    }
    NodePtr na = a.node_;
    const Index limit = na->value.size();
    Matrix out = Matrix::Zero(rows, cols);
    const double* src = na->value.data();
    double* dst = out.data();
    for (Index k = 0; k < rows * cols; ++k) {
        const Index idx = indices[static_cast<std::size_t>(k)];
        if (idx >= limit) {
            throw DimensionError("gather: index out of range");
        }
        if (idx >= 0) {
            dst[k] = src[idx];
        }
    }
    return record("gather", std::move(out), na->requires_grad, [na, indices](const Matrix& g) {
        Matrix d = Matrix::Zero(na->value.rows(), na->value.cols());
        const double* gs = g.data();
        double* ds = d.data();
        for (std::size_t k = 0; k < indices.size(); ++k) {
            if (indices[k] >= 0) {
                ds[indices[k]] += gs[k];
            }
        }
        accumulate(*na, d);
    });
}

Tensor Tape::select_rows(const Tensor& a, const std::vector<Index>& rows) {
    require_defined(a, "select_rows");
    const Index cols = a.cols();
    std::vector<Index> indices;
    indices.reserve(rows.size() * static_cast<std::size_t>(cols));
    for (Index r : rows) {
        if (r < 0 || r >= a.rows()) {
            throw DimensionError("select_rows: row index out of range");
        }
        for (Index c = 0; c < cols; ++c) {
            indices.push_back(r * cols + c);
        }
    }
    return gather(a, indices, static_cast<Index>(rows.size()), cols);
}

Tensor Tape::vstack(const std::vector<Tensor>& parts) {
    if (parts.empty()) {
        throw ContractError("vstack: no parts");
    }
    const Index cols = parts.front().cols();
    Index rows = 0;
    bool grad = false;
    std::vector<NodePtr> nodes;
    for (const auto& p : parts) {
        require_defined(p, "vstack");
        if (p.cols() != cols) {
            throw DimensionError("vstack: column counts differ");
        }
        rows += p.rows();
        grad = grad || p.requires_grad();
        nodes.push_back(p.node_);
    }
    Matrix out(rows, cols);
    Index offset = 0;
    for (const auto& n : nodes) {
        out.middleRows(offset, n->value.rows()) = n->value;
        offset += n->value.rows();
    }
    return record("vstack", std::move(out), grad, [nodes](const Matrix& g) {
        Index off = 0;
        for (const auto& n : nodes) {
            if (n->requires_grad) {
                accumulate(*n, g.middleRows(off, n->value.rows()));
            }
            off += n->value.rows();
        }
    });
}

Tensor Tape::detach(const Tensor& a) {
    require_defined(a, "detach");
    return Tensor::constant(a.value());
}

void Tape::backward(const Tensor& loss) {
    require_defined(loss, "backward");
    if (loss.rows() != 1 || loss.cols() != 1) {
        throw ContractError("backward: loss must be 1x1, got " + shape_of(loss.value()));
    }
    last_invocations_ = 0;
    if (!loss.requires_grad()) {
        return;
    }
    if (loss.is_leaf()) {
        accumulate(*loss.node_, Matrix::Ones(1, 1));
        return;
    }
    if (ops_.empty()) {
        throw ContractError("backward: empty tape");
    }
    for (auto& op : ops_) {
        op.output->grad.resize(0, 0);
    }
    loss.node_->grad = Matrix::Ones(1, 1);
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
        ++last_invocations_;
        if (it->output->grad.size() == 0) {
            continue;
        }
        it->backward(it->output->grad);
    }
}

} // namespace mgg::ad
