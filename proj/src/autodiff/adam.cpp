#include "autodiff/adam.hpp"

#include <cmath>

#include "core/error.hpp"

namespace mgg::ad {

Adam::Adam(std::vector<Tensor> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
    if (!(options_.learning_rate > 0.0) || !(options_.beta1 >= 0.0 && options_.beta1 < 1.0) ||
        !(options_.beta2 >= 0.0 && options_.beta2 < 1.0) || !(options_.epsilon > 0.0)) {
        throw ValidationError("Adam: invalid hyper-parameters");
    }
    first_.reserve(params_.size());
    second_.reserve(params_.size());
    for (const auto& p : params_) {
        first_.push_back(Matrix::Zero(p.rows(), p.cols()));
        second_.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
}

void Adam::step() {
    for (const auto& p : params_) {
        if (!p.has_grad()) {
            throw ContractError("Adam::step: parameter without gradient");
        }
    }
    ++steps_;
    const double t = static_cast<double>(steps_);
    const double correction1 = 1.0 - std::pow(options_.beta1, t);
    const double correction2 = 1.0 - std::pow(options_.beta2, t);
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const Matrix& g = params_[i].grad();
        first_[i] = options_.beta1 * first_[i] + (1.0 - options_.beta1) * g;
        second_[i] = options_.beta2 * second_[i] + (1.0 - options_.beta2) * g.cwiseAbs2();
        auto m_hat = first_[i].array() / correction1;
        auto v_hat = second_[i].array() / correction2;
        params_[i].mutable_value().array() -= options_.learning_rate * m_hat / (v_hat.sqrt() + options_.epsilon);
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) {
        p.zero_grad();
    }
}

} // namespace mgg::ad
