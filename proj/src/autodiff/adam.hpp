#pragma once

#include <cstdint>
#include <vector>

#include "autodiff/tensor.hpp"

namespace mgg::ad {

struct AdamOptions {
    double learning_rate = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/**
 * Bias-corrected Adam over a fixed parameter group.
 *
 * `step()` reads the accumulated gradients and updates values in place; it
 * does not touch the gradients, so callers reset them with `zero_grad()`.
 */
class Adam {
public:
    Adam(std::vector<Tensor> params, AdamOptions options);

    /// @throws ContractError if any parameter has no gradient.
    void step();

    void zero_grad();

    std::int64_t step_count() const { return steps_; }
    const AdamOptions& options() const { return options_; }
    const std::vector<Tensor>& parameters() const { return params_; }

    const std::vector<Matrix>& first_moments() const { return first_; }
    const std::vector<Matrix>& second_moments() const { return second_; }

private:
    std::vector<Tensor> params_;
    AdamOptions options_;
    std::vector<Matrix> first_;
    std::vector<Matrix> second_;
    std::int64_t steps_ = 0;
};

} // namespace mgg::ad
