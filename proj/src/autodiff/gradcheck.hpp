#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "autodiff/tensor.hpp"

namespace mgg::ad {

struct GradCheckOptions {
    double step = 1e-6;
    /// Floor in the denominator |a - c| / (|a| + |c| + floor).
    double floor = 1e-6;
    /// Check at most this many entries (uniformly sampled); 0 checks all.
    std::size_t max_entries = 0;
    std::uint64_t seed = 0;
};

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t entries_checked = 0;
    // location of the worst entry
    std::size_t worst_param = 0;
    Index worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

/**
 * Compares analytic gradients of a scalar function against central finite
 * differences. `f` must rebuild its computation on the supplied tape from the
 * current parameter values every time it is called.
 */
GradCheckResult check_gradients(const std::function<Tensor(Tape&)>& f, std::vector<Tensor> params,
                                const GradCheckOptions& options = {});

/// Single-input convenience form: returns the max relative error.
double finite_diff_check(const std::function<Tensor(Tape&, const Tensor&)>& f, const Matrix& x,
                         double step = 1e-6);

} // namespace mgg::ad
