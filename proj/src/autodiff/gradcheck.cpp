#include "autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "core/error.hpp"

namespace mgg::ad {

GradCheckResult check_gradients(const std::function<Tensor(Tape&)>& f, std::vector<Tensor> params,
                                const GradCheckOptions& options) {
    if (!(options.step > 0.0)) {
        throw ContractError("check_gradients: step must be positive");
    }
    for (auto& p : params) {
        p.zero_grad();
    }
    std::vector<Matrix> analytic;
    {
        Tape tape;
        Tensor loss = f(tape);
        tape.backward(loss);
        for (const auto& p : params) {
            analytic.push_back(p.has_grad() ? p.grad() : Matrix::Zero(p.rows(), p.cols()));
        }
    }

    std::vector<std::pair<std::size_t, Index>> entries;
    for (std::size_t i = 0; i < params.size(); ++i) {
        for (Index k = 0; k < params[i].value().size(); ++k) {
            entries.emplace_back(i, k);
        }
    }
    if (options.max_entries > 0 && entries.size() > options.max_entries) {
        std::mt19937_64 rng(options.seed);
        std::shuffle(entries.begin(), entries.end(), rng);
        entries.resize(options.max_entries);
        std::sort(entries.begin(), entries.end());
    }

    auto evaluate = [&f]() {
        Tape tape;
        return f(tape).item();
    };

    GradCheckResult result;
    for (const auto& [pi, k] : entries) {
        double* slot = params[pi].mutable_value().data() + k;
        const double saved = *slot;
        *slot = saved + options.step;
        const double up = evaluate();
        *slot = saved - options.step;
        const double down = evaluate();
        *slot = saved;

        const double numeric = (up - down) / (2.0 * options.step);
        const double exact = analytic[pi].data()[k];
        const double err = std::abs(exact - numeric) / (std::abs(exact) + std::abs(numeric) + options.floor);
        ++result.entries_checked;
        if (err > result.max_relative_error || result.entries_checked == 1) {
            result.max_relative_error = std::max(result.max_relative_error, err);
            if (err >= result.max_relative_error) {
                result.worst_param = pi;
                result.worst_index = k;
                result.worst_analytic = exact;
                result.worst_numeric = numeric;
            }
        }
    }
    for (auto& p : params) {
        p.zero_grad();
    }
    return result;
}

double finite_diff_check(const std::function<Tensor(Tape&, const Tensor&)>& f, const Matrix& x,
                         double step) {
    Tensor param = Tensor::parameter(x);
    GradCheckOptions options;
    options.step = step;
    auto result = check_gradients([&](Tape& tape) { return f(tape, param); }, {param}, options);
    return result.max_relative_error;
}

} // namespace mgg::ad
