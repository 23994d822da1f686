#include "aec/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "aec/rng.hpp"

namespace aec::nn {

double grad_check(const GradCheckProblem& problem, std::vector<DTensor> params, int samples,
                  std::mt19937& rng, double step) {
    const std::vector<DTensor> analytic = problem.grads(params);

    std::int64_t total = 0;
    for (const DTensor& p : params) total += p.numel();

    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        std::int64_t pick = static_cast<std::int64_t>(
            rng_uniform(rng, 0.0, static_cast<double>(total)));
        pick = std::min(pick, total - 1);
        std::size_t ti = 0;
        while (pick >= params[ti].numel()) {
            pick -= params[ti].numel();
            ++ti;
        }
        double& x = params[ti].data[static_cast<std::size_t>(pick)];
        const double x0 = x;
        const double h = step * std::max(std::abs(x0), 0.1);

        x = x0 + h;
        const double lp = problem.loss(params);
        x = x0 - h;
        const double lm = problem.loss(params);
        x = x0;

        const double numeric = (lp - lm) / (2.0 * h);
        const double a = analytic[ti].data[static_cast<std::size_t>(pick)];
        const double rel =
            std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace aec::nn
