#pragma once

#include <functional>
#include <random>
#include <vector>

#include "aec/tensor.hpp"

namespace aec::nn {

// Finite-difference verification of analytic gradients. The forward/backward
// callbacks run the implementation's templated kernels instantiated at f64
// (see tensor.hpp) so the central differences are not drowned by f32
// rounding at the 1e-4 acceptance tolerance.
struct GradCheckProblem {
    // Scalar loss of the parameters.
    std::function<double(const std::vector<DTensor>&)> loss;
    // Analytic d loss / d params, one tensor per parameter.
    std::function<std::vector<DTensor>(const std::vector<DTensor>&)> grads;
};

// Samples `samples` coordinates across the parameter tensors and returns
// max over them of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
double grad_check(const GradCheckProblem& problem, std::vector<DTensor> params, int samples,
                  std::mt19937& rng, double step = 1e-5);

}  // namespace aec::nn
