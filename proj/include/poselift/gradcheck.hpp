#pragma once

#include <functional>
#include <string>
#include <vector>

#include "poselift/layers.hpp"
#include "poselift/tensor.hpp"

namespace poselift {

/// A differentiable map as the gradient checker sees it: a repeatable forward,
/// a backward that accumulates parameter gradients and returns dL/dinput, and
/// the parameters to perturb. Dropout inside must be frozen (or disabled) so
/// that repeated forwards agree.
struct DiffFunction {
    std::function<Tensor(const Tensor&)> forward;
    std::function<Tensor(const Tensor&)> backward;
    std::vector<Param*> params;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_site; // "<param name>[i]" or "input[i]"
};

/// Central-difference check of every parameter element and every input
/// element against the analytic gradients.
///
/// The scalar loss is a weighted sum of the outputs with fixed positive
/// pseudo-random coefficients, so every gradient path stays generically
/// O(1); both a plain sum and a sum of squares degenerate through train-mode
/// batch normalization (zero column means / fixed column norms).
/// Relative error uses denominator max(|analytic|, |numeric|, 1e-8).
///
/// Note train-mode batch normalization makes the mapping exactly constant in
/// any bias added directly before it; such parameters must not be in
/// `params` (their true gradient is zero and finite differences measure only
/// rounding noise there).
GradCheckReport grad_check(const DiffFunction& f, const Tensor& input, double eps);

} // namespace poselift
