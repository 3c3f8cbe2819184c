#include "poselift/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

#include "poselift/rng.hpp"

namespace poselift {

namespace {

// Fixed positive coefficients keep every gradient path generically O(1). A
// plain sum would have an identically zero input gradient through train-mode
// batch normalization (normalized columns sum to zero), and a sum of squares
// is nearly invariant there (normalized columns have fixed norm), leaving
// only epsilon-scale gradients that central differences cannot resolve.
Tensor loss_weights(std::size_t rows, std::size_t cols) {
    Rng rng(0x5eedc0eff1c1e575ULL);
    Tensor c(rows, cols);
    for (std::size_t i = 0; i < c.size(); ++i) c.at_flat(i) = rng.uniform(0.5, 1.5);
    return c;
}

double weighted_sum(const Tensor& c, const Tensor& y) {
    require_same_shape(c, y, "grad_check loss");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += c.at_flat(i) * y.at_flat(i);
    return s;
}

} // namespace

GradCheckReport grad_check(const DiffFunction& f, const Tensor& input, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be > 0");
    if (!input.all_finite()) throw std::invalid_argument("grad_check: non-finite input");

    for (Param* p : f.params) p->zero_grad();
    Tensor y0 = f.forward(input);
    const Tensor c = loss_weights(y0.rows(), y0.cols());
    if (!std::isfinite(weighted_sum(c, y0))) throw std::runtime_error("grad_check: non-finite loss");
    Tensor analytic_gx = f.backward(c);

    GradCheckReport report;
    auto record = [&](double analytic, double numeric, const std::string& site) {
        const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
        const double rel = std::fabs(analytic - numeric) / denom;
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_site = site;
        }
    };
    auto probe = [&](double& slot) {
        const double saved = slot;
        slot = saved + eps;
        const double lp = weighted_sum(c, f.forward(input));
        slot = saved - eps;
        const double lm = weighted_sum(c, f.forward(input));
        slot = saved;
        if (!std::isfinite(lp) || !std::isfinite(lm))
            throw std::runtime_error("grad_check: non-finite loss under perturbation");
        return (lp - lm) / (2.0 * eps);
    };

    for (Param* p : f.params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double numeric = probe(p->value.at_flat(i));
            record(p->grad.at_flat(i), numeric, p->name + "[" + std::to_string(i) + "]");
        }
    }

    Tensor x = input;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x.at_flat(i);
        x.at_flat(i) = saved + eps;
        const double lp = weighted_sum(c, f.forward(x));
        x.at_flat(i) = saved - eps;
        const double lm = weighted_sum(c, f.forward(x));
        x.at_flat(i) = saved;
        record(analytic_gx.at_flat(i), (lp - lm) / (2.0 * eps), "input[" + std::to_string(i) + "]");
    }
    return report;
}

} // namespace poselift
