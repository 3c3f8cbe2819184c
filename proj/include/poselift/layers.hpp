#pragma once

#include <memory>
#include <string>
#include <vector>

#include "poselift/rng.hpp"
#include "poselift/tensor.hpp"

namespace poselift {

enum class LayerMode { Train, Eval };

/// A learnable tensor together with its gradient accumulator.
struct Param {
    Tensor value;
    Tensor grad;
    std::string name;

    Param() = default;
    Param(Tensor v, std::string n) : value(std::move(v)), name(std::move(n)) {
        grad = Tensor::zeros(value.rows(), value.cols());
    }
    void zero_grad() { grad.fill(0.0); }
};

/// Fully connected layer: y = x W + b.
///
/// W is (in x out), b is (1 x out). Weights are initialized uniformly in
/// +-sqrt(6/fan_in); biases start at zero.
class LinearLayer {
public:
    LinearLayer(std::size_t in, std::size_t out, const std::string& name);

    void init_weights(Rng& rng);

    Tensor forward(const Tensor& x, LayerMode mode);
    /// Accumulates into W.grad/b.grad; returns dL/dx. Requires a prior forward.
    Tensor backward(const Tensor& grad_out);

    std::vector<Param*> params() { return {&W, &b}; }

    Param W;
    Param b;

private:
    Tensor x_cache_;
};

/// Per-feature batch normalization with learnable affine.
///
/// Train mode normalizes with the biased batch variance and updates the
/// running statistics as an exponential moving average; Eval mode uses only
/// the running statistics, so output is independent of the rest of the batch.
class BatchNormLayer {
public:
    BatchNormLayer(std::size_t dim, const std::string& name, double momentum = 0.1,
                   double epsilon = 1e-5);

    Tensor forward(const Tensor& x, LayerMode mode);
    Tensor backward(const Tensor& grad_out);

    std::vector<Param*> params() { return {&gamma, &beta_shift}; }

    Param gamma;
    Param beta_shift;
    Tensor running_mean; // 1 x d
    Tensor running_var;  // 1 x d

    double momentum() const { return momentum_; }
    double epsilon() const { return epsilon_; }

private:
    double momentum_;
    double epsilon_;
    // Backward caches from the last forward.
    LayerMode last_mode_ = LayerMode::Train;
    Tensor xhat_cache_;
    Tensor inv_std_cache_; // 1 x d
};

/// Inverted dropout: kept units are scaled by 1/(1-rate) at train time so
/// Eval mode is an exact identity.
class DropoutLayer {
public:
    DropoutLayer(double rate, std::uint64_t seed, const std::string& name);

    Tensor forward(const Tensor& x, LayerMode mode);
    Tensor backward(const Tensor& grad_out);

    /// While frozen, forward reuses the last drawn mask (drawing one first if
    /// needed). Used by the gradient checker, where repeated forwards must
    /// agree.
    void set_frozen(bool frozen) { frozen_ = frozen; }
    double rate() const { return rate_; }
    const std::string& name() const { return name_; }

private:
    double rate_;
    Rng rng_;
    std::string name_;
    bool frozen_ = false;
    Tensor mask_; // per-element multiplier: 0 or 1/(1-rate)
    bool mask_valid_ = false;
};

/// Elementwise max(x, 0).
Tensor relu(const Tensor& x);
/// dL/dx for y = relu(x); the subgradient at 0 is 0.
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);

/// Elementwise x * sigmoid(beta * x) for a fixed beta.
Tensor swish(const Tensor& x, double beta);

/// Swish with a learnable scalar beta (initialized to 1).
///
/// Several activation sites may share one beta; its gradient accumulates
/// contributions from every element that flows through any sharing site.
class SwishActivation {
public:
    explicit SwishActivation(std::shared_ptr<Param> beta) : beta_(std::move(beta)) {}

    static std::shared_ptr<Param> make_beta(const std::string& name) {
        return std::make_shared<Param>(Tensor::full(1, 1, 1.0), name);
    }

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& grad_out);

    Param& beta() { return *beta_; }
    const std::shared_ptr<Param>& beta_ptr() const { return beta_; }

private:
    std::shared_ptr<Param> beta_;
    Tensor x_cache_;
};

} // namespace poselift
