#include "poselift/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace poselift {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

LinearLayer::LinearLayer(std::size_t in, std::size_t out, const std::string& name)
    : W(Tensor::zeros(in, out), name + ".W"), b(Tensor::zeros(1, out), name + ".b") {}

void LinearLayer::init_weights(Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(W.value.rows()));
    for (std::size_t i = 0; i < W.value.size(); ++i)
        W.value.at_flat(i) = rng.uniform(-bound, bound);
    b.value.fill(0.0);
}

Tensor LinearLayer::forward(const Tensor& x, LayerMode) {
    if (x.cols() != W.value.rows())
        throw ShapeError("linear " + W.name + ": input " + x.shape_str() + " incompatible with W " +
                         W.value.shape_str());
    x_cache_ = x;
    Tensor y = matmul(x, W.value);
    for (std::size_t i = 0; i < y.rows(); ++i) {
        double* yi = y.row(i);
        for (std::size_t j = 0; j < y.cols(); ++j) yi[j] += b.value.at_flat(j);
    }
    return y;
}

Tensor LinearLayer::backward(const Tensor& grad_out) {
    if (x_cache_.empty()) throw std::logic_error("linear backward before forward");
    Tensor dW = matmul_transpose_a(x_cache_, grad_out);
    for (std::size_t i = 0; i < dW.size(); ++i) W.grad.at_flat(i) += dW.at_flat(i);
    Tensor db = column_sums(grad_out);
    for (std::size_t i = 0; i < db.size(); ++i) b.grad.at_flat(i) += db.at_flat(i);
    return matmul_transpose_b(grad_out, W.value);
}

BatchNormLayer::BatchNormLayer(std::size_t dim, const std::string& name, double momentum,
                               double epsilon)
    : gamma(Tensor::full(1, dim, 1.0), name + ".gamma"),
      beta_shift(Tensor::zeros(1, dim), name + ".beta"),
      running_mean(Tensor::zeros(1, dim)),
      running_var(Tensor::full(1, dim, 1.0)),
      momentum_(momentum),
      epsilon_(epsilon) {
    if (!(momentum > 0.0 && momentum < 1.0)) throw std::invalid_argument("batchnorm: momentum must be in (0,1)");
    if (!(epsilon > 0.0)) throw std::invalid_argument("batchnorm: epsilon must be > 0");
}

Tensor BatchNormLayer::forward(const Tensor& x, LayerMode mode) {
    const std::size_t d = gamma.value.cols();
    if (x.cols() != d)
        throw ShapeError("batchnorm " + gamma.name + ": input " + x.shape_str() + " expected cols " +
                         std::to_string(d));
    const std::size_t n = x.rows();
    last_mode_ = mode;

    Tensor mean(1, d), var(1, d);
    if (mode == LayerMode::Train) {
        if (n < 2)
            throw std::invalid_argument("batchnorm " + gamma.name +
                                        ": Train mode requires batch >= 2, got " + std::to_string(n));
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += x(i, j);
            mean.at_flat(j) = s / static_cast<double>(n);
        }
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double dmu = x(i, j) - mean.at_flat(j);
                s += dmu * dmu;
            }
            var.at_flat(j) = s / static_cast<double>(n); // biased
        }
        for (std::size_t j = 0; j < d; ++j) {
            running_mean.at_flat(j) =
                (1.0 - momentum_) * running_mean.at_flat(j) + momentum_ * mean.at_flat(j);
            running_var.at_flat(j) =
                (1.0 - momentum_) * running_var.at_flat(j) + momentum_ * var.at_flat(j);
        }
    } else {
        mean = running_mean;
        var = running_var;
    }

    inv_std_cache_ = Tensor(1, d);
    for (std::size_t j = 0; j < d; ++j)
        inv_std_cache_.at_flat(j) = 1.0 / std::sqrt(var.at_flat(j) + epsilon_);

    xhat_cache_ = Tensor(n, d);
    Tensor y(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double xh = (x(i, j) - mean.at_flat(j)) * inv_std_cache_.at_flat(j);
            xhat_cache_(i, j) = xh;
            y(i, j) = gamma.value.at_flat(j) * xh + beta_shift.value.at_flat(j);
        }
    }
    return y;
}

Tensor BatchNormLayer::backward(const Tensor& grad_out) {
    if (xhat_cache_.empty()) throw std::logic_error("batchnorm backward before forward");
    require_same_shape(grad_out, xhat_cache_, "batchnorm backward");
    const std::size_t n = grad_out.rows(), d = grad_out.cols();

    for (std::size_t j = 0; j < d; ++j) {
        double dg = 0.0, db = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dg += grad_out(i, j) * xhat_cache_(i, j);
            db += grad_out(i, j);
        }
        gamma.grad.at_flat(j) += dg;
        beta_shift.grad.at_flat(j) += db;
    }

    Tensor dx(n, d);
    if (last_mode_ == LayerMode::Eval) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j)
                dx(i, j) = grad_out(i, j) * gamma.value.at_flat(j) * inv_std_cache_.at_flat(j);
        return dx;
    }

    // Train mode: mean and variance depend on x.
    for (std::size_t j = 0; j < d; ++j) {
        double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dxhat = grad_out(i, j) * gamma.value.at_flat(j);
            sum_dxhat += dxhat;
            sum_dxhat_xhat += dxhat * xhat_cache_(i, j);
        }
        const double scale = inv_std_cache_.at_flat(j) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double dxhat = grad_out(i, j) * gamma.value.at_flat(j);
            dx(i, j) = scale * (static_cast<double>(n) * dxhat - sum_dxhat -
                                xhat_cache_(i, j) * sum_dxhat_xhat);
        }
    }
    return dx;
}

DropoutLayer::DropoutLayer(double rate, std::uint64_t seed, const std::string& name)
    : rate_(rate), rng_(seed), name_(name) {
    if (!(rate >= 0.0 && rate < 1.0))
        throw std::invalid_argument("dropout " + name + ": rate must be in [0,1), got " +
                                    std::to_string(rate));
}

Tensor DropoutLayer::forward(const Tensor& x, LayerMode mode) {
    if (mode == LayerMode::Eval || rate_ == 0.0) {
        mask_valid_ = false;
        return x;
    }
    const bool reuse = frozen_ && mask_valid_ && mask_.same_shape(x);
    if (!reuse) {
        mask_ = Tensor(x.rows(), x.cols());
        const double keep_scale = 1.0 / (1.0 - rate_);
        for (std::size_t i = 0; i < mask_.size(); ++i)
            mask_.at_flat(i) = rng_.uniform() >= rate_ ? keep_scale : 0.0;
        mask_valid_ = true;
    }
    return hadamard(x, mask_);
}

Tensor DropoutLayer::backward(const Tensor& grad_out) {
    if (!mask_valid_) return grad_out; // Eval or rate 0: identity
    return hadamard(grad_out, mask_);
}

Tensor relu(const Tensor& x) {
    Tensor y = x;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y.at_flat(i) < 0.0) y.at_flat(i) = 0.0;
    return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
    require_same_shape(x, grad_out, "relu backward");
    Tensor dx = grad_out;
    for (std::size_t i = 0; i < dx.size(); ++i)
        if (x.at_flat(i) <= 0.0) dx.at_flat(i) = 0.0;
    return dx;
}

Tensor swish(const Tensor& x, double beta) {
    Tensor y = x;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double v = y.at_flat(i);
        y.at_flat(i) = v * sigmoid(beta * v);
    }
    return y;
}

Tensor SwishActivation::forward(const Tensor& x) {
    x_cache_ = x;
    return swish(x, beta_->value.at_flat(0));
}

Tensor SwishActivation::backward(const Tensor& grad_out) {
    if (x_cache_.empty()) throw std::logic_error("swish backward before forward");
    require_same_shape(grad_out, x_cache_, "swish backward");
    const double bv = beta_->value.at_flat(0);
    Tensor dx(x_cache_.rows(), x_cache_.cols());
    double dbeta = 0.0;
    for (std::size_t i = 0; i < dx.size(); ++i) {
        const double x = x_cache_.at_flat(i);
        const double s = sigmoid(bv * x);
        const double sp = s * (1.0 - s);
        dx.at_flat(i) = grad_out.at_flat(i) * (s + bv * x * sp);
        dbeta += grad_out.at_flat(i) * x * x * sp;
    }
    beta_->grad.at_flat(0) += dbeta;
    return dx;
}

} // namespace poselift
