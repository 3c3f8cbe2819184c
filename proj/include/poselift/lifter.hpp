#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "poselift/layers.hpp"
#include "poselift/tensor.hpp"

namespace poselift {

enum class ActivationKind { ReLU, Swish };
enum class Variant { Original, V1, V2, V3 };

const std::string& variant_name(Variant v);
Variant variant_from_string(const std::string& s);
const std::string& activation_name(ActivationKind k);
ActivationKind activation_from_string(const std::string& s);

struct LifterConfig {
    int num_joints = 16;
    int linear_size = 1024;
    int num_blocks = 2;
    bool extra_layer = false; // one extra linear+BN+activation+dropout stage after the input stage
    ActivationKind activation = ActivationKind::ReLU;
    double dropout_rate = 0.5;
    Variant variant_label = Variant::Original;

    int input_dim() const { return 2 * num_joints; }
    int output_dim() const { return 3 * num_joints; }
    void validate() const;

    // Original = {extra off, ReLU}; V1 = {extra on, ReLU}; V2 = {extra on,
    // Swish}; V3 shares V2's architecture and differs only in training loss.
    static LifterConfig for_variant(Variant v);
};

/// One linear -> batchnorm -> activation -> dropout stage.
class Stage {
public:
    Stage(const std::string& name, std::size_t in, std::size_t out, ActivationKind act,
          double dropout_rate, std::shared_ptr<Param> swish_beta, std::uint64_t dropout_seed);

    Tensor forward(const Tensor& x, LayerMode mode);
    Tensor backward(const Tensor& grad_out);
    void collect_params(std::vector<Param*>& out);

    LinearLayer linear;
    BatchNormLayer bn;
    DropoutLayer dropout;
    ActivationKind act;
    std::string name;

private:
    std::optional<SwishActivation> swish_;
    Tensor act_in_cache_; // BN output, needed for the ReLU derivative
};

/// Two stages with an additive skip connection around them.
class Block {
public:
    Block(const std::string& name, std::size_t size, ActivationKind act, double dropout_rate,
          std::shared_ptr<Param> swish_beta, std::uint64_t seed_a, std::uint64_t seed_b);

    Tensor forward(const Tensor& x, LayerMode mode);
    Tensor backward(const Tensor& grad_out);
    void collect_params(std::vector<Param*>& out);

    Stage a;
    Stage b;
};

/// The 2D->3D lifting network: input stage, optional extra stage, residual
/// blocks, output linear. Built deterministically from a seed.
class Lifter {
public:
    Lifter(const LifterConfig& config, std::uint64_t seed);

    /// x2d is batch x 2J (normalized); result is batch x 3J (normalized).
    Tensor forward(const Tensor& x2d, LayerMode mode);
    /// dL/d(output) -> dL/d(input), accumulating parameter gradients.
    /// Requires a prior Train-mode forward.
    Tensor backward(const Tensor& grad_out);

    /// Learnable parameters in a stable order; names are unique. A shared
    /// Swish beta appears exactly once, last.
    std::vector<Param*> params();
    /// Everything a checkpoint stores: learnable values plus batch-norm
    /// running statistics, keyed by unique names.
    std::vector<std::pair<std::string, Tensor*>> state_entries();

    std::size_t num_learnable();
    void zero_grads();
    void set_dropout_frozen(bool frozen);
    void set_mode(LayerMode mode) { mode_ = mode; }
    LayerMode mode() const { return mode_; }

    const LifterConfig& config() const { return config_; }
    std::shared_ptr<Param> swish_beta() const { return swish_beta_; }

    Stage& in_stage() { return in_stage_; }
    std::optional<Stage>& extra_stage() { return extra_stage_; }
    std::vector<Block>& blocks() { return blocks_; }
    LinearLayer& out_linear() { return out_linear_; }

private:
    LifterConfig config_;
    std::shared_ptr<Param> swish_beta_; // null for ReLU configs
    Stage in_stage_;
    std::optional<Stage> extra_stage_;
    std::vector<Block> blocks_;
    LinearLayer out_linear_;
    LayerMode mode_ = LayerMode::Eval;
};

} // namespace poselift
