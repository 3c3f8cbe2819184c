#include "poselift/lifter.hpp"

#include <stdexcept>

#include "poselift/rng.hpp"

namespace poselift {

const std::string& variant_name(Variant v) {
    static const std::string names[] = {"original", "v1", "v2", "v3"};
    return names[static_cast<int>(v)];
}

Variant variant_from_string(const std::string& s) {
    for (Variant v : {Variant::Original, Variant::V1, Variant::V2, Variant::V3})
        if (variant_name(v) == s) return v;
    throw std::invalid_argument("unknown variant '" + s + "' (expected original, v1, v2 or v3)");
}

const std::string& activation_name(ActivationKind k) {
    static const std::string names[] = {"relu", "swish"};
    return names[static_cast<int>(k)];
}

ActivationKind activation_from_string(const std::string& s) {
    if (s == "relu") return ActivationKind::ReLU;
    if (s == "swish") return ActivationKind::Swish;
    throw std::invalid_argument("unknown activation '" + s + "' (expected relu or swish)");
}

void LifterConfig::validate() const {
    if (num_joints < 1)
        throw std::invalid_argument("config: num_joints must be >= 1, got " +
                                    std::to_string(num_joints));
    if (linear_size < 1)
        throw std::invalid_argument("config: linear_size must be >= 1, got " +
                                    std::to_string(linear_size));
    if (num_blocks < 1)
        throw std::invalid_argument("config: num_blocks must be >= 1, got " +
                                    std::to_string(num_blocks));
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
        throw std::invalid_argument("config: dropout_rate must be in [0,1), got " +
                                    std::to_string(dropout_rate));
}

LifterConfig LifterConfig::for_variant(Variant v) {
    LifterConfig c;
    c.variant_label = v;
    switch (v) {
        case Variant::Original:
            c.extra_layer = false;
            c.activation = ActivationKind::ReLU;
            break;
        case Variant::V1:
            c.extra_layer = true;
            c.activation = ActivationKind::ReLU;
            break;
        case Variant::V2:
        case Variant::V3:
            c.extra_layer = true;
            c.activation = ActivationKind::Swish;
            break;
    }
    return c;
}

Stage::Stage(const std::string& name_, std::size_t in, std::size_t out, ActivationKind act_,
             double dropout_rate, std::shared_ptr<Param> swish_beta, std::uint64_t dropout_seed)
    : linear(in, out, name_ + ".linear"),
      bn(out, name_ + ".bn"),
      dropout(dropout_rate, dropout_seed, name_ + ".dropout"),
      act(act_),
      name(name_) {
    if (act == ActivationKind::Swish) {
        if (!swish_beta) throw std::invalid_argument("stage " + name + ": swish requires a beta");
        swish_.emplace(std::move(swish_beta));
    }
}

Tensor Stage::forward(const Tensor& x, LayerMode mode) {
    Tensor h = bn.forward(linear.forward(x, mode), mode);
    if (act == ActivationKind::ReLU) {
        act_in_cache_ = h;
        h = relu(h);
    } else {
        h = swish_->forward(h);
    }
    return dropout.forward(h, mode);
}

Tensor Stage::backward(const Tensor& grad_out) {
    Tensor g = dropout.backward(grad_out);
    g = act == ActivationKind::ReLU ? relu_backward(act_in_cache_, g) : swish_->backward(g);
    return linear.backward(bn.backward(g));
}

void Stage::collect_params(std::vector<Param*>& out) {
    out.push_back(&linear.W);
    out.push_back(&linear.b);
    out.push_back(&bn.gamma);
    out.push_back(&bn.beta_shift);
}

Block::Block(const std::string& name, std::size_t size, ActivationKind act, double dropout_rate,
             std::shared_ptr<Param> swish_beta, std::uint64_t seed_a, std::uint64_t seed_b)
    : a(name + ".a", size, size, act, dropout_rate, swish_beta, seed_a),
      b(name + ".b", size, size, act, dropout_rate, std::move(swish_beta), seed_b) {}

Tensor Block::forward(const Tensor& x, LayerMode mode) {
    return x + b.forward(a.forward(x, mode), mode);
}

Tensor Block::backward(const Tensor& grad_out) {
    // d(x + f(x)) = grad_out through the skip plus grad_out through f.
    return grad_out + a.backward(b.backward(grad_out));
}

void Block::collect_params(std::vector<Param*>& out) {
    a.collect_params(out);
    b.collect_params(out);
}

namespace {

// Stages need their dropout seeds at construction, so the build draws all of
// them from the master generator up front, in stack order.
std::vector<std::uint64_t> draw_dropout_seeds(Rng& rng, const LifterConfig& c) {
    std::size_t n = 1 + (c.extra_layer ? 1 : 0) + 2 * static_cast<std::size_t>(c.num_blocks);
    std::vector<std::uint64_t> seeds(n);
    for (auto& s : seeds) s = rng.next_u64();
    return seeds;
}

} // namespace

Lifter::Lifter(const LifterConfig& config, std::uint64_t seed)
    : config_((config.validate(), config)),
      swish_beta_(config.activation == ActivationKind::Swish ? SwishActivation::make_beta("swish.beta")
                                                             : nullptr),
      in_stage_("in", 0, 0, ActivationKind::ReLU, 0.0, nullptr, 0),
      out_linear_(1, 1, "out.linear") {
    Rng rng(seed);
    auto seeds = draw_dropout_seeds(rng, config_);
    std::size_t next_seed = 0;
    const auto size = static_cast<std::size_t>(config_.linear_size);

    in_stage_ = Stage("in", static_cast<std::size_t>(config_.input_dim()), size,
                      config_.activation, config_.dropout_rate, swish_beta_, seeds[next_seed++]);
    if (config_.extra_layer)
        extra_stage_.emplace("extra", size, size, config_.activation, config_.dropout_rate,
                             swish_beta_, seeds[next_seed++]);
    for (int k = 0; k < config_.num_blocks; ++k) {
        std::uint64_t sa = seeds[next_seed++];
        std::uint64_t sb = seeds[next_seed++];
        blocks_.emplace_back("block" + std::to_string(k), size, config_.activation,
                             config_.dropout_rate, swish_beta_, sa, sb);
    }
    out_linear_ = LinearLayer(size, static_cast<std::size_t>(config_.output_dim()), "out.linear");

    in_stage_.linear.init_weights(rng);
    if (extra_stage_) extra_stage_->linear.init_weights(rng);
    for (auto& blk : blocks_) {
        blk.a.linear.init_weights(rng);
        blk.b.linear.init_weights(rng);
    }
    out_linear_.init_weights(rng);
}

Tensor Lifter::forward(const Tensor& x2d, LayerMode mode) {
    if (x2d.cols() != static_cast<std::size_t>(config_.input_dim()))
        throw ShapeError("lifter: input " + x2d.shape_str() + " expected cols " +
                         std::to_string(config_.input_dim()));
    if (!x2d.all_finite()) throw std::invalid_argument("lifter: non-finite input");
    mode_ = mode;
    Tensor h = in_stage_.forward(x2d, mode);
    if (extra_stage_) h = extra_stage_->forward(h, mode);
    for (auto& blk : blocks_) h = blk.forward(h, mode);
    return out_linear_.forward(h, mode);
}

Tensor Lifter::backward(const Tensor& grad_out) {
    Tensor g = out_linear_.backward(grad_out);
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) g = it->backward(g);
    if (extra_stage_) g = extra_stage_->backward(g);
    return in_stage_.backward(g);
}

std::vector<Param*> Lifter::params() {
    std::vector<Param*> out;
    in_stage_.collect_params(out);
    if (extra_stage_) extra_stage_->collect_params(out);
    for (auto& blk : blocks_) blk.collect_params(out);
    out.push_back(&out_linear_.W);
    out.push_back(&out_linear_.b);
    if (swish_beta_) out.push_back(swish_beta_.get());
    return out;
}

std::vector<std::pair<std::string, Tensor*>> Lifter::state_entries() {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (Param* p : params()) out.emplace_back(p->name, &p->value);
    auto add_bn = [&out](Stage& s) {
        out.emplace_back(s.name + ".bn.running_mean", &s.bn.running_mean);
        out.emplace_back(s.name + ".bn.running_var", &s.bn.running_var);
    };
    add_bn(in_stage_);
    if (extra_stage_) add_bn(*extra_stage_);
    for (auto& blk : blocks_) {
        add_bn(blk.a);
        add_bn(blk.b);
    }
    return out;
}

std::size_t Lifter::num_learnable() {
    std::size_t n = 0;
    for (Param* p : params()) n += p->value.rows() * p->value.cols();
    return n;
}

void Lifter::zero_grads() {
    for (Param* p : params()) p->zero_grad();
}

void Lifter::set_dropout_frozen(bool frozen) {
    in_stage_.dropout.set_frozen(frozen);
    if (extra_stage_) extra_stage_->dropout.set_frozen(frozen);
    for (auto& blk : blocks_) {
        blk.a.dropout.set_frozen(frozen);
        blk.b.dropout.set_frozen(frozen);
    }
}

} // namespace poselift
