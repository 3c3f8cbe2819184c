#include "poselift/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "poselift/checkpoint.hpp"
#include "poselift/rng.hpp"

namespace poselift {

void TrainConfig::validate() const {
    if (epochs < 1)
        throw std::invalid_argument("train config: epochs must be >= 1, got " +
                                    std::to_string(epochs));
    if (batch_size < 2)
        throw std::invalid_argument("train config: batch_size must be >= 2, got " +
                                    std::to_string(batch_size));
    if (!(learning_rate > 0))
        throw std::invalid_argument("train config: learning_rate must be > 0");
    if (!(decay_factor > 0 && decay_factor <= 1))
        throw std::invalid_argument("train config: decay_factor must be in (0,1]");
    if (decay_interval < 1)
        throw std::invalid_argument("train config: decay_interval must be >= 1");
    if (eval_every < 1)
        throw std::invalid_argument("train config: eval_every must be >= 1");
    if (clip_max_norm < 0)
        throw std::invalid_argument("train config: clip_max_norm must be >= 0");
}

double lr_at(const TrainConfig& config, long global_step) {
    if (global_step < 0) throw std::invalid_argument("lr_at: negative step");
    const double k = static_cast<double>(global_step / config.decay_interval);
    return config.learning_rate * std::pow(config.decay_factor, k);
}

AdamState AdamState::init(const std::vector<Param*>& params) {
    AdamState s;
    s.slots.reserve(params.size());
    for (const Param* p : params)
        s.slots.push_back({Tensor::zeros(p->value.rows(), p->value.cols()),
                           Tensor::zeros(p->value.rows(), p->value.cols())});
    return s;
}

void adam_step(const std::vector<Param*>& params, AdamState& state, double lr) {
    if (params.size() != state.slots.size())
        throw std::invalid_argument("adam_step: state has " + std::to_string(state.slots.size()) +
                                    " slots for " + std::to_string(params.size()) + " parameters");
    state.t += 1;
    const double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Param& p = *params[i];
        AdamState::Slot& slot = state.slots[i];
        if (!p.grad.same_shape(p.value))
            throw std::invalid_argument("adam_step: gradient shape mismatch for '" + p.name + "'");
        for (std::size_t k = 0; k < p.value.size(); ++k) {
            const double g = p.grad.at_flat(k);
            if (!std::isfinite(g))
                throw std::runtime_error("adam_step: non-finite gradient in '" + p.name + "'");
            double& m = slot.m.at_flat(k);
            double& v = slot.v.at_flat(k);
            m = state.beta1 * m + (1.0 - state.beta1) * g;
            v = state.beta2 * v + (1.0 - state.beta2) * g * g;
            const double mhat = m / b1t;
            const double vhat = v / b2t;
            p.value.at_flat(k) -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

void TrainLog::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("train log: cannot write " + path);
    out << "epoch,train_loss,eval_mpjpe_mm,eval_wmpjpe_mm,lr,seconds\n";
    char buf[256];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.3f\n", r.epoch,
                      r.train_loss, r.eval_mpjpe_mm, r.eval_wmpjpe_mm, r.lr, r.seconds);
        out << buf;
    }
}

namespace {

std::vector<Tensor> snapshot_state(Lifter& model) {
    std::vector<Tensor> snap;
    for (const auto& [name, tensor] : model.state_entries()) snap.push_back(*tensor);
    return snap;
}

void restore_state(Lifter& model, const std::vector<Tensor>& snap) {
    auto entries = model.state_entries();
    for (std::size_t i = 0; i < entries.size(); ++i) *entries[i].second = snap[i];
}

void gather_rows(const Tensor& src, const std::vector<std::size_t>& indices, std::size_t start,
                 std::size_t count, Tensor& dst) {
    for (std::size_t i = 0; i < count; ++i)
        std::memcpy(dst.row(i), src.row(indices[start + i]), src.cols() * sizeof(double));
}

} // namespace

TrainResult train(Lifter& model, const std::vector<PosePair>& train_data,
                  const std::vector<PosePair>& test_data, const NormStats& stats,
                  const TrainConfig& config) {
    config.validate();
    const std::size_t n = train_data.size();
    if (n == 0) throw std::invalid_argument("train: empty training data");
    if (static_cast<std::size_t>(config.batch_size) > n)
        throw std::invalid_argument("train: batch_size " + std::to_string(config.batch_size) +
                                    " exceeds training set size " + std::to_string(n));
    const std::size_t joints = static_cast<std::size_t>(model.config().num_joints);
    if (config.loss == LossKind::WMSE) config.weights.validate(joints);
    // Weighted evaluation uses the training weights when given, else the
    // shipped default map (or uniform for non-canonical joint counts).
    JointWeights eval_weights = config.weights.weights.size() == joints
                                    ? config.weights
                                    : (joints == 16 ? JointWeights::defaults()
                                                    : JointWeights::uniform(joints));

    const Tensor X = to_input_matrix(train_data, stats);
    const Tensor Y = to_target_matrix(train_data, stats);
    Tensor Xt, gt_mm;
    if (!test_data.empty()) {
        Xt = to_input_matrix(test_data, stats);
        gt_mm = pose3d_matrix(test_data);
    }

    auto params = model.params();
    AdamState adam = AdamState::init(params);
    Rng shuffle_rng(config.seed);
    std::vector<std::size_t> indices(n);
    for (std::size_t i = 0; i < n; ++i) indices[i] = i;

    TrainResult result;
    std::vector<Tensor> last_good = snapshot_state(model);
    long global_step = 0;
    double last_lr = lr_at(config, 0);
    Tensor xb, yb;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        if (config.shuffle)
            for (std::size_t i = n - 1; i > 0; --i)
                std::swap(indices[i], indices[shuffle_rng.below(i + 1)]);

        double loss_sum = 0.0;
        std::size_t seen = 0;
        bool diverged = false;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t b = std::min(static_cast<std::size_t>(config.batch_size), n - start);
            if (b < 2) break; // batch normalization needs at least 2 samples
            if (xb.rows() != b) {
                xb = Tensor(b, X.cols());
                yb = Tensor(b, Y.cols());
            }
            gather_rows(X, indices, start, b, xb);
            gather_rows(Y, indices, start, b, yb);

            const Tensor pred = model.forward(xb, LayerMode::Train);
            LossResult loss;
            switch (config.loss) {
                case LossKind::MSE: loss = mse(pred, yb); break;
                case LossKind::L1: loss = l1(pred, yb); break;
                case LossKind::WMSE: loss = wmse(pred, yb, config.weights); break;
            }
            if (!std::isfinite(loss.value)) {
                diverged = true;
                break;
            }
            model.zero_grads();
            model.backward(loss.grad);
            if (config.clip_max_norm > 0) {
                double sq = 0.0;
                for (const Param* p : params)
                    for (std::size_t k = 0; k < p->grad.size(); ++k)
                        sq += p->grad.at_flat(k) * p->grad.at_flat(k);
                const double norm = std::sqrt(sq);
                if (norm > config.clip_max_norm) {
                    const double scale = config.clip_max_norm / norm;
                    for (Param* p : params)
                        for (std::size_t k = 0; k < p->grad.size(); ++k)
                            p->grad.at_flat(k) *= scale;
                }
            }
            last_lr = lr_at(config, global_step);
            try {
                adam_step(params, adam, last_lr);
            } catch (const std::runtime_error&) {
                diverged = true;
                break;
            }
            ++global_step;
            loss_sum += loss.value * static_cast<double>(b);
            seen += b;
        }
        if (diverged) {
            restore_state(model, last_good);
            result.diverged = true;
            break;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(seen);
        rec.lr = last_lr;
        const bool do_eval = epoch % config.eval_every == 0 || epoch == config.epochs;
        if (do_eval && !test_data.empty()) {
            const Tensor pred_mm = denormalize3d_batch(model.forward(Xt, LayerMode::Eval), stats);
            rec.eval_mpjpe_mm = mpjpe(pred_mm, gt_mm);
            rec.eval_wmpjpe_mm = weighted_mpjpe(pred_mm, gt_mm, eval_weights);
        } else {
            rec.eval_mpjpe_mm = std::nan("");
            rec.eval_wmpjpe_mm = std::nan("");
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.log.records.push_back(rec);
        result.completed_epochs = epoch;
        result.final_train_loss = rec.train_loss;
        last_good = snapshot_state(model);

        if (!config.checkpoint_path.empty() && do_eval) {
            CheckpointMeta meta;
            meta.epoch = epoch;
            meta.seed = config.seed;
            meta.loss_kind = loss_name(config.loss);
            if (config.loss == LossKind::WMSE) meta.joint_weights = config.weights.weights;
            meta.final_train_loss = rec.train_loss;
            save_checkpoint(config.checkpoint_path, model, stats, meta);
        }
    }
    model.set_mode(LayerMode::Eval);
    return result;
}

} // namespace poselift
