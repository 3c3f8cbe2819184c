#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "poselift/lifter.hpp"
#include "poselift/metrics.hpp"
#include "poselift/pose_data.hpp"

namespace poselift {

struct TrainConfig {
    int epochs = 150;
    int batch_size = 64;
    double learning_rate = 1e-3;
    double decay_factor = 0.96;
    long decay_interval = 25000; // optimizer steps per decay
    LossKind loss = LossKind::MSE;
    JointWeights weights;        // required when loss == WMSE
    std::uint64_t seed = 0;
    bool shuffle = true;
    int eval_every = 1;          // epochs between test-set evaluations
    double clip_max_norm = 0.0;  // 0 disables gradient clipping
    std::string checkpoint_path; // written at every evaluation if non-empty

    void validate() const;
};

/// Stepped decay: learning_rate * decay_factor^floor(step / decay_interval).
double lr_at(const TrainConfig& config, long global_step);

/// Adam moments, one slot per parameter, in params() order.
struct AdamState {
    struct Slot {
        Tensor m;
        Tensor v;
    };
    std::vector<Slot> slots;
    long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState init(const std::vector<Param*>& params);
};

/// One bias-corrected Adam update from the accumulated gradients.
/// Throws if any gradient is non-finite, naming the parameter.
void adam_step(const std::vector<Param*>& params, AdamState& state, double lr);

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double eval_mpjpe_mm = 0.0;   // NaN on epochs without evaluation
    double eval_wmpjpe_mm = 0.0;
    double lr = 0.0;
    double seconds = 0.0;         // wall time; the only nondeterministic column
};

struct TrainLog {
    std::vector<EpochRecord> records;
    // CSV columns: epoch,train_loss,eval_mpjpe_mm,eval_wmpjpe_mm,lr,seconds.
    void save_csv(const std::string& path) const;
};

struct TrainResult {
    TrainLog log;
    bool diverged = false;    // non-finite loss; model restored to last good epoch
    int completed_epochs = 0;
    double final_train_loss = 0.0;
};

/// Mini-batch training with Adam and stepped learning-rate decay. Shuffling,
/// initialization and dropout are all driven by seeded generators, so
/// (seed, config, data) determine the result bit-for-bit. Evaluation runs in
/// Eval mode and reports denormalized MPJPE in millimeters. Mini-batches
/// smaller than 2 are dropped (batch normalization needs a batch). On
/// divergence the model is rolled back to the end of the last finite epoch.
TrainResult train(Lifter& model, const std::vector<PosePair>& train_data,
                  const std::vector<PosePair>& test_data, const NormStats& stats,
                  const TrainConfig& config);

} // namespace poselift
