#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "poselift/lifter.hpp"
#include "poselift/pose_data.hpp"

namespace poselift {

inline constexpr int kCheckpointFormatVersion = 1;

struct CheckpointMeta {
    long epoch = 0;
    std::uint64_t seed = 0;
    std::string loss_kind = "mse";
    std::vector<double> joint_weights; // empty unless trained with wmse
    double final_train_loss = 0.0;
};

// JSON envelope {format_version, config, norm_stats, params, meta}; each
// params entry is {name, shape, data_b64} with the tensor stored as
// little-endian 64-bit floats, row-major, so round-trips are bit-exact.
// Batch-norm running statistics are stored as named entries beside the
// learnable parameters.
void save_checkpoint(const std::string& path, Lifter& model, const NormStats& stats,
                     const CheckpointMeta& meta);

struct LoadedCheckpoint {
    Lifter model;
    NormStats stats;
    CheckpointMeta meta;
};

// Rejects unsupported format versions, tensor lists that disagree with the
// config, shape mismatches, and corrupt payloads.
LoadedCheckpoint load_checkpoint(const std::string& path);

} // namespace poselift
