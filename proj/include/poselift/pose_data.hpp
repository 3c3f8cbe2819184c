#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "poselift/rng.hpp"
#include "poselift/skeleton.hpp"
#include "poselift/tensor.hpp"

namespace poselift {

// The 15 Human3.6M action categories, in canonical report order.
const std::vector<std::string>& action_names();
const std::string& action_name(int index);
int action_index(const std::string& name); // -1 if unknown

// One sample: 2D pose in pixels, 3D pose in millimeters, root-relative.
struct PosePair {
    std::string subject;              // "S1".."S7" style id
    int action = 0;                   // index into action_names()
    long frame = 0;
    std::vector<double> pose2d;       // 32: x,y per joint in canonical order
    std::vector<double> pose3d;       // 48: x,y,z per joint, root at origin
};

// Per-coordinate normalization statistics, computed on a training split.
struct NormStats {
    std::vector<double> mean2d, std2d; // 32 each
    std::vector<double> mean3d, std3d; // 48 each
    std::vector<int> floored2d;        // indices where std2d hit the floor
    std::vector<int> floored3d;
    std::string source_split;          // human-readable provenance
};

// Pinhole camera: u = f*X/Z' + cx, v = f*Y/Z' + cy with Z' = Z + z0.
struct CameraModel {
    double f = 1000.0;
    double cx = 500.0;
    double cy = 500.0;
    double z0 = 5000.0; // subject distance offset, millimeters
};

// CSV ingestion. Columns: subject,action,frame, then j{i}_{x|y}2d (32),
// then j{i}_{x|y|z}3d (48). 3D is re-centered to root-relative on load.
// Parse errors name the offending data row (first data row is row 1).
std::vector<PosePair> load_dataset(const std::string& path);
void save_dataset(const std::string& path, const std::vector<PosePair>& data);

// Mean/std per coordinate over the given split (population std, floored at
// 1e-8 with floored indices recorded). Requires at least 2 samples.
NormStats compute_norm_stats(const std::vector<PosePair>& train,
                             const std::string& source_split = "train");

std::vector<double> normalize2d(const std::vector<double>& pose, const NormStats& stats);
std::vector<double> denormalize2d(const std::vector<double>& normed, const NormStats& stats);
std::vector<double> normalize3d(const std::vector<double>& pose, const NormStats& stats);
std::vector<double> denormalize3d(const std::vector<double>& normed, const NormStats& stats);

// Batch views for training: rows in dataset order.
Tensor to_input_matrix(const std::vector<PosePair>& data, const NormStats& stats);  // n x 32
Tensor to_target_matrix(const std::vector<PosePair>& data, const NormStats& stats); // n x 48
Tensor denormalize3d_batch(const Tensor& normed, const NormStats& stats);           // n x 48, mm
Tensor pose3d_matrix(const std::vector<PosePair>& data);                            // n x 48, mm

struct SplitResult {
    std::vector<PosePair> train;
    std::vector<PosePair> test;
};

// Partition by subject id. Overlapping subject sets are an error; subjects in
// neither set, or an empty side, produce a stderr warning.
SplitResult split_by_subject(const std::vector<PosePair>& data,
                             const std::vector<std::string>& train_subjects,
                             const std::vector<std::string>& test_subjects);

// Perspective projection of camera-space joints (length 3J, millimeters) to
// pixels (length 2J). Throws if any joint has Z + z0 <= 0, naming the joint.
std::vector<double> project(const std::vector<double>& pose3d_cam, const CameraModel& cam);

// Deterministic articulated-skeleton sampler over the canonical 16-joint tree.
// Fixed bone lengths, bounded joint-angle ranges, uniform whole-body yaw, and
// a random root offset in front of the camera; 2D is the exact projection of
// the camera-space pose (plus optional additive Gaussian pixel noise).
// Subjects cycle S1..S7 and actions cycle through all 15 labels.
// If root_offsets is given it receives one (x,y,z) offset per sample so that
// pose3d + offset reproduces the camera-space joints used for projection.
std::vector<PosePair> synth_generate(int n, std::uint64_t seed, const CameraModel& cam,
                                     double noise_std = 0.0,
                                     std::vector<std::array<double, 3>>* root_offsets = nullptr);

} // namespace poselift
