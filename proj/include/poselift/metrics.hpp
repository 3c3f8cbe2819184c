#pragma once

#include <string>
#include <vector>

#include "poselift/skeleton.hpp"
#include "poselift/tensor.hpp"

namespace poselift {

/// One positive weight per joint, in canonical joint order.
struct JointWeights {
    std::vector<double> weights;
    std::string provenance;

    /// The shipped default map: 4 for the torso core (Hip, Spine, Thorax),
    /// 3 for their immediate neighbours (hips, shoulders, Head), 2 for knees
    /// and elbows, 1 for the extremities (feet, wrists).
    static JointWeights defaults();
    static JointWeights uniform(std::size_t num_joints);
    /// JSON object joint name -> positive number; must cover the skeleton's
    /// joints exactly (no missing, no unknown names).
    static JointWeights from_json_file(const std::string& path, const SkeletonSpec& skel);

    void validate(std::size_t num_joints) const;
};

enum class LossKind { MSE, L1, WMSE };
const std::string& loss_name(LossKind k);
LossKind loss_from_string(const std::string& s);

struct LossResult {
    double value = 0.0;
    Tensor grad; // dL/dpred, same shape as pred
};

/// Mean over all batch x 3J elements of squared error.
LossResult mse(const Tensor& pred, const Tensor& target);
/// Mean absolute error; the subgradient of |0| is 0.
LossResult l1(const Tensor& pred, const Tensor& target);
/// Weighted MSE: sum of w_j * err^2 over all coordinates divided by
/// (batch * 3 * sum(w)). Computed with weights normalized to mean 1 and
/// accumulated in the same element order as mse, so uniform weights (any
/// constant) give a bit-for-bit identical value and gradient.
LossResult wmse(const Tensor& pred, const Tensor& target, const JointWeights& w);

/// Mean per-joint Euclidean distance in millimeters; inputs are batch x 3J,
/// denormalized and root-relative.
double mpjpe(const Tensor& pred3d_mm, const Tensor& gt3d_mm);
/// Weight-normalized mean joint distance; uniform weights reduce it to mpjpe
/// bit-for-bit.
double weighted_mpjpe(const Tensor& pred3d_mm, const Tensor& gt3d_mm, const JointWeights& w);

/// u_i = w_i / mean(w). The mean uses pairwise summation, and exactly equal
/// weights short-circuit to u_i = 1.0, so uniformity survives floating point
/// for any joint count.
std::vector<double> normalize_weights(const std::vector<double>& w);

} // namespace poselift
