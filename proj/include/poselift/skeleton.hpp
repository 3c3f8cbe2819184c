#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace poselift {

/// The 16-joint skeleton: ordered joint names, the parent of each joint
/// (-1 for the root), and the bone length in millimeters from each joint to
/// its parent (0 for the root).
///
/// Canonical order: Hip, RHip, RKnee, RFoot, LHip, LKnee, LFoot, Spine,
/// Thorax, Head, LShoulder, LElbow, LWrist, RShoulder, RElbow, RWrist.
/// All dataset and weight-file I/O is name-checked against this order.
struct SkeletonSpec {
    std::vector<std::string> joint_names;
    std::vector<int> parent;
    std::vector<double> bone_length_mm;

    std::size_t num_joints() const { return joint_names.size(); }
    int root() const;
    /// Exactly one root, indices in range, acyclic, lengths positive.
    void validate() const;
    int index_of(const std::string& name) const; // -1 if absent

    static const SkeletonSpec& canonical16();
    static SkeletonSpec load_json(const std::string& path);
    void save_json(const std::string& path) const;
};

} // namespace poselift
