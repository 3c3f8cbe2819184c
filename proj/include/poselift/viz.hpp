#pragma once

#include <string>
#include <vector>

namespace poselift {

struct RenderStyle {
    double canvas_width = 400.0;
    double canvas_height = 400.0;
    double joint_radius = 3.0;
    double stroke_width = 2.0;
    std::string left_color = "#d62728";  // left limbs
    std::string right_color = "#1f77b4"; // right limbs
    std::string torso_color = "#2ca02c"; // everything else
    double azimuth_deg = 70.0;   // 3D view yaw
    double elevation_deg = 15.0; // 3D view pitch

    void validate() const;
};

/// Orthographic view: rotate by azimuth about the vertical axis, then by
/// elevation about the horizontal axis, then drop depth. At (0, 0) this is an
/// exact (x, y) passthrough.
std::vector<double> ortho_project(const std::vector<double>& pose3d, double azimuth_deg,
                                  double elevation_deg);

/// SVG 1.1 document: 15 bone lines plus 16 joint circles for the canonical
/// skeleton, auto-fitted to the canvas with a 5% margin (coincident poses fall
/// back to a fixed scale). Byte-deterministic for fixed inputs.
std::string render_pose2d(const std::vector<double>& pose2d, const RenderStyle& style);

/// ortho_project at the style's view angles, then as render_pose2d.
std::string render_pose3d(const std::vector<double>& pose3d, const RenderStyle& style);

/// Three titled panels side by side: the 2D input, the 3D ground truth, and
/// the predicted 3D pose. Panels share the figure markup of the single-pose
/// renderers, so equal poses give equal panels apart from their titles.
std::string render_triptych(const std::vector<double>& pose2d_gt,
                            const std::vector<double>& pose3d_gt,
                            const std::vector<double>& pose3d_pred, const RenderStyle& style);

} // namespace poselift
