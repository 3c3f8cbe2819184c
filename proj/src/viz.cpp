#include "poselift/viz.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "poselift/skeleton.hpp"

namespace poselift {

void RenderStyle::validate() const {
    if (!(canvas_width > 0) || !(canvas_height > 0))
        throw std::invalid_argument("render style: canvas must be positive");
    if (!(joint_radius > 0) || !(stroke_width > 0))
        throw std::invalid_argument("render style: radius and stroke must be positive");
}

std::vector<double> ortho_project(const std::vector<double>& pose3d, double azimuth_deg,
                                  double elevation_deg) {
    if (pose3d.size() % 3 != 0)
        throw std::invalid_argument("ortho_project: coordinate count not a multiple of 3");
    const double az = azimuth_deg * M_PI / 180.0;
    const double el = elevation_deg * M_PI / 180.0;
    const double ca = std::cos(az), sa = std::sin(az);
    const double ce = std::cos(el), se = std::sin(el);
    std::vector<double> out(pose3d.size() / 3 * 2);
    for (std::size_t j = 0; j < pose3d.size() / 3; ++j) {
        const double x = pose3d[3 * j + 0];
        const double y = pose3d[3 * j + 1];
        const double z = pose3d[3 * j + 2];
        // Yaw about the vertical (y) axis, then pitch about the x axis.
        const double x1 = x * ca + z * sa;
        const double z1 = -x * sa + z * ca;
        const double y2 = y * ce - z1 * se;
        out[2 * j + 0] = x1;
        out[2 * j + 1] = y2;
    }
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

void require_pose2d(const std::vector<double>& pose2d) {
    const std::size_t joints = SkeletonSpec::canonical16().num_joints();
    if (pose2d.size() != joints * 2)
        throw std::invalid_argument("render: expected " + std::to_string(joints * 2) +
                                    " coordinates, got " + std::to_string(pose2d.size()));
    for (double v : pose2d)
        if (!std::isfinite(v)) throw std::invalid_argument("render: non-finite coordinate");
}

// Bone lines and joint circles, auto-fitted to the canvas with a 5% margin.
std::string figure_group(const std::vector<double>& pose2d, const RenderStyle& style) {
    const SkeletonSpec& skel = SkeletonSpec::canonical16();
    const std::size_t joints = skel.num_joints();

    double min_x = pose2d[0], max_x = pose2d[0], min_y = pose2d[1], max_y = pose2d[1];
    for (std::size_t j = 0; j < joints; ++j) {
        min_x = std::min(min_x, pose2d[2 * j]);
        max_x = std::max(max_x, pose2d[2 * j]);
        min_y = std::min(min_y, pose2d[2 * j + 1]);
        max_y = std::max(max_y, pose2d[2 * j + 1]);
    }
    const double span_x = max_x - min_x, span_y = max_y - min_y;
    const double usable_x = 0.9 * style.canvas_width, usable_y = 0.9 * style.canvas_height;
    double scale = 1.0; // fallback for a fully coincident pose
    const bool sx = span_x > 1e-12, sy = span_y > 1e-12;
    if (sx && sy)
        scale = std::min(usable_x / span_x, usable_y / span_y);
    else if (sx)
        scale = usable_x / span_x;
    else if (sy)
        scale = usable_y / span_y;
    const double mid_x = (min_x + max_x) / 2.0, mid_y = (min_y + max_y) / 2.0;
    auto to_canvas_x = [&](double x) { return (x - mid_x) * scale + style.canvas_width / 2.0; };
    auto to_canvas_y = [&](double y) { return (y - mid_y) * scale + style.canvas_height / 2.0; };

    std::ostringstream out;
    for (std::size_t j = 0; j < joints; ++j) {
        const int parent = skel.parent[j];
        if (parent < 0) continue;
        const char side = skel.joint_names[j][0];
        const std::string& color = side == 'L'   ? style.left_color
                                   : side == 'R' ? style.right_color
                                                 : style.torso_color;
        out << "<line x1=\"" << fmt(to_canvas_x(pose2d[2 * static_cast<std::size_t>(parent)]))
            << "\" y1=\"" << fmt(to_canvas_y(pose2d[2 * static_cast<std::size_t>(parent) + 1]))
            << "\" x2=\"" << fmt(to_canvas_x(pose2d[2 * j])) << "\" y2=\""
            << fmt(to_canvas_y(pose2d[2 * j + 1])) << "\" stroke=\"" << color
            << "\" stroke-width=\"" << fmt(style.stroke_width) << "\"/>\n";
    }
    for (std::size_t j = 0; j < joints; ++j)
        out << "<circle cx=\"" << fmt(to_canvas_x(pose2d[2 * j])) << "\" cy=\""
            << fmt(to_canvas_y(pose2d[2 * j + 1])) << "\" r=\"" << fmt(style.joint_radius)
            << "\" fill=\"#333333\"/>\n";
    return out.str();
}

std::string svg_document(double width, double height, const std::string& body) {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(width)
        << "\" height=\"" << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " " << fmt(height)
        << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
        << body << "</svg>\n";
    return out.str();
}

} // namespace

std::string render_pose2d(const std::vector<double>& pose2d, const RenderStyle& style) {
    style.validate();
    require_pose2d(pose2d);
    return svg_document(style.canvas_width, style.canvas_height, figure_group(pose2d, style));
}

std::string render_pose3d(const std::vector<double>& pose3d, const RenderStyle& style) {
    style.validate();
    if (pose3d.size() != SkeletonSpec::canonical16().num_joints() * 3)
        throw std::invalid_argument("render: expected 48 coordinates, got " +
                                    std::to_string(pose3d.size()));
    for (double v : pose3d)
        if (!std::isfinite(v)) throw std::invalid_argument("render: non-finite coordinate");
    const auto projected = ortho_project(pose3d, style.azimuth_deg, style.elevation_deg);
    return svg_document(style.canvas_width, style.canvas_height, figure_group(projected, style));
}

std::string render_triptych(const std::vector<double>& pose2d_gt,
                            const std::vector<double>& pose3d_gt,
                            const std::vector<double>& pose3d_pred, const RenderStyle& style) {
    style.validate();
    require_pose2d(pose2d_gt);
    const auto panel = [&style](const std::vector<double>& pose2d, const std::string& title,
                                int index) {
        std::ostringstream out;
        out << "<g transform=\"translate(" << fmt(index * style.canvas_width) << ",0)\">\n"
            << "<text x=\"" << fmt(style.canvas_width / 2.0)
            << "\" y=\"16\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
            << title << "</text>\n"
            << "<g>\n"
            << figure_group(pose2d, style) << "</g>\n</g>\n";
        return out.str();
    };
    std::string body = panel(pose2d_gt, "2D Pose Ground Truth", 0);
    {
        for (double v : pose3d_gt)
            if (!std::isfinite(v)) throw std::invalid_argument("render: non-finite coordinate");
        for (double v : pose3d_pred)
            if (!std::isfinite(v)) throw std::invalid_argument("render: non-finite coordinate");
    }
    body += panel(ortho_project(pose3d_gt, style.azimuth_deg, style.elevation_deg),
                  "3D Pose Ground Truth", 1);
    body += panel(ortho_project(pose3d_pred, style.azimuth_deg, style.elevation_deg),
                  "Predicted 3D Pose", 2);
    return svg_document(3 * style.canvas_width, style.canvas_height, body);
}

} // namespace poselift
