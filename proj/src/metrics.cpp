#include "poselift/metrics.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace poselift {

namespace {

double pairwise_sum(const double* v, std::size_t n) {
    if (n == 0) return 0.0;
    if (n == 1) return v[0];
    if (n == 2) return v[0] + v[1];
    const std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

void require_pose_shapes(const Tensor& pred, const Tensor& target, const char* op) {
    require_same_shape(pred, target, op);
    if (pred.cols() % 3 != 0)
        throw ShapeError(std::string(op) + ": columns " + std::to_string(pred.cols()) +
                         " not a multiple of 3");
}

void require_weight_count(const JointWeights& w, std::size_t joints, const char* op) {
    w.validate(joints);
    (void)op;
}

} // namespace

JointWeights JointWeights::defaults() {
    JointWeights w;
    w.provenance = "default";
    const SkeletonSpec& skel = SkeletonSpec::canonical16();
    const std::map<std::string, double> by_name = {
        {"Hip", 4},   {"Spine", 4},     {"Thorax", 4},    {"RHip", 3},      {"LHip", 3},
        {"Head", 3},  {"RShoulder", 3}, {"LShoulder", 3}, {"RKnee", 2},     {"LKnee", 2},
        {"RElbow", 2}, {"LElbow", 2},   {"RFoot", 1},     {"LFoot", 1},     {"RWrist", 1},
        {"LWrist", 1}};
    for (const auto& name : skel.joint_names) w.weights.push_back(by_name.at(name));
    return w;
}

JointWeights JointWeights::uniform(std::size_t num_joints) {
    JointWeights w;
    w.provenance = "uniform";
    w.weights.assign(num_joints, 1.0);
    return w;
}

JointWeights JointWeights::from_json_file(const std::string& path, const SkeletonSpec& skel) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("joint weights: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("joint weights: invalid JSON in " + path + ": " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("joint weights: expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (skel.index_of(key) < 0)
            throw std::runtime_error("joint weights: unknown joint name '" + key + "'");
        (void)value;
    }
    JointWeights w;
    w.provenance = path;
    for (const auto& name : skel.joint_names) {
        if (!j.contains(name))
            throw std::runtime_error("joint weights: missing joint '" + name + "'");
        w.weights.push_back(j.at(name).get<double>());
    }
    w.validate(skel.num_joints());
    return w;
}

void JointWeights::validate(std::size_t num_joints) const {
    if (weights.size() != num_joints)
        throw std::invalid_argument("joint weights: expected " + std::to_string(num_joints) +
                                    " entries, got " + std::to_string(weights.size()));
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (!(weights[i] > 0) || !std::isfinite(weights[i]))
            throw std::invalid_argument("joint weights: non-positive weight at joint " +
                                        std::to_string(i));
}

const std::string& loss_name(LossKind k) {
    static const std::string names[] = {"mse", "l1", "wmse"};
    return names[static_cast<int>(k)];
}

LossKind loss_from_string(const std::string& s) {
    if (s == "mse") return LossKind::MSE;
    if (s == "l1") return LossKind::L1;
    if (s == "wmse") return LossKind::WMSE;
    throw std::invalid_argument("unknown loss '" + s + "' (expected mse, l1 or wmse)");
}

std::vector<double> normalize_weights(const std::vector<double>& w) {
    if (w.empty()) throw std::invalid_argument("normalize_weights: empty weight vector");
    bool all_equal = true;
    for (double v : w)
        if (v != w[0]) {
            all_equal = false;
            break;
        }
    if (all_equal) return std::vector<double>(w.size(), 1.0);
    const double mean = pairwise_sum(w.data(), w.size()) / static_cast<double>(w.size());
    std::vector<double> u(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) u[i] = w[i] / mean;
    return u;
}

LossResult mse(const Tensor& pred, const Tensor& target) {
    require_same_shape(pred, target, "mse");
    const double n = static_cast<double>(pred.size());
    LossResult r;
    r.grad = Tensor::zeros(pred.rows(), pred.cols());
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred.at_flat(i) - target.at_flat(i);
        total += e * e;
        r.grad.at_flat(i) = 2.0 * e / n;
    }
    r.value = total / n;
    return r;
}

LossResult l1(const Tensor& pred, const Tensor& target) {
    require_same_shape(pred, target, "l1");
    const double n = static_cast<double>(pred.size());
    LossResult r;
    r.grad = Tensor::zeros(pred.rows(), pred.cols());
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred.at_flat(i) - target.at_flat(i);
        total += std::abs(e);
        r.grad.at_flat(i) = (e > 0 ? 1.0 : e < 0 ? -1.0 : 0.0) / n;
    }
    r.value = total / n;
    return r;
}

LossResult wmse(const Tensor& pred, const Tensor& target, const JointWeights& w) {
    require_pose_shapes(pred, target, "wmse");
    const std::size_t joints = pred.cols() / 3;
    require_weight_count(w, joints, "wmse");
    const std::vector<double> u = normalize_weights(w.weights);
    const double n = static_cast<double>(pred.size());
    LossResult r;
    r.grad = Tensor::zeros(pred.rows(), pred.cols());
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double ui = u[(i % pred.cols()) / 3];
        const double e = pred.at_flat(i) - target.at_flat(i);
        total += ui * (e * e);
        r.grad.at_flat(i) = ui * 2.0 * e / n;
    }
    r.value = total / n;
    return r;
}

double mpjpe(const Tensor& pred3d_mm, const Tensor& gt3d_mm) {
    require_pose_shapes(pred3d_mm, gt3d_mm, "mpjpe");
    const std::size_t joints = pred3d_mm.cols() / 3;
    double total = 0.0;
    for (std::size_t r = 0; r < pred3d_mm.rows(); ++r)
        for (std::size_t j = 0; j < joints; ++j) {
            const double dx = pred3d_mm(r, 3 * j + 0) - gt3d_mm(r, 3 * j + 0);
            const double dy = pred3d_mm(r, 3 * j + 1) - gt3d_mm(r, 3 * j + 1);
            const double dz = pred3d_mm(r, 3 * j + 2) - gt3d_mm(r, 3 * j + 2);
            total += std::sqrt(dx * dx + dy * dy + dz * dz);
        }
    return total / (static_cast<double>(pred3d_mm.rows()) * static_cast<double>(joints));
}

double weighted_mpjpe(const Tensor& pred3d_mm, const Tensor& gt3d_mm, const JointWeights& w) {
    require_pose_shapes(pred3d_mm, gt3d_mm, "weighted_mpjpe");
    const std::size_t joints = pred3d_mm.cols() / 3;
    require_weight_count(w, joints, "weighted_mpjpe");
    const std::vector<double> u = normalize_weights(w.weights);
    double total = 0.0;
    for (std::size_t r = 0; r < pred3d_mm.rows(); ++r)
        for (std::size_t j = 0; j < joints; ++j) {
            const double dx = pred3d_mm(r, 3 * j + 0) - gt3d_mm(r, 3 * j + 0);
            const double dy = pred3d_mm(r, 3 * j + 1) - gt3d_mm(r, 3 * j + 1);
            const double dz = pred3d_mm(r, 3 * j + 2) - gt3d_mm(r, 3 * j + 2);
            total += u[j] * std::sqrt(dx * dx + dy * dy + dz * dz);
        }
    return total / (static_cast<double>(pred3d_mm.rows()) * static_cast<double>(joints));
}

} // namespace poselift
