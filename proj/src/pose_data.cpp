#include "poselift/pose_data.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace poselift {

namespace {

constexpr int kJoints = 16;

std::string expected_header() {
    std::string h = "subject,action,frame";
    for (int i = 0; i < kJoints; ++i)
        h += ",j" + std::to_string(i) + "_x2d,j" + std::to_string(i) + "_y2d";
    for (int i = 0; i < kJoints; ++i)
        h += ",j" + std::to_string(i) + "_x3d,j" + std::to_string(i) + "_y3d,j" +
             std::to_string(i) + "_z3d";
    return h;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, int row, const std::string& what) {
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw std::runtime_error("dataset row " + std::to_string(row) + ": bad number for " +
                                 what + ": '" + s + "'");
    if (!std::isfinite(v))
        throw std::runtime_error("dataset row " + std::to_string(row) + ": non-finite value for " +
                                 what);
    return v;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Vec3 {
    double x = 0, y = 0, z = 0;
};

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

Vec3 normalized(const Vec3& v) {
    double n = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
    return {v.x / n, v.y / n, v.z / n};
}

// Rotate v by angle around unit axis k (Rodrigues).
Vec3 rotate_axis_angle(const Vec3& v, const Vec3& k, double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    Vec3 kxv = cross(k, v);
    double kdv = k.x * v.x + k.y * v.y + k.z * v.z;
    return {v.x * c + kxv.x * s + k.x * kdv * (1 - c),
            v.y * c + kxv.y * s + k.y * kdv * (1 - c),
            v.z * c + kxv.z * s + k.z * kdv * (1 - c)};
}

} // namespace

const std::vector<std::string>& action_names() {
    static const std::vector<std::string> names = {
        "Directions", "Discussion", "Eating",  "Greeting",    "Phoning",
        "Photo",      "Posing",     "Purchases", "Sitting",   "SittingDown",
        "Smoking",    "Waiting",    "WalkDog", "Walking",     "WalkTogether"};
    return names;
}

const std::string& action_name(int index) {
    const auto& names = action_names();
    if (index < 0 || static_cast<std::size_t>(index) >= names.size())
        throw std::invalid_argument("action_name: index out of range: " + std::to_string(index));
    return names[static_cast<std::size_t>(index)];
}

int action_index(const std::string& name) {
    const auto& names = action_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<PosePair> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_dataset: empty file " + path);
    // Tolerate a trailing \r from files written on other platforms.
    while (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected_header())
        throw std::runtime_error("load_dataset: unexpected header in " + path);

    std::vector<PosePair> out;
    int row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        auto fields = split_csv_line(line);
        if (fields.size() != 3 + 32 + 48)
            throw std::runtime_error("dataset row " + std::to_string(row) + ": expected 83 columns, got " +
                                     std::to_string(fields.size()));
        PosePair p;
        p.subject = fields[0];
        int a = action_index(fields[1]);
        if (a < 0)
            throw std::runtime_error("dataset row " + std::to_string(row) + ": unknown action name '" +
                                     fields[1] + "'");
        p.action = a;
        p.frame = static_cast<long>(parse_double(fields[2], row, "frame"));
        p.pose2d.resize(32);
        p.pose3d.resize(48);
        for (int i = 0; i < 32; ++i) p.pose2d[i] = parse_double(fields[3 + i], row, "2d coordinate");
        for (int i = 0; i < 48; ++i) p.pose3d[i] = parse_double(fields[35 + i], row, "3d coordinate");
        // Re-center to root-relative.
        double rx = p.pose3d[0], ry = p.pose3d[1], rz = p.pose3d[2];
        for (int j = 0; j < kJoints; ++j) {
            p.pose3d[3 * j + 0] -= rx;
            p.pose3d[3 * j + 1] -= ry;
            p.pose3d[3 * j + 2] -= rz;
        }
        out.push_back(std::move(p));
    }
    return out;
}

void save_dataset(const std::string& path, const std::vector<PosePair>& data) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_dataset: cannot write " + path);
    out << expected_header() << "\n";
    for (const auto& p : data) {
        if (p.pose2d.size() != 32 || p.pose3d.size() != 48)
            throw std::invalid_argument("save_dataset: pose with wrong joint count");
        out << p.subject << "," << action_name(p.action) << "," << p.frame;
        for (double v : p.pose2d) out << "," << format_double(v);
        for (double v : p.pose3d) out << "," << format_double(v);
        out << "\n";
    }
}

NormStats compute_norm_stats(const std::vector<PosePair>& train, const std::string& source_split) {
    if (train.size() < 2)
        throw std::invalid_argument("compute_norm_stats: need at least 2 samples, got " +
                                    std::to_string(train.size()));
    const double kFloor = 1e-8;
    NormStats s;
    s.source_split = source_split;
    s.mean2d.assign(32, 0.0);
    s.std2d.assign(32, 0.0);
    s.mean3d.assign(48, 0.0);
    s.std3d.assign(48, 0.0);
    // Welford per coordinate; m2 accumulates sum of squared deviations.
    std::vector<double> m2_2d(32, 0.0), m2_3d(48, 0.0);
    double count = 0;
    for (const auto& p : train) {
        if (p.pose2d.size() != 32 || p.pose3d.size() != 48)
            throw std::invalid_argument("compute_norm_stats: pose with wrong joint count");
        count += 1;
        for (int i = 0; i < 32; ++i) {
            double d = p.pose2d[i] - s.mean2d[i];
            s.mean2d[i] += d / count;
            m2_2d[i] += d * (p.pose2d[i] - s.mean2d[i]);
        }
        for (int i = 0; i < 48; ++i) {
            double d = p.pose3d[i] - s.mean3d[i];
            s.mean3d[i] += d / count;
            m2_3d[i] += d * (p.pose3d[i] - s.mean3d[i]);
        }
    }
    for (int i = 0; i < 32; ++i) {
        s.std2d[i] = std::sqrt(m2_2d[i] / count);
        if (s.std2d[i] < kFloor) {
            s.std2d[i] = kFloor;
            s.floored2d.push_back(i);
        }
    }
    for (int i = 0; i < 48; ++i) {
        s.std3d[i] = std::sqrt(m2_3d[i] / count);
        if (s.std3d[i] < kFloor) {
            s.std3d[i] = kFloor;
            s.floored3d.push_back(i);
        }
    }
    return s;
}

namespace {

std::vector<double> apply_norm(const std::vector<double>& v, const std::vector<double>& mean,
                               const std::vector<double>& sd, bool forward, const char* what) {
    if (v.size() != mean.size())
        throw std::invalid_argument(std::string(what) + ": length " + std::to_string(v.size()) +
                                    " does not match stats length " + std::to_string(mean.size()));
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = forward ? (v[i] - mean[i]) / sd[i] : v[i] * sd[i] + mean[i];
    return out;
}

} // namespace

std::vector<double> normalize2d(const std::vector<double>& pose, const NormStats& stats) {
    return apply_norm(pose, stats.mean2d, stats.std2d, true, "normalize2d");
}

std::vector<double> denormalize2d(const std::vector<double>& normed, const NormStats& stats) {
    return apply_norm(normed, stats.mean2d, stats.std2d, false, "denormalize2d");
}

std::vector<double> normalize3d(const std::vector<double>& pose, const NormStats& stats) {
    return apply_norm(pose, stats.mean3d, stats.std3d, true, "normalize3d");
}

std::vector<double> denormalize3d(const std::vector<double>& normed, const NormStats& stats) {
    return apply_norm(normed, stats.mean3d, stats.std3d, false, "denormalize3d");
}

Tensor to_input_matrix(const std::vector<PosePair>& data, const NormStats& stats) {
    Tensor m(data.size(), 32);
    for (std::size_t r = 0; r < data.size(); ++r) {
        auto v = normalize2d(data[r].pose2d, stats);
        for (int c = 0; c < 32; ++c) m(r, c) = v[static_cast<std::size_t>(c)];
    }
    return m;
}

Tensor to_target_matrix(const std::vector<PosePair>& data, const NormStats& stats) {
    Tensor m(data.size(), 48);
    for (std::size_t r = 0; r < data.size(); ++r) {
        auto v = normalize3d(data[r].pose3d, stats);
        for (int c = 0; c < 48; ++c) m(r, c) = v[static_cast<std::size_t>(c)];
    }
    return m;
}

Tensor denormalize3d_batch(const Tensor& normed, const NormStats& stats) {
    if (normed.cols() != 48)
        throw std::invalid_argument("denormalize3d_batch: expected 48 columns, got " +
                                    std::to_string(normed.cols()));
    Tensor m(normed.rows(), 48);
    for (std::size_t r = 0; r < normed.rows(); ++r)
        for (std::size_t c = 0; c < 48; ++c)
            m(r, c) = normed(r, c) * stats.std3d[c] + stats.mean3d[c];
    return m;
}

Tensor pose3d_matrix(const std::vector<PosePair>& data) {
    Tensor m(data.size(), 48);
    for (std::size_t r = 0; r < data.size(); ++r) {
        if (data[r].pose3d.size() != 48)
            throw std::invalid_argument("pose3d_matrix: pose with wrong joint count");
        for (int c = 0; c < 48; ++c) m(r, c) = data[r].pose3d[static_cast<std::size_t>(c)];
    }
    return m;
}

SplitResult split_by_subject(const std::vector<PosePair>& data,
                             const std::vector<std::string>& train_subjects,
                             const std::vector<std::string>& test_subjects) {
    std::set<std::string> train_set(train_subjects.begin(), train_subjects.end());
    std::set<std::string> test_set(test_subjects.begin(), test_subjects.end());
    for (const auto& s : train_set)
        if (test_set.count(s))
            throw std::invalid_argument("split_by_subject: subject '" + s +
                                        "' appears in both train and test sets");
    SplitResult r;
    std::size_t unassigned = 0;
    for (const auto& p : data) {
        if (train_set.count(p.subject))
            r.train.push_back(p);
        else if (test_set.count(p.subject))
            r.test.push_back(p);
        else
            ++unassigned;
    }
    if (unassigned > 0)
        std::cerr << "warning: split_by_subject dropped " << unassigned
                  << " samples whose subject is in neither set\n";
    if (r.train.empty()) std::cerr << "warning: split_by_subject produced an empty train set\n";
    if (r.test.empty()) std::cerr << "warning: split_by_subject produced an empty test set\n";
    return r;
}

std::vector<double> project(const std::vector<double>& pose3d_cam, const CameraModel& cam) {
    if (pose3d_cam.size() % 3 != 0)
        throw std::invalid_argument("project: coordinate count not a multiple of 3");
    if (!(cam.f > 0)) throw std::invalid_argument("project: focal length must be positive");
    const std::size_t joints = pose3d_cam.size() / 3;
    std::vector<double> out(joints * 2);
    for (std::size_t j = 0; j < joints; ++j) {
        double z = pose3d_cam[3 * j + 2] + cam.z0;
        if (!(z > 0))
            throw std::runtime_error("project: non-positive depth at joint " + std::to_string(j));
        out[2 * j + 0] = cam.f * pose3d_cam[3 * j + 0] / z + cam.cx;
        out[2 * j + 1] = cam.f * pose3d_cam[3 * j + 1] / z + cam.cy;
    }
    return out;
}

std::vector<PosePair> synth_generate(int n, std::uint64_t seed, const CameraModel& cam,
                                     double noise_std,
                                     std::vector<std::array<double, 3>>* root_offsets) {
    if (n < 1) throw std::invalid_argument("synth_generate: n must be >= 1");
    if (noise_std < 0) throw std::invalid_argument("synth_generate: noise_std must be >= 0");

    const SkeletonSpec& skel = SkeletonSpec::canonical16();
    const double deg = M_PI / 180.0;
    // Rest direction of each bone (child relative to parent) and its maximum
    // deflection. Y points down: legs and arms hang toward +Y, the spine
    // chain ascends toward -Y, hips and shoulders extend sideways.
    struct BonePrior {
        Vec3 rest;
        double max_angle;
    };
    const std::vector<BonePrior> priors = {
        {{0, 0, 0}, 0},              // Hip (root)
        {{-1, 0, 0}, 20 * deg},      // RHip
        {{0, 1, 0}, 50 * deg},       // RKnee
        {{0, 1, 0}, 50 * deg},       // RFoot
        {{1, 0, 0}, 20 * deg},       // LHip
        {{0, 1, 0}, 50 * deg},       // LKnee
        {{0, 1, 0}, 50 * deg},       // LFoot
        {{0, -1, 0}, 15 * deg},      // Spine
        {{0, -1, 0}, 15 * deg},      // Thorax
        {{0, -1, 0}, 15 * deg},      // Head
        {{1, 0, 0}, 20 * deg},       // LShoulder
        {{0, 1, 0}, 50 * deg},       // LElbow
        {{0, 1, 0}, 50 * deg},       // LWrist
        {{-1, 0, 0}, 20 * deg},      // RShoulder
        {{0, 1, 0}, 50 * deg},       // RElbow
        {{0, 1, 0}, 50 * deg},       // RWrist
    };

    Rng rng(seed);
    std::vector<PosePair> out;
    out.reserve(static_cast<std::size_t>(n));
    if (root_offsets) {
        root_offsets->clear();
        root_offsets->reserve(static_cast<std::size_t>(n));
    }

    for (int i = 0; i < n; ++i) {
        std::vector<Vec3> pos(kJoints);
        // Draw order is fixed (per bone: deflection angle then axis phase),
        // so a given (n, seed, noise_std) always yields identical output.
        for (int j = 1; j < kJoints; ++j) {
            const BonePrior& bp = priors[static_cast<std::size_t>(j)];
            double angle = rng.uniform(0.0, bp.max_angle);
            double phase = rng.uniform(0.0, 2.0 * M_PI);
            // Orthonormal frame perpendicular to the rest direction.
            Vec3 helper = std::abs(bp.rest.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
            Vec3 u = normalized(cross(bp.rest, helper));
            Vec3 v = cross(bp.rest, u);
            Vec3 axis = {u.x * std::cos(phase) + v.x * std::sin(phase),
                         u.y * std::cos(phase) + v.y * std::sin(phase),
                         u.z * std::cos(phase) + v.z * std::sin(phase)};
            Vec3 dir = rotate_axis_angle(bp.rest, axis, angle);
            const Vec3& par = pos[static_cast<std::size_t>(skel.parent[static_cast<std::size_t>(j)])];
            double len = skel.bone_length_mm[static_cast<std::size_t>(j)];
            pos[static_cast<std::size_t>(j)] = {par.x + len * dir.x, par.y + len * dir.y,
                                                par.z + len * dir.z};
        }
        // Whole-body yaw about the vertical axis. The root is skipped so it
        // keeps canonical +0.0 coordinates (rotating it could flip zero signs
        // and break byte-stable CSV round trips).
        double yaw = rng.uniform(-M_PI, M_PI);
        double cy = std::cos(yaw), sy = std::sin(yaw);
        for (std::size_t j = 1; j < pos.size(); ++j) {
            Vec3& p = pos[j];
            double x = p.x * cy + p.z * sy;
            double z = -p.x * sy + p.z * cy;
            p.x = x;
            p.z = z;
        }
        double ox = rng.uniform(-200.0, 200.0);
        double oy = rng.uniform(-200.0, 200.0);
        double oz = rng.uniform(-300.0, 300.0);

        PosePair pair;
        pair.subject = "S" + std::to_string(i % 7 + 1);
        pair.action = i % 15;
        pair.frame = i;
        pair.pose3d.resize(48);
        std::vector<double> cam_space(48);
        for (int j = 0; j < kJoints; ++j) {
            const Vec3& p = pos[static_cast<std::size_t>(j)];
            pair.pose3d[3 * j + 0] = p.x;
            pair.pose3d[3 * j + 1] = p.y;
            pair.pose3d[3 * j + 2] = p.z;
            cam_space[3 * j + 0] = p.x + ox;
            cam_space[3 * j + 1] = p.y + oy;
            cam_space[3 * j + 2] = p.z + oz;
        }
        pair.pose2d = project(cam_space, cam);
        if (noise_std > 0)
            for (double& c : pair.pose2d) c += rng.normal(0.0, noise_std);
        if (root_offsets) root_offsets->push_back({ox, oy, oz});
        out.push_back(std::move(pair));
    }
    return out;
}

} // namespace poselift
