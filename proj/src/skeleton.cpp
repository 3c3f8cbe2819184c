#include "poselift/skeleton.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace poselift {

int SkeletonSpec::root() const {
    for (std::size_t i = 0; i < parent.size(); ++i)
        if (parent[i] < 0) return static_cast<int>(i);
    return -1;
}

void SkeletonSpec::validate() const {
    const std::size_t n = joint_names.size();
    if (parent.size() != n || bone_length_mm.size() != n)
        throw std::runtime_error("skeleton: field lengths disagree");
    int roots = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (parent[i] < 0) {
            ++roots;
            continue;
        }
        if (static_cast<std::size_t>(parent[i]) >= n)
            throw std::runtime_error("skeleton: parent index out of range for " + joint_names[i]);
        if (!(bone_length_mm[i] > 0.0))
            throw std::runtime_error("skeleton: non-positive bone length for " + joint_names[i]);
    }
    if (roots != 1) throw std::runtime_error("skeleton: expected exactly one root");
    // Walking to the root from every joint must terminate (acyclic).
    for (std::size_t i = 0; i < n; ++i) {
        int j = static_cast<int>(i);
        std::size_t hops = 0;
        while (parent[j] >= 0) {
            j = parent[j];
            if (++hops > n) throw std::runtime_error("skeleton: cycle through " + joint_names[i]);
        }
    }
}

int SkeletonSpec::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < joint_names.size(); ++i)
        if (joint_names[i] == name) return static_cast<int>(i);
    return -1;
}

const SkeletonSpec& SkeletonSpec::canonical16() {
    static const SkeletonSpec spec = [] {
        SkeletonSpec s;
        // name, parent, bone length to parent (mm)
        const struct {
            const char* name;
            int parent;
            double len;
        } rows[] = {
            {"Hip", -1, 0.0},        {"RHip", 0, 130.0},      {"RKnee", 1, 450.0},
            {"RFoot", 2, 440.0},     {"LHip", 0, 130.0},      {"LKnee", 4, 450.0},
            {"LFoot", 5, 440.0},     {"Spine", 0, 230.0},     {"Thorax", 7, 250.0},
            {"Head", 8, 210.0},      {"LShoulder", 8, 150.0}, {"LElbow", 10, 280.0},
            {"LWrist", 11, 250.0},   {"RShoulder", 8, 150.0}, {"RElbow", 13, 280.0},
            {"RWrist", 14, 250.0},
        };
        for (const auto& r : rows) {
            s.joint_names.emplace_back(r.name);
            s.parent.push_back(r.parent);
            s.bone_length_mm.push_back(r.len);
        }
        s.bone_length_mm[0] = 0.0;
        s.validate();
        return s;
    }();
    return spec;
}

SkeletonSpec SkeletonSpec::load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("skeleton: cannot open " + path);
    nlohmann::json j;
    in >> j;
    SkeletonSpec s;
    for (const auto& joint : j.at("joints")) {
        s.joint_names.push_back(joint.at("name").get<std::string>());
        s.parent.push_back(joint.at("parent").get<int>());
        s.bone_length_mm.push_back(joint.at("bone_length_mm").get<double>());
    }
    s.validate();
    return s;
}

void SkeletonSpec::save_json(const std::string& path) const {
    nlohmann::json joints = nlohmann::json::array();
    for (std::size_t i = 0; i < joint_names.size(); ++i)
        joints.push_back({{"name", joint_names[i]},
                          {"parent", parent[i]},
                          {"bone_length_mm", bone_length_mm[i]}});
    nlohmann::json j{{"joints", joints}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("skeleton: cannot write " + path);
    out << j.dump(2) << "\n";
}

} // namespace poselift
