#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace poselift {

inline constexpr const char* kArtifactVersion = "1.0.0";

/// FNV-1a 64-bit hash of a file's bytes.
std::uint64_t fnv1a_file_hash(const std::string& path);

/// Provenance record written beside every command output. Two runs with
/// identical flags and inputs differ only in the timestamp fields.
struct RunManifest {
    std::string command;
    std::string invocation; // argv joined with spaces
    std::vector<std::pair<std::string, std::string>> config; // resolved settings, in order
    bool has_seed = false;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::uint64_t>> inputs; // path -> content hash
    std::vector<std::string> outputs;
    std::string started_at; // ISO 8601 UTC
    std::string finished_at;

    static std::string now_iso8601();
    void add_input(const std::string& path); // hashes the file
    void save(const std::string& path) const;
};

} // namespace poselift
