#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "waist/equalizer.hpp"
#include "waist/errors.hpp"
#include "waist/suites.hpp"
#include "waist/waist_verifier.hpp"

namespace waist {

inline std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Collects artifacts in memory and writes them plus a manifest (name, size,
/// content hash per file). Content is byte-deterministic, so reruns with the
/// same config and seed produce identical trees at any parallelism width.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void add(const std::string& name, std::string content) {
        files_.emplace_back(name, std::move(content));
    }

    void write_all(const nlohmann::json& run_info) {
        std::filesystem::create_directories(dir_);
        for (const auto& [name, content] : files_) write_file(dir_ / name, content);
        nlohmann::json manifest;
        manifest["run"] = run_info;
        auto arr = nlohmann::json::array();
        for (const auto& [name, content] : files_)
            arr.push_back({{"file", name},
                           {"bytes", content.size()},
                           {"fnv64", fnv1a64_hex(content)}});
        manifest["artifacts"] = arr;
        write_file(dir_ / "manifest.json", manifest.dump(2) + "\n");
    }

    const std::filesystem::path& dir() const { return dir_; }

private:
    static void write_file(const std::filesystem::path& path, const std::string& content) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write " + path.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
    }

    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

inline std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// --- waist report serializers ---

inline nlohmann::json waist_report_json(const WaistReport& rep) {
    nlohmann::json j;
    j["map"] = rep.map_name;
    j["n"] = rep.n;
    j["k"] = rep.k;
    j["eps"] = rep.eps;
    j["delta_slab"] = rep.delta;
    j["grid_res"] = rep.grid_res;
    j["seed"] = rep.seed;
    j["phase1_samples"] = rep.phase1;
    j["phase2_samples"] = rep.phase2;
    j["max_fraction"] = rep.max_fraction;
    j["sigma_at_max"] = rep.sigma_at_max;
    j["argmax_z"] = rep.argmax_z;
    j["bound"] = rep.bound;
    j["gap"] = rep.gap;
    j["skipped_z"] = rep.skipped;
    auto rows = nlohmann::json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"z", r.z}, {"fraction", r.fraction}, {"sigma", r.sigma},
                        {"slab", r.slab_count}});
    j["rows"] = rows;
    return j;
}

inline std::string waist_report_csv(const WaistReport& rep) {
    std::string out;
    for (int j = 0; j < rep.k; ++j) out += "z" + std::to_string(j) + ",";
    out += "fraction,sigma,bound,gap\n";
    for (const auto& r : rep.rows) {
        for (double z : r.z) out += format_g(z) + ",";
        out += format_g(r.fraction) + "," + format_g(r.sigma) + "," + format_g(rep.bound) + "," +
               format_g(r.fraction - rep.bound) + "\n";
    }
    return out;
}

inline std::string waist_report_plot(const WaistReport& rep) {
    std::string out = "# z... fraction bound\n";
    for (const auto& r : rep.rows) {
        for (double z : r.z) out += format_g(z) + " ";
        out += format_g(r.fraction) + " " + format_g(rep.bound) + "\n";
    }
    return out;
}

// --- equalizer artifacts ---

inline std::string solve_trace_jsonl(const SolveResult& res) {
    std::string out;
    for (const auto& row : res.trace) {
        nlohmann::json j;
        j["restart"] = row.restart;
        j["iteration"] = row.iteration;
        j["residual"] = row.residual;
        j["volumes"] = row.volumes;
        j["center_images"] = row.images;
        out += j.dump() + "\n";
    }
    return out;
}

inline nlohmann::json solve_summary_json(const SolveResult& res, int depth, int n, int k,
                                         const std::string& map_name) {
    nlohmann::json j;
    j["depth"] = depth;
    j["n"] = n;
    j["k"] = k;
    j["map"] = map_name;
    j["converged"] = res.converged;
    j["residual_opt"] = res.residual_opt;
    j["residual_verified"] = res.residual_verified;
    j["volume_gap"] = res.volume_gap;
    j["image_diameter"] = res.image_diameter;
    j["volumes"] = res.volumes;
    auto imgs = nlohmann::json::array();
    for (const auto& img : res.images)
        imgs.push_back(img ? nlohmann::json(*img) : nlohmann::json(nullptr));
    j["center_images"] = imgs;
    return j;
}

inline std::string suite_results_jsonl(const SuiteResult& suite) {
    std::string out;
    for (const auto& r : suite.records) out += to_json(r).dump() + "\n";
    return out;
}

}  // namespace waist
