#pragma once

// Run manifests: every experiment emits a JSON manifest listing the config
// hash, tool version, timestamps, per-criterion verdicts and every artifact
// file.  Written atomically (temp + rename) at run end.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slowbond/version.hpp"

namespace slowbond {

struct CriterionOutcome {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string comparison;  // "<=", ">=", ...
};

class RunManifest {
  public:
    RunManifest(std::string experiment, std::uint64_t config_hash)
        : experiment_(std::move(experiment)), config_hash_(config_hash),
          started_(std::chrono::system_clock::now()) {}

    void add_artifact(const std::filesystem::path& p) { artifacts_.push_back(p.string()); }
    void add_criterion(CriterionOutcome c) { criteria_.push_back(std::move(c)); }

    bool all_pass() const {
        for (const auto& c : criteria_)
            if (!c.pass) return false;
        return true;
    }
    const std::vector<CriterionOutcome>& criteria() const { return criteria_; }

    void write(const std::filesystem::path& path) const {
        nlohmann::json j;
        j["experiment"] = experiment_;
        j["config_hash"] = config_hash_;
        j["version"] = kVersion;
        j["started_unix"] =
            std::chrono::duration_cast<std::chrono::seconds>(started_.time_since_epoch())
                .count();
        j["finished_unix"] = std::chrono::duration_cast<std::chrono::seconds>(
                                 std::chrono::system_clock::now().time_since_epoch())
                                 .count();
        j["artifacts"] = artifacts_;
        j["criteria"] = nlohmann::json::array();
        for (const auto& c : criteria_) {
            nlohmann::json cj;
            cj["name"] = c.name;
            cj["pass"] = c.pass;
            cj["value"] = c.value;
            cj["threshold"] = c.threshold;
            cj["comparison"] = c.comparison;
            j["criteria"].push_back(cj);
        }
        j["all_pass"] = all_pass();

        const std::filesystem::path tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp);
            out << j.dump(2) << "\n";
        }
        std::filesystem::rename(tmp, path);
    }

  private:
    std::string experiment_;
    std::uint64_t config_hash_;
    std::chrono::system_clock::time_point started_;
    std::vector<std::string> artifacts_;
    std::vector<CriterionOutcome> criteria_;
};

}  // namespace slowbond
