#pragma once

// Experiment configuration: a single human-editable key = value file per
// experiment.  All times are macroscopic; microscopic horizons are derived
// as t * n^2 internally, never configured.
//
// Example:
//     experiment = correlation-scaling
//     alpha = 1.0
//     T = 0.25
//     n_sweep = 32 64 128
//     profile = tanh
//     seed = 20240601
//
// Parse errors and validation errors are distinct failure modes (exit codes
// 2 and 3 at the CLI); validation messages name the offending field.

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "slowbond/profiles.hpp"
#include "slowbond/util.hpp"

namespace slowbond {

struct ConfigParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds{
        "mean-scaling", "correlation-scaling", "lower-bound", "local-times", "folding",
        "lumping",      "semigroup",           "fluctuations", "qv",          "clt"};
    return kinds;
}

class KeyValueConfig {
  public:
    static KeyValueConfig parse_text(const std::string& text) {
        KeyValueConfig cfg;
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigParseError("line " + std::to_string(lineno) +
                                       ": expected 'key = value'");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw ConfigParseError("line " + std::to_string(lineno) + ": empty key");
            if (cfg.values_.count(key))
                throw ConfigParseError("line " + std::to_string(lineno) + ": duplicate key '" +
                                       key + "'");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    // canonical form: sorted keys, single spaces
    std::string serialize() const {
        std::ostringstream out;
        for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
        return out.str();
    }

    std::uint64_t hash() const {  // FNV-1a over the canonical serialization
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (char c : serialize()) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ull;
        }
        return h;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string get_string(const std::string& key, std::optional<std::string> fallback = {}) const {
        auto it = values_.find(key);
        if (it != values_.end()) return it->second;
        if (fallback) return *fallback;
        throw ConfigValidationError("missing required field `" + key + "`");
    }

    double get_double(const std::string& key, std::optional<double> fallback = {}) const {
        auto it = values_.find(key);
        if (it == values_.end()) {
            if (fallback) return *fallback;
            throw ConfigValidationError("missing required field `" + key + "`");
        }
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigValidationError("field `" + key + "`: not a number: '" + it->second +
                                        "'");
        }
    }

    std::uint64_t get_u64(const std::string& key, std::optional<std::uint64_t> fallback = {}) const {
        auto it = values_.find(key);
        if (it == values_.end()) {
            if (fallback) return *fallback;
            throw ConfigValidationError("missing required field `" + key + "`");
        }
        try {
            return std::stoull(it->second);
        } catch (...) {
            throw ConfigValidationError("field `" + key + "`: not an unsigned integer");
        }
    }

    std::vector<int> get_int_list(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end())
            throw ConfigValidationError("missing required field `" + key + "`");
        std::istringstream in(it->second);
        std::vector<int> out;
        int v;
        while (in >> v) out.push_back(v);
        if (!in.eof()) throw ConfigValidationError("field `" + key + "`: not an integer list");
        return out;
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

  private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }
    std::map<std::string, std::string> values_;
};

struct ExperimentConfig {
    std::string kind;
    double alpha = 1.0;
    double T = 0.0;
    std::vector<int> n_sweep;
    std::string profile_spec = "tanh";
    std::vector<std::string> test_functions{"jump"};
    std::size_t replicas = 10000;
    std::uint64_t seed = 20240601;
    double s_time = 0.1;
    double t_time = 0.2;
    double floor = 0.0;       // lower-bound regression floor
    double interest = 3.0;    // macroscopic source radius for windows
    KeyValueConfig raw;

    InitialProfile make_profile() const {
        if (profile_spec == "tanh") return InitialProfile::tanh_ramp();
        std::istringstream in(profile_spec);
        std::string head;
        std::getline(in, head, ':');
        if (head == "constant") {
            double c;
            char colon;
            std::istringstream v(profile_spec.substr(9));
            (void)colon;
            if (!(v >> c))
                throw ConfigValidationError("field `profile`: constant needs a value");
            return InitialProfile::constant(c);
        }
        if (head == "step") {
            double l, r;
            std::string rest = profile_spec.substr(5);
            for (char& ch : rest)
                if (ch == ':') ch = ' ';
            std::istringstream v(rest);
            if (!(v >> l >> r))
                throw ConfigValidationError("field `profile`: step needs two values");
            return InitialProfile::step(l, r);
        }
        throw ConfigValidationError("field `profile`: unknown spec '" + profile_spec + "'");
    }
};

inline ExperimentConfig validate_experiment_config(const KeyValueConfig& cfg) {
    ExperimentConfig ec;
    ec.raw = cfg;
    ec.kind = cfg.get_string("experiment");
    bool known = false;
    for (const auto& k : experiment_kinds()) known = known || k == ec.kind;
    if (!known)
        throw ConfigValidationError("field `experiment`: unknown kind '" + ec.kind + "'");

    ec.alpha = cfg.get_double("alpha", 1.0);
    if (!(ec.alpha > 0.0)) throw ConfigValidationError("field `alpha`: must be > 0");
    ec.T = cfg.get_double("T", 0.25);
    if (!(ec.T >= 0.0)) throw ConfigValidationError("field `T`: must be >= 0");

    if (cfg.has("n_sweep")) {
        ec.n_sweep = cfg.get_int_list("n_sweep");
    } else {
        ec.n_sweep = {32, 64, 128};
    }
    if (ec.n_sweep.empty())
        throw ConfigValidationError("field `n_sweep`: must be a nonempty increasing list");
    for (std::size_t i = 0; i < ec.n_sweep.size(); ++i) {
        if (ec.n_sweep[i] < 1)
            throw ConfigValidationError("field `n_sweep`: entries must be >= 1");
        if (i > 0 && ec.n_sweep[i] <= ec.n_sweep[i - 1])
            throw ConfigValidationError("field `n_sweep`: must be strictly increasing");
    }

    ec.profile_spec = cfg.get_string("profile", std::string("tanh"));
    (void)ec.make_profile();  // validates

    if (cfg.has("f")) {
        std::istringstream in(cfg.get_string("f"));
        ec.test_functions.clear();
        std::string name;
        while (in >> name) ec.test_functions.push_back(name);
        if (ec.test_functions.empty())
            throw ConfigValidationError("field `f`: needs at least one preset name");
    }

    const double replicas = cfg.get_double("replicas", 10000.0);
    if (!(replicas >= 1.0)) throw ConfigValidationError("field `replicas`: must be >= 1");
    ec.replicas = static_cast<std::size_t>(replicas);
    ec.seed = cfg.get_u64("seed", 20240601ull);
    ec.s_time = cfg.get_double("s_time", 0.1);
    ec.t_time = cfg.get_double("t_time", 0.2);
    if (!(ec.s_time >= 0.0 && ec.s_time < ec.t_time))
        throw ConfigValidationError("field `s_time`: need 0 <= s_time < t_time");
    ec.floor = cfg.get_double("floor", 0.0);
    if (ec.floor < 0.0) throw ConfigValidationError("field `floor`: must be >= 0");
    ec.interest = cfg.get_double("interest", 3.0);
    if (!(ec.interest > 0.0)) throw ConfigValidationError("field `interest`: must be > 0");
    return ec;
}

}  // namespace slowbond
