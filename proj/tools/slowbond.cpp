// Command-line laboratory for the slow-bond exclusion process.
//
//   slowbond simulate      --config FILE [--out DIR] [--seed U64] [--replicas N]
//   slowbond moments       --config FILE ...   (mean/correlation/lower-bound)
//   slowbond localtime     --config FILE ...   (local-times/folding/lumping)
//   slowbond semigroup     --config FILE ...
//   slowbond fluctuations  --config FILE ...   (fluctuations/qv/clt)
//   slowbond verify        [--tier fast|full] [--out DIR] [--seed U64]
//
// Exit status: 0 success, 1 criterion failure, 2 parse error, 3 validation
// error.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "slowbond/acceptance.hpp"
#include "slowbond/experiments.hpp"

namespace fs = std::filesystem;
using namespace slowbond;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigParseError("cannot open config file: " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run_family(const std::string& family, const std::set<std::string>& kinds,
               const fs::path& config_path, const fs::path& out_dir,
               const std::map<std::string, std::string>& overrides) {
    try {
        const std::string text = read_file(config_path);
        KeyValueConfig cfg = KeyValueConfig::parse_text(text);
        for (const auto& [k, v] : overrides) cfg.set(k, v);
        const ExperimentConfig ec = validate_experiment_config(cfg);
        if (!kinds.count(ec.kind)) {
            std::cerr << "validation error: field `experiment`: kind '" << ec.kind
                      << "' does not belong to subcommand `" << family << "`\n";
            return experiments::kStatusValidationError;
        }
        return experiments::run_experiment_file(cfg.serialize(), out_dir, {}, std::cout);
    } catch (const ConfigParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return experiments::kStatusParseError;
    } catch (const ConfigValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return experiments::kStatusValidationError;
    }
}

// Raw ensemble run with snapshot dumps: binary occupancy for the first few
// replicas, CSV site means, JSON sidecar.
int run_simulate(const fs::path& config_path, const fs::path& out_dir,
                 const std::map<std::string, std::string>& overrides) {
    try {
        KeyValueConfig cfg = KeyValueConfig::parse_text(read_file(config_path));
        for (const auto& [k, v] : overrides) cfg.set(k, v);
        cfg.set("experiment", cfg.has("experiment") ? cfg.get_string("experiment")
                                                    : std::string("qv"));
        ExperimentConfig ec = validate_experiment_config(cfg);

        const int n = ec.n_sweep.back();
        const ModelParams p{n, ec.alpha, ec.T};
        const InitialProfile profile = ec.make_profile();
        const Window1D w = Window1D::for_horizon(p, ec.interest + 1.0);

        std::vector<double> snaps;
        if (cfg.has("snapshots")) {
            std::istringstream in(cfg.get_string("snapshots"));
            double v;
            while (in >> v) snaps.push_back(v);
        }
        if (snaps.empty()) snaps = {ec.T};

        EnsembleSpec spec;
        spec.p = p;
        spec.window = w;
        spec.profile = &profile;
        spec.rho_constant = 0.5;
        spec.snapshot_times = snaps;
        spec.t_end = ec.T;
        spec.replicas = ec.replicas;
        spec.seed = ec.seed;
        spec.record_occupancy = true;
        const EnsembleResult res = run_ensemble(spec);

        fs::create_directories(out_dir);
        RunManifest man("simulate", cfg.hash());

        // CSV site means
        {
            CsvWriter csv(out_dir / "site_means.csv", {"t", "x", "value"});
            man.add_artifact(csv.path());
            for (std::size_t k = 0; k < snaps.size(); ++k) {
                std::vector<double> acc(w.size(), 0.0);
                for (std::size_t r = 0; r < spec.replicas; ++r) {
                    const Configuration& c = res.occupancy[k][r];
                    for (std::size_t i = 0; i < w.size(); ++i)
                        if (c.occupied(w.site(i))) acc[i] += 1.0;
                }
                for (std::size_t i = 0; i < w.size(); ++i)
                    csv.row(snaps[k], static_cast<long long>(w.site(i)),
                            acc[i] / static_cast<double>(spec.replicas));
            }
        }
        // binary occupancy for the first few replicas
        {
            const fs::path bin = out_dir / "occupancy.bin";
            std::ofstream out(bin, std::ios::binary);
            out.write("SBOCC1\n", 7);
            const std::size_t keep = std::min<std::size_t>(spec.replicas, 8);
            for (std::size_t k = 0; k < snaps.size(); ++k)
                for (std::size_t r = 0; r < keep; ++r) {
                    const Configuration& c = res.occupancy[k][r];
                    const std::uint32_t rid = static_cast<std::uint32_t>(r);
                    const double t = snaps[k];
                    const std::int64_t lo = c.window.lo, hi = c.window.hi;
                    out.write(reinterpret_cast<const char*>(&rid), sizeof rid);
                    out.write(reinterpret_cast<const char*>(&t), sizeof t);
                    out.write(reinterpret_cast<const char*>(&lo), sizeof lo);
                    out.write(reinterpret_cast<const char*>(&hi), sizeof hi);
                    out.write(reinterpret_cast<const char*>(c.bits.data()),
                              static_cast<std::streamsize>(c.bits.size() * 8));
                }
            man.add_artifact(bin);
        }
        // JSON sidecar
        {
            nlohmann::json j;
            j["version"] = kVersion;
            j["seed"] = ec.seed;
            j["n"] = n;
            j["alpha"] = ec.alpha;
            j["T"] = ec.T;
            j["replicas"] = ec.replicas;
            j["window"] = {w.lo, w.hi};
            j["snapshots"] = snaps;
            j["total_events"] = res.total_events;
            const fs::path side = out_dir / "run.json";
            std::ofstream out(side);
            out << j.dump(2) << "\n";
            man.add_artifact(side);
        }
        man.write(out_dir / "manifest.json");
        std::cout << "simulate: " << spec.replicas << " replicas, " << res.total_events
                  << " events\n";
        return experiments::kStatusOk;
    } catch (const ConfigParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return experiments::kStatusParseError;
    } catch (const ConfigValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return experiments::kStatusValidationError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"slow-bond exclusion process laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "runs";
    std::string tier = "fast";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t replicas = 0;

    const auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* copt = sub->add_option("--config", config_path, "experiment config file");
        if (needs_config) copt->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "base seed override")->each([&](const std::string&) {
            seed_set = true;
        });
        sub->add_option("--replicas", replicas, "replica count override");
    };

    auto* sim = app.add_subcommand("simulate", "raw SSEP ensemble with snapshot dumps");
    add_common(sim, true);
    auto* mom = app.add_subcommand("moments", "mean/correlation solver experiments");
    add_common(mom, true);
    auto* loc = app.add_subcommand("localtime", "random-walk local-time experiments");
    add_common(loc, true);
    auto* sem = app.add_subcommand("semigroup", "Robin semigroup battery");
    add_common(sem, true);
    auto* flu = app.add_subcommand("fluctuations", "fluctuation-field experiments");
    add_common(flu, true);
    auto* ver = app.add_subcommand("verify", "run the verification tiers");
    ver->add_option("--tier", tier, "fast|full")->check(CLI::IsMember({"fast", "full"}));
    ver->add_option("--out", out_dir, "output directory");
    ver->add_option("--seed", seed, "base seed override")->each([&](const std::string&) {
        seed_set = true;
    });

    CLI11_PARSE(app, argc, argv);

    std::map<std::string, std::string> overrides;
    if (seed_set) overrides["seed"] = std::to_string(seed);
    if (replicas > 0) overrides["replicas"] = std::to_string(replicas);

    if (sim->parsed()) return run_simulate(config_path, out_dir, overrides);
    if (mom->parsed())
        return run_family("moments",
                          {"mean-scaling", "correlation-scaling", "lower-bound"},
                          config_path, out_dir, overrides);
    if (loc->parsed())
        return run_family("localtime", {"local-times", "folding", "lumping"}, config_path,
                          out_dir, overrides);
    if (sem->parsed())
        return run_family("semigroup", {"semigroup"}, config_path, out_dir, overrides);
    if (flu->parsed())
        return run_family("fluctuations", {"fluctuations", "qv", "clt"}, config_path,
                          out_dir, overrides);
    if (ver->parsed()) {
        acceptance::Options opt;
        opt.full = tier == "full";
        opt.out_dir = out_dir;
        if (seed_set) opt.seed = seed;
        const auto reports = acceptance::run(opt, std::cout);
        std::size_t fails = 0;
        for (const auto& r : reports) fails += r.pass ? 0 : 1;
        std::cout << reports.size() - fails << "/" << reports.size()
                  << " criteria passed\n";
        return fails == 0 ? experiments::kStatusOk : experiments::kStatusCriterionFailure;
    }
    return experiments::kStatusValidationError;
}
