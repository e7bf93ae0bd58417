#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "slowbond/config.hpp"
#include "slowbond/experiments.hpp"

using namespace slowbond;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("slowbond-test-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("config parse and round trip", "[cli]") {
    const std::string text =
        "# comment\n"
        "experiment = folding\n"
        "alpha = 1.5   # inline comment\n"
        "n_sweep = 8 16\n"
        "seed = 99\n";
    const KeyValueConfig cfg = KeyValueConfig::parse_text(text);
    REQUIRE(cfg.get_string("experiment") == "folding");
    REQUIRE(cfg.get_double("alpha") == 1.5);
    REQUIRE(cfg.get_int_list("n_sweep") == std::vector<int>{8, 16});

    const KeyValueConfig again = KeyValueConfig::parse_text(cfg.serialize());
    REQUIRE(again.values() == cfg.values());
    REQUIRE(again.hash() == cfg.hash());
}

TEST_CASE("config errors carry line and field names", "[cli]") {
    REQUIRE_THROWS_AS(KeyValueConfig::parse_text("no equals sign here"), ConfigParseError);
    REQUIRE_THROWS_AS(KeyValueConfig::parse_text("a = 1\na = 2\n"), ConfigParseError);

    SECTION("validation messages name the failing field") {
        KeyValueConfig cfg = KeyValueConfig::parse_text("experiment = folding\n");
        cfg.set("n_sweep", "");
        REQUIRE_THROWS_WITH(validate_experiment_config(cfg),
                            Catch::Matchers::ContainsSubstring("n_sweep"));
        cfg.set("n_sweep", "64 32");
        REQUIRE_THROWS_WITH(validate_experiment_config(cfg),
                            Catch::Matchers::ContainsSubstring("n_sweep"));
        cfg.set("n_sweep", "8 16");
        cfg.set("replicas", "0");
        REQUIRE_THROWS_WITH(validate_experiment_config(cfg),
                            Catch::Matchers::ContainsSubstring("replicas"));
        cfg.set("replicas", "10");
        cfg.set("experiment", "no-such-kind");
        REQUIRE_THROWS_WITH(validate_experiment_config(cfg),
                            Catch::Matchers::ContainsSubstring("experiment"));
    }
}

TEST_CASE("exit statuses follow the contract", "[cli]") {
    std::ostringstream log;
    SECTION("parse error is status 2") {
        REQUIRE(experiments::run_experiment_file("not a config", fresh_dir("parse"), {},
                                                 log) == experiments::kStatusParseError);
    }
    SECTION("validation error is status 3") {
        REQUIRE(experiments::run_experiment_file("experiment = nope\n", fresh_dir("val"),
                                                 {}, log) ==
                experiments::kStatusValidationError);
    }
    SECTION("passing experiment is status 0") {
        const fs::path dir = fresh_dir("fold-ok");
        REQUIRE(experiments::run_experiment_file("experiment = folding\n", dir, {}, log) ==
                experiments::kStatusOk);
        REQUIRE(fs::exists(dir / "manifest.json"));
        REQUIRE(fs::exists(dir / "folding.csv"));
    }
}

TEST_CASE("reruns with the same config are byte-identical", "[cli]") {
    std::ostringstream log;
    const fs::path a = fresh_dir("det-a");
    const fs::path b = fresh_dir("det-b");
    const std::string cfg = "experiment = lumping\nalpha = 0.7\n";
    REQUIRE(experiments::run_experiment_file(cfg, a, {}, log) == 0);
    REQUIRE(experiments::run_experiment_file(cfg, b, {}, log) == 0);
    REQUIRE(slurp(a / "lumping.csv") == slurp(b / "lumping.csv"));
}

TEST_CASE("manifest lists every artifact and no orphans", "[cli]") {
    std::ostringstream log;
    const fs::path dir = fresh_dir("manifest");
    REQUIRE(experiments::run_experiment_file("experiment = lumping\n", dir, {}, log) == 0);
    const std::string man = slurp(dir / "manifest.json");
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name == "manifest.json") continue;
        ++files;
        REQUIRE(man.find(name) != std::string::npos);
    }
    REQUIRE(files >= 1);
}

TEST_CASE("seed and replica overrides reach the experiment", "[cli]") {
    std::ostringstream log;
    const fs::path a = fresh_dir("ovr-a");
    const fs::path b = fresh_dir("ovr-b");
    const std::string cfg =
        "experiment = local-times\nn_sweep = 8\nT = 0.25\nreplicas = 300\n";
    REQUIRE(experiments::run_experiment_file(cfg, a, {{"seed", "1"}}, log) == 0);
    REQUIRE(experiments::run_experiment_file(cfg, b, {{"seed", "2"}}, log) == 0);
    REQUIRE(slurp(a / "localtime_diag.csv") != slurp(b / "localtime_diag.csv"));
}
