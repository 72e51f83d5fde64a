#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bsde/experiment.hpp"

using namespace bsde;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::path("experiment_out") / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_cli(const std::string& args, const fs::path& log) {
    std::string cmd = std::string(BSDE_CLI_PATH) + " " + args + " > " +
                      log.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
}

const char* kSmallConfig =
    R"({"fixture":"zero_driver","steps":16,"paths":512,
        "checks":["assumptions","residual","power_expansion"]})";

}  // namespace

TEST_CASE("config normalization round-trips and hashes stably") {
    ExperimentConfig cfg = parse_config(R"({"fixture":"zero_driver"})");
    CHECK(cfg.steps == 64);
    CHECK(cfg.paths == 4096);
    CHECK(cfg.seed == 2026);
    CHECK(cfg.checks.size() == 2);

    std::string canon = normalized_json(cfg);
    ExperimentConfig back = parse_config(canon);
    CHECK(normalized_json(back) == canon);
    CHECK(config_hash_hex(back) == config_hash_hex(cfg));
    CHECK(config_hash_hex(cfg).size() == 16);

    // Execution details do not change the hash; science does.
    ExperimentConfig moved = cfg;
    moved.out_dir = "elsewhere";
    moved.workers = 7;
    CHECK(config_hash_hex(moved) == config_hash_hex(cfg));
    ExperimentConfig reseeded = cfg;
    reseeded.seed = 7;
    CHECK(config_hash_hex(reseeded) != config_hash_hex(cfg));

    ExperimentConfig full = parse_config(
        R"({"fixture":"example3","horizon":2.5,"scheme":"mapped","steps":32,
            "paths":1024,"seed":5,"degree":2,"p":2.0,"beta":0.75,
            "levels":[2,4,8],"checks":["residual"],"residual_tol":0.1,
            "out_dir":"x","workers":3})");
    CHECK(full.beta_set);
    CHECK(full.horizon == 2.5);
    std::string canon2 = normalized_json(full);
    CHECK(normalized_json(parse_config(canon2)) == canon2);
}

TEST_CASE("config validation rejects malformed input") {
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"steps":16})"), ConfigError);  // no fixture
    CHECK_THROWS_AS(parse_config(R"({"fixture":"nope"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"fixture":"zero_driver","stepz":8})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"fixture":"zero_driver","scheme":"log"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"fixture":"zero_driver","steps":1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"fixture":"zero_driver","beta":1.5})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"fixture":"zero_driver","seed":-4})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"fixture":"zero_driver","levels":[4,2]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"fixture":"zero_driver","checks":["nope"]})"),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_config(R"({"fixture":"zero_driver","checks":["residual","residual"]})"),
        ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"fixture":"zero_driver","checks":["apriori"],"p":1.0})"),
                    ConfigError);
    // Envelope checks need envelope data, which the broken fixture lacks.
    CHECK_THROWS_AS(
        parse_config(R"({"fixture":"broken_monotone","checks":["envelope"]})"),
        ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"fixture":"zero_driver","horizon":"soon"})"),
                    ConfigError);
}

TEST_CASE("zero driver run passes every check and writes the artifact set") {
    ExperimentConfig cfg = parse_config(kSmallConfig);
    cfg.out_dir = fresh_dir("zero").string();
    RunArtifacts art = run_experiment(cfg);
    CHECK(art.exit_code == 0);
    // y at the first node is the sample mean of B_T: near zero.
    CHECK(std::abs(art.y0_mean) < 0.3);

    for (const char* name : {"solution.csv", "picard.json", "estimates.csv",
                             "assumptions.json", "manifest.json"})
        CHECK(fs::exists(fs::path(cfg.out_dir) / name));

    std::string csv = slurp(fs::path(cfg.out_dir) / "solution.csv");
    CHECK(csv.rfind("t,mean_y,std_y,mean_abs_z\n0,", 0) == 0);

    nlohmann::json manifest =
        nlohmann::json::parse(slurp(fs::path(cfg.out_dir) / "manifest.json"));
    CHECK(manifest["config_hash"] == config_hash_hex(cfg));
    CHECK(manifest["all_pass"] == true);
    CHECK(manifest["seed"] == 2026);
    CHECK_FALSE(manifest["git_revision"].get<std::string>().empty());
    CHECK(manifest["files"].size() == 4);  // everything but the manifest itself
    bool saw_converged = false;
    for (const auto& c : manifest["checks"])
        if (c["name"] == "converged") saw_converged = c["pass"].get<bool>();
    CHECK(saw_converged);
}

TEST_CASE("identical configs give bit-identical artifacts across runs and workers") {
    ExperimentConfig cfg = parse_config(kSmallConfig);
    cfg.out_dir = fresh_dir("det_a").string();
    RunArtifacts a = run_experiment(cfg);

    ExperimentConfig again = parse_config(kSmallConfig);
    again.out_dir = fresh_dir("det_b").string();
    RunArtifacts b = run_experiment(again);

    ExperimentConfig wide = parse_config(kSmallConfig);
    wide.out_dir = fresh_dir("det_c").string();
    wide.workers = 4;
    RunArtifacts c = run_experiment(wide);

    CHECK(a.exit_code == 0);
    CHECK(b.exit_code == 0);
    CHECK(c.exit_code == 0);
    for (const char* name : {"solution.csv", "picard.json", "estimates.csv",
                             "assumptions.json", "manifest.json"}) {
        CAPTURE(name);
        std::string ref = slurp(fs::path(cfg.out_dir) / name);
        CHECK(slurp(fs::path(again.out_dir) / name) == ref);
        CHECK(slurp(fs::path(wide.out_dir) / name) == ref);
    }
}

TEST_CASE("a failing claimed property exits 1 with the report written") {
    ExperimentConfig cfg = parse_config(
        R"({"fixture":"broken_monotone","steps":8,"paths":256,
            "checks":["assumptions"]})");
    cfg.out_dir = fresh_dir("broken").string();
    RunArtifacts art = run_experiment(cfg);
    CHECK(art.exit_code == 1);

    nlohmann::json rep =
        nlohmann::json::parse(slurp(fs::path(cfg.out_dir) / "assumptions.json"));
    CHECK(rep["all_claimed_hold"] == false);
    bool monotone_failed = false;
    for (const auto& row : rep["rows"])
        if (row["assumption"] == "monotone_in_y")
            monotone_failed = row["claimed"].get<bool>() && !row["pass"].get<bool>();
    CHECK(monotone_failed);
    nlohmann::json manifest =
        nlohmann::json::parse(slurp(fs::path(cfg.out_dir) / "manifest.json"));
    CHECK(manifest["all_pass"] == false);
}

TEST_CASE("semantic config errors surface before any file is written") {
    ExperimentConfig cfg = parse_config(
        R"({"fixture":"zero_driver","horizon":"inf","scheme":"uniform"})");
    cfg.out_dir = fresh_dir("nofiles").string();
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
    CHECK_FALSE(fs::exists(cfg.out_dir));
}

TEST_CASE("a ladder run writes the rung distances") {
    ExperimentConfig cfg = parse_config(
        R"({"fixture":"example3","steps":16,"paths":512,"beta":0.75,
            "levels":[2,4,8],"checks":[]})");
    cfg.out_dir = fresh_dir("ladder").string();
    RunArtifacts art = run_experiment(cfg);
    CHECK(art.exit_code == 0);

    nlohmann::json ladder =
        nlohmann::json::parse(slurp(fs::path(cfg.out_dir) / "ladder.json"));
    CHECK(ladder["beta"] == 0.75);
    REQUIRE(ladder["beta_distances"].size() == 2);
    REQUIRE(ladder["classd_distances"].size() == 2);
    for (const auto& d : ladder["beta_distances"]) CHECK(d.get<double>() >= 0.0);
    CHECK_FALSE(fs::exists(fs::path(cfg.out_dir) / "picard.json"));
}

TEST_CASE("command line process contract") {
    fs::path dir = fresh_dir("cli");
    fs::create_directories(dir);
    fs::path log = dir / "log.txt";

    // Config errors exit 2 before writing anything.
    CHECK(run_cli("run " + (dir / "missing.json").string(), log) == 2);
    fs::path bad = dir / "bad.json";
    std::ofstream(bad) << R"({"fixture":"nope"})";
    CHECK(run_cli("run " + bad.string(), log) == 2);
    CHECK_FALSE(fs::exists(dir / "manifest.json"));

    fs::path good = dir / "good.json";
    std::ofstream(good) << kSmallConfig;
    fs::path out_a = dir / "a";
    CHECK(run_cli("run " + good.string() + " --out " + out_a.string(), log) == 0);
    CHECK(fs::exists(out_a / "manifest.json"));
    std::string stdout_text = slurp(log);
    CHECK(stdout_text.find("check residual: pass") != std::string::npos);

    // Seed overrides flow into the manifest; the default-dir env var works.
    // (No estimate checks here: at 512 paths their Monte Carlo margins are
    // seed-sensitive, and this scenario only exercises the plumbing.)
    fs::path seeded = dir / "seeded.json";
    std::ofstream(seeded) << R"({"fixture":"zero_driver","steps":16,"paths":512,"checks":[]})";
    fs::path out_b = dir / "b";
    CHECK(run_cli("run " + seeded.string() + " --seed 7 --out " + out_b.string(), log) == 0);
    nlohmann::json mb = nlohmann::json::parse(slurp(out_b / "manifest.json"));
    CHECK(mb["seed"] == 7);
    fs::path out_env = dir / "env";
    std::string env_cmd = "BSDEX_OUT_DIR=" + out_env.string() + " " + BSDE_CLI_PATH +
                          " run " + good.string() + " > " + log.string() + " 2>&1";
    int rc = std::system(env_cmd.c_str());
    REQUIRE(rc != -1);
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(fs::exists(out_env / "manifest.json"));

    // Assumption reports: table on stdout, JSON next to it, exit contract.
    fs::path out_c = dir / "c";
    CHECK(run_cli("assumptions zero_driver --out " + out_c.string(), log) == 0);
    CHECK(slurp(log).find("all claimed properties hold") != std::string::npos);
    CHECK(fs::exists(out_c / "assumptions.json"));
    CHECK(run_cli("assumptions broken_monotone --out " + out_c.string(), log) == 1);
    CHECK(run_cli("assumptions nope", log) == 2);

    CHECK(run_cli("list-fixtures", log) == 0);
    std::string names = slurp(log);
    CHECK(names.find("zero_driver") != std::string::npos);
    CHECK(names.find("example4") != std::string::npos);
}
