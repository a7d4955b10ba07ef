#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "coalgene/commands.hpp"
#include "coalgene/config.hpp"
#include "coalgene/io_util.hpp"

using namespace coalgene;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string tmp_path(const std::string& name) {
    return std::string("cli_test_out/") + name;
}

} // namespace

TEST_CASE("a minimal config parses and echoes canonically") {
    const std::string text = R"({
      "model": {"kind": "pd_power", "alpha": 0.8, "theta": 0.0, "gamma": 0.5},
      "limit": {"measure": "kingman"},
      "run": {"N": 100, "n": 3, "replicates": 500, "seed": 7}
    })";
    const RunConfig cfg = parse_config(text);
    REQUIRE(cfg.model.has_value());
    CHECK(model_kind_name(*cfg.model) == "pd_power");
    CHECK(cfg.n_list == std::vector<int>{100});
    CHECK(cfg.sample_n == 3);
    CHECK(*cfg.seed == 7);
    const std::string canon = cfg.canonical_json();
    CHECK(parse_config("{}").replicates == 10000); // defaults apply
    CHECK(canon.find("pd_power") != std::string::npos);
    // canonical form parses again
    CHECK(parse_config(canon).sample_n == 3);
}

TEST_CASE("range violations carry the offending path and the rule") {
    const std::string text = R"({
      "model": {"kind": "pd_power", "alpha": 0.5, "theta": 0.0, "gamma": 0.2}
    })";
    try {
        parse_config(text);
        FAIL("expected a range error");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("model/gamma") != std::string::npos);
        CHECK(msg.find("alpha/2 < gamma <= alpha") != std::string::npos);
    }
}

TEST_CASE("unknown keys are rejected with their path") {
    try {
        parse_config(R"({"run": {"N": 10, "bogus": 1}})");
        FAIL("expected an unknown-key error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("run/bogus") != std::string::npos);
    }
    CHECK_THROWS(parse_config(R"({"rnu": {}})"));
    CHECK_THROWS(parse_config("not json"));
}

TEST_CASE("stochastic commands demand a seed") {
    RunConfig cfg = parse_config(R"({
      "model": {"kind": "pd_power", "alpha": 0.8, "theta": 0.0, "gamma": 0.6},
      "run": {"N": 20, "n": 2, "replicates": 10, "horizon": 5}
    })");
    CHECK_THROWS_WITH_AS(cmd_simulate(cfg, 1),
                         doctest::Contains("seed is mandatory"),
                         std::invalid_argument);
    cfg.seed = 1;
    cfg.out_path = tmp_path("sim.csv");
    CHECK(cmd_simulate(cfg, 1) == 0);
    const std::string csv = slurp(*cfg.out_path);
    CHECK(csv.rfind("replicate,generation,n_blocks,partition\n", 0) == 0);
}

TEST_CASE("constants command writes valid JSON with the four constants") {
    const std::string path = tmp_path("constants.json");
    CHECK(cmd_constants(0.8, 0.0, 0.5, path) == 0);
    const std::string text = slurp(path);
    for (const char* key :
         {"kappa_theta_over_alpha", "\"K\"", "\"ell\"", "exp_gamma_s_infty"})
        CHECK(text.find(key) != std::string::npos);
    CHECK_THROWS(cmd_constants(0.5, 0.0, 0.2, std::nullopt)); // gamma window
}

TEST_CASE("rates command emits the documented CSV") {
    const std::string path = tmp_path("rates.csv");
    CHECK(cmd_rates("beta:1,1", 4, path) == 0);
    const std::string csv = slurp(path);
    CHECK(csv.rfind("n_blocks,b,rate\n", 0) == 0);
    CHECK(csv.find("3,3,0.5\n") != std::string::npos);
    const std::string path2 = tmp_path("rates_xi.csv");
    CHECK(cmd_rates("xi:1@0.5/0.5", 3, path2) == 0);
    CHECK(slurp(path2).rfind("pi_prime,rate\n", 0) == 0);
}

TEST_CASE("outputs are byte-identical across reruns and worker counts") {
    const std::string cfg_text = R"({
      "model": {"kind": "pd_power", "alpha": 0.7, "theta": 0.1, "gamma": 0.6},
      "run": {"N_list": [50, 100], "n": 2, "replicates": 3000, "seed": 99}
    })";
    std::string outs[3];
    const int threads[3] = {1, 4, 8};
    for (int i = 0; i < 3; ++i) {
        RunConfig cfg = parse_config(cfg_text);
        cfg.out_path = tmp_path("cn_" + std::to_string(threads[i]) + ".csv");
        REQUIRE(cmd_estimate_cn(cfg, threads[i]) == 0);
        outs[i] = slurp(*cfg.out_path);
    }
    CHECK(outs[0] == outs[1]);
    CHECK(outs[1] == outs[2]);

    // rerun with identical config and seed: identical bytes again
    RunConfig cfg = parse_config(cfg_text);
    cfg.out_path = tmp_path("cn_rerun.csv");
    REQUIRE(cmd_estimate_cn(cfg, 2) == 0);
    CHECK(slurp(*cfg.out_path) == outs[0]);
}

TEST_CASE("check reports are deterministic and exit by verdict") {
    const std::string cfg_text = R"({
      "model": {"kind": "explicit", "weights": [0.5, 0.3, 0.2]},
      "run": {"N": 10, "n": 3, "replicates": 300, "seed": 5, "rho_infty": [0.5, 0.3, 0.2]}
    })";
    RunConfig cfg = parse_config(cfg_text);
    cfg.out_path = tmp_path("report_a.json");
    CHECK(cmd_check("discrete-limit", cfg, 1) == 0);
    RunConfig cfg2 = parse_config(cfg_text);
    cfg2.out_path = tmp_path("report_b.json");
    CHECK(cmd_check("discrete-limit", cfg2, 4) == 0);
    CHECK(slurp(*cfg.out_path) == slurp(*cfg2.out_path));
    CHECK(slurp(*cfg.out_path).find("\"verdict\": \"pass\"") != std::string::npos);
}

TEST_CASE("a failing check returns exit code 2") {
    // frozen first frequency can never satisfy the Kingman-limit rates
    std::ostringstream cfg_text;
    cfg_text << R"({"model": {"kind": "explicit", "weights": [0.5)";
    for (int i = 1; i < 500; ++i) cfg_text << "," << 0.5 / 499.0;
    cfg_text << R"(]}, "limit": {"measure": "kingman"},
                   "run": {"N_list": [500], "replicates": 300, "seed": 6, "b_list": [2,3]}})";
    RunConfig cfg = parse_config(cfg_text.str());
    cfg.out_path = tmp_path("report_fail.json");
    CHECK(cmd_check("lambda-criterion", cfg, 1) == 2);
}

TEST_CASE("plotdata emits per-N rows") {
    const std::string cfg_text = R"({
      "model": {"kind": "eldon_wakeley", "measure": "beta:2,2", "epsilon": 0.5},
      "run": {"N_list": [100, 200], "n": 2, "replicates": 400, "seed": 8}
    })";
    RunConfig cfg = parse_config(cfg_text);
    cfg.out_path = tmp_path("plot.csv");
    (void)cmd_plotdata("replacement", cfg, 1);
    const std::string csv = slurp(*cfg.out_path);
    CHECK(csv.rfind("N,quantity,estimate,stderr,target\n", 0) == 0);
    CHECK(csv.find("\n100,") != std::string::npos);
    CHECK(csv.find("\n200,") != std::string::npos);
}

TEST_CASE("pd battery emits target and z-score columns") {
    const std::string path = tmp_path("pd.csv");
    CHECK(cmd_pd(0.5, 0.0, 0.5, 200, 2000, 3, path, 2) == 0);
    const std::string csv = slurp(path);
    CHECK(csv.rfind("quantity,estimate,stderr,target,zscore\n", 0) == 0);
    CHECK(csv.find("exp_gamma_sN") != std::string::npos);
    CHECK(csv.find("decomposition_residual") != std::string::npos);
}
