#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "coalgene/diagnostics.hpp"
#include "coalgene/pd_analysis.hpp"

using namespace coalgene;

namespace {

const CheckRow& find_row(const CheckReport& report, const std::string& prefix) {
    for (const auto& row : report.rows)
        if (row.quantity.rfind(prefix, 0) == 0) return row;
    FAIL("row not found: ", prefix);
    throw std::runtime_error("unreachable");
}

bool has_note(const CheckReport& report, const std::string& needle) {
    for (const auto& note : report.notes)
        if (note.find(needle) != std::string::npos) return true;
    return false;
}

} // namespace

TEST_CASE("semigroup check is exact at t = 0") {
    const int N = 50;
    const ModelSpec model =
        ExplicitSpec{std::vector<double>(size_t(N), 1.0 / N), std::nullopt};
    const auto report = check_semigroup(model, MeasureSpec{LambdaMeasure::kingman()},
                                        N, 3, {0.0}, 1000, 1);
    CHECK(report.verdict == Verdict::Pass);
    CHECK(find_row(report, "max_abs_diff_vs_semigroup_t=0").estimate == 0.0);
}

TEST_CASE("semigroup check: degenerate one-parent model matches the discrete chain") {
    const ModelSpec model = ExplicitSpec{std::vector<double>{1.0}, std::nullopt};
    XiMeasure xi{{{1.0, MassPartition({1.0})}}, 0.0};
    const auto report =
        check_semigroup(model, MeasureSpec{xi}, 10, 3, {1.0}, 200, 2);
    // c_N = 1: the discrete-regime target is exact, the continuous one is not
    CHECK(find_row(report, "max_abs_diff_vs_discrete_chain_t=1").estimate < 1e-9);
    CHECK(find_row(report, "max_abs_diff_vs_semigroup_t=1").estimate > 0.1);
}

TEST_CASE("semigroup check: uniform weights approach the Kingman limit") {
    const int N = 200;
    const ModelSpec model =
        ExplicitSpec{std::vector<double>(size_t(N), 1.0 / N), std::nullopt};
    const auto report = check_semigroup(model, MeasureSpec{LambdaMeasure::kingman()},
                                        N, 3, {1.0}, 1000, 3, 0, false, 0.02);
    CHECK(report.verdict == Verdict::Pass);
    CHECK(find_row(report, "max_abs_diff_vs_semigroup_t=1").estimate < 0.02);
}

namespace {

// eta_1 frozen at 1/2 with the remaining mass spread uniformly
std::vector<double> frozen_half_weights(int n) {
    std::vector<double> w(static_cast<size_t>(n), 0.5 / double(n - 1));
    w[0] = 0.5;
    return w;
}

} // namespace

TEST_CASE("lambda criterion: a frozen first frequency hits point-mass rates") {
    const ModelSpec model = ExplicitSpec{frozen_half_weights(2000), std::nullopt};
    const auto report = check_lambda_criterion(
        model, LambdaMeasure::point_masses({{0.5, 1.0}}), {2000}, 4, 2000, 4);
    // E[eta_1^b]/c_N = 0.5^{b-2} up to the O(1/N) tail mass
    CHECK(report.verdict == Verdict::Pass);
    CHECK(find_row(report, "ratio_b=3_N=2000").estimate ==
          doctest::Approx(0.5).epsilon(0.01));
    CHECK(find_row(report, "ratio_b=4_N=2000").estimate ==
          doctest::Approx(0.25).epsilon(0.01));
}

TEST_CASE("lambda criterion: negative control fails against Kingman") {
    const ModelSpec model = ExplicitSpec{frozen_half_weights(2000), std::nullopt};
    const auto report = check_lambda_criterion(model, LambdaMeasure::kingman(),
                                               {2000}, 3, 500, 5);
    CHECK(report.verdict == Verdict::Fail);
}

TEST_CASE("kingman criterion: uniform weights pass, a frozen frequency fails") {
    {
        // Wright-Fisher weights via a bottleneck spec with no bottlenecks
        BottleneckSpec wf;
        wf.f_atoms = {};
        wf.a_exp = 0.5;
        const auto report =
            check_kingman_criterion(ModelSpec{wf}, {100, 1000}, 3.0, 2000, 6);
        CHECK(report.verdict == Verdict::Pass);
    }
    {
        const ModelSpec model = ExplicitSpec{frozen_half_weights(2000), std::nullopt};
        const auto report = check_kingman_criterion(model, {2000}, 3.0, 500, 7);
        CHECK(report.verdict == Verdict::Fail);
        CHECK(find_row(report, "first_beta_over_cN_N=2000").estimate > 0.2);
    }
}

TEST_CASE("shape functionals: degenerate weights give unit ratios") {
    const ModelSpec model = ExplicitSpec{std::vector<double>{1.0}, std::nullopt};
    XiMeasure xi{{{1.0, MassPartition({1.0})}}, 0.0};
    const auto report = check_xi_functionals(model, MeasureSpec{xi}, {20}, {{2}, {3}},
                                             200, 8);
    CHECK(report.verdict == Verdict::Pass);
    CHECK(find_row(report, "phi(2)_over_cN_N=20").estimate == doctest::Approx(1.0));
    CHECK(find_row(report, "phi(3)_over_cN_N=20").estimate == doctest::Approx(1.0));
}

TEST_CASE("shape functionals: the pair shape is the definitional ratio 1") {
    const ModelSpec model = PDPowerSpec{{0.7, 0.0, 0.6}};
    const auto report =
        check_xi_functionals(model, std::nullopt, {200}, {{2}}, 1000, 9);
    CHECK(find_row(report, "phi(2)_over_cN_N=200").estimate ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("shape functionals: simultaneous pair-pair shape dies out") {
    const ModelSpec model = PDPowerSpec{{0.8, 0.0, 0.5}};
    const auto report = check_xi_functionals(
        model, MeasureSpec{LambdaMeasure::beta(0.4, 1.6)}, {200, 2000}, {{2, 2}},
        4000, 10);
    const auto& trend = find_row(report, "trend(2,2)_last_over_first");
    CHECK(trend.estimate < 1.0);
}

TEST_CASE("replacement equivalence: all-ones offspring") {
    const ModelSpec model =
        ExplicitSpec{std::nullopt, std::vector<long long>{1, 1, 1, 1, 1, 1, 1, 1}};
    const auto report = check_replacement_equivalence(model, {8}, 2, 200, 11);
    // discrepancy = 1/N, E[1/sigma] = 1/N: their ratio is exactly 1
    CHECK(find_row(report, "discrepancy_over_E_inv_sigma_N=8").estimate ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(has_note(report, "degenerate"));
}

TEST_CASE("replacement equivalence: replacement model passes across N") {
    const ModelSpec ew = EldonWakeleySpec{LambdaMeasure::beta(2.0, 2.0), 0.5};
    const auto report = check_replacement_equivalence(ew, {100, 1000}, 2, 4000, 12);
    CHECK(report.verdict == Verdict::Pass);
    const auto& ratio = find_row(report, "cN_over_cNtilde_N=1000");
    CHECK(std::fabs(ratio.estimate - 1.0) < 0.1);
    CHECK(find_row(report, "bound_constant_max_over_min").estimate < 2.0);
}

TEST_CASE("bottleneck regimes") {
    BottleneckSpec bn;
    bn.f_atoms = {{2, 1.0}};
    bn.a_exp = 0.5;
    bn.b_exp = 0.25;
    SUBCASE("rare bottlenecks dominate at the a_N scale") {
        const auto report = check_bottleneck_regimes(
            bn, BottleneckRegime::RareBottleneck, std::nullopt, {2500, 10000}, 2,
            1000, 13);
        CHECK(report.verdict == Verdict::Pass);
        const auto& row = find_row(report, "scaled_rate[1,2]_N=10000");
        CHECK(row.target == doctest::Approx(0.5)); // F(2) * sum (1/2)^2
        CHECK(std::fabs(row.estimate - 0.5) < 0.05);
    }
    SUBCASE("no bottlenecks reduce to the base model exactly") {
        BottleneckSpec none = bn;
        none.f_atoms = {};
        const auto report = check_bottleneck_regimes(
            none, BottleneckRegime::FrequentBase,
            MeasureSpec{LambdaMeasure::kingman()}, {500}, 2, 1000, 14);
        CHECK(report.verdict == Verdict::Pass);
        CHECK(find_row(report, "scaled_rate[1,2]_N=500").estimate ==
              doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("balanced regime adds the two coagulation matrices") {
        BottleneckSpec bal = bn;
        bal.a_exp = 1.0; // a_N = N so c_hat a_N stays near 1
        const auto report = check_bottleneck_regimes(
            bal, BottleneckRegime::Balanced, MeasureSpec{LambdaMeasure::kingman()},
            {2000}, 2, 1000, 15);
        const auto& row = find_row(report, "scaled_rate[1,2]_N=2000");
        // target: F(2)/2 + (c_base a_N = 1) * kingman pair rate 1
        CHECK(row.target == doctest::Approx(1.5).epsilon(1e-6));
        CHECK(report.verdict == Verdict::Pass);
    }
    SUBCASE("violated smallness conditions yield indeterminate") {
        BottleneckSpec bad = bn;
        bad.a_exp = 0.05;
        const auto report = check_bottleneck_regimes(
            bad, BottleneckRegime::RareBottleneck, std::nullopt, {100}, 2, 200, 16);
        CHECK(report.verdict == Verdict::Indeterminate);
    }
}

TEST_CASE("pd theorem check: the ell-route scaling fails below gamma = alpha") {
    const PDParams p{0.8, 0.0, 0.5};
    const auto report = check_pd_theorem(p, {1000, 3000}, 2000, 17);
    CHECK(report.verdict == Verdict::Fail);
    // the integral-route note is present and names the supported family
    CHECK(has_note(report, "integral-route"));
    // informational rows carry the corrected exponent
    bool has_corrected = false;
    for (const auto& row : report.rows)
        if (row.quantity.rfind("cN_x_uN_pow_s", 0) == 0) has_corrected = true;
    CHECK(has_corrected);
}

TEST_CASE("pd theorem check: Kingman regime boundedness") {
    const PDParams p{0.8, 0.96, 0.8}; // theta = 1.2 alpha
    const auto report = check_pd_theorem(p, {1000, 4000}, 3000, 18);
    CHECK(report.verdict == Verdict::Pass);
    const auto& ratio = find_row(report, "boundedness_ratio_1000_to_4000");
    CHECK(ratio.estimate > 0.5);
    CHECK(ratio.estimate < 2.0);
}

TEST_CASE("em theorem check: candidates coincide at kappa = 1, beta = 2") {
    const auto report = check_em_theorem(2.0, 1.0, {1000, 4000}, 3000, 19);
    CHECK(has_note(report, "coincide"));
    CHECK(has_note(report, "supports"));
    const auto& fin = find_row(report, "cN_x_sum_i^-kappa_vs_supported_final");
    CHECK(std::fabs(fin.estimate - fin.target) < 0.15 * fin.target);
    CHECK(report.verdict == Verdict::Pass);
}

TEST_CASE("em equivalence: direct sampler matches the PD representation") {
    const auto report = check_em_equivalence(2.0, 1.0, 50, 500, 2000, 20);
    CHECK(report.verdict == Verdict::Pass);
    for (const auto& row : report.rows) CHECK(std::fabs(row.zscore) < 4.0);
}

TEST_CASE("discrete limit: explicit weights equal their own paint-box law") {
    const ModelSpec model =
        ExplicitSpec{std::vector<double>{0.5, 0.3, 0.2}, std::nullopt};
    const auto report = check_discrete_limit(model, MassPartition({0.5, 0.3, 0.2}),
                                             10, 3, 200, 21);
    CHECK(report.verdict == Verdict::Pass);
    for (const auto& row : report.rows) CHECK(row.zscore == 0.0);
}

TEST_CASE("discrete limit: hypergeometric gap of the two-block offspring model") {
    const int N = 100;
    const ModelSpec model =
        ExplicitSpec{std::nullopt, std::vector<long long>{N / 2, N / 2}};
    const auto report = check_discrete_limit(model, MassPartition({0.5, 0.5}),
                                             N, 2, 200, 22);
    const auto& row = find_row(report, "P[1,2]");
    CHECK(row.target == doctest::Approx(0.5));
    CHECK(std::fabs(row.estimate - row.target) <= 1.0 / double(N - 1));
}

TEST_CASE("reports serialize to schema-shaped JSON") {
    const ModelSpec model = ExplicitSpec{std::vector<double>{1.0}, std::nullopt};
    XiMeasure xi{{{1.0, MassPartition({1.0})}}, 0.0};
    const auto report =
        check_xi_functionals(model, MeasureSpec{xi}, {20}, {{2}}, 100, 23);
    const std::string text = report.to_json();
    CHECK(text.find("\"name\"") != std::string::npos);
    CHECK(text.find("\"rows\"") != std::string::npos);
    CHECK(text.find("\"verdict\"") != std::string::npos);
    CHECK(text.find("\"quantity\"") != std::string::npos);
    CHECK(text.find("\"zscore\"") != std::string::npos);
}
