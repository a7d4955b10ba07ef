#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "coalgene/coag_measures.hpp"
#include "coalgene/special_functions.hpp"

using namespace coalgene;

namespace {

Partition P(const std::string& text) { return Partition::decode(text); }

// Brute-force paint-box law: enumerate every assignment of the n indices to
// the k atoms or dust (dust points become singletons) and accumulate the
// probability of each resulting partition.
std::map<std::string, double> paintbox_law_bruteforce(const MassPartition& rho, int n) {
    const auto& w = rho.weights();
    const int k = int(w.size());
    std::map<std::string, double> law;
    std::vector<int> assign(static_cast<size_t>(n), 0);
    for (;;) {
        double prob = 1.0;
        std::vector<long long> labels(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            const int a = assign[size_t(i)];
            if (a < k) {
                prob *= w[size_t(a)];
                labels[size_t(i)] = a;
            } else {
                prob *= rho.dust();
                labels[size_t(i)] = 1000 + i; // dust: unique label
            }
        }
        if (prob > 0.0) law[Partition::from_labels(labels).encode()] += prob;
        int pos = n - 1;
        while (pos >= 0 && assign[size_t(pos)] == k) {
            assign[size_t(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++assign[size_t(pos)];
    }
    return law;
}

} // namespace

TEST_CASE("lambda_rate closed forms") {
    const auto kingman = LambdaMeasure::kingman();
    for (int n = 2; n <= 10; ++n) {
        CHECK(lambda_rate(kingman, n, 2) == 1.0);
        for (int b = 3; b <= n; ++b) CHECK(lambda_rate(kingman, n, b) == 0.0);
    }
    const auto star = LambdaMeasure::point_masses({{1.0, 1.0}});
    for (int n = 2; n <= 8; ++n) {
        CHECK(lambda_rate(star, n, n) == 1.0);
        for (int b = 2; b < n; ++b) CHECK(lambda_rate(star, n, b) == 0.0);
    }
    const auto bs = LambdaMeasure::beta(1.0, 1.0); // Bolthausen-Sznitman
    CHECK(lambda_rate(bs, 3, 2) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(lambda_rate(bs, 3, 3) == doctest::Approx(0.5).epsilon(1e-14));
    for (int b = 2; b <= 8; ++b)
        CHECK(lambda_rate(bs, b, b) == doctest::Approx(1.0 / (b - 1)).epsilon(1e-13));
    CHECK_THROWS(lambda_rate(bs, 3, 1));
    CHECK_THROWS(lambda_rate(bs, 3, 4));
}

TEST_CASE("lambda_rate agrees with adaptive quadrature for Beta measures") {
    for (auto [a, b] : {std::pair{1.0, 1.0}, {0.5, 1.5}, {2.0, 2.0}}) {
        const auto lm = LambdaMeasure::beta(a, b);
        for (int n = 2; n <= 20; ++n)
            for (int k = 2; k <= n; ++k)
                CHECK(std::fabs(lambda_rate(lm, n, k) -
                                lambda_rate_quadrature(lm, n, k)) < 1e-10);
    }
}

TEST_CASE("lambda_rate satisfies the consistency recursion") {
    const std::vector<LambdaMeasure> measures = {
        LambdaMeasure::kingman(), LambdaMeasure::beta(1.0, 1.0),
        LambdaMeasure::beta(0.5, 1.5), LambdaMeasure::beta(2.0, 2.0, 1.7),
        LambdaMeasure::point_masses({{0.3, 0.5}, {0.9, 0.2}})};
    for (const auto& lm : measures)
        for (int n = 2; n <= 20; ++n)
            for (int b = 2; b <= n; ++b)
                CHECK(std::fabs(lambda_rate(lm, n, b) - lambda_rate(lm, n + 1, b) -
                                lambda_rate(lm, n + 1, b + 1)) < 1e-10);
}

TEST_CASE("paintbox_partition_prob spot values") {
    CHECK(paintbox_partition_prob(MassPartition({1.0}), P("1,2,3,4")) == 1.0);
    const MassPartition rho({0.5, 0.3});
    CHECK(paintbox_partition_prob(rho, P("1,2")) == doctest::Approx(0.34).epsilon(1e-14));
    CHECK(paintbox_partition_prob(rho, P("1|2")) == doctest::Approx(0.66).epsilon(1e-14));
}

TEST_CASE("paintbox_partition_prob matches the brute-force oracle") {
    RngStream rng(37);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 1 + int(rng.uniform_int(3));
        std::vector<double> w(static_cast<size_t>(k));
        double sum = 0.0;
        for (auto& x : w) {
            x = rng.next_double();
            sum += x;
        }
        const double scale = rng.next_double() / std::max(sum, 1e-12);
        for (auto& x : w) x *= scale;
        std::sort(w.begin(), w.end(), std::greater<double>());
        const MassPartition rho(w);
        for (int n = 2; n <= 4; ++n) {
            const auto law = paintbox_law_bruteforce(rho, n);
            double total = 0.0;
            for (const auto& pt : enumerate_partitions(n)) {
                const double mine = paintbox_partition_prob(rho, pt);
                const auto it = law.find(pt.encode());
                const double oracle = it == law.end() ? 0.0 : it->second;
                CHECK(std::fabs(mine - oracle) < 1e-12);
                total += mine;
            }
            CHECK(std::fabs(total - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("xi_rate spot values") {
    XiMeasure one_atom{{{1.0, MassPartition({1.0})}}, 0.0};
    CHECK(xi_rate(one_atom, P("1,2,3")) == doctest::Approx(1.0));
    CHECK(xi_rate(one_atom, P("1,2|3")) == doctest::Approx(0.0));
    CHECK_THROWS(xi_rate(one_atom, Partition(3))); // rates need a proper merger

    XiMeasure kingman{{}, 1.0};
    CHECK(xi_rate(kingman, P("1,2|3")) == 1.0);
    CHECK(xi_rate(kingman, P("1,2,3")) == 0.0);

    XiMeasure half{{{2.0, MassPartition({0.5, 0.5})}}, 0.0};
    CHECK(xi_rate(half, P("1,2|3,4")) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("xi_rate is invariant under relabeling the increment") {
    XiMeasure xi{{{1.5, MassPartition({0.4, 0.2})}, {0.7, MassPartition({0.6, 0.1})}},
                 0.3};
    for (int n = 2; n <= 4; ++n) {
        std::map<std::vector<int>, double> by_shape;
        for (const auto& pt : enumerate_partitions(n)) {
            if (pt.is_singletons()) continue;
            const double rate = xi_rate(xi, pt);
            const auto shape = block_sizes_desc(pt);
            const auto it = by_shape.find(shape);
            if (it == by_shape.end())
                by_shape.emplace(shape, rate);
            else
                CHECK(rate == doctest::Approx(it->second).epsilon(1e-12));
        }
    }
}

TEST_CASE("rate matrix for Kingman on three blocks") {
    const auto rm = RateMatrix::build(LambdaMeasure::kingman(), 3);
    const int i0 = rm.index_of(Partition(3));
    CHECK(rm.q()(i0, i0) == doctest::Approx(-3.0).epsilon(1e-12));
    for (const auto& pair : {P("1,2|3"), P("1,3|2"), P("1|2,3")})
        CHECK(rm.q()(i0, rm.index_of(pair)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rm.q()(i0, rm.index_of(P("1,2,3"))) == doctest::Approx(0.0));
}

TEST_CASE("rate matrix for Bolthausen-Sznitman on three blocks") {
    const auto rm = RateMatrix::build(LambdaMeasure::beta(1.0, 1.0), 3);
    const int i0 = rm.index_of(Partition(3));
    CHECK(rm.q()(i0, rm.index_of(P("1,2|3"))) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rm.q()(i0, rm.index_of(P("1,2,3"))) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rm.q()(i0, i0) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("rate matrices have zero row sums") {
    for (int n = 2; n <= 5; ++n) {
        const auto rm = RateMatrix::build(LambdaMeasure::beta(0.7, 1.3, 2.0), n);
        for (int r = 0; r < rm.q().rows(); ++r)
            CHECK(std::fabs(rm.q().row_sum(r)) < 1e-10);
    }
    XiMeasure xi{{{1.0, MassPartition({0.5, 0.25})}}, 0.5};
    const auto rm = RateMatrix::build(xi, 4);
    for (int r = 0; r < rm.q().rows(); ++r)
        CHECK(std::fabs(rm.q().row_sum(r)) < 1e-10);
}

TEST_CASE("a point-mass Lambda equals its one-atom Xi embedding") {
    const auto lm = LambdaMeasure::point_masses({{0.37, 1.3}});
    const auto xi = XiMeasure::from_lambda(lm);
    for (int n = 2; n <= 4; ++n) {
        const auto a = RateMatrix::build(lm, n);
        const auto b = RateMatrix::build(xi, n);
        CHECK(max_abs_diff(a.q(), b.q()) < 1e-10);
    }
    CHECK_THROWS(XiMeasure::from_lambda(LambdaMeasure::beta(2.0, 2.0)));
}

TEST_CASE("semigroup at t = 0 is the identity") {
    const auto rm = RateMatrix::build(LambdaMeasure::beta(1.0, 1.0), 4);
    CHECK(max_abs_diff(semigroup(rm, 0.0), Matrix::identity(rm.q().rows())) < 1e-14);
}

TEST_CASE("semigroup of the two-state chain is 1 - e^{-t}") {
    const auto rm = RateMatrix::build(LambdaMeasure::kingman(), 2);
    const int i0 = rm.index_of(Partition(2));
    const int i1 = rm.index_of(P("1,2"));
    for (double t : {0.1, 0.5, 1.0, 3.0}) {
        const Matrix p = semigroup(rm, t);
        CHECK(p(i0, i1) == doctest::Approx(1.0 - std::exp(-t)).epsilon(1e-10));
        CHECK(p(i1, i1) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("semigroup satisfies Chapman-Kolmogorov and row normalization") {
    const auto rm = RateMatrix::build(LambdaMeasure::beta(1.0, 1.0), 4);
    const Matrix ps = semigroup(rm, 0.4);
    const Matrix pt = semigroup(rm, 0.7);
    const Matrix pst = semigroup(rm, 1.1);
    CHECK(max_abs_diff(ps * pt, pst) < 1e-8);
    for (int r = 0; r < pst.rows(); ++r)
        CHECK(std::fabs(pst.row_sum(r) - 1.0) < 1e-9);
}

TEST_CASE("coalescent oracle: Kingman pair merges at unit rate") {
    RngStream rng(101);
    const auto lm = LambdaMeasure::kingman();
    const int reps = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < reps; ++i) {
        const auto traj = simulate_lambda_coalescent(lm, 2, 1e9, rng);
        REQUIRE(traj.size() == 2);
        sum += traj[1].first;
        sumsq += traj[1].first * traj[1].first;
    }
    const double mean = sum / reps;
    const double sd = std::sqrt(sumsq / reps - mean * mean);
    CHECK(std::fabs(mean - 1.0) < 3.0 * sd / std::sqrt(double(reps)));
}

TEST_CASE("coalescent oracle: total merger at a unit point mass at 1") {
    RngStream rng(102);
    const auto lm = LambdaMeasure::point_masses({{1.0, 1.0}});
    for (int i = 0; i < 200; ++i) {
        const auto traj = simulate_lambda_coalescent(lm, 7, 1e9, rng);
        REQUIRE(traj.size() == 2);
        CHECK(traj[1].second.block_count() == 1);
    }
}

TEST_CASE("coalescent oracle: Bolthausen-Sznitman first-event split") {
    RngStream rng(103);
    const auto lm = LambdaMeasure::beta(1.0, 1.0);
    const int reps = 100000;
    int triple = 0;
    for (int i = 0; i < reps; ++i) {
        const auto traj = simulate_lambda_coalescent(lm, 3, 1e9, rng);
        if (traj[1].second.block_count() == 1) ++triple;
    }
    const double p = 0.25; // (1/2) / (3*1/2 + 1/2)
    CHECK(std::fabs(triple / double(reps) - p) < 3.0 * std::sqrt(p * (1 - p) / reps));
}

TEST_CASE("coalescent oracle marginals match the semigroup") {
    const auto lm = LambdaMeasure::beta(1.0, 1.0);
    const auto rm = RateMatrix::build(lm, 3);
    const int reps = 100000;
    for (double t : {0.5, 1.0, 2.0}) {
        RngStream rng(104 + int(10 * t));
        std::map<std::string, int> counts;
        for (int i = 0; i < reps; ++i) {
            const auto traj = simulate_lambda_coalescent(lm, 3, t, rng);
            ++counts[traj.back().second.encode()];
        }
        const Matrix p = semigroup(rm, t);
        const int i0 = rm.index_of(Partition(3));
        for (const auto& pt : rm.states()) {
            const double target = p(i0, rm.index_of(pt));
            const double est =
                counts.count(pt.encode()) ? counts[pt.encode()] / double(reps) : 0.0;
            const double se = std::sqrt(std::max(target * (1 - target), 1e-9) / reps);
            CHECK(std::fabs(est - target) < 4.0 * se);
        }
    }
}

TEST_CASE("measure spec mini-language") {
    CHECK(std::holds_alternative<LambdaMeasure>(parse_measure_spec("kingman")));
    const auto beta = parse_measure_spec("beta:1,1");
    CHECK(std::get<LambdaMeasure>(beta).kind == LambdaMeasure::Kind::Beta);
    const auto pts = parse_measure_spec("point:0.5:1,0.9:0.2");
    CHECK(std::get<LambdaMeasure>(pts).points.size() == 2);
    const auto xi = parse_measure_spec("xi:2@0.5/0.5;kingman:0.3");
    CHECK(std::get<XiMeasure>(xi).atoms.size() == 1);
    CHECK(std::get<XiMeasure>(xi).kingman_mass == doctest::Approx(0.3));
    CHECK_THROWS(parse_measure_spec("nope"));
    CHECK_THROWS(parse_measure_spec("beta:1"));
    CHECK_THROWS(parse_measure_spec("point:0.5"));
    // round trips through the printer
    for (const char* s : {"kingman", "beta:1,1,1", "point:0.5:1", "xi:2@0.5/0.5"}) {
        const auto spec = parse_measure_spec(s);
        const auto again = parse_measure_spec(measure_spec_to_string(spec));
        CHECK(measure_spec_to_string(again) == measure_spec_to_string(spec));
    }
}
