#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "coalgene/partition.hpp"

using namespace coalgene;

namespace {

Partition P(const std::string& text) { return Partition::decode(text); }

// relabel a partition through a permutation of {1..n} (0-based sigma)
Partition relabel(const Partition& p, const std::vector<int>& sigma) {
    std::vector<std::vector<int>> blocks;
    for (const auto& b : p.blocks()) {
        std::vector<int> nb;
        for (int e : b) nb.push_back(sigma[size_t(e)]);
        blocks.push_back(std::move(nb));
    }
    return Partition::from_blocks(p.n(), std::move(blocks));
}

} // namespace

TEST_CASE("singleton partition and invariants") {
    const Partition p(4);
    CHECK(p.n() == 4);
    CHECK(p.block_count() == 4);
    CHECK(p.is_singletons());
    CHECK(p.encode() == "1|2|3|4");
}

TEST_CASE("from_blocks validates and orders by least element") {
    const Partition p = Partition::from_blocks(4, {{2}, {0, 3}, {1}});
    CHECK(p.encode() == "1,4|2|3");
    CHECK(p.block_of(3) == 0);
    CHECK_THROWS(Partition::from_blocks(3, {{0, 1}}));          // missing 3
    CHECK_THROWS(Partition::from_blocks(3, {{0, 1}, {1, 2}}));  // duplicate
    CHECK_THROWS(Partition::from_blocks(3, {{0, 1, 2}, {}}));   // empty block
}

TEST_CASE("coagulation: singleton pi reproduces pi_prime") {
    const Partition id4(4);
    const Partition pp = P("1,3|2|4");
    CHECK(coagulate(id4, pp) == pp);
}

TEST_CASE("coagulation: singleton pi_prime is the identity") {
    const Partition pi = P("1,2|3|4");
    CHECK(coagulate(pi, Partition(3)) == pi);
}

TEST_CASE("coagulation merges blocks by pi_prime's groups") {
    // blocks {1,2},{3},{4}; group blocks (1,3) and (2)
    CHECK(coagulate(P("1,2|3|4"), P("1,3|2")) == P("1,2,4|3"));
}

TEST_CASE("coagulation rejects inadmissible pairs") {
    CHECK_THROWS(coagulate(P("1|2|3"), Partition(2))); // |pi| = 3 > 2
}

TEST_CASE("coagulation keeps n and the block count of non-empty unions") {
    const auto p4 = enumerate_partitions(4);
    for (const auto& pi : p4) {
        for (const auto& pp : enumerate_partitions(pi.block_count())) {
            const Partition out = coagulate(pi, pp);
            CHECK(out.n() == pi.n());
            CHECK(out.block_count() == pp.block_count());
        }
    }
}

TEST_CASE("restriction") {
    CHECK(restrict_to(P("1,3|2,4"), 2) == P("1|2"));
    CHECK(restrict_to(Partition(6), 3) == Partition(3));
    CHECK(restrict_to(P("1,2,4|3"), 3) == P("1,2|3"));
    CHECK_THROWS(restrict_to(P("1|2"), 3));
}

TEST_CASE("restriction commutes with coagulation on the partition lattice") {
    // Coag(pi, pp)|_m = Coag(pi|_m, pp|_{|pi|_m|}); brute force over n <= 4
    for (int n = 2; n <= 4; ++n) {
        for (const auto& pi : enumerate_partitions(n)) {
            for (const auto& pp : enumerate_partitions(pi.block_count())) {
                for (int m = 1; m <= n; ++m) {
                    const Partition lhs = restrict_to(coagulate(pi, pp), m);
                    const Partition pim = restrict_to(pi, m);
                    const Partition ppm = restrict_to(pp, pim.block_count());
                    CHECK(lhs == coagulate(pim, ppm));
                }
            }
        }
    }
}

TEST_CASE("block sizes in non-increasing order") {
    CHECK(block_sizes_desc(Partition(5)) == std::vector<int>{1, 1, 1, 1, 1});
    CHECK(block_sizes_desc(P("1,2,4|3")) == std::vector<int>{3, 1});
    CHECK(block_sizes_desc(P("1,4|2,5|3")) == std::vector<int>{2, 2, 1});
}

TEST_CASE("group_by_parent") {
    const std::vector<long long> a{7, 7, 7};
    CHECK(group_by_parent(a) == P("1,2,3"));
    const std::vector<long long> b{1, 2, 3};
    CHECK(group_by_parent(b) == Partition(3));
    const std::vector<long long> c{5, 2, 5, 9};
    CHECK(group_by_parent(c) == P("1,3|2|4"));
}

TEST_CASE("enumerate_partitions counts Bell numbers") {
    CHECK(enumerate_partitions(1).size() == 1);
    CHECK(enumerate_partitions(3).size() == 5);
    CHECK(enumerate_partitions(5).size() == 52);
    CHECK(enumerate_partitions(7).size() == 877);
    CHECK(bell_number(6) == 203);
    CHECK_THROWS(enumerate_partitions(8));
    // all enumerated partitions are distinct and valid
    const auto p4 = enumerate_partitions(4);
    for (size_t i = 0; i < p4.size(); ++i)
        for (size_t j = i + 1; j < p4.size(); ++j) CHECK(p4[i] != p4[j]);
}

TEST_CASE("encode/decode round trip") {
    RngStream rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + int(rng.uniform_int(7));
        std::vector<long long> labels(static_cast<size_t>(n));
        for (auto& l : labels) l = (long long)rng.uniform_int(4);
        const Partition p = Partition::from_labels(labels);
        CHECK(Partition::decode(p.encode()) == p);
    }
    CHECK_THROWS(Partition::decode(""));
    CHECK_THROWS(Partition::decode("1,x|2"));
}

TEST_CASE("mass partition validation") {
    CHECK_THROWS(MassPartition({0.3, 0.5}));        // not sorted
    CHECK_THROWS(MassPartition({0.8, 0.3}));        // sum > 1
    CHECK_THROWS(MassPartition({-0.1}));            // negative
    const MassPartition ok({0.5, 0.3});
    CHECK(ok.dust() == doctest::Approx(0.2));
    CHECK(ok.sum_sq() == doctest::Approx(0.34));
    const MassPartition all({1.0});
    CHECK(all.dust() == 0.0);
}

TEST_CASE("paintbox: single atom of mass 1 gives one block") {
    RngStream rng(1);
    const MassPartition rho({1.0});
    for (int i = 0; i < 50; ++i)
        CHECK(paintbox_sample(rho, 6, rng).block_count() == 1);
}

TEST_CASE("paintbox: pure dust gives singletons") {
    RngStream rng(2);
    const MassPartition rho(std::vector<double>{});
    for (int i = 0; i < 50; ++i)
        CHECK(paintbox_sample(rho, 5, rng).is_singletons());
}

TEST_CASE("paintbox pair-merge probability equals sum of squared weights") {
    RngStream rng(17);
    const MassPartition rho({0.5, 0.5});
    const int n = 1000000;
    int merged = 0;
    for (int i = 0; i < n; ++i)
        if (paintbox_sample(rho, 2, rng).block_count() == 1) ++merged;
    const double p = 0.5; // 0.25 + 0.25
    CHECK(std::fabs(merged / double(n) - p) < 3.0 * std::sqrt(p * (1 - p) / n));

    RngStream rng2(18);
    const MassPartition rho2({0.4, 0.2, 0.1});
    const double p2 = 0.16 + 0.04 + 0.01;
    int merged2 = 0;
    for (int i = 0; i < n; ++i)
        if (paintbox_sample(rho2, 2, rng2).block_count() == 1) ++merged2;
    CHECK(std::fabs(merged2 / double(n) - p2) < 3.0 * std::sqrt(p2 * (1 - p2) / n));
}

TEST_CASE("paintbox exchangeability under relabeling") {
    RngStream rng(23);
    const MassPartition rho({0.4, 0.3, 0.2});
    const std::vector<int> sigma{1, 2, 3, 0};
    const int reps = 100000;
    std::map<std::string, int> freq, freq_rel;
    for (int i = 0; i < reps; ++i) {
        const Partition p = paintbox_sample(rho, 4, rng);
        ++freq[p.encode()];
        ++freq_rel[relabel(p, sigma).encode()];
    }
    for (const auto& [key, count] : freq) {
        const double p = count / double(reps);
        const double q = freq_rel.count(key) ? freq_rel[key] / double(reps) : 0.0;
        const double se = std::sqrt(2.0 * std::max(p, 1e-9) * (1 - p) / reps);
        CHECK(std::fabs(p - q) < 4.0 * std::max(se, 1e-4));
    }
}
