#ifndef COALGENE_COAG_MEASURES_HPP
#define COALGENE_COAG_MEASURES_HPP

#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "coalgene/linalg.hpp"
#include "coalgene/partition.hpp"
#include "coalgene/rng.hpp"

namespace coalgene {

// Finite measure Lambda on [0,1] driving simple-merger coalescents.
// Kingman is the unit mass at 0; Bolthausen-Sznitman is Beta(1,1).
struct LambdaMeasure {
    enum class Kind { Kingman, PointMasses, Beta };

    Kind kind = Kind::Kingman;
    std::vector<std::pair<double, double>> points; // (location in (0,1], weight > 0)
    double beta_a = 0.0, beta_b = 0.0;
    double total_mass = 1.0;

    static LambdaMeasure kingman();
    static LambdaMeasure point_masses(std::vector<std::pair<double, double>> pts);
    static LambdaMeasure beta(double a, double b, double mass = 1.0);

    double total() const;
};

// Finite-atomic Xi measure: weighted mass-partition atoms plus an optional
// Kingman component. Each atom must satisfy sum rho_i^2 > 0.
struct XiAtom {
    double weight;
    MassPartition rho;
};

struct XiMeasure {
    std::vector<XiAtom> atoms;
    double kingman_mass = 0.0;

    // Point-mass / Kingman Lambda measures embed exactly; Beta does not.
    static XiMeasure from_lambda(const LambdaMeasure& lambda);
};

using MeasureSpec = std::variant<LambdaMeasure, XiMeasure>;

// lambda_{n,b} = int_0^1 p^{b-2} (1-p)^{n-b} Lambda(dp), 2 <= b <= n,
// with the convention 0^0 = 1 at the endpoints. Closed forms per variant.
double lambda_rate(const LambdaMeasure& lambda, int n, int b);

// Same integral by adaptive quadrature; cross-check only.
double lambda_rate_quadrature(const LambdaMeasure& lambda, int n, int b,
                              double abs_tol = 1e-12);

// Exact probability that a paint-box directed by rho produces pi_prime.
// Non-singleton blocks occupy pairwise-distinct atoms; singleton blocks
// occupy either an unused atom or the dust interval. pi_prime.n <= 12.
double paintbox_partition_prob(const MassPartition& rho, const Partition& pi_prime);

// Coagulation rate of the increment pi_prime != singletons:
//   sum_atoms w * paintbox_prob(rho, pi_prime) / sum rho_i^2
//   + kingman_mass * [pi_prime is a single pair merger].
double xi_rate(const XiMeasure& xi, const Partition& pi_prime);

// Generator of the coalescent on all partitions of {1..n} (n <= 6). Entries
// depend on the increment only through block sizes; diagonal = -row sum.
class RateMatrix {
  public:
    static RateMatrix build(const XiMeasure& xi, int n);
    static RateMatrix build(const LambdaMeasure& lambda, int n);
    static RateMatrix build(const MeasureSpec& spec, int n);

    int n() const { return n_; }
    const std::vector<Partition>& states() const { return states_; }
    const Matrix& q() const { return q_; }
    int index_of(const Partition& p) const;

  private:
    template <typename RateFn>
    static RateMatrix build_impl(int n, RateFn&& rate_of_increment);

    int n_ = 0;
    std::vector<Partition> states_;
    std::unordered_map<std::string, int> index_;
    Matrix q_;
};

// e^{tQ}; rows renormalized to sum to 1 and entries clamped at -1e-12.
Matrix semigroup(const RateMatrix& rm, double t);

// Continuous-time Lambda-coalescent trajectory from singletons: with m
// blocks, a group of b merges at total rate C(m,b) lambda_{m,b}. Records
// (jump time, partition) pairs up to t_max.
std::vector<std::pair<double, Partition>> simulate_lambda_coalescent(
    const LambdaMeasure& lambda, int n, double t_max, RngStream& rng);

// Measure mini-language:
//   kingman | beta:a,b[,mass] | point:p1:w1[,p2:w2...] | xi:w@r1/r2/...;...[;kingman:m]
MeasureSpec parse_measure_spec(const std::string& text);
std::string measure_spec_to_string(const MeasureSpec& spec);

} // namespace coalgene

#endif
