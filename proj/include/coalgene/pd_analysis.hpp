#ifndef COALGENE_PD_ANALYSIS_HPP
#define COALGENE_PD_ANALYSIS_HPP

#include <cstdint>
#include <vector>

#include "coalgene/rng.hpp"
#include "coalgene/special_functions.hpp"
#include "coalgene/stats.hpp"

namespace coalgene {

// One stick-breaking path of PD(alpha, theta) size-biased picks:
// V_1 = Y_1, V_i = (1-Y_1)...(1-Y_{i-1}) Y_i with Y_i ~ Beta(1-alpha,
// theta + i alpha). Logs are primary so paths of length 1e5 neither
// underflow nor lose the martingale bookkeeping
//   S_N = mu_N + sum log(1-Y_i),  mu_N = -sum E[log(1-Y_i)].
struct StickBreakingPath {
    PDParams params;
    int N = 0;
    std::vector<double> log_y;
    std::vector<double> log_one_minus_y;
    std::vector<double> log_v; // log V_i
    std::vector<double> s;     // S_1..S_N
    std::vector<double> mu;    // mu_1..mu_N

    double v(int i) const { return std::exp(log_v[size_t(i)]); }
    double y(int i) const { return std::exp(log_y[size_t(i)]); }
};

StickBreakingPath stick_breaking(const PDParams& params, int N, RngStream& rng);

// u_N = sum_{i=1}^N i^{-gamma/alpha}, compensated summation.
double u_n(const PDParams& params, long long N);

// mu_N = psi(theta+1) - psi(theta + N alpha) + sum_{i=1}^{N-1} 1/(theta + i
// alpha); equals -sum E[log(1-Y_i)] by the Beta log-moment identity.
double mu_n(const PDParams& params, long long N);

// zeta_{N,g} = sum_i V_i^g.
double zeta(const StickBreakingPath& path, double g);

// Pathwise split zeta_{N,g} = M_bar + Sigma_sum, where M_bar is the
// integrated martingale with increments i^{1-g} e^{-g mu_{i-1}} e^{g S_{i-1}}
// (Y_i^g i^{g-1} - E[Y_i^g i^{g-1}]) and Sigma_sum collects the
// E[Y_i^g] = B(1+g-alpha, theta+i alpha)/B(1-alpha, theta+i alpha) terms.
struct MartingaleDecomposition {
    double m_bar = 0.0;
    double sigma_sum = 0.0;
};
MartingaleDecomposition martingale_decomposition(const StickBreakingPath& path,
                                                 double g);

// Monte Carlo mean of e^{g S_N}; compare against exp_gamma_s_infty.
EstimateWithError s_infty_check(const PDParams& params, int N, long long replicates,
                                uint64_t seed, int threads = 0);

// Exact E[e^{g S_N}] at finite N (product of Beta moments); test oracle and
// bias reference for s_infty_check.
double exp_gamma_s_n_exact(const PDParams& params, int N);

// Moments of V_2/(1-V_1) under PD(alpha,theta) vs the closed-form moments of
// V_1 under PD(alpha, theta+alpha).
struct ChangeOfParamReport {
    struct MomentRow {
        int order;
        EstimateWithError estimate;
        double target;
        double zscore;
    };
    std::vector<MomentRow> rows;
};
ChangeOfParamReport change_of_param_check(const PDParams& params, long long replicates,
                                          uint64_t seed, int threads = 0);

// ---- asymptotics of c_N = E[sum eta_i^2] for the power-weight model ------
//
// With s = (theta+alpha)/gamma and alpha/2 < gamma <= alpha, theta < 2 gamma
// - alpha, the size-biased first-pick integral gives
//   E[eta_1^b] * u_N^s  ->  B(s, b-s) / (gamma B(1-alpha, theta+alpha)) *
//                           E_{alpha,theta+alpha}[ W^{-s} ],
// where W = Gamma(1+gamma-alpha)/Gamma(1-alpha) K^{-gamma} e^{gamma S_inf}
// is the a.s. limit of zeta_{N,gamma}/u_N under the shifted parameters.
// Consequently c_N ~ cn_limit_constant * u_N^{-s} and the merger-size ratios
// E[eta_1^b]/E[eta_1^2] converge to those of a Beta(2-s, s) coalescent.
// These reduce to the gamma = alpha formulas of the ell route when gamma =
// alpha and theta = 0. Derivation notes are in the README.

// s = (theta + alpha) / gamma.
double cn_scale_exponent(const PDParams& params);

// The limit above; requires s < 2, i.e. theta < 2 gamma - alpha.
double cn_limit_constant(const PDParams& params);

// B(s, b-s)/B(s, 2-s): limit of E[eta_1^b]/E[eta_1^2]; equals
// lambda_{b,b}/lambda_{2,2} of the Beta(2-s, s) measure.
double limit_merger_ratio(const PDParams& params, int b);

// E[zeta_{N,gamma}/u_N] limit (K-free form):
// Gamma(1+g-a)/Gamma(1-a) * Gamma(t+1)/Gamma(t+g+1) * Gamma((t+g)/a+1)/Gamma(t/a+1).
double zeta_over_u_limit_mean(const PDParams& params);

} // namespace coalgene

#endif
