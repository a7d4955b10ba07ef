#ifndef COALGENE_SPECIAL_FUNCTIONS_HPP
#define COALGENE_SPECIAL_FUNCTIONS_HPP

#include <stdexcept>

namespace coalgene {

// Parameters of the two-parameter Poisson-Dirichlet family together with the
// power exponent used to turn size-biased picks into family frequencies.
// Constraints: 0 < alpha < 1, theta > -alpha. The window
// alpha/2 < gamma <= alpha required by the asymptotic results is enforced by
// the callers that need it, not by the type.
struct PDParams {
    double alpha;
    double theta;
    double gamma;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("PDParams: alpha must lie in (0,1)");
        if (!(theta > -alpha))
            throw std::invalid_argument("PDParams: theta must exceed -alpha");
    }
    void validate_gamma_window() const {
        validate();
        if (!(gamma > alpha / 2.0 && gamma <= alpha))
            throw std::invalid_argument(
                "PDParams: gamma out of range, need alpha/2 < gamma <= alpha");
    }
};

// log Gamma(x) for x > 0; absolute error <= 1e-12 on [1e-3, 1e6].
double log_gamma(double x);

// digamma psi(x) for x > 0; absolute error <= 1e-10, and the recurrence
// psi(x+1) = psi(x) + 1/x holds to 1e-12.
double digamma(double x);

double beta_fn(double a, double b);
double log_beta_fn(double a, double b);

// Generalized Euler-Mascheroni constant kappa_a, defined by
//   -log N + sum_{i=1}^N 1/(a+i)  ->  kappa_a      (a > -1).
// Computed as -psi(a+1); the tests validate this closed form against the
// defining partial-sum limit, which is the authoritative definition.
double em_const(double a);

// K_{alpha,theta} = exp{ psi(theta+1) + kappa_{theta/alpha} / alpha }.
// This is the constant for which e^{mu_N} ~ alpha^{-1} K N^{(1-alpha)/alpha};
// the tests pin it against that limit and against E[e^{gamma S_N}].
double k_const(const PDParams& p);

// ell_{alpha,theta,gamma}: inverse of the displayed Gamma/Beta product,
// evaluated in log space. Requires alpha/2 < gamma <= alpha and
// theta in (-alpha, alpha).
double ell_const(const PDParams& p);

// E[e^{g S_infinity}] for the stick-breaking martingale limit under
// PD(alpha, theta); finite iff g > -(theta + alpha).
double exp_gamma_s_infty(double alpha, double theta, double g);
inline double exp_gamma_s_infty(const PDParams& p) {
    return exp_gamma_s_infty(p.alpha, p.theta, p.gamma);
}

} // namespace coalgene

#endif
