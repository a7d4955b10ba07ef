#include "coalgene/special_functions.hpp"

#include <cmath>

namespace coalgene {

double log_gamma(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("log_gamma: x must be > 0");
    return std::lgamma(x);
}

double digamma(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("digamma: x must be > 0");
    // Shift into the asymptotic region, then the standard expansion
    // psi(x) ~ log x - 1/(2x) - sum B_{2k}/(2k x^{2k}).
    double acc = 0.0;
    while (x < 10.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series = std::log(x) - 0.5 * inv;
    // B_2/2, B_4/4, ... over x^{2k}
    static const double coef[] = {
        1.0 / 12.0,    -1.0 / 120.0,    1.0 / 252.0,    -1.0 / 240.0,
        1.0 / 132.0,   -691.0 / 32760.0, 1.0 / 12.0,
    };
    double p = inv2;
    for (double c : coef) {
        series -= c * p;
        p *= inv2;
    }
    return acc + series;
}

double log_beta_fn(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("beta_fn: arguments must be > 0");
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double beta_fn(double a, double b) { return std::exp(log_beta_fn(a, b)); }

double em_const(double a) {
    if (!(a > -1.0)) throw std::invalid_argument("em_const: a must exceed -1");
    return -digamma(a + 1.0);
}

double k_const(const PDParams& p) {
    p.validate();
    return std::exp(digamma(p.theta + 1.0) + em_const(p.theta / p.alpha) / p.alpha);
}

double ell_const(const PDParams& p) {
    p.validate_gamma_window();
    const double a = p.alpha, t = p.theta, g = p.gamma;
    if (!(t > -a && t < a))
        throw std::invalid_argument("ell_const: theta must lie in (-alpha, alpha)");
    const double x = t / a;
    // log of ell^{-1}, term by term
    double log_inv = std::log(a / g);
    log_inv += x * log_gamma(1.0 - a) - (1.0 + x) * log_gamma(1.0 + g - a);
    log_inv += log_gamma((a + t) / a * (1.0 - g / a) + 1.0) -
               log_gamma((a + t) * (1.0 - g / a) + 1.0);
    log_inv += log_gamma(1.0 + t) + log_gamma(1.0 - x) - log_beta_fn(1.0 - x, 1.0 + x);
    return std::exp(-log_inv);
}

double exp_gamma_s_infty(double alpha, double theta, double g) {
    PDParams{alpha, theta, g}.validate();
    if (!(g > -(theta + alpha)))
        throw std::invalid_argument(
            "exp_gamma_s_infty: need g > -(theta+alpha) for L1 convergence");
    PDParams p{alpha, theta, g};
    const double logk = std::log(k_const(p));
    const double lv = g * logk + log_gamma(theta + 1.0) - log_gamma(theta + g + 1.0) +
                      log_gamma((theta + g) / alpha + 1.0) -
                      log_gamma(theta / alpha + 1.0);
    return std::exp(lv);
}

} // namespace coalgene
