#include "coalgene/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace coalgene {
namespace {

const double kX7[7] = {
    -9.49107912342758486e-01, -7.41531185599394460e-01, -4.05845151377397184e-01,
    0.0,                      4.05845151377397184e-01,  7.41531185599394460e-01,
    9.49107912342758486e-01};
const double kW7[7] = {
    1.29484966168870647e-01, 2.79705391489276589e-01, 3.81830050505118312e-01,
    4.17959183673468959e-01, 3.81830050505118312e-01, 2.79705391489276589e-01,
    1.29484966168870647e-01};
const double kX15[15] = {
    -9.87992518020485377e-01, -9.37273392400705951e-01, -8.48206583410427206e-01,
    -7.24417731360170070e-01, -5.70972172608538830e-01, -3.94151347077563385e-01,
    -2.01194093997434514e-01, 0.0,                      2.01194093997434514e-01,
    3.94151347077563385e-01,  5.70972172608538830e-01,  7.24417731360170070e-01,
    8.48206583410427206e-01,  9.37273392400705951e-01,  9.87992518020485377e-01};
const double kW15[15] = {
    3.07532419961186465e-02, 7.03660474881080689e-02, 1.07159220467171773e-01,
    1.39570677926153908e-01, 1.66269205816993781e-01, 1.86161000015561878e-01,
    1.98431485327111246e-01, 2.02578241925560898e-01, 1.98431485327111246e-01,
    1.86161000015561878e-01, 1.66269205816993781e-01, 1.39570677926153908e-01,
    1.07159220467171773e-01, 7.03660474881080689e-02, 3.07532419961186465e-02};

struct PanelResult {
    double g15;
    double err;
};

PanelResult panel(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double g7 = 0.0, g15 = 0.0;
    for (int i = 0; i < 7; ++i) g7 += kW7[i] * f(c + h * kX7[i]);
    for (int i = 0; i < 15; ++i) g15 += kW15[i] * f(c + h * kX15[i]);
    g7 *= h;
    g15 *= h;
    return {g15, std::fabs(g15 - g7)};
}

double adapt(const std::function<double(double)>& f, double a, double b,
             double tol, int depth) {
    const PanelResult r = panel(f, a, b);
    if (r.err <= tol || depth <= 0) return r.g15;
    const double c = 0.5 * (a + b);
    return adapt(f, a, c, 0.5 * tol, depth - 1) +
           adapt(f, c, b, 0.5 * tol, depth - 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, int max_depth) {
    if (!(abs_tol > 0.0)) throw std::invalid_argument("integrate: abs_tol must be > 0");
    if (a == b) return 0.0;
    return adapt(f, a, b, abs_tol, max_depth);
}

double beta_kernel_integral(const std::function<double(double)>& f, double a,
                            double b, double lo, double hi, double abs_tol) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("beta_kernel_integral: kernel exponents must be > 0");
    if (!(0.0 <= lo && lo <= hi && hi <= 1.0))
        throw std::invalid_argument("beta_kernel_integral: bad interval");
    const double mid = 0.5;
    double total = 0.0;
    // left part, substitute u = p^a:  p^{a-1} dp = du / a
    const double l0 = lo, l1 = std::min(hi, mid);
    if (l1 > l0) {
        auto g = [&](double u) {
            const double p = std::pow(u, 1.0 / a);
            return f(p) * std::pow(1.0 - p, b - 1.0) / a;
        };
        total += integrate(g, std::pow(l0, a), std::pow(l1, a), abs_tol / 2);
    }
    // right part, substitute v = (1-p)^b:  (1-p)^{b-1} dp = dv / b
    const double r0 = std::max(lo, mid), r1 = hi;
    if (r1 > r0) {
        auto g = [&](double v) {
            const double p = 1.0 - std::pow(v, 1.0 / b);
            return f(p) * std::pow(p, a - 1.0) / b;
        };
        total += integrate(g, std::pow(1.0 - r1, b), std::pow(1.0 - r0, b), abs_tol / 2);
    }
    return total;
}

} // namespace coalgene
