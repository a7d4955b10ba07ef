#ifndef COALGENE_QUADRATURE_HPP
#define COALGENE_QUADRATURE_HPP

#include <functional>

namespace coalgene {

// Adaptive 7/15-point Gauss panel integration with recursive bisection.
// The error indicator on a panel is |G15 - G7|; panels are split until the
// indicator is below the locally apportioned tolerance. Intended for smooth
// integrands; endpoint singularities should be substituted away by the
// caller (see beta_kernel_integral).
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, int max_depth = 60);

// Integral of f(p) p^{a-1} (1-p)^{b-1} dp over (lo, hi) in [0,1], for a,b > 0.
// Endpoint singularities are removed exactly by the substitutions u = p^a on
// the left half and v = (1-p)^b on the right half.
double beta_kernel_integral(const std::function<double(double)>& f, double a,
                            double b, double lo = 0.0, double hi = 1.0,
                            double abs_tol = 1e-12);

} // namespace coalgene

#endif
