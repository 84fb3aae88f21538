#pragma once

#include <cmath>

#include "ybl/errors.hpp"

namespace ybl {

// Surface measure |S^{m-1}| of the unit sphere in R^m.
inline double sphere_area(int m) {
    if (m < 1) throw DimensionTooSmall("sphere_area: m must be >= 1");
    return 2.0 * std::exp(0.5 * m * std::log(M_PI) - std::lgamma(0.5 * m));
}

inline double log_beta(double x, double y) {
    return std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y);
}

struct RadialIntegralSpec {
    double alpha;
    double beta;
    bool convergent() const { return beta + 1.0 > 0.0 && 2.0 * alpha > beta + 1.0; }
};

// \int_0^\infty (1+r^2)^{-alpha} r^beta dr = (1/2) B((beta+1)/2, alpha-(beta+1)/2)
inline double radial_integral(const RadialIntegralSpec& spec) {
    if (!spec.convergent())
        throw Divergent("radial_integral: need beta+1 > 0 and 2*alpha > beta+1");
    double x = 0.5 * (spec.beta + 1.0);
    return 0.5 * std::exp(log_beta(x, spec.alpha - x));
}

inline double radial_integral(double alpha, double beta) {
    return radial_integral(RadialIntegralSpec{alpha, beta});
}

// Yamabe energy of the round n-sphere: n(n-1) |S^n|^{2/n}.
inline double yamabe_constant(int n) {
    if (n < 3) throw DimensionTooSmall("yamabe_constant: n must be >= 3");
    return n * (n - 1.0) * std::pow(sphere_area(n + 1), 2.0 / n);
}

} // namespace ybl
