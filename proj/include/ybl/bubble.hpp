#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "ybl/errors.hpp"
#include "ybl/quadrature.hpp"
#include "ybl/special.hpp"

namespace ybl {

struct BubbleParams {
    int n;
    Eigen::VectorXd xi;
    double eps;
};

struct BubbleJet {
    double value;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};

// u(x) = (eps / (eps^2 + |x-xi|^2))^{(n-2)/2}, solving
// Laplacian u + n(n-2) u^{(n+2)/(n-2)} = 0.
inline BubbleJet bubble(const BubbleParams& p, const Eigen::VectorXd& x) {
    int n = p.n;
    double m = 0.5 * (n - 2);
    Eigen::VectorXd d = x - p.xi;
    double t = p.eps * p.eps + d.squaredNorm();
    double em = std::pow(p.eps, m);
    double tm1 = std::pow(t, -m - 1.0);
    BubbleJet j;
    j.value = em * std::pow(t, -m);
    j.grad = -(n - 2.0) * em * tm1 * d;
    j.hess = (n * (n - 2.0) * em * tm1 / t) * (d * d.transpose());
    j.hess.diagonal().array() -= (n - 2.0) * em * tm1;
    return j;
}

inline double bubble_value(const BubbleParams& p, const Eigen::VectorXd& x) {
    double t = p.eps * p.eps + (x - p.xi).squaredNorm();
    return std::pow(p.eps / t, 0.5 * (p.n - 2));
}

// \int u^{2n/(n-2)} = |S^{n-1}| (1/2) B(n/2, n/2), independent of (xi, eps).
inline double bubble_mass(int n) {
    if (n < 3) throw DimensionTooSmall("bubble_mass: n must be >= 3");
    return sphere_area(n) * 0.5 * std::exp(log_beta(0.5 * n, 0.5 * n));
}

inline double bubble_mass_from_yamabe(int n) {
    return std::pow(yamabe_constant(n) / (4.0 * n * (n - 1.0)), 0.5 * n);
}

// phi_0 = (eps/t)^{(n+2)/2} (eps^2 - s^2)/t,  phi_k = (eps/t)^{(n+2)/2} 2 eps (x_k - xi_k)/t.
inline double phi(const BubbleParams& p, int k, const Eigen::VectorXd& x) {
    if (k < 0 || k > p.n) throw IndexOutOfRange("phi: k must satisfy 0 <= k <= n");
    Eigen::VectorXd d = x - p.xi;
    double s2 = d.squaredNorm();
    double t = p.eps * p.eps + s2;
    double base = std::pow(p.eps / t, 0.5 * (p.n + 2));
    if (k == 0) return base * (p.eps * p.eps - s2) / t;
    return base * 2.0 * p.eps * d(k - 1) / t;
}

// L^{2n/(n+2)} norm of phi, the same for every (xi, eps) and for k = 1..n.
inline Estimate phi_norm(const BubbleParams& p, int k, long samples, std::uint64_t seed) {
    double pw = 2.0 * p.n / (p.n + 2.0);
    Estimate raw = ball_mc(
        [&](const Eigen::VectorXd& y) {
            return std::pow(std::fabs(phi(p, k, p.xi + y)), pw);
        },
        p.n, RegionSpec::full(p.n), samples, seed, Importance{p.eps, p.n + 1.0});
    Estimate out;
    out.value = std::pow(raw.value, 1.0 / pw);
    out.std_err = raw.value > 0.0 ? out.value * raw.std_err / (pw * raw.value) : 0.0;
    return out;
}

struct OmegaBounds {
    double eps2_lo;
    double eps2_hi;
};

inline OmegaBounds omega_bounds(int n) {
    if (n < 9) throw DomainEmpty("omega_bounds: interval is empty below dimension 9");
    double lo = (n - 8.0) / (3.0 * (n + 4.0));
    return OmegaBounds{lo, 2.0 * lo};
}

inline bool omega_contains(int n, const Eigen::VectorXd& xi, double eps) {
    OmegaBounds b = omega_bounds(n);
    double e2 = eps * eps;
    return xi.norm() < 1.0 && e2 > b.eps2_lo && e2 < b.eps2_hi;
}

} // namespace ybl
