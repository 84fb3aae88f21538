#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "ybl/errors.hpp"
#include "ybl/rng.hpp"
#include "ybl/special.hpp"

namespace ybl {

struct Estimate {
    double value = 0.0;
    double std_err = 0.0;
    long samples = 0;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod quadrature

namespace detail {

// 7-15 Gauss-Kronrod pair on [a, b].
template <class F>
double gk15(const F& f, double a, double b, double& err) {
    static const double nw[8][3] = {
        {0.000000000000000, 0.417959183673469, 0.209482141084728},
        {0.405845151377397, 0.381830050505119, 0.190350578064785},
        {0.741531185599394, 0.279705391489277, 0.140653259715525},
        {0.949107912342759, 0.129484966168870, 0.063092092629979},
        {0.207784955007898, 0.0, 0.204432940075298},
        {0.586087235467691, 0.0, 0.169004726639267},
        {0.864864423359769, 0.0, 0.104790010322250},
        {0.991455371120813, 0.0, 0.022935322010529}};

    double x0 = 0.5 * (a + b);
    double m = b - x0;
    double y0 = f(x0);
    double g7 = nw[0][1] * y0;
    double k15 = nw[0][2] * y0;
    for (int i = 1; i < 8; ++i) {
        double mx = m * nw[i][0];
        double yi = f(x0 + mx) + f(x0 - mx);
        g7 += nw[i][1] * yi;
        k15 += nw[i][2] * yi;
    }
    g7 *= m;
    k15 *= m;
    err = 200.0 * std::fabs(g7 - k15);
    err *= std::sqrt(err);
    return k15;
}

} // namespace detail

template <class F>
double adaptive_quad(const F& f, double a, double b, double tol) {
    constexpr int kMaxIntervals = 4000;
    std::vector<std::pair<double, double>> stack;
    stack.reserve(64);
    stack.emplace_back(a, b);
    double sum = 0.0;
    int used = 1;
    while (!stack.empty()) {
        auto [ai, bi] = stack.back();
        stack.pop_back();
        double err;
        double s = detail::gk15(f, ai, bi, err);
        if (err < tol * std::fabs(s) || err < tol * 1e-3 || bi - ai < 1e-14) {
            sum += s;
            continue;
        }
        if (used + 2 > kMaxIntervals)
            throw ToleranceNotMet("adaptive_quad: interval budget exhausted");
        double mid = 0.5 * (ai + bi);
        stack.emplace_back(ai, mid);
        stack.emplace_back(mid, bi);
        used += 2;
    }
    return sum;
}

// \int_0^\infty f(r) dr via the substitution r = t/(1-t). The transformed
// integrand is rescaled by its sampled peak so the adaptive tolerance acts
// relatively even when the values are many orders below 1.
template <class F>
double radial_quad(const F& f, double tol = 1e-12) {
    auto g = [&f](double t) {
        double om = 1.0 - t;
        return f(t / om) / (om * om);
    };
    double scale = 0.0;
    for (int i = 0; i < 64; ++i) {
        double v = std::fabs(g((i + 0.5) / 64.0));
        if (std::isfinite(v)) scale = std::max(scale, v);
    }
    if (scale == 0.0 || !std::isfinite(scale)) return adaptive_quad(g, 0.0, 1.0, tol);
    return scale * adaptive_quad([&](double t) { return g(t) / scale; }, 0.0, 1.0, tol);
}

// ---------------------------------------------------------------------------
// Monte-Carlo on spheres

// Iterates sample blocks in order, generating unit directions as normalized
// Gaussian vectors (columns of Theta), and hands each block to the visitor.
template <class Visit>
void sphere_blocks_visit(int n, long samples, std::uint64_t seed, Visit&& v) {
    Eigen::MatrixXd theta(n, kBlockSize);
    long nb = num_blocks(samples);
    for (long b = 0; b < nb; ++b) {
        long m = block_sample_count(samples, b);
        if (m <= 0) continue;
        BlockRng rng(seed, static_cast<std::uint64_t>(b));
        for (long j = 0; j < m; ++j) {
            for (int i = 0; i < n; ++i) theta(i, j) = rng.gaussian();
            theta.col(j).normalize();
        }
        v(theta, m);
    }
}

// \int_{\partial B_r} f, with f evaluated at points of norm r.
template <class F>
Estimate sphere_mc(F&& f, int n, double r, long samples, std::uint64_t seed) {
    Moments m;
    Eigen::VectorXd x(n);
    sphere_blocks_visit(n, samples, seed, [&](const Eigen::MatrixXd& theta, long cnt) {
        Moments part;
        for (long j = 0; j < cnt; ++j) {
            x = r * theta.col(j);
            part.add(f(x));
        }
        m.merge(part);
    });
    double scale = sphere_area(n) * std::pow(r, n - 1);
    return Estimate{m.mean() * scale, m.mean_std_err() * scale, m.count, seed};
}

// Estimates several surface integrals over S^{n-1} sharing one sample stream.
// eval fills Y (K x cnt) with per-sample base values; combo row c of A gives
// the integrand sum_k A(c,k) Y(k, sample).
template <class Eval>
std::vector<Estimate> sphere_mc_combos(int n, int K, const Eigen::MatrixXd& A, long samples,
                                       std::uint64_t seed, Eval&& eval) {
    long nc = A.rows();
    std::vector<Moments> mom(static_cast<size_t>(nc));
    Eigen::MatrixXd Y;
    sphere_blocks_visit(n, samples, seed, [&](const Eigen::MatrixXd& theta, long cnt) {
        Y.resize(K, cnt);
        eval(theta.leftCols(cnt), Y);
        for (long c = 0; c < nc; ++c) {
            Moments part;
            for (long j = 0; j < cnt; ++j) part.add(A.row(c).dot(Y.col(j)));
            mom[c].merge(part);
        }
    });
    double scale = sphere_area(n);
    std::vector<Estimate> out;
    out.reserve(static_cast<size_t>(nc));
    for (long c = 0; c < nc; ++c)
        out.push_back(Estimate{mom[c].mean() * scale, mom[c].mean_std_err() * scale,
                               mom[c].count, seed});
    return out;
}

// ---------------------------------------------------------------------------
// Monte-Carlo on balls, annuli, and all of R^n

struct RegionSpec {
    enum Kind { sphere_radius_r, ball_radius_r, annulus, full_space_radial_split } kind;
    int n;
    double r0 = 0.0;
    double r1 = 0.0;

    static RegionSpec ball(int n, double r) { return RegionSpec{ball_radius_r, n, 0.0, r}; }
    static RegionSpec shell(int n, double a, double b) { return RegionSpec{annulus, n, a, b}; }
    static RegionSpec full(int n) {
        return RegionSpec{full_space_radial_split, n, 0.0,
                          std::numeric_limits<double>::infinity()};
    }
    double lo() const { return kind == annulus ? r0 : 0.0; }
    double hi() const {
        return kind == full_space_radial_split ? std::numeric_limits<double>::infinity() : r1;
    }
};

// Radial importance density proportional to (lambda + r)^{-gamma} on [lo, hi].
struct Importance {
    double lambda = 1.0;
    double gamma = 0.0;
};

namespace detail {

struct RadialSampler {
    double lo, hi, lambda, gamma;
    double c_lo, c_hi;  // (lambda+r)^{1-gamma} at the ends (gamma != 1)
    double Z;

    RadialSampler(const RegionSpec& region, const Importance& imp)
        : lo(region.lo()), hi(region.hi()), lambda(imp.lambda), gamma(imp.gamma) {
        bool infinite = !std::isfinite(hi);
        if (lambda < 0.0) throw BadDensity("importance: lambda must be >= 0");
        if (infinite && gamma <= 1.0)
            throw BadDensity("importance: gamma must exceed 1 on an unbounded region");
        if (lambda + lo <= 0.0 && gamma >= 1.0)
            throw BadDensity("importance: density not integrable at r = lo");
        if (gamma == 1.0) {
            Z = std::log((lambda + hi) / (lambda + lo));
        } else {
            c_lo = std::pow(lambda + lo, 1.0 - gamma);
            c_hi = infinite ? 0.0 : std::pow(lambda + hi, 1.0 - gamma);
            Z = (c_hi - c_lo) / (1.0 - gamma);
        }
        if (!(Z > 0.0) || !std::isfinite(Z))
            throw BadDensity("importance: density not normalizable on region");
    }

    double draw(double u) const {
        if (gamma == 1.0) return (lambda + lo) * std::exp(u * Z) - lambda;
        double c = c_lo + u * (c_hi - c_lo);
        return std::pow(c, 1.0 / (1.0 - gamma)) - lambda;
    }

    double pdf(double r) const { return std::pow(lambda + r, -gamma) / Z; }
};

} // namespace detail

// \int_region f(x) dx. Direction uniform on S^{n-1}; radius drawn from the
// importance density; weight f(x) r^{n-1} |S^{n-1}| / pdf(r).
template <class F>
Estimate ball_mc(F&& f, int n, const RegionSpec& region, long samples, std::uint64_t seed,
                 const Importance& imp = Importance{}) {
    if (region.kind == RegionSpec::annulus && region.r0 > region.r1)
        throw std::invalid_argument("ball_mc: annulus requires r0 <= r1");
    if (region.kind == RegionSpec::annulus && region.r0 == region.r1)
        return Estimate{0.0, 0.0, samples, seed};
    detail::RadialSampler rs(region, imp);
    double area = sphere_area(n);
    Eigen::VectorXd x(n);
    Moments m = run_blocks(seed, samples, [&](BlockRng& rng) {
        for (int i = 0; i < n; ++i) x(i) = rng.gaussian();
        x.normalize();
        double r = rs.draw(rng.uniform());
        x *= r;
        return f(x) * std::pow(r, n - 1) * area / rs.pdf(r);
    });
    return Estimate{m.mean(), m.mean_std_err(), m.count, seed};
}

// Integral of f(r) P(x/|x|) r^{n-1} over radius x direction: radial factor by
// adaptive quadrature, spherical factor by Monte-Carlo at r = 1. The reported
// standard error comes from the spherical factor alone.
template <class Fr, class P>
Estimate product_integrate(Fr&& radial, P&& spherical, int n, double tol, long samples,
                           std::uint64_t seed) {
    double ir = radial_quad([&](double r) { return radial(r) * std::pow(r, n - 1); }, tol);
    Estimate s = sphere_mc(spherical, n, 1.0, samples, seed);
    return Estimate{ir * s.value, std::fabs(ir) * s.std_err, s.samples, seed};
}

} // namespace ybl
