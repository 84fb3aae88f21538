#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ybl/errors.hpp"
#include "ybl/quadrature.hpp"
#include "ybl/rational.hpp"
#include "ybl/special.hpp"
#include "ybl/tensor4.hpp"

namespace ybl {

// ---------------------------------------------------------------------------
// Radial recurrences

struct RecurrenceRatios {
    double lower_alpha;  // \int (1+r^2)^{1-a} r^b  vs  (2a-2)/(2a-b-3) \int (1+r^2)^{-a} r^b
    double raise_beta;   // \int (1+r^2)^{-a} r^{b+2}  vs  (b+1)/(2a-b-3) \int (1+r^2)^{-a} r^b
};

inline RecurrenceRatios radial_recurrences_check(double alpha, double beta) {
    if (!(2.0 * alpha - 2.0 > beta + 1.0 && beta + 1.0 > 0.0))
        throw Divergent("radial_recurrences_check: need 2*alpha - 2 > beta + 1 > 0");
    double base = radial_integral(alpha, beta);
    RecurrenceRatios out;
    out.lower_alpha = radial_integral(alpha - 1.0, beta) /
                      ((2.0 * alpha - 2.0) / (2.0 * alpha - beta - 3.0) * base);
    out.raise_beta = radial_integral(alpha, beta + 2.0) /
                     ((beta + 1.0) / (2.0 * alpha - beta - 3.0) * base);
    return out;
}

// ---------------------------------------------------------------------------
// Sphere moments

namespace detail {

inline double delta_matchings(const std::vector<int>& idx) {
    if (idx.empty()) return 1.0;
    // Pair idx[0] with each other element, recurse on the rest.
    double total = 0.0;
    for (size_t j = 1; j < idx.size(); ++j) {
        if (idx[0] != idx[j]) continue;
        std::vector<int> rest;
        rest.reserve(idx.size() - 2);
        for (size_t k = 1; k < idx.size(); ++k)
            if (k != j) rest.push_back(idx[k]);
        total += delta_matchings(rest);
    }
    return total;
}

} // namespace detail

// \int_{S^{n-1}} x_{i1} ... x_{id} for d <= 6 (0-based indices).
inline double sphere_moment(int n, const std::vector<int>& indices) {
    size_t d = indices.size();
    if (d > 6) throw UnsupportedDegree("sphere_moment: degree must be <= 6");
    if (d % 2 == 1) return 0.0;
    double div = 1.0;
    for (size_t k = 0; k < d; k += 2) div *= n + static_cast<double>(k);
    return sphere_area(n) / div * detail::delta_matchings(indices);
}

// ---------------------------------------------------------------------------
// Sphere integrals of polynomials by Laplacian reduction

struct Polynomial {
    struct Mono {
        std::vector<int> exps;  // length n
        double coeff;
    };
    int n = 0;
    std::vector<Mono> terms;
};

namespace detail {

// Returns the exact rational q with \int_{S^{n-1}} x^e = q |S^{n-1}|,
// via \int p = (1/(d(n+d-2))) \int (Laplacian p) applied recursively.
inline Rat monomial_reduction(int n, std::vector<int>& e) {
    long d = 0;
    for (int v : e) d += v;
    if (d == 0) return Rat(1);
    Rat acc(0);
    for (size_t i = 0; i < e.size(); ++i) {
        if (e[i] < 2) continue;
        long c = static_cast<long>(e[i]) * (e[i] - 1);
        e[i] -= 2;
        acc = acc + Rat(c) * monomial_reduction(n, e);
        e[i] += 2;
    }
    return acc / Rat(d * (n + d - 2));
}

} // namespace detail

inline double homogeneous_sphere_integral(const Polynomial& p) {
    double area = sphere_area(p.n);
    double total = 0.0;
    for (const auto& t : p.terms) {
        std::vector<int> e = t.exps;
        total += t.coeff * detail::monomial_reduction(p.n, e).to_double() * area;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Surface-integral identities for the quadratic fields

struct WeylScalars {
    Eigen::MatrixXd M;
    double norm;  // sum (W_{ijkl} + W_{ilkj})^2
};

inline WeylScalars make_weyl_scalars(const WeylForm& W) {
    WeylScalars s;
    s.M = M_matrix(W);
    s.norm = s.M.trace();
    return s;
}

enum class IdentityKind { grad_H, H_sq, grad_Hbar, grad_Hbar_total, Hbar_pair };

// Closed forms for \int_{\partial B_r} of: sum (dH)^2 x_p x_q, sum H^2 x_p x_q,
// sum (dHbar)^2 x_p x_q, sum (dHbar)^2, and sum Hbar_{pl} Hbar_{ql}.
inline double identity_rhs(IdentityKind kind, int n, const WeylScalars& s, double r, int p,
                           int q) {
    double area = sphere_area(n);
    double M = s.M(p, q);
    double del = p == q ? 1.0 : 0.0;
    double nn2 = n * (n + 2.0);
    switch (kind) {
        case IdentityKind::grad_H:
            return area / nn2 * (2.0 * M + s.norm * del) * std::pow(r, n + 3);
        case IdentityKind::H_sq:
            return area / (nn2 * (n + 4.0)) * (2.0 * M + 0.5 * s.norm * del) *
                   std::pow(r, n + 5);
        case IdentityKind::grad_Hbar: {
            double bm = std::pow(r, n + 3) - 2.0 * (n + 8.0) / (n + 4.0) * std::pow(r, n + 5) +
                        (n + 16.0) / (n + 4.0) * std::pow(r, n + 7);
            double bd = std::pow(r, n + 3) - 2.0 * (n + 6.0) / (n + 4.0) * std::pow(r, n + 5) +
                        (n + 10.0) / (n + 4.0) * std::pow(r, n + 7);
            return area / nn2 * (2.0 * M * bm + s.norm * del * bd);
        }
        case IdentityKind::grad_Hbar_total: {
            double b = std::pow(r, n + 1) - 2.0 * (n + 4.0) / (n + 2.0) * std::pow(r, n + 3) +
                       (n + 8.0) / (n + 2.0) * std::pow(r, n + 5);
            return area / n * s.norm * b;
        }
        case IdentityKind::Hbar_pair: {
            double om = 1.0 - r * r;
            return area / (2.0 * nn2) * M * std::pow(r, n + 3) * om * om;
        }
    }
    throw UnknownKind("identity_rhs: unknown kind");
}

inline double identity_rhs(IdentityKind kind, const WeylForm& W, double r, int p, int q) {
    return identity_rhs(kind, W.n, make_weyl_scalars(W), r, p, q);
}

// ---------------------------------------------------------------------------
// The reduced energy F(0, eps) and its critical point

inline Rat discriminant_rat(int n) {
    if (n < 11) throw DimensionTooSmall("discriminant: requires n >= 11");
    return Rat(9) - Rat(8) * Rat(n + 8) * Rat(n - 8) / (Rat(n + 4) * Rat(n - 10));
}

inline double discriminant(int n) { return discriminant_rat(n).to_double(); }

inline double eps_star(int n) {
    Rat D = discriminant_rat(n);
    if (D.sign() < 0)
        throw NoRealCriticalPoint("eps_star: discriminant is negative at this dimension");
    double t = 2.0 * (n - 8.0) / ((n + 4.0) * (3.0 + std::sqrt(D.to_double())));
    return std::sqrt(t);
}

// Prefactor K with F(0,eps) = -K * B(eps), B(eps) = a eps^4 - 2 eps^6 + b eps^8.
inline double f0_prefactor(int n, double weyl_norm) {
    if (n < 11) throw DimensionTooSmall("F0: closed form requires n >= 11");
    double J = radial_integral(n - 2.0, n + 3.0);
    return (n - 2.0) * (n + 4.0) / (16.0 * n * (n - 1.0) * (n + 2.0)) * sphere_area(n) *
           weyl_norm * J;
}

inline double f0_bracket(int n, double eps) {
    double a = (n - 8.0) / (n + 4.0);
    double b = (n + 8.0) / (n - 10.0);
    double e2 = eps * eps;
    double e4 = e2 * e2;
    return e4 * (a - 2.0 * e2 + b * e4);
}

inline double f0_bracket_d1(int n, double eps) {
    double a = (n - 8.0) / (n + 4.0);
    double b = (n + 8.0) / (n - 10.0);
    double e2 = eps * eps;
    return eps * e2 * (4.0 * a - 12.0 * e2 + 8.0 * b * e2 * e2);
}

inline double f0_bracket_d2(int n, double eps) {
    double a = (n - 8.0) / (n + 4.0);
    double b = (n + 8.0) / (n - 10.0);
    double e2 = eps * eps;
    return e2 * (12.0 * a - 60.0 * e2 + 56.0 * b * e2 * e2);
}

inline double F0(int n, const WeylForm& W, double eps) {
    return -f0_prefactor(n, weyl_quadratic_norm(W)) * f0_bracket(n, eps);
}

inline double dF0_deps(int n, const WeylForm& W, double eps) {
    return -f0_prefactor(n, weyl_quadratic_norm(W)) * f0_bracket_d1(n, eps);
}

inline double d2F0_deps2(int n, const WeylForm& W, double eps) {
    return -f0_prefactor(n, weyl_quadratic_norm(W)) * f0_bracket_d2(n, eps);
}

// ---------------------------------------------------------------------------
// Hessian in the center variable at (0, eps)

inline double hessian_bracket1(int n, double eps) {
    double e2 = eps * eps;
    return e2 * e2 * (1.0 - 1.5 * (n + 6.0) / (n - 8.0) * e2);
}

inline double hessian_bracket2(int n, double eps) {
    double e2 = eps * eps;
    return e2 * e2 * (1.0 - (n + 7.0) / (n - 8.0) * e2);
}

inline double hessian_c1(int n) {
    if (n < 9) throw DimensionTooSmall("hessian: requires n >= 9");
    return 4.0 * (n - 2.0) * (n - 2.0) * sphere_area(n) / (n * (n + 2.0) * (n + 4.0));
}

inline double hessian_radial(int n) { return radial_integral(n, n + 5.0); }

inline Eigen::MatrixXd hessian_xi_closed(int n, const WeylScalars& s, double eps) {
    double c1 = hessian_c1(n);
    double I = hessian_radial(n);
    Eigen::MatrixXd h = c1 * hessian_bracket1(n, eps) * I * s.M;
    h.diagonal().array() += 0.25 * c1 * s.norm * hessian_bracket2(n, eps) * I;
    return h;
}

inline Eigen::MatrixXd hessian_xi_closed(int n, const WeylForm& W, double eps) {
    return hessian_xi_closed(n, make_weyl_scalars(W), eps);
}

struct OracleConfig {
    long samples = 100000;
    std::uint64_t seed = 42;
    double tol = 1e-10;
    double max_entry_std_err = std::numeric_limits<double>::infinity();
};

struct MatrixEstimate {
    Eigen::MatrixXd value;
    Eigen::MatrixXd std_err;
    long samples = 0;
    std::uint64_t seed = 0;
};

// Integral representation of the center Hessian: three full-space integrals,
// each split into an adaptive radial factor and a Monte-Carlo spherical
// factor sharing one direction stream.
inline MatrixEstimate hessian_xi_integral(int n, const WeylForm& W, double eps,
                                          const OracleConfig& cfg) {
    if (n < 9) throw DimensionTooSmall("hessian_xi_integral: requires n >= 9");
    double en2 = std::pow(eps, n - 2);
    auto w0 = [&](double r) { return en2 * std::pow(eps * eps + r * r, -n); };
    auto w1 = [&](double r) { return en2 * std::pow(eps * eps + r * r, 1.0 - n); };
    auto om2 = [](double r) { double v = 1.0 - r * r; return v * v; };
    double R1 = radial_quad([&](double r) { return w0(r) * om2(r) * std::pow(r, n + 3); }, cfg.tol);
    double R3 = radial_quad([&](double r) { return w0(r) * (2.0 - 3.0 * r * r) * std::pow(r, n + 5); }, cfg.tol);
    double R4 = radial_quad([&](double r) { return w1(r) * om2(r) * std::pow(r, n + 1); }, cfg.tol);
    double R5 = radial_quad([&](double r) { return w1(r) * (2.0 - 3.0 * r * r) * std::pow(r, n + 3); }, cfg.tol);

    WeylField field(W);
    double nm2sq = (n - 2.0) * (n - 2.0);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(n, n);
    long count = 0;
    WeylField::BatchOut out;
    sphere_blocks_visit(n, cfg.samples, cfg.seed, [&](const Eigen::MatrixXd& theta, long m) {
        out.q1.resize(0);
        field.eval_batch(theta.leftCols(m), out, true);
        for (long j = 0; j < m; ++j) {
            double q1 = out.q1(j);
            double q2 = out.q2(j);
            double sxx = -0.25 * (R1 * q1 - 4.0 * R3 * q2);
            double sdd = (R4 * q1 - 4.0 * R5 * q2) / (8.0 * (n - 1.0));
            for (int p = 0; p < n; ++p)
                for (int q = 0; q < n; ++q) {
                    double y = nm2sq * (R1 * out.hsq(static_cast<long>(q) * n + p, j) +
                                        sxx * theta(p, j) * theta(q, j) + (p == q ? sdd : 0.0));
                    sum(p, q) += y;
                    sumsq(p, q) += y * y;
                }
        }
        count += m;
    });
    double area = sphere_area(n);
    MatrixEstimate est;
    est.value = area / count * sum;
    est.std_err.resize(n, n);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            double var = (sumsq(p, q) - sum(p, q) * sum(p, q) / count) / (count - 1);
            est.std_err(p, q) = area * std::sqrt(std::max(0.0, var) / count);
        }
    est.samples = count;
    est.seed = cfg.seed;
    if (est.std_err.maxCoeff() > cfg.max_entry_std_err)
        throw OracleBudgetExceeded("hessian_xi_integral: entry standard error above target");
    return est;
}

// ---------------------------------------------------------------------------
// Certification of the strict local minimum

struct CriticalPointReport {
    int n = 0;
    double discriminant = 0.0;
    std::optional<double> eps_star;
    double F_at_star = 0.0;
    double d2F_deps2 = 0.0;
    double bracket1 = 0.0;
    double bracket2 = 0.0;
    double hessian_eigen_min = 0.0;
    bool in_omega = false;
    bool certified_min = false;
    bool sharp_threshold_inequality = false;  // 6/(n+4) < sqrt(D), checked exactly
};

namespace detail {

// Sign of (t_* - c) where t_* = eps_*^2 = 2a / ((3 + sqrt(D))), a = (n-8)/(n+4),
// decided in exact arithmetic: t_* < c iff 2a/c - 3 < sqrt(D).
inline int cmp_tstar(int n, const Rat& c, const Rat& D) {
    Rat a = Rat(n - 8) / Rat(n + 4);
    Rat L = Rat(2) * a / c - Rat(3);
    if (L.sign() < 0) return -1;
    Rat L2 = L * L;
    if (L2 < D) return -1;
    if (L2 > D) return 1;
    return 0;
}

} // namespace detail

// Populates the report for one dimension. The exact-arithmetic part decides
// every sign; the floating-point fields are for display and the eigenvalue
// check. With no Weyl form supplied the scalar invariants are normalized to
// sum (W+W)^2 = 1 and the reported eigenvalue is the guaranteed lower bound
// c2 * bracket2 * I coming from positive semidefiniteness of M.
inline CriticalPointReport certify_dimension(int n, const WeylScalars* scalars) {
    CriticalPointReport rep;
    rep.n = n;
    Rat D = discriminant_rat(n);
    rep.discriminant = D.to_double();
    if (D.sign() < 0) return rep;

    double es = eps_star(n);
    rep.eps_star = es;
    double norm = scalars ? scalars->norm : 1.0;
    rep.F_at_star = -f0_prefactor(n, norm) * f0_bracket(n, es);
    rep.d2F_deps2 = -f0_prefactor(n, norm) * f0_bracket_d2(n, es);
    rep.bracket1 = hessian_bracket1(n, es);
    rep.bracket2 = hessian_bracket2(n, es);

    // Exact positivity: bracket_i > 0 iff t_* below the respective root.
    bool b1 = detail::cmp_tstar(n, Rat(2) * Rat(n - 8) / (Rat(3) * Rat(n + 6)), D) < 0;
    bool b2 = detail::cmp_tstar(n, Rat(n - 8) / Rat(n + 7), D) < 0;
    // Omega interval: a/3 < t_* < 2a/3.
    Rat a = Rat(n - 8) / Rat(n + 4);
    bool in_om = detail::cmp_tstar(n, a / Rat(3), D) > 0 &&
                 detail::cmp_tstar(n, Rat(2) * a / Rat(3), D) < 0;
    rep.in_omega = in_om;
    // F(0, eps_*) < 0 iff t_* < a (B(eps_*) = t^2 (a - t)/2 > 0).
    bool fneg = detail::cmp_tstar(n, a, D) < 0;
    // d2F > 0 iff B''(eps_*) = 8 t (3t - 2a) < 0 iff t < 2a/3, same as the
    // upper Omega bound.
    bool d2pos = detail::cmp_tstar(n, Rat(2) * a / Rat(3), D) < 0;

    Rat six = Rat(6) / Rat(n + 4);
    rep.sharp_threshold_inequality = six * six < D;

    double I = hessian_radial(n);
    double c1 = hessian_c1(n);
    if (scalars) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian_xi_closed(n, *scalars, es));
        rep.hessian_eigen_min = eig.eigenvalues().minCoeff();
    } else {
        rep.hessian_eigen_min = 0.25 * c1 * rep.bracket2 * I;
    }
    rep.certified_min = D.sign() > 0 && b1 && b2 && in_om && fneg && d2pos && norm > 0.0 &&
                        rep.hessian_eigen_min > 0.0;
    return rep;
}

inline CriticalPointReport certify_minimum(int n, const WeylForm& W) {
    WeylScalars s = make_weyl_scalars(W);
    if (!(s.norm > 0.0))
        throw std::invalid_argument("certify_minimum: Weyl form has zero quadratic norm");
    return certify_dimension(n, &s);
}

// Per-dimension certification across a range, with unit-normalized scalar
// invariants (the certified flag does not depend on the choice of W).
inline std::vector<CriticalPointReport> dimension_scan(int n_min, int n_max) {
    if (n_min < 11 || n_min > n_max)
        throw std::invalid_argument("dimension_scan: need 11 <= n_min <= n_max");
    std::vector<CriticalPointReport> out;
    out.reserve(static_cast<size_t>(n_max - n_min + 1));
    for (int n = n_min; n <= n_max; ++n) out.push_back(certify_dimension(n, nullptr));
    return out;
}

inline std::string scan_csv(const std::vector<CriticalPointReport>& reports) {
    std::ostringstream os;
    os.precision(17);
    os << "n,discriminant,eps_star,F_at_star,d2F,bracket1,bracket2,eig_min,certified\n";
    for (const auto& r : reports) {
        os << r.n << ',' << r.discriminant << ',';
        if (r.eps_star) {
            os << *r.eps_star << ',' << r.F_at_star << ',' << r.d2F_deps2 << ',' << r.bracket1
               << ',' << r.bracket2 << ',' << r.hessian_eigen_min << ',';
        } else {
            os << ",,,,,,";
        }
        os << (r.certified_min ? 1 : 0) << '\n';
    }
    return os.str();
}

inline std::optional<int> first_certified(const std::vector<CriticalPointReport>& reports) {
    for (const auto& r : reports)
        if (r.certified_min) return r.n;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Monte-Carlo counterparts of the identities, sharing one direction stream

struct IdentityRequest {
    IdentityKind kind;
    double r;
};

// Surface-integral left sides estimated by sphere sampling. All requested
// (kind, radius) pairs reuse the same per-sample invariants Q1 = sum (dH)^2,
// Q2 = sum H^2, and (H^2)_pq on the unit sphere: the integrands at radius r
// follow by homogeneity.
inline std::vector<Estimate> identity_lhs_mc(const WeylForm& W,
                                             const std::vector<IdentityRequest>& reqs, int p,
                                             int q, long samples, std::uint64_t seed) {
    int n = W.n;
    Eigen::MatrixXd A(static_cast<long>(reqs.size()), 5);
    for (size_t c = 0; c < reqs.size(); ++c) {
        double r = reqs[c].r;
        double om2 = (1.0 - r * r) * (1.0 - r * r);
        double tw = 2.0 - 3.0 * r * r;
        A.row(static_cast<long>(c)).setZero();
        switch (reqs[c].kind) {
            case IdentityKind::grad_H:
                A(c, 2) = std::pow(r, n + 3);
                break;
            case IdentityKind::H_sq:
                A(c, 3) = std::pow(r, n + 5);
                break;
            case IdentityKind::grad_Hbar:
                A(c, 2) = om2 * std::pow(r, n + 3);
                A(c, 3) = -4.0 * tw * std::pow(r, n + 5);
                break;
            case IdentityKind::grad_Hbar_total:
                A(c, 0) = om2 * std::pow(r, n + 1);
                A(c, 1) = -4.0 * tw * std::pow(r, n + 3);
                break;
            case IdentityKind::Hbar_pair:
                A(c, 4) = om2 * std::pow(r, n + 3);
                break;
        }
    }
    WeylField field(W);
    WeylField::BatchOut out;
    return sphere_mc_combos(
        n, 5, A, samples, seed, [&](const Eigen::MatrixXd& theta, Eigen::MatrixXd& Y) {
            field.eval_batch(theta, out, true);
            long m = theta.cols();
            for (long j = 0; j < m; ++j) {
                double tptq = theta(p, j) * theta(q, j);
                Y(0, j) = out.q1(j);
                Y(1, j) = out.q2(j);
                Y(2, j) = out.q1(j) * tptq;
                Y(3, j) = out.q2(j) * tptq;
                Y(4, j) = out.hsq(static_cast<long>(q) * n + p, j);
            }
        });
}

// Product-quadrature estimate of F(0, eps) for several eps values from one
// direction stream: F(0,eps) = -(n-2)/(16(n-1)) \int eps^{n-2}
// (eps^2+|x|^2)^{2-n} sum (dHbar)^2.
inline std::vector<Estimate> f0_quadrature(int n, const WeylForm& W,
                                           const std::vector<double>& eps_list, long samples,
                                           std::uint64_t seed, double tol = 1e-11) {
    double c = (n - 2.0) / (16.0 * (n - 1.0));
    Eigen::MatrixXd A(static_cast<long>(eps_list.size()), 2);
    for (size_t i = 0; i < eps_list.size(); ++i) {
        double eps = eps_list[i];
        double en2 = std::pow(eps, n - 2);
        auto w = [&](double r) { return en2 * std::pow(eps * eps + r * r, 2.0 - n); };
        double Ra = radial_quad(
            [&](double r) { double v = 1.0 - r * r; return w(r) * v * v * std::pow(r, n + 1); },
            tol);
        double Rb = radial_quad(
            [&](double r) { return w(r) * (2.0 - 3.0 * r * r) * std::pow(r, n + 3); }, tol);
        A(static_cast<long>(i), 0) = -c * Ra;
        A(static_cast<long>(i), 1) = 4.0 * c * Rb;
    }
    WeylField field(W);
    WeylField::BatchOut out;
    return sphere_mc_combos(n, 2, A, samples, seed,
                            [&](const Eigen::MatrixXd& theta, Eigen::MatrixXd& Y) {
                                field.eval_batch(theta, out, false);
                                Y.row(0) = out.q1.transpose();
                                Y.row(1) = out.q2.transpose();
                            });
}

} // namespace ybl
