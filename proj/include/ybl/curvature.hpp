#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "ybl/bubble.hpp"
#include "ybl/errors.hpp"
#include "ybl/quadrature.hpp"
#include "ybl/tensor4.hpp"

namespace ybl {

// ---------------------------------------------------------------------------
// Jets of symmetric two-tensor fields
//
// Flat layout: dh column l holds vec(partial_l h); d2h column (l*n + m) holds
// vec(partial_l partial_m h).

struct TensorJet {
    int n = 0;
    Eigen::MatrixXd value;  // n x n
    Eigen::MatrixXd dh;     // n^2 x n
    Eigen::MatrixXd d2h;    // n^2 x n^2

    static TensorJet zero(int n) {
        TensorJet j;
        j.n = n;
        j.value = Eigen::MatrixXd::Zero(n, n);
        j.dh = Eigen::MatrixXd::Zero(static_cast<long>(n) * n, n);
        j.d2h = Eigen::MatrixXd::Zero(static_cast<long>(n) * n, static_cast<long>(n) * n);
        return j;
    }

    Eigen::Map<const Eigen::MatrixXd> d(int l) const {
        return Eigen::Map<const Eigen::MatrixXd>(dh.col(l).data(), n, n);
    }
    Eigen::Map<const Eigen::MatrixXd> dd(int l, int m) const {
        return Eigen::Map<const Eigen::MatrixXd>(d2h.col(static_cast<long>(l) * n + m).data(), n,
                                                 n);
    }
    Eigen::Map<Eigen::MatrixXd> d(int l) {
        return Eigen::Map<Eigen::MatrixXd>(dh.col(l).data(), n, n);
    }
    Eigen::Map<Eigen::MatrixXd> dd(int l, int m) {
        return Eigen::Map<Eigen::MatrixXd>(d2h.col(static_cast<long>(l) * n + m).data(), n, n);
    }

    bool is_zero() const {
        return value.isZero(0.0) && dh.isZero(0.0) && d2h.isZero(0.0);
    }
};

struct SymTensorField {
    int n = 0;
    std::function<TensorJet(const Eigen::VectorXd&)> eval;
};

using MetricJet = TensorJet;  // same shape; value is the metric itself

// ---------------------------------------------------------------------------
// g = exp(h) with first and second derivatives by term-wise product rule

// exp(h) - I, summed without the identity term so that values of order |h|
// keep full relative accuracy even when |h| is tiny.
inline TensorJet sym_exp_jet_m1(const TensorJet& h) {
    int n = h.n;
    TensorJet g = TensorJet::zero(n);

    TensorJet term = TensorJet::zero(n);
    term.value = Eigen::MatrixXd::Identity(n, n);
    TensorJet next = TensorJet::zero(n);

    for (int k = 1; k <= 80; ++k) {
        double inv = 1.0 / k;
        next.value.noalias() = term.value * h.value;
        next.value *= inv;
        for (int l = 0; l < n; ++l) {
            next.d(l).noalias() = term.d(l) * h.value;
            next.d(l).noalias() += term.value * h.d(l);
            next.d(l) *= inv;
        }
        for (int l = 0; l < n; ++l)
            for (int m = l; m < n; ++m) {
                auto out = next.dd(l, m);
                out.noalias() = term.dd(l, m) * h.value;
                out.noalias() += term.d(l) * h.d(m);
                out.noalias() += term.d(m) * h.d(l);
                out.noalias() += term.value * h.dd(l, m);
                out *= inv;
                if (m != l) next.dd(m, l) = out;
            }
        g.value += next.value;
        g.dh += next.dh;
        g.d2h += next.d2h;
        double mx = std::max({next.value.cwiseAbs().maxCoeff(), next.dh.cwiseAbs().maxCoeff(),
                              next.d2h.cwiseAbs().maxCoeff()});
        std::swap(term, next);
        if (mx < 1e-17) break;
    }
    // exp of a symmetric jet stays symmetric; enforce exactly against roundoff.
    g.value = 0.5 * (g.value + g.value.transpose()).eval();
    return g;
}

inline MetricJet sym_exp_jet(const TensorJet& h) {
    MetricJet g = sym_exp_jet_m1(h);
    g.value.diagonal().array() += 1.0;
    return g;
}

// ---------------------------------------------------------------------------
// Scalar curvature from a metric jet

struct ScalarCurvaturePair {
    double generic;    // full Christoffel contraction
    double shortcut;   // unit-determinant simplification
};

inline ScalarCurvaturePair scalar_curvature_pair(const MetricJet& jet) {
    int n = jet.n;
    Eigen::LLT<Eigen::MatrixXd> llt(jet.value);
    if (llt.info() != Eigen::Success)
        throw SingularMetric("scalar_curvature: metric is not positive definite");
    Eigen::MatrixXd ginv = llt.solve(Eigen::MatrixXd::Identity(n, n));

    std::vector<Eigen::MatrixXd> dginv(n);
    for (int l = 0; l < n; ++l) dginv[l] = -ginv * jet.d(l) * ginv;

    // Gamma[i](j,k) = (1/2) ginv(i,l) (d_j g_{lk} + d_k g_{lj} - d_l g_{jk})
    std::vector<Eigen::MatrixXd> half(n);  // half[l](j,k) = the parenthesis / 2
    for (int l = 0; l < n; ++l) {
        half[l].resize(n, n);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                half[l](j, k) =
                    0.5 * (jet.d(j)(l, k) + jet.d(k)(l, j) - jet.d(l)(j, k));
    }
    std::vector<Eigen::MatrixXd> gamma(n, Eigen::MatrixXd::Zero(n, n));
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) gamma[i] += ginv(i, l) * half[l];

    // dgamma[m][i](j,k) = partial_m Gamma^i_{jk}
    std::vector<std::vector<Eigen::MatrixXd>> dgamma(n);
    Eigen::MatrixXd dhalf(n, n);
    for (int m = 0; m < n; ++m) {
        dgamma[m].assign(n, Eigen::MatrixXd::Zero(n, n));
        for (int l = 0; l < n; ++l) {
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    dhalf(j, k) = 0.5 * (jet.dd(m, j)(l, k) + jet.dd(m, k)(l, j) -
                                         jet.dd(m, l)(j, k));
            for (int i = 0; i < n; ++i) {
                dgamma[m][i] += dginv[m](i, l) * half[l];
                dgamma[m][i] += ginv(i, l) * dhalf;
            }
        }
    }

    double generic = 0.0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double term = 0.0;
            for (int i = 0; i < n; ++i) term += dgamma[i][i](j, k) - dgamma[j][i](i, k);
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < n; ++l)
                    term += gamma[l](j, k) * gamma[i](i, l) - gamma[l](i, k) * gamma[i](j, l);
            generic += ginv(j, k) * term;
        }

    double shortcut = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                shortcut += dginv[i](j, k) * gamma[i](j, k) + ginv(j, k) * dgamma[i][i](j, k);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < n; ++l)
                    shortcut += ginv(j, k) * gamma[l](i, k) * gamma[i](j, l);

    return ScalarCurvaturePair{generic, shortcut};
}

inline double scalar_curvature_exact(const MetricJet& jet) {
    ScalarCurvaturePair p = scalar_curvature_pair(jet);
    // The shortcut assumes vanishing traced Christoffel symbols (det g == 1);
    // only compare when that actually holds.
    double diff = std::fabs(p.generic - p.shortcut);
    if (diff > 1e-10 * (1.0 + std::fabs(p.generic)))
        throw ToleranceNotMet("scalar_curvature_exact: formula cross-check failed");
    return p.generic;
}

// Quadratic model from the expansion of R_{exp(h)} for trace-free h.
inline double scalar_curvature_approx(const TensorJet& h) {
    int n = h.n;
    double ddh = 0.0;       // sum d_i d_k h_{ik}
    double hdd = 0.0;       // sum h_{il} d_i d_k h_{kl}
    double divsq = 0.0;     // sum_l (sum_k d_k h_{kl})^2
    double gradsq = 0.0;    // sum (d_l h_{ik})^2
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) ddh += h.dd(i, k)(i, k);
    for (int l = 0; l < n; ++l) {
        double div = 0.0;
        for (int k = 0; k < n; ++k) div += h.d(k)(k, l);
        divsq += div * div;
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += h.dd(i, k)(k, l);
            hdd += h.value(i, l) * s;
        }
    }
    gradsq = h.dh.squaredNorm();
    return ddh - hdd - 0.5 * divsq - 0.25 * gradsq;
}

// ---------------------------------------------------------------------------
// Smooth cutoff: eta(t) = 1 for t <= 1, 0 for t >= 2, with two derivatives

struct C2Value {
    double v = 0.0, d1 = 0.0, d2 = 0.0;
};

namespace detail {

inline C2Value mollifier(double t) {  // exp(-1/t) extended by 0
    if (t <= 0.0) return {};
    double e = std::exp(-1.0 / t);
    return {e, e / (t * t), e * (1.0 - 2.0 * t) / (t * t * t * t)};
}

inline C2Value smoothstep(double t) {  // 0 at t<=0, 1 at t>=1
    C2Value a = mollifier(t);
    C2Value b = mollifier(1.0 - t);
    double A = a.v, Ad = a.d1, Add = a.d2;
    double B = a.v + b.v, Bd = a.d1 - b.d1, Bdd = a.d2 + b.d2;
    C2Value s;
    s.v = A / B;
    s.d1 = (Ad * B - A * Bd) / (B * B);
    s.d2 = (Add * B - A * Bdd) / (B * B) - 2.0 * Bd * (Ad * B - A * Bd) / (B * B * B);
    return s;
}

} // namespace detail

inline C2Value cutoff_eta(double t) {
    if (t <= 1.0) return {1.0, 0.0, 0.0};
    if (t >= 2.0) return {};
    C2Value s = detail::smoothstep(2.0 - t);
    return {s.v, -s.d1, s.d2};
}

// ---------------------------------------------------------------------------
// The perturbation fields

struct PatchParams {
    double mu;
    double lambda;
    double rho;
    double cutoff_outer;

    static PatchParams standard(double mu, double lambda, double rho) {
        return PatchParams{mu, lambda, rho, std::min(2.0 * rho, 1.0)};
    }
};

namespace detail {

// Jet of P(x) = mu (lam2 - |x|^2) H(x) at y = x - center.
inline void poly_patch_jet(const WeylField& f, double mu, double lam2, const Eigen::VectorXd& y,
                           TensorJet& out) {
    int n = f.n();
    double q = lam2 - y.squaredNorm();
    Eigen::VectorXd dhv = f.dH(y);
    Eigen::MatrixXd H = WeylField::H_from_dH(dhv, y);
    out.value = (mu * q) * H;
    const Eigen::MatrixXd& D = f.D();
    for (int l = 0; l < n; ++l) {
        auto dl = out.d(l);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                dl(i, k) = mu * (q * dhv(static_cast<long>(i * n + k) * n + l) -
                                 2.0 * y(l) * H(i, k));
    }
    for (int l = 0; l < n; ++l)
        for (int m = l; m < n; ++m) {
            auto dd = out.dd(l, m);
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k) {
                    long row = static_cast<long>(i * n + k) * n;
                    double v = q * D(row + l, m) - 2.0 * y(l) * dhv(row + m) -
                               2.0 * y(m) * dhv(row + l) - (l == m ? 2.0 * H(i, k) : 0.0);
                    dd(i, k) = mu * v;
                }
            if (m != l) out.dd(m, l) = out.dd(l, m);
        }
}

// Multiplies a polynomial-patch jet by a radial cutoff with jet (c, c', c'')
// in the distance d = |y|.
inline void apply_radial_cutoff(const Eigen::VectorXd& y, const C2Value& c, TensorJet& jet) {
    int n = jet.n;
    double d = y.norm();
    if (c.v == 1.0 && c.d1 == 0.0 && c.d2 == 0.0) return;
    if (c.v == 0.0 && c.d1 == 0.0 && c.d2 == 0.0) {
        jet = TensorJet::zero(n);
        return;
    }
    Eigen::VectorXd grad_c = (c.d1 / d) * y;
    Eigen::MatrixXd hess_c =
        (c.d2 / (d * d) - c.d1 / (d * d * d)) * (y * y.transpose());
    hess_c.diagonal().array() += c.d1 / d;

    TensorJet out = TensorJet::zero(n);
    out.value = c.v * jet.value;
    for (int l = 0; l < n; ++l) out.d(l) = c.v * jet.d(l) + grad_c(l) * jet.value;
    for (int l = 0; l < n; ++l)
        for (int m = l; m < n; ++m) {
            out.dd(l, m) = c.v * jet.dd(l, m) + grad_c(l) * jet.d(m) + grad_c(m) * jet.d(l) +
                           hess_c(l, m) * jet.value;
            if (m != l) out.dd(m, l) = out.dd(l, m);
        }
    jet = out;
}

} // namespace detail

// h(x) = eta(1 + (|x|-rho)/(cutoff_outer-rho)) * mu (lambda^2 - |x|^2) H(x):
// the pure polynomial inside |x| <= rho, zero outside cutoff_outer.
inline SymTensorField patch_field(const WeylForm& W, const PatchParams& p) {
    auto field = std::make_shared<WeylField>(W);
    int n = W.n;
    PatchParams pp = p;
    return SymTensorField{
        n, [field, pp, n](const Eigen::VectorXd& x) {
            double r = x.norm();
            TensorJet jet = TensorJet::zero(n);
            if (r >= pp.cutoff_outer) return jet;
            detail::poly_patch_jet(*field, pp.mu, pp.lambda * pp.lambda, x, jet);
            if (r <= pp.rho) return jet;
            double width = pp.cutoff_outer - pp.rho;
            double t = 1.0 + (r - pp.rho) / width;
            C2Value e = cutoff_eta(t);
            C2Value c{e.v, e.d1 / width, e.d2 / (width * width)};
            detail::apply_radial_cutoff(x, c, jet);
            return jet;
        }};
}

// Hbar as a tensor field: the patch polynomial with mu = 1, lambda = 1 and no
// cutoff.
inline SymTensorField hbar_tensor_field(const WeylForm& W) {
    auto field = std::make_shared<WeylField>(W);
    int n = W.n;
    return SymTensorField{n, [field, n](const Eigen::VectorXd& x) {
                              TensorJet jet = TensorJet::zero(n);
                              detail::poly_patch_jet(*field, 1.0, 1.0, x, jet);
                              return jet;
                          }};
}

struct GluedFieldParams {
    int N0 = 3;
    int N_max = 9;
};

// h(x) = sum_N eta(4 N^2 |x - y_N|) 2^{-N} (2^{-N} - |x - y_N|^2) H(x - y_N),
// y_N = (1/N, 0, ..., 0).
inline SymTensorField glued_field(const WeylForm& W, const GluedFieldParams& gp) {
    if (gp.N0 < 3 || gp.N_max < gp.N0)
        throw std::invalid_argument("glued_field: need N0 >= 3 and N_max >= N0");
    auto field = std::make_shared<WeylField>(W);
    int n = W.n;
    return SymTensorField{
        n, [field, gp, n](const Eigen::VectorXd& x) {
            TensorJet total = TensorJet::zero(n);
            TensorJet term = TensorJet::zero(n);
            Eigen::VectorXd y = x;
            for (int N = gp.N0; N <= gp.N_max; ++N) {
                y = x;
                y(0) -= 1.0 / N;
                double d = y.norm();
                double s = 4.0 * N * N;
                if (s * d >= 2.0) continue;
                double muN = std::pow(2.0, -N);
                detail::poly_patch_jet(*field, muN, muN, y, term);
                C2Value e = cutoff_eta(s * d);
                detail::apply_radial_cutoff(y, C2Value{e.v, s * e.d1, s * s * e.d2}, term);
                total.value += term.value;
                total.dh += term.dh;
                total.d2h += term.d2h;
            }
            return total;
        }};
}

struct SmallnessReport {
    double alpha_proxy;       // sampled sup of |h| + |dh| + |d2h|
    double combination;       // rho^{2-n} mu^{-2} lambda^{n-10}
    double log_combination;
};

inline double smallness_log_combination(const PatchParams& p, int n) {
    return (2.0 - n) * std::log(p.rho) - 2.0 * std::log(p.mu) +
           (n - 10.0) * std::log(p.lambda);
}

inline SmallnessReport smallness_parameters(const SymTensorField& h, const PatchParams& p,
                                            int n) {
    double sup = 0.0;
    BlockRng rng(1234, 0);
    Eigen::VectorXd x(n);
    for (int s = 0; s < 256; ++s) {
        for (int i = 0; i < n; ++i) x(i) = rng.gaussian();
        x *= p.cutoff_outer * std::pow(rng.uniform(), 1.0 / n) / x.norm();
        TensorJet j = h.eval(x);
        sup = std::max(sup, j.value.norm() + j.dh.norm() + j.d2h.norm());
    }
    double lg = smallness_log_combination(p, n);
    return SmallnessReport{sup, std::exp(lg), lg};
}

// ---------------------------------------------------------------------------
// Error fields of the perturbed bubble equation

struct ErrorFieldSample {
    double A1;
    double A2;
};

inline void require_in_scaled_omega(int n, const Eigen::VectorXd& xi, double eps,
                                    double lambda) {
    if (!omega_contains(n, Eigen::VectorXd(xi / lambda), eps / lambda))
        throw OutsideOmega("error_fields: (xi/lambda, eps/lambda) is outside the domain");
}

// A1 = Delta_g u - (n-2)/(4(n-1)) R_g u + n(n-2) u^{(n+2)/(n-2)}, evaluated in
// the conditioned form sum d_i[(g^{ik} - delta_{ik}) d_k u] - (n-2)/(4(n-1)) R_g u
// (the flat part cancels exactly by the bubble equation).
// A2 = sum mu (lambda^2 - |x|^2) H_{ik}(x) d_i d_k u.
inline ErrorFieldSample error_fields(const WeylField& wf, const SymTensorField& h,
                                     const PatchParams& p, const BubbleParams& bub,
                                     const Eigen::VectorXd& x) {
    int n = bub.n;
    BubbleJet u = bubble(bub, x);

    TensorJet hj = h.eval(x);
    double a1 = 0.0;
    if (!hj.is_zero()) {
        double R = scalar_curvature_exact(sym_exp_jet(hj));
        // g^{ik} - delta = exp(-h) - I, summed without the identity so the
        // tiny entries keep full relative accuracy against the large bubble
        // Hessian near the concentration point.
        TensorJet mh = hj;
        mh.value = -hj.value;
        mh.dh = -hj.dh;
        mh.d2h = -hj.d2h;
        TensorJet E = sym_exp_jet_m1(mh);
        a1 += (E.value * u.hess).trace();
        for (int k = 0; k < n; ++k) {
            double divk = 0.0;
            for (int i = 0; i < n; ++i) divk += E.d(i)(i, k);
            a1 += divk * u.grad(k);
        }
        a1 -= (n - 2.0) / (4.0 * (n - 1.0)) * R * u.value;
    }

    double q = p.mu * (p.lambda * p.lambda - x.squaredNorm());
    Eigen::VectorXd dhv = wf.dH(x);
    Eigen::MatrixXd H = WeylField::H_from_dH(dhv, x);
    double a2 = q * (H * u.hess).trace();
    return ErrorFieldSample{a1, a2};
}

struct ErrorNorms {
    Estimate a1;       // L^{2n/(n+2)} norm of A1 over the region
    Estimate a1_a2;    // same for A1 + A2
};

namespace detail {

inline Estimate power_norm(const Moments& m, double p, long samples, std::uint64_t seed) {
    double v = m.mean();
    double se = m.mean_std_err();
    double norm = std::pow(std::max(v, 0.0), 1.0 / p);
    double dnorm = v > 0.0 ? se / (p * v) * norm : 0.0;
    return Estimate{norm, dnorm, samples, seed};
}

} // namespace detail

inline ErrorNorms error_norms(const WeylForm& W, const SymTensorField& h, const PatchParams& p,
                              const BubbleParams& bub, const RegionSpec& region, long samples,
                              std::uint64_t seed, const Importance& imp) {
    int n = bub.n;
    require_in_scaled_omega(n, bub.xi, bub.eps, p.lambda);
    double pw = 2.0 * n / (n + 2.0);
    WeylField wf(W);
    detail::RadialSampler rs(region, imp);
    double area = sphere_area(n);
    Moments m1, m12;
    Eigen::VectorXd x(n);
    long nb = num_blocks(samples);
    for (long b = 0; b < nb; ++b) {
        long cnt = block_sample_count(samples, b);
        if (cnt <= 0) continue;
        BlockRng rng(seed, static_cast<std::uint64_t>(b));
        Moments p1, p12;
        for (long i = 0; i < cnt; ++i) {
            for (int k = 0; k < n; ++k) x(k) = rng.gaussian();
            x.normalize();
            double r = rs.draw(rng.uniform());
            x *= r;
            double w = std::pow(r, n - 1) * area / rs.pdf(r);
            ErrorFieldSample s = error_fields(wf, h, p, bub, x);
            p1.add(std::pow(std::fabs(s.A1), pw) * w);
            p12.add(std::pow(std::fabs(s.A1 + s.A2), pw) * w);
        }
        m1.merge(p1);
        m12.merge(p12);
    }
    return ErrorNorms{detail::power_norm(m1, pw, samples, seed),
                      detail::power_norm(m12, pw, samples, seed)};
}

// ---------------------------------------------------------------------------
// Quadratic energy

// Q = int ( (1/2) sum h_{il} h_{kl} d_i u d_k u
//           - (n-2)/(16(n-1)) sum (d_l h_{ik})^2 u^2 ) over the region.
struct EnergyTerms {
    bool grad_term = true;  // (1/2) |h grad u|^2
    bool u2_term = true;    // -(n-2)/(16(n-1)) |dh|^2 u^2
};

inline Estimate quadratic_energy(const SymTensorField& h, const BubbleParams& bub,
                                 const RegionSpec& region, long samples, std::uint64_t seed,
                                 const Importance& imp = Importance{},
                                 const EnergyTerms& terms = EnergyTerms{}) {
    int n = bub.n;
    double cgrad = (n - 2.0) / (16.0 * (n - 1.0));
    return ball_mc(
        [&](const Eigen::VectorXd& x) {
            TensorJet hj = h.eval(x);
            if (hj.is_zero()) return 0.0;
            BubbleJet u = bubble(bub, x);
            double v = 0.0;
            if (terms.grad_term) v += 0.5 * (hj.value * u.grad).squaredNorm();
            if (terms.u2_term) v -= cgrad * hj.dh.squaredNorm() * u.value * u.value;
            return v;
        },
        n, region, samples, seed, imp);
}

// The two z-free terms of the reduced energy at (xi, eps), with Hbar as the
// perturbation field; mirroring the sample stream (x -> -x) realizes the
// evenness symmetry exactly.
inline Estimate F_partial(const WeylForm& W, const Eigen::VectorXd& xi, double eps,
                          long samples, std::uint64_t seed, bool mirror = false) {
    int n = W.n;
    SymTensorField hb = hbar_tensor_field(W);
    BubbleParams bub{n, xi, eps};
    double cgrad = (n - 2.0) / (16.0 * (n - 1.0));
    double gamma = std::max(2.5, n - 9.0);
    return ball_mc(
        [&](const Eigen::VectorXd& x0) {
            Eigen::VectorXd x = mirror ? Eigen::VectorXd(-x0) : x0;
            TensorJet hj = hb.eval(x);
            BubbleJet u = bubble(bub, x);
            double t1 = 0.5 * (hj.value * u.grad).squaredNorm();
            double t2 = cgrad * hj.dh.squaredNorm() * u.value * u.value;
            return t1 - t2;
        },
        n, RegionSpec::full(n), samples, seed, Importance{1.0, gamma});
}

// ---------------------------------------------------------------------------
// Scaling fits and auxiliary fields

inline double fit_exponent(const std::vector<double>& xs, const std::vector<double>& ys) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long n = static_cast<long>(xs.size());
    for (long i = 0; i < n; ++i) {
        double lx = std::log(xs[i]);
        double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Smooth compactly generated test field: a sum of sinusoidal modes with
// constant symmetric trace-free amplitudes. Used for expansion-order tests.
inline SymTensorField sine_field(int n, std::uint64_t seed, int modes = 3) {
    struct Mode {
        Eigen::MatrixXd amp;
        Eigen::VectorXd k;
        double phase;
    };
    auto ms = std::make_shared<std::vector<Mode>>();
    BlockRng rng(seed, 0);
    for (int m = 0; m < modes; ++m) {
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = 2.0 * rng.uniform() - 1.0;
        a.diagonal().array() -= a.trace() / n;
        a /= (modes * a.norm());
        Eigen::VectorXd k(n);
        for (int i = 0; i < n; ++i) k(i) = 2.0 * (2.0 * rng.uniform() - 1.0);
        ms->push_back(Mode{a, k, 2.0 * M_PI * rng.uniform()});
    }
    return SymTensorField{n, [ms, n](const Eigen::VectorXd& x) {
                              TensorJet jet = TensorJet::zero(n);
                              for (const auto& m : *ms) {
                                  double ph = m.k.dot(x) + m.phase;
                                  double s = std::sin(ph), c = std::cos(ph);
                                  jet.value += s * m.amp;
                                  for (int l = 0; l < n; ++l) jet.d(l) += c * m.k(l) * m.amp;
                                  for (int l = 0; l < n; ++l)
                                      for (int mm = 0; mm < n; ++mm)
                                          jet.dd(l, mm) -= s * m.k(l) * m.k(mm) * m.amp;
                              }
                              return jet;
                          }};
}

inline SymTensorField scaled_field(const SymTensorField& f, double t) {
    auto eval = f.eval;
    return SymTensorField{f.n, [eval, t](const Eigen::VectorXd& x) {
                              TensorJet j = eval(x);
                              j.value *= t;
                              j.dh *= t;
                              j.d2h *= t;
                              return j;
                          }};
}

// Mean over sample points of |R_exact - R_approx| for h = t h0, per t; the
// log-log slope against t measures the remainder order.
inline double remainder_order_slope(const SymTensorField& h0,
                                    const std::vector<Eigen::VectorXd>& pts,
                                    const std::vector<double>& tgrid) {
    std::vector<double> devs;
    for (double t : tgrid) {
        SymTensorField ht = scaled_field(h0, t);
        double acc = 0.0;
        for (const auto& x : pts) {
            TensorJet hj = ht.eval(x);
            double re = scalar_curvature_exact(sym_exp_jet(hj));
            double ra = scalar_curvature_approx(hj);
            acc += std::fabs(re - ra);
        }
        devs.push_back(acc / pts.size());
    }
    return fit_exponent(tgrid, devs);
}

} // namespace ybl
