#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "ybl/errors.hpp"
#include "ybl/rng.hpp"

namespace ybl {

struct Tensor4 {
    int n = 0;
    std::vector<double> a;

    Tensor4() = default;
    explicit Tensor4(int dim) : n(dim), a(static_cast<size_t>(dim) * dim * dim * dim, 0.0) {}

    double& at(int i, int j, int k, int l) {
        return a[((static_cast<size_t>(i) * n + j) * n + k) * n + l];
    }
    double at(int i, int j, int k, int l) const {
        return a[((static_cast<size_t>(i) * n + j) * n + k) * n + l];
    }
};

// Rank-4 form with the algebraic symmetries of a Weyl curvature tensor:
// antisymmetric in each index pair, symmetric under pair exchange, first
// Bianchi identity, and trace-free.
struct WeylForm {
    int n = 0;
    Tensor4 w;

    double at(int i, int j, int k, int l) const { return w.at(i, j, k, l); }
};

namespace detail {

inline Tensor4 antisymmetrize_pairs(const Tensor4& t) {
    int n = t.n;
    Tensor4 out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    out.at(i, j, k, l) = 0.25 * (t.at(i, j, k, l) - t.at(j, i, k, l) -
                                                 t.at(i, j, l, k) + t.at(j, i, l, k));
    Tensor4 sym(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    sym.at(i, j, k, l) = 0.5 * (out.at(i, j, k, l) + out.at(k, l, i, j));
    return sym;
}

// Remove the totally antisymmetric part; on pair-symmetric, pair-antisymmetric
// tensors this enforces the first Bianchi identity.
inline Tensor4 bianchi_project(const Tensor4& t) {
    int n = t.n;
    Tensor4 out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double b = (t.at(i, j, k, l) + t.at(i, k, l, j) + t.at(i, l, j, k)) / 3.0;
                    out.at(i, j, k, l) = t.at(i, j, k, l) - b;
                }
    return out;
}

} // namespace detail

// Orthogonal projection onto the space of Weyl-symmetric forms.
inline WeylForm project_to_weyl(const Tensor4& t) {
    int n = t.n;
    if (n < 4) throw DimensionTooSmall("project_to_weyl: no nonzero Weyl-symmetric form below dimension 4");

    Tensor4 c = detail::bianchi_project(detail::antisymmetrize_pairs(t));

    Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += c.at(i, j, i, l);
            ric(j, l) = s;
        }
    double scal = ric.trace();
    Eigen::MatrixXd ric0 = ric - (scal / n) * Eigen::MatrixXd::Identity(n, n);

    // Kulkarni-Nomizu products A /\ g and g /\ g subtract the trace parts.
    WeylForm out;
    out.n = n;
    out.w = Tensor4(n);
    double cr = 1.0 / (n - 2.0);
    double cs = scal / (2.0 * n * (n - 1.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double kn_r = (i == k ? ric0(j, l) : 0.0) + (j == l ? ric0(i, k) : 0.0) -
                                  (i == l ? ric0(j, k) : 0.0) - (j == k ? ric0(i, l) : 0.0);
                    double kn_g = 2.0 * ((i == k && j == l ? 1.0 : 0.0) -
                                         (i == l && j == k ? 1.0 : 0.0));
                    out.w.at(i, j, k, l) = c.at(i, j, k, l) - cr * kn_r - cs * kn_g;
                }
    return out;
}

inline WeylForm seeded_weyl(int n, std::uint64_t seed) {
    Tensor4 t(n);
    BlockRng rng(seed, 0);
    for (auto& v : t.a) v = 2.0 * rng.uniform() - 1.0;
    return project_to_weyl(t);
}

// Sum over ijkl of (W_{ijkl} + W_{ilkj})^2.
inline double weyl_quadratic_norm(const WeylForm& W) {
    int n = W.n;
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double v = W.at(i, j, k, l) + W.at(i, l, k, j);
                    s += v * v;
                }
    return s;
}

// H_{ik}(x) = sum_{pq} W_{ipkq} x_p x_q.
inline Eigen::MatrixXd H_field(const WeylForm& W, const Eigen::VectorXd& x) {
    int n = W.n;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int p = 0; p < n; ++p)
                for (int q = 0; q < n; ++q) s += W.at(i, p, k, q) * x(p) * x(q);
            h(i, k) = s;
        }
    return h;
}

// Batched evaluator for H and its derivative field. Row (i,k,l), column q
// stores W_{iqkl} + W_{ilkq}, so that D*x gives dH_{ik,l} = partial_l H_{ik}(x),
// and (by homogeneity) H_{ik}(x) = (1/2) sum_l dH_{ik,l} x_l. Second
// derivatives are the constant array D itself.
class WeylField {
public:
    explicit WeylField(const WeylForm& W) : n_(W.n), D_(static_cast<long>(W.n) * W.n * W.n, W.n) {
        int n = n_;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    long row = (static_cast<long>(i) * n + k) * n + l;
                    for (int q = 0; q < n; ++q)
                        D_(row, q) = W.at(i, q, k, l) + W.at(i, l, k, q);
                }
    }

    int n() const { return n_; }
    const Eigen::MatrixXd& D() const { return D_; }

    Eigen::VectorXd dH(const Eigen::VectorXd& x) const { return D_ * x; }

    static Eigen::MatrixXd H_from_dH(const Eigen::VectorXd& dh, const Eigen::VectorXd& x) {
        int n = static_cast<int>(x.size());
        Eigen::Map<const Eigen::MatrixXd> m(dh.data(), n, static_cast<long>(n) * n);
        Eigen::MatrixXd h(n, n);
        // dh is laid out with l fastest: dh((i*n+k)*n + l).
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                h(i, k) = 0.5 * dh.segment(static_cast<long>(i * n + k) * n, n).dot(x);
        return h;
    }

    struct BatchOut {
        Eigen::VectorXd q1;      // per column: sum (dH)^2
        Eigen::VectorXd q2;      // per column: sum H^2
        Eigen::MatrixXd hsq;     // optional, n^2 x m: vec(H*H) per column
    };

    // Evaluates per-column scalar invariants (and optionally H^2) for a batch
    // of points given as columns of X. Chunked so the n^3 x m intermediate
    // stays within a fixed memory budget.
    void eval_batch(const Eigen::MatrixXd& X, BatchOut& out, bool want_hsq) const {
        int n = n_;
        long m = X.cols();
        out.q1.resize(m);
        out.q2.resize(m);
        if (want_hsq) out.hsq.resize(static_cast<long>(n) * n, m);
        long n3 = static_cast<long>(n) * n * n;
        long chunk = std::max<long>(8, 2000000 / n3);
        Eigen::MatrixXd dh;
        Eigen::MatrixXd h(n, n);
        for (long c0 = 0; c0 < m; c0 += chunk) {
            long mc = std::min(chunk, m - c0);
            dh.noalias() = D_ * X.middleCols(c0, mc);
            for (long j = 0; j < mc; ++j) {
                auto col = dh.col(j);
                out.q1(c0 + j) = col.squaredNorm();
                const Eigen::VectorXd& x = X.col(c0 + j);
                for (int i = 0; i < n; ++i)
                    for (int k = 0; k < n; ++k)
                        h(i, k) = 0.5 * col.segment(static_cast<long>(i * n + k) * n, n).dot(x);
                out.q2(c0 + j) = h.squaredNorm();
                if (want_hsq) {
                    Eigen::MatrixXd h2 = h * h;
                    out.hsq.col(c0 + j) = Eigen::Map<Eigen::VectorXd>(h2.data(), h2.size());
                }
            }
        }
    }

private:
    int n_;
    Eigen::MatrixXd D_;
};

// M_{pq} = sum_{ikl} (W_{ipkl} + W_{ilkp})(W_{iqkl} + W_{ilkq}).
inline Eigen::MatrixXd M_matrix(const WeylForm& W) {
    WeylField f(W);
    return f.D().transpose() * f.D();
}

struct HbarJet {
    Eigen::MatrixXd value;  // n x n
    Eigen::VectorXd deriv;  // n^3, layout ((i*n+k)*n + l)
};

// Hbar_{ik}(x) = (1 - |x|^2) H_{ik}(x), with
// partial_l Hbar_{ik} = (1 - |x|^2) partial_l H_{ik} - 2 x_l H_{ik}.
inline HbarJet Hbar_field(const WeylField& f, const Eigen::VectorXd& x) {
    int n = f.n();
    double r2 = x.squaredNorm();
    Eigen::VectorXd dh = f.dH(x);
    Eigen::MatrixXd h = WeylField::H_from_dH(dh, x);
    HbarJet out;
    out.value = (1.0 - r2) * h;
    out.deriv.resize(dh.size());
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            long base = static_cast<long>(i * n + k) * n;
            for (int l = 0; l < n; ++l)
                out.deriv(base + l) = (1.0 - r2) * dh(base + l) - 2.0 * x(l) * h(i, k);
        }
    return out;
}

inline Eigen::MatrixXd Hbar_value(const WeylForm& W, const Eigen::VectorXd& x) {
    return (1.0 - x.squaredNorm()) * H_field(W, x);
}

struct WeylInvariantResiduals {
    double antisym;
    double pair_sym;
    double bianchi;
    double trace;
};

inline WeylInvariantResiduals weyl_residuals(const WeylForm& W) {
    int n = W.n;
    WeylInvariantResiduals r{0, 0, 0, 0};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double w = W.at(i, j, k, l);
                    r.antisym = std::max(r.antisym, std::abs(w + W.at(j, i, k, l)));
                    r.antisym = std::max(r.antisym, std::abs(w + W.at(i, j, l, k)));
                    r.pair_sym = std::max(r.pair_sym, std::abs(w - W.at(k, l, i, j)));
                    r.bianchi = std::max(
                        r.bianchi, std::abs(w + W.at(i, k, l, j) + W.at(i, l, j, k)));
                }
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += W.at(i, j, i, l);
            r.trace = std::max(r.trace, std::abs(s));
        }
    return r;
}

inline nlohmann::json weyl_to_json(const WeylForm& W) {
    return nlohmann::json{{"entries", W.w.a}, {"n", W.n}};
}

inline WeylForm weyl_from_json(const nlohmann::json& j) {
    WeylForm W;
    W.n = j.at("n").get<int>();
    W.w = Tensor4(W.n);
    auto e = j.at("entries").get<std::vector<double>>();
    if (e.size() != W.w.a.size())
        throw std::runtime_error("weyl_from_json: entry count does not match n^4");
    W.w.a = std::move(e);
    return W;
}

} // namespace ybl
