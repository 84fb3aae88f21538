#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "ybl/closed_form.hpp"
#include "ybl/curvature.hpp"

using namespace ybl;

namespace {

std::vector<Eigen::VectorXd> sample_points(int n, std::uint64_t seed, int count,
                                           double scale = 0.5) {
    BlockRng rng(seed, 0);
    std::vector<Eigen::VectorXd> pts;
    for (int s = 0; s < count; ++s) {
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x(i) = scale * rng.gaussian();
        pts.push_back(x);
    }
    return pts;
}

} // namespace

TEST_CASE("metric exponential trivial cases") {
    int n = 5;
    MetricJet g = sym_exp_jet(TensorJet::zero(n));
    REQUIRE((g.value - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(g.dh.cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(g.d2h.cwiseAbs().maxCoeff() == 0.0);

    // Commuting diagonal case.
    TensorJet h = TensorJet::zero(n);
    double t = 0.7;
    h.value(0, 0) = t;
    h.value(1, 1) = -t;
    MetricJet ge = sym_exp_jet(h);
    REQUIRE(std::fabs(ge.value(0, 0) - std::exp(t)) < 1e-14);
    REQUIRE(std::fabs(ge.value(1, 1) - std::exp(-t)) < 1e-14);
    REQUIRE(std::fabs(ge.value(2, 2) - 1.0) < 1e-15);
    REQUIRE(std::fabs(ge.value.determinant() - 1.0) < 1e-13);
}

TEST_CASE("metric exponential jets match finite differences") {
    int n = 6;
    SymTensorField h0 = sine_field(n, 404);
    auto gval = [&](const Eigen::VectorXd& x) { return sym_exp_jet(h0.eval(x)).value; };
    Eigen::VectorXd x = sample_points(n, 405, 1)[0];
    MetricJet g = sym_exp_jet(h0.eval(x));
    double step = 1e-4;
    for (int l = 0; l < n; ++l) {
        Eigen::VectorXd xp = x, xm = x;
        xp(l) += step;
        xm(l) -= step;
        Eigen::MatrixXd fd = (gval(xp) - gval(xm)) / (2.0 * step);
        REQUIRE((Eigen::MatrixXd(g.d(l)) - fd).cwiseAbs().maxCoeff() < 1e-8);
        Eigen::MatrixXd fd2 = (gval(xp) - 2.0 * g.value + gval(xm)) / (step * step);
        REQUIRE((Eigen::MatrixXd(g.dd(l, l)) - fd2).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("trace-free fields exponentiate to unit determinant") {
    for (int n : {4, 6}) {
        SymTensorField h0 = sine_field(n, 500 + n);
        for (const auto& x : sample_points(n, 600 + n, 10)) {
            MetricJet g = sym_exp_jet(h0.eval(x));
            REQUIRE(std::fabs(g.value.determinant() - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("flat metric has zero curvature") {
    MetricJet g = sym_exp_jet(TensorJet::zero(4));
    g.value = Eigen::MatrixXd::Identity(4, 4);
    REQUIRE(scalar_curvature_exact(g) == 0.0);
    REQUIRE(scalar_curvature_approx(TensorJet::zero(4)) == 0.0);
}

TEST_CASE("the two curvature formulas agree at random points") {
    int n = 4;
    SymTensorField h0 = sine_field(n, 700);
    SymTensorField h = scaled_field(h0, 0.4);
    for (const auto& x : sample_points(n, 701, 50)) {
        ScalarCurvaturePair p = scalar_curvature_pair(sym_exp_jet(h.eval(x)));
        REQUIRE(std::fabs(p.generic - p.shortcut) < 1e-10 * (1.0 + std::fabs(p.generic)));
    }
}

TEST_CASE("curvature linearizes with quadratic remainder") {
    int n = 4;
    SymTensorField h0 = sine_field(n, 702);
    Eigen::VectorXd x = sample_points(n, 703, 1)[0];
    auto rem = [&](double t) {
        TensorJet hj = scaled_field(h0, t).eval(x);
        double lin = 0.0;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) lin += hj.dd(i, k)(i, k);
        return std::fabs(scalar_curvature_exact(sym_exp_jet(hj)) - lin);
    };
    double r1 = rem(1e-4), r2 = rem(2e-4);
    REQUIRE(r2 / r1 > 3.0);
    REQUIRE(r2 / r1 < 5.0);
}

TEST_CASE("expansion remainder is third order") {
    std::vector<double> tg = {1e-1, std::pow(10.0, -1.5), 1e-2, std::pow(10.0, -2.5), 1e-3};
    for (int n : {4, 6})
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            SymTensorField h0 = sine_field(n, 800 + seed * 10 + n);
            double slope = remainder_order_slope(h0, sample_points(n, 900 + seed, 10), tg);
            REQUIRE(slope > 2.7);
            REQUIRE(slope < 3.3);
        }
}

TEST_CASE("cutoff function") {
    REQUIRE(cutoff_eta(0.2).v == 1.0);
    REQUIRE(cutoff_eta(1.0).v == 1.0);
    REQUIRE(cutoff_eta(1.0).d1 == 0.0);
    REQUIRE(cutoff_eta(2.0).v == 0.0);
    REQUIRE(cutoff_eta(2.5).v == 0.0);
    REQUIRE(std::fabs(cutoff_eta(1.5).v - 0.5) < 1e-15);
    // Monotone decreasing across the transition, derivatives consistent.
    double step = 1e-6;
    for (double t : {1.1, 1.3, 1.7, 1.9}) {
        C2Value c = cutoff_eta(t);
        REQUIRE(c.d1 < 0.0);
        double fd = (cutoff_eta(t + step).v - cutoff_eta(t - step).v) / (2.0 * step);
        REQUIRE(std::fabs(fd - c.d1) < 1e-6);
        double fd2 = (cutoff_eta(t + step).d1 - cutoff_eta(t - step).d1) / (2.0 * step);
        REQUIRE(std::fabs(fd2 - c.d2) < 1e-5);
    }
}

TEST_CASE("patch field interior and exterior") {
    int n = 6;
    WeylForm W = seeded_weyl(n, 33);
    PatchParams p = PatchParams::standard(0.5, 0.2, 0.4);
    SymTensorField h = patch_field(W, p);

    for (const auto& x0 : sample_points(n, 34, 20, 0.2)) {
        Eigen::VectorXd x = x0;
        if (x.norm() >= p.rho) x *= 0.9 * p.rho / x.norm();
        TensorJet j = h.eval(x);
        double q = p.mu * (p.lambda * p.lambda - x.squaredNorm());
        Eigen::MatrixXd ref = q * H_field(W, x);
        REQUIRE((j.value - ref).cwiseAbs().maxCoeff() < 1e-15 + 1e-14 * ref.cwiseAbs().maxCoeff());
        // Interior identities: trace-free, radial annihilation, divergence-free.
        REQUIRE(std::fabs(j.value.trace()) < 1e-12);
        REQUIRE((j.value * x).cwiseAbs().maxCoeff() < 1e-12);
        for (int k = 0; k < n; ++k) {
            double div = 0.0;
            for (int i = 0; i < n; ++i) div += j.d(i)(i, k);
            REQUIRE(std::fabs(div) < 1e-12);
        }
    }
    Eigen::VectorXd far = 1.1 * p.cutoff_outer * Eigen::VectorXd::Unit(n, 0);
    TensorJet jf = h.eval(far);
    REQUIRE(jf.value.cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(jf.dh.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("patch field jets match finite differences in the transition zone") {
    int n = 4;
    WeylForm W = seeded_weyl(n, 35);
    PatchParams p = PatchParams::standard(0.7, 0.3, 0.4);
    SymTensorField h = patch_field(W, p);
    Eigen::VectorXd x = 0.55 * Eigen::VectorXd::Ones(n).normalized();  // inside transition
    REQUIRE(x.norm() > p.rho);
    REQUIRE(x.norm() < p.cutoff_outer);
    TensorJet j = h.eval(x);
    double step = 1e-5;
    for (int l = 0; l < n; ++l) {
        Eigen::VectorXd xp = x, xm = x;
        xp(l) += step;
        xm(l) -= step;
        Eigen::MatrixXd fd = (h.eval(xp).value - h.eval(xm).value) / (2.0 * step);
        REQUIRE((Eigen::MatrixXd(j.d(l)) - fd).cwiseAbs().maxCoeff() < 1e-7);
        for (int m = 0; m < n; ++m) {
            Eigen::MatrixXd fdd =
                (Eigen::MatrixXd(h.eval(xp).d(m)) - Eigen::MatrixXd(h.eval(xm).d(m))) /
                (2.0 * step);
            REQUIRE(std::fabs(j.dd(l, m)(0, 1) - fdd(0, 1)) < 1e-6);
        }
    }
}

TEST_CASE("patch amplitude scales linearly") {
    int n = 4;
    WeylForm W = seeded_weyl(n, 36);
    PatchParams p1 = PatchParams::standard(0.3, 0.2, 0.4);
    PatchParams p2 = PatchParams::standard(0.6, 0.2, 0.4);
    SmallnessReport s1 = smallness_parameters(patch_field(W, p1), p1, n);
    SmallnessReport s2 = smallness_parameters(patch_field(W, p2), p2, n);
    REQUIRE(std::fabs(s2.alpha_proxy / s1.alpha_proxy - 2.0) < 1e-10);
}

TEST_CASE("glued field structure") {
    int n = 6;
    WeylForm W = seeded_weyl(n, 37);
    GluedFieldParams gp{3, 9};
    SymTensorField g = glued_field(W, gp);
    REQUIRE_THROWS_AS(glued_field(W, GluedFieldParams{2, 9}), std::invalid_argument);

    // At a patch center the polynomial vanishes to second order but the
    // second derivatives are nonzero.
    Eigen::VectorXd y3 = Eigen::VectorXd::Zero(n);
    y3(0) = 1.0 / 3.0;
    TensorJet jc = g.eval(y3);
    REQUIRE(jc.value.cwiseAbs().maxCoeff() < 1e-15);
    REQUIRE(jc.d2h.cwiseAbs().maxCoeff() > 0.0);

    // Inside the core radius the sum reduces to the single local patch.
    WeylField wf(W);
    for (int N : {3, 4}) {
        double core = 1.0 / (4.0 * N * N);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        x(0) = 1.0 / N + 0.5 * core;
        x(1) = 0.3 * core;
        Eigen::VectorXd y = x;
        y(0) -= 1.0 / N;
        double muN = std::pow(2.0, -N);
        double q = muN * (muN - y.squaredNorm());
        Eigen::MatrixXd ref = q * H_field(W, y);
        TensorJet j = g.eval(x);
        REQUIRE((j.value - ref).cwiseAbs().maxCoeff() < 1e-14);
    }

    // Away from all supports the field vanishes.
    for (double r : {0.6, 0.8, 2.0}) {
        Eigen::VectorXd x = r * Eigen::VectorXd::Unit(n, 1);
        REQUIRE(g.eval(x).value.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("smallness combination arithmetic") {
    int n = 12;
    // lambda = rho, mu = 1 collapses to lambda^{-8}.
    PatchParams p = PatchParams::standard(1.0, 0.3, 0.3);
    double lg = smallness_log_combination(p, n);
    REQUIRE(std::fabs(lg - (-8.0) * std::log(0.3)) < 1e-12);
    // mu -> 0 blows up like mu^{-2}.
    PatchParams ph = PatchParams::standard(0.5, 0.3, 0.3);
    REQUIRE(std::fabs(smallness_log_combination(ph, n) - (lg + 2.0 * std::log(2.0))) < 1e-12);
    // The concentration schedule is monotone decreasing at n = 52 over the
    // documented index window.
    double prev = std::numeric_limits<double>::infinity();
    for (int N = 40; N <= 80; ++N) {
        PatchParams ps{std::pow(2.0, -N), std::pow(2.0, -0.5 * N), 1.0 / (4.0 * N * N), 1.0};
        double cur = smallness_log_combination(ps, 52);
        REQUIRE(cur < prev);
        prev = cur;
    }
}

TEST_CASE("error fields vanish where the metric is flat") {
    int n = 12;
    WeylForm W = seeded_weyl(n, 38);
    WeylField wf(W);
    double lam = 0.02;
    PatchParams p = PatchParams::standard(0.1, lam, 0.5);
    SymTensorField h = patch_field(W, p);
    BubbleParams bub{n, lam * 0.3 * Eigen::VectorXd::Unit(n, 0), lam * 0.35};

    // mu = 0: A1 vanishes identically.
    PatchParams p0 = PatchParams::standard(1e-300, lam, 0.5);
    SymTensorField h0 = patch_field(W, PatchParams{0.0, lam, 0.5, 1.0});
    for (const auto& x : sample_points(n, 39, 5, 0.3)) {
        ErrorFieldSample s = error_fields(wf, h0, PatchParams{0.0, lam, 0.5, 1.0}, bub, x);
        REQUIRE(s.A1 == 0.0);
    }
    // Outside the cutoff the metric is flat pointwise.
    Eigen::VectorXd far = 1.2 * Eigen::VectorXd::Unit(n, 2);
    ErrorFieldSample sf = error_fields(wf, h, p, bub, far);
    REQUIRE(sf.A1 == 0.0);

    // Omega gate.
    BubbleParams bad{n, Eigen::VectorXd::Zero(n), lam * 0.9};
    REQUIRE_THROWS_AS(error_norms(W, h, p, bad, RegionSpec::ball(n, 0.5), 100, 1,
                                  Importance{bad.eps, 3.5}),
                      OutsideOmega);
    (void)p0;
}

TEST_CASE("pointwise error field is quadratic in the amplitude") {
    int n = 12;
    WeylForm W = seeded_weyl(n, 40);
    WeylField wf(W);
    double lam = 0.02;
    BubbleParams bub{n, lam * 0.3 * Eigen::VectorXd::Unit(n, 0), lam * 0.35};
    Eigen::VectorXd x = 0.1 * Eigen::VectorXd::Ones(n).normalized();
    auto total = [&](double mu) {
        PatchParams p = PatchParams::standard(mu, lam, 0.5);
        SymTensorField h = patch_field(W, p);
        ErrorFieldSample s = error_fields(wf, h, p, bub, x);
        return std::fabs(s.A1 + s.A2);
    };
    double ratio = total(0.2) / total(0.1);
    double fitted = std::log2(ratio);
    REQUIRE(fitted > 1.8);
    REQUIRE(fitted < 2.2);
}

TEST_CASE("error norm is linear in the amplitude") {
    int n = 12;
    WeylForm W = seeded_weyl(n, 41);
    double lam = 0.02;
    BubbleParams bub{n, lam * 0.3 * Eigen::VectorXd::Unit(n, 0), lam * 0.35};
    auto norm_a1 = [&](double mu) {
        PatchParams p = PatchParams::standard(mu, lam, 0.5);
        SymTensorField h = patch_field(W, p);
        return error_norms(W, h, p, bub, RegionSpec::ball(n, 0.5), 4000, 7,
                           Importance{bub.eps, 3.5})
            .a1;
    };
    Estimate a = norm_a1(0.1);
    Estimate b = norm_a1(0.2);
    // Same sample stream, so the ratio is tight.
    REQUIRE(std::fabs(b.value / a.value - 2.0) < 0.05);
}

TEST_CASE("combined error norm recovers the eighth power in a high dimension") {
    // The lambda^8 regime of the combined error bound needs the near-field
    // contribution to dominate the norm, which holds once 2n(n-8)/(n+2)
    // exceeds n; n = 20 is comfortably inside, n = 12 is not.
    int n = 20;
    WeylForm W = seeded_weyl(n, 42);
    std::vector<double> lambdas = {0.04, 0.02};
    std::vector<double> norms;
    for (double lam : lambdas) {
        PatchParams p = PatchParams::standard(0.1, lam, 0.5);
        SymTensorField h = patch_field(W, p);
        BubbleParams bub{n, lam * 0.3 * Eigen::VectorXd::Unit(n, 0), lam * 0.45};
        ErrorNorms en = error_norms(W, h, p, bub, RegionSpec::ball(n, 0.5), 1500, 9,
                                    Importance{bub.eps, 3.5});
        norms.push_back(en.a1_a2.value);
    }
    double expo = fit_exponent(lambdas, norms);
    REQUIRE(expo > 7.0);
    REQUIRE(expo < 9.0);
}

TEST_CASE("quadratic energy basics") {
    int n = 12;
    WeylForm W = seeded_weyl(n, 43);
    BubbleParams bub{n, Eigen::VectorXd::Zero(n), 0.4};
    SymTensorField zero{n, [n](const Eigen::VectorXd&) { return TensorJet::zero(n); }};
    Estimate z = quadratic_energy(zero, bub, RegionSpec::ball(n, 1.0), 1000, 1);
    REQUIRE(z.value == 0.0);

    // Second term alone over the whole space with the Hbar field reproduces
    // the closed-form reduced energy.
    SymTensorField hb = hbar_tensor_field(W);
    EnergyTerms second_only{false, true};
    Estimate q = quadratic_energy(hb, bub, RegionSpec::full(n), 60000, 2,
                                  Importance{1.0, n - 9.0}, second_only);
    double ref = F0(n, W, bub.eps);
    REQUIRE(std::fabs(q.value - ref) <= 4.0 * q.std_err);
    REQUIRE(q.std_err < 0.05 * std::fabs(ref));
}

TEST_CASE("partial energy symmetry and sign structure") {
    int n = 12;
    WeylForm W = seeded_weyl(n, 44);
    Eigen::VectorXd xi = 0.1 * Eigen::VectorXd::Unit(n, 0);
    Estimate a = F_partial(W, xi, 0.4, 4000, 5, false);
    Estimate b = F_partial(W, Eigen::VectorXd(-xi), 0.4, 4000, 5, true);
    REQUIRE(std::fabs(a.value - b.value) <= 1e-12 * std::max(1.0, std::fabs(a.value)));

    // At xi = 0 the gradient term vanishes and F_partial matches F0.
    Estimate c = F_partial(W, Eigen::VectorXd::Zero(n), 0.4, 60000, 6, false);
    double ref = F0(n, W, 0.4);
    REQUIRE(std::fabs(c.value - ref) <= 4.0 * c.std_err);

    // The first term alone is a nonnegative integral.
    SymTensorField hb = hbar_tensor_field(W);
    BubbleParams bub{n, xi, 0.4};
    EnergyTerms first_only{true, false};
    Estimate f = quadratic_energy(hb, bub, RegionSpec::full(n), 20000, 7,
                                  Importance{1.0, n - 9.0}, first_only);
    REQUIRE(f.value >= 0.0);
}

TEST_CASE("exponent fitting") {
    std::vector<double> xs = {1.0, 2.0, 4.0, 8.0};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(3.0 * std::pow(x, 2.5));
    REQUIRE(std::fabs(fit_exponent(xs, ys) - 2.5) < 1e-12);
}
