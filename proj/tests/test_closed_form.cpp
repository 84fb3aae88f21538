#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "ybl/closed_form.hpp"
#include "ybl/rational.hpp"

using namespace ybl;

TEST_CASE("radial integral closed values") {
    REQUIRE(std::fabs(radial_integral(2.0, 1.0) - 0.5) < 1e-14);
    REQUIRE(std::fabs(radial_integral(2.0, 0.0) - M_PI / 4.0) < 1e-14);
    REQUIRE_THROWS_AS(radial_integral(1.0, 2.0), Divergent);
    REQUIRE_THROWS_AS(radial_integral(3.0, -1.0), Divergent);
}

TEST_CASE("radial recurrences on random parameters") {
    BlockRng rng(2024, 0);
    for (int s = 0; s < 100; ++s) {
        double alpha = 2.0 + 28.0 * rng.uniform();
        double hi = 2.0 * alpha - 5.1;
        if (hi <= 0.0) continue;
        double beta = hi * rng.uniform();
        RecurrenceRatios r = radial_recurrences_check(alpha, beta);
        REQUIRE(std::fabs(r.lower_alpha - 1.0) < 1e-12);
        REQUIRE(std::fabs(r.raise_beta - 1.0) < 1e-12);
    }
    REQUIRE_THROWS_AS(radial_recurrences_check(2.0, 1.5), Divergent);
}

TEST_CASE("sphere moments") {
    for (int n : {3, 5, 8}) {
        double area = sphere_area(n);
        REQUIRE(std::fabs(sphere_moment(n, {0}) - 0.0) < 1e-15);
        REQUIRE(std::fabs(sphere_moment(n, {0, 0}) - area / n) < 1e-12);
        REQUIRE(std::fabs(sphere_moment(n, {0, 1}) - 0.0) < 1e-15);
        REQUIRE(std::fabs(sphere_moment(n, {0, 0, 0, 0}) - 3.0 * area / (n * (n + 2.0))) <
                1e-12);
        REQUIRE(std::fabs(sphere_moment(n, {0, 0, 1, 1}) - area / (n * (n + 2.0))) < 1e-12);
        REQUIRE(std::fabs(sphere_moment(n, {0, 0, 0, 0, 0, 0}) -
                          15.0 * area / (n * (n + 2.0) * (n + 4.0))) < 1e-12);
        REQUIRE(std::fabs(sphere_moment(n, {0, 0, 1, 1, 2, 2}) -
                          area / (n * (n + 2.0) * (n + 4.0))) < 1e-12);
    }
    REQUIRE_THROWS_AS(sphere_moment(4, {0, 0, 0, 0, 0, 0, 0, 0}), UnsupportedDegree);
}

TEST_CASE("moments agree with Laplacian reduction on all low monomials") {
    for (int n = 3; n <= 8; ++n) {
        for (int a = 0; a <= 6; ++a)
            for (int b = 0; a + b <= 6; ++b)
                for (int c = 0; a + b + c <= 6; ++c) {
                    std::vector<int> idx;
                    for (int i = 0; i < a; ++i) idx.push_back(0);
                    for (int i = 0; i < b; ++i) idx.push_back(1);
                    for (int i = 0; i < c; ++i) idx.push_back(2);
                    Polynomial p;
                    p.n = n;
                    Polynomial::Mono m;
                    m.exps.assign(n, 0);
                    m.exps[0] = a;
                    m.exps[1] = b;
                    m.exps[2] = c;
                    m.coeff = 1.0;
                    p.terms = {m};
                    double u = sphere_moment(n, idx);
                    double v = homogeneous_sphere_integral(p);
                    REQUIRE(std::fabs(u - v) <= 1e-12 * std::max(1.0, std::fabs(u)));
                }
    }
}

TEST_CASE("surface identity closed forms are mutually consistent") {
    int n = 6;
    WeylForm W = seeded_weyl(n, 3);
    WeylScalars s = make_weyl_scalars(W);
    for (double r : {0.5, 1.0, 2.0}) {
        // Contracting the pq identity reproduces the total-derivative identity
        // with an extra factor r^2.
        double trace_sum = 0.0;
        for (int p = 0; p < n; ++p) trace_sum += identity_rhs(IdentityKind::grad_Hbar, n, s, r, p, p);
        double total = identity_rhs(IdentityKind::grad_Hbar_total, n, s, r, 0, 0);
        REQUIRE(std::fabs(trace_sum - r * r * total) < 1e-10 * std::fabs(trace_sum));
    }
    // On the unit sphere the Hbar gradient reduces to -2 x H, so its second
    // moment is 4 times the H^2 moment (the bracket does not vanish there:
    // its value is 4/(n+4) on the M part and 2/(n+4) on the trace part).
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            double lhs = identity_rhs(IdentityKind::grad_Hbar, n, s, 1.0, p, q);
            double rhs = 4.0 * identity_rhs(IdentityKind::H_sq, n, s, 1.0, p, q);
            REQUIRE(std::fabs(lhs - rhs) <= 1e-11 * std::max(1.0, std::fabs(rhs)));
        }
    // Explicit bracket values at r = 1.
    double bm = 1.0 - 2.0 * (n + 8.0) / (n + 4.0) + (n + 16.0) / (n + 4.0);
    REQUIRE(std::fabs(bm - 4.0 / (n + 4.0)) < 1e-14);
    double bd = 1.0 - 2.0 * (n + 6.0) / (n + 4.0) + (n + 10.0) / (n + 4.0);
    REQUIRE(std::fabs(bd - 2.0 / (n + 4.0)) < 1e-14);
    // Pair identity vanishes on the unit sphere.
    REQUIRE(identity_rhs(IdentityKind::Hbar_pair, n, s, 1.0, 0, 0) == 0.0);
}

TEST_CASE("surface identities against Monte-Carlo") {
    int n = 6;
    WeylForm W = seeded_weyl(n, 3);
    std::vector<IdentityRequest> reqs = {{IdentityKind::grad_H, 0.7},
                                         {IdentityKind::H_sq, 0.7},
                                         {IdentityKind::grad_Hbar, 0.7},
                                         {IdentityKind::grad_Hbar_total, 0.7},
                                         {IdentityKind::Hbar_pair, 0.7}};
    std::vector<Estimate> lhs = identity_lhs_mc(W, reqs, 0, 1, 40000, 11);
    for (size_t i = 0; i < reqs.size(); ++i) {
        double rhs = identity_rhs(reqs[i].kind, W, 0.7, 0, 1);
        REQUIRE(std::fabs(lhs[i].value - rhs) <= 4.0 * lhs[i].std_err + 1e-12);
    }
}

TEST_CASE("discriminant and critical point") {
    REQUIRE_THROWS_AS(discriminant(10), DimensionTooSmall);
    Rat d52 = discriminant_rat(52);
    REQUIRE((d52 == Rat(1, 49)));
    REQUIRE(std::fabs(eps_star(52) - std::sqrt(0.5)) < 1e-14);
    for (int n : {11, 20, 35, 51}) REQUIRE_THROWS_AS(eps_star(n), NoRealCriticalPoint);
    REQUIRE(std::fabs(f0_bracket(52, eps_star(52)) - 1.0 / 28.0) < 1e-14);
    REQUIRE(std::fabs(f0_bracket_d2(52, eps_star(52)) + 2.0 / 7.0) < 1e-13);
    REQUIRE(std::fabs(f0_bracket_d1(52, eps_star(52))) < 1e-14);
}

TEST_CASE("reduced energy derivatives match finite differences") {
    int n = 52;
    WeylForm W = seeded_weyl(n, 1);
    double es = eps_star(n);
    REQUIRE(F0(n, W, es) < 0.0);
    REQUIRE(std::fabs(dF0_deps(n, W, es)) < 1e-10 * std::fabs(F0(n, W, es)));
    REQUIRE(d2F0_deps2(n, W, es) > 0.0);
    double step = 1e-5;
    for (double eps : {0.5, es, 0.72}) {
        double fd1 = (F0(n, W, eps + step) - F0(n, W, eps - step)) / (2.0 * step);
        REQUIRE(std::fabs(fd1 - dF0_deps(n, W, eps)) <
                1e-6 * std::max(1.0, std::fabs(fd1)));
        double fd2 = (F0(n, W, eps + step) - 2.0 * F0(n, W, eps) + F0(n, W, eps - step)) /
                     (step * step);
        REQUIRE(std::fabs(fd2 - d2F0_deps2(n, W, eps)) <
                1e-4 * std::max(1.0, std::fabs(fd2)));
    }
}

TEST_CASE("center Hessian closed form") {
    int n = 52;
    double es = eps_star(n);
    REQUIRE(std::fabs(hessian_bracket1(n, es) - 1.0 / 352.0) < 1e-14);
    REQUIRE(std::fabs(hessian_bracket2(n, es) - 29.0 / 352.0) < 1e-14);
    REQUIRE_THROWS_AS(hessian_c1(8), DimensionTooSmall);
    // Trace identity ties the matrix to the scalar invariants.
    int m = 12;
    WeylForm W = seeded_weyl(m, 2);
    WeylScalars s = make_weyl_scalars(W);
    double eps = 0.4;
    Eigen::MatrixXd h = hessian_xi_closed(m, s, eps);
    double tr = hessian_c1(m) * hessian_radial(m) *
                (s.M.trace() * hessian_bracket1(m, eps) +
                 0.25 * m * s.norm * hessian_bracket2(m, eps));
    REQUIRE(std::fabs(h.trace() - tr) < 1e-12 * std::fabs(tr));
    REQUIRE((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("certification across the threshold") {
    CriticalPointReport r11 = certify_dimension(11, nullptr);
    REQUIRE(!r11.eps_star.has_value());
    REQUIRE(!r11.certified_min);
    CriticalPointReport r51 = certify_dimension(51, nullptr);
    REQUIRE(!r51.certified_min);
    CriticalPointReport r52 = certify_dimension(52, nullptr);
    REQUIRE(r52.certified_min);
    REQUIRE(r52.in_omega);
    REQUIRE(r52.sharp_threshold_inequality);
    REQUIRE(r52.F_at_star < 0.0);
    REQUIRE(r52.d2F_deps2 > 0.0);
    REQUIRE(r52.hessian_eigen_min > 0.0);

    WeylForm W = seeded_weyl(52, 7);
    CriticalPointReport rw = certify_minimum(52, W);
    REQUIRE(rw.certified_min);
    REQUIRE(rw.hessian_eigen_min >= r52.hessian_eigen_min * weyl_quadratic_norm(W) * 0.999);

    WeylForm zero;
    zero.n = 52;
    zero.w = Tensor4(52);
    REQUIRE_THROWS_AS(certify_minimum(52, zero), std::invalid_argument);
}

TEST_CASE("dimension scan and csv") {
    REQUIRE_THROWS_AS(dimension_scan(10, 20), std::invalid_argument);
    REQUIRE_THROWS_AS(dimension_scan(20, 19), std::invalid_argument);
    std::vector<CriticalPointReport> reps = dimension_scan(50, 54);
    REQUIRE(first_certified(reps).value() == 52);
    std::string csv = scan_csv(reps);
    REQUIRE(csv.rfind("n,discriminant,eps_star,F_at_star,d2F,bracket1,bracket2,eig_min,certified\n",
                      0) == 0);
    // 50 and 51 have no real critical point: empty fields, certified 0.
    REQUIRE(csv.find("\n50,") != std::string::npos);
    REQUIRE(csv.find(",,,,,,0\n") != std::string::npos);
    std::vector<CriticalPointReport> low = dimension_scan(11, 51);
    REQUIRE(!first_certified(low).has_value());
}

TEST_CASE("reduced energy quadrature cross-check") {
    int n = 12;
    WeylForm W = seeded_weyl(n, 5);
    std::vector<double> eps = {0.45, 0.6};
    std::vector<Estimate> q = f0_quadrature(n, W, eps, 60000, 17);
    for (size_t i = 0; i < eps.size(); ++i) {
        double ref = F0(n, W, eps[i]);
        REQUIRE(std::fabs(q[i].value - ref) <= 4.0 * q[i].std_err);
        REQUIRE(q[i].std_err < 0.02 * std::fabs(ref));
    }
}

TEST_CASE("hessian integral representation agrees at modest budget") {
    int n = 12;
    WeylForm W = seeded_weyl(n, 5);
    OracleConfig cfg;
    cfg.samples = 60000;
    cfg.seed = 23;
    MatrixEstimate est = hessian_xi_integral(n, W, 0.4, cfg);
    Eigen::MatrixXd closed = hessian_xi_closed(n, W, 0.4);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            REQUIRE(std::fabs(est.value(p, q) - closed(p, q)) <=
                    4.0 * est.std_err(p, q) + 1e-12);
    OracleConfig strict = cfg;
    strict.samples = 64;
    strict.max_entry_std_err = 1e-12;
    REQUIRE_THROWS_AS(hessian_xi_integral(n, W, 0.4, strict), OracleBudgetExceeded);
}

TEST_CASE("rational arithmetic basics") {
    Rat a(1, 3), b(1, 6);
    REQUIRE(((a + b) == Rat(1, 2)));
    REQUIRE(((a - b) == b));
    REQUIRE(((a * b) == Rat(1, 18)));
    REQUIRE(((a / b) == Rat(2)));
    REQUIRE((Rat(-2, -4) == Rat(1, 2)));
    REQUIRE(Rat(-1, 2).sign() == -1);
    REQUIRE_THROWS(a / Rat(0));
    REQUIRE((a < Rat(1, 2)));
}
