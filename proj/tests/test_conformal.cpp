#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "motherbody/conformal.hpp"
#include "motherbody/model.hpp"

using namespace motherbody;

static ConformalData reference_cd() { return solve_map({2, 1, 0.1}); }

TEST_CASE("solve_map regression triple and residuals") {
    auto cd = reference_cd();
    CHECK(cd.residual < 1e-13);
    CHECK(cd.rho == doctest::Approx(0.36014822066398949).epsilon(1e-12));
    CHECK(cd.kappa == doctest::Approx(0.086050366646458445).epsilon(1e-12));
    CHECK(cd.alpha == doctest::Approx(0.17736444381425717).epsilon(1e-12));
    CHECK(cd.alpha > 0);
    CHECK(cd.alpha < 1);
    CHECK(cd.rho >= std::sqrt(0.1));  // sqrt(t) <= rho
}

TEST_CASE("solve_map across the test matrix, also beyond t_star") {
    for (auto [a, c, t] : {std::tuple{2.0, 1.0, 0.1},
                           {2.0, 1.0, 0.5},
                           {2.0, 1.0, 2.0},
                           {std::sqrt(2.0), 1.0, 0.1},
                           {3.0, 2.0, 0.5}}) {
        auto cd = solve_map({a, c, t});
        auto r = map_equations_residual(cd.par, cd.rho, cd.kappa, cd.alpha);
        double norm = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
        CHECK(norm < 1e-12);
        CHECK(cd.rho >= std::sqrt(t) * (1 - 1e-12));
        CHECK(cd.rho <= a + std::sqrt(2 * c) + 1e-12);
    }
}

TEST_CASE("solve_map rejects bad parameters") {
    CHECK_THROWS_AS(solve_map({1, 1, 0.1}), std::invalid_argument);   // a^2 < 2c
    CHECK_THROWS_AS(solve_map({2, 1, -0.1}), std::invalid_argument);  // t <= 0
    CHECK_THROWS_AS(solve_map({2, 1, 7.5}), std::invalid_argument);   // t >= t_c
}

TEST_CASE("small-t seed consistency") {
    double t = 1e-6;
    auto cd = solve_map({2, 1, t});
    CHECK(cd.rho == doctest::Approx(std::sqrt(t)).epsilon(1e-3));
    CHECK(cd.alpha == doctest::Approx(std::sqrt(t) / 2).epsilon(1e-3));
    CHECK(cd.kappa == doctest::Approx(std::sqrt(t) / 4).epsilon(1e-3));
}

TEST_CASE("critical points") {
    auto cd = reference_cd();
    auto cp = critical_points(cd);
    CHECK(cp.w2 < cp.w1);
    CHECK(cp.w1 < 1);
    CHECK(cp.w2 > 0);
    CHECK(cp.x1 < cp.x2);
    CHECK(std::abs(eval_f_prime(cd, cp.w1)) < 1e-12);
    CHECK(std::abs(eval_f_prime(cd, cp.w2)) < 1e-12);
    CHECK(cp.x1 == doctest::Approx(0.47982997885728917).epsilon(1e-12));
    CHECK(cp.x2 == doctest::Approx(0.55397914160877293).epsilon(1e-12));

    // beyond t_star the critical points stop being real
    auto cd2 = solve_map({2, 1, 0.5});
    CHECK_THROWS_AS(critical_points(cd2), std::domain_error);
}

TEST_CASE("x1, x2 increase with t and the gap closes at t_star") {
    double ts = compute_t_star(2, 1);
    double prev_x1 = 0, prev_x2 = 0, prev_gap = 1e300;
    for (double frac : {0.05, 0.25, 0.5, 0.75, 0.95}) {
        auto cp = critical_points(solve_map({2, 1, frac * ts}));
        CHECK(cp.x1 > prev_x1);
        CHECK(cp.x2 > prev_x2);
        CHECK(cp.x2 - cp.x1 < prev_gap);
        prev_x1 = cp.x1;
        prev_x2 = cp.x2;
        prev_gap = cp.x2 - cp.x1;
    }
    auto cp = critical_points(solve_map({2, 1, ts * (1 - 1e-4)}));
    CHECK(cp.x2 - cp.x1 < 1e-3 * cp.x2);
}

TEST_CASE("f is odd and decays to rho*w") {
    auto cd = reference_cd();
    std::mt19937 rng(91);
    std::uniform_real_distribution<double> U(-3, 3);
    for (int k = 0; k < 20; ++k) {
        cplx w(U(rng), U(rng));
        if (std::abs(w * w + cd.alpha * cd.alpha) < 1e-3) continue;
        CHECK(std::abs(eval_f(cd, -w) + eval_f(cd, w)) < 1e-14);
    }
    cplx wbig(700.0, 400.0);
    CHECK(std::abs(eval_f(cd, wbig) - cd.rho * wbig) < 1e-3);
    // f(i(1/alpha + eps)) approaches ia
    cplx near_pole = eval_f(cd, cplx(0, 1.0 / cd.alpha + 1e-7));
    CHECK(std::abs(near_pole - cplx(0, 2.0)) < 1e-5);
    CHECK_THROWS_AS(eval_f(cd, cplx(0, cd.alpha)), std::domain_error);
}

TEST_CASE("F1 inverse round trips") {
    auto cd = reference_cd();
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int k = 0; k < 50; ++k) {
        cplx w = std::polar(1.05 + 2.0 * (U(rng) + 1), M_PI * U(rng));
        cplx z = eval_f(cd, w);
        CHECK(std::abs(eval_F1(cd, z) - w) < 1e-10 * std::abs(w));
    }
    for (int k = 0; k < 100; ++k) {
        cplx z = std::polar(0.7 + 2.5 * (U(rng) + 1) / 2, M_PI * U(rng));
        if (z.imag() == 0 && std::abs(z.real()) <= cd.x1) continue;
        CHECK(std::abs(eval_f(cd, eval_F1(cd, z)) - z) < 1e-10);
    }
}

TEST_CASE("F1 at the outer critical value") {
    auto cd = reference_cd();
    // at z = x2 the cubic has a double root at w2; the exterior branch is the
    // simple root beyond w1, and stays continuous through x2
    cplx wx2 = eval_F1(cd, cd.x2);
    CHECK(wx2.imag() == doctest::Approx(0.0));
    CHECK(wx2.real() > cd.w1);
    CHECK(std::abs(eval_f(cd, wx2) - cd.x2) < 1e-12);
    cplx wx2eps = eval_F1(cd, cd.x2 + 1e-7);
    CHECK(std::abs(wx2eps - wx2) < 1e-4);
    // the other two preimages at x2 collide at w2
    auto pre = f_preimages(cd, cd.x2);
    int near_w2 = 0;
    for (auto& w : pre)
        if (std::abs(w - cd.w2) < 1e-5) ++near_w2;
    CHECK(near_w2 == 2);
}

TEST_CASE("F1 throws on the cut") {
    auto cd = reference_cd();
    CHECK_THROWS_AS(eval_F1(cd, cplx(0.3, 0)), std::domain_error);
    CHECK_THROWS_AS(eval_F1(cd, cplx(0, 0)), std::domain_error);
    CHECK_THROWS_AS(eval_F1(cd, cplx(-cd.x1, 0)), std::domain_error);
}

TEST_CASE("rho * F1' tends to 1 far out") {
    auto cd = reference_cd();
    cplx z = 1e3 * cd.x2;
    CHECK(std::abs(cd.rho * eval_F1_prime(cd, z) - 1.0) < 1e-5);
}

TEST_CASE("boundary samples, area, harmonic moments") {
    auto cd = reference_cd();
    auto db = droplet_boundary(cd, 256);
    CHECK(db.area == doctest::Approx(M_PI * 0.1).epsilon(1e-10));
    for (int k = 1; k <= 8; ++k)
        CHECK(std::abs(db.harmonic_moments[k - 1] - harmonic_moment_closed_form(cd.par, k)) < 1e-6);
    CHECK(harmonic_moment_closed_form(cd.par, 2) == doctest::Approx(0.5));
    // symmetry f(e^{i(pi-theta)}) = -conj(f(e^{itheta}))
    for (int j = 0; j < 32; ++j) {
        double th = 2 * M_PI * j / 97.0;
        cplx z1 = eval_f(cd, std::polar(1.0, M_PI - th));
        cplx z2 = eval_f(cd, std::polar(1.0, th));
        CHECK(std::abs(z1 + std::conj(z2)) < 1e-13);
    }
}

TEST_CASE("schwarz function via the parametrization") {
    auto cd = reference_cd();
    auto S1 = [&](cplx z) { return eval_f(cd, 1.0 / eval_F1(cd, z)); };
    CHECK(schwarz_check(cd, S1, 256) < 1e-10);
}

TEST_CASE("obstacle-problem quadrature check without mother body") {
    auto cd = reference_cd();
    auto rep = droplet_potential_check(cd, {}, 1024, 1024);
    CHECK(rep.cells_used >= 100000);
    CHECK(rep.interior_stddev < 1e-4);
    CHECK(rep.exterior_min_excess > -1e-4);  // quadrature slack; true excess >= 0
}
