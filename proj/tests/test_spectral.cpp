#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "motherbody/spectral.hpp"

using namespace motherbody;

static const SpectralCurve& reference_sc() {
    static SpectralCurve sc = make_spectral_curve(solve_map({2, 1, 0.1}));
    return sc;
}

// Residual of the cubic, normalized so the bound is meaningful both near the
// poles (|S| large) and far out (|z| large).
static double rel_residual(const SpectralCurve& sc, cplx S, cplx z) {
    double zs = 1 + std::abs(z), ss = 1 + std::abs(S);
    return std::abs(eval_P(sc, S, z)) / (zs * zs * zs * ss * ss * ss);
}

TEST_CASE("curve constants from the parametrization") {
    auto& sc = reference_sc();
    CHECK(sc.C1 == doctest::Approx(20.003078144770345).epsilon(1e-12));
    CHECK(sc.C2 == doctest::Approx(1.2118307299936442).epsilon(1e-12));
    CHECK(sc.C1_spread < 1e-10);
    CHECK(sc.C2_spread < 1e-10);
    double a = sc.par.a, c = sc.par.c;
    CHECK(sc.C1 > a * a * a * a + 4 * c * c);
    // b0 is defined by C2 = a^2 (t+2c) b0^2
    CHECK(sc.C2 == doctest::Approx(a * a * (sc.par.t + 2 * c) * sc.b0 * sc.b0).epsilon(1e-14));
}

TEST_CASE("branch values satisfy the cubic everywhere") {
    auto& sc = reference_sc();
    double a = sc.par.a;
    int tested = 0;
    for (int i = -7; i <= 7; ++i) {
        for (int j = -6; j <= 6; ++j) {
            cplx z(0.45 * i, 0.42 * j);
            if (std::abs(z) < 0.05) continue;
            if (std::abs(z - cplx(0, a)) < 0.2 || std::abs(z + cplx(0, a)) < 0.2) continue;
            auto S = eval_S_all(sc, z);
            for (auto& s : S) CHECK(rel_residual(sc, s, z) < 1e-10);
            ++tested;
        }
    }
    CHECK(tested > 150);
}

TEST_CASE("cubic coefficients match the symmetric expansion") {
    auto& sc = reference_sc();
    double a = sc.par.a, c = sc.par.c, t = sc.par.t;
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(-2, 2);
    for (int k = 0; k < 25; ++k) {
        cplx z(U(rng), U(rng)), S(U(rng), U(rng));
        auto co = cubic_in_S(sc, z);
        cplx via_coeffs = ((co[0] * S + co[1]) * S + co[2]) * S + co[3];
        cplx direct = z * z * z * S * S * S - (t + 4 * c) * z * z * S * S
                      + a * a * (z * S * S * S + z * z * z * S)
                      - a * a * (t + 2 * c) * (S * S + z * z) + sc.C1 * z * S - sc.C2;
        CHECK(std::abs(via_coeffs - direct) < 1e-11 * (1 + std::abs(direct)));
        CHECK(std::abs(eval_P(sc, S, z) - direct) < 1e-11 * (1 + std::abs(direct)));
    }
}

TEST_CASE("symmetric functions match the coefficient ratios") {
    auto& sc = reference_sc();
    double a = sc.par.a, c = sc.par.c, t = sc.par.t;
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> U(-2.5, 2.5);
    for (int k = 0; k < 20; ++k) {
        cplx z(U(rng), U(rng));
        if (std::abs(z) < 0.2) continue;
        if (std::abs(z * z + a * a) < 0.3) continue;
        auto e = symmetric_functions(sc, z);
        cplx den = z * (z * z + a * a);
        CHECK(std::abs(e[0] - ((t + 4 * c) * z * z + (t + 2 * c) * a * a) / den) < 1e-10);
        CHECK(std::abs(e[1] - (a * a * z * z + sc.C1) / (z * z + a * a)) < 1e-10);
        CHECK(std::abs(e[2] - ((t + 2 * c) * a * a * z * z + sc.C2) / den) < 1e-10);
    }
}

TEST_CASE("branch labels at infinity, both half planes") {
    auto& sc = reference_sc();
    double a = sc.par.a, c = sc.par.c, t = sc.par.t;
    for (double th : {0.3, 1.4, 2.8, -0.6, -2.2}) {
        cplx z = std::polar(1e5, th);
        auto S = eval_S_all(sc, z);
        CHECK(std::abs(z * S[0] - (t + 2 * c)) < 1e-6);
        // the ia terms flip sign across the real axis; the half-plane pieces
        // carry a genuine 1/z^2 term, hence the looser bound
        cplx ia = (z.imag() > 0) ? cplx(0, a) : cplx(0, -a);
        CHECK(std::abs(z * (S[1] - ia) - c) < 1e-4);
        CHECK(std::abs(z * (S[2] + ia) - c) < 1e-4);
    }
}

TEST_CASE("oddness and per-sheet reflection") {
    auto& sc = reference_sc();
    std::mt19937 rng(71);
    std::uniform_real_distribution<double> U(-2.5, 2.5);
    int tested = 0;
    for (int k = 0; k < 40; ++k) {
        cplx z(U(rng), U(rng));
        if (std::abs(z) < 0.2 || std::abs(z * z + 4.0) < 0.4) continue;
        auto S = eval_S_all(sc, z);
        auto Sm = eval_S_all(sc, -z);
        auto Sc = eval_S_all(sc, std::conj(z));
        for (int j = 0; j < 3; ++j) {
            double scale = 1 + std::abs(S[j]);
            CHECK(std::abs(Sm[j] + S[j]) < 1e-9 * scale);
            CHECK(std::abs(Sc[j] - std::conj(S[j])) < 1e-9 * scale);
        }
        ++tested;
    }
    CHECK(tested > 25);
}

TEST_CASE("scaling covariance of the whole curve") {
    // (a, c, t) -> (la, l^2 c, l^2 t) rescales the droplet by l, so branches
    // obey S'(l z) = l S(z) and every length-like quantity picks up one power.
    auto& sc = reference_sc();
    double l = 1.3;
    auto sc2 = make_spectral_curve(solve_map({2 * l, l * l, 0.1 * l * l}));
    CHECK(sc2.b0 == doctest::Approx(l * sc.b0).epsilon(1e-10));
    CHECK(sc2.b1 == doctest::Approx(l * sc.b1).epsilon(1e-10));
    CHECK(sc2.b2 == doctest::Approx(l * sc.b2).epsilon(1e-10));
    CHECK(sc2.x1_disc == doctest::Approx(l * sc.x1_disc).epsilon(1e-9));
    CHECK(sc2.x2_disc == doctest::Approx(l * sc.x2_disc).epsilon(1e-9));
    double l4 = l * l * l * l;
    CHECK(sc2.C1 == doctest::Approx(l4 * sc.C1).epsilon(1e-10));
    CHECK(sc2.C2 == doctest::Approx(l4 * l * l * sc.C2).epsilon(1e-10));
    for (cplx z : {cplx(0.9, 0.4), cplx(-0.3, 1.1), cplx(2.0, -0.7), cplx(0.05, 0.0)}) {
        auto S = eval_S_all(sc, z);
        auto S2 = eval_S_all(sc2, l * z);
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(S2[j] - l * S[j]) < 1e-9 * (1 + std::abs(S[j])));
    }
}

TEST_CASE("poles sit on the right sheets") {
    auto& sc = reference_sc();
    double a = sc.par.a, c = sc.par.c, t = sc.par.t;
    for (double th : {0.4, 2.1, -1.3}) {
        cplx z = cplx(0, a) + std::polar(1e-4, th);
        auto S = eval_S_all(sc, z);
        CHECK(std::abs(S[0] * (z - cplx(0, a)) - c) < 1e-2);  // simple pole, residue c
        CHECK(std::abs(S[1]) < 10);
        CHECK(std::abs(S[2]) < 10);

        cplx z0 = std::polar(1e-4, th);
        auto T = eval_S_all(sc, z0);
        CHECK(std::abs(T[2] * z0 - (t + 2 * c)) < 1e-3);  // third sheet, residue t+2c
        CHECK(std::abs(T[0]) < 10);  // first and second sheets stay bounded
        CHECK(std::abs(T[1]) < 10);
    }
    // reflection pole at -ia
    cplx zm = cplx(0, -a) + std::polar(1e-4, 0.7);
    auto Sm = eval_S_all(sc, zm);
    CHECK(std::abs(Sm[0] * (zm + cplx(0, a)) - c) < 1e-2);
}

TEST_CASE("imaginary-axis nodes") {
    auto& sc = reference_sc();
    double a = sc.par.a;
    CHECK(sc.b0 == doctest::Approx(0.3798230681442103).epsilon(1e-12));
    CHECK(sc.b1 == doctest::Approx(1.4452904740324397).epsilon(1e-10));
    CHECK(sc.b2 == doctest::Approx(2.4562887857362923).epsilon(1e-10));
    CHECK(sc.b0 < sc.b1);
    CHECK(sc.b1 < a);
    CHECK(a < sc.b2);

    // zS vanishes at ib0 on the first sheet
    CHECK(std::abs(eval_S_all(sc, cplx(0, sc.b0))[0]) < 1e-12);

    // at the nodes two branches collide; at nearby regular points they do not
    for (double b : {sc.b1, sc.b2}) {
        auto r = cubic_roots_at(sc, cplx(0, b));
        double dmin = 1e300;
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) dmin = std::min(dmin, std::abs(r[i] - r[j]));
        CHECK(dmin < 1e-5);
        auto rr = cubic_roots_at(sc, cplx(0, b + 0.1));
        double dreg = 1e300;
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) dreg = std::min(dreg, std::abs(rr[i] - rr[j]));
        CHECK(dreg > 1e-2);
    }

    // fixed-point property: the node at ib1 has S-value ib1, the one at ib2
    // has S-value -ib2.  Stated as double-root conditions on the cubic, which
    // stay sharp where a direct branch evaluation would sit in the collision
    // noise.
    auto dupl_residual = [&](cplx S, cplx z) {
        auto co = cubic_in_S(sc, z);
        cplx p = ((co[0] * S + co[1]) * S + co[2]) * S + co[3];
        cplx dp = (3.0 * co[0] * S + 2.0 * co[1]) * S + co[2];
        double scale = std::abs(co[0]) + std::abs(co[1]) + std::abs(co[2]) + std::abs(co[3]);
        return std::max(std::abs(p), std::abs(dp)) / scale;
    };
    CHECK(dupl_residual(cplx(0, sc.b1), cplx(0, sc.b1)) < 1e-10);
    CHECK(dupl_residual(cplx(0, -sc.b2), cplx(0, sc.b2)) < 1e-10);
    // direct evaluation agrees with the fixed point up to that noise
    auto Sb1 = eval_S_all(sc, cplx(0, sc.b1));
    CHECK(std::abs(Sb1[0] - cplx(0, sc.b1)) < 1e-5);
    CHECK(std::abs(Sb1[1] - cplx(0, sc.b1)) < 1e-5);
    auto Sb2 = eval_S_all(sc, cplx(0, sc.b2));
    CHECK(std::abs(Sb2[0] - cplx(0, -sc.b2)) < 1e-5);
    CHECK(std::abs(Sb2[2] - cplx(0, -sc.b2)) < 1e-5);

    // the bisection route agrees with the closed form / discriminant route
    auto nb = find_nodes(sc);
    CHECK(nb.b0 == doctest::Approx(sc.b0).epsilon(1e-8));
    CHECK(std::abs(nb.b1 - sc.b1) < 2e-6 * a);
    CHECK(std::abs(nb.b2 - sc.b2) < 2e-6 * a);
}

TEST_CASE("discriminant expansion and root pattern") {
    auto& sc = reference_sc();
    double a = sc.par.a;
    auto di = discriminant(sc);
    REQUIRE(di.coeffs.size() == 13);
    CHECK(di.coeffs[12] == doctest::Approx(-4 * std::pow(a, 6)).epsilon(1e-9));
    // odd coefficients vanish
    for (int k = 1; k < 13; k += 2) CHECK(std::abs(di.coeffs[k]) < 1e-9 * std::abs(di.coeffs[12]));

    REQUIRE(di.roots.size() == 8);
    int total = 0;
    for (size_t i = 0; i < di.roots.size(); ++i) total += di.multiplicity[i];
    CHECK(total == 12);

    // simple roots at +-x1, +-x2; double roots at +-i b1, +-i b2
    int simple_real = 0, double_imag = 0;
    for (size_t i = 0; i < di.roots.size(); ++i) {
        cplx r = di.roots[i];
        if (di.multiplicity[i] == 1) {
            CHECK(std::abs(r.imag()) < 1e-10);
            bool at_branch = std::abs(std::abs(r.real()) - sc.cd.x1) < 1e-8 ||
                             std::abs(std::abs(r.real()) - sc.cd.x2) < 1e-8;
            CHECK(at_branch);
            ++simple_real;
        } else {
            CHECK(di.multiplicity[i] == 2);
            CHECK(std::abs(r.real()) < 1e-10);
            bool at_node = std::abs(std::abs(r.imag()) - sc.b1) < 1e-8 ||
                           std::abs(std::abs(r.imag()) - sc.b2) < 1e-8;
            CHECK(at_node);
            ++double_imag;
        }
    }
    CHECK(simple_real == 4);
    CHECK(double_imag == 4);
    CHECK(sc.x1_disc == doctest::Approx(sc.cd.x1).epsilon(1e-10));
    CHECK(sc.x2_disc == doctest::Approx(sc.cd.x2).epsilon(1e-10));

    // branch points are collision points of the root triple
    for (double x : {sc.cd.x1, sc.cd.x2, -sc.cd.x1, -sc.cd.x2}) {
        auto r = cubic_roots_at(sc, cplx(x, 0));
        double dmin = 1e300;
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) dmin = std::min(dmin, std::abs(r[i] - r[j]));
        CHECK(dmin < 1e-5);
    }
}

TEST_CASE("cut boundary values and sheet gluing") {
    auto& sc = reference_sc();
    double x1 = sc.cd.x1, x2 = sc.cd.x2;

    // inner cut: S1 and S2 are conjugate lips, S3 crosses unharmed
    for (double x : {0.3 * x1, -0.8 * x1, 0.05}) {
        cplx S1p = eval_S(sc, {x, Sheet::one, Side::plus});
        cplx S1m = eval_S(sc, {x, Sheet::one, Side::minus});
        cplx S2p = eval_S(sc, {x, Sheet::two, Side::plus});
        cplx S2m = eval_S(sc, {x, Sheet::two, Side::minus});
        cplx S3p = eval_S(sc, {x, Sheet::three, Side::plus});
        cplx S3m = eval_S(sc, {x, Sheet::three, Side::minus});
        CHECK(S1p.imag() < 0);
        CHECK(std::abs(S1m - std::conj(S1p)) < 1e-14);
        CHECK(std::abs(S2p - S1m) == 0);  // crosswise gluing
        CHECK(std::abs(S2m - S1p) == 0);
        CHECK(std::abs(S3p - S3m) == 0);
        CHECK(std::abs(S3p.imag()) < 1e-12);

        // limits from the upper half plane agree with the plus lips
        auto S = eval_S_all(sc, cplx(x, 0));
        CHECK(std::abs(S[0] - S1p) < 1e-13);
        CHECK(std::abs(S[1] - S2p) < 1e-13);
        CHECK(std::abs(S[2] - S3p) < 1e-13);
        auto Seps = eval_S_all(sc, cplx(x, 1e-7));
        CHECK(std::abs(Seps[0] - S1p) < 1e-5);
    }

    // outer cut: S2 and S3 are conjugate lips, S1 crosses unharmed
    for (double x : {1.5 * x2, -2.0, 5.0}) {
        cplx S1p = eval_S(sc, {x, Sheet::one, Side::plus});
        cplx S2p = eval_S(sc, {x, Sheet::two, Side::plus});
        cplx S2m = eval_S(sc, {x, Sheet::two, Side::minus});
        cplx S3p = eval_S(sc, {x, Sheet::three, Side::plus});
        cplx S3m = eval_S(sc, {x, Sheet::three, Side::minus});
        CHECK(S2p.imag() > 0);
        CHECK(S3p.imag() < 0);
        CHECK(std::abs(S3m - S2p) == 0);  // crosswise gluing
        CHECK(std::abs(S2m - S3p) == 0);
        CHECK(std::abs(S1p.imag()) < 1e-12);
        auto S = eval_S_all(sc, cplx(x, 0));
        CHECK(std::abs(S[1] - S2p) < 1e-13);
        auto Seps = eval_S_all(sc, cplx(x, 1e-7));
        CHECK(std::abs(Seps[1] - S2p) < 1e-5);
    }

    // frozen lip sample on the inner cut
    cplx lip = eval_S(sc, {0.05, Sheet::one, Side::plus});
    CHECK(lip.real() == doctest::Approx(0.057900827399814274).epsilon(1e-11));
    CHECK(lip.imag() == doctest::Approx(-0.37899766314706707).epsilon(1e-11));

    // between x1 and x2 all three branches are real
    double xg = 0.5 * (x1 + x2);
    auto Sg = eval_S_all(sc, cplx(xg, 0));
    for (auto& s : Sg) CHECK(std::abs(s.imag()) < 1e-10);

    CHECK_THROWS_AS(eval_S(sc, {cplx(0.3, 0.2), Sheet::one, Side::plus}), std::invalid_argument);
    CHECK_THROWS_AS(eval_S(sc, {x1, Sheet::one, Side::plus}), numeric_error);
}

TEST_CASE("critical values and value counts of zS on the axis") {
    auto& sc = reference_sc();
    double t2c = sc.par.t + 2 * sc.par.c;
    double s1 = zS_crit_s1(sc);
    double s2 = zS_crit_s2(sc);
    CHECK(s1 == doctest::Approx(0.27772910865782158).epsilon(1e-9));
    CHECK(s2 == doctest::Approx(0.033290802132281777).epsilon(1e-9));
    CHECK(s2 > 0);
    CHECK(s2 < s1);
    CHECK(s1 < t2c);

    CHECK(zS_value_count(sc, -0.5) == 4);
    CHECK(zS_value_count(sc, t2c + 0.5) == 4);
    CHECK(zS_value_count(sc, 0.5 * s2) == 4);
}

TEST_CASE("frozen branch sample") {
    auto& sc = reference_sc();
    auto S = eval_S_all(sc, cplx(0.9, 0.4));
    CHECK(S[0].real() == doctest::Approx(0.49834159126501248).epsilon(1e-12));
    CHECK(S[0].imag() == doctest::Approx(0.061204401340530228).epsilon(1e-12));
    CHECK(S[1].real() == doctest::Approx(0.67099066395578144).epsilon(1e-12));
    CHECK(S[1].imag() == doctest::Approx(1.3911295225359122).epsilon(1e-12));
    CHECK(S[2].real() == doctest::Approx(1.1831699689365509).epsilon(1e-12));
    CHECK(S[2].imag() == doctest::Approx(-2.2088326609014928).epsilon(1e-12));
}

TEST_CASE("degenerate arguments are rejected") {
    auto& sc = reference_sc();
    CHECK_THROWS_AS(cubic_roots_at(sc, cplx(0, 0)), std::domain_error);
    CHECK_THROWS_AS(cubic_roots_at(sc, cplx(0, sc.par.a)), std::domain_error);
    CHECK_THROWS_AS(cubic_roots_at(sc, cplx(0, -sc.par.a)), std::domain_error);
}

TEST_CASE("second parameter set behaves the same") {
    auto sc = make_spectral_curve(solve_map({3, 2, 0.2}));
    double a = 3, c = 2, t = 0.2;
    CHECK(sc.C1 > a * a * a * a + 4 * c * c);
    CHECK(sc.C1_spread < 1e-8);
    CHECK(sc.b0 < sc.b1);
    CHECK(sc.b1 < a);
    CHECK(a < sc.b2);
    CHECK(std::abs(eval_S_all(sc, cplx(0, sc.b0))[0]) < 1e-11);
    for (cplx z : {cplx(1.2, 0.5), cplx(-0.4, 2.0), cplx(0.3, -1.0)}) {
        auto S = eval_S_all(sc, z);
        for (auto& s : S) CHECK(rel_residual(sc, s, z) < 1e-10);
        cplx e1 = S[0] + S[1] + S[2];
        cplx den = z * (z * z + a * a);
        CHECK(std::abs(e1 - ((t + 4 * c) * z * z + (t + 2 * c) * a * a) / den) < 1e-9);
    }
    auto nb = find_nodes(sc);
    CHECK(nb.b0 == doctest::Approx(sc.b0).epsilon(1e-8));
    CHECK(std::abs(nb.b1 - sc.b1) < 2e-6 * a);
    CHECK(std::abs(nb.b2 - sc.b2) < 2e-6 * a);
}
