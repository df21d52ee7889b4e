#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "motherbody/model.hpp"
#include "motherbody/numerics.hpp"

using namespace motherbody;

static double quintic_at(const std::array<double, 6>& q, double t) {
    double v = 0;
    for (int k = 5; k >= 0; --k) v = v * t + q[k];
    return v;
}

TEST_CASE("critical area t_c") {
    CHECK(compute_t_c(2, 1) == doctest::Approx(7.0).epsilon(1e-15));
    CHECK(compute_t_c(std::sqrt(2.0), 1) == doctest::Approx(1.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(compute_t_c(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(compute_t_c(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(compute_t_c(-1, 1), std::invalid_argument);
}

TEST_CASE("quintic coefficients and sign at zero") {
    auto q = t_star_quintic(2, 1);
    CHECK(quintic_at(q, 0) == doctest::Approx(-673.0).epsilon(1e-15));
    CHECK(q[5] == 36.0);
    CHECK(q[4] == 207.0);
    // constant term stays negative everywhere in the admissible cone
    for (double a : {1.5, 2.0, 3.0, 5.0}) {
        double c = a * a / 2.0;  // boundary of a^2 >= 2c
        auto qq = t_star_quintic(a, c);
        CHECK(qq[0] < 0);
    }
}

TEST_CASE("t_star is the unique positive quintic root") {
    double ts = compute_t_star(2, 1);
    auto q = t_star_quintic(2, 1);
    CHECK(std::abs(quintic_at(q, ts)) < 1e-6 * std::abs(q[0]));
    CHECK(ts > 0);
    CHECK(ts < compute_t_c(2, 1));
    double bound = (2.0 + std::sqrt(2.0)) * (2.0 + std::sqrt(2.0));
    CHECK(ts <= bound);

    // frozen regression value (bisection + Newton, tol 1e-12)
    CHECK(ts == doctest::Approx(0.19113734702429913).epsilon(1e-10));

    // exactly one sign change on a dense geometric scan
    int changes = 0;
    double prev = quintic_at(q, 1e-8);
    for (double t = 1e-8; t < 100.0; t *= 1.05) {
        double v = quintic_at(q, t);
        if (prev < 0 && v >= 0) ++changes;
        if (prev > 0 && v <= 0) ++changes;
        prev = v;
    }
    CHECK(changes == 1);
}

TEST_CASE("t_star scaling covariance") {
    double base = compute_t_star(2, 1);
    for (double lam : {0.5, 2.0, 3.0}) {
        double scaled = compute_t_star(lam * 2, lam * lam * 1);
        CHECK(scaled == doctest::Approx(lam * lam * base).epsilon(1e-10));
    }
}

TEST_CASE("t_star for other admissible pairs") {
    for (auto [a, c] : {std::pair{std::sqrt(2.0), 1.0}, {3.0, 2.0}, {2.0, 2.0}}) {
        double ts = compute_t_star(a, c);
        double tc = compute_t_c(a, c);
        CHECK(ts > 0);
        CHECK(ts < tc);
        auto q = t_star_quintic(a, c);
        CHECK(std::abs(quintic_at(q, ts)) < 1e-8 * std::abs(q[0]));
    }
}

TEST_CASE("validation verdicts") {
    CHECK(validate({2, 1, 0.1}).accepted);
    CHECK(validate({2, 1, 0.125}).accepted);
    CHECK(validate({3, 2, 0.4}).accepted);
    CHECK(!validate({std::sqrt(2.0), 1, 0.1}).accepted);  // t_star ~ 0.0839 there

    auto r1 = validate({1, 1, 0.1});
    CHECK(!r1.accepted);
    REQUIRE(r1.violations.size() > 0);
    CHECK(r1.violations[0].find("a^2") != std::string::npos);

    auto r2 = validate({2, 1, -1});
    CHECK(!r2.accepted);

    auto r3 = validate({2, 1, 5.0});  // above t_star but below t_c
    CHECK(!r3.accepted);
    CHECK(r3.violations[0].find("t_star") != std::string::npos);

    auto r4 = validate({0, 1, 0.1});
    CHECK(!r4.accepted);
}
