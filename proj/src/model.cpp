#include "motherbody/model.hpp"

#include <cmath>
#include <sstream>

#include "motherbody/numerics.hpp"

namespace motherbody {

double compute_t_c(double a, double c) {
    if (a <= 0 || c < 0) throw std::invalid_argument("compute_t_c: need a > 0 and c >= 0");
    return a * a + 2.0 * a * std::sqrt(c) - c;
}

std::array<double, 6> t_star_quintic(double a, double c) {
    if (a <= 0 || c <= 0) throw std::invalid_argument("t_star_quintic: need a > 0 and c > 0");
    double a4 = a * a * a * a;
    double a8 = a4 * a4;
    double c2 = c * c;
    double c4 = c2 * c2;
    return {
        -c * (a8 + 30.0 * a4 * c2 - 63.0 * c4),
        4.0 * a8 + 108.0 * a4 * c2 + 288.0 * c4,
        c * (114.0 * a4 + 522.0 * c2),
        24.0 * a4 + 468.0 * c2,
        207.0 * c,
        36.0,
    };
}

static double quintic_value(const std::array<double, 6>& q, double t) {
    double v = 0;
    for (int k = 5; k >= 0; --k) v = v * t + q[k];
    return v;
}

double compute_t_star(double a, double c, double tol) {
    auto q = t_star_quintic(a, c);
    // All t^1..t^5 coefficients are positive, so the quintic is increasing on
    // (0,inf) once positive and has a single sign change there.  An upper
    // bound for the root is (a + sqrt(2c))^2.
    double hi = (a + std::sqrt(2.0 * c)) * (a + std::sqrt(2.0 * c));
    if (quintic_value(q, hi) < 0) {
        // only possible outside the standing assumption a^2 >= 2c; widen
        while (quintic_value(q, hi) < 0 && hi < 1e12) hi *= 2.0;
        if (quintic_value(q, hi) < 0) throw numeric_error("compute_t_star: no sign change found");
    }
    double lo = 0;
    if (quintic_value(q, lo) >= 0) throw numeric_error("compute_t_star: quintic not negative at t = 0");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (quintic_value(q, mid) < 0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < tol * hi) break;
    }
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it) {
        double f = quintic_value(q, t);
        double df = 0;
        for (int k = 5; k >= 1; --k) df = df * t + k * q[k];
        if (df == 0) break;
        double step = f / df;
        double tn = t - step;
        if (tn <= lo || tn >= hi) break;
        t = tn;
        if (std::abs(step) < tol * t) break;
    }
    return t;
}

PhaseConstants phase_constants(double a, double c, double tol) {
    PhaseConstants pc;
    pc.t_c = compute_t_c(a, c);
    pc.quintic = t_star_quintic(a, c);
    pc.t_star = compute_t_star(a, c, tol);
    return pc;
}

ValidationReport validate(const ModelParams& p) {
    ValidationReport rep;
    auto reject = [&](const std::string& why) {
        rep.accepted = false;
        rep.violations.push_back(why);
    };
    if (!(p.a > 0)) reject("a must be positive");
    if (!(p.c > 0)) reject("c must be positive");
    if (!(p.t > 0)) reject("t must be positive");
    if (p.a > 0 && p.c > 0 && p.a * p.a < 2.0 * p.c) {
        std::ostringstream os;
        os << "a^2 < 2c violates the standing assumption (a^2 = " << p.a * p.a
           << ", 2c = " << 2.0 * p.c << ")";
        reject(os.str());
    }
    if (rep.accepted) {
        double ts = compute_t_star(p.a, p.c);
        if (p.t >= ts) {
            std::ostringstream os;
            os << "t = " << p.t << " is not below t_star = " << ts;
            reject(os.str());
        }
    }
    return rep;
}

}
