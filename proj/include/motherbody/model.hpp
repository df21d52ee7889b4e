#pragma once
#include <array>
#include <string>
#include <vector>

namespace motherbody {

// External-field parameters.  The field is |z^2+a^2|^{cN} e^{-N|z|^2}: a
// pair of point charges of strength c sits at +-ia, and t fixes the droplet
// area pi*t.  Everything downstream assumes a^2 >= 2c and 0 < t < t_star.
struct ModelParams {
    double a = 0;
    double c = 0;
    double t = 0;
};

struct PhaseConstants {
    double t_star = 0;                 // end of the one-cut regime
    double t_c = 0;                    // droplet topology transition
    std::array<double, 6> quintic{};   // quintic[k] multiplies t^k
};

struct ValidationReport {
    bool accepted = true;
    std::vector<std::string> violations;
};

// t_c = a^2 + 2a sqrt(c) - c.  Accepts c = 0 (degenerate, no charges).
double compute_t_c(double a, double c);

// Coefficients of the quintic whose unique positive root is t_star.
std::array<double, 6> t_star_quintic(double a, double c);

// Unique positive root of the quintic, to relative tolerance tol.
double compute_t_star(double a, double c, double tol = 1e-12);

PhaseConstants phase_constants(double a, double c, double tol = 1e-12);

// Checks a,c,t > 0, the standing assumption a^2 >= 2c, and t < t_star.
ValidationReport validate(const ModelParams& params);

}
