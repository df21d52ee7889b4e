#pragma once
#include <array>
#include <functional>
#include <vector>

#include "motherbody/model.hpp"
#include "motherbody/numerics.hpp"

namespace motherbody {

// Exterior conformal map f(w) = rho*w + 2*kappa*w/(w^2 + alpha^2) taking
// |w| > 1 onto the complement of the droplet.  w1, w2 are the critical
// radii of f (zeros of f' on the positive axis, 0 < w2 < w1 < 1) and
// x1 = f(w1) < x2 = f(w2) are the critical values; they exist only while
// t < t_star and are NaN otherwise.
struct ConformalData {
    ModelParams par;
    double rho = 0;
    double kappa = 0;
    double alpha = 0;
    double w1 = 0, w2 = 0;
    double x1 = 0, x2 = 0;
    double residual = 0;
};

struct CriticalPoints {
    double w1 = 0, w2 = 0;
    double x1 = 0, x2 = 0;
};

// Damped Newton on (rho, alpha) with kappa eliminated and continuation in t.
// Requires a,c > 0, a^2 >= 2c and 0 < t < t_c (the map exists on the whole
// simply connected range, also beyond t_star).
ConformalData solve_map(const ModelParams& par, double tol = 1e-13);

// Residual vector of the three parameter equations at (rho, kappa, alpha).
std::array<double, 3> map_equations_residual(const ModelParams& par, double rho,
                                             double kappa, double alpha);

cplx eval_f(const ConformalData& cd, cplx w);
cplx eval_f_prime(const ConformalData& cd, cplx w);

// The three roots of the inverse cubic rho*w^3 - z*w^2 +
// (rho*alpha^2 + 2*kappa)*w - z*alpha^2 = 0.
std::array<cplx, 3> f_preimages(const ConformalData& cd, cplx z);

// Exterior inverse branch, w = z/rho + O(1/z) at infinity, continued inward
// along the ray through z.  Throws std::domain_error for real z in
// [-x1, x1], where the branch has its cut.
cplx eval_F1(const ConformalData& cd, cplx z);
cplx eval_F1_prime(const ConformalData& cd, cplx z);

// Throws std::domain_error when the critical points are not real
// (t >= t_star, outside the one-cut phase).
CriticalPoints critical_points(const ConformalData& cd);

struct DropletBoundary {
    std::vector<double> theta;
    std::vector<cplx> z;
    double area = 0;
    std::vector<double> harmonic_moments;  // t_k for k = 1..K
};

// Uniform theta grid; area and exterior harmonic moments by spectrally
// accurate trapezoid sums of the boundary parametrization.
DropletBoundary droplet_boundary(const ConformalData& cd, int n_samples, int n_moments = 8);

// t_k = 0 for odd k, (-1)^{k/2+1} * 2c/a^k for even k.
double harmonic_moment_closed_form(const ModelParams& par, int k);

// max over boundary samples of |S1(z) - conj(z)|; the first-sheet branch is
// passed in as a callable so this header does not depend on the spectral
// module.
double schwarz_check(const ConformalData& cd, const std::function<cplx(cplx)>& S1,
                     int n_samples);

struct PotentialCheckReport {
    double ell = 0;                   // interior constant of the obstacle combination
    double interior_stddev = 0;       // spread of the combination over interior samples
    double exterior_min_excess = 0;   // min over exterior samples of combination - ell
    double exterior_identity_err = 0; // max |U_A - t*U_mu1| over exterior samples
    double far_field_err = 0;         // same comparison at a far point
    long cells_used = 0;
};

// Midpoint 2-D quadrature of the droplet's area potential U_A on a
// rectangular grid (boundary cells subdivided), then: (i) the combination
// 2 U_A + |z|^2 - 2c log|z^2+a^2| is constant inside and larger outside;
// (ii) U_A = t * U_mu1 outside, when a mother-body potential is supplied
// (pass an empty function to skip (ii)).
PotentialCheckReport droplet_potential_check(const ConformalData& cd,
                                             const std::function<double(cplx)>& U_mu1,
                                             int nx = 1400, int ny = 1400);

}
