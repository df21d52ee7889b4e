#pragma once
#include "motherbody/spectral.hpp"

#include <vector>

namespace motherbody {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Sampled density of a positive measure on the real line.  The weights are
// chosen so that sum_i mass_weights[i] * f(nodes[i]) integrates f against the
// measure over the gridded part of the support.  Measures reaching to
// infinity are gridded up to x_max and modelled as tail_coeff/x^2 beyond.
struct DensityGrid {
    std::vector<Interval> support;
    std::vector<double> nodes;
    std::vector<double> values;        // density d(mu)/dx at the nodes
    std::vector<double> mass_weights;  // integrate f d(mu) over the grid
    double x_max = 0.0;                // 0 when the support is fully gridded
    double tail_coeff = 0.0;           // density ~ tail_coeff/x^2 beyond x_max

    double grid_mass() const;
    double tail_mass() const;  // both tails, 2*tail_coeff/x_max
    double mass() const;
};

// The curve together with both measure grids; everything downstream
// (potentials, variational checks, contours) is built from this.
struct MeasureSet {
    SpectralCurve sc;
    DensityGrid mu1;
    DensityGrid mu2;
};

MeasureSet build_measures(const ModelParams& par);

// Pointwise densities from the branch boundary values on the cuts:
// mu1' = -Im S1_+/(pi t) on (-x1,x1), and mu2' = a/(pi t) + Im S3_+/(pi t)
// outside (-x2,x2) where the constraint is not saturated.
double mu1_density_at(const SpectralCurve& sc, double x);
double mu2_density_at(const SpectralCurve& sc, double x);

// Grid builders.  mu1 lives on Chebyshev-type nodes whose weights absorb the
// square-root vanishing at +-x1; mu2 is exactly the constraint a/(pi t) on
// [-x2,x2] and is gridded on the cut with substitutions that absorb the
// square-root edge at x2 and the x^-2 decay toward the cutoff.
DensityGrid density_mu1(const SpectralCurve& sc, int n = 400);
DensityGrid density_mu2(const SpectralCurve& sc, double x_max = 1000.0,
                        int order = 48);

// The vanishing-area limit of t*mu2: density a/pi on [-c/a, c/a] and
// a/pi - sqrt(a^2 x^2 - c^2)/(pi |x|) outside, total mass c.  Its potential
// has a closed form on the whole real line.
DensityGrid rho_limit_measure(double a, double c, double x_max = 1000.0,
                              int order = 48);
double rho_limit_density(double a, double c, double x);
double rho_limit_potential(double a, double c, double x);

// Mass of mu_which restricted to [lo, hi], by fresh quadrature of the
// pointwise density (graded toward the square-root edges).
double mass_on_interval(const SpectralCurve& sc, int which, double lo,
                        double hi);

// Log-log slope of the density (for mu1) or of the constraint defect
// a/(pi t) - mu2' (for mu2) against the distance to the nearest support
// edge, fitted over the innermost tenth of the edge scale.  Both should be
// 1/2.
double mu1_edge_exponent(const SpectralCurve& sc);
double mu2_edge_exponent(const SpectralCurve& sc);

// Cauchy transforms int d(mu)(s)/(z-s) expressed through the branches:
//   t C[mu1] = S1(z) - 2cz/(z^2+a^2)
//   t C[mu2] = -S3(z) + (t+2c)/z -+ ia        (sign by half plane)
// For real z the value is the boundary value from above.  The alternative
// route through the second sheet, t C[mu2] = S2 + S1 - 2cz/(z^2+a^2) -+ ia,
// agrees exactly when the three branches sum to the rational part of the
// curve, so the spread between the two is a direct sum-rule probe.
struct CauchyTransforms {
    cplx mu1;
    cplx mu2;
};
CauchyTransforms cauchy_transforms(const SpectralCurve& sc, cplx z);
cplx cauchy_mu2_alt(const SpectralCurve& sc, cplx z);

// Quadrature oracle for either grid (tail handled in closed form).
cplx cauchy_quadrature(const DensityGrid& g, cplx z);

// g1(z) = int log(z-s) d(mu1)(s) by quadrature against the mu1 grid;
// defined off (-inf, x1], principal branch per node.  g2(z) = int log(z-s)
// d(mu2)(s) split into the saturated part (closed form), the gridded cut
// part, and the closed-form x^-2 tail; for real z the value is the boundary
// value from above.  Throws std::domain_error on the g1 cut.
cplx g1_function(const MeasureSet& ms, cplx z);
cplx g2_function(const MeasureSet& ms, cplx z);

// Logarithmic potentials U(z) = -int log|z-s| d(mu)(s), evaluated by
// integrating the branch-based Cauchy transforms along a straight path from
// a far-field anchor (where both g's are known from moment expansions and
// the split construction).  The integrand is walked with branch
// continuation, so each evaluation is cut-safe in the closed upper half
// plane; other arguments are folded in by the measures' symmetries.
class PotentialEvaluator {
  public:
    explicit PotentialEvaluator(const MeasureSet& ms);

    double U1(cplx z) const;
    double U2(cplx z) const;
    void both(cplx z, double& u1, double& u2) const;

    // u(z) = U1 + U2 - Re V1 + Re V2 + (a/t)|Im z| with the external fields
    // V1 = (c/t) log(z^2+a^2), V2 = ((t+2c)/t) log z.
    double u(cplx z) const;

  private:
    const MeasureSet& ms_;
    cplx anchor_z_;
    std::array<cplx, 3> anchor_S_;
    double re_g1_anchor_ = 0.0;
    double re_g2_anchor_ = 0.0;
};

// Equilibrium conditions.  On the mother-body support the combination
// 2 U1 - U2 - Re V1 is constant (= ell); strictly above ell between x1 and
// x2.  The second combination 2 U2 - U1 + Re V2 vanishes where the
// constraint is slack and is negative where it saturates.
struct VariationalReport {
    double ell = 0.0;
    double ell_spread = 0.0;       // stddev over the equality samples
    double min_gap_outside = 0.0;  // min of (2U1-U2-ReV1) - ell on (x1,x2]
    double max_abs_slack = 0.0;    // max |2U2-U1+ReV2| on the outer cut
    double max_saturated = 0.0;    // max of 2U2-U1+ReV2 inside (-x2,x2)
};
VariationalReport variational_check(const MeasureSet& ms,
                                    const PotentialEvaluator& pe);

// Level crossing x3 of u on (x1,x2) and a closed contour through
// (+-x_gamma, +-i y_gamma) on which u stays above ell.  The contour is an
// ellipse, symmetric in both axes, crossing the positive real line once.
struct EquilibriumData {
    double ell = 0.0;
    double x3 = 0.0;
    double x_gamma = 0.0;
    double y_gamma = 0.0;
    double u_min_minus_ell = 0.0;     // over the contour samples
    std::vector<cplx> gamma;
};
EquilibriumData contour_u_and_gamma(const MeasureSet& ms,
                                    const PotentialEvaluator& pe, double ell);

// Antiderivatives of branch differences:
//   phi1(z) = 1/(2t) int_{x1}^z (S2 - S1),  cut on the reals beyond x1, x2
//             and on the imaginary axis beyond +-ia,
//   phi2(z) = 1/(2t) int_{x2}^z (S2 - S3),  cut on the reals beyond x1, x2,
//   phi3(z) = 1/(2t) int_{x3}^z (S3 - S1),  cut also on [-ia, ia].
// Paths are rectangles chosen per function so no cut is crossed; real
// arguments inside a cut give the boundary value from above.  phi_alt takes
// a homotopic path at a different height as a path-independence probe.
class PhiEvaluator {
  public:
    PhiEvaluator(const SpectralCurve& sc, double x3);

    cplx phi(int which, cplx z) const;
    cplx phi_alt(int which, cplx z) const;

  private:
    cplx eval(int which, cplx z, double lift) const;

    const SpectralCurve& sc_;
    double x3_;
};

}  // namespace motherbody
