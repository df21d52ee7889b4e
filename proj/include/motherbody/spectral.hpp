#pragma once
#include <array>
#include <vector>

#include "motherbody/conformal.hpp"

namespace motherbody {

enum class Sheet { one = 0, two = 1, three = 2 };

// Boundary-value selector on the cuts: limits from the upper (plus) or
// lower (minus) half plane.
enum class Side { off_axis, plus, minus };

struct SheetPoint {
    cplx z;
    Sheet sheet = Sheet::one;
    Side side = Side::off_axis;
};

// The cubic P(S,z) = z^3 S^3 - (t+4c) z^2 S^2 + a^2 (z S^3 + z^3 S)
// - a^2 (t+2c)(S^2 + z^2) + C1 z S - C2 and its three branches.
// S1 is the Schwarz-function branch (~ (t+2c)/z at infinity), S2 and S3
// tend to +-ia in the upper half plane.
struct SpectralCurve {
    ModelParams par;
    ConformalData cd;
    double C1 = 0;
    double C2 = 0;
    double C1_spread = 0;  // scatter of the probe extraction, a health metric
    double C2_spread = 0;
    double b0 = 0, b1 = 0, b2 = 0;  // imaginary-axis nodes, 0 < b0 <= b1 < a < b2
    double x1_disc = 0, x2_disc = 0;  // branch points recovered from the discriminant
    cplx anchor_z;                    // far-field anchor fixing the branch labels
    std::array<cplx, 3> anchor_S;
};

// Builds the curve for a Phase-1 conformal solution: extracts C1, C2 from
// the rational parametrization (S, z) = (f(1/w), f(w)) at probe points,
// fixes branch labels far out, and locates the discriminant roots.
SpectralCurve make_spectral_curve(const ConformalData& cd);

// Coefficients (A, B, C, D) of P(., z) as a cubic in S.
std::array<cplx, 4> cubic_in_S(const SpectralCurve& sc, cplx z);

// Unlabeled roots of the cubic at z.  z = 0 and +-ia are degenerate.
std::array<cplx, 3> cubic_roots_at(const SpectralCurve& sc, cplx z);

// Labeled branch values {S1, S2, S3} at z, by adaptive continuation along
// the segment from the anchor (velocity-extrapolated through the nodes,
// Schwarz reflection for the lower half plane).  Real z gives the limit
// from above.
std::array<cplx, 3> eval_S_all(const SpectralCurve& sc, cplx z);

// Branch value with cut-side control.  On the open cuts the plus/minus
// boundary values come from the conjugate-pair structure of the real cubic.
cplx eval_S(const SpectralCurve& sc, const SheetPoint& p);

// Continues an already labeled triple from z_from to z_to along the straight
// segment, without restarting at the far-field anchor.  Meant for walking
// quadrature paths node by node; the segment must not cross a branch cut
// (touching the real axis at the endpoint is fine).
std::array<cplx, 3> continue_branches(const SpectralCurve& sc, cplx z_from,
                                      const std::array<cplx, 3>& S_from,
                                      cplx z_to);

cplx eval_P(const SpectralCurve& sc, cplx S, cplx z);

// (e1, e2, e3) elementary symmetric functions of the branch values at z.
std::array<cplx, 3> symmetric_functions(const SpectralCurve& sc, cplx z);

struct DiscriminantInfo {
    std::vector<double> coeffs;        // degree 12 in z, coeffs[k] multiplies z^k
    std::vector<cplx> roots;           // one entry per cluster
    std::vector<int> multiplicity;     // cluster sizes, summing to 12
};

// Discriminant of the cubic in S, expanded exactly in z and factored into
// root clusters.  Phase 1: simple roots +-x1, +-x2, double roots +-ib1, +-ib2.
DiscriminantInfo discriminant(const SpectralCurve& sc);

struct Nodes {
    double b0 = 0, b1 = 0, b2 = 0;
};

// Locates b0 by bisection on Im S1 along the imaginary axis, and b1, b2 by
// bisection on the branch differences Im(S1 - S2) and Im(S1 - S3).  Cross-
// checks against the closed form for b0 and the discriminant double roots;
// throws numeric_error when the routes disagree.
Nodes find_nodes(const SpectralCurve& sc);

// Number of solutions of z*S(z) = v on the imaginary axis over all three
// sheets (sign-change scan; 4 for v < 0 or v > t+2c).
int zS_value_count(const SpectralCurve& sc, double v, double y_max = 0);

// Critical values of z*S: s1 = local minimum of x*S1(x) on (x1, infinity),
// s2 = maximum of the first-sheet values on the imaginary segment (0, b0).
double zS_crit_s1(const SpectralCurve& sc);
double zS_crit_s2(const SpectralCurve& sc);

}
