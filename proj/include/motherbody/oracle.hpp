#pragma once
#include "motherbody/spectral.hpp"

#include <boost/multiprecision/gmp.hpp>

#include <vector>

namespace motherbody {

using rational = boost::multiprecision::mpq_rational;

// An exact linear solve hit a vanishing pivot where uniqueness theory says
// it cannot: either the parameters are outside the model or something
// upstream is wrong.
struct singular_system : numeric_error {
    using numeric_error::numeric_error;
};

// Root refinement failed its residual bound even after escalating the
// working precision.
struct precision_exhausted : numeric_error {
    using numeric_error::numeric_error;
};

// Parameters of the exact construction.  The weight |z^2+a^2|^{2cN}
// e^{-N|z|^2} splits into a polynomial times its conjugate exactly when cN
// is an integer, which everything here relies on.  a2 is the square of the
// charge location height, kept rational so the linear systems stay exact.
struct OracleParams {
    int n = 0;
    int N = 1;
    rational a2 = 0;
    rational c = 0;

    // c*N as an integer.  Throws std::invalid_argument when n < 0, N < 1,
    // or c*N is not a nonnegative integer.
    int cN() const;
};

// Monic degree-n polynomial with exact rational coefficients, coeffs[k]
// multiplying z^k.  The moment route also produces the squared norm
// h = pi * norm_over_pi.
struct ExactPolynomial {
    int n = 0;
    int N = 1;
    rational a2 = 0;
    rational c = 0;
    std::vector<rational> coeffs;
    bool has_norm = false;
    rational norm_over_pi = 0;
};

// Kernel characterization: the first n Maclaurin coefficients of
//   (d^2/dz^2 + a^2 N^2)^{cN} [ P(z) (z^2+a^2)^{cN} ]
// vanish.  The weight's z -> -z symmetry decouples the conditions by
// parity, so only the block sharing the parity of n is solved (the other
// block is homogeneous and its unknowns are zero); afterwards all n
// conditions are re-verified exactly against the solved vector.
ExactPolynomial solve_kernel_route(const OracleParams& op);

// Planar orthogonality to z-bar^k for k < n: the insertion factor expands
// as (z^2+a^2)^{cN} (zbar^2+a^2)^{cN} and every moment reduces to Gaussian
// moments exactly.  Even cN is required here (std::invalid_argument
// otherwise); the kernel route covers odd cN.  The parity-block Gram
// matrices are positive definite, so the elimination runs without pivoting
// and a vanishing pivot throws singular_system.  Returns the squared norm
// as well.
ExactPolynomial solve_moment_route(const OracleParams& op);

// All n roots, via Weierstrass simultaneous iteration carried out at
// digits10 working digits.  Each root must pass the relative Newton-step
// bound |P/(P' z)| < 10^{-digits10/2}; if any fails, the precision doubles
// (twice) before precision_exhausted is thrown.
std::vector<cplx> zeros(const ExactPolynomial& p, int digits10 = 80);

// log P(z), principal branch.  The value is assembled at digits10 working
// digits because |P| reaches e^{n Re g1} long before n is interesting.
cplx log_eval(const ExactPolynomial& p, cplx z, int digits10);

// Zero statistics against the mother body: sorted real parts (the empirical
// CDF), the Kolmogorov-Smirnov distance to the mu1 CDF, the worst imaginary
// part, and the worst distance to the support interval [-x1, x1].
struct ZeroStats {
    std::vector<double> re_sorted;
    double ks = 0;
    double max_im = 0;
    double max_dist = 0;
};
ZeroStats zero_counting_measure(const std::vector<cplx>& zs,
                                const SpectralCurve& sc);

}  // namespace motherbody
