#pragma once
#include <array>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace motherbody {

using cplx = std::complex<double>;

// An iteration that failed to converge or a tolerance budget that could not
// be met.  The CLI maps this (and anything derived from it) to exit code 3;
// bad arguments throw std::invalid_argument / std::domain_error instead.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Gauss-Legendre rule on [-1,1], cached per order.  Nodes are computed by
// Newton iteration from the Chebyshev initial guess, so the rule is
// deterministic to the last bit.
struct QuadRule {
    std::vector<double> x;
    std::vector<double> w;
};
const QuadRule& gauss_legendre(int order);

// Integrate f over consecutive panels [b[0],b[1]], [b[1],b[2]], ...
double integrate_panels(const std::function<double(double)>& f,
                        const std::vector<double>& breakpoints, int order = 16);

// Straight segment in the plane, split into `panels` equal pieces.
cplx integrate_segment(const std::function<cplx(cplx)>& f, cplx z0, cplx z1,
                       int panels, int order = 16);

// Breakpoints from `far` toward `sing`, geometrically refined (ratio 1/4)
// until the last panel has width |far-sing| * 4^-levels.  The singular point
// itself is the final breakpoint.
std::vector<double> graded_breakpoints(double sing, double far, int levels);

// Roots of c3 w^3 + c2 w^2 + c1 w + c0, c3 != 0.  Cardano plus a Newton
// polish on the input polynomial.
std::array<cplx, 3> solve_cubic(cplx c3, cplx c2, cplx c1, cplx c0);

// All roots of a real-coefficient polynomial (coeffs[k] multiplies z^k).
// Ehrlich-Aberth with deterministic initialisation; trailing zero
// coefficients of the leading end must already be trimmed.
std::vector<cplx> poly_roots(const std::vector<double>& coeffs);

// Evaluate a real-coefficient polynomial and its derivative at z.
cplx poly_eval(const std::vector<double>& coeffs, cplx z);

// Number of worker threads: MOTHERBODY_THREADS if set, else the hardware
// count, at least 1.
int thread_budget();

// Run body(i) for i in [0,n) on up to thread_budget() threads.  Falls back
// to a plain loop when the budget is 1.
void parallel_for(int n, const std::function<void(int)>& body);

}
