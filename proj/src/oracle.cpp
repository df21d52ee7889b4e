#include "motherbody/oracle.hpp"

#include "motherbody/measures.hpp"

#include <boost/multiprecision/mpfr.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace motherbody {
namespace {

using bigint = boost::multiprecision::mpz_int;
using mpfloat = boost::multiprecision::number<
    boost::multiprecision::mpfr_float_backend<0>, boost::multiprecision::et_off>;

std::vector<bigint> binomial_row(int q) {
    std::vector<bigint> row(static_cast<size_t>(q) + 1);
    row[0] = 1;
    for (int i = 1; i <= q; ++i) row[i] = row[i - 1] * (q - i + 1) / i;
    return row;
}

std::vector<bigint> power_table(const bigint& base, int top) {
    std::vector<bigint> p(static_cast<size_t>(top) + 1);
    p[0] = 1;
    for (int i = 1; i <= top; ++i) p[i] = p[i - 1] * base;
    return p;
}

// Kernel route, exact integer form.  The z^s Maclaurin coefficient of
// (d^2/dz^2 + a^2 N^2)^q [P (z^2+a^2)^q] is
//   sum_m binom(q,m) (a^2 N^2)^{q-m} (s+2m)!/s! q_{s+2m},
// with q_r the coefficients of P (z^2+a^2)^q.  Premultiplying the whole
// condition by da^{2q} (da = denominator of a^2) leaves integer entries and
// the same solution set.
struct KernelTables {
    int n, q;
    std::vector<bigint> B;  // B[m] = binom(q,m) (na N^2)^{q-m} da^m
    std::vector<bigint> C;  // C[i] = binom(q,i) na^{q-i} da^i

    explicit KernelTables(const OracleParams& op) : n(op.n), q(op.cN()) {
        const bigint na = numerator(op.a2);
        const bigint da = denominator(op.a2);
        const auto bin = binomial_row(q);
        const auto pA = power_table(na * op.N * op.N, q);
        const auto pB = power_table(na, q);
        const auto pD = power_table(da, q);
        B.resize(q + 1);
        C.resize(q + 1);
        for (int m = 0; m <= q; ++m) {
            B[m] = bin[m] * pA[q - m] * pD[m];
            C[m] = bin[m] * pB[q - m] * pD[m];
        }
    }

    // rf[m] = (s+2m)!/s!
    std::vector<bigint> rising(int s) const {
        std::vector<bigint> rf(static_cast<size_t>(q) + 1);
        rf[0] = 1;
        for (int m = 1; m <= q; ++m)
            rf[m] = rf[m - 1] * (s + 2 * m - 1) * (s + 2 * m);
        return rf;
    }

    // Coefficient of p_j in the z^s condition (times da^{2q}).  Zero when
    // the parities differ: the weight is even in z.
    bigint entry(int s, const std::vector<bigint>& rf, int j) const {
        if (((s ^ j) & 1) != 0) return bigint(0);
        bigint acc = 0;
        const int m_lo = std::max(0, (j - s) / 2);
        const int m_hi = std::min(q, q + (j - s) / 2);
        for (int m = m_lo; m <= m_hi; ++m)
            acc += B[m] * rf[m] * C[(s - j) / 2 + m];
        return acc;
    }
};

// Moment route, exact integer form.  With q2 = cN the monomial moments
// against |z^2+a^2|^{2cN} e^{-N|z|^2} are sums of Gaussian moments,
//   M_{jk}/pi = sum_{i,l} binom(q2,i) a2^{q2-i} binom(q2,l) a2^{q2-l}
//               [j+2i = k+2l] (k+2l)! / N^{k+2l+1},
// and scaling row k by N^{k+1+2 q2} da^{2 q2} clears every denominator.
struct MomentTables {
    int n, N, q2;
    std::vector<bigint> B;     // B[l] = binom(q2,l) na^{q2-l} N^{2(q2-l)} da^l
    std::vector<bigint> C;     // C[i] = binom(q2,i) na^{q2-i} da^i
    std::vector<bigint> fact;  // fact[r] = r!

    explicit MomentTables(const OracleParams& op) : n(op.n), N(op.N) {
        q2 = op.cN();
        if (q2 % 2 != 0)
            throw std::invalid_argument(
                "moment route: odd cN is not supported, use the kernel route");
        const bigint na = numerator(op.a2);
        const bigint da = denominator(op.a2);
        const auto bin = binomial_row(q2);
        const auto pA = power_table(na * op.N * op.N, q2);
        const auto pB = power_table(na, q2);
        const auto pD = power_table(da, q2);
        B.resize(q2 + 1);
        C.resize(q2 + 1);
        for (int l = 0; l <= q2; ++l) {
            B[l] = bin[l] * pA[q2 - l] * pD[l];
            C[l] = bin[l] * pB[q2 - l] * pD[l];
        }
        fact.resize(static_cast<size_t>(n) + 2 * q2 + 1);
        fact[0] = 1;
        for (size_t r = 1; r < fact.size(); ++r) fact[r] = fact[r - 1] * r;
    }

    // Scaled M_{jk}: row k, column j.
    bigint entry(int k, int j) const {
        if (((k ^ j) & 1) != 0) return bigint(0);
        bigint acc = 0;
        const int l_lo = std::max(0, (j - k) / 2);
        const int l_hi = std::min(q2, q2 + (j - k) / 2);
        for (int l = l_lo; l <= l_hi; ++l)
            acc += B[l] * C[(k - j) / 2 + l] * fact[k + 2 * l];
        return acc;
    }
};

// Fraction-free Gaussian elimination (Bareiss): every intermediate entry is
// a minor of the original integer matrix, so the divisions below are exact
// and the growth stays polynomial in the entry sizes.  Back substitution is
// done in rationals.  allow_pivot selects row swaps on a vanishing pivot;
// without it a zero pivot is a structural contradiction and throws.
std::vector<rational> bareiss_solve(std::vector<std::vector<bigint>>& A,
                                    std::vector<bigint>& b, bool allow_pivot,
                                    const char* who) {
    const int m = static_cast<int>(A.size());
    bigint prev = 1;
    for (int k = 0; k < m; ++k) {
        if (A[k][k] == 0) {
            int r = k + 1;
            if (allow_pivot)
                while (r < m && A[r][k] == 0) ++r;
            if (r >= m)
                throw singular_system(std::string(who) +
                                      ": vanishing pivot in the exact elimination");
            std::swap(A[k], A[r]);
            std::swap(b[k], b[r]);
        }
        for (int i = k + 1; i < m; ++i) {
            for (int j = k + 1; j < m; ++j)
                A[i][j] = (A[k][k] * A[i][j] - A[i][k] * A[k][j]) / prev;
            b[i] = (A[k][k] * b[i] - A[i][k] * b[k]) / prev;
            A[i][k] = 0;
        }
        prev = A[k][k];
    }
    std::vector<rational> x(m);
    for (int i = m - 1; i >= 0; --i) {
        rational acc(b[i]);
        for (int j = i + 1; j < m; ++j) acc -= rational(A[i][j]) * x[j];
        x[i] = acc / rational(A[i][i]);
    }
    return x;
}

ExactPolynomial make_poly(const OracleParams& op, std::vector<rational> coeffs) {
    ExactPolynomial p;
    p.n = op.n;
    p.N = op.N;
    p.a2 = op.a2;
    p.c = op.c;
    p.coeffs = std::move(coeffs);
    return p;
}

// ---- multiprecision complex -------------------------------------------------
// mpc is not part of the toolchain, so the root finder carries its own
// complex arithmetic over the mpfr type.

struct mcplx {
    mpfloat re, im;
};

mcplx operator+(const mcplx& x, const mcplx& y) { return {x.re + y.re, x.im + y.im}; }
mcplx operator-(const mcplx& x, const mcplx& y) { return {x.re - y.re, x.im - y.im}; }
mcplx operator*(const mcplx& x, const mcplx& y) {
    return {x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re};
}
mcplx operator/(const mcplx& x, const mcplx& y) {
    const mpfloat d = y.re * y.re + y.im * y.im;
    return {(x.re * y.re + x.im * y.im) / d, (x.im * y.re - x.re * y.im) / d};
}
mpfloat abs2(const mcplx& x) { return x.re * x.re + x.im * x.im; }

struct PrecisionGuard {
    unsigned saved = mpfloat::default_precision();
    explicit PrecisionGuard(int digits10) {
        mpfloat::default_precision(static_cast<unsigned>(digits10));
    }
    ~PrecisionGuard() { mpfloat::default_precision(saved); }
};

std::vector<mpfloat> float_coeffs(const ExactPolynomial& p) {
    std::vector<mpfloat> cf(p.coeffs.size());
    for (size_t k = 0; k < cf.size(); ++k)
        cf[k] = mpfloat(numerator(p.coeffs[k])) / mpfloat(denominator(p.coeffs[k]));
    return cf;
}

mcplx horner(const std::vector<mpfloat>& cf, const mcplx& z) {
    mcplx acc{cf.back(), mpfloat(0)};
    for (int k = static_cast<int>(cf.size()) - 2; k >= 0; --k) {
        acc = acc * z;
        acc.re += cf[k];
    }
    return acc;
}

void horner_pair(const std::vector<mpfloat>& cf, const mcplx& z, mcplx& P,
                 mcplx& dP) {
    P = {cf.back(), mpfloat(0)};
    dP = {mpfloat(0), mpfloat(0)};
    for (int k = static_cast<int>(cf.size()) - 2; k >= 0; --k) {
        dP = dP * z + P;
        P = P * z;
        P.re += cf[k];
    }
}

// Weierstrass (Durand-Kerner) sweep with in-place updates.  The starting
// points sit on a staggered circle of the Cauchy radius with an angular
// offset, so no initial point is real and no two coincide.
void weierstrass(const std::vector<mpfloat>& cf, int digits10,
                 std::vector<mcplx>& w) {
    const int n = static_cast<int>(cf.size()) - 1;
    mpfloat mx = 0;
    for (int k = 0; k < n; ++k) {
        mpfloat a = abs(cf[k]);
        if (a > mx) mx = a;
    }
    const double R = 1 + std::min(1e6, mx.convert_to<double>());
    w.resize(n);
    for (int k = 0; k < n; ++k) {
        const double th = 2 * M_PI * k / n + 0.4;
        const double r = R * (0.85 + 0.3 * k / static_cast<double>(n));
        w[k] = {mpfloat(r * std::cos(th)), mpfloat(r * std::sin(th))};
    }
    const mpfloat tol = pow(mpfloat(10), -(digits10 - 12));
    for (int sweep = 0; sweep < 400; ++sweep) {
        mpfloat worst = 0;
        for (int k = 0; k < n; ++k) {
            mcplx d{mpfloat(1), mpfloat(0)};
            for (int j = 0; j < n; ++j) {
                if (j == k) continue;
                mcplx diff = w[k] - w[j];
                if (diff.re == 0 && diff.im == 0) {
                    w[k].re += mpfloat(R * 1e-3 * (k + 1) / n);
                    w[k].im += mpfloat(R * 3e-4);
                    diff = w[k] - w[j];
                }
                d = d * diff;
            }
            const mcplx step = horner(cf, w[k]) / d;
            w[k] = w[k] - step;
            const mpfloat rel = sqrt(abs2(step) / (1 + abs2(w[k])));
            if (rel > worst) worst = rel;
        }
        if (worst < tol) return;
    }
}

// A root is accepted when the relative Newton step |P| / (|P'| max(|w|,eps))
// clears half the working precision.
bool roots_validate(const std::vector<mpfloat>& cf, const std::vector<mcplx>& w,
                    int digits10) {
    const mpfloat bound = pow(mpfloat(10), -digits10 / 2);
    for (const auto& root : w) {
        mcplx P, dP;
        horner_pair(cf, root, P, dP);
        mpfloat scale = sqrt(abs2(root));
        if (scale < mpfloat(1e-30)) scale = mpfloat(1e-30);
        if (sqrt(abs2(P)) > bound * sqrt(abs2(dP)) * scale) return false;
    }
    return true;
}

}  // namespace

int OracleParams::cN() const {
    if (n < 0) throw std::invalid_argument("oracle: degree n must be nonnegative");
    if (N < 1) throw std::invalid_argument("oracle: N must be a positive integer");
    if (a2 <= 0) throw std::invalid_argument("oracle: a^2 must be positive");
    if (c < 0) throw std::invalid_argument("oracle: c must be nonnegative");
    const rational q = c * N;
    if (denominator(q) != 1)
        throw std::invalid_argument("oracle: c*N must be an integer");
    if (numerator(q) > 1000000)
        throw std::invalid_argument("oracle: c*N is too large for exact assembly");
    return numerator(q).convert_to<int>();
}

ExactPolynomial solve_kernel_route(const OracleParams& op) {
    const int n = op.n;
    const KernelTables T(op);
    const int r0 = n % 2;
    const int m = (n - r0) / 2;
    // Only the conditions sharing the parity of n constrain anything: the
    // other block is homogeneous, so those coefficients are zero.
    std::vector<std::vector<bigint>> A(m, std::vector<bigint>(m));
    std::vector<bigint> b(m);
    for (int r = 0; r < m; ++r) {
        const int s = r0 + 2 * r;
        const auto rf = T.rising(s);
        for (int col = 0; col < m; ++col) A[r][col] = T.entry(s, rf, r0 + 2 * col);
        b[r] = -T.entry(s, rf, n);
    }
    auto x = bareiss_solve(A, b, true, "kernel route");
    std::vector<rational> p(static_cast<size_t>(n) + 1);
    for (int col = 0; col < m; ++col) p[r0 + 2 * col] = x[col];
    p[n] = 1;
    // re-verify every one of the n conditions exactly
    for (int s = 0; s < n; ++s) {
        const auto rf = T.rising(s);
        rational acc = 0;
        for (int j = r0; j <= n; j += 2) acc += rational(T.entry(s, rf, j)) * p[j];
        if (acc != 0)
            throw numeric_error("kernel route: solved system residual is not zero");
    }
    return make_poly(op, std::move(p));
}

ExactPolynomial solve_moment_route(const OracleParams& op) {
    const int n = op.n;
    const MomentTables T(op);
    const int r0 = n % 2;
    const int m = (n - r0) / 2;
    std::vector<std::vector<bigint>> A(m, std::vector<bigint>(m));
    std::vector<bigint> b(m);
    for (int r = 0; r < m; ++r) {
        const int k = r0 + 2 * r;
        for (int col = 0; col < m; ++col) A[r][col] = T.entry(k, r0 + 2 * col);
        b[r] = -T.entry(k, n);
    }
    // The parity blocks of the moment matrix are Gram matrices, positive
    // definite by construction, so elimination must succeed without swaps.
    auto x = bareiss_solve(A, b, false, "moment route");
    std::vector<rational> p(static_cast<size_t>(n) + 1);
    for (int col = 0; col < m; ++col) p[r0 + 2 * col] = x[col];
    p[n] = 1;
    for (int k = 0; k < n; ++k) {
        rational acc = 0;
        for (int j = r0; j <= n; j += 2) acc += rational(T.entry(k, j)) * p[j];
        if (acc != 0)
            throw numeric_error("moment route: solved system residual is not zero");
    }
    // h/pi = sum_j p_j M_{jn}/pi, unscaled this time: orthogonality kills
    // every term of P zbar^n except the monomial pairings with z^n.
    const bigint Nb(op.N);
    std::vector<rational> c2(static_cast<size_t>(T.q2) + 1);
    {
        const auto bin = binomial_row(T.q2);
        const auto pB = power_table(numerator(op.a2), T.q2);
        const auto pD = power_table(denominator(op.a2), T.q2);
        for (int l = 0; l <= T.q2; ++l)
            c2[l] = rational(bin[l] * pB[T.q2 - l], pD[T.q2 - l]);
    }
    rational h = 0;
    for (int j = r0; j <= n; j += 2) {
        if (p[j] == 0) continue;
        rational w = 0;
        const int l_lo = std::max(0, (j - n) / 2);
        const int l_hi = std::min(T.q2, T.q2 + (j - n) / 2);
        for (int l = l_lo; l <= l_hi; ++l) {
            const int i = (n - j) / 2 + l;
            w += c2[l] * c2[i] * rational(T.fact[n + 2 * l]) /
                 rational(pow(Nb, n + 2 * l + 1));
        }
        h += p[j] * w;
    }
    if (h <= 0) throw numeric_error("moment route: squared norm is not positive");
    auto out = make_poly(op, std::move(p));
    out.has_norm = true;
    out.norm_over_pi = h;
    return out;
}

std::vector<cplx> zeros(const ExactPolynomial& p, int digits10) {
    if (p.n == 0) return {};
    if (digits10 < 30) digits10 = 30;
    for (int attempt = 0; attempt < 3; ++attempt) {
        const int d = digits10 << attempt;
        PrecisionGuard guard(d);
        const auto cf = float_coeffs(p);
        std::vector<mcplx> w;
        weierstrass(cf, d, w);
        if (!roots_validate(cf, w, d)) continue;
        std::vector<cplx> out(w.size());
        for (size_t k = 0; k < w.size(); ++k)
            out[k] = cplx(w[k].re.convert_to<double>(), w[k].im.convert_to<double>());
        std::sort(out.begin(), out.end(), [](cplx u, cplx v) {
            return u.real() != v.real() ? u.real() < v.real() : u.imag() < v.imag();
        });
        return out;
    }
    throw precision_exhausted("zeros: residual bound failed at escalated precision");
}

cplx log_eval(const ExactPolynomial& p, cplx z, int digits10) {
    if (digits10 < 30) digits10 = 30;
    PrecisionGuard guard(digits10);
    const auto cf = float_coeffs(p);
    const mcplx zz{mpfloat(z.real()), mpfloat(z.imag())};
    const mcplx P = horner(cf, zz);
    const mpfloat la = log(abs2(P)) / 2;
    const mpfloat ar = atan2(P.im, P.re);
    return cplx(la.convert_to<double>(), ar.convert_to<double>());
}

ZeroStats zero_counting_measure(const std::vector<cplx>& zs,
                                const SpectralCurve& sc) {
    ZeroStats st;
    const double x1 = sc.cd.x1;
    const size_t n = zs.size();
    if (n == 0) return st;
    st.re_sorted.reserve(n);
    for (const auto& z : zs) {
        st.re_sorted.push_back(z.real());
        st.max_im = std::max(st.max_im, std::abs(z.imag()));
        const double dx = std::max(0.0, std::abs(z.real()) - x1);
        st.max_dist = std::max(st.max_dist, std::hypot(dx, z.imag()));
    }
    std::sort(st.re_sorted.begin(), st.re_sorted.end());
    for (size_t i = 0; i < n; ++i) {
        const double x = st.re_sorted[i];
        double F = 0;
        if (x >= x1)
            F = 1;
        else if (x > -x1)
            F = mass_on_interval(sc, 1, -x1, x);
        const double lo = std::abs(F - static_cast<double>(i) / n);
        const double hi = std::abs(F - static_cast<double>(i + 1) / n);
        st.ks = std::max({st.ks, lo, hi});
    }
    return st;
}

}  // namespace motherbody
