#include "motherbody/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "motherbody/numerics.hpp"

namespace motherbody {

namespace {

// All six permutations of three indices, for the far-field labeling.
constexpr int kPerm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                             {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};

// Distance on the Riemann sphere, so a branch racing off to a pole stays
// trackable: any finite prediction sits at chordal distance ~1 from a huge
// root, and the diverging branch is matched by elimination.
double chord(cplx u, cplx v) {
    return std::abs(u - v) /
           std::sqrt((1.0 + std::norm(u)) * (1.0 + std::norm(v)));
}

// Matches predicted branch values to roots by repeatedly committing the
// most confident claim (nearest root clearly closer than the runner-up) and
// finishing leftovers by elimination.  Returns false when two or more pairs
// stay contested, unless the contested roots have genuinely collided, in
// which case the labeling is immaterial.
bool assign_roots(const std::array<cplx, 3>& pred,
                  const std::array<cplx, 3>& roots, int match[3]) {
    bool pred_used[3] = {false, false, false};
    bool root_used[3] = {false, false, false};
    for (int remaining = 3; remaining > 0;) {
        int bk = -1, bj = -1;
        double bratio = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 3; ++k) {
            if (pred_used[k]) continue;
            double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
            int j1 = -1;
            for (int j = 0; j < 3; ++j) {
                if (root_used[j]) continue;
                const double d = chord(pred[k], roots[j]);
                if (d < d1) {
                    d2 = d1;
                    d1 = d;
                    j1 = j;
                } else {
                    d2 = std::min(d2, d);
                }
            }
            const double ratio = remaining == 1 ? 0.0 : d1 / d2;
            if (ratio < bratio) {
                bratio = ratio;
                bk = k;
                bj = j1;
            }
        }
        if (bratio <= 0.35) {
            match[bk] = bj;
            pred_used[bk] = root_used[bj] = true;
            --remaining;
            continue;
        }
        // Contested: acceptable only if every unmatched root coincides to
        // within the accuracy a near-double root admits at all (~sqrt(eps)),
        // in which case the labels are interchangeable.
        double sep = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                if (!root_used[i] && !root_used[j])
                    sep = std::max(sep, chord(roots[i], roots[j]));
        if (sep > 3e-8) return false;
        for (int k = 0; k < 3; ++k) {
            if (pred_used[k]) continue;
            for (int j = 0; j < 3; ++j)
                if (!root_used[j]) {
                    match[k] = j;
                    pred_used[k] = root_used[j] = true;
                    break;
                }
        }
        return true;
    }
    return true;
}

// Tracks a labeled root triple along the straight segment z_from -> z_to,
// halving the step whenever the assignment is contested.  Velocity
// extrapolation keeps the labels straight through the node points where two
// branch values cross transversally.
std::array<cplx, 3> continue_triple(const SpectralCurve& sc, cplx z_from,
                                    std::array<cplx, 3> S, cplx z_to,
                                    double h0 = 0.01) {
    cplx dz = z_to - z_from;
    if (std::abs(dz) == 0.0) return S;
    double s = 0.0;
    double h = h0;
    std::array<cplx, 3> vel{};
    bool have_vel = false;
    long guard = 0;
    while (s < 1.0) {
        if (++guard > 200000L)
            throw numeric_error("eval_S: branch continuation stalled");
        if (1.0 - s < 1e-12) {
            // The tail of the segment is below the resolution of s; restart
            // the parametrization from the current point so targets hugging
            // a pole remain reachable.
            const double rem = 1.0 - s;
            z_from += s * dz;
            dz = z_to - z_from;
            if (std::abs(dz) == 0.0) return S;
            for (auto& v : vel) v *= rem;
            h = std::min(1.0, h / rem);
            s = 0.0;
        }
        const bool final_step = h >= 1.0 - s;
        const double hs = final_step ? 1.0 - s : h;
        const cplx zp = final_step ? z_to : z_from + (s + hs) * dz;
        const auto roots = cubic_roots_at(sc, zp);

        std::array<cplx, 3> pred;
        for (int k = 0; k < 3; ++k)
            pred[k] = S[k] + (have_vel ? vel[k] * hs : cplx(0.0));

        int match[3];
        if (!assign_roots(pred, roots, match)) {
            // Parameter steps below the resolution of s cannot help; this
            // only triggers for targets within ~1e-12 of a pole of S.
            if (hs < 1e-16)
                throw numeric_error("eval_S: branch assignment ambiguous");
            h = 0.5 * hs;
            continue;
        }

        std::array<cplx, 3> next;
        for (int k = 0; k < 3; ++k) next[k] = roots[match[k]];

        // A consistent but wrong bijection can slip through when one step
        // hops across an avoided crossing: the two close roots swap partners
        // while both "match" confidently.  Cap each root's movement per step
        // by a fraction of its separation from the others; below the
        // collision floor the labels are interchangeable anyway.
        bool too_fast = false;
        for (int k = 0; k < 3 && !too_fast; ++k) {
            double sep = 1e300;
            for (int j = 0; j < 3; ++j)
                if (j != k) sep = std::min(sep, chord(next[k], next[j]));
            if (sep > 1e-7 && chord(next[k], S[k]) > 0.3 * sep) too_fast = true;
        }
        if (too_fast && hs >= 1e-16) {
            h = 0.5 * hs;
            continue;
        }

        if (final_step) return next;
        for (int k = 0; k < 3; ++k) vel[k] = (next[k] - S[k]) / hs;
        have_vel = true;
        S = next;
        s += hs;
        h = std::min(2.0 * hs, std::max(0.05, 0.25 * h0));
    }
    return S;
}

std::array<cplx, 3> conj_triple(std::array<cplx, 3> S) {
    for (auto& v : S) v = std::conj(v);
    return S;
}

// Root classification at real z on an open cut: one real root plus a
// conjugate pair.  Returns indices {real, lower half, upper half}.
struct CutRoots {
    cplx real_root;
    cplx pair_lower;  // Im < 0
    cplx pair_upper;  // Im > 0
};

CutRoots classify_cut_roots(const SpectralCurve& sc, double x) {
    const auto r = cubic_roots_at(sc, cplx(x, 0.0));
    int re_idx = 0;
    double best_im = std::abs(r[0].imag());
    for (int k = 1; k < 3; ++k)
        if (std::abs(r[k].imag()) < best_im) {
            best_im = std::abs(r[k].imag());
            re_idx = k;
        }
    CutRoots out;
    out.real_root = cplx(r[re_idx].real(), 0.0);
    std::array<cplx, 2> pair;
    int j = 0;
    for (int k = 0; k < 3; ++k)
        if (k != re_idx) pair[j++] = r[k];
    // A double real root (cut endpoint) splits under roundoff into a bogus
    // pair with |Im| of order sqrt(eps), so the floor sits above that.  It
    // scales with the pair itself: near z = 0 the third root is enormous
    // and must not inflate the threshold.
    const double ps = std::max(std::abs(pair[0]), std::abs(pair[1]));
    if (std::abs(pair[0].imag()) < 1e-7 * ps)
        throw numeric_error(
            "eval_S: no conjugate pair at the requested cut point");
    if (pair[0].imag() < 0.0) {
        out.pair_lower = pair[0];
        out.pair_upper = pair[1];
    } else {
        out.pair_lower = pair[1];
        out.pair_upper = pair[0];
    }
    return out;
}

// Polynomial product helpers for the discriminant expansion (coefficient
// vectors indexed by power).
std::vector<double> pmul(const std::vector<double>& p,
                         const std::vector<double>& q) {
    std::vector<double> r(p.size() + q.size() - 1, 0.0);
    for (size_t i = 0; i < p.size(); ++i)
        for (size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
    return r;
}

void padd(std::vector<double>& p, const std::vector<double>& q, double scale) {
    if (p.size() < q.size()) p.resize(q.size(), 0.0);
    for (size_t j = 0; j < q.size(); ++j) p[j] += scale * q[j];
}

double peval(const std::vector<double>& p, double x) {
    double v = 0.0;
    for (size_t k = p.size(); k-- > 0;) v = v * x + p[k];
    return v;
}

std::vector<double> pderiv(const std::vector<double>& p) {
    std::vector<double> d(p.size() > 1 ? p.size() - 1 : 1, 0.0);
    for (size_t k = 1; k < p.size(); ++k) d[k - 1] = double(k) * p[k];
    return d;
}

double newton_polish_real(const std::vector<double>& p, double x0, int iters) {
    const auto dp = pderiv(p);
    double x = x0;
    for (int i = 0; i < iters; ++i) {
        const double f = peval(p, x);
        const double df = peval(dp, x);
        if (df == 0.0) break;
        const double step = f / df;
        x -= step;
        if (std::abs(step) < 1e-16 * (1.0 + std::abs(x))) break;
    }
    return x;
}

double golden_max(const std::function<double(double)>& f, double lo, double hi,
                  int iters) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = f(c1), f2 = f(c2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + gr * (b - a);
            f2 = f(c2);
        } else {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - gr * (b - a);
            f1 = f(c1);
        }
    }
    return f(0.5 * (a + b));
}

double psi1(const SpectralCurve& sc, double y) {
    return eval_S_all(sc, cplx(0.0, y))[0].imag();
}

}  // namespace

std::array<cplx, 4> cubic_in_S(const SpectralCurve& sc, cplx z) {
    const double a = sc.par.a, c = sc.par.c, t = sc.par.t;
    const double a2 = a * a;
    const cplx z2 = z * z;
    return {z * (z2 + a2), -((t + 4.0 * c) * z2 + (t + 2.0 * c) * a2),
            z * (a2 * z2 + sc.C1), -((t + 2.0 * c) * a2 * z2 + sc.C2)};
}

std::array<cplx, 3> cubic_roots_at(const SpectralCurve& sc, cplx z) {
    const auto co = cubic_in_S(sc, z);
    if (std::abs(co[0]) == 0.0)
        throw std::domain_error(
            "spectral curve: degenerate point (z = 0 or +-ia)");
    return solve_cubic(co[0], co[1], co[2], co[3]);
}

std::array<cplx, 3> eval_S_all(const SpectralCurve& sc, cplx z) {
    if (z.imag() < 0.0)
        return conj_triple(eval_S_all(sc, std::conj(z)));
    return continue_triple(sc, sc.anchor_z, sc.anchor_S, z);
}

std::array<cplx, 3> continue_branches(const SpectralCurve& sc, cplx z_from,
                                      const std::array<cplx, 3>& S_from,
                                      cplx z_to) {
    // Whole segment in one trial step; the assignment and movement guards
    // halve it as needed, so short hops cost a single cubic solve.
    return continue_triple(sc, z_from, S_from, z_to, 1.0);
}

cplx eval_S(const SpectralCurve& sc, const SheetPoint& p) {
    const int j = static_cast<int>(p.sheet);
    if (p.side == Side::off_axis) return eval_S_all(sc, p.z)[j];
    if (p.z.imag() != 0.0)
        throw std::invalid_argument(
            "eval_S: side selector applies to real z only");
    const double x = p.z.real();
    const double ax = std::abs(x);
    const double x1 = sc.cd.x1, x2 = sc.cd.x2;
    if (ax > x1 && ax < x2) return eval_S_all(sc, p.z)[j];
    const auto cr = classify_cut_roots(sc, x);
    const bool plus = p.side == Side::plus;
    if (ax < x1) {
        // Cut of sheets 1 and 2; sheet 3 is real analytic here.
        switch (p.sheet) {
            case Sheet::one:
                return plus ? cr.pair_lower : cr.pair_upper;
            case Sheet::two:
                return plus ? cr.pair_upper : cr.pair_lower;
            case Sheet::three:
                return cr.real_root;
        }
    } else {
        // |x| > x2: cut of sheets 2 and 3; sheet 1 is real analytic.
        switch (p.sheet) {
            case Sheet::one:
                return cr.real_root;
            case Sheet::two:
                return plus ? cr.pair_upper : cr.pair_lower;
            case Sheet::three:
                return plus ? cr.pair_lower : cr.pair_upper;
        }
    }
    throw std::logic_error("eval_S: unreachable");
}

cplx eval_P(const SpectralCurve& sc, cplx S, cplx z) {
    const double a = sc.par.a, c = sc.par.c, t = sc.par.t;
    const double a2 = a * a;
    const cplx z2 = z * z, S2 = S * S;
    return z2 * z * S2 * S - (t + 4.0 * c) * z2 * S2 +
           a2 * (z * S2 * S + z2 * z * S) - a2 * (t + 2.0 * c) * (S2 + z2) +
           sc.C1 * z * S - sc.C2;
}

std::array<cplx, 3> symmetric_functions(const SpectralCurve& sc, cplx z) {
    const auto S = eval_S_all(sc, z);
    return {S[0] + S[1] + S[2],
            S[0] * S[1] + S[0] * S[2] + S[1] * S[2],
            S[0] * S[1] * S[2]};
}

DiscriminantInfo discriminant(const SpectralCurve& sc) {
    const double a = sc.par.a, c = sc.par.c, t = sc.par.t;
    const double a2 = a * a;
    // Coefficient vectors in z of the cubic-in-S coefficients.
    const std::vector<double> A = {0.0, a2, 0.0, 1.0};
    const std::vector<double> B = {-(t + 2.0 * c) * a2, 0.0, -(t + 4.0 * c)};
    const std::vector<double> C = {0.0, sc.C1, 0.0, a2};
    const std::vector<double> D = {-sc.C2, 0.0, -(t + 2.0 * c) * a2};

    // disc = 18 ABCD - 4 B^3 D + B^2 C^2 - 4 A C^3 - 27 A^2 D^2
    std::vector<double> disc(13, 0.0);
    padd(disc, pmul(pmul(A, B), pmul(C, D)), 18.0);
    padd(disc, pmul(pmul(B, B), pmul(B, D)), -4.0);
    padd(disc, pmul(pmul(B, B), pmul(C, C)), 1.0);
    padd(disc, pmul(pmul(A, C), pmul(C, C)), -4.0);
    padd(disc, pmul(pmul(A, A), pmul(D, D)), -27.0);
    disc.resize(13, 0.0);

    double cmax = 0.0;
    for (double v : disc) cmax = std::max(cmax, std::abs(v));
    const double lead = -4.0 * a2 * a2 * a2;
    if (std::abs(disc[12] - lead) > 1e-9 * cmax)
        throw numeric_error("discriminant: unexpected leading coefficient");
    for (int k = 1; k < 13; k += 2) {
        if (std::abs(disc[k]) > 1e-9 * cmax)
            throw numeric_error("discriminant: odd powers do not cancel");
        disc[k] = 0.0;
    }

    // Even in z: factor through w = z^2 and cluster the six w-roots.
    std::vector<double> even(7);
    for (int k = 0; k <= 6; ++k) even[k] = disc[2 * k];
    auto wroots = poly_roots(even);
    std::sort(wroots.begin(), wroots.end(), [](cplx u, cplx v) {
        return u.real() != v.real() ? u.real() < v.real()
                                    : u.imag() < v.imag();
    });
    double wscale = 0.0;
    for (auto w : wroots) wscale = std::max(wscale, std::abs(w));

    std::vector<cplx> wc;         // cluster representatives
    std::vector<int> wmult;
    for (size_t i = 0; i < wroots.size();) {
        size_t j = i + 1;
        cplx sum = wroots[i];
        while (j < wroots.size() &&
               std::abs(wroots[j] - wroots[i]) < 3e-6 * wscale) {
            sum += wroots[j];
            ++j;
        }
        wc.push_back(sum / double(j - i));
        wmult.push_back(int(j - i));
        i = j;
    }

    const auto deven = pderiv(even);
    DiscriminantInfo info;
    info.coeffs = disc;
    for (size_t i = 0; i < wc.size(); ++i) {
        if (std::abs(wc[i].imag()) > 1e-6 * wscale)
            throw numeric_error("discriminant: non-real root of the even part");
        double w = wc[i].real();
        // Simple roots polish on the polynomial, double roots on its
        // derivative (where they sit as simple roots).
        w = wmult[i] == 1 ? newton_polish_real(even, w, 40)
                          : newton_polish_real(deven, w, 40);
        if (w > 0.0) {
            const double x = std::sqrt(w);
            info.roots.push_back(cplx(x, 0.0));
            info.roots.push_back(cplx(-x, 0.0));
        } else {
            const double y = std::sqrt(-w);
            info.roots.push_back(cplx(0.0, y));
            info.roots.push_back(cplx(0.0, -y));
        }
        info.multiplicity.push_back(wmult[i]);
        info.multiplicity.push_back(wmult[i]);
    }
    int total = 0;
    for (int m : info.multiplicity) total += m;
    if (total != 12)
        throw numeric_error("discriminant: root multiplicities do not sum to 12");
    return info;
}

SpectralCurve make_spectral_curve(const ConformalData& cd) {
    SpectralCurve sc;
    sc.par = cd.par;
    sc.cd = cd;
    const double a = cd.par.a, c = cd.par.c, t = cd.par.t;
    const double a2 = a * a;
    critical_points(cd);  // throws past the phase boundary

    // C1 and C2 from the parametrization: at any z off the branch cuts the
    // three preimages w_k of z give the branch values S_k = f(1/w_k), and
    // e2 = (a^2 z^2 + C1)/(z^2 + a^2), e3 = ((t+2c) a^2 z^2 + C2)/(z(z^2+a^2)).
    double c1sum = 0.0, c2sum = 0.0;
    std::vector<double> c1s, c2s;
    for (int k = 0; k < 10; ++k) {
        const cplx z = cd.x2 * cplx(1.5 + 0.25 * k, 0.8 + 0.3 * k);
        const auto w = f_preimages(cd, z);
        cplx S[3];
        for (int j = 0; j < 3; ++j) S[j] = eval_f(cd, 1.0 / w[j]);
        const cplx e2 = S[0] * S[1] + S[0] * S[2] + S[1] * S[2];
        const cplx e3 = S[0] * S[1] * S[2];
        const cplx z2 = z * z;
        const cplx C1 = e2 * (z2 + a2) - a2 * z2;
        const cplx C2 = e3 * z * (z2 + a2) - (t + 2.0 * c) * a2 * z2;
        c1s.push_back(C1.real());
        c2s.push_back(C2.real());
        c1sum += C1.real();
        c2sum += C2.real();
        sc.C1_spread = std::max(sc.C1_spread, std::abs(C1.imag()));
        sc.C2_spread = std::max(sc.C2_spread, std::abs(C2.imag()));
    }
    sc.C1 = c1sum / 10.0;
    sc.C2 = c2sum / 10.0;
    for (int k = 0; k < 10; ++k) {
        sc.C1_spread = std::max(sc.C1_spread, std::abs(c1s[k] - sc.C1));
        sc.C2_spread = std::max(sc.C2_spread, std::abs(c2s[k] - sc.C2));
    }
    const double cscale = std::max({1.0, std::abs(sc.C1), std::abs(sc.C2)});
    if (std::max(sc.C1_spread, sc.C2_spread) > 1e-6 * cscale)
        throw numeric_error(
            "spectral curve: probe points disagree on C1 or C2");
    if (sc.C1 <= a2 * a2 + 4.0 * c * c)
        throw numeric_error("spectral curve: C1 bound violated");
    if (sc.C2 <= 0.0)
        throw numeric_error("spectral curve: C2 must be positive");

    // Branch labels from the far-field expansions S1 ~ (t+2c)/z,
    // S2 ~ ia + c/z, S3 ~ -ia + c/z.
    sc.anchor_z = 1e3 * cd.x2 * cplx(1.0, 1.0);
    const auto ar = cubic_roots_at(sc, sc.anchor_z);
    const cplx targets[3] = {(t + 2.0 * c) / sc.anchor_z,
                             cplx(0.0, a) + c / sc.anchor_z,
                             cplx(0.0, -a) + c / sc.anchor_z};
    int best = 0;
    double bc = std::numeric_limits<double>::infinity();
    for (int p = 0; p < 6; ++p) {
        const double cost = std::abs(targets[0] - ar[kPerm[p][0]]) +
                            std::abs(targets[1] - ar[kPerm[p][1]]) +
                            std::abs(targets[2] - ar[kPerm[p][2]]);
        if (cost < bc) {
            bc = cost;
            best = p;
        }
    }
    for (int k = 0; k < 3; ++k) sc.anchor_S[k] = ar[kPerm[best][k]];
    if (bc > 1e-2 * a)
        throw numeric_error("spectral curve: far-field labeling failed");

    // b0 is pinned by C2 = a^2 (t+2c) b0^2; b1, b2 are the double roots of
    // the discriminant on the imaginary axis.
    sc.b0 = std::sqrt(sc.C2 / (a2 * (t + 2.0 * c)));
    const auto di = discriminant(sc);
    std::vector<double> simple, dbl;
    for (size_t i = 0; i < di.roots.size(); ++i) {
        const cplx r = di.roots[i];
        if (r.real() > 0.0 && r.imag() == 0.0 && di.multiplicity[i] == 1)
            simple.push_back(r.real());
        if (r.imag() > 0.0 && r.real() == 0.0 && di.multiplicity[i] == 2)
            dbl.push_back(r.imag());
    }
    if (simple.size() != 2 || dbl.size() != 2)
        throw numeric_error("spectral curve: unexpected discriminant pattern");
    std::sort(simple.begin(), simple.end());
    std::sort(dbl.begin(), dbl.end());
    sc.x1_disc = simple[0];
    sc.x2_disc = simple[1];
    sc.b1 = dbl[0];
    sc.b2 = dbl[1];
    const double xs = std::max(cd.x1, cd.x2);
    if (std::abs(sc.x1_disc - cd.x1) > 1e-7 * xs ||
        std::abs(sc.x2_disc - cd.x2) > 1e-7 * xs)
        throw numeric_error(
            "spectral curve: discriminant roots disagree with the critical "
            "values of f");
    if (!(sc.b0 <= sc.b1 + 1e-9 * a && sc.b1 < a && a < sc.b2))
        throw numeric_error("spectral curve: node ordering violated");
    return sc;
}

Nodes find_nodes(const SpectralCurve& sc) {
    const double a = sc.par.a;
    Nodes nd;

    // Scan up to the pole at ia for the first sign change of Im S1.
    const double lo0 = 1e-6 * a;
    if (psi1(sc, lo0) >= 0.0)
        throw numeric_error("find_nodes: Im S1 not negative near the origin");
    double hi = 0.0;
    for (int k = 1; k <= 46 && hi == 0.0; ++k) {
        const double y = a * (1.0 - std::pow(2.0, -k));
        if (y > lo0 && psi1(sc, y) > 0.0) hi = y;
    }
    if (hi == 0.0) throw numeric_error("find_nodes: no sign change below ia");
    double lo = lo0;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (psi1(sc, mid) < 0.0 ? lo : hi) = mid;
    }
    nd.b0 = 0.5 * (lo + hi);

    // b1 is the intersection of the first two branches on (0, a).  Branch
    // values only coincide where the discriminant vanishes, so the sign
    // change of the difference brackets the node and nothing else.  (The
    // fixed-point relation S1(ib1) = ib1 also holds there, but the swap
    // symmetry of the curve in S and z puts extra diagonal crossings on the
    // axis, so it does not isolate the node.)
    const auto h12 = [&](const double y) {
        const auto S = eval_S_all(sc, cplx(0.0, y));
        return S[0].imag() - S[1].imag();
    };
    lo = lo0;
    if (h12(lo) >= 0.0)
        throw numeric_error("find_nodes: branches out of order near the origin");
    hi = 0.0;
    for (int k = 1; k <= 46 && hi == 0.0; ++k) {
        const double y = a * (1.0 - std::pow(2.0, -k));
        if (y > lo && h12(y) > 0.0) hi = y;
    }
    if (hi == 0.0) throw numeric_error("find_nodes: no bracket for b1");
    // Stop above the node's noise floor: the colliding pair cannot be told
    // apart closer in, and sharper values come from the discriminant anyway.
    for (int i = 0; i < 60 && hi - lo > 1e-6 * a; ++i) {
        const double mid = 0.5 * (lo + hi);
        (h12(mid) < 0.0 ? lo : hi) = mid;
    }
    nd.b1 = 0.5 * (lo + hi);

    // b2 is the intersection of the first and third branches above the pole,
    // where Im S1 rises from -infinity back toward zero past Im S3 ~ -a.
    const auto h13 = [&](const double y) {
        const auto S = eval_S_all(sc, cplx(0.0, y));
        return S[0].imag() - S[2].imag();
    };
    lo = 0.0;
    for (int k = 1; k <= 46 && lo == 0.0; ++k) {
        const double y = a * (1.0 + std::pow(2.0, -k));
        if (h13(y) < 0.0) lo = y;
    }
    if (lo == 0.0) throw numeric_error("find_nodes: no lower bracket for b2");
    hi = 0.0;
    for (double y = 2.0 * a; y <= 1024.0 * a && hi == 0.0; y *= 2.0)
        if (h13(y) > 0.0) hi = y;
    if (hi == 0.0) throw numeric_error("find_nodes: no upper bracket for b2");
    for (int i = 0; i < 60 && hi - lo > 1e-6 * a; ++i) {
        const double mid = 0.5 * (lo + hi);
        (h13(mid) < 0.0 ? lo : hi) = mid;
    }
    nd.b2 = 0.5 * (lo + hi);

    if (std::abs(nd.b0 - sc.b0) > 1e-8 * a ||
        std::abs(nd.b1 - sc.b1) > 2e-6 * a ||
        std::abs(nd.b2 - sc.b2) > 2e-6 * a)
        throw numeric_error(
            "find_nodes: bisection disagrees with the closed-form and "
            "discriminant node locations");
    return nd;
}

int zS_value_count(const SpectralCurve& sc, double v, double y_max) {
    const double a = sc.par.a;
    if (y_max <= 0.0) y_max = 50.0 * std::max(a, sc.cd.x2);

    // A y-grid dense toward the degenerate points 0 and a from both sides,
    // geometric out to y_max.  One branch evaluation serves all sheets.
    std::vector<double> ys;
    for (int j = 0; j <= 40; ++j)
        ys.push_back(1e-5 * a * std::pow(0.5 * a / (1e-5 * a), j / 40.0));
    for (int k = 2; k <= 30; ++k) ys.push_back(a * (1.0 - std::pow(2.0, -k)));
    for (int k = 30; k >= 2; --k) ys.push_back(a * (1.0 + std::pow(2.0, -k)));
    const double start = 1.25 * a;
    for (int j = 0; j <= 120; ++j)
        ys.push_back(start * std::pow(y_max / start, j / 120.0));
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

    std::vector<std::array<double, 3>> G(ys.size());
    for (size_t i = 0; i < ys.size(); ++i) {
        const auto S = eval_S_all(sc, cplx(0.0, ys[i]));
        for (int j = 0; j < 3; ++j) G[i][j] = -ys[i] * S[j].imag();
    }

    int count = 0;
    for (size_t i = 0; i + 1 < ys.size(); ++i) {
        const bool spans_pole = ys[i] < a && ys[i + 1] > a;
        for (int j = 0; j < 3; ++j) {
            if (j == 0 && spans_pole) continue;  // S1 has the pole at ia
            if ((G[i][j] - v) * (G[i + 1][j] - v) < 0.0) ++count;
        }
    }
    return 2 * count;  // z -> -z maps the positive axis solutions bijectively
}

double zS_crit_s2(const SpectralCurve& sc) {
    const double a = sc.par.a;
    const auto G1 = [&](double y) {
        return -y * eval_S_all(sc, cplx(0.0, y))[0].imag();
    };
    // The first-sheet values on the imaginary axis peak inside (0, b0).
    double best_y = 0.5 * sc.b0, best = -1.0;
    for (int j = 1; j < 60; ++j) {
        const double y = sc.b0 * j / 60.0;
        const double gy = G1(y);
        if (gy > best) {
            best = gy;
            best_y = y;
        }
    }
    const double w = sc.b0 / 60.0;
    return golden_max(G1, std::max(1e-8 * a, best_y - w), best_y + w, 60);
}

double zS_crit_s1(const SpectralCurve& sc) {
    const auto F = [&](double x) {
        return -x * eval_S_all(sc, cplx(x, 0.0))[0].real();
    };
    const double lo = sc.cd.x1 * (1.0 + 1e-6), hi = 30.0 * sc.cd.x2;
    double best_x = lo, best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j <= 300; ++j) {
        const double x = lo * std::pow(hi / lo, j / 300.0);
        const double fx = F(x);
        if (fx > best) {
            best = fx;
            best_x = x;
        }
    }
    const double wl = best_x * (1.0 - 0.02), wr = best_x * (1.0 + 0.02);
    return -golden_max(F, std::max(lo, wl), wr, 60);
}

}
