#include "motherbody/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "motherbody/numerics.hpp"

namespace motherbody {

namespace {

constexpr double pi = 3.14159265358979323846;

// Distance from z to the nearest square-root edge or pole of the curve,
// used to grade quadrature panels toward the end of an integration path.
double edge_distance(const SpectralCurve& sc, cplx z) {
    const double a = sc.par.a;
    const double x1 = sc.cd.x1, x2 = sc.cd.x2;
    double d = std::abs(z - cplx(x1, 0.0));
    d = std::min(d, std::abs(z + cplx(x1, 0.0)));
    d = std::min(d, std::abs(z - cplx(x2, 0.0)));
    d = std::min(d, std::abs(z + cplx(x2, 0.0)));
    d = std::min(d, std::abs(z - cplx(0.0, a)));
    d = std::min(d, std::abs(z + cplx(0.0, a)));
    d = std::min(d, std::abs(z));
    return d;
}

// Integrates branch-based integrands along the straight segment z0 -> z1,
// walking the labeled triple node by node.  Panels shrink geometrically
// toward the z1 end until they are below d_end, so edges and poles at or
// near the target never meet a panel longer than its distance to them.
// emit(z, S, w) is called with the quadrature weight w (complex, includes
// the direction dz); the returned triple is the continuation to z1.
template <typename Emit>
std::array<cplx, 3> integrate_leg(const SpectralCurve& sc, cplx z0,
                                  std::array<cplx, 3> S, cplx z1,
                                  double d_end, const Emit& emit) {
    const cplx dz = z1 - z0;
    const double len = std::abs(dz);
    if (len == 0.0) return S;
    const cplx unit = dz / len;

    // Distances from z1, ascending; panel k is [cuts[k], cuts[k+1]].
    const double floor_ = 1e-9 * std::max(1.0, len);
    std::vector<double> cuts{0.0, std::clamp(d_end, floor_, len)};
    while (cuts.back() < len)
        cuts.push_back(std::min(1.6 * cuts.back(), len));
    // A second grading from the z0 end, so a long chord leaving a far-field
    // anchor does not cross decades of 1/z variation in one panel.
    for (double d0 = std::clamp(edge_distance(sc, z0), floor_, len);
         d0 < len; d0 *= 1.6)
        cuts.push_back(len - d0);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const auto& q = gauss_legendre(16);
    cplx z_prev = z0;
    for (size_t p = cuts.size() - 1; p > 0; --p) {
        const cplx za = z1 - unit * cuts[p];
        const cplx zb = z1 - unit * cuts[p - 1];
        const cplx mid = 0.5 * (za + zb), half = 0.5 * (zb - za);
        for (size_t k = 0; k < q.x.size(); ++k) {
            const cplx zn = mid + q.x[k] * half;
            S = continue_branches(sc, z_prev, S, zn);
            emit(zn, S, q.w[k] * half);
            z_prev = zn;
        }
    }
    return continue_branches(sc, z_prev, S, z1);
}

// Least-squares slope of log(f) against log(d) over geometrically spaced
// distances d in [d_lo, d_hi].
double loglog_slope(const std::function<double(double)>& f, double d_lo,
                    double d_hi, int n) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < n; ++k) {
        const double d =
            d_hi * std::pow(d_lo / d_hi, double(k) / double(n - 1));
        const double lx = std::log(d), ly = std::log(f(d));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double sgn_upper(cplx z) {
    if (z.imag() > 0.0) return 1.0;
    if (z.imag() < 0.0) return -1.0;
    return std::signbit(z.imag()) ? -1.0 : 1.0;
}

// Closed forms for int log(z-s)/s^2 ds over [X,inf) and (-inf,-X]; the
// antiderivative of the right tail is -log(z-s)/s + (1/z) log((z-s)/s),
// whose limit at infinity is +-i pi / z by half plane.
cplx log_tail_right(cplx z, double X) {
    const cplx w = z - X;
    return cplx(0.0, pi * sgn_upper(z)) / z + std::log(w) / X -
           std::log(w / X) / z;
}
cplx log_tail_left(cplx z, double X) {
    const cplx w = z + X;
    return std::log(w) / X + std::log(w / X) / z;
}

// Same for the Cauchy kernel: int 1/(s^2 (z-s)) ds over the two tails.
cplx cauchy_tail_right(cplx z, double X) {
    return 1.0 / (z * X) +
           (std::log((z - X) / X) - cplx(0.0, pi * sgn_upper(z))) / (z * z);
}
cplx cauchy_tail_left(cplx z, double X) {
    return 1.0 / (z * X) - std::log((z + X) / X) / (z * z);
}

}  // namespace

double DensityGrid::grid_mass() const {
    double m = 0.0;
    for (double w : mass_weights) m += w;
    return m;
}

double DensityGrid::tail_mass() const {
    return x_max > 0.0 ? 2.0 * tail_coeff / x_max : 0.0;
}

double DensityGrid::mass() const { return grid_mass() + tail_mass(); }

double mu1_density_at(const SpectralCurve& sc, double x) {
    if (std::abs(x) >= sc.cd.x1) return 0.0;
    const double t = sc.par.t;
    if (std::abs(x) < 1e-14 * sc.cd.x1) {
        // At the origin the cubic collapses to a quadratic in S and the
        // branch pair is purely imaginary.
        const double a2 = sc.par.a * sc.par.a;
        return std::sqrt(sc.C2 / ((t + 2.0 * sc.par.c) * a2)) / (pi * t);
    }
    const cplx s1 = eval_S(sc, {cplx(x, 0.0), Sheet::one, Side::plus});
    return -s1.imag() / (pi * t);
}

double mu2_density_at(const SpectralCurve& sc, double x) {
    const double a = sc.par.a, t = sc.par.t;
    if (std::abs(x) <= sc.cd.x2) return a / (pi * t);
    const cplx s3 = eval_S(sc, {cplx(x, 0.0), Sheet::three, Side::plus});
    return (a + s3.imag()) / (pi * t);
}

DensityGrid density_mu1(const SpectralCurve& sc, int n) {
    const double x1 = sc.cd.x1;
    DensityGrid g;
    g.support = {{-x1, x1}};
    g.nodes.reserve(n - 1);
    g.values.reserve(n - 1);
    g.mass_weights.reserve(n - 1);
    // Chebyshev angles; the sin factor in the weight absorbs the
    // square-root vanishing, making the rule spectrally accurate.
    for (int j = n - 1; j >= 1; --j) {
        const double th = pi * double(j) / double(n);
        const double x = x1 * std::cos(th);
        const double rho = mu1_density_at(sc, x);
        if (rho < -1e-12 / sc.par.t)
            throw numeric_error(
                "density_mu1: negative density, branch labels are wrong");
        g.nodes.push_back(x);
        g.values.push_back(std::max(rho, 0.0));
        g.mass_weights.push_back(pi * x1 / double(n) * std::sin(th) *
                                 g.values.back());
    }
    return g;
}

DensityGrid density_mu2(const SpectralCurve& sc, double x_max, int order) {
    const double a = sc.par.a, c = sc.par.c, t = sc.par.t;
    const double x2 = sc.cd.x2;
    const double sat = a / (pi * t);
    if (x_max < 4.0 * x2)
        throw std::invalid_argument("density_mu2: cutoff too small");

    struct Pt {
        double x, v, w;
    };
    std::vector<Pt> pts;
    const auto& q = gauss_legendre(order);

    // Saturated block: the density is exactly the constraint there.
    for (size_t k = 0; k < q.x.size(); ++k)
        pts.push_back({x2 * q.x[k], sat, q.w[k] * x2 * sat});

    // Cut part, right side.  Near leg s = x2 + v^2 absorbs the square-root
    // edge; far leg u = 1/s absorbs the x^-2 decay toward the cutoff.
    const double s_mid = x2 + std::max(x2, 0.5 * a);
    const double vm = std::sqrt(s_mid - x2);
    auto add_mirrored = [&](double s, double w) {
        for (double sign : {1.0, -1.0}) {
            const double x = sign * s;
            const double rho = mu2_density_at(sc, x);
            if (rho > sat + 1e-10)
                throw numeric_error(
                    "density_mu2: density exceeds the constraint");
            if (rho < -1e-12 / t)
                throw numeric_error(
                    "density_mu2: negative density, branch labels are wrong");
            pts.push_back({x, rho, w * std::max(rho, 0.0)});
        }
    };
    for (size_t k = 0; k < q.x.size(); ++k) {
        const double v = 0.5 * vm * (q.x[k] + 1.0);
        add_mirrored(x2 + v * v, q.w[k] * vm * v);
    }
    // Far leg in u = 1/s.  The log kernel applied to this grid later is
    // singular at u = 0, one cutoff-width from the interval end, so the
    // panels shrink geometrically toward it.
    const auto& qf = gauss_legendre(std::max(12, order / 4));
    std::vector<double> ub{1.0 / x_max};
    while (2.0 * ub.back() < 1.0 / s_mid) ub.push_back(2.0 * ub.back());
    ub.push_back(1.0 / s_mid);
    for (size_t p = 0; p + 1 < ub.size(); ++p)
        for (size_t k = 0; k < qf.x.size(); ++k) {
            const double u = 0.5 * (ub[p] + ub[p + 1]) +
                             0.5 * (ub[p + 1] - ub[p]) * qf.x[k];
            add_mirrored(1.0 / u,
                         qf.w[k] * 0.5 * (ub[p + 1] - ub[p]) / (u * u));
        }

    std::sort(pts.begin(), pts.end(),
              [](const Pt& p, const Pt& r) { return p.x < r.x; });

    DensityGrid g;
    g.support = {{-x_max, -x2}, {-x2, x2}, {x2, x_max}};
    g.x_max = x_max;
    for (const auto& p : pts) {
        g.nodes.push_back(p.x);
        g.values.push_back(p.v);
        g.mass_weights.push_back(p.w);
    }
    // Exact x^-2 tail coefficient: expanding the curve on the third sheet
    // as S = -ia + c/z + s2/z^2 + ... and balancing the 1/z^2 order gives
    // s2 = -ia (C1 - a^4 - 2tc - 5c^2) / (2a^2), whose imaginary part is
    // the density decay.  The grid plus this tail carries the full mass.
    const double a4 = a * a * a * a;
    g.tail_coeff =
        (a4 + 2.0 * t * c + 5.0 * c * c - sc.C1) / (2.0 * pi * a * t);
    return g;
}

double rho_limit_density(double a, double c, double x) {
    const double ax = std::abs(x);
    if (ax <= c / a) return a / pi;
    return a / pi - std::sqrt(a * a * x * x - c * c) / (pi * ax);
}

double rho_limit_potential(double a, double c, double x) {
    if (std::abs(x) >= c / a) return -c * std::log(std::abs(x));
    const double r = std::sqrt(c * c - a * a * x * x);
    return r - c * std::log(c + r) + c * std::log(a);
}

DensityGrid rho_limit_measure(double a, double c, double x_max, int order) {
    const double edge = c / a;
    if (x_max < 4.0 * edge)
        throw std::invalid_argument("rho_limit_measure: cutoff too small");
    struct Pt {
        double x, v, w;
    };
    std::vector<Pt> pts;
    const auto& q = gauss_legendre(order);
    for (size_t k = 0; k < q.x.size(); ++k)
        pts.push_back({edge * q.x[k], a / pi, q.w[k] * edge * a / pi});
    const double s_mid = edge + std::max(edge, 0.5 * a);
    const double vm = std::sqrt(s_mid - edge);
    auto add_mirrored = [&](double s, double w) {
        const double rho = rho_limit_density(a, c, s);
        pts.push_back({s, rho, w * rho});
        pts.push_back({-s, rho, w * rho});
    };
    for (size_t k = 0; k < q.x.size(); ++k) {
        const double v = 0.5 * vm * (q.x[k] + 1.0);
        add_mirrored(edge + v * v, q.w[k] * vm * v);
    }
    const auto& qf = gauss_legendre(std::max(12, order / 4));
    std::vector<double> ub{1.0 / x_max};
    while (2.0 * ub.back() < 1.0 / s_mid) ub.push_back(2.0 * ub.back());
    ub.push_back(1.0 / s_mid);
    for (size_t p = 0; p + 1 < ub.size(); ++p)
        for (size_t k = 0; k < qf.x.size(); ++k) {
            const double u = 0.5 * (ub[p] + ub[p + 1]) +
                             0.5 * (ub[p + 1] - ub[p]) * qf.x[k];
            add_mirrored(1.0 / u,
                         qf.w[k] * 0.5 * (ub[p + 1] - ub[p]) / (u * u));
        }
    std::sort(pts.begin(), pts.end(),
              [](const Pt& p, const Pt& r) { return p.x < r.x; });
    DensityGrid g;
    g.support = {{-x_max, -edge}, {-edge, edge}, {edge, x_max}};
    g.x_max = x_max;
    g.tail_coeff = c * c / (2.0 * pi * a);  // exact leading decay
    for (const auto& p : pts) {
        g.nodes.push_back(p.x);
        g.values.push_back(p.v);
        g.mass_weights.push_back(p.w);
    }
    return g;
}

double mass_on_interval(const SpectralCurve& sc, int which, double lo,
                        double hi) {
    if (which != 1 && which != 2)
        throw std::invalid_argument("mass_on_interval: which must be 1 or 2");
    if (hi < lo) std::swap(lo, hi);
    const double edge = which == 1 ? sc.cd.x1 : sc.cd.x2;
    std::function<double(double)> f = [&sc, which](double x) {
        return which == 1 ? mu1_density_at(sc, x) : mu2_density_at(sc, x);
    };
    if (which == 1) {
        lo = std::max(lo, -edge);
        hi = std::min(hi, edge);
        if (hi <= lo) return 0.0;
    }
    // Split at the edges and at the midpoints, then grade each piece toward
    // any endpoint sitting on an edge of the support structure.
    std::vector<double> splits{lo, hi};
    for (double e : {-edge, edge})
        if (e > lo && e < hi) splits.push_back(e);
    std::sort(splits.begin(), splits.end());
    double total = 0.0;
    for (size_t i = 0; i + 1 < splits.size(); ++i) {
        const double a = splits[i], b = splits[i + 1];
        const double m = 0.5 * (a + b);
        auto is_edge = [&](double x) {
            return std::abs(std::abs(x) - edge) < 1e-12 * (1.0 + edge);
        };
        for (auto [p0, p1] : {std::pair{a, m}, std::pair{m, b}}) {
            const double sing = (p0 == a) ? a : b;
            if (is_edge(sing)) {
                auto bp = graded_breakpoints(sing, sing == a ? p1 : p0, 17);
                double v = integrate_panels(f, bp, 16);
                total += (bp.front() < bp.back()) ? v : -v;
            } else {
                total += integrate_panels(f, {p0, p1}, 16);
            }
        }
    }
    return total;
}

double mu1_edge_exponent(const SpectralCurve& sc) {
    const double x1 = sc.cd.x1;
    return loglog_slope(
        [&](double d) { return mu1_density_at(sc, x1 - d); }, 1e-3 * x1,
        0.1 * x1, 12);
}

double mu2_edge_exponent(const SpectralCurve& sc) {
    const double x2 = sc.cd.x2;
    const double sat = sc.par.a / (pi * sc.par.t);
    return loglog_slope(
        [&](double d) { return sat - mu2_density_at(sc, x2 + d); },
        1e-3 * x2, 0.1 * x2, 12);
}

CauchyTransforms cauchy_transforms(const SpectralCurve& sc, cplx z) {
    const double a = sc.par.a, c = sc.par.c, t = sc.par.t;
    const auto S = eval_S_all(sc, z);
    const cplx ia(0.0, a * sgn_upper(z));
    return {(S[0] - 2.0 * c * z / (z * z + a * a)) / t,
            (-S[2] + (t + 2.0 * c) / z - ia) / t};
}

cplx cauchy_mu2_alt(const SpectralCurve& sc, cplx z) {
    const double a = sc.par.a, c = sc.par.c, t = sc.par.t;
    const auto S = eval_S_all(sc, z);
    const cplx ia(0.0, a * sgn_upper(z));
    return (S[1] + S[0] - 2.0 * c * z / (z * z + a * a) - ia) / t;
}

cplx cauchy_quadrature(const DensityGrid& g, cplx z) {
    cplx acc = 0.0;
    for (size_t i = 0; i < g.nodes.size(); ++i)
        acc += g.mass_weights[i] / (z - g.nodes[i]);
    if (g.x_max > 0.0)
        acc += g.tail_coeff *
               (cauchy_tail_right(z, g.x_max) + cauchy_tail_left(z, g.x_max));
    return acc;
}

cplx g1_function(const MeasureSet& ms, cplx z) {
    if (z.imag() == 0.0 && z.real() <= ms.sc.cd.x1)
        throw std::domain_error("g1: argument on the branch cut");
    cplx acc = 0.0;
    const auto& g = ms.mu1;
    for (size_t i = 0; i < g.nodes.size(); ++i)
        acc += g.mass_weights[i] * std::log(z - g.nodes[i]);
    return acc;
}

cplx g2_function(const MeasureSet& ms, cplx z) {
    const double x2 = ms.sc.cd.x2;
    const double sat = ms.sc.par.a / (pi * ms.sc.par.t);
    if (z.imag() == 0.0 && std::signbit(z.imag()))
        z = cplx(z.real(), 0.0);  // normalize -0 to the plus side
    // Saturated block in closed form; the signed zero of the imaginary part
    // keeps real arguments on the limit from above.
    cplx acc = sat * ((x2 - z) * std::log(z - x2) +
                      (x2 + z) * std::log(z + x2) - 2.0 * x2);
    const auto& g = ms.mu2;
    for (size_t i = 0; i < g.nodes.size(); ++i)
        if (std::abs(g.nodes[i]) > x2)
            acc += g.mass_weights[i] * std::log(z - g.nodes[i]);
    acc += g.tail_coeff *
           (log_tail_right(z, g.x_max) + log_tail_left(z, g.x_max));
    return acc;
}

MeasureSet build_measures(const ModelParams& par) {
    MeasureSet ms;
    ms.sc = make_spectral_curve(solve_map(par));
    ms.mu1 = density_mu1(ms.sc);
    ms.mu2 = density_mu2(ms.sc);
    return ms;
}

PotentialEvaluator::PotentialEvaluator(const MeasureSet& ms) : ms_(ms) {
    const double a = ms.sc.par.a;
    const double R = std::max({10.0, 5.0 * a, 10.0 * ms.sc.cd.x2});
    anchor_z_ = R * cplx(std::cos(0.25 * pi), std::sin(0.25 * pi));
    anchor_S_ = eval_S_all(ms.sc, anchor_z_);
    // g1 at the anchor from the far-field moment expansion (odd moments
    // vanish by symmetry), g2 from the split construction.
    cplx g1a = std::log(anchor_z_);
    for (int k = 2; k <= 16; k += 2) {
        double mk = 0.0;
        for (size_t i = 0; i < ms.mu1.nodes.size(); ++i)
            mk += ms.mu1.mass_weights[i] * std::pow(ms.mu1.nodes[i], k);
        g1a -= mk / (double(k) * std::pow(anchor_z_, k));
    }
    re_g1_anchor_ = g1a.real();
    re_g2_anchor_ = g2_function(ms, anchor_z_).real();
}

void PotentialEvaluator::both(cplx z, double& u1, double& u2) const {
    // Both measures are even and real, so the potentials are symmetric in
    // both axes; fold into the closed first quadrant where the anchor path
    // stays clear of the cuts.
    z = cplx(std::abs(z.real()), std::abs(z.imag()));
    // The potentials are regular at the origin but the curve degenerates
    // there, so nudge the endpoint off by a negligible amount.
    if (std::abs(z) < 1e-9) z = cplx(1e-9, 0.0);
    const auto& sc = ms_.sc;
    const double a = sc.par.a, c = sc.par.c, t = sc.par.t;
    cplx i1 = 0.0, i2 = 0.0;
    integrate_leg(sc, anchor_z_, anchor_S_, z, edge_distance(sc, z),
                  [&](cplx s, const std::array<cplx, 3>& S, cplx w) {
                      i1 += w * (S[0] - 2.0 * c * s / (s * s + a * a));
                      i2 += w * (-S[2] + (t + 2.0 * c) / s - cplx(0.0, a));
                  });
    u1 = -(re_g1_anchor_ + i1.real() / t);
    u2 = -(re_g2_anchor_ + i2.real() / t);
}

double PotentialEvaluator::U1(cplx z) const {
    double u1, u2;
    both(z, u1, u2);
    return u1;
}

double PotentialEvaluator::U2(cplx z) const {
    double u1, u2;
    both(z, u1, u2);
    return u2;
}

double PotentialEvaluator::u(cplx z) const {
    const double a = ms_.sc.par.a, c = ms_.sc.par.c, t = ms_.sc.par.t;
    double u1, u2;
    both(z, u1, u2);
    return u1 + u2 - (c / t) * std::log(std::abs(z * z + a * a)) +
           ((t + 2.0 * c) / t) * std::log(std::abs(z)) +
           (a / t) * std::abs(z.imag());
}

VariationalReport variational_check(const MeasureSet& ms,
                                    const PotentialEvaluator& pe) {
    const double a = ms.sc.par.a, c = ms.sc.par.c, t = ms.sc.par.t;
    const double x1 = ms.sc.cd.x1, x2 = ms.sc.cd.x2;
    auto first = [&](double x) {
        double u1, u2;
        pe.both(cplx(x, 0.0), u1, u2);
        return 2.0 * u1 - u2 - (c / t) * std::log(x * x + a * a);
    };
    auto second = [&](double x) {
        double u1, u2;
        pe.both(cplx(x, 0.0), u1, u2);
        return 2.0 * u2 - u1 + ((t + 2.0 * c) / t) * std::log(std::abs(x));
    };

    VariationalReport rep;
    // Equality on the mother-body support fixes ell; the scatter across the
    // samples is the accuracy statement.
    std::vector<double> eq;
    for (double f : {0.0, 0.12, 0.25, 0.37, 0.5, 0.62, 0.75, 0.85, 0.95})
        eq.push_back(first(f * x1));
    double mean = 0.0;
    for (double v : eq) mean += v;
    mean /= double(eq.size());
    double var = 0.0;
    for (double v : eq) var += (v - mean) * (v - mean);
    rep.ell = mean;
    rep.ell_spread = std::sqrt(var / double(eq.size()));

    rep.min_gap_outside = 1e300;
    for (double f : {0.15, 0.3, 0.5, 0.7, 0.85, 1.0})
        rep.min_gap_outside = std::min(
            rep.min_gap_outside, first(x1 + f * (x2 - x1)) - rep.ell);

    rep.max_abs_slack = 0.0;
    for (double x : {x2, 1.2 * x2, 2.0 * x2, 5.0 * x2, 20.0 * x2})
        rep.max_abs_slack = std::max(rep.max_abs_slack,
                                     std::abs(second(x)));

    rep.max_saturated = -1e300;
    for (double f : {0.05, 0.3, 0.6, 0.9, 0.97})
        rep.max_saturated = std::max(rep.max_saturated, second(f * x2));

    if (rep.min_gap_outside <= 0.0 || rep.max_saturated >= 0.0 ||
        rep.ell_spread > 1e-4)
        throw numeric_error("variational_check: equilibrium conditions fail");
    return rep;
}

EquilibriumData contour_u_and_gamma(const MeasureSet& ms,
                                    const PotentialEvaluator& pe,
                                    double ell) {
    const double a = ms.sc.par.a;
    const double x1 = ms.sc.cd.x1, x2 = ms.sc.cd.x2;
    EquilibriumData eq;
    eq.ell = ell;

    // u - ell changes sign exactly once between the supports.
    double lo = x1 * (1.0 + 1e-9), hi = x2 * (1.0 - 1e-9);
    if (pe.u(cplx(lo, 0.0)) >= ell || pe.u(cplx(hi, 0.0)) <= ell)
        throw numeric_error("contour: no level crossing between x1 and x2");
    for (int i = 0; i < 80 && hi - lo > 1e-14 * x2; ++i) {
        const double mid = 0.5 * (lo + hi);
        (pe.u(cplx(mid, 0.0)) < ell ? lo : hi) = mid;
    }
    eq.x3 = 0.5 * (lo + hi);
    eq.x_gamma = 0.5 * (eq.x3 + x2);

    // First point above the pole height where u clears ell, plus margin.
    double y = a * 1.001;
    int guard = 0;
    while (pe.u(cplx(0.0, y)) <= ell) {
        y += 0.01 * a;
        if (++guard > 400)
            throw numeric_error("contour: no clearance above the pole");
    }
    eq.y_gamma = 1.1 * y;

    // Ellipse through (+-x_gamma, 0) and (0, +-i y_gamma); sample the first
    // quadrant (the rest follows by symmetry) and keep the full loop.
    eq.u_min_minus_ell = 1e300;
    for (int k = 0; k <= 18; ++k) {
        const double ph = 0.5 * pi * double(k) / 18.0;
        const cplx z(eq.x_gamma * std::cos(ph), eq.y_gamma * std::sin(ph));
        eq.u_min_minus_ell =
            std::min(eq.u_min_minus_ell, pe.u(z) - ell);
    }
    if (eq.u_min_minus_ell <= 0.0)
        throw numeric_error("contour: u dips below ell on the loop");
    for (int k = 0; k < 72; ++k) {
        const double ph = 2.0 * pi * double(k) / 72.0;
        eq.gamma.push_back(
            cplx(eq.x_gamma * std::cos(ph), eq.y_gamma * std::sin(ph)));
    }
    return eq;
}

PhiEvaluator::PhiEvaluator(const SpectralCurve& sc, double x3)
    : sc_(sc), x3_(x3) {
    if (!(x3 > sc.cd.x1 && x3 < sc.cd.x2))
        throw std::invalid_argument("phi: x3 must lie between x1 and x2");
}

cplx PhiEvaluator::eval(int which, cplx z, double lift) const {
    if (which < 1 || which > 3)
        throw std::invalid_argument("phi: which must be 1, 2 or 3");
    if (z.imag() < 0.0 || (z.imag() == 0.0 && std::signbit(z.imag())))
        return std::conj(eval(which, std::conj(z), lift));

    const double a = sc_.par.a, t = sc_.par.t;
    const double x1 = sc_.cd.x1, x2 = sc_.cd.x2;
    if (which == 1 && z.real() == 0.0 && z.imag() >= a)
        throw std::domain_error("phi1: argument on the imaginary cut");
    if (which == 3 && z.real() == 0.0 && z.imag() <= a)
        throw std::domain_error("phi3: argument on the imaginary cut");

    const double anchor = which == 1 ? x1 : which == 2 ? x2 : x3_;
    if (z == cplx(anchor, 0.0)) return 0.0;

    // Rectangle path anchor -> anchor+ih -> Re z + ih -> z.  phi1 must cross
    // the imaginary axis below the pole, phi3 above it; phi2 has no axis
    // constraint and follows the low road.
    const double h = which == 3 ? (1.0 + lift) * a
                                : std::min(lift * a, 0.8 * a);
    const cplx w1(anchor, h);
    const cplx w2(z.real(), h);

    cplx acc = 0.0;
    auto emit = [&](cplx, const std::array<cplx, 3>& S, cplx w) {
        const cplx f = which == 1   ? S[1] - S[0]
                       : which == 2 ? S[1] - S[2]
                                    : S[2] - S[0];
        acc += w * f;
    };
    // The anchors of phi1 and phi2 are square-root edges where two branches
    // collide, so the first leg is walked from the regular end downward and
    // negated; junction triples come from the far-field anchor.
    auto Sw1 = eval_S_all(sc_, w1);
    integrate_leg(sc_, w1, Sw1, cplx(anchor, 0.0), 0.0, emit);
    acc = -acc;
    auto Sw2 = integrate_leg(sc_, w1, Sw1, w2, edge_distance(sc_, w2), emit);
    integrate_leg(sc_, w2, Sw2, z, edge_distance(sc_, z), emit);
    return acc / (2.0 * t);
}

cplx PhiEvaluator::phi(int which, cplx z) const {
    return eval(which, z, 0.35);
}

cplx PhiEvaluator::phi_alt(int which, cplx z) const {
    return eval(which, z, 0.55);
}

}  // namespace motherbody
