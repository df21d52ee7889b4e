#include "motherbody/conformal.hpp"

#include <algorithm>
#include <cmath>

namespace motherbody {

std::array<double, 3> map_equations_residual(const ModelParams& par, double rho,
                                             double kappa, double alpha) {
    double a2 = alpha * alpha;
    double a4 = a2 * a2;
    double om = 1.0 - a4;
    double r1 = rho / alpha - 2.0 * kappa * alpha / om - par.a;
    double r2 = rho * kappa / a2 + 2.0 * kappa * kappa * (1.0 + a4) / (om * om) - par.c;
    double r3 = rho * rho + 2.0 * rho * kappa / a2 - (par.t + 2.0 * par.c);
    return {r1, r2, r3};
}

static double kappa_of(double t, double c, double rho, double alpha) {
    return alpha * alpha * (t + 2.0 * c - rho * rho) / (2.0 * rho);
}

// residual of the first two equations with kappa eliminated via the third
static std::array<double, 2> reduced_residual(const ModelParams& par, double t,
                                              double rho, double alpha) {
    double kappa = kappa_of(t, par.c, rho, alpha);
    double a2 = alpha * alpha;
    double a4 = a2 * a2;
    double om = 1.0 - a4;
    double r1 = rho / alpha - 2.0 * kappa * alpha / om - par.a;
    double r2 = rho * kappa / a2 + 2.0 * kappa * kappa * (1.0 + a4) / (om * om) - par.c;
    return {r1, r2};
}

static bool newton_step(const ModelParams& par, double t, double& rho, double& alpha) {
    auto r = reduced_residual(par, t, rho, alpha);
    double n0 = r[0] * r[0] + r[1] * r[1];
    double hr = 1e-7 * std::max(rho, 1e-4);
    double ha = 1e-7 * std::max(alpha, 1e-4);
    auto rp = reduced_residual(par, t, rho + hr, alpha);
    auto rm = reduced_residual(par, t, rho - hr, alpha);
    auto ap = reduced_residual(par, t, rho, alpha + ha);
    auto am = reduced_residual(par, t, rho, alpha - ha);
    double j00 = (rp[0] - rm[0]) / (2 * hr), j01 = (ap[0] - am[0]) / (2 * ha);
    double j10 = (rp[1] - rm[1]) / (2 * hr), j11 = (ap[1] - am[1]) / (2 * ha);
    double det = j00 * j11 - j01 * j10;
    if (det == 0 || !std::isfinite(det)) return false;
    double drho = (r[0] * j11 - r[1] * j01) / det;
    double dalpha = (j00 * r[1] - j10 * r[0]) / det;
    double lam = 1.0;
    for (int back = 0; back < 40; ++back, lam *= 0.5) {
        double rn = rho - lam * drho;
        double an = alpha - lam * dalpha;
        if (!(rn > 0) || !(an > 0) || !(an < 1)) continue;
        auto rr = reduced_residual(par, t, rn, an);
        double n1 = rr[0] * rr[0] + rr[1] * rr[1];
        if (n1 < n0 || (lam == 1.0 && n1 < 1e-28)) {
            rho = rn;
            alpha = an;
            return true;
        }
    }
    return false;
}

static bool converge_at(const ModelParams& par, double t, double& rho, double& alpha,
                        double tol) {
    for (int it = 0; it < 80; ++it) {
        auto r = reduced_residual(par, t, rho, alpha);
        if (std::hypot(r[0], r[1]) < tol) return true;
        if (!newton_step(par, t, rho, alpha)) return false;
    }
    auto r = reduced_residual(par, t, rho, alpha);
    return std::hypot(r[0], r[1]) < tol;
}

ConformalData solve_map(const ModelParams& par, double tol) {
    if (!(par.a > 0) || !(par.c > 0)) throw std::invalid_argument("solve_map: need a, c > 0");
    if (par.a * par.a < 2.0 * par.c)
        throw std::invalid_argument("solve_map: standing assumption a^2 >= 2c violated");
    double tc = compute_t_c(par.a, par.c);
    if (!(par.t > 0) || !(par.t < tc))
        throw std::invalid_argument("solve_map: t outside (0, t_c), droplet not simply connected");

    double t0 = std::min(par.t, 0.01 * tc);
    double rho = std::sqrt(t0);
    double alpha = std::sqrt(t0) / par.a;
    if (!converge_at(par, t0, rho, alpha, tol))
        throw numeric_error("solve_map: Newton failed at the continuation seed");
    // geometric continuation from t0 to t, bisecting any step that fails
    std::vector<double> stack;
    double tcur = t0;
    if (par.t > t0) {
        int K = std::max(2, int(std::ceil(12.0 * std::log10(par.t / t0))));
        for (int k = K; k >= 1; --k) stack.push_back(t0 * std::pow(par.t / t0, double(k) / K));
        int guard = 0;
        while (!stack.empty()) {
            if (++guard > 4000) throw numeric_error("solve_map: continuation stalled");
            double tn = stack.back();
            double r_try = rho, a_try = alpha;
            if (converge_at(par, tn, r_try, a_try, tol)) {
                rho = r_try;
                alpha = a_try;
                tcur = tn;
                stack.pop_back();
            } else {
                double mid = 0.5 * (tcur + tn);
                if (mid - tcur < 1e-14 * tn)
                    throw numeric_error("solve_map: continuation step underflow");
                stack.push_back(mid);
            }
        }
    }

    ConformalData cd;
    cd.par = par;
    cd.rho = rho;
    cd.alpha = alpha;
    cd.kappa = kappa_of(par.t, par.c, rho, alpha);
    auto res = map_equations_residual(par, cd.rho, cd.kappa, cd.alpha);
    cd.residual = std::sqrt(res[0] * res[0] + res[1] * res[1] + res[2] * res[2]);
    if (!(cd.residual < 100 * tol))
        throw numeric_error("solve_map: residual above tolerance after continuation");

    // critical points of f: u = w^2 solves rho u^2 + (2 rho alpha^2 - 2 kappa) u
    // + rho alpha^4 + 2 kappa alpha^2 = 0
    double disc = cd.kappa * (cd.kappa - 4.0 * cd.rho * cd.alpha * cd.alpha);
    if (disc >= 0) {
        double s = std::sqrt(disc);
        double base = cd.kappa - cd.rho * cd.alpha * cd.alpha;
        double u_hi = (base + s) / cd.rho;
        double u_lo = (base - s) / cd.rho;
        if (u_lo > 0) {
            cd.w1 = std::sqrt(u_hi);
            cd.w2 = std::sqrt(u_lo);
            cd.x1 = eval_f(cd, cd.w1).real();
            cd.x2 = eval_f(cd, cd.w2).real();
        } else {
            cd.w1 = cd.w2 = cd.x1 = cd.x2 = std::nan("");
        }
    } else {
        cd.w1 = cd.w2 = cd.x1 = cd.x2 = std::nan("");
    }
    return cd;
}

cplx eval_f(const ConformalData& cd, cplx w) {
    cplx denom = w * w + cd.alpha * cd.alpha;
    if (std::abs(denom) == 0) throw std::domain_error("eval_f: pole at w = +-i*alpha");
    return cd.rho * w + 2.0 * cd.kappa * w / denom;
}

cplx eval_f_prime(const ConformalData& cd, cplx w) {
    double a2 = cd.alpha * cd.alpha;
    cplx denom = w * w + a2;
    if (std::abs(denom) == 0) throw std::domain_error("eval_f_prime: pole at w = +-i*alpha");
    return cd.rho + 2.0 * cd.kappa * (a2 - w * w) / (denom * denom);
}

std::array<cplx, 3> f_preimages(const ConformalData& cd, cplx z) {
    double a2 = cd.alpha * cd.alpha;
    return solve_cubic(cd.rho, -z, cd.rho * a2 + 2.0 * cd.kappa, -z * a2);
}

CriticalPoints critical_points(const ConformalData& cd) {
    if (std::isnan(cd.w1))
        throw std::domain_error("critical_points: not real, t >= t_star (outside the one-cut phase)");
    return {cd.w1, cd.w2, cd.x1, cd.x2};
}

// spatial extent of the droplet along the real axis (largest boundary |z|)
static double real_extent(const ConformalData& cd) {
    return cd.rho + 2.0 * cd.kappa / (1.0 + cd.alpha * cd.alpha);
}

cplx eval_F1(const ConformalData& cd, cplx z) {
    if (z.imag() == 0 && !std::isnan(cd.x1) && std::abs(z.real()) <= cd.x1)
        throw std::domain_error("eval_F1: z on the cut [-x1, x1]");
    double R0 = 1e3 * std::max(real_extent(cd), std::abs(z));
    double r_target = std::abs(z);
    if (r_target == 0) throw std::domain_error("eval_F1: z on the cut [-x1, x1]");
    cplx dir = z / r_target;

    // continuation along the ray, adaptive in the radius
    double r = R0;
    cplx w = (r * dir) / cd.rho;  // asymptotic branch w = z/rho + O(1/z)
    {
        auto roots = f_preimages(cd, r * dir);
        cplx best = roots[0];
        for (auto cand : roots)
            if (std::abs(cand - w) < std::abs(best - w)) best = cand;
        w = best;
    }
    double step = 0.9;  // multiplicative step r -> step*r
    int guard = 0;
    while (r > r_target) {
        if (++guard > 100000) throw numeric_error("eval_F1: continuation stalled");
        double rn = std::max(r * step, r_target);
        auto roots = f_preimages(cd, rn * dir);
        // nearest root to the previous value
        int best = 0;
        double d0 = 1e300;
        for (int k = 0; k < 3; ++k) {
            double d = std::abs(roots[k] - w);
            if (d < d0) {
                d0 = d;
                best = k;
            }
        }
        // separation of the chosen root from the other two
        double sep = 1e300;
        for (int k = 0; k < 3; ++k)
            if (k != best) sep = std::min(sep, std::abs(roots[k] - roots[best]));
        if (d0 > 0.45 * sep) {
            if (1.0 - step < 1e-9)
                throw numeric_error("eval_F1: branch ambiguity during continuation");
            step = std::sqrt(step);  // too coarse: soften the step and retry
            continue;
        }
        // near-tie: prefer the larger |w| (the exterior branch)
        for (int k = 0; k < 3; ++k)
            if (k != best && std::abs(roots[k] - w) < 1.3 * d0 &&
                std::abs(roots[k]) > std::abs(roots[best]))
                best = k;
        w = roots[best];
        r = rn;
        step = std::max(0.9, step * step);  // re-harden gradually
    }
    // polish on the cubic at the exact target
    double a2 = cd.alpha * cd.alpha;
    for (int it = 0; it < 4; ++it) {
        cplx fv = ((cd.rho * w - z) * w + (cd.rho * a2 + 2.0 * cd.kappa)) * w - z * a2;
        cplx dfv = (3.0 * cd.rho * w - 2.0 * z) * w + (cd.rho * a2 + 2.0 * cd.kappa);
        if (std::abs(dfv) == 0) break;
        w -= fv / dfv;
    }
    return w;
}

cplx eval_F1_prime(const ConformalData& cd, cplx z) {
    cplx w = eval_F1(cd, z);
    cplx fp = eval_f_prime(cd, w);
    if (std::abs(fp) == 0) throw numeric_error("eval_F1_prime: derivative vanishes at a branch point");
    return 1.0 / fp;
}

DropletBoundary droplet_boundary(const ConformalData& cd, int n_samples, int n_moments) {
    if (n_samples < 64) throw std::invalid_argument("droplet_boundary: need at least 64 samples");
    DropletBoundary db;
    db.theta.resize(n_samples);
    db.z.resize(n_samples);
    double dth = 2.0 * M_PI / n_samples;
    double area = 0;
    std::vector<cplx> msum(n_moments, 0.0);
    for (int j = 0; j < n_samples; ++j) {
        double th = j * dth;
        cplx w = std::polar(1.0, th);
        cplx z = eval_f(cd, w);
        cplx tangent = eval_f_prime(cd, w) * w;  // dz/dtheta up to the factor i
        db.theta[j] = th;
        db.z[j] = z;
        area += (std::conj(z) * tangent).real();
        cplx zk = 1.0;
        for (int k = 0; k < n_moments; ++k) {
            zk /= z;
            msum[k] += std::conj(z) * zk * tangent;
        }
    }
    db.area = 0.5 * area * dth;
    db.harmonic_moments.resize(n_moments);
    for (int k = 0; k < n_moments; ++k) db.harmonic_moments[k] = msum[k].real() * dth / (2.0 * M_PI);
    return db;
}

double harmonic_moment_closed_form(const ModelParams& par, int k) {
    if (k < 1) throw std::invalid_argument("harmonic_moment_closed_form: k >= 1");
    if (k % 2 == 1) return 0.0;
    double sign = (k / 2 % 2 == 0) ? -1.0 : 1.0;
    return sign * 2.0 * par.c / std::pow(par.a, k);
}

double schwarz_check(const ConformalData& cd, const std::function<cplx(cplx)>& S1,
                     int n_samples) {
    double worst = 0;
    for (int j = 0; j < n_samples; ++j) {
        double th = 2.0 * M_PI * (j + 0.5) / n_samples;
        cplx z = eval_f(cd, std::polar(1.0, th));
        worst = std::max(worst, std::abs(S1(z) - std::conj(z)));
    }
    return worst;
}

// is z strictly inside the droplet: all three preimages inside the unit disk
static bool inside_droplet(const ConformalData& cd, cplx z) {
    auto roots = f_preimages(cd, z);
    for (auto& w : roots)
        if (std::abs(w) >= 1.0) return false;
    return true;
}

PotentialCheckReport droplet_potential_check(const ConformalData& cd,
                                             const std::function<double(cplx)>& U_mu1,
                                             int nx, int ny) {
    if (long(nx) * long(ny) < 1000000)
        throw std::invalid_argument("droplet_potential_check: need at least 1e6 grid cells");
    auto bd = droplet_boundary(cd, 512);
    double X = 0, Y = 0;
    for (auto& z : bd.z) {
        X = std::max(X, std::abs(z.real()));
        Y = std::max(Y, std::abs(z.imag()));
    }
    X *= 1.02;
    Y *= 1.02;
    double hx = 2 * X / nx, hy = 2 * Y / ny;

    // collect interior cells; subdivide cells whose corners straddle the boundary
    std::vector<cplx> cells;
    std::vector<double> weights;
    cells.reserve(size_t(nx) * ny / 2);
    const int sub = 16;
    for (int i = 0; i < nx; ++i) {
        double x0 = -X + i * hx;
        for (int j = 0; j < ny; ++j) {
            double y0 = -Y + j * hy;
            bool c00 = inside_droplet(cd, {x0, y0});
            bool c10 = inside_droplet(cd, {x0 + hx, y0});
            bool c01 = inside_droplet(cd, {x0, y0 + hy});
            bool c11 = inside_droplet(cd, {x0 + hx, y0 + hy});
            if (c00 && c10 && c01 && c11) {
                cells.push_back({x0 + 0.5 * hx, y0 + 0.5 * hy});
                weights.push_back(hx * hy);
            } else if (c00 || c10 || c01 || c11) {
                for (int si = 0; si < sub; ++si)
                    for (int sj = 0; sj < sub; ++sj) {
                        cplx zc(x0 + (si + 0.5) * hx / sub, y0 + (sj + 0.5) * hy / sub);
                        if (inside_droplet(cd, zc)) {
                            cells.push_back(zc);
                            weights.push_back(hx * hy / (sub * sub));
                        }
                    }
            }
        }
    }

    auto U_area = [&](cplx z0) {
        double s = 0;
        for (size_t k = 0; k < cells.size(); ++k) s -= weights[k] * std::log(std::abs(z0 - cells[k]));
        return s / M_PI;
    };
    auto combo = [&](cplx z0) {
        return 2.0 * U_area(z0) + std::norm(z0) -
               2.0 * cd.par.c * std::log(std::abs(z0 * z0 + cd.par.a * cd.par.a));
    };

    double r_in = 1e300, r_out = 0;
    for (auto& z : bd.z) {
        r_in = std::min(r_in, std::abs(z));
        r_out = std::max(r_out, std::abs(z));
    }

    PotentialCheckReport rep;
    rep.cells_used = long(cells.size());
    std::vector<double> inner;
    for (int k = 0; k < 20; ++k) {
        cplx z0 = std::polar(0.55 * r_in, 2.0 * M_PI * (k + 0.37) / 20);
        inner.push_back(combo(z0));
    }
    double mean = 0;
    for (double v : inner) mean += v;
    mean /= inner.size();
    double var = 0;
    for (double v : inner) var += (v - mean) * (v - mean);
    rep.ell = mean;
    rep.interior_stddev = std::sqrt(var / inner.size());

    rep.exterior_min_excess = 1e300;
    rep.exterior_identity_err = 0;
    for (int k = 0; k < 20; ++k) {
        cplx z0 = std::polar(1.6 * r_out, 2.0 * M_PI * (k + 0.11) / 20);
        rep.exterior_min_excess = std::min(rep.exterior_min_excess, combo(z0) - rep.ell);
        if (U_mu1)
            rep.exterior_identity_err =
                std::max(rep.exterior_identity_err, std::abs(U_area(z0) - cd.par.t * U_mu1(z0)));
    }
    if (U_mu1) {
        cplx zfar = 3.0 * r_out;
        rep.far_field_err = std::abs(U_area(zfar) - cd.par.t * U_mu1(zfar));
    }
    return rep;
}

}
