#include "motherbody/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>

namespace motherbody {

static QuadRule make_gauss_legendre(int n) {
    QuadRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int k = 0; k < n; ++k) {
        double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            // Legendre recurrence up to degree n
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.x[n - 1 - k] = x;
        r.w[n - 1 - k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

const QuadRule& gauss_legendre(int order) {
    if (order < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
    static std::map<int, QuadRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, make_gauss_legendre(order)).first;
    return it->second;
}

double integrate_panels(const std::function<double(double)>& f,
                        const std::vector<double>& breakpoints, int order) {
    if (breakpoints.size() < 2) throw std::invalid_argument("integrate_panels: need at least two breakpoints");
    const QuadRule& q = gauss_legendre(order);
    double total = 0;
    for (size_t p = 0; p + 1 < breakpoints.size(); ++p) {
        double a = breakpoints[p], b = breakpoints[p + 1];
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double s = 0;
        for (size_t k = 0; k < q.x.size(); ++k) s += q.w[k] * f(mid + half * q.x[k]);
        total += s * half;
    }
    return total;
}

cplx integrate_segment(const std::function<cplx(cplx)>& f, cplx z0, cplx z1,
                       int panels, int order) {
    if (panels < 1) throw std::invalid_argument("integrate_segment: need at least one panel");
    const QuadRule& q = gauss_legendre(order);
    cplx dz = (z1 - z0) / double(panels);
    cplx total = 0;
    for (int p = 0; p < panels; ++p) {
        cplx a = z0 + dz * double(p);
        cplx mid = a + 0.5 * dz;
        cplx s = 0;
        for (size_t k = 0; k < q.x.size(); ++k) s += q.w[k] * f(mid + 0.5 * dz * q.x[k]);
        total += s * 0.5 * dz;
    }
    return total;
}

std::vector<double> graded_breakpoints(double sing, double far, int levels) {
    if (levels < 1) throw std::invalid_argument("graded_breakpoints: need at least one level");
    std::vector<double> b;
    b.push_back(far);
    double span = far - sing;
    for (int k = 1; k < levels; ++k) {
        b.push_back(sing + span * std::pow(0.25, k));
    }
    b.push_back(sing);
    return b;
}

std::array<cplx, 3> solve_cubic(cplx c3, cplx c2, cplx c1, cplx c0) {
    if (std::abs(c3) == 0) throw std::invalid_argument("solve_cubic: leading coefficient is zero");
    cplx b = c2 / c3, c = c1 / c3, d = c0 / c3;
    // depressed form s^3 + p s + q, w = s - b/3
    cplx p = c - b * b / 3.0;
    cplx q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    cplx shift = -b / 3.0;
    std::array<cplx, 3> roots;
    cplx disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
    // pick the sign that avoids cancellation in -q/2 +- disc
    cplx u3 = (std::abs(-q / 2.0 + disc) > std::abs(-q / 2.0 - disc)) ? -q / 2.0 + disc
                                                                      : -q / 2.0 - disc;
    if (std::abs(u3) == 0) {
        roots = {shift, shift, shift};
    } else {
        cplx u = std::pow(u3, 1.0 / 3.0);
        const cplx omega(-0.5, std::sqrt(3.0) / 2.0);
        for (int k = 0; k < 3; ++k) {
            cplx v = -p / (3.0 * u);
            roots[k] = u + v + shift;
            u *= omega;
        }
    }
    // With one root far larger than the others, Cardano's intermediate
    // cancellation pollutes the small pair; rebuild it from the deflated
    // quadratic (Vieta), which only divides by the well-conditioned big root.
    std::sort(roots.begin(), roots.end(),
              [](cplx u, cplx v) { return std::abs(u) > std::abs(v); });
    if (std::abs(roots[0]) >
        1e4 * (std::abs(roots[1]) + std::abs(roots[2]) + 1.0)) {
        const cplx sum = -b - roots[0];
        const cplx prod = -d / roots[0];
        const cplx sq = std::sqrt(sum * sum - 4.0 * prod);
        const cplx s1 = (std::abs(sum + sq) > std::abs(sum - sq))
                            ? 0.5 * (sum + sq)
                            : 0.5 * (sum - sq);
        roots[1] = s1;
        roots[2] = std::abs(s1) == 0.0 ? cplx(0.0) : prod / s1;
    }
    // polish on the original polynomial
    for (auto& r : roots) {
        for (int it = 0; it < 3; ++it) {
            cplx f = ((c3 * r + c2) * r + c1) * r + c0;
            cplx df = (3.0 * c3 * r + 2.0 * c2) * r + c1;
            if (std::abs(df) < 1e-300) break;
            cplx step = f / df;
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
            r -= step;
        }
    }
    return roots;
}

cplx poly_eval(const std::vector<double>& coeffs, cplx z) {
    cplx v = 0;
    for (size_t k = coeffs.size(); k-- > 0;) v = v * z + coeffs[k];
    return v;
}

std::vector<cplx> poly_roots(const std::vector<double>& coeffs) {
    int deg = int(coeffs.size()) - 1;
    while (deg > 0 && coeffs[deg] == 0) --deg;
    if (deg < 1) throw std::invalid_argument("poly_roots: degree must be at least 1");
    std::vector<double> a(coeffs.begin(), coeffs.begin() + deg + 1);
    // strip zero roots at the origin first; they are exact
    std::vector<cplx> roots;
    int nzero = 0;
    while (nzero < deg && a[nzero] == 0) ++nzero;
    for (int k = 0; k < nzero; ++k) roots.push_back(0.0);
    if (nzero) a.erase(a.begin(), a.begin() + nzero);
    int m = int(a.size()) - 1;
    if (m == 0) return roots;

    double radius = 0;
    for (int k = 0; k < m; ++k) radius = std::max(radius, std::abs(a[k] / a[m]));
    radius = 1.0 + radius;
    std::vector<cplx> z(m);
    for (int k = 0; k < m; ++k) {
        double th = 2.0 * M_PI * k / m + 0.3791;
        z[k] = radius * cplx(std::cos(th), std::sin(th));
    }
    for (int it = 0; it < 400; ++it) {
        double worst = 0;
        for (int i = 0; i < m; ++i) {
            cplx p = 0, dp = 0;
            for (int k = m; k >= 0; --k) {
                dp = dp * z[i] + p;
                p = p * z[i] + a[k];
            }
            if (std::abs(dp) == 0) continue;
            cplx ratio = p / dp;
            cplx sum = 0;
            for (int j = 0; j < m; ++j)
                if (j != i) sum += 1.0 / (z[i] - z[j]);
            cplx w = ratio / (1.0 - ratio * sum);
            z[i] -= w;
            worst = std::max(worst, std::abs(w) / (1.0 + std::abs(z[i])));
        }
        if (worst < 1e-15) break;
    }
    roots.insert(roots.end(), z.begin(), z.end());
    return roots;
}

int thread_budget() {
    if (const char* env = std::getenv("MOTHERBODY_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

void parallel_for(int n, const std::function<void(int)>& body) {
    int workers = std::min(thread_budget(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}
