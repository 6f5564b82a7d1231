#include "arbor/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "arbor/reduction.hpp"

namespace arbor {

namespace {

double ipow(double x, int n) {
    double acc = 1.0;
    for (int i = 0; i < n; ++i) acc *= x;
    return acc;
}

// Unique beta with G'(beta) = target, for target in (G'(0), G'(1)).
// G' is increasing on [0,1].
double gprime_inverse(const OffspringLaw& law, double target) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (law.eval(mid, 1) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

FixedPointResult survival_theta(const OffspringLaw& law, double p, double tol) {
    law.require_valid(false);
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("survival_theta: p outside [0,1]");
    if (!(tol > 0.0)) throw std::invalid_argument("survival_theta: tol must be > 0");

    if (p * law.eval(1.0, 1) <= 1.0) return {0.0, 0, 0.0, 0.0, 0.0};
    if (p == 1.0 && law.probs()[0] == 0.0) return {1.0, 0, 0.0, 1.0, 1.0};

    const auto map = [&](double t) { return 1.0 - law.eval(1.0 - p * t, 0); };

    // Monotone iteration from 1; the sequence decreases to the largest root.
    double cur = 1.0;
    int iters = 0;
    for (; iters < 64; ++iters) {
        const double next = map(cur);
        const double diff = cur - next;
        cur = next;
        if (diff < 0.25 * tol) break;
    }

    // Residual g(t) = map(t) - t is concave with g(0) = 0; its stationary
    // point t_m (where p*G'(1-p*t) = 1) separates the two roots, so
    // [t_m, cur] brackets the largest root even arbitrarily close to
    // criticality where plain iteration stalls.
    const auto resid = [&](double t) { return map(t) - t; };
    const double beta = gprime_inverse(law, 1.0 / p);
    double lo = std::clamp((1.0 - beta) / p, 0.0, 1.0);
    double hi = cur;
    if (resid(hi) > 0.0) hi = 1.0; // rounding pushed the iterate below the root
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i, ++iters) {
        const double mid = 0.5 * (lo + hi);
        (resid(mid) > 0.0 ? lo : hi) = mid;
        if (hi - lo < 0.25 * tol && std::abs(resid(0.5 * (lo + hi))) <= tol) break;
    }
    const double value = 0.5 * (lo + hi);
    return {value, iters, std::abs(resid(value)), lo, hi};
}

double fp_map(const OffspringLaw& law, double p, double alpha) {
    const double theta = survival_theta(law, p, 1e-12).value;
    const double arg = alpha - p * theta;
    if (arg < -1e-12 || arg > 1.0 + 1e-12)
        throw std::domain_error("fp_map: alpha outside [p*theta, 1]");
    return theta + law.eval(std::clamp(arg, 0.0, 1.0), 0);
}

FixedPointResult black_gamma(const OffspringLaw& law, double p, double tol) {
    law.require_valid(false);
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("black_gamma: p outside [0,1)");
    if (!(tol > 0.0)) throw std::invalid_argument("black_gamma: tol must be > 0");

    const double theta = survival_theta(law, p, std::min(tol, 1e-12)).value;
    const double slope1 = law.eval(1.0 - p * theta, 1);
    if (slope1 <= 1.0 + 1e-10) return {1.0, 0, 0.0, 1.0, 1.0};

    const auto map = [&](double a) { return theta + law.eval(std::clamp(a - p * theta, 0.0, 1.0), 0); };
    const auto resid = [&](double a) { return map(a) - a; };

    // gamma(k) increases from theta to the smallest root.
    double cur = theta;
    int iters = 0;
    for (; iters < 128; ++iters) {
        const double next = map(cur);
        const double diff = next - cur;
        cur = next;
        if (diff < 0.25 * tol) break;
    }

    // Stationary point of the convex residual: alpha_m = p*theta + beta with
    // G'(beta) = 1. The residual is negative there when two roots exist.
    const double alpha_m = std::min(1.0, p * theta + gprime_inverse(law, 1.0));
    if (resid(alpha_m) >= 0.0) return {1.0, iters, 0.0, 1.0, 1.0};

    double lo = cur, hi = alpha_m;
    if (resid(lo) < 0.0) lo = theta;
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i, ++iters) {
        const double mid = 0.5 * (lo + hi);
        (resid(mid) >= 0.0 ? lo : hi) = mid;
        if (hi - lo < 0.25 * tol && std::abs(resid(0.5 * (lo + hi))) <= tol) break;
    }
    const double value = 0.5 * (lo + hi);
    return {value, iters, std::abs(resid(value)), lo, hi};
}

double gamma_k(const OffspringLaw& law, double p, int k) {
    law.require_valid(false);
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("gamma_k: p outside [0,1)");
    if (k < 0) throw std::invalid_argument("gamma_k: k must be >= 0");
    const double theta = survival_theta(law, p, 1e-13).value;
    double g = theta;
    for (int i = 0; i < k; ++i) g = theta + law.eval(std::clamp(g - p * theta, 0.0, 1.0), 0);
    return g;
}

std::vector<double> fp_roots(const OffspringLaw& law, double p, double tol) {
    law.require_valid(false);
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("fp_roots: p outside [0,1)");
    const double theta = survival_theta(law, p, std::min(tol, 1e-12)).value;
    if (law.eval(1.0 - p * theta, 1) <= 1.0 + 1e-10) return {1.0};
    return {black_gamma(law, p, tol).value, 1.0};
}

double p_G(const OffspringLaw& law, double tol) {
    law.require_valid(true);
    if (!(tol > 0.0)) throw std::invalid_argument("p_G: tol must be > 0");
    // G'(1 - p*theta(p)) = 1  <=>  p*theta(p) = 1 - beta, and p*theta(p)
    // is strictly increasing on [1/G'(1), 1].
    const double target = 1.0 - gprime_inverse(law, 1.0);
    double lo = 1.0 / law.eval(1.0, 1), hi = 1.0;
    while (hi - lo > 0.25 * tol) {
        const double mid = 0.5 * (lo + hi);
        const double s = mid * survival_theta(law, mid, 1e-13).value;
        (s < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double p_b(int m) {
    if (m < 2) throw std::invalid_argument("p_b: m must be >= 2");
    const double md = static_cast<double>(m);
    return (1.0 - std::pow(md, -1.0 / (md - 1.0))) / (1.0 - std::pow(md, -md / (md - 1.0)));
}

double pi(double p, double q) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("pi: p outside [0,1]");
    if (!(q > 0.0)) throw std::invalid_argument("pi: q must be > 0");
    return p / (p + q * (1.0 - p));
}

double p_c0(int m, double q) {
    if (m < 2) throw std::invalid_argument("p_c0: m must be >= 2");
    if (!(q >= 1.0)) throw std::invalid_argument("p_c0: q must be >= 1");
    return q / (static_cast<double>(m) + q - 1.0);
}

namespace {

double poly_eval(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
    return acc;
}

// Largest value of F at an interior critical point, for
// F(x) = (q-1)x^{m+1} + (1 - p/(1-p) - q)x^m + x/(1-p) - 1.
// F increases pointwise in p, so this crosses zero exactly at U_q.
double largest_critical_value(int m, double q, double p) {
    std::vector<double> c(static_cast<std::size_t>(m) + 2, 0.0);
    const double r = p / (1.0 - p);
    c[0] = -1.0;
    c[1] = 1.0 / (1.0 - p);
    c[static_cast<std::size_t>(m)] += 1.0 - r - q;
    c[static_cast<std::size_t>(m) + 1] += q - 1.0;
    std::vector<double> d(static_cast<std::size_t>(m) + 1, 0.0);
    for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = static_cast<double>(i) * c[i];

    double best = -std::numeric_limits<double>::infinity();
    const int grid = 1024;
    double x_prev = 0.0, f_prev = poly_eval(d, 0.0);
    for (int i = 1; i <= grid; ++i) {
        const double x = static_cast<double>(i) / grid;
        const double f = poly_eval(d, x);
        if (f == 0.0 && x < 1.0) best = std::max(best, poly_eval(c, x));
        if ((f_prev < 0.0) != (f < 0.0)) {
            double lo = x_prev, hi = x;
            const bool lo_neg = f_prev < 0.0;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                ((poly_eval(d, mid) < 0.0) == lo_neg ? lo : hi) = mid;
            }
            const double root = 0.5 * (lo + hi);
            if (root > 0.0 && root < 1.0) best = std::max(best, poly_eval(c, root));
        }
        x_prev = x;
        f_prev = f;
    }
    return best;
}

} // namespace

double p_c1(int m, double q, double tol) {
    if (m < 2) throw std::invalid_argument("p_c1: m must be >= 2");
    if (!(q >= 1.0)) throw std::invalid_argument("p_c1: q must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("p_c1: tol must be > 0");
    if (q <= 2.0) return p_c0(m, q);

    double lo = 1e-9, hi = 1.0 - 1e-9;
    if (!(largest_critical_value(m, q, lo) < 0.0 && largest_critical_value(m, q, hi) > 0.0))
        throw std::runtime_error("p_c1: double-root bracket not found (solver defect)");
    while (hi - lo > 0.25 * tol) {
        const double mid = 0.5 * (lo + hi);
        (largest_critical_value(m, q, mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double finite_depth_theta(const OffspringLaw& law, double p, int depth) {
    law.require_valid(false);
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("finite_depth_theta: p outside [0,1]");
    if (depth < 0) throw std::invalid_argument("finite_depth_theta: depth must be >= 0");
    double t = 1.0;
    for (int d = 0; d < depth; ++d) t = 1.0 - law.eval(1.0 - p * t, 0);
    return t;
}

AttachmentSequence effective_attachment(int m, double p, double q, int levels) {
    if (m < 2) throw std::invalid_argument("effective_attachment: m must be >= 2");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("effective_attachment: p outside (0,1)");
    if (!(q >= 1.0)) throw std::invalid_argument("effective_attachment: q must be >= 1");
    if (levels < 1) throw std::invalid_argument("effective_attachment: levels must be >= 1");

    const auto step = [&](double r) { return 1.0 - ipow(1.0 - series_reduce(p, r, q), m); };

    AttachmentSequence out;
    out.levels.reserve(static_cast<std::size_t>(levels));
    double r = 1.0; // r(0): boundary identified at the children themselves
    for (int j = 0; j < levels; ++j) {
        r = step(r);
        out.levels.push_back(r);
    }

    // The r(j) are the iterates of an increasing map from 1, decreasing to
    // the largest fixed point.
    double diff = 1.0;
    for (long it = 0; it < 3'000'000 && diff > 1e-14 && r > 1e-13; ++it) {
        const double next = step(r);
        diff = r - next;
        r = next;
    }
    double p_inf = r;
    if (r > 1e-12) {
        // Transversal case: bracket just below the iterate and polish.
        for (double delta : {1e-12, 1e-10, 1e-8, 1e-6, 1e-4}) {
            const double probe = r - delta;
            if (probe <= 0.0) break;
            if (step(probe) - probe > 0.0) {
                double lo = probe, hi = r;
                for (int i = 0; i < 100; ++i) {
                    const double mid = 0.5 * (lo + hi);
                    (step(mid) - mid > 0.0 ? lo : hi) = mid;
                }
                p_inf = 0.5 * (lo + hi);
                break;
            }
        }
    }
    out.p_inf = p_inf;
    return out;
}

double theta1_finite(int m, double p, double q, int n) {
    if (m < 2) throw std::invalid_argument("theta1_finite: m must be >= 2");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("theta1_finite: p outside [0,1]");
    if (!(q >= 1.0)) throw std::invalid_argument("theta1_finite: q must be >= 1");
    if (n < 1) throw std::invalid_argument("theta1_finite: n must be >= 1");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    const double r = (n == 1) ? 1.0 : effective_attachment(m, p, q, n - 1).levels.back();
    const double s = series_reduce(p, r, q);
    const double closed = ipow(1.0 - s, m + 1);
    const double open = 1.0 - closed;
    return open / (open + q * closed);
}

} // namespace arbor
