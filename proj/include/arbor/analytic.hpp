#pragma once

#include <vector>

#include "arbor/pgf.hpp"

namespace arbor {

struct FixedPointResult {
    double value = 0.0;
    int iterations = 0;
    double residual = 0.0;
    double lo = 0.0, hi = 0.0; // final bracket
};

enum class CurveKind { pc0, pc1, pb, pG };

struct CriticalCurvePoint {
    double q = 0.0;
    int m = 0;
    double p = 0.0;
    CurveKind kind = CurveKind::pc0;
};

// Survival probability: largest root of theta = 1 - G(1 - p*theta) in [0,1].
// Exactly 0 when p*G'(1) <= 1. Monotone iteration from 1 bracketed, then
// bisection to residual <= tol.
FixedPointResult survival_theta(const OffspringLaw& law, double p, double tol = 1e-10);

// Black-root probability: smallest root of gamma = theta + G(gamma - p*theta)
// in [p*theta, 1]. Exactly 1 when G'(1 - p*theta) <= 1. Requires p in [0,1).
FixedPointResult black_gamma(const OffspringLaw& law, double p, double tol = 1e-10);

// k-th iterate of gamma(k) = f_p(gamma(k-1)) from gamma(0) = theta.
double gamma_k(const OffspringLaw& law, double p, int k);

// f_p(alpha) = theta + G(alpha - p*theta).
double fp_map(const OffspringLaw& law, double p, double alpha);

// {1} when G'(1 - p*theta) <= 1, else {gamma, 1}.
std::vector<double> fp_roots(const OffspringLaw& law, double p, double tol = 1e-10);

// Unique p with G'(1 - p*theta(p)) = 1; bisection on the increasing quantity
// p*theta(p). Also the maximizer of (1-p)*theta(p).
double p_G(const OffspringLaw& law, double tol = 1e-8);

// Closed form (1 - m^{-1/(m-1)}) / (1 - m^{-m/(m-1)}).
double p_b(int m);

// pi(p,q) = p / (p + q(1-p)).
double pi(double p, double q);

// p_c0(q) = q / (m + q - 1).
double p_c0(int m, double q);

// p_c1: equals p_c0 for 1 <= q <= 2; for q > 2 the unique p at which
// (q-1)x^{m+1} + (1 - p/(1-p) - q)x^m + x/(1-p) - 1 has a double root in
// (0,1), found by bisecting p on the sign of the largest interior critical
// value of that polynomial.
double p_c1(int m, double q, double tol = 1e-8);

// theta_0 = 1, theta_D = 1 - G(1 - p*theta_{D-1}); probability of an open
// path descending D levels. Non-increasing in D, limit survival_theta.
double finite_depth_theta(const OffspringLaw& law, double p, int depth);

struct AttachmentSequence {
    std::vector<double> levels; // r(1..levels)
    double p_inf = 0.0;
};

// Effective single-edge parameter of a depth-j wired subtree of the m-ary
// tree: r(1) = 1-(1-p)^m, r(j+1) = 1-(1-series(p, r(j), q))^m, plus the limit
// p_inf (largest fixed point; the r(j) are the iterates of the map from 1).
AttachmentSequence effective_attachment(int m, double p, double q, int levels);

// Finite-volume percolation probability of the root under the fully wired
// random-cluster measure on Lambda_n of T_m', evaluated by series/parallel
// collapse to a two-vertex multigraph.
double theta1_finite(int m, double p, double q, int n);

} // namespace arbor
