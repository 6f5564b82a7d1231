#pragma once

#include <stdexcept>

namespace arbor {

// Exact local replacements for random-cluster measures. Two edges u-w-v in
// series, with w of degree 2 in the ambient graph, collapse to a single edge
// whose parameter weights the four (e1,e2) states; the lone extra component
// at w in the both-closed state carries the factor q. Parallel edges collapse
// by independence of the "all closed" event. Both laws are gated by the
// brute-force enumeration oracle in the test suite before being used anywhere.
inline double series_reduce(double p1, double p2, double q) {
    if (!(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0))
        throw std::invalid_argument("series_reduce: parameters outside [0,1]");
    if (!(q > 0.0)) throw std::invalid_argument("series_reduce: q must be > 0");
    const double both = p1 * p2;
    const double den = both + p1 * (1.0 - p2) + (1.0 - p1) * p2 + q * (1.0 - p1) * (1.0 - p2);
    return both / den;
}

inline double parallel_reduce(double p1, double p2) {
    if (!(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0))
        throw std::invalid_argument("parallel_reduce: parameters outside [0,1]");
    return 1.0 - (1.0 - p1) * (1.0 - p2);
}

} // namespace arbor
