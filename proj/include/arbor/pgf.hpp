#pragma once

#include <span>
#include <string>
#include <vector>

#include "arbor/errors.hpp"

namespace arbor {

struct ValidationReport {
    bool ok = true;
    std::string violation; // names the violated clause when !ok
};

// Offspring distribution with finite support. probs[k] is the probability of
// a family of size k (probs[0] may be positive only in relaxed mode).
// The generating function G and its first two derivatives are evaluated as
// exact polynomials.
class OffspringLaw {
public:
    // probs indexed by family size; normalized on construction when the sum
    // deviates from 1 by less than 1e-9, rejected otherwise.
    explicit OffspringLaw(std::vector<double> probs);

    // G(x) = x^m, i.e. every individual has exactly m children.
    static OffspringLaw deterministic(int m);

    // G(x), G'(x) or G''(x) for order 0, 1, 2. Requires x in [0,1].
    double eval(double x, int order = 0) const;

    ValidationReport validate(bool strict) const;

    // Throws std::invalid_argument naming the violation when invalid.
    void require_valid(bool strict) const;

    double mean() const noexcept { return mean_; }
    int max_family() const noexcept { return static_cast<int>(probs_.size()) - 1; }
    std::span<const double> probs() const noexcept { return probs_; }

    bool operator==(const OffspringLaw&) const = default;

private:
    std::vector<double> probs_;
    double mean_ = 0.0;
};

} // namespace arbor
