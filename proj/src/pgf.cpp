#include "arbor/pgf.hpp"

#include <cmath>
#include <stdexcept>

namespace arbor {

namespace {
constexpr int kMaxSupport = 1 << 16;
} // namespace

OffspringLaw::OffspringLaw(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw std::invalid_argument("OffspringLaw: empty support");
    if (static_cast<int>(probs_.size()) - 1 > kMaxSupport)
        throw std::invalid_argument("OffspringLaw: support exceeds 2^16");
    double sum = 0.0;
    for (double v : probs_) {
        if (!(v >= 0.0) || v > 1.0 + 1e-12)
            throw std::invalid_argument("OffspringLaw: probability outside [0,1]");
        sum += v;
    }
    if (std::abs(sum - 1.0) >= 1e-9)
        throw std::invalid_argument("OffspringLaw: probabilities sum to " + std::to_string(sum));
    if (sum != 1.0)
        for (double& v : probs_) v /= sum;
    mean_ = 0.0;
    for (std::size_t k = 0; k < probs_.size(); ++k) mean_ += static_cast<double>(k) * probs_[k];
}

OffspringLaw OffspringLaw::deterministic(int m) {
    if (m < 1) throw std::invalid_argument("deterministic: m must be >= 1");
    std::vector<double> p(static_cast<std::size_t>(m) + 1, 0.0);
    p.back() = 1.0;
    return OffspringLaw(std::move(p));
}

double OffspringLaw::eval(double x, int order) const {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("eval: x outside [0,1]");
    if (order < 0 || order > 2) throw std::domain_error("eval: order must be 0, 1 or 2");
    // Horner on sum_k p_k k(k-1)...(k-order+1) x^{k-order}.
    const int top = max_family();
    if (top < order) return 0.0;
    double acc = 0.0;
    for (int k = top; k >= order; --k) {
        double c = probs_[static_cast<std::size_t>(k)];
        for (int j = 0; j < order; ++j) c *= static_cast<double>(k - j);
        acc = acc * x + c;
    }
    return acc;
}

ValidationReport OffspringLaw::validate(bool strict) const {
    for (double v : probs_)
        if (!(v >= 0.0 && v <= 1.0)) return {false, "probability outside [0,1]"};
    double sum = 0.0;
    for (double v : probs_) sum += v;
    if (std::abs(sum - 1.0) > 1e-12) return {false, "probabilities do not sum to 1"};
    if (strict && probs_[0] != 0.0) return {false, "G(0) != 0 (p_0 > 0 in strict mode)"};
    if (!(mean_ > 1.0)) return {false, "mean family size not > 1"};
    if (!std::isfinite(mean_)) return {false, "mean family size not finite"};
    return {};
}

void OffspringLaw::require_valid(bool strict) const {
    const auto r = validate(strict);
    if (!r.ok) throw std::invalid_argument("invalid offspring law: " + r.violation);
}

} // namespace arbor
