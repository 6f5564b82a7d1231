#include "arbor/gwsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "arbor/analytic.hpp"
#include "arbor/parallel.hpp"

namespace arbor {

namespace {

constexpr int kDepthGuard = 40;
constexpr double kExpectedNodeGuard = 1e8;
constexpr std::size_t kHardNodeGuard = 200'000'000;

std::vector<double> cumulative_of(const OffspringLaw& law) {
    std::vector<double> cum(law.probs().begin(), law.probs().end());
    for (std::size_t i = 1; i < cum.size(); ++i) cum[i] += cum[i - 1];
    cum.back() = 1.0;
    return cum;
}

std::size_t draw_family(const std::vector<double>& cum, CounterRng& rng) {
    const double u = rng.next_unit();
    return static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
}

} // namespace

TruncatedTree sample_tree(const OffspringLaw& law, double p, int depth, std::uint64_t seed) {
    law.require_valid(false);
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_tree: p outside [0,1]");
    if (depth < 0 || depth > kDepthGuard) throw std::invalid_argument("sample_tree: depth outside [0,40]");
    double expected = 1.0, level = 1.0;
    for (int d = 1; d <= depth; ++d) {
        level *= law.mean();
        expected += level;
        if (expected > kExpectedNodeGuard) throw GuardExceeded("sample_tree: expected node count > 1e8");
    }

    const auto cum = cumulative_of(law);
    CounterRng rng(seed, 0);
    TruncatedTree tree;
    tree.depth_limit = depth;
    tree.nodes.push_back({-1, 0, 0});
    tree.edge_open.push_back(0);
    for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
        if (tree.nodes[v].depth == depth) continue;
        const auto k = draw_family(cum, rng);
        tree.nodes[v].first_child = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes[v].child_count = static_cast<std::int32_t>(k);
        const auto child_depth = static_cast<std::int16_t>(tree.nodes[v].depth + 1);
        for (std::size_t i = 0; i < k; ++i) {
            tree.nodes.push_back({-1, 0, child_depth});
            tree.edge_open.push_back(rng.bernoulli(p) ? 1 : 0);
        }
        if (tree.nodes.size() > kHardNodeGuard) throw GuardExceeded("sample_tree: node count exceeded guard");
    }
    return tree;
}

ColorAssignment classify_colors(const TruncatedTree& tree, int horizon) {
    if (horizon < 0 || horizon > tree.depth_limit)
        throw std::invalid_argument("classify_colors: horizon exceeds tree depth");
    const auto n = tree.node_count();
    ColorAssignment out;
    out.horizon = horizon;
    out.color.resize(n);
    std::vector<std::int32_t> descent(n, 0); // open-descent length, capped at horizon
    std::vector<std::uint8_t> black(n, 0);

    for (std::size_t vi = n; vi-- > 0;) {
        const auto& node = tree.nodes[vi];
        std::int32_t best = 0;
        bool children_black = true;
        for (std::int32_t i = 0; i < node.child_count; ++i) {
            const auto c = static_cast<std::size_t>(node.first_child + i);
            if (tree.edge_open[c]) best = std::max(best, 1 + descent[c]);
            children_black = children_black && black[c];
        }
        descent[vi] = std::min(best, horizon);
        const bool blue = descent[vi] >= std::min(horizon, tree.depth_limit - node.depth);
        // The ray search stops at the horizon: beyond it only (surrogate)
        // blueness counts, so an all-closed tree classifies red, not yellow.
        const bool is_black =
            blue || (node.depth < horizon && (node.child_count == 0 || children_black));
        black[vi] = is_black ? 1 : 0;
        out.color[vi] = blue ? VertexColor::blue
                             : (is_black ? VertexColor::yellow : VertexColor::red);
    }
    return out;
}

namespace {

bool collect_cutset(const TruncatedTree& tree, const ColorAssignment& colors, std::int32_t v, int within,
                    std::vector<std::int32_t>& out) {
    const auto& node = tree.nodes[static_cast<std::size_t>(v)];
    if (within > 0 && node.child_count > 0) {
        // Maximality: descend whenever every child cone has a blue cutset.
        const auto mark = out.size();
        bool all = true;
        for (std::int32_t i = 0; i < node.child_count && all; ++i)
            all = collect_cutset(tree, colors, node.first_child + i, within - 1, out);
        if (all) return true;
        out.resize(mark);
    }
    if (node.child_count == 0 && node.depth < colors.horizon)
        return true; // childless vertex inside the horizon: no rays to cover
    if (colors.blue(static_cast<std::size_t>(v))) {
        out.push_back(v);
        return true;
    }
    return false;
}

} // namespace

std::optional<std::vector<std::int32_t>> find_blue_cutset(const TruncatedTree& tree,
                                                          const ColorAssignment& colors, int within) {
    if (within < 0 || within > tree.depth_limit)
        throw std::invalid_argument("find_blue_cutset: search depth outside tree");
    std::vector<std::int32_t> cut;
    if (!collect_cutset(tree, colors, 0, within, cut)) return std::nullopt;
    return cut;
}

const ColoredOffspringLaw::Entry& ColoredOffspringLaw::sample(VertexColor root, CounterRng& rng) const {
    const auto& rows = entries[static_cast<std::size_t>(root)];
    if (rows.empty()) throw std::invalid_argument("ColoredOffspringLaw: no entries for requested color");
    const double u = rng.next_unit();
    double acc = 0.0;
    for (const auto& e : rows) {
        acc += e.prob;
        if (u < acc) return e;
    }
    return rows.back();
}

ColoredOffspringLaw colored_offspring_law(const OffspringLaw& law, double p) {
    law.require_valid(true);
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("colored_offspring_law: p outside (0,1)");

    double patterns = 0.0;
    for (int k = 0; k <= law.max_family(); ++k)
        if (law.probs()[static_cast<std::size_t>(k)] > 0.0) patterns += std::pow(6.0, k);
    if (patterns > 2e6) throw GuardExceeded("colored_offspring_law: pattern space too large");

    const double theta = survival_theta(law, p, 1e-13).value;
    const double gamma = black_gamma(law, p, 1e-13).value;
    ColoredOffspringLaw out;
    out.q_color = {theta, gamma - theta, 1.0 - gamma};
    const double pi_state[2] = {1.0 - p, p};

    for (int k = 1; k <= law.max_family(); ++k) {
        const double pk = law.probs()[static_cast<std::size_t>(k)];
        if (pk <= 0.0) continue;
        std::int64_t codes = 1;
        for (int i = 0; i < k; ++i) codes *= 6;
        for (std::int64_t code = 0; code < codes; ++code) {
            ColoredOffspringLaw::Entry entry;
            entry.children.resize(static_cast<std::size_t>(k));
            entry.prob = pk;
            bool blue = false, yellow = true;
            std::int64_t rest = code;
            for (int l = k - 1; l >= 0; --l) {
                const int digit = static_cast<int>(rest % 6);
                rest /= 6;
                const std::uint8_t open = static_cast<std::uint8_t>(digit / 3);
                const auto color = static_cast<VertexColor>(digit % 3);
                entry.children[static_cast<std::size_t>(l)] = {open, color};
                entry.prob *= pi_state[open] * out.q_color[static_cast<std::size_t>(color)];
                if (open && color == VertexColor::blue) blue = true;
                const bool support =
                    color == VertexColor::yellow || (color == VertexColor::blue && !open);
                yellow = yellow && support;
            }
            if (entry.prob <= 0.0) continue;
            const auto root = blue ? VertexColor::blue : (yellow ? VertexColor::yellow : VertexColor::red);
            out.entries[static_cast<std::size_t>(root)].push_back(std::move(entry));
        }
    }
    for (std::size_t j = 0; j < 3; ++j) {
        if (out.q_color[j] < 1e-12) {
            out.entries[j].clear();
            continue;
        }
        for (auto& e : out.entries[j]) e.prob /= out.q_color[j];
    }
    return out;
}

double red_mean(const OffspringLaw& law, double p) {
    law.require_valid(true);
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("red_mean: p outside [0,1]");
    const double theta = survival_theta(law, p, 1e-13).value;
    return law.eval(1.0 - p * theta, 1);
}

LazyTree::LazyTree(const OffspringLaw& law, double p) : cumulative_(cumulative_of(law)), p_(p) {
    law.require_valid(false);
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("LazyTree: p outside [0,1]");
}

void LazyTree::reset(std::uint64_t seed, std::uint64_t stream) {
    rng_ = CounterRng(seed, stream);
    first_child_.assign(1, -2);
    count_.assign(1, 0);
    depth_.assign(1, 0);
    edge_.assign(1, 0);
}

void LazyTree::materialize(std::int32_t v) {
    auto& first = first_child_[static_cast<std::size_t>(v)];
    if (first != -2) return;
    const auto k = static_cast<std::int32_t>(draw_family(cumulative_, rng_));
    first = static_cast<std::int32_t>(first_child_.size());
    count_[static_cast<std::size_t>(v)] = k;
    const auto child_depth = static_cast<std::int16_t>(depth_[static_cast<std::size_t>(v)] + 1);
    for (std::int32_t i = 0; i < k; ++i) {
        first_child_.push_back(-2);
        count_.push_back(0);
        depth_.push_back(child_depth);
        edge_.push_back(rng_.bernoulli(p_) ? 1 : 0);
    }
    if (first_child_.size() > kHardNodeGuard) throw GuardExceeded("LazyTree: node count exceeded guard");
}

std::int32_t LazyTree::child_count(std::int32_t v) {
    materialize(v);
    return count_[static_cast<std::size_t>(v)];
}

std::int32_t LazyTree::child(std::int32_t v, std::int32_t i) const {
    return first_child_[static_cast<std::size_t>(v)] + i;
}

ColorExplorer::ColorExplorer(LazyTree& tree, int horizon) : tree_(tree), horizon_(horizon) {
    if (horizon < 0) throw std::invalid_argument("ColorExplorer: horizon must be >= 0");
}

bool ColorExplorer::blue(std::int32_t v) {
    if (tree_.depth(v) >= horizon_) return true; // depth budget exhausted
    if (static_cast<std::size_t>(v) >= blue_memo_.size())
        blue_memo_.resize(tree_.nodes_created(), -1);
    if (blue_memo_[static_cast<std::size_t>(v)] >= 0) return blue_memo_[static_cast<std::size_t>(v)] != 0;
    const bool value = blue_search(v, horizon_ - tree_.depth(v));
    if (static_cast<std::size_t>(v) >= blue_memo_.size()) blue_memo_.resize(tree_.nodes_created(), -1);
    blue_memo_[static_cast<std::size_t>(v)] = value ? 1 : 0;
    return value;
}

bool ColorExplorer::blue_search(std::int32_t v, int remaining) {
    if (remaining == 0) return true;
    const auto k = tree_.child_count(v);
    for (std::int32_t i = 0; i < k; ++i) {
        const auto c = tree_.child(v, i);
        if (tree_.edge_open(c) && blue(c)) return true;
    }
    return false;
}

bool ColorExplorer::black(std::int32_t v, int within) {
    if (blue(v)) return true;
    const auto k = tree_.child_count(v);
    if (k == 0) return true; // no rays to cover; yellow by the relaxed-law rule
    if (within == 0) return false;
    for (std::int32_t i = 0; i < k; ++i)
        if (!black(tree_.child(v, i), within - 1)) return false;
    return true;
}

VertexColor ColorExplorer::color(std::int32_t v, int within) {
    if (blue(v)) return VertexColor::blue;
    return black(v, within) ? VertexColor::yellow : VertexColor::red;
}

McEstimate estimate(McQuantity quantity, const OffspringLaw& law, double p, const McParams& params,
                    long samples, std::uint64_t seed, int threads) {
    law.require_valid(false);
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("estimate: p outside [0,1]");
    if (samples < 100) throw std::invalid_argument("estimate: samples must be >= 100");

    int horizon = 0, within = 0;
    const char* name = nullptr;
    switch (quantity) {
    case McQuantity::theta_depth:
        if (params.depth < 0 || params.depth > 64) throw std::invalid_argument("estimate: bad depth");
        horizon = params.depth;
        within = 0;
        name = "theta_D";
        break;
    case McQuantity::gamma_k_depth:
        if (params.k < 0 || params.horizon < 1 || params.k + params.horizon > 64)
            throw std::invalid_argument("estimate: bad gamma params");
        horizon = params.k + params.horizon;
        within = params.k;
        name = "gamma_kD";
        break;
    case McQuantity::blue_cutset:
        if (params.k < 0 || params.horizon < params.k || params.horizon > 64)
            throw std::invalid_argument("estimate: bad cutset params");
        horizon = params.horizon;
        within = params.k;
        name = "blue_cutset";
        break;
    }

    const bool pure_blue = quantity == McQuantity::theta_depth;
    std::atomic<long> hits{0};
    const int workers = threads > 0 ? threads : default_thread_count();
    parallel_for(samples, workers, [&](std::int64_t begin, std::int64_t end) {
        LazyTree tree(law, p);
        long local = 0;
        for (std::int64_t s = begin; s < end; ++s) {
            tree.reset(seed, static_cast<std::uint64_t>(s));
            ColorExplorer explorer(tree, horizon);
            if (pure_blue ? explorer.blue(0) : explorer.black(0, within)) ++local;
        }
        hits += local;
    });

    const double mean = static_cast<double>(hits.load()) / static_cast<double>(samples);
    const double theta = survival_theta(law, p, 1e-12).value;
    McEstimate out;
    out.quantity = name;
    out.mean = mean;
    out.std_error = std::sqrt(std::max(mean * (1.0 - mean), 0.0) / static_cast<double>(samples));
    out.bias_bound = std::abs(finite_depth_theta(law, p, horizon - within) - theta);
    out.samples = samples;
    out.seed = seed;
    out.params = params;
    return out;
}

} // namespace arbor
