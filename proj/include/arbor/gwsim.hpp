#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "arbor/errors.hpp"
#include "arbor/pgf.hpp"
#include "arbor/rng.hpp"

namespace arbor {

// Family tree of the branching process truncated at depth_limit, with the
// bond percolation mark on every (incoming) edge. Nodes are stored in
// generation order; node 0 is the root.
struct TruncatedTree {
    struct Node {
        std::int32_t first_child = -1;
        std::int32_t child_count = 0;
        std::int16_t depth = 0;
    };
    std::vector<Node> nodes;
    std::vector<std::uint8_t> edge_open; // incoming edge state, entry 0 unused
    int depth_limit = 0;

    std::size_t node_count() const noexcept { return nodes.size(); }
};

// Families i.i.d. from the law down to `depth`, each edge open with
// probability p. Deterministic given seed. Guards: depth <= 40 and expected
// node count <= 1e8.
TruncatedTree sample_tree(const OffspringLaw& law, double p, int depth, std::uint64_t seed);

enum class VertexColor : std::uint8_t { blue = 0, yellow = 1, red = 2 };

struct ColorAssignment {
    std::vector<VertexColor> color;
    int horizon = 0;
    bool blue(std::size_t v) const { return color[v] == VertexColor::blue; }
    bool black(std::size_t v) const { return color[v] != VertexColor::red; }
};

// Bottom-up color DP with the depth-D surrogate for "blue": a vertex is blue
// when it has an open descending path of length min(D, depth remaining in
// the tree); yellow when it is not blue but every child is yellow or blue
// behind a closed edge; red otherwise.
ColorAssignment classify_colors(const TruncatedTree& tree, int horizon);

// Maximal blue cutset within the first `within` generations (every root ray
// meets it, all members blue, maximal in the C1 <= C2 iff C1 inside C2's box
// order), or nullopt if none exists. Exists iff the root is `within`-black.
std::optional<std::vector<std::int32_t>> find_blue_cutset(const TruncatedTree& tree,
                                                          const ColorAssignment& colors, int within);

// One child in the multi-type law: state of the incoming edge plus color.
struct ColoredChild {
    std::uint8_t edge_open = 0;
    VertexColor color = VertexColor::blue;
    bool operator==(const ColoredChild&) const = default;
};

struct ColoredOffspringLaw {
    struct Entry {
        std::vector<ColoredChild> children;
        double prob = 0.0;
    };
    std::array<double, 3> q_color{}; // q_b, q_y, q_r = theta, gamma-theta, 1-gamma
    std::array<std::vector<Entry>, 3> entries;

    const Entry& sample(VertexColor root, CounterRng& rng) const;
};

// Offspring law of the colored multi-type process: for each root color j the
// distribution over the ordered (edge-state, color) pattern of its family,
// p_j(pattern) = P(family) * prod_l pi_{i_l} q_{j_l} / q_j restricted to
// patterns whose color rule evaluates to j.
ColoredOffspringLaw colored_offspring_law(const OffspringLaw& law, double p);

// Mean number of red children of a red individual: G'(1 - p*theta).
double red_mean(const OffspringLaw& law, double p);

// Lazily grown percolated family tree. Children are materialized on first
// access, so deep horizons (where a full tree would have 2^26+ nodes) stay
// affordable; the distribution is identical to sample_tree. Deterministic
// given (seed, stream).
class LazyTree {
public:
    LazyTree(const OffspringLaw& law, double p);
    void reset(std::uint64_t seed, std::uint64_t stream);

    std::int32_t child_count(std::int32_t v);
    std::int32_t child(std::int32_t v, std::int32_t i) const;
    bool edge_open(std::int32_t v) const { return edge_[static_cast<std::size_t>(v)] != 0; }
    int depth(std::int32_t v) const { return depth_[static_cast<std::size_t>(v)]; }
    std::size_t nodes_created() const noexcept { return first_child_.size(); }

private:
    void materialize(std::int32_t v);

    std::vector<double> cumulative_;
    double p_;
    CounterRng rng_{0, 0};
    std::vector<std::int32_t> first_child_; // -2 = not yet materialized
    std::vector<std::int32_t> count_;
    std::vector<std::int16_t> depth_;
    std::vector<std::uint8_t> edge_;
};

// Color predicates over a lazy tree truncated at the absolute depth
// `horizon`: blue = open path down to the horizon, black(v, j) = a blue
// cutset exists within j generations below v. Matches classify_colors on a
// materialized tree of the same depth with full horizon.
class ColorExplorer {
public:
    ColorExplorer(LazyTree& tree, int horizon);
    bool blue(std::int32_t v);
    bool black(std::int32_t v, int within);
    VertexColor color(std::int32_t v, int within);

private:
    bool blue_search(std::int32_t v, int remaining);

    LazyTree& tree_;
    int horizon_;
    std::vector<std::int8_t> blue_memo_; // -1 unknown
};

enum class McQuantity { theta_depth, gamma_k_depth, blue_cutset };

struct McParams {
    int depth = 0;   // theta_depth
    int k = 0;       // gamma_k_depth: yellow truncation; blue_cutset: generations searched
    int horizon = 0; // blue budget (gamma) / absolute truncation depth (cutset)
};

struct McEstimate {
    std::string quantity;
    double mean = 0.0;
    double std_error = 0.0;
    double bias_bound = 0.0; // distance of the finite-depth surrogate from the limit
    long samples = 0;
    std::uint64_t seed = 0;
    McParams params;
};

// Indicator means over i.i.d. replications with per-sample RNG streams;
// reductions are integer counts, so results do not depend on the thread
// schedule. samples >= 100 required.
McEstimate estimate(McQuantity quantity, const OffspringLaw& law, double p, const McParams& params,
                    long samples, std::uint64_t seed, int threads = 0);

} // namespace arbor
