#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "arbor/analytic.hpp"
#include "arbor/errors.hpp"
#include "arbor/rays.hpp"
#include "arbor/reduction.hpp"
#include "arbor/rng.hpp"

namespace arbor {

// Finite box Lambda_n of T_m': the root plus all vertices to depth n.
// Vertices are indexed level by level, lexicographically within a level, so
// edge e is the incoming edge of vertex e+1 and the edges of any sub-box
// Lambda_l form the prefix [0, edges_to_depth(l)).
struct TreeBox {
    int m = 0, n = 0;
    std::vector<std::int32_t> parent;       // -1 for the root
    std::vector<std::int32_t> level_offset; // first vertex id of each depth, size n+2

    static TreeBox make(int m, int n);

    std::int32_t vertex_count() const noexcept { return level_offset.back(); }
    std::int32_t edge_count() const noexcept { return vertex_count() - 1; }
    std::int32_t edges_to_depth(int l) const { return level_offset[static_cast<std::size_t>(l) + 1] - 1; }
    std::int32_t boundary_begin() const { return level_offset[static_cast<std::size_t>(n)]; }
    std::int32_t boundary_size() const { return vertex_count() - boundary_begin(); }
    int depth_of(std::int32_t v) const;
};

// Bit e = state of edge e (open = 1). Boxes handled exactly are capped at 24
// edges; chains run up to 64.
using EdgeConfig = std::uint64_t;

enum class TailMode { all_open, all_closed };

// Parameters of phi^{xi,~}_{Lambda,p,q}; the tail mode fixes xi off the box.
struct RcSpec {
    double p = 0.5;
    double q = 1.0;
    RayRelation relation;
    TailMode tail = TailMode::all_open;
};

// Number of connected components of the augmented open graph on the box
// vertices. With an all-open tail, boundary vertices are identified through
// the relation classes met by their cones; with an all-closed tail no
// augmentation applies (the unique outside path between box vertices does
// not exist on a tree).
int cluster_count(const TreeBox& box, EdgeConfig omega, const RcSpec& spec);

// Same count restricted to the sub-box Lambda_l inside this box: edge bits
// below edges_to_depth(l) play the role of omega, the remaining bits are the
// frozen outside restriction xi. Used for DLR consistency checks.
int conditional_cluster_count(const TreeBox& box, int l, EdgeConfig combined, const RcSpec& spec);

struct ExactTable {
    std::vector<double> prob; // indexed by EdgeConfig
    double z = 0.0;           // normalizing constant
    int edge_count = 0;
};

// Full enumeration of the 2^|E| configurations. Guarded at 24 edges.
ExactTable exact_distribution(const TreeBox& box, const RcSpec& spec);

struct Marginals {
    std::vector<double> value;
    std::vector<double> std_error; // zero when exact
    bool exact = true;
};

// Exact per-edge open probabilities when enumeration is feasible, heat-bath
// estimates otherwise.
Marginals edge_marginals(const TreeBox& box, const RcSpec& spec, long mc_sweeps = 200000,
                         std::uint64_t seed = kDefaultSeed);

// Single-edge conditional law: p when the endpoints of e are joined off e in
// the augmented graph, pi(p,q) otherwise.
double conditional_edge_prob(const TreeBox& box, const RcSpec& spec, int edge, EdgeConfig rest);

struct ChainResult {
    EdgeConfig final_config = 0;
    std::vector<double> edge_mean, edge_std_error;
    double connect_mean = -1.0, connect_std_error = 0.0; // root <-> identified boundary
    long sweeps = 0;
    std::uint64_t seed = 0;
};

// Systematic-scan single-edge heat bath; stationary law is
// exact_distribution. Requires q >= 1 and p in (0,1). Std errors come from
// 100 batch means over the post-burn-in sweeps.
ChainResult heat_bath_chain(const TreeBox& box, const RcSpec& spec, long sweeps, std::uint64_t seed,
                            bool measure_connectivity = false);

// Depth-k tree with one attachment edge per depth-k vertex summarizing the
// collapsed wired structure between depths k and n; the attachment parameter
// is the series/parallel collapse value r(n-k) and is independent of the
// relation and of the vertex.
struct AttachmentTree {
    int m = 0, k = 0, n = 0;
    double attachment_param = 1.0;
    std::vector<double> collapse_levels; // r(1..n-k)
};
AttachmentTree reduce_to_attachment_tree(int m, double p, double q, int k, int n);

// Small undirected multigraph with per-edge parameters, enumerated exactly.
// Backs the attachment-tree measures and the dependence test.
struct SmallGraph {
    int vertex_count = 0;
    struct Edge {
        int u = 0, v = 0;
        double p = 0.5;
    };
    std::vector<Edge> edges;
};
struct SmallGraphTable {
    std::vector<double> prob;
    double z = 0.0;
};
SmallGraphTable small_graph_distribution(const SmallGraph& g, double q);

// Lambda_k plus attachment edges with parameter p_att, attachment endpoints
// merged per the relation classes. Returns the graph and the edge ids of the
// incoming edges of the depth-k vertices (indexed by stem).
struct AttachmentGraph {
    SmallGraph graph;
    std::vector<int> boundary_edge; // edge id of e_x per depth-k stem, -1 if removed
};
AttachmentGraph attachment_graph(int m, double p, const RayRelation& rel, double p_att,
                                 const std::vector<std::int64_t>& removed_boundary = {});

// Conditional on every e_z, z outside {x,y}, being closed, compares
// P(e_x open | e_y open) against P(e_x open | e_y closed) on the attachment
// tree. The states are dependent exactly when x and y share a relation
// class.
struct DependenceResult {
    double delta = 0.0;
    bool dependent = false;
    double given_open = 0.0, given_closed = 0.0;
};
DependenceResult dependence_test(int m, double p, double q, const RayRelation& rel, std::int64_t x,
                                 std::int64_t y, double p_att);

// P(event) under the product measure phi_pi, under phi^{1,~} and under the
// fully wired phi^1, with the stochastic sandwich verified. The event must
// be increasing; random pairs are spot-checked.
struct SandwichResult {
    double lhs = 0.0, mid = 0.0, rhs = 0.0;
    bool ok = false;
};
SandwichResult sandwich_check(const TreeBox& box, const RayRelation& rel, double p, double q,
                              const std::function<bool(EdgeConfig)>& increasing_event);

// Whether phi_pi is a (~)random-cluster measure: always for the free
// relation; for an open relation exactly when pi(p,q)*m <= 1, i.e. the
// product measure has no open rays.
bool free_measure_is_rc(const RayRelation& rel, int m, double p, double q);

} // namespace arbor
