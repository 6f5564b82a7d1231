#include "arbor/rcm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "arbor/parallel.hpp"

namespace arbor {

namespace {

constexpr int kEnumerationGuard = 24; // ~16.8M configurations
constexpr int kChainEdgeGuard = 64;

double kahan_sum(const std::vector<double>& v) {
    double sum = 0.0, comp = 0.0;
    for (double x : v) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

void check_spec(const TreeBox& box, const RcSpec& spec) {
    if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw std::invalid_argument("rc spec: p outside [0,1]");
    if (!(spec.q > 0.0)) throw std::invalid_argument("rc spec: q must be > 0");
    if (spec.relation.is_open() && spec.relation.m != box.m)
        throw std::invalid_argument("rc spec: relation m does not match box");
}

// Union-find over the box vertices plus one supernode per relation class.
// The boundary identifications depend only on (box, spec), so they are
// precomputed once. Instances hold scratch space; use one per worker.
class ClusterCounter {
public:
    ClusterCounter(const TreeBox& box, const RcSpec& spec) : box_(box) {
        const auto v = box.vertex_count();
        int classes = 0;
        if (spec.tail == TailMode::all_open && spec.relation.is_open()) {
            classes = spec.relation.class_count;
            const auto begin = box.boundary_begin();
            for (std::int32_t b = begin; b < box.vertex_count(); ++b)
                for (int c : classes_in_cone(spec.relation, box.n, b - begin))
                    tail_unions_.emplace_back(b, v + c);
        }
        parent_.resize(static_cast<std::size_t>(v + classes));
        node_count_ = v + classes;
    }

    void build(EdgeConfig mask, int skip_edge = -1) {
        std::iota(parent_.begin(), parent_.end(), 0);
        const auto edges = box_.edge_count();
        for (std::int32_t e = 0; e < edges; ++e) {
            if (e == skip_edge) continue;
            if ((mask >> e) & 1u) unite(box_.parent[static_cast<std::size_t>(e) + 1], e + 1);
        }
        for (const auto& [a, b] : tail_unions_) unite(a, b);
    }

    bool connected(std::int32_t a, std::int32_t b) { return find(a) == find(b); }

    bool root_reaches_boundary() {
        const auto r = find(0);
        for (std::int32_t b = box_.boundary_begin(); b < box_.vertex_count(); ++b)
            if (find(b) == r) return true;
        return false;
    }

    // Components among the vertices of the sub-box Lambda_l.
    int count(int l) {
        const auto upto = box_.level_offset[static_cast<std::size_t>(l) + 1];
        seen_.assign(static_cast<std::size_t>(node_count_), 0);
        int count = 0;
        for (std::int32_t v = 0; v < upto; ++v) {
            const auto r = static_cast<std::size_t>(find(v));
            if (!seen_[r]) {
                seen_[r] = 1;
                ++count;
            }
        }
        return count;
    }

private:
    std::int32_t find(std::int32_t x) {
        while (parent_[static_cast<std::size_t>(x)] != x) {
            parent_[static_cast<std::size_t>(x)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
            x = parent_[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(std::int32_t a, std::int32_t b) { parent_[static_cast<std::size_t>(find(a))] = find(b); }

    const TreeBox& box_;
    std::vector<std::pair<std::int32_t, std::int32_t>> tail_unions_;
    std::vector<std::int32_t> parent_;
    std::vector<std::uint8_t> seen_;
    std::int32_t node_count_ = 0;
};

} // namespace

TreeBox TreeBox::make(int m, int n) {
    if (m < 2) throw std::invalid_argument("TreeBox: m must be >= 2");
    if (n < 0) throw std::invalid_argument("TreeBox: n must be >= 0");
    TreeBox box;
    box.m = m;
    box.n = n;
    box.level_offset.assign(static_cast<std::size_t>(n) + 2, 0);
    std::int64_t count = 1, total = 1;
    box.level_offset[1] = 1;
    for (int d = 1; d <= n; ++d) {
        count = (d == 1) ? m + 1 : count * m;
        total += count;
        if (total > (1 << 26)) throw GuardExceeded("TreeBox: vertex count exceeds 2^26");
        box.level_offset[static_cast<std::size_t>(d) + 1] = static_cast<std::int32_t>(total);
    }
    box.parent.assign(static_cast<std::size_t>(total), -1);
    for (int d = 1; d <= n; ++d) {
        const auto base = box.level_offset[static_cast<std::size_t>(d)];
        const auto prev = box.level_offset[static_cast<std::size_t>(d) - 1];
        const auto width = box.level_offset[static_cast<std::size_t>(d) + 1] - base;
        for (std::int32_t s = 0; s < width; ++s)
            box.parent[static_cast<std::size_t>(base + s)] = (d == 1) ? 0 : prev + s / m;
    }
    return box;
}

int TreeBox::depth_of(std::int32_t v) const {
    for (int d = 0; d <= n; ++d)
        if (v < level_offset[static_cast<std::size_t>(d) + 1]) return d;
    throw std::invalid_argument("depth_of: vertex outside box");
}

int cluster_count(const TreeBox& box, EdgeConfig omega, const RcSpec& spec) {
    return conditional_cluster_count(box, box.n, omega, spec);
}

int conditional_cluster_count(const TreeBox& box, int l, EdgeConfig combined, const RcSpec& spec) {
    if (l < 0 || l > box.n) throw std::invalid_argument("conditional_cluster_count: level outside box");
    check_spec(box, spec);
    ClusterCounter counter(box, spec);
    counter.build(combined);
    return counter.count(l);
}

ExactTable exact_distribution(const TreeBox& box, const RcSpec& spec) {
    check_spec(box, spec);
    const int edges = box.edge_count();
    if (edges > kEnumerationGuard) throw GuardExceeded("exact_distribution: more than 24 edges");
    const std::int64_t configs = std::int64_t{1} << edges;

    ExactTable table;
    table.edge_count = edges;
    table.prob.assign(static_cast<std::size_t>(configs), 0.0);

    if (spec.p == 0.0 || spec.p == 1.0) {
        const auto mask = spec.p == 0.0 ? EdgeConfig{0} : (EdgeConfig{1} << edges) - 1;
        table.prob[static_cast<std::size_t>(mask)] = 1.0;
        table.z = std::pow(spec.q, cluster_count(box, mask, spec));
        return table;
    }

    std::vector<std::uint8_t> clusters(static_cast<std::size_t>(configs));
    parallel_for(configs, default_thread_count(), [&](std::int64_t begin, std::int64_t end) {
        ClusterCounter counter(box, spec);
        for (std::int64_t mask = begin; mask < end; ++mask) {
            counter.build(static_cast<EdgeConfig>(mask));
            clusters[static_cast<std::size_t>(mask)] = static_cast<std::uint8_t>(counter.count(box.n));
        }
    });

    const double log_p = std::log(spec.p);
    const double log_1p = std::log1p(-spec.p);
    const double log_q = std::log(spec.q);
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::int64_t mask = 0; mask < configs; ++mask) {
        const int open = std::popcount(static_cast<std::uint64_t>(mask));
        const double lw = open * log_p + (edges - open) * log_1p +
                          clusters[static_cast<std::size_t>(mask)] * log_q;
        table.prob[static_cast<std::size_t>(mask)] = lw;
        max_log = std::max(max_log, lw);
    }
    for (double& v : table.prob) v = std::exp(v - max_log);
    const double sum = kahan_sum(table.prob);
    for (double& v : table.prob) v /= sum;
    table.z = sum * std::exp(max_log);
    return table;
}

Marginals edge_marginals(const TreeBox& box, const RcSpec& spec, long mc_sweeps, std::uint64_t seed) {
    const int edges = box.edge_count();
    if (edges <= kEnumerationGuard) {
        const auto table = exact_distribution(box, spec);
        Marginals out;
        out.exact = true;
        out.value.assign(static_cast<std::size_t>(edges), 0.0);
        out.std_error.assign(static_cast<std::size_t>(edges), 0.0);
        for (std::size_t mask = 0; mask < table.prob.size(); ++mask)
            for (int e = 0; e < edges; ++e)
                if ((mask >> e) & 1u) out.value[static_cast<std::size_t>(e)] += table.prob[mask];
        return out;
    }
    const auto chain = heat_bath_chain(box, spec, mc_sweeps, seed);
    Marginals out;
    out.exact = false;
    out.value = chain.edge_mean;
    out.std_error = chain.edge_std_error;
    return out;
}

double conditional_edge_prob(const TreeBox& box, const RcSpec& spec, int edge, EdgeConfig rest) {
    check_spec(box, spec);
    if (edge < 0 || edge >= box.edge_count()) throw std::invalid_argument("conditional_edge_prob: bad edge");
    ClusterCounter counter(box, spec);
    counter.build(rest, edge);
    const auto child = static_cast<std::int32_t>(edge) + 1;
    return counter.connected(box.parent[static_cast<std::size_t>(child)], child) ? spec.p
                                                                                 : pi(spec.p, spec.q);
}

ChainResult heat_bath_chain(const TreeBox& box, const RcSpec& spec, long sweeps, std::uint64_t seed,
                            bool measure_connectivity) {
    check_spec(box, spec);
    if (!(spec.q >= 1.0)) throw std::invalid_argument("heat_bath_chain: requires q >= 1");
    if (!(spec.p > 0.0 && spec.p < 1.0)) throw std::invalid_argument("heat_bath_chain: requires p in (0,1)");
    if (sweeps < 1) throw std::invalid_argument("heat_bath_chain: sweeps must be >= 1");
    const int edges = box.edge_count();
    if (edges > kChainEdgeGuard) throw GuardExceeded("heat_bath_chain: more than 64 edges");

    const double pi_val = pi(spec.p, spec.q);
    ClusterCounter counter(box, spec);
    CounterRng rng(seed, 0);

    EdgeConfig config = (edges == 64) ? ~EdgeConfig{0} : (EdgeConfig{1} << edges) - 1;
    const long burnin = sweeps / 10;
    const long measured = sweeps - burnin;
    const int batches = measured >= 100 ? 100 : static_cast<int>(std::max<long>(measured, 1));
    // Integer batch counters keep the reduction exact and schedule-free.
    std::vector<std::vector<long>> open_count(static_cast<std::size_t>(batches),
                                              std::vector<long>(static_cast<std::size_t>(edges), 0));
    std::vector<long> connect_count(static_cast<std::size_t>(batches), 0);
    std::vector<long> batch_sweeps(static_cast<std::size_t>(batches), 0);

    for (long s = 0; s < sweeps; ++s) {
        for (int e = 0; e < edges; ++e) {
            counter.build(config, e);
            const auto child = static_cast<std::int32_t>(e) + 1;
            const double prob =
                counter.connected(box.parent[static_cast<std::size_t>(child)], child) ? spec.p : pi_val;
            if (rng.bernoulli(prob))
                config |= EdgeConfig{1} << e;
            else
                config &= ~(EdgeConfig{1} << e);
        }
        if (s < burnin) continue;
        const auto b = static_cast<std::size_t>((s - burnin) * batches / measured);
        ++batch_sweeps[b];
        auto& row = open_count[b];
        for (int e = 0; e < edges; ++e)
            if ((config >> e) & 1u) ++row[static_cast<std::size_t>(e)];
        if (measure_connectivity) {
            counter.build(config);
            if (counter.root_reaches_boundary()) ++connect_count[b];
        }
    }

    const auto batch_stats = [&](const std::function<long(int)>& value) {
        double mean = 0.0;
        for (int b = 0; b < batches; ++b)
            mean += static_cast<double>(value(b));
        mean /= static_cast<double>(measured);
        double var = 0.0;
        for (int b = 0; b < batches; ++b) {
            const double bm = static_cast<double>(value(b)) / static_cast<double>(batch_sweeps[static_cast<std::size_t>(b)]);
            var += (bm - mean) * (bm - mean);
        }
        const double se = batches > 1 ? std::sqrt(var / (batches * (batches - 1.0))) : 0.0;
        return std::pair<double, double>{mean, se};
    };

    ChainResult out;
    out.final_config = config;
    out.sweeps = sweeps;
    out.seed = seed;
    out.edge_mean.resize(static_cast<std::size_t>(edges));
    out.edge_std_error.resize(static_cast<std::size_t>(edges));
    for (int e = 0; e < edges; ++e) {
        const auto [mean, se] = batch_stats([&](int b) { return open_count[static_cast<std::size_t>(b)][static_cast<std::size_t>(e)]; });
        out.edge_mean[static_cast<std::size_t>(e)] = mean;
        out.edge_std_error[static_cast<std::size_t>(e)] = se;
    }
    if (measure_connectivity) {
        const auto [mean, se] = batch_stats([&](int b) { return connect_count[static_cast<std::size_t>(b)]; });
        out.connect_mean = mean;
        out.connect_std_error = se;
    }
    return out;
}

AttachmentTree reduce_to_attachment_tree(int m, double p, double q, int k, int n) {
    if (k < 1) throw std::invalid_argument("reduce_to_attachment_tree: k must be >= 1");
    if (n < k) throw std::invalid_argument("reduce_to_attachment_tree: n must be >= k");
    AttachmentTree out;
    out.m = m;
    out.k = k;
    out.n = n;
    if (n == k) {
        out.attachment_param = 1.0; // boundary vertices are themselves identified
        return out;
    }
    auto seq = effective_attachment(m, p, q, n - k);
    out.attachment_param = seq.levels.back();
    out.collapse_levels = std::move(seq.levels);
    return out;
}

SmallGraphTable small_graph_distribution(const SmallGraph& g, double q) {
    if (!(q > 0.0)) throw std::invalid_argument("small_graph_distribution: q must be > 0");
    const int edges = static_cast<int>(g.edges.size());
    if (edges > kEnumerationGuard) throw GuardExceeded("small_graph_distribution: more than 24 edges");
    for (const auto& e : g.edges) {
        if (e.u < 0 || e.u >= g.vertex_count || e.v < 0 || e.v >= g.vertex_count)
            throw std::invalid_argument("small_graph_distribution: edge endpoint outside graph");
        if (!(e.p >= 0.0 && e.p <= 1.0))
            throw std::invalid_argument("small_graph_distribution: edge parameter outside [0,1]");
    }

    const std::int64_t configs = std::int64_t{1} << edges;
    SmallGraphTable table;
    table.prob.assign(static_cast<std::size_t>(configs), 0.0);
    std::vector<std::int32_t> uf(static_cast<std::size_t>(g.vertex_count));
    const auto find = [&](std::int32_t x) {
        while (uf[static_cast<std::size_t>(x)] != x) {
            uf[static_cast<std::size_t>(x)] = uf[static_cast<std::size_t>(uf[static_cast<std::size_t>(x)])];
            x = uf[static_cast<std::size_t>(x)];
        }
        return x;
    };
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(g.vertex_count));
    for (std::int64_t mask = 0; mask < configs; ++mask) {
        double w = 1.0;
        std::iota(uf.begin(), uf.end(), 0);
        for (int e = 0; e < edges; ++e) {
            if ((mask >> e) & 1) {
                w *= g.edges[static_cast<std::size_t>(e)].p;
                uf[static_cast<std::size_t>(find(g.edges[static_cast<std::size_t>(e)].u))] =
                    find(g.edges[static_cast<std::size_t>(e)].v);
            } else {
                w *= 1.0 - g.edges[static_cast<std::size_t>(e)].p;
            }
        }
        if (w != 0.0) {
            std::fill(seen.begin(), seen.end(), 0);
            int k = 0;
            for (std::int32_t v = 0; v < g.vertex_count; ++v) {
                const auto r = static_cast<std::size_t>(find(v));
                if (!seen[r]) {
                    seen[r] = 1;
                    ++k;
                }
            }
            w *= std::pow(q, k);
        }
        table.prob[static_cast<std::size_t>(mask)] = w;
    }
    table.z = kahan_sum(table.prob);
    for (double& v : table.prob) v /= table.z;
    return table;
}

AttachmentGraph attachment_graph(int m, double p, const RayRelation& rel, double p_att,
                                 const std::vector<std::int64_t>& removed_boundary) {
    if (!rel.is_open()) throw std::invalid_argument("attachment_graph: relation must be open");
    if (rel.m != m) throw std::invalid_argument("attachment_graph: relation m mismatch");
    const int k = rel.depth;
    const auto box = TreeBox::make(m, k);
    const auto v = box.vertex_count();
    const auto begin = box.boundary_begin();

    std::vector<std::uint8_t> removed(static_cast<std::size_t>(box.boundary_size()), 0);
    for (auto s : removed_boundary) {
        if (s < 0 || s >= box.boundary_size()) throw std::invalid_argument("attachment_graph: bad boundary index");
        removed[static_cast<std::size_t>(s)] = 1;
    }

    AttachmentGraph out;
    out.graph.vertex_count = v + rel.class_count;
    out.boundary_edge.assign(static_cast<std::size_t>(box.boundary_size()), -1);
    for (std::int32_t child = 1; child < v; ++child) {
        const bool is_boundary = child >= begin;
        if (is_boundary && removed[static_cast<std::size_t>(child - begin)]) continue;
        if (is_boundary) out.boundary_edge[static_cast<std::size_t>(child - begin)] =
            static_cast<int>(out.graph.edges.size());
        out.graph.edges.push_back({box.parent[static_cast<std::size_t>(child)], child, p});
    }
    for (std::int32_t b = 0; b < box.boundary_size(); ++b)
        out.graph.edges.push_back({begin + b, v + rel.stem_class[static_cast<std::size_t>(b)], p_att});
    return out;
}

DependenceResult dependence_test(int m, double p, double q, const RayRelation& rel, std::int64_t x,
                                 std::int64_t y, double p_att) {
    if (!rel.is_open()) throw std::invalid_argument("dependence_test: relation must be open");
    if (!(q >= 1.0)) throw std::invalid_argument("dependence_test: q must be >= 1");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("dependence_test: p outside (0,1)");
    if (!(p_att > 0.0 && p_att < 1.0)) throw std::invalid_argument("dependence_test: p_att outside (0,1)");
    const auto boundary = stems_at_depth(m, rel.depth);
    if (x == y || x < 0 || y < 0 || x >= boundary || y >= boundary)
        throw std::invalid_argument("dependence_test: bad boundary pair");

    std::vector<std::int64_t> removed;
    for (std::int64_t s = 0; s < boundary; ++s)
        if (s != x && s != y) removed.push_back(s);
    const auto ag = attachment_graph(m, p, rel, p_att, removed);
    const auto table = small_graph_distribution(ag.graph, q);

    const int ex = ag.boundary_edge[static_cast<std::size_t>(x)];
    const int ey = ag.boundary_edge[static_cast<std::size_t>(y)];
    double p11 = 0.0, p01 = 0.0, p10 = 0.0, p00 = 0.0;
    for (std::size_t mask = 0; mask < table.prob.size(); ++mask) {
        const bool bx = (mask >> ex) & 1u;
        const bool by = (mask >> ey) & 1u;
        (bx ? (by ? p11 : p10) : (by ? p01 : p00)) += table.prob[mask];
    }
    DependenceResult out;
    out.given_open = p11 / (p11 + p01);
    out.given_closed = p10 / (p10 + p00);
    out.delta = out.given_open - out.given_closed;
    out.dependent = std::abs(out.delta) > 1e-9;
    return out;
}

SandwichResult sandwich_check(const TreeBox& box, const RayRelation& rel, double p, double q,
                              const std::function<bool(EdgeConfig)>& increasing_event) {
    if (!(q >= 1.0)) throw std::invalid_argument("sandwich_check: q must be >= 1");
    const int edges = box.edge_count();
    if (edges > kEnumerationGuard) throw GuardExceeded("sandwich_check: more than 24 edges");
    const EdgeConfig full = (EdgeConfig{1} << edges) - 1;

    // Spot-check monotonicity on random dominated pairs.
    CounterRng rng(kDefaultSeed, 17);
    for (int i = 0; i < 256; ++i) {
        const EdgeConfig lo = rng.next_u64() & full;
        const EdgeConfig hi = lo | (rng.next_u64() & full);
        if (increasing_event(lo) && !increasing_event(hi))
            throw std::invalid_argument("sandwich_check: event is not increasing");
    }

    const auto prob_under = [&](const RcSpec& spec) {
        const auto table = exact_distribution(box, spec);
        double acc = 0.0;
        for (std::size_t mask = 0; mask < table.prob.size(); ++mask)
            if (increasing_event(static_cast<EdgeConfig>(mask))) acc += table.prob[mask];
        return acc;
    };

    SandwichResult out;
    out.lhs = prob_under({pi(p, q), 1.0, free_relation(), TailMode::all_open});
    out.mid = prob_under({p, q, rel, TailMode::all_open});
    out.rhs = prob_under({p, q, wired_relation(box.m), TailMode::all_open});
    out.ok = out.lhs <= out.mid + 1e-12 && out.mid <= out.rhs + 1e-12;
    return out;
}

bool free_measure_is_rc(const RayRelation& rel, int m, double p, double q) {
    if (!(q >= 1.0) || q == 1.0) throw std::invalid_argument("free_measure_is_rc: requires q > 1");
    if (p == 1.0) throw std::invalid_argument("free_measure_is_rc: requires p != 1");
    if (rel.is_free()) return true;
    return pi(p, q) * static_cast<double>(m) <= 1.0;
}

} // namespace arbor
