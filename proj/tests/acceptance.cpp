// Acceptance suite: every release-gating check with its tolerance pinned in
// code, one pass/fail line per criterion. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "arbor/analytic.hpp"
#include "arbor/gwsim.hpp"
#include "arbor/rcm.hpp"
#include "oracles.hpp"

using namespace arbor;

namespace {

struct Criterion {
    int failures = 0;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            ++failures;
            notes.push_back(what);
        }
    }
    void close(double got, double want, double tol, const std::string& what) {
        if (!(std::abs(got - want) <= tol)) {
            ++failures;
            char buf[256];
            std::snprintf(buf, sizeof(buf), "%s: got %.12g want %.12g (tol %.3g)", what.c_str(), got,
                          want, tol);
            notes.push_back(buf);
        }
    }
};

int run(int index, const std::string& name, double time_budget_s,
        const std::function<void(Criterion&)>& body) {
    Criterion c;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.require(false, std::string("exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.require(elapsed < time_budget_s, "runtime budget exceeded");
    std::printf("[%s] criterion %d: %s (%.2fs)\n", c.failures == 0 ? "PASS" : "FAIL", index,
                name.c_str(), elapsed);
    for (const auto& note : c.notes) std::printf("       %s\n", note.c_str());
    std::fflush(stdout);
    return c.failures == 0 ? 0 : 1;
}

const OffspringLaw det2 = OffspringLaw::deterministic(2);

// ---- criterion bodies ------------------------------------------------------

void thresholds(Criterion& c) {
    c.close(p_b(2), 2.0 / 3.0, 1e-12, "p_b(2)");
    c.close(p_b(3), 0.52337, 1e-5, "p_b(3)");
    for (int m = 2; m <= 8; ++m)
        c.close(p_G(OffspringLaw::deterministic(m), 1e-10), p_b(m), 1e-9,
                "p_G(deterministic(" + std::to_string(m) + "))");
}

void gamma_behavior(Criterion& c) {
    for (double p : {0.55, 0.6, 0.65})
        c.require(black_gamma(det2, p).value < 1.0, "gamma < 1 at p=" + std::to_string(p));
    for (double p : {2.0 / 3.0, 0.7, 0.9})
        c.require(black_gamma(det2, p).value == 1.0, "gamma = 1 at p=" + std::to_string(p));
    c.close(oracle::gamma2(0.6), 2.0 / 3.0, 1e-12, "quadratic oracle at p=0.6");
    c.close(black_gamma(det2, 0.6).value, oracle::gamma2(0.6), 1e-9, "gamma(0.6)");
}

void critical_curves(Criterion& c) {
    const auto closed_form = [](double q) {
        if (q <= 2.0) return q / (q + 1.0);
        const double s = 2.0 * std::sqrt(q - 1.0);
        return s / (1.0 + s);
    };
    for (double q : {1.0, 1.5, 2.0, 2.5, 3.0, 5.0, 10.0}) {
        c.close(p_c0(2, q), q / (q + 1.0), 1e-12, "p_c0(2, q=" + std::to_string(q) + ")");
        c.close(p_c1(2, q, 1e-9), closed_form(q), 1e-8, "p_c1(2, q=" + std::to_string(q) + ")");
    }
    c.close(p_c1(2, 5.0, 1e-9), 0.8, 1e-8, "p_c1(2, 5)");
}

void mc_vs_analytic(Criterion& c) {
    for (double p : {0.6, 0.75}) {
        const auto est = estimate(McQuantity::theta_depth, det2, p, {.depth = 12}, 100000, kDefaultSeed);
        c.close(est.mean, finite_depth_theta(det2, p, 12), 3.0 * est.std_error,
                "theta_D estimate at p=" + std::to_string(p));
    }
    struct Setting {
        double p;
        int k;
    };
    for (const auto& s : {Setting{0.6, 1}, Setting{0.75, 1}, Setting{0.75, 2}}) {
        const auto est =
            estimate(McQuantity::gamma_k_depth, det2, s.p, {.k = s.k, .horizon = 25}, 100000, kDefaultSeed);
        const double theta = survival_theta(det2, s.p, 1e-12).value;
        const double bias = std::abs(finite_depth_theta(det2, s.p, 25) - theta);
        c.close(est.mean, gamma_k(det2, s.p, s.k), 3.0 * est.std_error + bias,
                "gamma_k estimate at p=" + std::to_string(s.p) + " k=" + std::to_string(s.k));
    }
}

void colored_process(Criterion& c) {
    const double p = 0.6;
    const auto law = colored_offspring_law(det2, p);
    const double qb = law.q_color[0], qy = law.q_color[1], qr = law.q_color[2];

    // explicit offspring tables, entrywise
    const char colors[3] = {'b', 'y', 'r'};
    for (int root = 0; root < 3; ++root) {
        std::map<std::array<int, 4>, double> got;
        double total = 0.0;
        for (const auto& e : law.entries[static_cast<std::size_t>(root)]) {
            got[{e.children[0].edge_open, static_cast<int>(e.children[0].color),
                 e.children[1].edge_open, static_cast<int>(e.children[1].color)}] = e.prob;
            total += e.prob;
        }
        c.close(total, 1.0, 1e-10, std::string("normalization, root ") + colors[root]);
        for (int i1 = 0; i1 < 2; ++i1)
            for (int c1 = 0; c1 < 3; ++c1)
                for (int i2 = 0; i2 < 2; ++i2)
                    for (int c2 = 0; c2 < 3; ++c2) {
                        const double expect = oracle::t2_table_prob(colors[root], i1, colors[c1], i2,
                                                                    colors[c2], p, qb, qy, qr);
                        const auto it = got.find({i1, c1, i2, c2});
                        const double actual = it == got.end() ? 0.0 : it->second;
                        if (std::abs(actual - expect) > 1e-10)
                            c.require(false, "table entry mismatch");
                    }
    }
    c.close(red_mean(det2, p), 4.0 / 3.0, 1e-10, "red offspring mean");

    // depth-2 distributional consistency: multi-type simulation vs
    // percolate-then-classify, both over 1e5 samples. Route B carries a
    // finite-horizon classification bias below 1e-4.
    const long n = 100000;
    const int horizon = 45, yellow_depth = 30;
    using Cell = std::array<int, 5>;
    std::map<Cell, long> direct, percolate;
    std::map<std::array<int, 6>, long> direct2, percolate2;

    CounterRng rng(kDefaultSeed, 101);
    for (long s = 0; s < n; ++s) {
        const double u = rng.next_unit();
        const auto root = u < qb ? VertexColor::blue : (u < qb + qy ? VertexColor::yellow : VertexColor::red);
        const auto& pattern = law.sample(root, rng);
        ++direct[{static_cast<int>(root), pattern.children[0].edge_open,
                  static_cast<int>(pattern.children[0].color), pattern.children[1].edge_open,
                  static_cast<int>(pattern.children[1].color)}];
        for (const auto& ch : pattern.children) {
            const auto& grand = law.sample(ch.color, rng);
            ++direct2[{static_cast<int>(ch.color), grand.children[0].edge_open,
                       static_cast<int>(grand.children[0].color), grand.children[1].edge_open,
                       static_cast<int>(grand.children[1].color), 0}];
        }
    }

    LazyTree tree(det2, p);
    for (long s = 0; s < n; ++s) {
        tree.reset(kDefaultSeed, static_cast<std::uint64_t>(s));
        ColorExplorer ex(tree, horizon);
        const auto root = ex.color(0, yellow_depth);
        Cell cell{static_cast<int>(root), 0, 0, 0, 0};
        for (int i = 0; i < 2; ++i) {
            const auto child = tree.child(0, i);
            cell[1 + 2 * i] = tree.edge_open(child) ? 1 : 0;
            cell[2 + 2 * i] = static_cast<int>(ex.color(child, yellow_depth));
        }
        ++percolate[cell];
        for (int i = 0; i < 2; ++i) {
            const auto child = tree.child(0, i);
            std::array<int, 6> gcell{static_cast<int>(ex.color(child, yellow_depth)), 0, 0, 0, 0, 0};
            for (int j = 0; j < 2; ++j) {
                const auto grand = tree.child(child, j);
                gcell[1 + 2 * j] = tree.edge_open(grand) ? 1 : 0;
                gcell[2 + 2 * j] = static_cast<int>(ex.color(grand, yellow_depth));
            }
            ++percolate2[gcell];
        }
    }

    const auto compare = [&](double na, double nb, long ca, long cb, const std::string& what) {
        const double fa = ca / na, fb = cb / nb;
        const double pooled = (ca + cb) / (na + nb);
        const double sigma = std::sqrt(std::max(pooled * (1.0 - pooled), 0.0) * (1.0 / na + 1.0 / nb));
        if (std::abs(fa - fb) > 3.0 * sigma + 1e-4) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%s: %.5f vs %.5f (3sigma %.5f)", what.c_str(), fa, fb,
                          3.0 * sigma);
            c.require(false, buf);
        }
    };
    std::map<Cell, long> keys1 = direct;
    for (const auto& [k, v] : percolate) keys1.emplace(k, 0);
    for (const auto& [k, v] : keys1)
        compare(n, n, direct.count(k) ? direct.at(k) : 0, percolate.count(k) ? percolate.at(k) : 0,
                "generation-1 cell");
    std::map<std::array<int, 6>, long> keys2 = direct2;
    for (const auto& [k, v] : percolate2) keys2.emplace(k, 0);
    for (const auto& [k, v] : keys2)
        compare(2.0 * n, 2.0 * n, direct2.count(k) ? direct2.at(k) : 0,
                percolate2.count(k) ? percolate2.at(k) : 0, "generation-2 cell");
}

void exact_rc(Criterion& c) {
    const auto box = TreeBox::make(2, 1);
    const auto marg = edge_marginals(box, {0.5, 2.0, wired_relation(2), TailMode::all_open});
    for (double v : marg.value) c.close(v, 4.0 / 9.0, 1e-12, "wired edge marginal");

    const auto s = sandwich_check(box, wired_relation(2), 0.5, 2.0,
                                  [](EdgeConfig cfg) { return (cfg & 1) != 0; });
    c.close(s.lhs, 1.0 / 3.0, 1e-12, "product side");
    c.close(s.mid, 4.0 / 9.0, 1e-12, "relation measure");
    c.close(s.rhs, 4.0 / 9.0, 1e-12, "wired side");
    c.require(s.ok, "sandwich ordering");

    // nested-box conditional consistency, exact
    const auto outer = TreeBox::make(2, 2);
    const int inner_edges = outer.edges_to_depth(1);
    for (const auto& rel : {wired_relation(2), free_relation(), open_relation(2, 2, {0, 0, 1, 1, 2, 2})}) {
        const RcSpec spec{0.6, 2.0, rel, TailMode::all_open};
        const auto table = exact_distribution(outer, spec);
        double worst = 0.0;
        for (EdgeConfig xi = 0; xi < (EdgeConfig{1} << (outer.edge_count() - inner_edges)); ++xi) {
            double cond[8], direct[8], cond_sum = 0.0, direct_sum = 0.0;
            for (EdgeConfig omega = 0; omega < 8; ++omega) {
                const auto full = omega | (xi << inner_edges);
                cond[omega] = table.prob[static_cast<std::size_t>(full)];
                cond_sum += cond[omega];
                const int open = std::popcount(static_cast<std::uint64_t>(omega));
                direct[omega] = std::pow(0.6, open) * std::pow(0.4, 3 - open) *
                                std::pow(2.0, conditional_cluster_count(outer, 1, full, spec));
                direct_sum += direct[omega];
            }
            for (EdgeConfig omega = 0; omega < 8; ++omega)
                worst = std::max(worst, std::abs(cond[omega] / cond_sum - direct[omega] / direct_sum));
        }
        c.require(worst <= 1e-10, "nested-box consistency deviation " + std::to_string(worst));
    }
}

void sampler_correctness(Criterion& c) {
    const auto box = TreeBox::make(2, 2);
    for (double p : {0.3, 0.6, 0.8})
        for (double q : {1.0, 2.0, 4.0}) {
            const RcSpec spec{p, q, wired_relation(2), TailMode::all_open};
            const auto exact = edge_marginals(box, spec);
            const auto chain = heat_bath_chain(box, spec, 1000000, kDefaultSeed);
            for (std::size_t e = 0; e < exact.value.size(); ++e)
                c.close(chain.edge_mean[e], exact.value[e], 3.0 * chain.edge_std_error[e],
                        "edge " + std::to_string(e) + " at p=" + std::to_string(p) +
                            " q=" + std::to_string(q));
        }
}

void reduction_equivalence(Criterion& c) {
    const double params[5] = {0.3, 0.55, 0.7, 0.45, 0.8};
    for (double q : {0.5, 1.0, 2.0, 4.0}) {
        for (int len = 2; len <= 5; ++len) { // chains
            oracle::Graph g;
            g.nv = len + 1;
            double s = params[0];
            g.edges.push_back({0, 1, params[0]});
            for (int i = 1; i < len; ++i) {
                g.edges.push_back({i, i + 1, params[i]});
                s = series_reduce(s, params[i], q);
            }
            c.close(static_cast<double>(oracle::rc_two_point(g, q, 0, len)), pi(s, q), 1e-12,
                    "series chain");
        }
        for (int count = 2; count <= 5; ++count) { // parallel bundles
            oracle::Graph g;
            g.nv = 2;
            double r = params[0];
            g.edges.push_back({0, 1, params[0]});
            for (int i = 1; i < count; ++i) {
                g.edges.push_back({0, 1, params[i]});
                r = parallel_reduce(r, params[i]);
            }
            c.close(static_cast<double>(oracle::rc_two_point(g, q, 0, 1)), pi(r, q), 1e-12,
                    "parallel bundle");
        }
    }

    // attachment collapse vs full-box enumeration
    const auto tree = reduce_to_attachment_tree(2, 0.6, 2.0, 1, 2);
    const auto ag = attachment_graph(2, 0.6, wired_relation(2), tree.attachment_param);
    const auto reduced = small_graph_distribution(ag.graph, 2.0);
    const auto full = exact_distribution(TreeBox::make(2, 2), {0.6, 2.0, wired_relation(2), TailMode::all_open});
    for (int e = 0; e < 3; ++e) {
        double rm = 0.0, fm = 0.0;
        for (std::size_t mask = 0; mask < reduced.prob.size(); ++mask)
            if ((mask >> e) & 1u) rm += reduced.prob[mask];
        for (std::size_t mask = 0; mask < full.prob.size(); ++mask)
            if ((mask >> e) & 1u) fm += full.prob[mask];
        c.close(rm, fm, 1e-10, "attachment marginal edge " + std::to_string(e));
    }

    for (double p : {0.55, 0.6, 0.75, 0.9})
        c.close(effective_attachment(2, p, 1.0, 1).p_inf, survival_theta(det2, p, 1e-12).value, 1e-9,
                "q=1 fixed point at p=" + std::to_string(p));
}

void boundary_distinguishability(Criterion& c) {
    const std::vector<RayRelation> relations = {
        wired_relation(2),
        open_relation(2, 1, {0, 0, 1}),
        open_relation(2, 1, {0, 1, 2}),
        open_relation(2, 2, {0, 0, 0, 0, 0, 0}),
        open_relation(2, 2, {0, 0, 1, 1, 2, 2}),
        open_relation(2, 2, {0, 1, 1, 0, 2, 2}),
        open_relation(2, 2, {0, 1, 2, 3, 4, 5}),
    };
    for (const auto& rel : relations)
        for (double q : {2.0, 4.0})
            for (double p_att : {0.3, 0.7}) {
                const auto boundary = stems_at_depth(2, rel.depth);
                for (std::int64_t x = 0; x < boundary; ++x)
                    for (std::int64_t y = x + 1; y < boundary; ++y) {
                        const auto res = dependence_test(2, 0.6, q, rel, x, y, p_att);
                        const bool same = rel.stem_class[static_cast<std::size_t>(x)] ==
                                          rel.stem_class[static_cast<std::size_t>(y)];
                        c.require(res.dependent == same, "dependence/class mismatch");
                        if (!same)
                            c.require(std::abs(res.delta) < 1e-12, "nonzero delta across classes");
                    }
            }
    for (std::int64_t y = 1; y < 3; ++y)
        c.require(std::abs(dependence_test(2, 0.6, 1.0, wired_relation(2), 0, y, 0.5).delta) < 1e-12,
                  "q=1 delta not zero");
}

void uniqueness_mechanism(Criterion& c) {
    // blue cutsets within 15 generations, horizon 25, at the effective
    // percolation density pi(p,q); p chosen so pi clears the black threshold
    const double pi_super = pi(0.9, 2.0); // 0.818 >= p_b(2) = 2/3
    const auto super =
        estimate(McQuantity::blue_cutset, det2, pi_super, {.k = 15, .horizon = 25}, 10000, kDefaultSeed);
    c.require(super.mean > 0.99, "cutset probability " + std::to_string(super.mean) + " not > 0.99");

    const double pi_sub = 0.55; // below the threshold
    const auto sub =
        estimate(McQuantity::blue_cutset, det2, pi_sub, {.k = 15, .horizon = 25}, 10000, kDefaultSeed);
    c.require(sub.mean <= 0.95, "cutset probability " + std::to_string(sub.mean) + " not <= 0.95");
}

} // namespace

int main() {
    int failed = 0;
    failed += run(1, "thresholds: p_b closed forms and p_G agreement", 1.0, thresholds);
    failed += run(2, "black-root probability across its threshold", 1.0, gamma_behavior);
    failed += run(3, "critical curves p_c0 and p_c1", 5.0, critical_curves);
    failed += run(4, "Monte Carlo estimates vs exact recursions", 120.0, mc_vs_analytic);
    failed += run(5, "colored offspring process", 120.0, colored_process);
    failed += run(6, "exact random-cluster measures and nested-box consistency", 30.0, exact_rc);
    failed += run(7, "heat-bath sampler vs exact marginals", 300.0, sampler_correctness);
    failed += run(8, "series/parallel and attachment reductions", 60.0, reduction_equivalence);
    failed += run(9, "boundary distinguishability via edge dependence", 60.0, boundary_distinguishability);
    failed += run(10, "blue-cutset uniqueness mechanism", 180.0, uniqueness_mechanism);
    if (failed == 0)
        std::printf("all acceptance criteria passed\n");
    else
        std::printf("%d acceptance criteria FAILED\n", failed);
    return failed;
}
