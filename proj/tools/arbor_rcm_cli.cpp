// arbor-rcm: threshold curves, branching-process Monte Carlo, exact
// random-cluster computations on tree boxes, reductions and boundary
// distinguishability tests. One command per process; identical config and
// seed produce byte-identical output.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "arbor/analytic.hpp"
#include "arbor/gwsim.hpp"
#include "arbor/parallel.hpp"
#include "arbor/rcm.hpp"

using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitGuard = 3;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct OutputSink {
    std::string path; // empty = stdout
    void write(const std::string& text) const {
        if (path.empty()) {
            std::cout << text;
            return;
        }
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot open output file: " + path);
        f << text;
    }
};

struct GridSpec {
    double lo = 0.0, hi = 0.0, step = 1.0;
};

GridSpec parse_grid(const std::string& text) {
    GridSpec g;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> g.lo >> c1 >> g.hi >> c2 >> g.step) || c1 != ':' || c2 != ':' || g.step <= 0.0)
        throw std::invalid_argument("grid must be lo:hi:step with step > 0: " + text);
    return g;
}

std::vector<double> grid_values(const GridSpec& g) {
    std::vector<double> out;
    for (int i = 0;; ++i) {
        const double v = g.lo + i * g.step;
        if (v > g.hi + 1e-12) break;
        out.push_back(std::min(v, g.hi));
    }
    return out;
}

arbor::RayRelation parse_relation(const std::string& text, int m) {
    if (text == "wired") return arbor::wired_relation(m);
    if (text == "free") return arbor::free_relation();
    if (!text.empty() && text.front() == '{') return arbor::relation_from_json(json::parse(text), m);
    std::ifstream f(text);
    if (!f) throw std::invalid_argument("relation is not wired/free/json/file: " + text);
    json j;
    f >> j;
    return arbor::relation_from_json(j, m);
}

arbor::OffspringLaw parse_law(const std::string& law_json, int m) {
    if (law_json.empty()) return arbor::OffspringLaw::deterministic(m);
    const json j = json::parse(law_json);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "deterministic") return arbor::OffspringLaw::deterministic(j.at("m").get<int>());
    if (kind == "table") return arbor::OffspringLaw(j.at("probs").get<std::vector<double>>());
    throw std::invalid_argument("law kind must be deterministic or table");
}

std::string config_bits(arbor::EdgeConfig mask, int edges) {
    std::string s(static_cast<std::size_t>(edges), '0');
    for (int e = 0; e < edges; ++e)
        if ((mask >> e) & 1u) s[static_cast<std::size_t>(e)] = '1';
    return s;
}

json spec_echo(int m, int n, const arbor::RcSpec& spec) {
    return {{"m", m},
            {"n", n},
            {"p", spec.p},
            {"q", spec.q},
            {"relation", arbor::relation_to_json(spec.relation)},
            {"tail", spec.tail == arbor::TailMode::all_open ? "all_open" : "all_closed"}};
}

// ---- command parameter records ------------------------------------------

struct ThresholdsParams {
    int m = 2;
    std::string q_grid = "1:10:0.5";
    double tol = 1e-8;
};

struct GammaCurveParams {
    int m = 2;
    std::string p_grid = "0:1:0.01";
    double tol = 1e-10;
};

struct McVerifyParams {
    std::string quantity = "theta_D";
    int m = 2;
    std::string law;
    double p = 0.5;
    int depth = 12, k = 1, horizon = 25;
    long samples = 100000;
    int threads = 0;
};

struct RcExactParams {
    int m = 2, n = 1;
    double p = 0.5, q = 2.0;
    std::string relation = "wired", tail = "all_open";
    bool table = false; // otherwise marginals
};

struct RcChainParams {
    int m = 2, n = 2;
    double p = 0.5, q = 2.0;
    std::string relation = "wired", tail = "all_open";
    long sweeps = 100000;
    bool connectivity = false;
};

struct ReduceParams {
    int m = 2, k = 1, n = 2;
    double p = 0.5, q = 2.0;
};

struct DistinguishParams {
    int m = 2;
    double p = 0.6, q = 2.0;
    std::string relation = "wired";
    double p_att = 0.5;
};

// ---- command implementations ---------------------------------------------

void run_thresholds(const ThresholdsParams& prm, const OutputSink& out) {
    const auto law = arbor::OffspringLaw::deterministic(prm.m);
    const double pb = arbor::p_b(prm.m);
    const double pg = arbor::p_G(law, prm.tol);
    std::string csv = "q,p_c0,p_c1,p_b,p_G,tol\n";
    for (double q : grid_values(parse_grid(prm.q_grid))) {
        const arbor::CriticalCurvePoint pc0{q, prm.m, arbor::p_c0(prm.m, q), arbor::CurveKind::pc0};
        const arbor::CriticalCurvePoint pc1{q, prm.m, arbor::p_c1(prm.m, q, prm.tol),
                                            arbor::CurveKind::pc1};
        if (q <= 2.0 && std::abs(pc1.p - pc0.p) > prm.tol)
            throw std::runtime_error("thresholds: p_c1 must coincide with p_c0 for q <= 2");
        csv += fmt(q) + "," + fmt(pc0.p) + "," + fmt(pc1.p) + "," + fmt(pb) + "," + fmt(pg) + "," +
               fmt(prm.tol) + "\n";
    }
    out.write(csv);
}

void run_gamma_curve(const GammaCurveParams& prm, const OutputSink& out) {
    const auto law = arbor::OffspringLaw::deterministic(prm.m);
    std::string csv = "p,theta,gamma,tol\n";
    for (double p : grid_values(parse_grid(prm.p_grid))) {
        const double theta = p < 1.0 ? arbor::survival_theta(law, p, prm.tol).value : 1.0;
        const double gamma = p < 1.0 ? arbor::black_gamma(law, p, prm.tol).value : 1.0;
        csv += fmt(p) + "," + fmt(theta) + "," + fmt(gamma) + "," + fmt(prm.tol) + "\n";
    }
    out.write(csv);
}

void run_mc_verify(const McVerifyParams& prm, std::uint64_t seed, const OutputSink& out) {
    const auto law = parse_law(prm.law, prm.m);
    arbor::McQuantity qty;
    arbor::McParams mp;
    if (prm.quantity == "theta_D") {
        qty = arbor::McQuantity::theta_depth;
        mp.depth = prm.depth;
    } else if (prm.quantity == "gamma_kD") {
        qty = arbor::McQuantity::gamma_k_depth;
        mp.k = prm.k;
        mp.horizon = prm.horizon;
    } else if (prm.quantity == "blue_cutset") {
        qty = arbor::McQuantity::blue_cutset;
        mp.k = prm.k;
        mp.horizon = prm.horizon;
    } else {
        throw std::invalid_argument("quantity must be theta_D, gamma_kD or blue_cutset");
    }
    const auto est = arbor::estimate(qty, law, prm.p, mp, prm.samples, seed, prm.threads);
    json rec = {{"quantity", est.quantity}, {"p", prm.p},
                {"samples", est.samples},  {"mean", est.mean},
                {"std_error", est.std_error}, {"bias_bound", est.bias_bound},
                {"seed", est.seed}};
    rec["law"] = prm.law.empty() ? json{{"kind", "deterministic"}, {"m", prm.m}} : json::parse(prm.law);
    if (qty == arbor::McQuantity::theta_depth)
        rec["depth"] = mp.depth;
    else {
        rec["k"] = mp.k;
        rec["horizon"] = mp.horizon;
    }
    out.write(rec.dump(2) + "\n");
}

arbor::RcSpec make_spec(double p, double q, const std::string& relation, const std::string& tail, int m) {
    arbor::RcSpec spec;
    spec.p = p;
    spec.q = q;
    spec.relation = parse_relation(relation, m);
    if (tail == "all_open")
        spec.tail = arbor::TailMode::all_open;
    else if (tail == "all_closed")
        spec.tail = arbor::TailMode::all_closed;
    else
        throw std::invalid_argument("tail must be all_open or all_closed");
    return spec;
}

void run_rc_exact(const RcExactParams& prm, std::uint64_t seed, const OutputSink& out, bool csv_format) {
    const auto box = arbor::TreeBox::make(prm.m, prm.n);
    const auto spec = make_spec(prm.p, prm.q, prm.relation, prm.tail, prm.m);
    if (prm.table) {
        const auto table = arbor::exact_distribution(box, spec);
        std::string csv = "config,weight,probability\n";
        for (std::size_t mask = 0; mask < table.prob.size(); ++mask)
            csv += config_bits(mask, table.edge_count) + "," + fmt(table.prob[mask] * table.z) + "," +
                   fmt(table.prob[mask]) + "\n";
        out.write(csv);
        return;
    }
    const auto marg = arbor::edge_marginals(box, spec, 200000, seed);
    if (csv_format) {
        std::string csv = "edge,parent,child,value,std_error\n";
        for (std::size_t e = 0; e < marg.value.size(); ++e)
            csv += std::to_string(e) + "," + std::to_string(box.parent[e + 1]) + "," +
                   std::to_string(e + 1) + "," + fmt(marg.value[e]) + "," + fmt(marg.std_error[e]) + "\n";
        out.write(csv);
        return;
    }
    json rec = {{"spec", spec_echo(prm.m, prm.n, spec)},
                {"method", marg.exact ? "exact" : "heat_bath"},
                {"guard", {{"edges", box.edge_count()}, {"enumeration_max_edges", 24}}}};
    json rows = json::array();
    for (std::size_t e = 0; e < marg.value.size(); ++e)
        rows.push_back({{"edge", e},
                        {"parent", box.parent[e + 1]},
                        {"child", e + 1},
                        {"value", marg.value[e]},
                        {"std_error", marg.std_error[e]}});
    rec["marginals"] = rows;
    out.write(rec.dump(2) + "\n");
}

void run_rc_chain(const RcChainParams& prm, std::uint64_t seed, const OutputSink& out) {
    const auto box = arbor::TreeBox::make(prm.m, prm.n);
    const auto spec = make_spec(prm.p, prm.q, prm.relation, prm.tail, prm.m);
    const auto res = arbor::heat_bath_chain(box, spec, prm.sweeps, seed, prm.connectivity);
    json rec = {{"spec", spec_echo(prm.m, prm.n, spec)},
                {"sweeps", res.sweeps},
                {"seed", res.seed},
                {"edge_mean", res.edge_mean},
                {"edge_std_error", res.edge_std_error},
                {"final_config", config_bits(res.final_config, box.edge_count())}};
    if (prm.connectivity) {
        rec["root_to_boundary_mean"] = res.connect_mean;
        rec["root_to_boundary_std_error"] = res.connect_std_error;
    }
    out.write(rec.dump(2) + "\n");
}

void run_reduce(const ReduceParams& prm, const OutputSink& out) {
    const auto tree = arbor::reduce_to_attachment_tree(prm.m, prm.p, prm.q, prm.k, prm.n);
    const auto seq = arbor::effective_attachment(prm.m, prm.p, prm.q, std::max(prm.n - prm.k, 1));
    json rec = {{"m", prm.m},
                {"p", prm.p},
                {"q", prm.q},
                {"k", prm.k},
                {"n", prm.n},
                {"attachment_param", tree.attachment_param},
                {"collapse_levels", tree.collapse_levels},
                {"p_inf", seq.p_inf},
                {"fixed_point_tol", 1e-12},
                {"tree", {{"depth", tree.k}, {"attachments", arbor::stems_at_depth(prm.m, prm.k)}}}};
    out.write(rec.dump(2) + "\n");
}

void run_distinguish(const DistinguishParams& prm, const OutputSink& out) {
    const auto rel = parse_relation(prm.relation, prm.m);
    if (!rel.is_open()) throw std::invalid_argument("distinguish: relation must be open");
    const auto boundary = arbor::stems_at_depth(prm.m, rel.depth);
    json pairs = json::array();
    for (std::int64_t x = 0; x < boundary; ++x)
        for (std::int64_t y = x + 1; y < boundary; ++y) {
            const auto res = arbor::dependence_test(prm.m, prm.p, prm.q, rel, x, y, prm.p_att);
            pairs.push_back({{"x", x},
                             {"y", y},
                             {"x_class", rel.stem_class[static_cast<std::size_t>(x)]},
                             {"y_class", rel.stem_class[static_cast<std::size_t>(y)]},
                             {"same_class", rel.stem_class[static_cast<std::size_t>(x)] ==
                                                rel.stem_class[static_cast<std::size_t>(y)]},
                             {"delta", res.delta},
                             {"dependent", res.dependent}});
        }
    json rec = {{"m", prm.m},          {"p", prm.p},
                {"q", prm.q},          {"p_att", prm.p_att},
                {"dependence_threshold", 1e-9},
                {"relation", arbor::relation_to_json(rel)}, {"pairs", pairs}};
    out.write(rec.dump(2) + "\n");
}

} // namespace

int run_cli(const std::vector<std::string>& args, int config_depth);

// Reads a RunConfig json ({"command": ..., "params": {...}, "seed": ...,
// "output": ..., "format": ...}) and replays it as flags; flags passed to
// `run` itself override the file entries of the same name.
int run_config(const std::string& path, const std::vector<std::string>& overrides, int config_depth) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file: " + path);
    json cfg;
    f >> cfg;
    const auto command = cfg.at("command").get<std::string>();
    if (command == "run") throw std::invalid_argument("run: nested config files are not allowed");
    json params = cfg.contains("params") ? cfg.at("params") : json::object();

    for (std::size_t i = 0; i < overrides.size(); ++i) {
        const auto& tok = overrides[i];
        if (tok.rfind("--", 0) != 0) throw std::invalid_argument("run: unexpected argument " + tok);
        std::string key = tok.substr(2), value;
        bool has_value = false;
        if (const auto eq = key.find('='); eq != std::string::npos) {
            value = key.substr(eq + 1);
            key = key.substr(0, eq);
            has_value = true;
        } else if (i + 1 < overrides.size() && overrides[i + 1].rfind("--", 0) != 0) {
            value = overrides[++i];
            has_value = true;
        }
        if (key == "out") key = "output";
        if (key == "seed" || key == "output" || key == "format")
            cfg[key] = value;
        else
            params[key] = has_value ? json(value) : json(true);
    }

    std::vector<std::string> args;
    args.push_back(command);
    for (const auto& [key, value] : params.items())
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back("--" + key);
        } else if (value.is_string()) {
            args.push_back("--" + key + "=" + value.get<std::string>());
        } else {
            args.push_back("--" + key + "=" + value.dump());
        }
    if (cfg.contains("seed")) {
        const auto& s = cfg.at("seed");
        args.push_back("--seed=" + (s.is_string() ? s.get<std::string>() : s.dump()));
    }
    if (cfg.contains("output")) args.push_back("--out=" + cfg.at("output").get<std::string>());
    if (cfg.contains("format")) args.push_back("--format=" + cfg.at("format").get<std::string>());
    return run_cli(args, config_depth + 1);
}

int run_cli(const std::vector<std::string>& args, int config_depth) {
    CLI::App app{"random-cluster measures and branching-process colorings on regular trees"};
    app.require_subcommand(1);

    std::uint64_t seed = arbor::kDefaultSeed;
    OutputSink sink;
    std::string format;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "RNG seed (fixed default for reproducibility)");
        cmd->add_option("--out", sink.path, "output file (default stdout)");
        cmd->add_option("--format", format, "csv or json");
    };

    ThresholdsParams th;
    auto* c_th = app.add_subcommand("thresholds", "critical curves p_c0, p_c1, p_b, p_G");
    c_th->add_option("--m", th.m)->check(CLI::Range(2, 64));
    c_th->add_option("--q-grid", th.q_grid);
    c_th->add_option("--tol", th.tol);
    add_common(c_th);

    GammaCurveParams gc;
    auto* c_gc = app.add_subcommand("gamma-curve", "theta(p) and gamma(p) along a p grid");
    c_gc->add_option("--m", gc.m)->check(CLI::Range(2, 64));
    c_gc->add_option("--p-grid", gc.p_grid);
    c_gc->add_option("--tol", gc.tol);
    add_common(c_gc);

    McVerifyParams mc;
    auto* c_mc = app.add_subcommand("mc-verify", "Monte Carlo estimates of theta_D / gamma_kD / blue_cutset");
    c_mc->add_option("--quantity", mc.quantity);
    c_mc->add_option("--m", mc.m)->check(CLI::Range(2, 64));
    c_mc->add_option("--law", mc.law, "offspring law json (overrides --m)");
    c_mc->add_option("--p", mc.p);
    c_mc->add_option("--depth", mc.depth);
    c_mc->add_option("--k", mc.k);
    c_mc->add_option("--horizon", mc.horizon);
    c_mc->add_option("--samples", mc.samples);
    c_mc->add_option("--threads", mc.threads);
    add_common(c_mc);

    RcExactParams re;
    auto* c_re = app.add_subcommand("rc-exact", "exact finite-volume random-cluster computations");
    c_re->add_option("--m", re.m)->check(CLI::Range(2, 64));
    c_re->add_option("--n", re.n);
    c_re->add_option("--p", re.p);
    c_re->add_option("--q", re.q);
    c_re->add_option("--relation", re.relation);
    c_re->add_option("--tail", re.tail);
    c_re->add_flag("--table", re.table, "emit the full configuration table as CSV");
    c_re->add_flag("--marginals", [](std::int64_t) {}, "emit per-edge marginals (default)");
    add_common(c_re);

    RcChainParams rc;
    auto* c_rc = app.add_subcommand("rc-chain", "heat-bath sampler estimates");
    c_rc->add_option("--m", rc.m)->check(CLI::Range(2, 64));
    c_rc->add_option("--n", rc.n);
    c_rc->add_option("--p", rc.p);
    c_rc->add_option("--q", rc.q);
    c_rc->add_option("--relation", rc.relation);
    c_rc->add_option("--tail", rc.tail);
    c_rc->add_option("--sweeps", rc.sweeps);
    c_rc->add_flag("--connectivity", rc.connectivity, "also estimate root-to-boundary connectivity");
    add_common(c_rc);

    ReduceParams rd;
    auto* c_rd = app.add_subcommand("reduce", "attachment-tree collapse parameters");
    c_rd->add_option("--m", rd.m)->check(CLI::Range(2, 64));
    c_rd->add_option("--p", rd.p);
    c_rd->add_option("--q", rd.q);
    c_rd->add_option("--k", rd.k);
    c_rd->add_option("--n", rd.n);
    add_common(c_rd);

    DistinguishParams di;
    auto* c_di = app.add_subcommand("distinguish", "boundary-pair dependence deltas on the attachment tree");
    c_di->add_option("--m", di.m)->check(CLI::Range(2, 64));
    c_di->add_option("--p", di.p);
    c_di->add_option("--q", di.q);
    c_di->add_option("--relation", di.relation);
    c_di->add_option("--p-att", di.p_att);
    add_common(c_di);

    std::string config_path;
    auto* c_run = app.add_subcommand("run", "execute a JSON RunConfig, flags override the file");
    c_run->add_option("--config", config_path)->required();
    c_run->allow_extras();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (c_run->parsed()) {
            if (config_depth > 0) throw std::invalid_argument("run: nested config files are not allowed");
            auto overrides = c_run->remaining();
            return run_config(config_path, overrides, config_depth);
        }
        if (c_th->parsed()) run_thresholds(th, sink);
        if (c_gc->parsed()) run_gamma_curve(gc, sink);
        if (c_mc->parsed()) run_mc_verify(mc, seed, sink);
        if (c_re->parsed()) run_rc_exact(re, seed, sink, format == "csv");
        if (c_rc->parsed()) run_rc_chain(rc, seed, sink);
        if (c_rd->parsed()) run_reduce(rd, sink);
        if (c_di->parsed()) run_distinguish(di, sink);
    } catch (const arbor::GuardExceeded& e) {
        std::cerr << "guard exceeded: " << e.what() << "\n";
        return kExitGuard;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return 0;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run_cli(args, 0);
    } catch (const arbor::GuardExceeded& e) {
        std::cerr << "guard exceeded: " << e.what() << "\n";
        return kExitGuard;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}
