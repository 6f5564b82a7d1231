#include "arbor/rays.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace arbor {

namespace {

constexpr std::int64_t kMaxStems = 1 << 24;

std::int64_t checked_stems(int m, int k) {
    if (m < 2) throw std::invalid_argument("relation: m must be >= 2");
    if (k < 0) throw std::invalid_argument("relation: depth must be >= 0");
    if (k == 0) return 1;
    std::int64_t n = m + 1;
    for (int i = 1; i < k; ++i) {
        n *= m;
        if (n > kMaxStems) throw GuardExceeded("relation: stem count exceeds 2^24");
    }
    return n;
}

std::int64_t pow_i64(int m, int e) {
    std::int64_t n = 1;
    for (int i = 0; i < e; ++i) n *= m;
    return n;
}

// Renumber class ids by first occurrence in stem order.
void canonicalize(std::vector<int>& cls, int& count) {
    std::vector<int> remap;
    int next = 0;
    for (int& c : cls) {
        if (c < 0) throw std::invalid_argument("relation: negative class id");
        if (c >= static_cast<int>(remap.size())) remap.resize(static_cast<std::size_t>(c) + 1, -1);
        if (remap[static_cast<std::size_t>(c)] < 0) remap[static_cast<std::size_t>(c)] = next++;
        c = remap[static_cast<std::size_t>(c)];
    }
    count = next;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

} // namespace

std::int64_t stems_at_depth(int m, int k) { return checked_stems(m, k); }

std::int64_t stem_index(int m, std::span<const int> path) {
    if (path.empty()) return 0;
    if (path[0] < 0 || path[0] > m) throw std::invalid_argument("stem_index: first step outside [0,m]");
    std::int64_t idx = path[0];
    for (std::size_t i = 1; i < path.size(); ++i) {
        if (path[i] < 0 || path[i] >= m) throw std::invalid_argument("stem_index: step outside [0,m)");
        idx = idx * m + path[i];
    }
    return idx;
}

std::vector<int> stem_path(int m, int k, std::int64_t index) {
    std::vector<int> path(static_cast<std::size_t>(k));
    for (int i = k - 1; i >= 1; --i) {
        path[static_cast<std::size_t>(i)] = static_cast<int>(index % m);
        index /= m;
    }
    if (k > 0) path[0] = static_cast<int>(index);
    return path;
}

RayRelation free_relation() { return {}; }

RayRelation wired_relation(int m) {
    const auto n = checked_stems(m, 1);
    RayRelation rel;
    rel.kind = RayRelation::Kind::open;
    rel.m = m;
    rel.depth = 1;
    rel.stem_class.assign(static_cast<std::size_t>(n), 0);
    rel.class_count = 1;
    return rel;
}

RayRelation open_relation(int m, int k, std::vector<int> stem_class) {
    if (k < 1) throw std::invalid_argument("open_relation: depth must be >= 1");
    const auto n = checked_stems(m, k);
    if (static_cast<std::int64_t>(stem_class.size()) != n)
        throw std::invalid_argument("open_relation: partition must cover every stem");
    RayRelation rel;
    rel.kind = RayRelation::Kind::open;
    rel.m = m;
    rel.depth = k;
    rel.stem_class = std::move(stem_class);
    canonicalize(rel.stem_class, rel.class_count);
    return rel;
}

RayRelation cutset_relation(const std::vector<std::vector<int>>& w, int m) {
    if (w.empty()) throw std::invalid_argument("cutset_relation: empty vertex set");
    for (const auto& v : w) {
        if (v.empty()) {
            if (w.size() != 1)
                throw std::invalid_argument("cutset_relation: root together with other vertices is not incomparable");
            return wired_relation(m);
        }
        if (v[0] < 0 || v[0] > m) throw std::invalid_argument("cutset_relation: first step outside [0,m]");
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] < 0 || v[i] >= m) throw std::invalid_argument("cutset_relation: step outside [0,m)");
    }
    // Incomparable: no member is a prefix of another.
    for (std::size_t a = 0; a < w.size(); ++a)
        for (std::size_t b = 0; b < w.size(); ++b) {
            if (a == b) continue;
            if (w[a].size() <= w[b].size() && std::equal(w[a].begin(), w[a].end(), w[b].begin()))
                throw std::invalid_argument("cutset_relation: vertex set is not incomparable");
        }
    int k = 0;
    for (const auto& v : w) k = std::max(k, static_cast<int>(v.size()));
    const auto total = checked_stems(m, k);
    // Disjoint cones must cover every depth-k stem.
    std::int64_t covered = 0;
    for (const auto& v : w) covered += pow_i64(m, k - static_cast<int>(v.size()));
    if (covered != total) throw std::invalid_argument("cutset_relation: vertex set is not a cutset");

    std::vector<int> cls(static_cast<std::size_t>(total), -1);
    for (std::size_t wi = 0; wi < w.size(); ++wi) {
        const auto span = pow_i64(m, k - static_cast<int>(w[wi].size()));
        const auto base = stem_index(m, w[wi]) * span;
        for (std::int64_t s = 0; s < span; ++s) cls[static_cast<std::size_t>(base + s)] = static_cast<int>(wi);
    }
    return open_relation(m, k, std::move(cls));
}

namespace {

int class_at_refined_depth(const RayRelation& rel, int big_k, std::int64_t stem) {
    const auto span = pow_i64(rel.m, big_k - rel.depth);
    return rel.stem_class[static_cast<std::size_t>(stem / span)];
}

} // namespace

bool relation_leq(const RayRelation& a, const RayRelation& b) {
    if (a.is_free()) return true;
    if (b.is_free()) return false;
    if (a.m != b.m) throw std::invalid_argument("relation_leq: mismatched m");
    const int k = std::max(a.depth, b.depth);
    const auto total = checked_stems(a.m, k);
    std::vector<int> image(static_cast<std::size_t>(a.class_count), -1);
    for (std::int64_t s = 0; s < total; ++s) {
        const int ca = class_at_refined_depth(a, k, s);
        const int cb = class_at_refined_depth(b, k, s);
        if (image[static_cast<std::size_t>(ca)] < 0)
            image[static_cast<std::size_t>(ca)] = cb;
        else if (image[static_cast<std::size_t>(ca)] != cb)
            return false;
    }
    return true;
}

std::vector<int> boundary_identification(const RayRelation& rel, int n, int m) {
    if (n < 1) throw std::invalid_argument("boundary_identification: n must be >= 1");
    const auto total = checked_stems(m, n);
    std::vector<int> out(static_cast<std::size_t>(total));
    if (rel.is_free()) {
        std::iota(out.begin(), out.end(), 0);
        return out;
    }
    if (rel.m != m) throw std::invalid_argument("boundary_identification: mismatched m");
    if (n < rel.depth) throw std::invalid_argument("boundary_identification: box shallower than relation depth");
    const auto span = pow_i64(m, n - rel.depth);
    for (std::int64_t v = 0; v < total; ++v)
        out[static_cast<std::size_t>(v)] = rel.stem_class[static_cast<std::size_t>(v / span)];
    return out;
}

std::vector<int> classes_in_cone(const RayRelation& rel, int n, std::int64_t boundary_index) {
    if (rel.is_free()) return {};
    if (n >= rel.depth) {
        const auto span = pow_i64(rel.m, n - rel.depth);
        return {rel.stem_class[static_cast<std::size_t>(boundary_index / span)]};
    }
    const auto span = pow_i64(rel.m, rel.depth - n);
    std::vector<int> out;
    for (std::int64_t s = boundary_index * span; s < (boundary_index + 1) * span; ++s) {
        const int c = rel.stem_class[static_cast<std::size_t>(s)];
        if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
}

RayRelation coarsen_to_box(const RayRelation& rel, int n) {
    if (rel.is_free()) throw std::invalid_argument("coarsen_to_box: undefined for the free relation");
    if (n < 1) throw std::invalid_argument("coarsen_to_box: n must be >= 1");
    if (n >= rel.depth) return rel;
    const auto total_n = checked_stems(rel.m, n);
    const auto span = pow_i64(rel.m, rel.depth - n);
    UnionFind uf(static_cast<std::size_t>(total_n));
    std::vector<int> rep(static_cast<std::size_t>(rel.class_count), -1);
    for (std::int64_t s = 0; s < static_cast<std::int64_t>(rel.stem_class.size()); ++s) {
        const int c = rel.stem_class[static_cast<std::size_t>(s)];
        const int cone = static_cast<int>(s / span);
        if (rep[static_cast<std::size_t>(c)] < 0)
            rep[static_cast<std::size_t>(c)] = cone;
        else
            uf.unite(cone, rep[static_cast<std::size_t>(c)]);
    }
    std::vector<int> cls(static_cast<std::size_t>(total_n));
    for (std::int64_t v = 0; v < total_n; ++v) cls[static_cast<std::size_t>(v)] = uf.find(static_cast<int>(v));
    return open_relation(rel.m, n, std::move(cls));
}

RayRelation relation_from_json(const nlohmann::json& j, int m) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "free") return free_relation();
    if (kind == "wired") return wired_relation(j.contains("m") ? j.at("m").get<int>() : m);
    if (kind == "cutset") {
        const int mm = j.contains("m") ? j.at("m").get<int>() : m;
        return cutset_relation(j.at("vertices").get<std::vector<std::vector<int>>>(), mm);
    }
    if (kind == "open") {
        const int mm = j.at("m").get<int>();
        const int k = j.at("k").get<int>();
        const auto classes = j.at("classes").get<std::vector<std::vector<std::vector<int>>>>();
        const auto total = checked_stems(mm, k);
        std::vector<int> cls(static_cast<std::size_t>(total), -1);
        for (std::size_t c = 0; c < classes.size(); ++c)
            for (const auto& stem : classes[c]) {
                if (static_cast<int>(stem.size()) != k)
                    throw std::invalid_argument("relation_from_json: stem depth mismatch");
                auto& slot = cls[static_cast<std::size_t>(stem_index(mm, stem))];
                if (slot >= 0) throw std::invalid_argument("relation_from_json: stem listed twice");
                slot = static_cast<int>(c);
            }
        for (int c : cls)
            if (c < 0) throw std::invalid_argument("relation_from_json: partition does not cover every stem");
        return open_relation(mm, k, std::move(cls));
    }
    throw std::invalid_argument("relation_from_json: unknown kind '" + kind + "'");
}

nlohmann::json relation_to_json(const RayRelation& rel) {
    if (rel.is_free()) return {{"kind", "free"}};
    if (rel.is_wired() && rel.depth == 1) return {{"kind", "wired"}, {"m", rel.m}};
    std::vector<std::vector<std::vector<int>>> classes(static_cast<std::size_t>(rel.class_count));
    for (std::int64_t s = 0; s < static_cast<std::int64_t>(rel.stem_class.size()); ++s)
        classes[static_cast<std::size_t>(rel.stem_class[static_cast<std::size_t>(s)])].push_back(
            stem_path(rel.m, rel.depth, s));
    return {{"kind", "open"}, {"m", rel.m}, {"k", rel.depth}, {"classes", classes}};
}

} // namespace arbor
