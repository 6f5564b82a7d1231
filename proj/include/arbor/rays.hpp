#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "arbor/errors.hpp"

namespace arbor {

// Vertices of T_m' at depth d, indexed lexicographically by child path.
// The root has children 0..m, every other vertex has children 0..m-1, so a
// depth-k stem is an integer sequence (i_0, i_1, ..., i_{k-1}) with
// i_0 in [0,m] and the rest in [0,m-1].
std::int64_t stems_at_depth(int m, int k);
std::int64_t stem_index(int m, std::span<const int> path);
std::vector<int> stem_path(int m, int k, std::int64_t index);

// Boundary condition as an equivalence relation on rays: either free
// (singleton classes) or open, i.e. determined by a partition of the
// depth-k stems. Open relations are closed, hence measurable.
struct RayRelation {
    enum class Kind { free, open };
    Kind kind = Kind::free;
    int m = 0;                   // open only
    int depth = 0;               // k, open only
    std::vector<int> stem_class; // class id per depth-k stem, canonical order
    int class_count = 0;

    bool is_free() const noexcept { return kind == Kind::free; }
    bool is_open() const noexcept { return kind == Kind::open; }
    bool is_wired() const noexcept { return is_open() && class_count == 1; }

    bool operator==(const RayRelation&) const = default;
};

RayRelation free_relation();
RayRelation wired_relation(int m);

// Partition of the depth-k stems; class ids are renumbered canonically by
// first occurrence in stem order.
RayRelation open_relation(int m, int k, std::vector<int> stem_class);

// Relation whose classes are the ray cones through the members of the cutset
// W (vertices given as child paths; {root} yields the wired relation).
// Verifies that W is incomparable and meets every ray.
RayRelation cutset_relation(const std::vector<std::vector<int>>& w, int m);

// Partial order on boundary conditions: true iff every a-class is contained
// in a b-class after refining both to a common depth. The free relation is
// minimal.
bool relation_leq(const RayRelation& a, const RayRelation& b);

// Class id for each vertex of the depth-n boundary of Lambda_n (vertices in
// lexicographic order). Open relations require n >= k; the free relation
// maps every boundary vertex to its own class.
std::vector<int> boundary_identification(const RayRelation& rel, int n, int m);

// All relation classes whose stems pass through the given depth-n boundary
// vertex; a single class when n >= k, possibly several when n < k.
std::vector<int> classes_in_cone(const RayRelation& rel, int n, std::int64_t boundary_index);

// Box coarsening: the lowest equivalence relation on depth-n cones that
// relates two cones containing equivalent rays. Unchanged when n >= k.
RayRelation coarsen_to_box(const RayRelation& rel, int n);

RayRelation relation_from_json(const nlohmann::json& j, int m);
nlohmann::json relation_to_json(const RayRelation& rel);

} // namespace arbor
