#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cgplan/geom.hpp"

namespace cgplan {

enum class SurfaceType { none, support, contain };
enum class Status { closed, opened };

const char* to_string(SurfaceType t);
const char* to_string(Status s);

// A surface an object offers for placement, in the owning node's frame.
struct SurfaceSpec {
    geom::Region2D region;
    SurfaceType type = SurfaceType::support;
};

struct SceneEntityNode {
    std::string id;           // unique instance token
    std::string label;        // semantic label
    bool movable = true;
    std::vector<geom::GeometryPrimitive> geometry;
    geom::OrientedBox bbox;   // in node frame; encloses all primitives
    std::vector<SurfaceSpec> surfaces;       // supporting attribute
    std::optional<Status> status;            // status attribute (containers)

    // Discrete resting orientations a child of this shape may assume on a
    // surface (identity first). Derived from the primitive kinds.
    std::vector<Eigen::Quaterniond> rest_orientations() const;
    // Hull points of all primitives, node frame, closed-status placement.
    std::vector<geom::Vec3> hull_points() const;
};

// Planar pose of a child in its parent-surface frame: x, y (m), yaw (rad).
// `dof` is the number of free leading components (0 = fixed snap pose).
struct PlanarPose {
    double x = 0.0, y = 0.0, yaw = 0.0;
    int dof = 3;
};

struct SupportingRelation {
    std::string parent;
    std::string child;
    int surface_index = 0;
    PlanarPose pose;
    int orientation = 0;   // index into the child's rest_orientations()
    bool posed = true;     // false in rough goals where the pose is left open
};

struct PrimitiveRef {
    std::string node;
    int prim = 0;
    bool operator<(const PrimitiveRef& o) const {
        return node < o.node || (node == o.node && prim < o.prim);
    }
    bool operator==(const PrimitiveRef& o) const { return node == o.node && prim == o.prim; }
};

struct ProximalRelation {
    PrimitiveRef a, b;
};

struct ViolationPair {
    PrimitiveRef a, b;
    double sd = 0.0;
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

enum class ActionKind { pick, place, open, close };

const char* to_string(ActionKind k);

struct Action {
    int id = 0;
    ActionKind kind = ActionKind::pick;
    std::string parent;  // pick/place; empty for open/close
    std::string child;   // pick/place: object; open/close: the container
    int surface_index = 0;
    PlanarPose pose;     // place target
    int orientation = 0;
    bool carries_subtree = false;
};

// The cg+ state: a rooted parse tree of supporting relations, proximal edges
// and per-node attributes. Value semantics; operations return new graphs.
class ContactGraphPlus {
public:
    static constexpr const char* kGripperId = "gripper";
    static constexpr int kGripperDockSurface = 1;  // root surface the gripper parks on

    std::string root_id = "scene";
    std::string swap_id;
    std::map<std::string, SceneEntityNode> nodes;
    std::map<std::string, SupportingRelation> supports;  // keyed by child id
    std::vector<ProximalRelation> proximal;

    const SceneEntityNode& node(const std::string& id) const;
    SceneEntityNode& node(const std::string& id);
    bool has_node(const std::string& id) const { return nodes.count(id) > 0; }
    const SupportingRelation* relation_of(const std::string& child) const;
    std::string parent_of(const std::string& child) const;
    std::vector<std::string> children_of(const std::string& parent) const;
    std::vector<std::string> subtree(const std::string& id) const;  // includes id
    bool is_ancestor(const std::string& anc, const std::string& node) const;
    std::string held_object() const;  // "" when the gripper is empty

    // Structural invariants: rooted tree, referenced surfaces usable, ids valid.
    void check_integrity() const;

    geom::Transform world_pose(const std::string& id) const;
    geom::Transform primitive_world(const std::string& id, int prim) const;

    // Footprint of `id`'s subtree-root body in its parent-surface plane coords
    // (seat orientation applied, before the planar offset).
    std::vector<geom::Vec2> footprint_on_surface(const std::string& id) const;
    geom::OrientedBox world_bbox(const std::string& id) const;
};

// Pose of a child relative to its parent node frame implied by a relation:
// surface frame ∘ planar offset ∘ yaw ∘ seat orientation ∘ seat lift.
geom::Transform relation_transform(const SceneEntityNode& parent, const SupportingRelation& rel,
                                   const SceneEntityNode& child);

// Eq.-level checks ------------------------------------------------------------

// Stable support: the subtree's projected CoM lies strictly inside the convex
// hull of the parent-surface/child-footprint overlap.
bool check_stable(const ContactGraphPlus& cg, const SupportingRelation& rel);

// Containment: stability plus the parent bbox enclosing every subtree bbox.
bool check_contain(const ContactGraphPlus& cg, const SupportingRelation& rel);

// All primitive pairs in the collision set (same-parent-surface siblings plus
// declared proximal pairs) with sd <= 0.
std::vector<ViolationPair> check_penetration_free(const ContactGraphPlus& cg);

// False iff some ancestor contain-type edge is gated by a closed container.
bool is_accessible(const ContactGraphPlus& cg, const std::string& id);

// Full-state validation: integrity + the three checks over every relation.
// Gripper-held subtrees are exempt from support checks while in transit.
ValidationReport validate_graph(const ContactGraphPlus& cg);

// Action application (pure; returns the successor state).
// Throws action_precondition errors naming the failing clause.
ContactGraphPlus apply_action(const ContactGraphPlus& cg, const Action& action);

// Canonical digest of the structural + metric state (relations, poses rounded
// at 1e-12, statuses); used for plan replay checks and memoization.
std::string state_digest(const ContactGraphPlus& cg);

// True when the two states have identical structure, statuses, and poses
// within `pose_tol`.
bool states_match(const ContactGraphPlus& a, const ContactGraphPlus& b, double pose_tol);

}  // namespace cgplan
