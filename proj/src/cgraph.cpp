#include "cgplan/cgraph.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <deque>

#include "cgplan/parallel.hpp"

namespace cgplan {

using geom::Region2D;
using geom::Transform;
using geom::Vec2;
using geom::Vec3;

const char* to_string(SurfaceType t) {
    switch (t) {
        case SurfaceType::none: return "none";
        case SurfaceType::support: return "support";
        case SurfaceType::contain: return "contain";
    }
    return "?";
}

const char* to_string(Status s) { return s == Status::closed ? "closed" : "opened"; }

const char* to_string(ActionKind k) {
    switch (k) {
        case ActionKind::pick: return "pick";
        case ActionKind::place: return "place";
        case ActionKind::open: return "open";
        case ActionKind::close: return "close";
    }
    return "?";
}

std::vector<Eigen::Quaterniond> SceneEntityNode::rest_orientations() const {
    std::vector<Eigen::Quaterniond> out{Eigen::Quaterniond::Identity()};
    if (geometry.size() != 1) return out;
    const auto kind = geometry.front().kind;
    const Eigen::Quaterniond rx90(Eigen::AngleAxisd(M_PI / 2, Vec3::UnitX()));
    const Eigen::Quaterniond rx180(Eigen::AngleAxisd(M_PI, Vec3::UnitX()));
    const Eigen::Quaterniond ry90(Eigen::AngleAxisd(M_PI / 2, Vec3::UnitY()));
    if (kind == geom::PrimitiveKind::box) {
        out.push_back(rx90);
        out.push_back(ry90);
        out.push_back(rx180);
    } else if (kind == geom::PrimitiveKind::cylinder) {
        out.push_back(rx90);  // lying flat
    }
    return out;
}

std::vector<Vec3> SceneEntityNode::hull_points() const {
    std::vector<Vec3> pts;
    for (const auto& prim : geometry) {
        for (const Vec3& p : prim.hull_points_local()) pts.push_back(prim.local_pose * p);
    }
    return pts;
}

const SceneEntityNode& ContactGraphPlus::node(const std::string& id) const {
    auto it = nodes.find(id);
    if (it == nodes.end()) throw CgError(ErrorCode::graph_integrity, "unknown node: " + id);
    return it->second;
}

SceneEntityNode& ContactGraphPlus::node(const std::string& id) {
    auto it = nodes.find(id);
    if (it == nodes.end()) throw CgError(ErrorCode::graph_integrity, "unknown node: " + id);
    return it->second;
}

const SupportingRelation* ContactGraphPlus::relation_of(const std::string& child) const {
    auto it = supports.find(child);
    return it == supports.end() ? nullptr : &it->second;
}

std::string ContactGraphPlus::parent_of(const std::string& child) const {
    const auto* rel = relation_of(child);
    return rel ? rel->parent : std::string();
}

std::vector<std::string> ContactGraphPlus::children_of(const std::string& parent) const {
    std::vector<std::string> out;
    for (const auto& [child, rel] : supports) {
        if (rel.parent == parent) out.push_back(child);
    }
    return out;
}

std::vector<std::string> ContactGraphPlus::subtree(const std::string& id) const {
    std::vector<std::string> out;
    std::deque<std::string> queue{id};
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        out.push_back(cur);
        for (const std::string& c : children_of(cur)) queue.push_back(c);
    }
    return out;
}

bool ContactGraphPlus::is_ancestor(const std::string& anc, const std::string& n) const {
    std::string cur = parent_of(n);
    while (!cur.empty()) {
        if (cur == anc) return true;
        cur = parent_of(cur);
    }
    return false;
}

std::string ContactGraphPlus::held_object() const {
    if (!has_node(kGripperId)) return {};
    const auto held = children_of(kGripperId);
    return held.empty() ? std::string() : held.front();
}

void ContactGraphPlus::check_integrity() const {
    if (!has_node(root_id)) throw CgError(ErrorCode::graph_integrity, "missing root node");
    for (const auto& [id, n] : nodes) {
        if (id != n.id) throw CgError(ErrorCode::graph_integrity, "node key/id mismatch: " + id);
        if (id == root_id) {
            if (supports.count(id))
                throw CgError(ErrorCode::graph_integrity, "root must not have a parent");
            continue;
        }
        const auto* rel = relation_of(id);
        if (!rel) throw CgError(ErrorCode::graph_integrity, "detached node: " + id);
        if (!has_node(rel->parent))
            throw CgError(ErrorCode::graph_integrity, "relation parent missing: " + rel->parent);
        const auto& parent = node(rel->parent);
        if (rel->surface_index < 0 || rel->surface_index >= static_cast<int>(parent.surfaces.size()))
            throw CgError(ErrorCode::graph_integrity, "surface index out of range on " + rel->parent);
        if (parent.surfaces[rel->surface_index].type == SurfaceType::none)
            throw CgError(ErrorCode::graph_integrity,
                          "relation uses a none-type surface on " + rel->parent);
        if (rel->orientation < 0 ||
            rel->orientation >= static_cast<int>(node(id).rest_orientations().size()))
            throw CgError(ErrorCode::graph_integrity, "orientation index out of range on " + id);
        // cycle check: walk to root
        std::string cur = id;
        std::size_t steps = 0;
        while (cur != root_id) {
            const auto* r = relation_of(cur);
            if (!r || ++steps > nodes.size())
                throw CgError(ErrorCode::graph_integrity, "cycle or detachment at " + id);
            cur = r->parent;
        }
    }
    for (const auto& pr : proximal) {
        if (pr.a.node == pr.b.node)
            throw CgError(ErrorCode::graph_integrity, "proximal pair within one node");
        for (const auto& ref : {pr.a, pr.b}) {
            if (!has_node(ref.node) ||
                ref.prim >= static_cast<int>(node(ref.node).geometry.size()) || ref.prim < 0)
                throw CgError(ErrorCode::graph_integrity, "bad proximal reference: " + ref.node);
        }
    }
}

Transform relation_transform(const SceneEntityNode& parent, const SupportingRelation& rel,
                             const SceneEntityNode& child) {
    const auto& surf = parent.surfaces.at(rel.surface_index);
    const Eigen::Quaterniond seat = child.rest_orientations().at(rel.orientation);
    double min_z = 0.0;
    bool first = true;
    for (const Vec3& p : child.hull_points()) {
        const double z = (seat * p).z();
        if (first || z < min_z) {
            min_z = z;
            first = false;
        }
    }
    Transform t = Transform::Identity();
    t.translation() = Vec3(rel.pose.x, rel.pose.y, first ? 0.0 : -min_z);
    t.linear() = (Eigen::AngleAxisd(rel.pose.yaw, Vec3::UnitZ()) * seat).toRotationMatrix();
    return surf.region.frame * t;
}

Transform ContactGraphPlus::world_pose(const std::string& id) const {
    if (id == root_id) return Transform::Identity();
    const auto* rel = relation_of(id);
    if (!rel) throw CgError(ErrorCode::graph_integrity, "detached node: " + id);
    return world_pose(rel->parent) * relation_transform(node(rel->parent), *rel, node(id));
}

Transform ContactGraphPlus::primitive_world(const std::string& id, int prim) const {
    const auto& n = node(id);
    const auto& p = n.geometry.at(prim);
    const bool opened = n.status && *n.status == Status::opened && p.open_pose.has_value();
    return world_pose(id) * (opened ? *p.open_pose : p.local_pose);
}

std::vector<Vec2> ContactGraphPlus::footprint_on_surface(const std::string& id) const {
    const auto* rel = relation_of(id);
    if (!rel) throw CgError(ErrorCode::graph_integrity, "no relation for: " + id);
    const auto& child = node(id);
    const Eigen::Quaterniond seat = child.rest_orientations().at(rel->orientation);
    const Eigen::Quaterniond spin(Eigen::AngleAxisd(rel->pose.yaw, Vec3::UnitZ()));
    std::vector<Vec2> pts;
    for (const Vec3& p : child.hull_points()) {
        const Vec3 q = spin * (seat * p);
        pts.emplace_back(q.x() + rel->pose.x, q.y() + rel->pose.y);
    }
    return geom::convex_hull_2d(pts);
}

geom::OrientedBox ContactGraphPlus::world_bbox(const std::string& id) const {
    const auto& n = node(id);
    geom::OrientedBox out = n.bbox;
    out.pose = world_pose(id) * n.bbox.pose;
    return out;
}

// ---------------------------------------------------------------------------
// Eq.-level checks
// ---------------------------------------------------------------------------

namespace {

bool surface_points_up(const ContactGraphPlus& cg, const std::string& parent_id, int surface) {
    const Transform w = cg.world_pose(parent_id);
    const Vec3 n =
        (w.linear() * cg.node(parent_id).surfaces.at(surface).region.frame.linear()).col(2);
    return n.normalized().dot(Vec3::UnitZ()) >= std::cos(geom::kUpAxisTolRad);
}

std::optional<Region2D> relation_overlap(const ContactGraphPlus& cg,
                                         const SupportingRelation& rel) {
    const auto& parent = cg.node(rel.parent);
    const auto& surf = parent.surfaces.at(rel.surface_index);
    Region2D world_surface;
    world_surface.frame = cg.world_pose(rel.parent) * surf.region.frame;
    world_surface.boundary = surf.region.boundary;

    Region2D footprint;
    footprint.frame = world_surface.frame;
    footprint.boundary = cg.footprint_on_surface(rel.child);
    return geom::overlap_region(world_surface, footprint);
}

}  // namespace

bool check_stable(const ContactGraphPlus& cg, const SupportingRelation& rel) {
    if (!surface_points_up(cg, rel.parent, rel.surface_index)) return false;
    const auto overlap = relation_overlap(cg, rel);
    if (!overlap) return false;  // no contact

    std::vector<geom::PlacedPrimitive> bodies;
    for (const std::string& id : cg.subtree(rel.child)) {
        const auto& n = cg.node(id);
        for (std::size_t i = 0; i < n.geometry.size(); ++i) {
            bodies.push_back({&n.geometry[i], cg.primitive_world(id, static_cast<int>(i))});
        }
    }
    if (bodies.empty()) return false;
    const Vec2 com = geom::project_com(bodies, overlap->frame);
    return geom::sdf2d_eval(*overlap, com) < 0.0;
}

bool check_contain(const ContactGraphPlus& cg, const SupportingRelation& rel) {
    if (!check_stable(cg, rel)) return false;
    const geom::OrientedBox parent_box = cg.world_bbox(rel.parent);
    std::vector<geom::OrientedBox> child_boxes;
    for (const std::string& id : cg.subtree(rel.child)) child_boxes.push_back(cg.world_bbox(id));
    return geom::union_bbox_contained(parent_box, child_boxes);
}

std::vector<ViolationPair> check_penetration_free(const ContactGraphPlus& cg) {
    // collision set: sibling primitives under the same parent surface, plus
    // declared proximal pairs; gripper cargo is in transit and exempt
    const std::string held = cg.held_object();
    auto in_transit = [&](const std::string& id) {
        return !held.empty() && (id == held || cg.is_ancestor(held, id));
    };

    std::vector<std::pair<PrimitiveRef, PrimitiveRef>> pairs;
    std::map<std::pair<std::string, int>, std::vector<std::string>> groups;
    for (const auto& [child, rel] : cg.supports) {
        if (rel.parent == ContactGraphPlus::kGripperId) continue;
        groups[{rel.parent, rel.surface_index}].push_back(child);
    }
    for (const auto& [key, members] : groups) {
        (void)key;
        for (std::size_t i = 0; i < members.size(); ++i) {
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                const auto& na = cg.node(members[i]);
                const auto& nb = cg.node(members[j]);
                for (std::size_t pa = 0; pa < na.geometry.size(); ++pa)
                    for (std::size_t pb = 0; pb < nb.geometry.size(); ++pb)
                        pairs.push_back({{members[i], static_cast<int>(pa)},
                                         {members[j], static_cast<int>(pb)}});
            }
        }
    }
    for (const auto& pr : cg.proximal) {
        if (in_transit(pr.a.node) || in_transit(pr.b.node)) continue;
        pairs.push_back({pr.a, pr.b});
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    std::vector<double> sd(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t i) {
        const auto& [ra, rb] = pairs[i];
        sd[i] = geom::signed_distance3d(cg.node(ra.node).geometry[ra.prim],
                                        cg.primitive_world(ra.node, ra.prim),
                                        cg.node(rb.node).geometry[rb.prim],
                                        cg.primitive_world(rb.node, rb.prim));
    });
    std::vector<ViolationPair> out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (sd[i] <= 0.0) out.push_back({pairs[i].first, pairs[i].second, sd[i]});
    }
    return out;
}

bool is_accessible(const ContactGraphPlus& cg, const std::string& id) {
    std::string cur = id;
    while (true) {
        const auto* rel = cg.relation_of(cur);
        if (!rel) return true;  // reached the root
        const auto& parent = cg.node(rel->parent);
        if (parent.surfaces.at(rel->surface_index).type == SurfaceType::contain &&
            parent.status && *parent.status == Status::closed)
            return false;
        cur = rel->parent;
    }
}

ValidationReport validate_graph(const ContactGraphPlus& cg) {
    ValidationReport report;
    try {
        cg.check_integrity();
    } catch (const CgError& e) {
        report.violations.push_back(std::string("integrity: ") + e.what());
        return report;
    }
    for (const auto& [child, rel] : cg.supports) {
        if (rel.parent == ContactGraphPlus::kGripperId) continue;  // in transit
        if (!surface_points_up(cg, rel.parent, rel.surface_index)) {
            report.violations.push_back("surface not perpendicular to gravity under " + child);
            continue;
        }
        if (!check_stable(cg, rel)) {
            report.violations.push_back("unstable support: " + rel.parent + " -> " + child);
        } else if (cg.node(rel.parent).surfaces.at(rel.surface_index).type ==
                       SurfaceType::contain &&
                   !check_contain(cg, rel)) {
            report.violations.push_back("containment violated: " + rel.parent + " -> " + child);
        }
    }
    for (const auto& v : check_penetration_free(cg)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "penetration: %s[%d] vs %s[%d] sd=%.6g", v.a.node.c_str(),
                      v.a.prim, v.b.node.c_str(), v.b.prim, v.sd);
        report.violations.push_back(buf);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void precondition_failed(const Action& a, const std::string& clause) {
    throw CgError(ErrorCode::action_precondition,
                  std::string(to_string(a.kind)) + "(" + a.parent +
                      (a.parent.empty() ? "" : ",") + a.child + "): " + clause);
}

}  // namespace

ContactGraphPlus apply_action(const ContactGraphPlus& cg, const Action& action) {
    ContactGraphPlus out = cg;
    switch (action.kind) {
        case ActionKind::pick: {
            if (!out.has_node(ContactGraphPlus::kGripperId))
                throw CgError(ErrorCode::graph_integrity, "graph has no gripper node");
            const auto* rel = out.relation_of(action.child);
            if (!rel) precondition_failed(action, "object has no supporting relation");
            if (rel->parent != action.parent)
                precondition_failed(action, "object is not supported by " + action.parent);
            if (!is_accessible(out, action.child))
                precondition_failed(action, "object is inside a closed container");
            if (!out.held_object().empty())
                precondition_failed(action, "gripper already holds " + out.held_object());
            if (!action.carries_subtree && !out.children_of(action.child).empty())
                precondition_failed(action, "object still supports children");
            SupportingRelation grip;
            grip.parent = ContactGraphPlus::kGripperId;
            grip.child = action.child;
            grip.surface_index = 0;
            grip.pose = PlanarPose{0.0, 0.0, 0.0, 3};
            grip.orientation = rel->orientation;
            out.supports.erase(action.child);
            out.supports[action.child] = grip;
            break;
        }
        case ActionKind::place: {
            if (out.held_object() != action.child)
                precondition_failed(action, "object is not held");
            if (!out.has_node(action.parent))
                precondition_failed(action, "unknown target " + action.parent);
            const auto& parent = out.node(action.parent);
            if (action.surface_index < 0 ||
                action.surface_index >= static_cast<int>(parent.surfaces.size()))
                precondition_failed(action, "target surface out of range");
            const auto& surf = parent.surfaces[action.surface_index];
            if (surf.type == SurfaceType::none)
                precondition_failed(action, "target surface cannot support");
            if (!is_accessible(out, action.parent))
                precondition_failed(action, "target is inside a closed container");
            if (surf.type == SurfaceType::contain && parent.status &&
                *parent.status == Status::closed)
                precondition_failed(action, "target container is closed");
            if (action.parent == action.child || out.is_ancestor(action.child, action.parent))
                precondition_failed(action, "target lies inside the held subtree");
            SupportingRelation rel;
            rel.parent = action.parent;
            rel.child = action.child;
            rel.surface_index = action.surface_index;
            rel.pose = action.pose;
            rel.orientation = action.orientation;
            if (rel.orientation < 0 ||
                rel.orientation >=
                    static_cast<int>(out.node(action.child).rest_orientations().size()))
                precondition_failed(action, "orientation index out of range");
            out.supports.erase(action.child);
            out.supports[action.child] = rel;
            break;
        }
        case ActionKind::open:
        case ActionKind::close: {
            if (!out.has_node(action.child))
                precondition_failed(action, "unknown node " + action.child);
            auto& n = out.node(action.child);
            if (!n.status) precondition_failed(action, "node has no status attribute");
            const Status want = action.kind == ActionKind::open ? Status::opened : Status::closed;
            if (*n.status == want)
                precondition_failed(action, std::string("already ") + to_string(want));
            if (!is_accessible(out, action.child))
                precondition_failed(action, "node is inside a closed container");
            n.status = want;
            break;
        }
    }
    out.check_integrity();
    return out;
}

// ---------------------------------------------------------------------------
// Digests
// ---------------------------------------------------------------------------

namespace {

void fnv(std::uint64_t& h, const std::string& s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
}

}  // namespace

std::string state_digest(const ContactGraphPlus& cg) {
    std::uint64_t h = 1469598103934665603ULL;
    char buf[256];
    for (const auto& [id, n] : cg.nodes) {
        fnv(h, id);
        if (n.status) fnv(h, to_string(*n.status));
        const auto* rel = cg.relation_of(id);
        if (rel) {
            std::snprintf(buf, sizeof buf, "|%s#%d@%d(%.12e,%.12e,%.12e)", rel->parent.c_str(),
                          rel->surface_index, rel->orientation, rel->pose.x, rel->pose.y,
                          rel->pose.yaw);
            fnv(h, buf);
        }
    }
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

bool states_match(const ContactGraphPlus& a, const ContactGraphPlus& b, double pose_tol) {
    if (a.nodes.size() != b.nodes.size()) return false;
    for (const auto& [id, na] : a.nodes) {
        if (!b.has_node(id)) return false;
        const auto& nb = b.node(id);
        if (na.status.has_value() != nb.status.has_value()) return false;
        if (na.status && *na.status != *nb.status) return false;
        const auto* ra = a.relation_of(id);
        const auto* rb = b.relation_of(id);
        if ((ra == nullptr) != (rb == nullptr)) return false;
        if (!ra) continue;
        if (ra->parent != rb->parent || ra->surface_index != rb->surface_index ||
            ra->orientation != rb->orientation)
            return false;
        double dyaw = std::remainder(ra->pose.yaw - rb->pose.yaw, 2.0 * M_PI);
        if (std::abs(ra->pose.x - rb->pose.x) > pose_tol ||
            std::abs(ra->pose.y - rb->pose.y) > pose_tol || std::abs(dyaw) > pose_tol)
            return false;
    }
    return true;
}

}  // namespace cgplan
