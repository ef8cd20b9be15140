#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cgplan/cgraph.hpp"
#include "cgplan/rng.hpp"
#include "cgplan/scenes.hpp"
#include "oracles.hpp"

using namespace cgplan;
using namespace cgplan::geom;
using namespace cgplan::scenes;

namespace {

ContactGraphPlus table_scene() {
    ContactGraphPlus cg = base_scene();
    add_entity(cg, make_table("table", 1.2, 0.8, 0.72));
    place_on(cg, "scene", "table", 0, 1.0, 0.0, 0.0);
    cg.swap_id = "table";
    return cg;
}

Action pick(const std::string& parent, const std::string& child) {
    Action a;
    a.kind = ActionKind::pick;
    a.parent = parent;
    a.child = child;
    return a;
}

Action place(const std::string& parent, const std::string& child, double x, double y,
             double yaw = 0, int surface = 0) {
    Action a;
    a.kind = ActionKind::place;
    a.parent = parent;
    a.child = child;
    a.surface_index = surface;
    a.pose = PlanarPose{x, y, yaw, 3};
    return a;
}

Action toggle(ActionKind kind, const std::string& node) {
    Action a;
    a.kind = kind;
    a.child = node;
    return a;
}

}  // namespace

TEST_CASE("world_pose composition") {
    ContactGraphPlus cg = table_scene();
    CHECK(cg.world_pose("scene").isApprox(Transform::Identity()));

    add_entity(cg, make_box_entity("box", "box", {0.1, 0.1, 0.1}, 0.5, true));
    place_on(cg, "table", "box", 0, 0.1, 0.0, 0.0);
    const Vec3 t = cg.world_pose("box").translation();
    CHECK(t.x() == doctest::Approx(1.1).epsilon(1e-12));
    CHECK(t.y() == doctest::Approx(0.0));
    CHECK(t.z() == doctest::Approx(0.72).epsilon(1e-12));

    // three-deep chain equals the naive product of per-edge transforms
    add_entity(cg, make_box_entity("mid", "box", {0.06, 0.06, 0.05}, 0.2, true));
    place_on(cg, "box", "mid", 0, 0.01, -0.02, 0.3);
    add_entity(cg, make_box_entity("top", "box", {0.03, 0.03, 0.03}, 0.1, true));
    place_on(cg, "mid", "top", 0, -0.005, 0.004, 1.1);

    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    for (const char* id : {"table", "box", "mid", "top"}) {
        const auto* rel = cg.relation_of(id);
        m = m * relation_transform(cg.node(rel->parent), *rel, cg.node(id)).matrix();
    }
    CHECK((cg.world_pose("top").matrix() - m).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(cg.world_pose("ghost"), CgError);
}

TEST_CASE("check_stable centered cube and overhang") {
    ContactGraphPlus cg = table_scene();
    add_entity(cg, make_box_entity("cube", "box", {0.2, 0.2, 0.2}, 1.0, true));
    place_on(cg, "table", "cube", 0, 0.0, 0.0, 0.0);
    CHECK(check_stable(cg, *cg.relation_of("cube")));

    // 90% of the footprint hangs off the table edge (x beyond 0.6)
    place_on(cg, "table", "cube", 0, 0.6 + 0.08, 0.0, 0.0);
    CHECK_FALSE(check_stable(cg, *cg.relation_of("cube")));
}

TEST_CASE("check_stable randomized against the analytic oracle") {
    Rng rng(101);
    int done = 0;
    while (done < 100) {
        oracles::StackCase c;
        c.table_w = 1.2;
        c.table_d = 0.8;
        c.bw = rng.uniform(0.08, 0.3);
        c.bd = rng.uniform(0.08, 0.3);
        c.bx = rng.uniform(-0.75, 0.75);
        c.by = rng.uniform(-0.55, 0.55);
        c.bmass = rng.uniform(0.2, 2.0);
        c.has_top = rng.chance(0.5);
        if (c.has_top) {
            c.cx = rng.uniform(-0.3, 0.3);
            c.cy = rng.uniform(-0.3, 0.3);
            c.cmass = rng.uniform(0.2, 3.0);
        }
        if (std::abs(oracles::aabb_stack_margin(c)) < 1e-6) continue;  // tie, skip

        ContactGraphPlus cg = table_scene();
        add_entity(cg, make_box_entity("b", "box", {c.bw, c.bd, 0.1}, c.bmass, true));
        place_on(cg, "table", "b", 0, c.bx, c.by, 0.0);
        if (c.has_top) {
            add_entity(cg, make_box_entity("c", "box", {0.05, 0.05, 0.08}, c.cmass, true));
            place_on(cg, "b", "c", 0, c.cx, c.cy, 0.0);
        }
        CHECK(check_stable(cg, *cg.relation_of("b")) == oracles::aabb_stack_stable(c));
        ++done;
    }
}

TEST_CASE("top-heavy stack unstable while bottom alone is stable") {
    ContactGraphPlus cg = table_scene();
    add_entity(cg, make_box_entity("bottom", "box", {0.2, 0.2, 0.1}, 0.2, true));
    place_on(cg, "table", "bottom", 0, 0.5, 0.0, 0.0);  // near the +x edge (0.6)
    CHECK(check_stable(cg, *cg.relation_of("bottom")));

    // heavy top hanging toward the edge pushes the stack CoM past the overlap
    add_entity(cg, make_box_entity("heavy", "box", {0.05, 0.05, 0.05}, 5.0, true));
    place_on(cg, "bottom", "heavy", 0, 0.14, 0.0, 0.0);
    CHECK_FALSE(check_stable(cg, *cg.relation_of("bottom")));
    // oracle agrees
    oracles::StackCase c;
    c.table_w = 1.2;
    c.table_d = 0.8;
    c.bw = c.bd = 0.2;
    c.bx = 0.5;
    c.by = 0;
    c.bmass = 0.2;
    c.has_top = true;
    c.cx = 0.14;
    c.cy = 0;
    c.cmass = 5.0;
    CHECK_FALSE(oracles::aabb_stack_stable(c));
}

TEST_CASE("check_contain bbox gating") {
    ContactGraphPlus cg = table_scene();
    add_entity(cg, make_container("cab", "cabinet", 0.4, 0.3, 0.5, 0.02, Status::opened));
    place_on(cg, "scene", "cab", 0, 3.0, 0.0, 0.0);

    add_entity(cg, make_box_entity("small", "box", {0.2, 0.2, 0.2}, 0.5, true));
    place_on(cg, "cab", "small", 0, 0.0, 0.0, 0.0);
    CHECK(check_contain(cg, *cg.relation_of("small")));

    add_entity(cg, make_box_entity("tall", "box", {0.2, 0.2, 0.8}, 0.5, true));
    place_on(cg, "cab", "tall", 0, 0.05, 0.0, 0.0);
    cg.supports.erase("small");
    CHECK_FALSE(check_contain(cg, *cg.relation_of("tall")));
}

TEST_CASE("penetration set matches all-pairs brute force") {
    auto brute_force = [](const ContactGraphPlus& cg) {
        std::vector<std::pair<PrimitiveRef, PrimitiveRef>> out;
        for (auto ia = cg.nodes.begin(); ia != cg.nodes.end(); ++ia) {
            for (auto ib = std::next(ia); ib != cg.nodes.end(); ++ib) {
                const std::string&a = ia->first, &b = ib->first;
                if (a == cg.root_id || b == cg.root_id) continue;
                if (a == ContactGraphPlus::kGripperId || b == ContactGraphPlus::kGripperId)
                    continue;
                // supporting-chain contacts touch by construction; skip them
                if (cg.is_ancestor(a, b) || cg.is_ancestor(b, a)) continue;
                for (std::size_t pa = 0; pa < ia->second.geometry.size(); ++pa) {
                    for (std::size_t pb = 0; pb < ib->second.geometry.size(); ++pb) {
                        const double sd = geom::signed_distance3d(
                            ia->second.geometry[pa], cg.primitive_world(a, int(pa)),
                            ib->second.geometry[pb], cg.primitive_world(b, int(pb)));
                        if (sd <= 0.0)
                            out.push_back({{a, int(pa)}, {b, int(pb)}});
                    }
                }
            }
        }
        return out;
    };
    auto as_set = [](const std::vector<ViolationPair>& v) {
        std::vector<std::pair<PrimitiveRef, PrimitiveRef>> out;
        for (const auto& p : v) out.push_back({p.a, p.b});
        std::sort(out.begin(), out.end());
        return out;
    };

    ContactGraphPlus cg = dense_tabletop();
    CHECK(check_penetration_free(cg).empty());
    CHECK(brute_force(cg).empty());

    // slide one object onto another: both routes report the same violation
    place_on(cg, "table", "c", 0, -0.58, -0.3, 0.0);
    auto mine = as_set(check_penetration_free(cg));
    auto brute = brute_force(cg);
    std::sort(brute.begin(), brute.end());
    REQUIRE(mine.size() == 1);
    CHECK(mine == brute);

    // randomized jitters keep the two routes identical
    Rng rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        ContactGraphPlus jig = dense_tabletop();
        for (const char* id : {"a", "b", "c", "d", "e"}) {
            const auto* rel = jig.relation_of(id);
            place_on(jig, "table", id, 0, rel->pose.x + rng.uniform(-0.12, 0.12),
                     rel->pose.y + rng.uniform(-0.12, 0.12), 0.0);
        }
        auto got = as_set(check_penetration_free(jig));
        auto want = brute_force(jig);
        std::sort(want.begin(), want.end());
        CHECK(got == want);
    }
}

TEST_CASE("accessibility through contain chains") {
    ContactGraphPlus cg = table_scene();
    add_entity(cg, make_box_entity("cup", "cup", {0.05, 0.05, 0.05}, 0.1, true));
    place_on(cg, "table", "cup", 0, 0.0, 0.0, 0.0);
    CHECK(is_accessible(cg, "cup"));

    add_entity(cg, make_container("cab", "cabinet", 0.5, 0.4, 0.4, 0.02, Status::closed));
    place_on(cg, "scene", "cab", 0, 3.0, 0.0, 0.0);
    add_entity(cg, make_box_entity("hidden", "box", {0.1, 0.1, 0.1}, 0.2, true));
    place_on(cg, "cab", "hidden", 0, 0.0, 0.0, 0.0);
    CHECK_FALSE(is_accessible(cg, "hidden"));
    cg.node("cab").status = Status::opened;
    CHECK(is_accessible(cg, "hidden"));

    // object on TOP of a closed container stays reachable
    ContactGraphPlus cg2 = table_scene();
    add_entity(cg2, make_container("cab", "cabinet", 0.5, 0.4, 0.4, 0.02, Status::closed, true));
    place_on(cg2, "scene", "cab", 0, 3.0, 0.0, 0.0);
    add_entity(cg2, make_box_entity("ontop", "box", {0.1, 0.1, 0.1}, 0.2, true));
    place_on(cg2, "cab", "ontop", 1, 0.0, 0.0, 0.0);
    CHECK(is_accessible(cg2, "ontop"));
}

TEST_CASE("accessibility false for any closed ancestor up to depth 5") {
    Rng rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        ContactGraphPlus cg = base_scene();
        std::string parent = "scene";
        int parent_surface = 0;
        std::vector<bool> closed;
        double size = 1.4;
        for (int lvl = 0; lvl < 5; ++lvl) {
            const std::string id = "c" + std::to_string(lvl);
            const bool is_closed = rng.chance(0.5);
            closed.push_back(is_closed);
            add_entity(cg, make_container(id, "bin", size, size, size, 0.01,
                                          is_closed ? Status::closed : Status::opened));
            place_on(cg, parent, id, parent_surface, 0, 0, 0);
            parent = id;
            parent_surface = 0;
            size *= 0.8;
        }
        add_entity(cg, make_box_entity("leaf", "box", {0.05, 0.05, 0.05}, 0.1, true));
        place_on(cg, parent, "leaf", 0, 0, 0, 0);
        const bool any_closed = std::any_of(closed.begin(), closed.end(), [](bool b) { return b; });
        CHECK(is_accessible(cg, "leaf") == !any_closed);
    }
}

TEST_CASE("apply_action: pick/place round trip is the identity") {
    ContactGraphPlus cg = table_scene();
    add_entity(cg, make_box_entity("box", "box", {0.1, 0.1, 0.1}, 0.5, true));
    place_on(cg, "table", "box", 0, 0.2, -0.1, 0.4);

    const std::string before = state_digest(cg);
    ContactGraphPlus held = apply_action(cg, pick("table", "box"));
    CHECK(state_digest(cg) == before);  // purity
    CHECK(held.held_object() == "box");
    ContactGraphPlus back = apply_action(held, place("table", "box", 0.2, -0.1, 0.4));
    CHECK(state_digest(back) == before);
    CHECK(states_match(back, cg, 1e-12));
}

TEST_CASE("apply_action: open flips status and gates placement") {
    ContactGraphPlus cg = table_scene();
    add_entity(cg, make_container("cab", "cabinet", 0.5, 0.4, 0.4, 0.02, Status::closed));
    place_on(cg, "scene", "cab", 0, 3.0, 0.0, 0.0);
    add_entity(cg, make_box_entity("box", "box", {0.1, 0.1, 0.1}, 0.5, true));
    place_on(cg, "table", "box", 0, 0.0, 0.0, 0.0);

    ContactGraphPlus held = apply_action(cg, pick("table", "box"));
    CHECK_THROWS_WITH_AS(apply_action(held, place("cab", "box", 0, 0)),
                         doctest::Contains("closed"), CgError);

    ContactGraphPlus opened = apply_action(held, toggle(ActionKind::open, "cab"));
    CHECK(*opened.node("cab").status == Status::opened);
    ContactGraphPlus placed = apply_action(opened, place("cab", "box", 0, 0));
    CHECK(placed.parent_of("box") == "cab");
    CHECK(is_accessible(placed, "box"));

    ContactGraphPlus shut = apply_action(placed, toggle(ActionKind::close, "cab"));
    CHECK_FALSE(is_accessible(shut, "box"));
    CHECK_THROWS_AS(apply_action(shut, pick("cab", "box")), CgError);
    // open/close preconditions
    CHECK_THROWS_AS(apply_action(shut, toggle(ActionKind::close, "cab")), CgError);
    CHECK_THROWS_AS(apply_action(shut, toggle(ActionKind::open, "box")), CgError);
}

TEST_CASE("apply_action: leaf rule, holding capacity, subtree carry") {
    ContactGraphPlus cg = table_scene();
    add_entity(cg, make_box_entity("base", "box", {0.2, 0.2, 0.1}, 0.5, true));
    place_on(cg, "table", "base", 0, 0.0, 0.0, 0.0);
    add_entity(cg, make_box_entity("rider", "box", {0.05, 0.05, 0.05}, 0.1, true));
    place_on(cg, "base", "rider", 0, 0.0, 0.0, 0.0);

    CHECK_THROWS_WITH_AS(apply_action(cg, pick("table", "base")),
                         doctest::Contains("children"), CgError);
    Action carry = pick("table", "base");
    carry.carries_subtree = true;
    ContactGraphPlus held = apply_action(cg, carry);
    CHECK(held.parent_of("rider") == "base");  // rider moved along
    CHECK_THROWS_WITH_AS(apply_action(held, pick("base", "rider")),
                         doctest::Contains("holds"), CgError);

    // placement back onto the table keeps the subtree intact
    ContactGraphPlus down = apply_action(held, place("table", "base", 0.3, 0.2));
    CHECK(down.parent_of("rider") == "base");
    validate_graph(down);
    CHECK(validate_graph(down).ok());
}

TEST_CASE("validate_graph flags bad states and passes good ones") {
    ContactGraphPlus cg = table_scene();
    add_entity(cg, make_box_entity("a", "box", {0.1, 0.1, 0.1}, 0.3, true));
    place_on(cg, "table", "a", 0, 0.0, 0.0, 0.0);
    add_entity(cg, make_box_entity("b", "box", {0.1, 0.1, 0.1}, 0.3, true));
    place_on(cg, "table", "b", 0, 0.3, 0.0, 0.0);
    CHECK(validate_graph(cg).ok());

    place_on(cg, "table", "b", 0, 0.02, 0.0, 0.0);  // overlapping a
    const auto report = validate_graph(cg);
    REQUIRE_FALSE(report.ok());
    CHECK(report.violations.front().find("penetration") != std::string::npos);

    place_on(cg, "table", "b", 0, 0.64, 0.0, 0.0);  // mostly off the edge
    CHECK_FALSE(validate_graph(cg).ok());
}

TEST_CASE("tree property holds under random action sequences") {
    Rng rng(121);
    ContactGraphPlus cg = table_scene();
    add_entity(cg, make_box_entity("x", "box", {0.1, 0.1, 0.1}, 0.3, true));
    place_on(cg, "table", "x", 0, -0.3, 0.0, 0.0);
    add_entity(cg, make_box_entity("y", "box", {0.12, 0.12, 0.06}, 0.3, true));
    place_on(cg, "table", "y", 0, 0.0, 0.2, 0.0);
    add_entity(cg, make_box_entity("z", "box", {0.08, 0.08, 0.08}, 0.2, true));
    place_on(cg, "table", "z", 0, 0.35, -0.2, 0.0);

    int applied = 0;
    for (int step = 0; step < 400; ++step) {
        const char* ids[] = {"x", "y", "z"};
        const std::string obj = ids[rng.uniform_int(3)];
        Action a;
        if (cg.held_object().empty()) {
            a = pick(cg.parent_of(obj), obj);
        } else {
            const char* targets[] = {"table", "x", "y", "z"};
            a = place(targets[rng.uniform_int(4)], cg.held_object(), rng.uniform(-0.3, 0.3),
                      rng.uniform(-0.2, 0.2));
        }
        try {
            cg = apply_action(cg, a);  // integrity-checked inside
            ++applied;
        } catch (const CgError&) {
        }
    }
    CHECK(applied > 50);
    cg.check_integrity();
    // every non-root node has exactly one parent by construction of `supports`
    for (const auto& [id, n] : cg.nodes) {
        (void)n;
        if (id != cg.root_id) CHECK(cg.relation_of(id) != nullptr);
    }
}
