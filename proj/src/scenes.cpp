#include "cgplan/scenes.hpp"

#include <cmath>

#include "cgplan/rng.hpp"

namespace cgplan::scenes {

using geom::GeometryPrimitive;
using geom::PrimitiveKind;
using geom::Region2D;
using geom::Transform;
using geom::Vec2;
using geom::Vec3;

Region2D rect_region(double w, double d, double z, double cx, double cy) {
    Region2D r;
    r.frame = geom::make_transform({cx, cy, z}, Vec3::Zero());
    const double hw = 0.5 * w, hd = 0.5 * d;
    r.boundary = {{-hw, -hd}, {hw, -hd}, {hw, hd}, {-hw, hd}};
    return r;
}

Region2D circle_region(double radius, double z) {
    Region2D r;
    r.frame = geom::make_transform({0, 0, z}, Vec3::Zero());
    constexpr int kRing = 64;
    for (int i = 0; i < kRing; ++i) {
        const double a = 2.0 * M_PI * i / kRing;
        r.boundary.emplace_back(radius * std::cos(a), radius * std::sin(a));
    }
    return r;
}

namespace {

GeometryPrimitive box_prim(const Vec3& dims, double mass, const Transform& pose) {
    GeometryPrimitive p;
    p.kind = PrimitiveKind::box;
    p.dims = dims;
    p.mass = mass;
    p.local_pose = pose;
    return p;
}

void finalize(SceneEntityNode& n) {
    for (auto& p : n.geometry) p.validate();
    n.bbox = geom::bounding_box_of(n.hull_points());
}

}  // namespace

ContactGraphPlus base_scene() {
    ContactGraphPlus cg;
    cg.root_id = "scene";

    SceneEntityNode root;
    root.id = "scene";
    root.label = "scene";
    root.movable = false;
    root.bbox.half_extents = Vec3(500, 500, 500);
    root.surfaces.push_back({rect_region(100.0, 100.0, 0.0), SurfaceType::support});
    Region2D dock = rect_region(0.6, 0.6, 1.5);
    root.surfaces.push_back({dock, SurfaceType::support});
    cg.nodes[root.id] = root;

    SceneEntityNode grip;
    grip.id = ContactGraphPlus::kGripperId;
    grip.label = "gripper";
    grip.movable = false;
    grip.geometry.push_back(box_prim({0.05, 0.05, 0.05}, 0.1, Transform::Identity()));
    grip.surfaces.push_back({rect_region(0.5, 0.5, 0.025), SurfaceType::support});
    finalize(grip);
    cg.nodes[grip.id] = grip;

    SupportingRelation rel;
    rel.parent = "scene";
    rel.child = grip.id;
    rel.surface_index = ContactGraphPlus::kGripperDockSurface;
    cg.supports[grip.id] = rel;
    return cg;
}

SceneEntityNode make_box_entity(const std::string& id, const std::string& label,
                                const Vec3& dims, double mass, bool movable, bool top_surface) {
    SceneEntityNode n;
    n.id = id;
    n.label = label;
    n.movable = movable;
    n.geometry.push_back(box_prim(dims, mass, geom::make_transform({0, 0, dims.z() / 2}, Vec3::Zero())));
    if (top_surface)
        n.surfaces.push_back({rect_region(dims.x(), dims.y(), dims.z()), SurfaceType::support});
    finalize(n);
    return n;
}

SceneEntityNode make_cylinder_entity(const std::string& id, const std::string& label,
                                     double radius, double height, double mass, bool movable,
                                     bool top_surface) {
    SceneEntityNode n;
    n.id = id;
    n.label = label;
    n.movable = movable;
    GeometryPrimitive p;
    p.kind = PrimitiveKind::cylinder;
    p.dims = Vec3(radius, height, 0);
    p.mass = mass;
    p.local_pose = geom::make_transform({0, 0, height / 2}, Vec3::Zero());
    n.geometry.push_back(p);
    if (top_surface) n.surfaces.push_back({circle_region(radius, height), SurfaceType::support});
    finalize(n);
    return n;
}

SceneEntityNode make_disk_entity(const std::string& id, const std::string& label, double radius,
                                 double thickness, double mass) {
    SceneEntityNode n;
    n.id = id;
    n.label = label;
    n.movable = true;
    GeometryPrimitive p;
    p.kind = PrimitiveKind::disk;
    p.dims = Vec3(radius, thickness, 0);
    p.mass = mass;
    p.local_pose = geom::make_transform({0, 0, thickness / 2}, Vec3::Zero());
    n.geometry.push_back(p);
    // a disk offers its top (and implicitly bottom, by flipping) for support
    n.surfaces.push_back({circle_region(radius, thickness), SurfaceType::support});
    finalize(n);
    return n;
}

SceneEntityNode make_cone_entity(const std::string& id, const std::string& label, double radius,
                                 double height, double mass) {
    SceneEntityNode n;
    n.id = id;
    n.label = label;
    n.movable = true;
    GeometryPrimitive p;
    p.kind = PrimitiveKind::cone;
    p.dims = Vec3(radius, height, 0);
    p.mass = mass;
    n.geometry.push_back(p);
    // cones support nothing: no surfaces
    finalize(n);
    return n;
}

SceneEntityNode make_table(const std::string& id, double w, double d, double height) {
    SceneEntityNode n = make_box_entity(id, "table", {w, d, height}, 30.0, false, true);
    return n;
}

SceneEntityNode make_container(const std::string& id, const std::string& label, double w,
                               double d, double h, double wall, Status status, bool with_top,
                               bool open_top) {
    SceneEntityNode n;
    n.id = id;
    n.label = label;
    n.movable = false;
    n.status = status;
    const double ow = w + 2 * wall, od = d + 2 * wall;
    // floor slab
    n.geometry.push_back(box_prim({ow, od, wall}, 4.0, geom::make_transform({0, 0, wall / 2}, Vec3::Zero())));
    // side walls
    n.geometry.push_back(box_prim({wall, od, h}, 2.0,
                                  geom::make_transform({-(w + wall) / 2, 0, wall + h / 2}, Vec3::Zero())));
    n.geometry.push_back(box_prim({wall, od, h}, 2.0,
                                  geom::make_transform({(w + wall) / 2, 0, wall + h / 2}, Vec3::Zero())));
    // back wall
    n.geometry.push_back(box_prim({w, wall, h}, 2.0,
                                  geom::make_transform({0, (d + wall) / 2, wall + h / 2}, Vec3::Zero())));
    // abstracted front door: swings aside while the status is `opened`
    GeometryPrimitive door = box_prim({w, wall, h}, 1.5,
                                      geom::make_transform({0, -(d + wall) / 2, wall + h / 2}, Vec3::Zero()));
    door.open_pose = geom::make_transform({-(w / 2 + wall + h / 2) * 0 - (w / 2 + wall), -(d + wall) / 2 - w / 2, wall + h / 2},
                                          {0, 0, M_PI / 2});
    n.geometry.push_back(door);
    if (!open_top) {
        n.geometry.push_back(box_prim({ow, od, wall}, 3.0,
                                      geom::make_transform({0, 0, wall + h + wall / 2}, Vec3::Zero())));
    }
    n.surfaces.push_back({rect_region(w, d, wall), SurfaceType::contain});
    if (with_top && !open_top)
        n.surfaces.push_back({rect_region(ow, od, 2 * wall + h), SurfaceType::support});
    finalize(n);
    return n;
}

void add_entity(ContactGraphPlus& cg, SceneEntityNode node) {
    if (cg.nodes.count(node.id))
        throw CgError(ErrorCode::graph_integrity, "duplicate node id: " + node.id);
    cg.nodes[node.id] = std::move(node);
}

void place_on(ContactGraphPlus& cg, const std::string& parent, const std::string& child,
              int surface, double x, double y, double yaw, int orientation, bool posed) {
    SupportingRelation rel;
    rel.parent = parent;
    rel.child = child;
    rel.surface_index = surface;
    rel.pose = PlanarPose{x, y, yaw, 3};
    rel.orientation = orientation;
    rel.posed = posed;
    cg.supports[child] = rel;
}

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

ScenePair cabinet_two_objects() {
    ContactGraphPlus cg = base_scene();
    add_entity(cg, make_table("table", 1.2, 0.8, 0.72));
    place_on(cg, "scene", "table", 0, -1.0, 0.0, 0.0);
    cg.swap_id = "table";

    // interior 0.40 x 0.30 x 0.50: box (0.25) + cylinder (0.18) do not fit
    // side by side along x, but stack within the height
    add_entity(cg, make_container("cabinet", "cabinet", 0.40, 0.30, 0.50, 0.02, Status::closed));
    place_on(cg, "scene", "cabinet", 0, 0.3, 0.0, 0.0);

    add_entity(cg, make_box_entity("box", "box", {0.25, 0.25, 0.20}, 1.2, true));
    place_on(cg, "table", "box", 0, -0.25, 0.1, 0.0);
    add_entity(cg, make_cylinder_entity("cylinder", "cylinder", 0.09, 0.18, 0.6, true, true));
    place_on(cg, "table", "cylinder", 0, 0.25, -0.1, 0.0);

    ScenePair out;
    out.initial = cg;
    out.rough_goal = cg;
    // desired: both objects inside the cabinet (side by side as sketched, poses open)
    place_on(out.rough_goal, "cabinet", "box", 0, -0.1, 0.0, 0.0, 0, false);
    place_on(out.rough_goal, "cabinet", "cylinder", 0, 0.12, 0.0, 0.0, 0, false);
    return out;
}

ScenePair nested_containers() {
    ContactGraphPlus cg = base_scene();
    add_entity(cg, make_table("table", 1.2, 0.8, 0.72));
    place_on(cg, "scene", "table", 0, -1.2, 0.0, 0.0);
    cg.swap_id = "table";

    add_entity(cg, make_container("chest", "chest", 0.80, 0.62, 0.62, 0.02, Status::closed));
    place_on(cg, "scene", "chest", 0, 0.6, 0.0, 0.0);
    add_entity(cg, make_container("cabinet", "cabinet", 0.62, 0.48, 0.40, 0.02, Status::closed));
    place_on(cg, "chest", "cabinet", 0, 0.0, 0.0, 0.0);
    add_entity(cg, make_container("drawer", "drawer", 0.44, 0.30, 0.20, 0.015, Status::closed,
                                  false, true));
    place_on(cg, "cabinet", "drawer", 0, 0.0, 0.0, 0.0);

    // already inside the drawer
    add_entity(cg, make_box_entity("brown_box", "box", {0.12, 0.12, 0.12}, 0.5, true));
    place_on(cg, "drawer", "brown_box", 0, 0.0, 0.0, 0.0);
    add_entity(cg, make_cylinder_entity("tin", "cylinder", 0.035, 0.11, 0.3, true, true));
    place_on(cg, "drawer", "tin", 0, 0.12, 0.05, 0.0);

    // on the table, to be put away
    add_entity(cg, make_box_entity("purple_box", "box", {0.16, 0.11, 0.09}, 0.6, true));
    place_on(cg, "table", "purple_box", 0, -0.3, 0.15, 0.0);
    add_entity(cg, make_cylinder_entity("cup", "cup", 0.032, 0.08, 0.2, true, true));
    place_on(cg, "table", "cup", 0, 0.1, -0.2, 0.0);
    // taller than the drawer: must end up lying flat
    add_entity(cg, make_cylinder_entity("bottle", "bottle", 0.030, 0.24, 0.4, true, true));
    place_on(cg, "table", "bottle", 0, 0.35, 0.2, 0.0);

    ScenePair out;
    out.initial = cg;
    out.rough_goal = cg;
    place_on(out.rough_goal, "drawer", "purple_box", 0, 0, 0, 0, 0, false);
    place_on(out.rough_goal, "drawer", "cup", 0, 0, 0, 0, 0, false);
    place_on(out.rough_goal, "drawer", "bottle", 0, 0, 0, 0, 0, false);
    return out;
}

ScenePair plate_stack(int n_plates, std::uint64_t seed) {
    ContactGraphPlus cg = base_scene();
    add_entity(cg, make_table("table", 2.0, 2.0, 0.72));
    place_on(cg, "scene", "table", 0, 0.0, 0.0, 0.0);
    cg.swap_id = "table";

    Rng rng(seed_mix(seed, 0x91a7e5u));
    std::vector<std::string> ids;
    std::vector<double> radii;
    double r = 0.24;
    for (int i = 0; i < n_plates; ++i) {
        const std::string id = "plate" + std::string(i < 10 ? "0" : "") + std::to_string(i);
        add_entity(cg, make_disk_entity(id, "plate", r, 0.02, 0.4));
        ids.push_back(id);
        radii.push_back(r);
        r *= 0.85;
    }
    // collision-free random initial poses on the table
    std::vector<Vec2> placed;
    for (int i = 0; i < n_plates; ++i) {
        while (true) {
            const Vec2 c(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7));
            bool ok = true;
            for (int j = 0; j < i; ++j) {
                if ((c - placed[j]).norm() < radii[i] + radii[j] + 0.03) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                placed.push_back(c);
                break;
            }
        }
        place_on(cg, "table", ids[i], 0, placed[i].x(), placed[i].y(), 0.0);
    }

    ScenePair out;
    out.initial = cg;
    out.rough_goal = cg;
    // rough intent: pile everything onto the largest plate (left where it is)
    for (int i = 1; i < n_plates; ++i) {
        place_on(out.rough_goal, ids[0], ids[i], 0, 0, 0, 0, 0, false);
    }
    return out;
}

ContactGraphPlus dense_tabletop() {
    ContactGraphPlus cg = base_scene();
    add_entity(cg, make_table("table", 1.6, 1.0, 0.72));
    place_on(cg, "scene", "table", 0, 0.0, 0.0, 0.0);
    cg.swap_id = "table";

    const struct {
        const char* id;
        double x, y;
    } spots[] = {{"a", -0.6, -0.3}, {"b", -0.35, 0.25}, {"c", -0.1, -0.2}, {"d", 0.1, 0.3},
                 {"e", 0.3, -0.3},  {"f", 0.5, 0.2},    {"g", 0.65, -0.1}, {"h", -0.15, 0.05}};
    int i = 0;
    for (const auto& s : spots) {
        if (i % 3 == 0)
            add_entity(cg, make_box_entity(s.id, "box", {0.12, 0.1, 0.1}, 0.4, true));
        else if (i % 3 == 1)
            add_entity(cg, make_cylinder_entity(s.id, "cylinder", 0.05, 0.12, 0.3, true, true));
        else
            add_entity(cg, make_disk_entity(s.id, "disk", 0.08, 0.02, 0.2));
        place_on(cg, "table", s.id, 0, s.x, s.y, 0.0);
        ++i;
    }
    cg.proximal.push_back({{"a", 0}, {"c", 0}});
    cg.proximal.push_back({{"d", 0}, {"h", 0}});
    return cg;
}

ScenePair random_fixture(std::uint64_t seed, int max_objects, int max_containers) {
    Rng rng(seed_mix(seed, 0xf17u));
    ContactGraphPlus cg = base_scene();
    add_entity(cg, make_table("table", 1.6, 1.2, 0.72));
    place_on(cg, "scene", "table", 0, -1.0, 0.0, 0.0);
    cg.swap_id = "table";

    const int n_containers = max_containers > 0 ? static_cast<int>(rng.uniform_int(max_containers + 1)) : 0;
    std::vector<std::string> containers;
    for (int i = 0; i < n_containers; ++i) {
        const std::string id = "bin" + std::to_string(i);
        const double w = rng.uniform(0.45, 0.6), d = rng.uniform(0.35, 0.5),
                     h = rng.uniform(0.3, 0.4);
        add_entity(cg, make_container(id, "bin", w, d, h, 0.02,
                                      rng.chance(0.5) ? Status::closed : Status::opened));
        place_on(cg, "scene", id, 0, 0.4 + 0.8 * i, 0.0, 0.0);
        containers.push_back(id);
    }

    const int n_objects = 2 + static_cast<int>(rng.uniform_int(std::max(1, max_objects - 1)));
    std::vector<std::string> objects;
    std::vector<Vec2> placed;
    std::vector<double> radius;
    for (int i = 0; i < n_objects; ++i) {
        const std::string id = "obj" + std::to_string(i);
        double foot;
        switch (rng.uniform_int(3)) {
            case 0: {
                const double s = rng.uniform(0.06, 0.14);
                add_entity(cg, make_box_entity(id, "box", {s, s * rng.uniform(0.8, 1.2), rng.uniform(0.06, 0.14)},
                                               0.4, true));
                foot = s;
                break;
            }
            case 1: {
                const double r = rng.uniform(0.03, 0.06);
                add_entity(cg, make_cylinder_entity(id, "cylinder", r, rng.uniform(0.08, 0.16), 0.3,
                                                    true, true));
                foot = 2 * r;
                break;
            }
            default: {
                const double r = rng.uniform(0.05, 0.09);
                add_entity(cg, make_disk_entity(id, "disk", r, 0.02, 0.2));
                foot = 2 * r;
                break;
            }
        }
        // collision-free spot on the table
        while (true) {
            const Vec2 c(rng.uniform(-0.65, 0.65), rng.uniform(-0.45, 0.45));
            bool ok = true;
            for (std::size_t j = 0; j < placed.size(); ++j) {
                if ((c - placed[j]).norm() < 0.7 * (foot + radius[j]) + 0.03) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                placed.push_back(c);
                radius.push_back(foot);
                place_on(cg, "table", id, 0, c.x(), c.y(), 0.0);
                break;
            }
        }
        objects.push_back(id);
    }

    ScenePair out;
    out.initial = cg;
    out.rough_goal = cg;
    // random re-parenting intent: table or a container, with area budgeting
    std::map<std::string, double> budget;
    for (const std::string& id : containers) {
        const auto& surf = cg.node(id).surfaces[0].region;
        budget[id] = 0.45 * surf.area();
    }
    for (std::size_t i = 0; i < objects.size(); ++i) {
        std::vector<std::string> options{"table"};
        for (const std::string& c : containers) options.push_back(c);
        const std::string pick = options[rng.uniform_int(options.size())];
        if (pick == "table") {
            if (rng.chance(0.5)) continue;  // keep current relation
            place_on(out.rough_goal, "table", objects[i], 0,
                     rng.uniform(-0.6, 0.6), rng.uniform(-0.4, 0.4), 0.0, 0, false);
        } else {
            const double area = geom::polygon_area(cg.footprint_on_surface(objects[i]));
            if (area > budget[pick]) continue;
            budget[pick] -= area * 1.8;  // spacing margin
            place_on(out.rough_goal, pick, objects[i], 0, 0, 0, 0, 0, false);
        }
    }
    return out;
}

}  // namespace cgplan::scenes
