#pragma once

#include <cstdint>

#include "cgplan/cgraph.hpp"

namespace cgplan::scenes {

// Rectangular surface polygon centered at (cx, cy) in a frame at height z.
geom::Region2D rect_region(double w, double d, double z, double cx = 0, double cy = 0);
// Polygonized circular surface (64-gon).
geom::Region2D circle_region(double radius, double z);

// Root ("scene" node with floor + gripper dock) plus the gripper entity.
ContactGraphPlus base_scene();

SceneEntityNode make_box_entity(const std::string& id, const std::string& label,
                                const geom::Vec3& dims, double mass, bool movable,
                                bool top_surface = true);
SceneEntityNode make_cylinder_entity(const std::string& id, const std::string& label,
                                     double radius, double height, double mass, bool movable,
                                     bool top_surface = false);
SceneEntityNode make_disk_entity(const std::string& id, const std::string& label, double radius,
                                 double thickness, double mass);
SceneEntityNode make_cone_entity(const std::string& id, const std::string& label, double radius,
                                 double height, double mass);
SceneEntityNode make_table(const std::string& id, double w, double d, double height);
// Five-walled container with an abstracted front door, an interior contain
// surface (index 0) and, when `with_top`, a support surface on top (index 1).
SceneEntityNode make_container(const std::string& id, const std::string& label, double w,
                               double d, double h, double wall, Status status,
                               bool with_top = false, bool open_top = false);

void add_entity(ContactGraphPlus& cg, SceneEntityNode node);
void place_on(ContactGraphPlus& cg, const std::string& parent, const std::string& child,
              int surface, double x, double y, double yaw, int orientation = 0,
              bool posed = true);

// Fixture: a table scene with a two-object goal that only fits a container
// when the objects are stacked (container starts closed).
struct ScenePair {
    ContactGraphPlus initial;
    ContactGraphPlus rough_goal;
};
ScenePair cabinet_two_objects();

// Fixture: three nested containers (chest > cabinet > drawer, all closed) and
// three tabletop objects whose goal is inside the innermost drawer.
ScenePair nested_containers();

// Bench scene: n plates of strictly decreasing radius at random collision-free
// table poses; the rough goal piles every smaller plate onto the largest.
ScenePair plate_stack(int n_plates, std::uint64_t seed);

// Dense eight-object tabletop with declared proximal pairs (collision tests).
ContactGraphPlus dense_tabletop();

// Random solvable rearrangement fixture: <= max_objects movable bodies,
// <= max_containers containers, generous space.
ScenePair random_fixture(std::uint64_t seed, int max_objects, int max_containers);

}  // namespace cgplan::scenes
