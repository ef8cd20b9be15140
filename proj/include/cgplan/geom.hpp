#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <array>
#include <optional>
#include <span>
#include <vector>

#include "cgplan/error.hpp"

namespace cgplan::geom {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Transform = Eigen::Isometry3d;

// Gravity is fixed to world -z; supporting planes must be perpendicular to it.
inline const Vec3 kGravity{0.0, 0.0, -1.0};
constexpr double kUpAxisTolRad = 1e-6;
constexpr double kContainTol = 1e-9;

Transform make_transform(const Vec3& xyz, const Vec3& rpy);
Vec3 rpy_of(const Transform& t);

// ---------------------------------------------------------------------------
// 2D polygon kernel
// ---------------------------------------------------------------------------

double polygon_area(std::span<const Vec2> poly);
Vec2 polygon_centroid(std::span<const Vec2> poly);
bool point_in_polygon(std::span<const Vec2> poly, const Vec2& p);
bool polygon_is_convex(std::span<const Vec2> poly);

// Minimal CCW convex polygon over the inputs; collinear interior points are
// dropped. Throws degenerate_hull for < 3 effective points or a collinear set.
std::vector<Vec2> convex_hull_2d(std::vector<Vec2> points);

// Intersection of two convex CCW polygons (Sutherland-Hodgman). Empty or
// measure-zero intersections come back as nullopt.
std::optional<std::vector<Vec2>> clip_convex(std::span<const Vec2> subject,
                                             std::span<const Vec2> clip);

// Planar supporting surface. `frame` maps plane coordinates (x, y, 0) into the
// owning frame; the plane normal is frame.linear().col(2). Boundary is a
// simple CCW polygon in plane coordinates, meters.
struct Region2D {
    Transform frame = Transform::Identity();
    std::vector<Vec2> boundary;

    double area() const { return polygon_area(boundary); }
    Vec2 centroid() const { return polygon_centroid(boundary); }
    Vec3 normal() const { return frame.linear().col(2); }
    void validate() const;  // throws invalid_geometry
};

// Exact signed distance to the polygon boundary: negative inside, zero on the
// boundary, positive outside.
double sdf2d_eval(const Region2D& region, const Vec2& point);

// Convex hull of the overlap between a parent surface and a child footprint,
// both given with world-frame `frame`s. The child boundary is projected along
// gravity onto the parent plane first. nullopt = no contact.
std::optional<Region2D> overlap_region(const Region2D& parent_surface,
                                       const Region2D& child_footprint);

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

enum class PrimitiveKind { box, cylinder, cone, disk, convex_mesh };

const char* to_string(PrimitiveKind k);

// Convex solid in the owning node's frame.
//   box:      dims = full extents (x, y, z), centered at origin
//   cylinder: dims = (radius, height), axis +z, centered
//   cone:     dims = (base radius, height), base at z=0, apex at z=h
//   disk:     dims = (radius, thickness), axis +z, centered
//   convex_mesh: `vertices` (hull is taken implicitly)
struct GeometryPrimitive {
    PrimitiveKind kind = PrimitiveKind::box;
    Vec3 dims = Vec3::Zero();
    std::vector<Vec3> vertices;
    Transform local_pose = Transform::Identity();
    // Alternate placement used while the owning node's status is `opened`
    // (abstracted door/lid articulation).
    std::optional<Transform> open_pose;
    double mass = 1.0;

    void validate() const;
    double volume() const;
    Vec3 centroid_local() const;  // uniform-density centroid in primitive frame
    // Support point in primitive frame, exact for all five kinds.
    Vec3 support_local(const Vec3& dir) const;
    // Point cloud whose hull encloses the primitive (rings for curved kinds);
    // used for footprints, bounding boxes and seat heights.
    std::vector<Vec3> hull_points_local() const;
};

struct PlacedPrimitive {
    const GeometryPrimitive* prim = nullptr;
    Transform world = Transform::Identity();
};

// Signed distance between two convex primitives: positive separation or
// negative penetration depth (GJK + EPA on support functions). Exactly
// symmetric in its arguments.
double signed_distance3d(const GeometryPrimitive& a, const Transform& pose_a,
                         const GeometryPrimitive& b, const Transform& pose_b);

// Mass-weighted centroid of the placed primitives projected along gravity
// onto the plane of `plane_frame`, in plane coordinates.
Vec2 project_com(std::span<const PlacedPrimitive> bodies, const Transform& plane_frame);

// ---------------------------------------------------------------------------
// Oriented boxes
// ---------------------------------------------------------------------------

struct OrientedBox {
    Transform pose = Transform::Identity();  // center + orthonormal basis
    Vec3 half_extents = Vec3::Zero();

    std::array<Vec3, 8> corners() const;
    bool contains(const Vec3& p, double tol) const;
    void validate() const;
};

// True iff every child corner lies inside the parent box (tolerance meters).
bool union_bbox_contained(const OrientedBox& parent, std::span<const OrientedBox> children,
                          double tol = kContainTol);

// Axis-aligned box (in the points' own frame) enclosing a cloud.
OrientedBox bounding_box_of(std::span<const Vec3> points);

// ---------------------------------------------------------------------------
// 3D convex hull (faces), used for mesh centroids
// ---------------------------------------------------------------------------

struct HullFace {
    int a, b, c;  // indices, outward CCW
};

std::vector<HullFace> convex_hull_3d(std::span<const Vec3> points);
double hull_volume(std::span<const Vec3> points, std::span<const HullFace> faces);
Vec3 hull_centroid(std::span<const Vec3> points, std::span<const HullFace> faces);

}  // namespace cgplan::geom
