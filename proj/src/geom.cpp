#include "cgplan/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

namespace cgplan::geom {

namespace {

constexpr double kEps = 1e-12;

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double point_segment_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 < kEps * kEps) return (p - a).norm();
    double t = (p - a).dot(ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

bool segments_properly_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double d1 = cross2(b - a, c - a);
    const double d2 = cross2(b - a, d - a);
    const double d3 = cross2(d - c, a - c);
    const double d4 = cross2(d - c, b - c);
    return ((d1 > kEps && d2 < -kEps) || (d1 < -kEps && d2 > kEps)) &&
           ((d3 > kEps && d4 < -kEps) || (d3 < -kEps && d4 > kEps));
}

}  // namespace

Transform make_transform(const Vec3& xyz, const Vec3& rpy) {
    Transform t = Transform::Identity();
    t.linear() = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
                  Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                  Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
                     .toRotationMatrix();
    t.translation() = xyz;
    return t;
}

Vec3 rpy_of(const Transform& t) {
    const Mat3 r = t.linear();
    const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
    double roll, yaw;
    if (std::abs(std::cos(pitch)) > 1e-9) {
        roll = std::atan2(r(2, 1), r(2, 2));
        yaw = std::atan2(r(1, 0), r(0, 0));
    } else {
        roll = std::atan2(-r(1, 2), r(1, 1));
        yaw = 0.0;
    }
    return {roll, pitch, yaw};
}

// ---------------------------------------------------------------------------
// 2D polygon kernel
// ---------------------------------------------------------------------------

double polygon_area(std::span<const Vec2> poly) {
    double acc = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        acc += cross2(a, b);
    }
    return 0.5 * acc;
}

Vec2 polygon_centroid(std::span<const Vec2> poly) {
    const double a = polygon_area(poly);
    if (std::abs(a) < kEps) throw CgError(ErrorCode::invalid_geometry, "degenerate polygon");
    Vec2 c = Vec2::Zero();
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        c += (p + q) * cross2(p, q);
    }
    return c / (6.0 * a);
}

bool point_in_polygon(std::span<const Vec2> poly, const Vec2& p) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double x = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
            if (p.x() < x) inside = !inside;
        }
    }
    return inside;
}

bool polygon_is_convex(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    int sign = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        const Vec2& c = poly[(i + 2) % n];
        const double cr = cross2(b - a, c - b);
        if (std::abs(cr) < kEps) continue;
        const int s = cr > 0 ? 1 : -1;
        if (sign == 0) sign = s;
        else if (s != sign) return false;
    }
    return true;
}

std::vector<Vec2> convex_hull_2d(std::vector<Vec2> pts) {
    if (pts.size() < 3) throw CgError(ErrorCode::degenerate_hull, "need at least 3 points");
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Vec2& a, const Vec2& b) { return (a - b).norm() < kEps; }),
              pts.end());
    const std::size_t n = pts.size();
    if (n < 3) throw CgError(ErrorCode::degenerate_hull, "too few distinct points");
    std::vector<Vec2> h(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {  // lower chain
        while (k >= 2 && cross2(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= kEps) --k;
        h[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i > 0; --i) {  // upper chain
        while (k >= t && cross2(h[k - 1] - h[k - 2], pts[i - 1] - h[k - 2]) <= kEps) --k;
        h[k++] = pts[i - 1];
    }
    h.resize(k - 1);
    if (h.size() < 3) throw CgError(ErrorCode::degenerate_hull, "collinear point set");
    return h;
}

std::optional<std::vector<Vec2>> clip_convex(std::span<const Vec2> subject,
                                             std::span<const Vec2> clip) {
    std::vector<Vec2> out(subject.begin(), subject.end());
    const std::size_t m = clip.size();
    for (std::size_t i = 0; i < m && !out.empty(); ++i) {
        const Vec2& a = clip[i];
        const Vec2& b = clip[(i + 1) % m];
        const Vec2 edge = b - a;
        std::vector<Vec2> in;
        in.swap(out);
        const std::size_t n = in.size();
        for (std::size_t j = 0; j < n; ++j) {
            const Vec2& p = in[j];
            const Vec2& q = in[(j + 1) % n];
            const double dp = cross2(edge, p - a);
            const double dq = cross2(edge, q - a);
            if (dp >= -kEps) out.push_back(p);
            if ((dp > kEps && dq < -kEps) || (dp < -kEps && dq > kEps)) {
                out.push_back(p + (q - p) * (dp / (dp - dq)));
            }
        }
    }
    // drop duplicate vertices left behind by clipping
    std::vector<Vec2> clean;
    for (const Vec2& p : out) {
        if (clean.empty() || (p - clean.back()).norm() > 1e-9) clean.push_back(p);
    }
    while (clean.size() > 1 && (clean.front() - clean.back()).norm() < 1e-9) clean.pop_back();
    if (clean.size() < 3) return std::nullopt;
    if (std::abs(polygon_area(clean)) < 1e-14) return std::nullopt;
    return clean;
}

void Region2D::validate() const {
    if (boundary.size() < 3)
        throw CgError(ErrorCode::invalid_geometry, "region boundary needs >= 3 vertices");
    if (polygon_area(boundary) <= kEps)
        throw CgError(ErrorCode::invalid_geometry, "region boundary must be CCW with area > 0");
    const std::size_t n = boundary.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_properly_intersect(boundary[i], boundary[(i + 1) % n], boundary[j],
                                            boundary[(j + 1) % n])) {
                throw CgError(ErrorCode::invalid_geometry, "region boundary self-intersects");
            }
        }
    }
    const double no = std::abs(frame.linear().determinant() - 1.0);
    if (no > 1e-6) throw CgError(ErrorCode::invalid_geometry, "region frame not rigid");
}

double sdf2d_eval(const Region2D& region, const Vec2& point) {
    if (region.boundary.size() < 3 || std::abs(polygon_area(region.boundary)) < 1e-14)
        throw CgError(ErrorCode::invalid_geometry, "degenerate region");
    double d = std::numeric_limits<double>::infinity();
    const std::size_t n = region.boundary.size();
    for (std::size_t i = 0; i < n; ++i) {
        d = std::min(d, point_segment_dist(point, region.boundary[i], region.boundary[(i + 1) % n]));
    }
    if (d == 0.0) return 0.0;
    return point_in_polygon(region.boundary, point) ? -d : d;
}

namespace {

// Gravity-projection of a world point onto a region's plane, in plane coords.
Vec2 project_to_plane(const Transform& frame, const Vec3& world) {
    const Transform inv = frame.inverse();
    const Vec3 p = inv * world;
    const Vec3 dir = inv.linear() * kGravity;
    if (std::abs(dir.z()) < 1e-9)
        throw CgError(ErrorCode::invalid_geometry, "plane parallel to gravity");
    const double t = -p.z() / dir.z();
    const Vec3 hit = p + t * dir;
    return hit.head<2>();
}

}  // namespace

std::optional<Region2D> overlap_region(const Region2D& parent_surface,
                                       const Region2D& child_footprint) {
    std::vector<Vec2> child_pts;
    child_pts.reserve(child_footprint.boundary.size());
    for (const Vec2& v : child_footprint.boundary) {
        const Vec3 w = child_footprint.frame * Vec3(v.x(), v.y(), 0.0);
        child_pts.push_back(project_to_plane(parent_surface.frame, w));
    }
    std::vector<Vec2> child_hull, parent_hull;
    try {
        child_hull = convex_hull_2d(child_pts);
        parent_hull = polygon_is_convex(parent_surface.boundary)
                          ? std::vector<Vec2>(parent_surface.boundary.begin(),
                                              parent_surface.boundary.end())
                          : convex_hull_2d(std::vector<Vec2>(parent_surface.boundary.begin(),
                                                             parent_surface.boundary.end()));
    } catch (const CgError&) {
        return std::nullopt;
    }
    auto inter = clip_convex(child_hull, parent_hull);
    if (!inter) return std::nullopt;
    Region2D out;
    out.frame = parent_surface.frame;
    out.boundary = convex_hull_2d(*inter);
    return out;
}

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

const char* to_string(PrimitiveKind k) {
    switch (k) {
        case PrimitiveKind::box: return "box";
        case PrimitiveKind::cylinder: return "cylinder";
        case PrimitiveKind::cone: return "cone";
        case PrimitiveKind::disk: return "disk";
        case PrimitiveKind::convex_mesh: return "mesh";
    }
    return "?";
}

void GeometryPrimitive::validate() const {
    switch (kind) {
        case PrimitiveKind::box:
            if (dims.x() <= 0 || dims.y() <= 0 || dims.z() <= 0)
                throw CgError(ErrorCode::invalid_geometry, "box extents must be positive");
            break;
        case PrimitiveKind::cylinder:
        case PrimitiveKind::cone:
        case PrimitiveKind::disk:
            if (dims.x() <= 0 || dims.y() <= 0)
                throw CgError(ErrorCode::invalid_geometry, "radius/height must be positive");
            break;
        case PrimitiveKind::convex_mesh: {
            if (vertices.size() < 4)
                throw CgError(ErrorCode::invalid_geometry, "mesh needs >= 4 vertices");
            Vec3 mean = Vec3::Zero();
            for (const Vec3& v : vertices) mean += v;
            mean /= static_cast<double>(vertices.size());
            Mat3 cov = Mat3::Zero();
            for (const Vec3& v : vertices) cov += (v - mean) * (v - mean).transpose();
            Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
            if (es.eigenvalues().minCoeff() < 1e-18)
                throw CgError(ErrorCode::invalid_geometry, "mesh vertex set has a degenerate hull");
            break;
        }
    }
    if (mass < 0) throw CgError(ErrorCode::invalid_mass, "negative primitive mass");
}

double GeometryPrimitive::volume() const {
    switch (kind) {
        case PrimitiveKind::box: return dims.x() * dims.y() * dims.z();
        case PrimitiveKind::cylinder:
        case PrimitiveKind::disk: return M_PI * dims.x() * dims.x() * dims.y();
        case PrimitiveKind::cone: return M_PI * dims.x() * dims.x() * dims.y() / 3.0;
        case PrimitiveKind::convex_mesh: {
            const auto faces = convex_hull_3d(vertices);
            return hull_volume(vertices, faces);
        }
    }
    return 0.0;
}

Vec3 GeometryPrimitive::centroid_local() const {
    switch (kind) {
        case PrimitiveKind::box:
        case PrimitiveKind::cylinder:
        case PrimitiveKind::disk: return Vec3::Zero();
        case PrimitiveKind::cone: return {0.0, 0.0, dims.y() / 4.0};
        case PrimitiveKind::convex_mesh: {
            const auto faces = convex_hull_3d(vertices);
            return hull_centroid(vertices, faces);
        }
    }
    return Vec3::Zero();
}

Vec3 GeometryPrimitive::support_local(const Vec3& d) const {
    switch (kind) {
        case PrimitiveKind::box:
            return {(d.x() >= 0 ? 0.5 : -0.5) * dims.x(), (d.y() >= 0 ? 0.5 : -0.5) * dims.y(),
                    (d.z() >= 0 ? 0.5 : -0.5) * dims.z()};
        case PrimitiveKind::cylinder:
        case PrimitiveKind::disk: {
            const double r = dims.x(), hh = 0.5 * dims.y();
            const double nxy = std::hypot(d.x(), d.y());
            Vec3 p(0.0, 0.0, d.z() >= 0 ? hh : -hh);
            if (nxy > 1e-12) {
                p.x() = r * d.x() / nxy;
                p.y() = r * d.y() / nxy;
            }
            return p;
        }
        case PrimitiveKind::cone: {
            const double r = dims.x(), h = dims.y();
            const Vec3 apex(0.0, 0.0, h);
            const double nxy = std::hypot(d.x(), d.y());
            Vec3 rim(0.0, 0.0, 0.0);
            if (nxy > 1e-12) {
                rim.x() = r * d.x() / nxy;
                rim.y() = r * d.y() / nxy;
            }
            return d.dot(apex) >= d.dot(rim) ? apex : rim;
        }
        case PrimitiveKind::convex_mesh: {
            double best = -std::numeric_limits<double>::infinity();
            Vec3 out = Vec3::Zero();
            for (const Vec3& v : vertices) {
                const double s = d.dot(v);
                if (s > best) {
                    best = s;
                    out = v;
                }
            }
            return out;
        }
    }
    return Vec3::Zero();
}

std::vector<Vec3> GeometryPrimitive::hull_points_local() const {
    constexpr int kRing = 64;
    std::vector<Vec3> pts;
    switch (kind) {
        case PrimitiveKind::box: {
            const Vec3 h = 0.5 * dims;
            for (int sx : {-1, 1})
                for (int sy : {-1, 1})
                    for (int sz : {-1, 1}) pts.emplace_back(sx * h.x(), sy * h.y(), sz * h.z());
            break;
        }
        case PrimitiveKind::cylinder:
        case PrimitiveKind::disk: {
            const double r = dims.x(), hh = 0.5 * dims.y();
            for (int i = 0; i < kRing; ++i) {
                const double a = 2.0 * M_PI * i / kRing;
                pts.emplace_back(r * std::cos(a), r * std::sin(a), hh);
                pts.emplace_back(r * std::cos(a), r * std::sin(a), -hh);
            }
            break;
        }
        case PrimitiveKind::cone: {
            const double r = dims.x(), h = dims.y();
            for (int i = 0; i < kRing; ++i) {
                const double a = 2.0 * M_PI * i / kRing;
                pts.emplace_back(r * std::cos(a), r * std::sin(a), 0.0);
            }
            pts.emplace_back(0.0, 0.0, h);
            break;
        }
        case PrimitiveKind::convex_mesh:
            pts = vertices;
            break;
    }
    return pts;
}

// ---------------------------------------------------------------------------
// GJK / EPA
// ---------------------------------------------------------------------------

namespace {

struct ShapeRef {
    const GeometryPrimitive* prim;
    Mat3 rot;
    Mat3 rot_t;
    Vec3 trans;

    explicit ShapeRef(const GeometryPrimitive& p, const Transform& pose)
        : prim(&p), rot(pose.linear()), rot_t(pose.linear().transpose()), trans(pose.translation()) {}

    Vec3 support(const Vec3& dir) const { return rot * prim->support_local(rot_t * dir) + trans; }
};

Vec3 mink_support(const ShapeRef& a, const ShapeRef& b, const Vec3& dir) {
    return a.support(dir) - b.support(-dir);
}

// Closest point to the origin on a simplex of 1..4 vertices. Reduces the
// simplex to the supporting sub-simplex. Sets `enclosed` for a tetrahedron
// that contains the origin.
Vec3 closest_on_simplex(std::vector<Vec3>& s, bool& enclosed);

Vec3 closest_on_segment(std::vector<Vec3>& s) {
    const Vec3 a = s[0], b = s[1];
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0 ? -a.dot(ab) / len2 : 0.0;
    if (t <= 0.0) {
        s = {a};
        return a;
    }
    if (t >= 1.0) {
        s = {b};
        return b;
    }
    return a + t * ab;
}

Vec3 closest_on_triangle(std::vector<Vec3>& s) {
    const Vec3 a = s[0], b = s[1], c = s[2];
    const Vec3 ab = b - a, ac = c - a;
    const Vec3 ap = -a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) {
        s = {a};
        return a;
    }
    const Vec3 bp = -b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) {
        s = {b};
        return b;
    }
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) {
        const double v = d1 / (d1 - d3);
        s = {a, b};
        return a + v * ab;
    }
    const Vec3 cp = -c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) {
        s = {c};
        return c;
    }
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) {
        const double w = d2 / (d2 - d6);
        s = {a, c};
        return a + w * ac;
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        s = {b, c};
        return b + w * (c - b);
    }
    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom, w = vc * denom;
    return a + ab * v + ac * w;
}

Vec3 closest_on_tetra(std::vector<Vec3>& s, bool& enclosed) {
    const std::array<std::array<int, 3>, 4> faces{{{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};
    const std::array<int, 4> opposite{3, 2, 1, 0};
    const double vol6 = std::abs((s[1] - s[0]).cross(s[2] - s[0]).dot(s[3] - s[0]));
    const bool degenerate = vol6 < 1e-18;
    double best = std::numeric_limits<double>::infinity();
    std::vector<Vec3> best_sub;
    Vec3 best_pt = Vec3::Zero();
    bool outside_any = false;
    for (int f = 0; f < 4; ++f) {
        const Vec3 a = s[faces[f][0]], b = s[faces[f][1]], c = s[faces[f][2]];
        const Vec3 n = (b - a).cross(c - a);
        bool outside = degenerate;
        if (!degenerate && n.squaredNorm() >= 1e-24) {
            const double side_o = n.dot(-a);
            const double side_d = n.dot(s[opposite[f]] - a);
            outside = side_o * side_d < 0;
        }
        if (!outside) continue;
        outside_any = true;
        std::vector<Vec3> sub{a, b, c};
        const Vec3 p = closest_on_triangle(sub);
        const double d2 = p.squaredNorm();
        if (d2 < best) {
            best = d2;
            best_pt = p;
            best_sub = sub;
        }
    }
    if (!outside_any) {
        enclosed = true;
        return Vec3::Zero();
    }
    s = best_sub;
    return best_pt;
}

Vec3 closest_on_simplex(std::vector<Vec3>& s, bool& enclosed) {
    enclosed = false;
    switch (s.size()) {
        case 1: return s[0];
        case 2: return closest_on_segment(s);
        case 3: return closest_on_triangle(s);
        default: return closest_on_tetra(s, enclosed);
    }
}

struct GjkOut {
    bool overlap = false;
    double distance = 0.0;
    std::vector<Vec3> simplex;
};

GjkOut run_gjk(const ShapeRef& A, const ShapeRef& B) {
    GjkOut out;
    Vec3 dir = B.trans - A.trans;
    if (dir.squaredNorm() < 1e-18) dir = Vec3::UnitX();
    std::vector<Vec3> s{mink_support(A, B, dir)};
    for (int iter = 0; iter < 128; ++iter) {
        bool enclosed = false;
        const Vec3 v = closest_on_simplex(s, enclosed);
        const double vn = v.norm();
        if (enclosed || vn < 1e-10) {
            out.overlap = true;
            out.simplex = s;
            return out;
        }
        const Vec3 d = -v / vn;
        const Vec3 w = mink_support(A, B, d);
        // v·w/|v| lower-bounds the distance; stop when it meets the upper bound |v|
        if (vn - v.dot(w) / vn <= 1e-12 * std::max(1.0, vn)) {
            out.distance = vn;
            out.simplex = s;
            return out;
        }
        bool dup = false;
        for (const Vec3& p : s) {
            if ((p - w).squaredNorm() < 1e-24) {
                dup = true;
                break;
            }
        }
        if (dup) {
            out.distance = vn;
            out.simplex = s;
            return out;
        }
        s.push_back(w);
    }
    bool enclosed = false;
    const Vec3 v = closest_on_simplex(s, enclosed);
    out.overlap = enclosed || v.norm() < 1e-10;
    out.distance = out.overlap ? 0.0 : v.norm();
    out.simplex = s;
    return out;
}

// Face-based expanding polytope; shared by the mesh hull and EPA.
class IncrementalHull {
public:
    struct Face {
        int a, b, c;
        Vec3 n;      // outward unit normal
        double off;  // n · vertex (plane offset from the origin)
        bool alive = true;
    };

    std::vector<Vec3> pts;
    std::vector<Face> faces;

    bool init(std::span<const Vec3> cloud) {
        // pick four affinely independent seed points
        if (cloud.size() < 4) return false;
        int i0 = 0, i1 = -1, i2 = -1, i3 = -1;
        for (std::size_t i = 1; i < cloud.size(); ++i) {
            if ((cloud[i] - cloud[i0]).norm() > 1e-10) {
                i1 = static_cast<int>(i);
                break;
            }
        }
        if (i1 < 0) return false;
        const Vec3 e0 = cloud[i1] - cloud[i0];
        double best = 1e-20;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const double a = e0.cross(cloud[i] - cloud[i0]).squaredNorm();
            if (a > best) {
                best = a;
                i2 = static_cast<int>(i);
            }
        }
        if (i2 < 0) return false;
        const Vec3 n = e0.cross(cloud[i2] - cloud[i0]);
        best = 1e-12 * n.norm();
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const double v = std::abs(n.dot(cloud[i] - cloud[i0]));
            if (v > best) {
                best = v;
                i3 = static_cast<int>(i);
            }
        }
        if (i3 < 0) return false;
        pts = {cloud[i0], cloud[i1], cloud[i2], cloud[i3]};
        interior_ = 0.25 * (pts[0] + pts[1] + pts[2] + pts[3]);
        add_face(0, 1, 2);
        add_face(0, 1, 3);
        add_face(0, 2, 3);
        add_face(1, 2, 3);
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            if (static_cast<int>(i) == i0 || static_cast<int>(i) == i1 ||
                static_cast<int>(i) == i2 || static_cast<int>(i) == i3)
                continue;
            add_point(cloud[i]);
        }
        return true;
    }

    // Expands the hull with p if it lies outside; returns false when inside.
    bool add_point(const Vec3& p) {
        std::vector<int> visible;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (!faces[f].alive) continue;
            if (faces[f].n.dot(p) - faces[f].off > 1e-10) visible.push_back(static_cast<int>(f));
        }
        if (visible.empty()) return false;
        // horizon = directed edges of visible faces whose reverse is not visible
        std::map<std::pair<int, int>, int> edge_count;
        for (int f : visible) {
            const Face& fc = faces[f];
            for (auto [u, v] : {std::pair{fc.a, fc.b}, std::pair{fc.b, fc.c}, std::pair{fc.c, fc.a}})
                edge_count[{u, v}]++;
        }
        std::vector<std::pair<int, int>> horizon;
        for (const auto& [e, cnt] : edge_count) {
            (void)cnt;
            if (!edge_count.count({e.second, e.first})) horizon.push_back(e);
        }
        for (int f : visible) faces[f].alive = false;
        const int pi = static_cast<int>(pts.size());
        pts.push_back(p);
        for (const auto& [u, v] : horizon) add_face(u, v, pi);
        return true;
    }

    const Face* nearest_face() const {
        const Face* best = nullptr;
        for (const Face& f : faces) {
            if (!f.alive) continue;
            if (!best || f.off < best->off) best = &f;
        }
        return best;
    }

    std::vector<HullFace> alive_faces() const {
        std::vector<HullFace> out;
        for (const Face& f : faces) {
            if (f.alive) out.push_back({f.a, f.b, f.c});
        }
        return out;
    }

private:
    Vec3 interior_ = Vec3::Zero();

    void add_face(int a, int b, int c) {
        Face f;
        f.a = a;
        f.b = b;
        f.c = c;
        Vec3 n = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
        const double nn = n.norm();
        if (nn < 1e-18) return;  // sliver, drop
        n /= nn;
        if (n.dot(pts[a] - interior_) < 0) {
            std::swap(f.b, f.c);
            n = -n;
        }
        f.n = n;
        f.off = n.dot(pts[f.a]);
        faces.push_back(f);
    }
};

double run_epa(const ShapeRef& A, const ShapeRef& B, const std::vector<Vec3>& simplex) {
    std::vector<Vec3> seeds = simplex;
    const Vec3 dirs[] = {Vec3::UnitX(),  Vec3::UnitY(),  Vec3::UnitZ(),
                         -Vec3::UnitX(), -Vec3::UnitY(), -Vec3::UnitZ(),
                         Vec3(1, 1, 1).normalized(),   Vec3(1, 1, -1).normalized(),
                         Vec3(1, -1, 1).normalized(),  Vec3(1, -1, -1).normalized(),
                         Vec3(-1, 1, 1).normalized(),  Vec3(-1, 1, -1).normalized(),
                         Vec3(-1, -1, 1).normalized(), Vec3(-1, -1, -1).normalized()};
    for (const Vec3& d : dirs) seeds.push_back(mink_support(A, B, d));

    IncrementalHull hull;
    if (!hull.init(seeds)) {
        // flat difference; shapes barely overlap
        return 0.0;
    }
    double depth = 0.0;
    for (int iter = 0; iter < 256; ++iter) {
        const auto* f = hull.nearest_face();
        if (!f) break;
        depth = std::max(0.0, f->off);
        const Vec3 w = mink_support(A, B, f->n);
        if (f->n.dot(w) - f->off < 1e-10) break;
        if (!hull.add_point(w)) break;
    }
    return depth;
}

// Deterministic ordering key so sd(a,b) == sd(b,a) bit-for-bit.
int shape_order(const GeometryPrimitive& a, const Transform& pa, const GeometryPrimitive& b,
                const Transform& pb) {
    auto cmp = [](double x, double y) { return x < y ? -1 : (x > y ? 1 : 0); };
    if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
    for (int i = 0; i < 3; ++i) {
        if (int c = cmp(a.dims[i], b.dims[i])) return c;
    }
    if (a.vertices.size() != b.vertices.size()) return a.vertices.size() < b.vertices.size() ? -1 : 1;
    for (std::size_t i = 0; i < a.vertices.size(); ++i) {
        for (int j = 0; j < 3; ++j) {
            if (int c = cmp(a.vertices[i][j], b.vertices[i][j])) return c;
        }
    }
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 4; ++c) {
            if (int k = cmp(pa.matrix()(r, c), pb.matrix()(r, c))) return k;
        }
    }
    return 0;
}

}  // namespace

double signed_distance3d(const GeometryPrimitive& a, const Transform& pose_a,
                         const GeometryPrimitive& b, const Transform& pose_b) {
    if (a.kind == PrimitiveKind::convex_mesh && a.vertices.empty())
        throw CgError(ErrorCode::unsupported_geometry, "empty mesh");
    if (b.kind == PrimitiveKind::convex_mesh && b.vertices.empty())
        throw CgError(ErrorCode::unsupported_geometry, "empty mesh");

    // evaluate about the midpoint so a common translation cancels
    const Vec3 mid = 0.5 * (pose_a.translation() + pose_b.translation());
    Transform ta = pose_a, tb = pose_b;
    ta.translation() -= mid;
    tb.translation() -= mid;

    const GeometryPrimitive* pa = &a;
    const GeometryPrimitive* pb = &b;
    if (shape_order(a, ta, b, tb) > 0) {
        std::swap(pa, pb);
        std::swap(ta, tb);
    }
    const ShapeRef sa(*pa, ta), sb(*pb, tb);
    const GjkOut g = run_gjk(sa, sb);
    if (!g.overlap) return g.distance;
    return -run_epa(sa, sb, g.simplex);
}

Vec2 project_com(std::span<const PlacedPrimitive> bodies, const Transform& plane_frame) {
    double total = 0.0;
    Vec3 acc = Vec3::Zero();
    for (const PlacedPrimitive& body : bodies) {
        total += body.prim->mass;
        acc += body.prim->mass * (body.world * body.prim->centroid_local());
    }
    if (total <= 0.0) throw CgError(ErrorCode::invalid_mass, "zero total mass");
    return project_to_plane(plane_frame, acc / total);
}

// ---------------------------------------------------------------------------
// Oriented boxes
// ---------------------------------------------------------------------------

std::array<Vec3, 8> OrientedBox::corners() const {
    std::array<Vec3, 8> out;
    int k = 0;
    for (int sx : {-1, 1})
        for (int sy : {-1, 1})
            for (int sz : {-1, 1})
                out[k++] = pose * Vec3(sx * half_extents.x(), sy * half_extents.y(),
                                       sz * half_extents.z());
    return out;
}

bool OrientedBox::contains(const Vec3& p, double tol) const {
    const Vec3 local = pose.inverse() * p;
    return std::abs(local.x()) <= half_extents.x() + tol &&
           std::abs(local.y()) <= half_extents.y() + tol &&
           std::abs(local.z()) <= half_extents.z() + tol;
}

void OrientedBox::validate() const {
    if (half_extents.minCoeff() <= 0)
        throw CgError(ErrorCode::invalid_geometry, "bbox half-extents must be positive");
    const Mat3 r = pose.linear();
    if ((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
        throw CgError(ErrorCode::invalid_geometry, "bbox rotation not orthonormal");
}

bool union_bbox_contained(const OrientedBox& parent, std::span<const OrientedBox> children,
                          double tol) {
    for (const OrientedBox& child : children) {
        for (const Vec3& c : child.corners()) {
            if (!parent.contains(c, tol)) return false;
        }
    }
    return true;
}

OrientedBox bounding_box_of(std::span<const Vec3> points) {
    if (points.empty()) throw CgError(ErrorCode::invalid_geometry, "empty point set");
    Vec3 lo = points[0], hi = points[0];
    for (const Vec3& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    OrientedBox box;
    box.pose = Transform::Identity();
    box.pose.translation() = 0.5 * (lo + hi);
    box.half_extents = (0.5 * (hi - lo)).cwiseMax(1e-9);
    return box;
}

// ---------------------------------------------------------------------------
// 3D hull
// ---------------------------------------------------------------------------

std::vector<HullFace> convex_hull_3d(std::span<const Vec3> points) {
    IncrementalHull hull;
    if (!hull.init(points))
        throw CgError(ErrorCode::degenerate_hull, "degenerate 3D point set");
    // map hull's internal vertex list back to input indices
    std::vector<int> remap(hull.pts.size(), -1);
    for (std::size_t i = 0; i < hull.pts.size(); ++i) {
        for (std::size_t j = 0; j < points.size(); ++j) {
            if ((hull.pts[i] - points[j]).squaredNorm() < 1e-24) {
                remap[i] = static_cast<int>(j);
                break;
            }
        }
    }
    std::vector<HullFace> out;
    for (const HullFace& f : hull.alive_faces()) {
        if (remap[f.a] < 0 || remap[f.b] < 0 || remap[f.c] < 0) continue;
        out.push_back({remap[f.a], remap[f.b], remap[f.c]});
    }
    return out;
}

double hull_volume(std::span<const Vec3> points, std::span<const HullFace> faces) {
    double v = 0.0;
    for (const HullFace& f : faces) {
        v += points[f.a].dot(points[f.b].cross(points[f.c])) / 6.0;
    }
    return v;
}

Vec3 hull_centroid(std::span<const Vec3> points, std::span<const HullFace> faces) {
    double v = 0.0;
    Vec3 c = Vec3::Zero();
    for (const HullFace& f : faces) {
        const double tv = points[f.a].dot(points[f.b].cross(points[f.c])) / 6.0;
        v += tv;
        c += tv * (points[f.a] + points[f.b] + points[f.c]) / 4.0;
    }
    if (std::abs(v) < 1e-18) throw CgError(ErrorCode::degenerate_hull, "zero hull volume");
    return c / v;
}

}  // namespace cgplan::geom
