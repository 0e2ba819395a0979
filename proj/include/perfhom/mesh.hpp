#pragma once

// Conforming triangulations of the perforated domain with tagged boundary
// edges, built on the constrained Delaunay/Ruppert engine. Element size is
// graded from the cavity boundaries (where holes of radius eps*eta must be
// resolved) up to h_target in the far field.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "perfhom/delaunay.hpp"
#include "perfhom/geometry.hpp"

namespace perfhom {

enum class TagKind : int {
    OuterDirichlet = 0,
    CavityDirichlet = 1,
    CavityRobin = 2,
    PeriodicLeft = 3,
    PeriodicRight = 4,
    PeriodicBottom = 5,
    PeriodicTop = 6,
};

struct EdgeTag {
    TagKind kind = TagKind::OuterDirichlet;
    int cavity = -1;
    bool operator==(const EdgeTag& o) const { return kind == o.kind && cavity == o.cavity; }
    bool operator<(const EdgeTag& o) const { return std::pair(int(kind), cavity) < std::pair(int(o.kind), o.cavity); }
    bool is_cavity() const { return kind == TagKind::CavityDirichlet || kind == TagKind::CavityRobin; }
};

struct BoundaryEdge {
    int a = -1, b = -1;
    EdgeTag tag;
};

struct Mesh {
    struct Circle {
        Vec2 center;
        double radius = 0.0;
    };

    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  // CCW
    std::vector<BoundaryEdge> boundary_edges;
    double h_max = 0.0;
    double h_boundary = 0.0;
    std::map<int, Circle> cavity_circles;  // disk cavities, for boundary projection
    std::optional<Circle> outer_circle;

    double tri_area(int t) const {
        const auto& T = triangles[std::size_t(t)];
        Vec2 a = vertices[std::size_t(T[0])], b = vertices[std::size_t(T[1])], c = vertices[std::size_t(T[2])];
        return 0.5 * (b - a).cross(c - a);
    }
    double total_area() const {
        double s = 0;
        for (int t = 0; t < int(triangles.size()); ++t) s += tri_area(t);
        return s;
    }
    Vec2 centroid(int t) const {
        const auto& T = triangles[std::size_t(t)];
        return (vertices[std::size_t(T[0])] + vertices[std::size_t(T[1])] + vertices[std::size_t(T[2])]) / 3.0;
    }
};

struct MeshQualityReport {
    double min_angle_deg = 0.0;
    double max_aspect = 0.0;  // longest/shortest edge over triangles
    double h_max = 0.0;
    double h_boundary = 0.0;
    double min_signed_area = 0.0;
    int n_triangles = 0;
    int n_vertices = 0;
    bool degenerate = false;  // some signed area <= 0
};

struct TriangulateOptions {
    double h_target = 0.1;
    int boundary_divisions = 0;  // 0: default max(32, ceil(4*pi/h_target * eps*eta*r))
    double min_angle_deg = 20.0;
    std::size_t max_vertices = 800'000;
    double grade = 0.9;        // sizing growth rate away from cavity boundaries
    double size_factor = 0.62; // circumradius limit as a fraction of local sizing
};

namespace meshdetail {

inline std::vector<Vec2> circle_polygon(Vec2 c, double r, int m) {
    std::vector<Vec2> out;
    out.reserve(std::size_t(m));
    for (int j = 0; j < m; ++j) {
        double th = 2.0 * PI * double(j) / double(m);
        out.push_back({c.x + r * std::cos(th), c.y + r * std::sin(th)});
    }
    return out;
}

struct CircleInfo {
    Vec2 center;
    double radius;
    double edge_len;
};

inline double sizing_at(const Vec2& x, double h_target, double grade, const std::vector<CircleInfo>& circles) {
    double s = h_target;
    for (const auto& c : circles) {
        double d = std::max(0.0, dist(x, c.center) - c.radius);
        s = std::min(s, c.edge_len + grade * d);
    }
    return s;
}

// inserts a closed polyline (vertices then recovered segments) with a tag
inline void insert_loop(cdt::Triangulation& tr, const std::vector<Vec2>& poly, const cdt::SegTag& tag) {
    std::vector<int> vids;
    vids.reserve(poly.size());
    for (const Vec2& p : poly) {
        auto r = tr.insert_point(p);
        if (!r.ok) throw MeshError("boundary vertex insertion failed");
        vids.push_back(r.vertex);
    }
    int tag_id = tr.add_tag(tag);
    for (std::size_t i = 0; i < vids.size(); ++i) {
        int a = vids[i], b = vids[(i + 1) % vids.size()];
        if (a == b) throw MeshError("duplicate boundary vertex after snapping; increase polygon spacing");
        tr.insert_segment(a, b, tag_id);
    }
}

inline Mesh extract(const cdt::Triangulation& tr) {
    Mesh mesh;
    std::vector<int> vmap(tr.vpos.size(), -1);
    for (const auto& T : tr.tris) {
        if (!T.alive || T.region != tr.domain_region) continue;
        std::array<int, 3> tv{};
        for (int i = 0; i < 3; ++i) {
            int v = T.v[std::size_t(i)];
            if (vmap[std::size_t(v)] < 0) {
                vmap[std::size_t(v)] = int(mesh.vertices.size());
                mesh.vertices.push_back(tr.vpos[std::size_t(v)]);
            }
            tv[std::size_t(i)] = vmap[std::size_t(v)];
        }
        mesh.triangles.push_back(tv);
    }
    // boundary edges: domain triangles facing a non-domain neighbor
    for (const auto& T : tr.tris) {
        if (!T.alive || T.region != tr.domain_region) continue;
        for (int i = 0; i < 3; ++i) {
            int n = T.adj[std::size_t(i)];
            bool facing_out = n < 0 || !tr.tris[std::size_t(n)].alive || tr.tris[std::size_t(n)].region != tr.domain_region;
            if (!facing_out) continue;
            int a = T.v[std::size_t((i + 1) % 3)], b = T.v[std::size_t((i + 2) % 3)];
            auto it = tr.constraints.find(cdt::Triangulation::key(a, b));
            if (it == tr.constraints.end()) throw MeshError("untagged boundary edge in extraction");
            const cdt::SegTag& st = tr.tags[std::size_t(it->second)];
            BoundaryEdge be;
            be.a = vmap[std::size_t(a)];
            be.b = vmap[std::size_t(b)];
            be.tag = EdgeTag{TagKind(st.kind), st.cavity};
            mesh.boundary_edges.push_back(be);
        }
    }
    for (const auto& T : mesh.triangles)
        for (int i = 0; i < 3; ++i) {
            double l = dist(mesh.vertices[std::size_t(T[std::size_t(i)])], mesh.vertices[std::size_t(T[std::size_t((i + 1) % 3)])]);
            mesh.h_max = std::max(mesh.h_max, l);
        }
    for (const auto& e : mesh.boundary_edges)
        mesh.h_boundary = std::max(mesh.h_boundary, dist(mesh.vertices[std::size_t(e.a)], mesh.vertices[std::size_t(e.b)]));
    return mesh;
}

} // namespace meshdetail

inline int default_divisions(double h_target, double cavity_radius) {
    return std::max(32, int(std::ceil(4.0 * PI * cavity_radius / h_target)));
}

// meshes the outer domain with no cavities (hole-free reference problems)
inline Mesh triangulate_outer_only(const OuterDomain& outer, const TriangulateOptions& opt) {
    Vec2 blo, bhi;
    outer.bbox(blo, bhi);
    cdt::Triangulation tr(exact::SnapFrame::from_bbox(blo, bhi));
    tr.max_vertices = opt.max_vertices;
    std::vector<Vec2> outer_poly;
    if (outer.kind == OuterDomain::Kind::Box) {
        Vec2 lo = outer.lo, hi = outer.hi;
        std::array<Vec2, 4> corners{Vec2{lo.x, lo.y}, Vec2{hi.x, lo.y}, Vec2{hi.x, hi.y}, Vec2{lo.x, hi.y}};
        for (int s = 0; s < 4; ++s) {
            Vec2 a = corners[std::size_t(s)], b = corners[std::size_t((s + 1) % 4)];
            int nseg = std::max(1, int(std::ceil(dist(a, b) / opt.h_target)));
            for (int i = 0; i < nseg; ++i) outer_poly.push_back(a + (b - a) * (double(i) / nseg));
        }
        meshdetail::insert_loop(tr, outer_poly, cdt::SegTag{.kind = int(TagKind::OuterDirichlet), .cavity = -1, .no_split = false, .on_circle = false, .circle_center = {}, .circle_radius = 0.0});
    } else {
        int m = std::max(48, int(std::ceil(2.0 * PI * outer.radius / opt.h_target)));
        outer_poly = meshdetail::circle_polygon(outer.center, outer.radius, m);
        cdt::SegTag st{.kind = int(TagKind::OuterDirichlet), .cavity = -1, .no_split = false, .on_circle = true, .circle_center = outer.center, .circle_radius = outer.radius};
        meshdetail::insert_loop(tr, outer_poly, st);
    }
    tr.classify_regions({});
    cdt::Triangulation::RefineOptions ropt;
    ropt.min_angle_deg = opt.min_angle_deg;
    ropt.size_factor = opt.size_factor;
    double h = opt.h_target;
    ropt.sizing = [h](Vec2) { return h; };
    tr.refine(ropt);
    Mesh mesh = meshdetail::extract(tr);
    if (outer.kind == OuterDomain::Kind::Disk) mesh.outer_circle = Mesh::Circle{outer.center, outer.radius};
    return mesh;
}

inline Mesh triangulate(const PerforationLayout& layout, const TriangulateOptions& opt) {
    layout.validate();
    if (opt.boundary_divisions != 0 && opt.boundary_divisions < 12)
        throw ConfigError("boundary_divisions must be at least 12");
    const double scale = layout.cavity_scale();
    // cavities must be pairwise disjoint before meshing
    for (std::size_t i = 0; i < layout.cavities.size(); ++i)
        for (std::size_t j = i + 1; j < layout.cavities.size(); ++j) {
            double ri = scale * layout.radii.R2, rj = ri;
            if (layout.cavities[i].shape.kind == ReferenceShape::Kind::Disk) ri = scale * layout.cavities[i].shape.radius;
            if (layout.cavities[j].shape.kind == ReferenceShape::Kind::Disk) rj = scale * layout.cavities[j].shape.radius;
            if (dist(layout.cavities[i].center, layout.cavities[j].center) <= ri + rj)
                throw MeshError("cavities overlap; run the separation check first");
        }

    Vec2 blo, bhi;
    layout.outer.bbox(blo, bhi);
    cdt::Triangulation tr(exact::SnapFrame::from_bbox(blo, bhi));
    tr.max_vertices = opt.max_vertices;

    // outer boundary
    std::vector<Vec2> outer_poly;
    if (layout.outer.kind == OuterDomain::Kind::Box) {
        Vec2 lo = layout.outer.lo, hi = layout.outer.hi;
        std::array<Vec2, 4> corners{Vec2{lo.x, lo.y}, Vec2{hi.x, lo.y}, Vec2{hi.x, hi.y}, Vec2{lo.x, hi.y}};
        for (int s = 0; s < 4; ++s) {
            Vec2 a = corners[std::size_t(s)], b = corners[std::size_t((s + 1) % 4)];
            int nseg = std::max(1, int(std::ceil(dist(a, b) / opt.h_target)));
            for (int i = 0; i < nseg; ++i) outer_poly.push_back(a + (b - a) * (double(i) / nseg));
        }
        meshdetail::insert_loop(tr, outer_poly, cdt::SegTag{.kind = int(TagKind::OuterDirichlet), .cavity = -1, .no_split = false, .on_circle = false, .circle_center = {}, .circle_radius = 0.0});
    } else {
        int m = std::max(48, int(std::ceil(2.0 * PI * layout.outer.radius / opt.h_target)));
        outer_poly = meshdetail::circle_polygon(layout.outer.center, layout.outer.radius, m);
        cdt::SegTag st{.kind = int(TagKind::OuterDirichlet), .cavity = -1, .no_split = false, .on_circle = true, .circle_center = layout.outer.center, .circle_radius = layout.outer.radius};
        meshdetail::insert_loop(tr, outer_poly, st);
    }

    // cavity boundaries
    std::vector<meshdetail::CircleInfo> circles;
    Mesh mesh_proto;  // carries circle info across extraction
    for (int k = 0; k < int(layout.cavities.size()); ++k) {
        const CavitySpec& c = layout.cavities[std::size_t(k)];
        TagKind kind = c.bc == BcType::Dirichlet ? TagKind::CavityDirichlet : TagKind::CavityRobin;
        std::vector<Vec2> poly;
        if (c.shape.kind == ReferenceShape::Kind::Disk) {
            double r = scale * c.shape.radius;
            int m = opt.boundary_divisions > 0 ? opt.boundary_divisions : default_divisions(opt.h_target, r);
            poly = meshdetail::circle_polygon(c.center, r, m);
            circles.push_back({c.center, r, 2.0 * r * std::sin(PI / m)});
            mesh_proto.cavity_circles[k] = {c.center, r};
            cdt::SegTag st{.kind = int(kind), .cavity = k, .no_split = false, .on_circle = true, .circle_center = c.center, .circle_radius = r};
            meshdetail::insert_loop(tr, poly, st);
            continue;
        }
        {
            double per = 0.0;
            for (std::size_t i = 0, j = c.shape.vertices.size() - 1; i < c.shape.vertices.size(); j = i++)
                per += scale * dist(c.shape.vertices[j], c.shape.vertices[i]);
            int m = int(c.shape.vertices.size());
            if (m < 3) throw ConfigError("polygon cavity needs at least 3 vertices");
            // subdivide long polygon edges toward the divisions target
            int target = opt.boundary_divisions > 0 ? opt.boundary_divisions : std::max(12, m);
            double max_len = per / target;
            for (std::size_t i = 0; i < c.shape.vertices.size(); ++i) {
                Vec2 a = c.center + scale * c.shape.vertices[i];
                Vec2 b = c.center + scale * c.shape.vertices[(i + 1) % c.shape.vertices.size()];
                int nseg = std::max(1, int(std::ceil(dist(a, b) / max_len)));
                for (int s = 0; s < nseg; ++s) poly.push_back(a + (b - a) * (double(s) / nseg));
            }
            circles.push_back({c.center, 0.0, max_len});
        }
        meshdetail::insert_loop(tr, poly, cdt::SegTag{.kind = int(kind), .cavity = k, .no_split = false, .on_circle = false, .circle_center = {}, .circle_radius = 0.0});
    }

    std::vector<Vec2> hole_seeds;
    for (const auto& c : layout.cavities) hole_seeds.push_back(c.center + scale * c.inner_center);
    tr.classify_regions(hole_seeds);

    cdt::Triangulation::RefineOptions ropt;
    ropt.min_angle_deg = opt.min_angle_deg;
    ropt.size_factor = opt.size_factor;
    double h_target = opt.h_target, grade = opt.grade;
    ropt.sizing = [circles, h_target, grade](Vec2 x) { return meshdetail::sizing_at(x, h_target, grade, circles); };
    tr.refine(ropt);

    Mesh mesh = meshdetail::extract(tr);
    mesh.cavity_circles = mesh_proto.cavity_circles;
    if (layout.outer.kind == OuterDomain::Kind::Disk)
        mesh.outer_circle = Mesh::Circle{layout.outer.center, layout.outer.radius};
    return mesh;
}

// splits every triangle into 4; midpoints on disk-cavity (and disk-outer)
// boundary edges are projected back onto the true circle
inline Mesh refine_uniform(const Mesh& mesh) {
    Mesh out;
    out.vertices = mesh.vertices;
    out.cavity_circles = mesh.cavity_circles;
    out.outer_circle = mesh.outer_circle;

    std::map<std::pair<int, int>, int> midpoint;
    std::map<std::pair<int, int>, const BoundaryEdge*> bedge;
    for (const auto& e : mesh.boundary_edges) bedge[{std::min(e.a, e.b), std::max(e.a, e.b)}] = &e;

    auto mid = [&](int a, int b) {
        auto k = std::pair(std::min(a, b), std::max(a, b));
        auto it = midpoint.find(k);
        if (it != midpoint.end()) return it->second;
        Vec2 m = (mesh.vertices[std::size_t(a)] + mesh.vertices[std::size_t(b)]) * 0.5;
        auto be = bedge.find(k);
        if (be != bedge.end()) {
            const EdgeTag& tag = be->second->tag;
            const Mesh::Circle* circ = nullptr;
            if (tag.is_cavity()) {
                auto c = mesh.cavity_circles.find(tag.cavity);
                if (c != mesh.cavity_circles.end()) circ = &c->second;
            } else if (tag.kind == TagKind::OuterDirichlet && mesh.outer_circle) {
                circ = &*mesh.outer_circle;
            }
            if (circ) {
                Vec2 d = m - circ->center;
                double n = d.norm();
                if (n > 0) m = circ->center + d * (circ->radius / n);
            }
        }
        int id = int(out.vertices.size());
        out.vertices.push_back(m);
        midpoint[k] = id;
        return id;
    };

    for (const auto& T : mesh.triangles) {
        int a = T[0], b = T[1], c = T[2];
        int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
        out.triangles.push_back({a, ab, ca});
        out.triangles.push_back({b, bc, ab});
        out.triangles.push_back({c, ca, bc});
        out.triangles.push_back({ab, bc, ca});
    }
    for (const auto& e : mesh.boundary_edges) {
        int m = mid(e.a, e.b);
        out.boundary_edges.push_back({e.a, m, e.tag});
        out.boundary_edges.push_back({m, e.b, e.tag});
    }
    for (const auto& T : out.triangles) {
        for (int i = 0; i < 3; ++i)
            out.h_max = std::max(out.h_max, dist(out.vertices[std::size_t(T[std::size_t(i)])],
                                                 out.vertices[std::size_t(T[std::size_t((i + 1) % 3)])]));
        Vec2 a = out.vertices[std::size_t(T[0])], b = out.vertices[std::size_t(T[1])], c = out.vertices[std::size_t(T[2])];
        if ((b - a).cross(c - a) <= 0) throw MeshError("uniform refinement produced an inverted triangle");
    }
    for (const auto& e : out.boundary_edges)
        out.h_boundary = std::max(out.h_boundary, dist(out.vertices[std::size_t(e.a)], out.vertices[std::size_t(e.b)]));
    return out;
}

inline MeshQualityReport mesh_quality(const Mesh& mesh) {
    MeshQualityReport q;
    q.n_triangles = int(mesh.triangles.size());
    q.n_vertices = int(mesh.vertices.size());
    q.h_max = mesh.h_max;
    q.h_boundary = mesh.h_boundary;
    q.min_angle_deg = 180.0;
    q.min_signed_area = std::numeric_limits<double>::max();
    for (int t = 0; t < int(mesh.triangles.size()); ++t) {
        const auto& T = mesh.triangles[std::size_t(t)];
        Vec2 p[3] = {mesh.vertices[std::size_t(T[0])], mesh.vertices[std::size_t(T[1])], mesh.vertices[std::size_t(T[2])]};
        double area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
        q.min_signed_area = std::min(q.min_signed_area, area);
        if (area <= 0) {
            q.degenerate = true;
            continue;
        }
        double l[3];
        for (int i = 0; i < 3; ++i) l[i] = dist(p[(i + 1) % 3], p[(i + 2) % 3]);
        double lmin = std::min({l[0], l[1], l[2]}), lmax = std::max({l[0], l[1], l[2]});
        q.max_aspect = std::max(q.max_aspect, lmax / lmin);
        for (int i = 0; i < 3; ++i) {
            Vec2 u = p[(i + 1) % 3] - p[i], v = p[(i + 2) % 3] - p[i];
            double ang = std::atan2(std::abs(u.cross(v)), u.dot(v)) * 180.0 / PI;
            q.min_angle_deg = std::min(q.min_angle_deg, ang);
        }
    }
    return q;
}

// conformity audit used by tests: interior edges shared by exactly two
// triangles, boundary edges by exactly one and tagged
inline void check_conforming(const Mesh& mesh) {
    std::map<std::pair<int, int>, int> count;
    for (const auto& T : mesh.triangles)
        for (int i = 0; i < 3; ++i) {
            int a = T[std::size_t(i)], b = T[std::size_t((i + 1) % 3)];
            count[{std::min(a, b), std::max(a, b)}]++;
        }
    std::map<std::pair<int, int>, const BoundaryEdge*> bedge;
    for (const auto& e : mesh.boundary_edges) bedge[{std::min(e.a, e.b), std::max(e.a, e.b)}] = &e;
    for (const auto& [k, n] : count) {
        if (n == 1 && !bedge.count(k)) throw MeshError("untagged boundary edge");
        if (n == 2 && bedge.count(k)) throw MeshError("tagged interior edge");
        if (n > 2) throw MeshError("non-manifold edge");
    }
    for (const auto& [k, e] : bedge) {
        (void)e;
        if (!count.count(k) || count.at(k) != 1) throw MeshError("boundary edge not matching triangulation");
    }
    for (int t = 0; t < int(mesh.triangles.size()); ++t)
        if (mesh.tri_area(t) <= 0) throw MeshError("non-positive triangle area");
    // vertices must not lie strictly inside a cavity; allow the integer
    // snapping quantum (~4e-9 of the domain span)
    Vec2 lo = mesh.vertices.empty() ? Vec2{} : mesh.vertices[0], hi = lo;
    for (const auto& v : mesh.vertices) {
        lo.x = std::min(lo.x, v.x);
        lo.y = std::min(lo.y, v.y);
        hi.x = std::max(hi.x, v.x);
        hi.y = std::max(hi.y, v.y);
    }
    double snap_tol = 8.0 * std::max(hi.x - lo.x, hi.y - lo.y) / double(1 << 28);
    for (const auto& [k, c] : mesh.cavity_circles) {
        (void)k;
        for (const auto& v : mesh.vertices)
            if (dist(v, c.center) < c.radius - snap_tol) throw MeshError("vertex inside cavity");
    }
}

// ---------------------------------------------------------------------------
// text format (exact decimal round trip)
// ---------------------------------------------------------------------------

inline void write_mesh(const Mesh& mesh, std::ostream& os) {
    os << "perfhom-mesh 1\n";
    os << "vertices " << mesh.vertices.size() << "\n";
    for (const auto& v : mesh.vertices) os << format_double(v.x) << " " << format_double(v.y) << "\n";
    os << "triangles " << mesh.triangles.size() << "\n";
    for (const auto& t : mesh.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
    os << "edges " << mesh.boundary_edges.size() << "\n";
    for (const auto& e : mesh.boundary_edges) os << e.a << " " << e.b << " " << int(e.tag.kind) << " " << e.tag.cavity << "\n";
    os << "circles " << mesh.cavity_circles.size() + (mesh.outer_circle ? 1 : 0) << "\n";
    for (const auto& [k, c] : mesh.cavity_circles)
        os << k << " " << format_double(c.center.x) << " " << format_double(c.center.y) << " " << format_double(c.radius) << "\n";
    if (mesh.outer_circle)
        os << -1 << " " << format_double(mesh.outer_circle->center.x) << " " << format_double(mesh.outer_circle->center.y)
           << " " << format_double(mesh.outer_circle->radius) << "\n";
    os << "hmax " << format_double(mesh.h_max) << " hboundary " << format_double(mesh.h_boundary) << "\n";
}

inline Mesh read_mesh(std::istream& is) {
    Mesh mesh;
    std::string word;
    int version = 0;
    is >> word >> version;
    if (word != "perfhom-mesh" || version != 1) throw ConfigError("unrecognized mesh file header");
    std::size_t n = 0;
    is >> word >> n;
    if (word != "vertices") throw ConfigError("mesh file: expected vertices");
    mesh.vertices.resize(n);
    for (auto& v : mesh.vertices) is >> v.x >> v.y;
    is >> word >> n;
    if (word != "triangles") throw ConfigError("mesh file: expected triangles");
    mesh.triangles.resize(n);
    for (auto& t : mesh.triangles) is >> t[0] >> t[1] >> t[2];
    is >> word >> n;
    if (word != "edges") throw ConfigError("mesh file: expected edges");
    mesh.boundary_edges.resize(n);
    for (auto& e : mesh.boundary_edges) {
        int kind;
        is >> e.a >> e.b >> kind >> e.tag.cavity;
        e.tag.kind = TagKind(kind);
    }
    is >> word >> n;
    if (word != "circles") throw ConfigError("mesh file: expected circles");
    for (std::size_t i = 0; i < n; ++i) {
        int k;
        Mesh::Circle c;
        is >> k >> c.center.x >> c.center.y >> c.radius;
        if (k < 0) mesh.outer_circle = c;
        else mesh.cavity_circles[k] = c;
    }
    is >> word >> mesh.h_max >> word >> mesh.h_boundary;
    if (!is) throw ConfigError("truncated mesh file");
    return mesh;
}

// ---------------------------------------------------------------------------
// P1 interpolation with grid-bucket point location
// ---------------------------------------------------------------------------

class P1Interpolator {
public:
    explicit P1Interpolator(const Mesh& mesh) : mesh_(mesh) {
        Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
        Vec2 hi{-lo.x, -lo.y};
        for (const auto& v : mesh.vertices) {
            lo.x = std::min(lo.x, v.x);
            lo.y = std::min(lo.y, v.y);
            hi.x = std::max(hi.x, v.x);
            hi.y = std::max(hi.y, v.y);
        }
        lo_ = lo;
        cell_ = std::max({mesh.h_max, (hi.x - lo.x) / 256.0, 1e-300});
        nx_ = std::max(1, int((hi.x - lo.x) / cell_) + 1);
        ny_ = std::max(1, int((hi.y - lo.y) / cell_) + 1);
        buckets_.resize(std::size_t(nx_) * std::size_t(ny_));
        for (int t = 0; t < int(mesh.triangles.size()); ++t) {
            const auto& T = mesh.triangles[std::size_t(t)];
            Vec2 tl = mesh.vertices[std::size_t(T[0])], th = tl;
            for (int i = 1; i < 3; ++i) {
                const Vec2& p = mesh.vertices[std::size_t(T[std::size_t(i)])];
                tl.x = std::min(tl.x, p.x);
                tl.y = std::min(tl.y, p.y);
                th.x = std::max(th.x, p.x);
                th.y = std::max(th.y, p.y);
            }
            for (int by = cy(tl.y); by <= cy(th.y); ++by)
                for (int bx = cx(tl.x); bx <= cx(th.x); ++bx)
                    buckets_[std::size_t(by) * nx_ + bx].push_back(t);
        }
    }

    // returns triangle id and barycentric coords, or -1 if not found
    int locate(const Vec2& p, double bary[3], double tol = 1e-10) const {
        int bx = cx(p.x), by = cy(p.y);
        for (int t : buckets_[std::size_t(by) * nx_ + bx]) {
            const auto& T = mesh_.triangles[std::size_t(t)];
            Vec2 a = mesh_.vertices[std::size_t(T[0])], b = mesh_.vertices[std::size_t(T[1])], c = mesh_.vertices[std::size_t(T[2])];
            double area = (b - a).cross(c - a);
            double l0 = (b - p).cross(c - p) / area;
            double l1 = (c - p).cross(a - p) / area;
            double l2 = 1.0 - l0 - l1;
            if (l0 >= -tol && l1 >= -tol && l2 >= -tol) {
                bary[0] = l0;
                bary[1] = l1;
                bary[2] = l2;
                return t;
            }
        }
        return -1;
    }

    double eval(const std::vector<double>& nodal, const Vec2& p, bool* found = nullptr) const {
        double bary[3];
        int t = locate(p, bary);
        if (found) *found = t >= 0;
        if (t < 0) return 0.0;
        const auto& T = mesh_.triangles[std::size_t(t)];
        return bary[0] * nodal[std::size_t(T[0])] + bary[1] * nodal[std::size_t(T[1])] + bary[2] * nodal[std::size_t(T[2])];
    }

private:
    const Mesh& mesh_;
    Vec2 lo_;
    double cell_ = 1.0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> buckets_;
    int cx(double x) const { return std::clamp(int((x - lo_.x) / cell_), 0, nx_ - 1); }
    int cy(double y) const { return std::clamp(int((y - lo_.y) / cell_), 0, ny_ - 1); }
};

} // namespace perfhom
