#pragma once

// Constrained Delaunay triangulation with Ruppert-style refinement.
//
// Bowyer-Watson insertion over snapped integer coordinates (see
// predicates.hpp). Constrained segments act as cavity walls, missing segments
// are recovered by recursive midpoint insertion, regions (exterior / holes /
// domain) are flood-filled across unconstrained edges, and refinement splits
// encroached segments and bad triangles until the min-angle and sizing
// criteria hold. All decisions reduce to exact integer predicates, so the
// construction is deterministic and immune to near-degenerate inputs such as
// cocircular polygonized circles.

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <unordered_map>
#include <vector>

#include "perfhom/common.hpp"
#include "perfhom/predicates.hpp"

namespace perfhom::cdt {

using exact::IPoint;

struct SegTag {
    int kind = 0;        // mesh-level tag kind, opaque here
    int cavity = -1;     // cavity index for cavity loops
    bool no_split = false;
    // circular segments: split points are projected back onto the circle
    bool on_circle = false;
    Vec2 circle_center;
    double circle_radius = 0.0;
};

constexpr int REGION_UNSET = -2;
constexpr int REGION_EXTERIOR = 0;

class Triangulation {
public:
    struct Tri {
        std::array<int, 3> v{-1, -1, -1};     // CCW
        std::array<int, 3> adj{-1, -1, -1};   // adj[i] faces edge (v[i+1], v[i+2])
        int region = REGION_UNSET;
        bool alive = false;
    };

    exact::SnapFrame frame;
    std::vector<IPoint> vq;
    std::vector<Vec2> vpos;
    std::vector<Tri> tris;
    std::vector<int> v2t;  // one alive incident triangle per vertex

    std::map<std::pair<int, int>, int> constraints;  // canonical edge -> tag id
    std::vector<SegTag> tags;

    int domain_region = -1;
    std::size_t max_vertices = 2'000'000;

    explicit Triangulation(const exact::SnapFrame& f) : frame(f) {
        // two frame triangles covering the inflated box
        Vec2 lo = f.origin;
        double span = f.step * double(1 << 28);
        Vec2 hi = {lo.x + 2.0 * span, lo.y + 2.0 * span};
        int a = add_vertex(f.snap({lo.x, lo.y}));
        int b = add_vertex(f.snap({hi.x, lo.y}));
        int c = add_vertex(f.snap({hi.x, hi.y}));
        int d = add_vertex(f.snap({lo.x, hi.y}));
        int t0 = add_tri(a, b, c);
        int t1 = add_tri(a, c, d);
        tris[t0].adj = {-1, t1, -1};
        tris[t1].adj = {-1, -1, t0};
        v2t[a] = t0; v2t[b] = t0; v2t[c] = t0; v2t[d] = t1;
    }

    int n_alive() const {
        int n = 0;
        for (const auto& t : tris) n += t.alive ? 1 : 0;
        return n;
    }

    static std::pair<int, int> key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }
    bool is_constrained(int a, int b) const { return constraints.count(key(a, b)) > 0; }

    // ------------------------------------------------------------------
    // point location
    // ------------------------------------------------------------------

    struct Loc {
        enum Kind { Inside, OnEdge, OnVertex, Outside } kind = Outside;
        int tri = -1;
        int sub = -1;  // edge index or vertex id
    };

    Loc locate(const IPoint& p, int hint = -1) const {
        int t = (hint >= 0 && tris[std::size_t(hint)].alive) ? hint : first_alive();
        std::size_t steps = 0, limit = tris.size() + 16;
        while (true) {
            const Tri& T = tris[std::size_t(t)];
            int o[3];
            for (int i = 0; i < 3; ++i) o[i] = exact::orient(vq[T.v[(i + 1) % 3]], vq[T.v[(i + 2) % 3]], p);
            int neg = -1;
            for (int i = 0; i < 3; ++i)
                if (o[i] < 0) { neg = i; break; }
            if (neg < 0) {
                int zeros = (o[0] == 0) + (o[1] == 0) + (o[2] == 0);
                Loc loc;
                loc.tri = t;
                if (zeros == 0) { loc.kind = Loc::Inside; }
                else if (zeros == 1) {
                    loc.kind = Loc::OnEdge;
                    for (int i = 0; i < 3; ++i) if (o[i] == 0) loc.sub = i;
                } else {
                    loc.kind = Loc::OnVertex;
                    for (int i = 0; i < 3; ++i)
                        if (o[(i + 1) % 3] == 0 && o[(i + 2) % 3] == 0) loc.sub = T.v[i];
                }
                return loc;
            }
            int next = T.adj[neg];
            if (next < 0) return Loc{};  // outside hull
            t = next;
            if (++steps > limit) return locate_exhaustive(p);
        }
    }

    // walk from a triangle toward a target; reports the first constrained
    // edge blocking the visibility path
    struct Walk {
        enum Kind { Reached, Blocked, OutsideHull } kind = OutsideHull;
        int tri = -1;
        int block_a = -1, block_b = -1;
    };

    Walk walk_toward(int t_start, const IPoint& p) const {
        int t = t_start;
        std::size_t steps = 0, limit = tris.size() + 16;
        while (true) {
            const Tri& T = tris[std::size_t(t)];
            int neg = -1;
            for (int i = 0; i < 3; ++i)
                if (exact::orient(vq[T.v[(i + 1) % 3]], vq[T.v[(i + 2) % 3]], p) < 0) { neg = i; break; }
            if (neg < 0) { Walk w; w.kind = Walk::Reached; w.tri = t; return w; }
            int u = T.v[(neg + 1) % 3], wv = T.v[(neg + 2) % 3];
            if (is_constrained(u, wv)) { Walk w; w.kind = Walk::Blocked; w.block_a = u; w.block_b = wv; return w; }
            int next = T.adj[neg];
            if (next < 0) return Walk{};
            t = next;
            if (++steps > limit) return Walk{};
        }
    }

    // ------------------------------------------------------------------
    // insertion
    // ------------------------------------------------------------------

    struct InsertResult {
        int vertex = -1;
        bool created = false;
        bool ok = false;
        int block_a = -1, block_b = -1;  // set when landing on a constrained edge
        std::vector<int> new_tris;
        std::vector<std::pair<int, int>> touched_constraints;
    };

    InsertResult insert_point(const Vec2& p, int hint = -1) { return insert_snapped(frame.snap(p), hint); }

    InsertResult insert_snapped(const IPoint& q, int hint = -1) {
        InsertResult res;
        auto it = point_index.find(pkey(q));
        if (it != point_index.end()) {
            res.vertex = it->second;
            res.ok = true;
            return res;
        }
        if (vq.size() >= max_vertices)
            throw MeshError("vertex budget exceeded during triangulation (" + std::to_string(max_vertices) + ")");
        Loc loc = locate(q, hint);
        if (loc.kind == Loc::Outside) return res;
        if (loc.kind == Loc::OnVertex) {
            res.vertex = loc.sub;
            res.ok = true;
            return res;
        }
        std::vector<int> seeds{loc.tri};
        if (loc.kind == Loc::OnEdge) {
            const Tri& T = tris[std::size_t(loc.tri)];
            int u = T.v[(loc.sub + 1) % 3], w = T.v[(loc.sub + 2) % 3];
            if (is_constrained(u, w)) {
                res.block_a = u;
                res.block_b = w;
                return res;  // caller must split the constraint instead
            }
            if (T.adj[loc.sub] >= 0) seeds.push_back(T.adj[loc.sub]);
        }
        Cavity cav = collect_cavity(q, seeds);
        return commit_insert(q, cav);
    }

    // ------------------------------------------------------------------
    // cavity machinery (exposed for the refinement dry-run)
    // ------------------------------------------------------------------

    struct Wall {
        int u = -1, w = -1;   // oriented so the cavity interior is left of u->w
        int outside = -1;     // neighbor triangle or -1
        int owner_region = REGION_UNSET;
    };
    struct Cavity {
        std::vector<int> dead;
        std::vector<Wall> walls;
    };

    Cavity collect_cavity(const IPoint& q, const std::vector<int>& seeds) const {
        Cavity cav;
        std::vector<int> stack;
        std::unordered_map<int, bool> in_cav;
        for (int s : seeds) {
            if (!in_cav.count(s)) {
                in_cav[s] = true;
                stack.push_back(s);
            }
        }
        while (!stack.empty()) {
            int ti = stack.back();
            stack.pop_back();
            cav.dead.push_back(ti);
            const Tri& T = tris[std::size_t(ti)];
            for (int i = 0; i < 3; ++i) {
                int u = T.v[(i + 1) % 3], w = T.v[(i + 2) % 3];
                int n = T.adj[i];
                bool wall = true;
                if (n >= 0 && !is_constrained(u, w) && !in_cav.count(n)) {
                    const Tri& N = tris[std::size_t(n)];
                    if (exact::incircle(vq[N.v[0]], vq[N.v[1]], vq[N.v[2]], q) > 0) {
                        in_cav[n] = true;
                        stack.push_back(n);
                        wall = false;
                    }
                } else if (n >= 0 && in_cav.count(n)) {
                    wall = false;
                }
                if (wall) cav.walls.push_back({u, w, n, T.region});
            }
        }
        return cav;
    }

    InsertResult commit_insert(const IPoint& q, const Cavity& cav) {
        InsertResult res;
        for (const Wall& w : cav.walls)
            if (exact::orient(vq[w.u], vq[w.w], q) <= 0) return res;  // degenerate fan, refuse
        int pv = add_vertex(q);
        res.vertex = pv;
        res.created = true;
        res.ok = true;
        for (int ti : cav.dead) tris[std::size_t(ti)].alive = false;
        std::unordered_map<int, int> start_at, end_at;  // wall endpoint -> fan tri
        std::vector<int> fan;
        fan.reserve(cav.walls.size());
        for (const Wall& wall : cav.walls) {
            int nt = add_tri(wall.u, wall.w, pv);
            tris[std::size_t(nt)].region = wall.owner_region;
            tris[std::size_t(nt)].adj[2] = wall.outside;
            if (wall.outside >= 0) set_adj(wall.outside, wall.w, wall.u, nt);
            start_at[wall.u] = nt;
            end_at[wall.w] = nt;
            fan.push_back(nt);
            if (is_constrained(wall.u, wall.w)) res.touched_constraints.push_back(key(wall.u, wall.w));
        }
        for (std::size_t i = 0; i < fan.size(); ++i) {
            int nt = fan[i];
            const Tri& T = tris[std::size_t(nt)];
            int u = T.v[0], w = T.v[1];
            tris[std::size_t(nt)].adj[0] = start_at.at(w);  // edge (w, p)
            tris[std::size_t(nt)].adj[1] = end_at.at(u);    // edge (p, u)
            v2t[std::size_t(u)] = nt;
            v2t[std::size_t(w)] = nt;
        }
        v2t[std::size_t(pv)] = fan.front();
        res.new_tris = std::move(fan);
        return res;
    }

    // ------------------------------------------------------------------
    // constrained segments
    // ------------------------------------------------------------------

    int add_tag(const SegTag& t) {
        tags.push_back(t);
        return int(tags.size()) - 1;
    }

    bool edge_exists(int a, int b) const {
        int t0 = v2t[std::size_t(a)];
        if (t0 < 0) return false;
        // rotate around a in both directions
        for (int dir = 0; dir < 2; ++dir) {
            int t = t0;
            std::size_t guard = 0;
            while (t >= 0 && guard++ < tris.size() + 4) {
                const Tri& T = tris[std::size_t(t)];
                int ia = -1;
                for (int i = 0; i < 3; ++i)
                    if (T.v[i] == a) ia = i;
                if (ia < 0) break;
                if (T.v[(ia + 1) % 3] == b || T.v[(ia + 2) % 3] == b) return true;
                t = T.adj[dir == 0 ? (ia + 2) % 3 : (ia + 1) % 3];
                if (t == t0) break;
            }
        }
        return false;
    }

    // split point of segment (a,b): midpoint, projected to the circle for
    // circular segments
    IPoint split_point(int a, int b, int tag_id) const {
        const SegTag& t = tags[std::size_t(tag_id)];
        if (t.on_circle && t.circle_radius > 0) {
            Vec2 m = (vpos[std::size_t(a)] + vpos[std::size_t(b)]) * 0.5;
            Vec2 d = m - t.circle_center;
            double n = d.norm();
            if (n > 0) {
                Vec2 p = t.circle_center + d * (t.circle_radius / n);
                if (frame.representable(p)) return frame.snap(p);
            }
        }
        return int_midpoint(vq[std::size_t(a)], vq[std::size_t(b)]);
    }

    // recovers segment (a,b) (split-point insertion as needed) and registers
    // all resulting subsegments with the tag
    void insert_segment(int a, int b, int tag_id) {
        if (a == b) throw MeshError("zero-length constraint segment");
        if (edge_exists(a, b)) {
            constraints[key(a, b)] = tag_id;
            return;
        }
        IPoint m = split_point(a, b, tag_id);
        if (m == vq[std::size_t(a)] || m == vq[std::size_t(b)])
            throw MeshError("constraint segment could not be recovered (snapped length too small)");
        InsertResult r = insert_snapped(m, v2t[std::size_t(a)]);
        if (!r.ok) throw MeshError("constraint recovery insertion failed");
        insert_segment(a, r.vertex, tag_id);
        insert_segment(r.vertex, b, tag_id);
    }

    // ------------------------------------------------------------------
    // region classification
    // ------------------------------------------------------------------

    // exterior = 0, hole i = 1+i, domain = 1+n_holes
    void classify_regions(const std::vector<Vec2>& hole_seeds) {
        for (auto& t : tris)
            if (t.alive) t.region = REGION_UNSET;
        flood(v2t[0], REGION_EXTERIOR);
        for (std::size_t h = 0; h < hole_seeds.size(); ++h) {
            Loc loc = locate(frame.snap(hole_seeds[h]));
            if (loc.kind == Loc::Outside || loc.tri < 0) throw MeshError("hole seed outside triangulation");
            if (tris[std::size_t(loc.tri)].region != REGION_UNSET) throw MeshError("hole seed not enclosed by its boundary");
            flood(loc.tri, int(1 + h));
        }
        domain_region = int(1 + hole_seeds.size());
        int first = -1;
        for (int i = 0; i < int(tris.size()); ++i)
            if (tris[std::size_t(i)].alive && tris[std::size_t(i)].region == REGION_UNSET) { first = i; break; }
        if (first < 0) throw MeshError("empty domain after region classification");
        flood(first, domain_region);
        for (const auto& t : tris)
            if (t.alive && t.region == REGION_UNSET)
                throw MeshError("domain is not connected");
    }

    // ------------------------------------------------------------------
    // refinement
    // ------------------------------------------------------------------

    struct RefineOptions {
        double min_angle_deg = 20.0;
        double size_factor = 0.62;  // split when circumradius > size_factor * sizing
        std::function<double(Vec2)> sizing;
    };

    void refine(const RefineOptions& opt) {
        const double B = 1.0 / (2.0 * std::sin(opt.min_angle_deg * PI / 180.0));
        std::deque<std::pair<int, int>> seg_queue;
        std::map<std::pair<int, int>, bool> seg_inq;
        std::deque<int> tri_queue;
        std::vector<std::uint8_t> deferred(tris.size(), 0);

        auto circum = [&](const Tri& T, Vec2& cc, double& R, double& lmin) {
            Vec2 A = vpos[std::size_t(T.v[0])], Bp = vpos[std::size_t(T.v[1])], C = vpos[std::size_t(T.v[2])];
            Vec2 ab = Bp - A, ac = C - A;
            double d = 2.0 * ab.cross(ac);
            double ab2 = ab.norm2(), ac2 = ac.norm2();
            cc = {A.x + (ac.y * ab2 - ab.y * ac2) / d, A.y + (ab.x * ac2 - ac.x * ab2) / d};
            R = dist(cc, A);
            lmin = std::sqrt(std::min({ab.norm2(), ac.norm2(), (C - Bp).norm2()}));
        };
        auto is_bad = [&](int ti) {
            const Tri& T = tris[std::size_t(ti)];
            if (!T.alive || T.region != domain_region) return false;
            Vec2 cc;
            double R, lmin;
            circum(T, cc, R, lmin);
            if (R / lmin > B) return true;
            Vec2 cen = (vpos[std::size_t(T.v[0])] + vpos[std::size_t(T.v[1])] + vpos[std::size_t(T.v[2])]) / 3.0;
            return R > opt.size_factor * opt.sizing(cen);
        };
        auto apex_encroaches = [&](int a, int b) {
            // in a Delaunay triangulation it suffices to test the apexes of
            // the (at most two) triangles adjacent to the segment
            int t0 = find_edge_tri(a, b);
            if (t0 < 0) return false;
            const Tri& T = tris[std::size_t(t0)];
            for (int pass = 0; pass < 2; ++pass) {
                const Tri* Tp = &T;
                int cur = t0;
                if (pass == 1) {
                    int ia = edge_index(T, a, b);
                    cur = T.adj[ia];
                    if (cur < 0) break;
                    Tp = &tris[std::size_t(cur)];
                }
                for (int i = 0; i < 3; ++i) {
                    int v = Tp->v[i];
                    if (v != a && v != b && exact::in_diametral_circle(vq[std::size_t(a)], vq[std::size_t(b)], vq[std::size_t(v)]) > 0)
                        return true;
                }
            }
            return false;
        };
        auto push_seg = [&](std::pair<int, int> k) {
            if (!seg_inq[k]) {
                seg_inq[k] = true;
                seg_queue.push_back(k);
            }
        };
        auto push_tris = [&](const std::vector<int>& ids) {
            for (int t : ids) tri_queue.push_back(t);
        };
        auto after_insert = [&](const InsertResult& r) {
            push_tris(r.new_tris);
            for (auto k : r.touched_constraints)
                if (constraints.count(k) && apex_encroaches(k.first, k.second)) push_seg(k);
        };
        auto do_split = [&](std::pair<int, int> k) -> bool {
            int tag_id = constraints.at(k);
            if (tags[std::size_t(tag_id)].no_split) return false;
            if (exact::seg_length2(vq[std::size_t(k.first)], vq[std::size_t(k.second)]) <= 16) return false;
            IPoint m = split_point(k.first, k.second, tag_id);
            if (m == vq[std::size_t(k.first)] || m == vq[std::size_t(k.second)]) return false;
            constraints.erase(k);
            InsertResult r = insert_snapped(m, v2t[std::size_t(k.first)]);
            if (!r.ok) throw MeshError("encroached segment split failed");
            insert_segment(k.first, r.vertex, tag_id);
            insert_segment(r.vertex, k.second, tag_id);
            after_insert(r);
            for (auto sub : {key(k.first, r.vertex), key(r.vertex, k.second)})
                if (apex_encroaches(sub.first, sub.second)) push_seg(sub);
            return true;
        };
        auto defer = [&](int ti) {
            if (deferred.size() < tris.size()) deferred.resize(tris.size(), 0);
            if (deferred[std::size_t(ti)] < 3) {
                ++deferred[std::size_t(ti)];
                tri_queue.push_back(ti);
            }
        };

        for (const auto& [k, tag_id] : constraints) {
            (void)tag_id;
            if (apex_encroaches(k.first, k.second)) push_seg(k);
        }
        for (int i = 0; i < int(tris.size()); ++i)
            if (is_bad(i)) tri_queue.push_back(i);

        while (!seg_queue.empty() || !tri_queue.empty()) {
            if (!seg_queue.empty()) {
                auto k = seg_queue.front();
                seg_queue.pop_front();
                seg_inq[k] = false;
                if (!constraints.count(k)) continue;
                if (!apex_encroaches(k.first, k.second)) continue;
                do_split(k);
                continue;
            }
            int ti = tri_queue.front();
            tri_queue.pop_front();
            if (!is_bad(ti)) continue;
            const Tri& T = tris[std::size_t(ti)];
            Vec2 cc;
            double R, lmin;
            circum(T, cc, R, lmin);
            if (!frame.representable(cc)) continue;
            IPoint q = frame.snap(cc);
            Walk w = walk_toward(ti, q);
            if (w.kind == Walk::Blocked) {
                auto k = key(w.block_a, w.block_b);
                bool progress = false;
                if (exact::in_diametral_circle(vq[std::size_t(w.block_a)], vq[std::size_t(w.block_b)], q) > 0)
                    progress = do_split(k);
                if (progress) tri_queue.push_back(ti);
                else defer(ti);
                continue;
            }
            if (w.kind != Walk::Reached || tris[std::size_t(w.tri)].region != domain_region) continue;
            if (point_index.count(pkey(q))) continue;
            Loc loc = locate(q, w.tri);
            if (loc.kind == Loc::Outside || loc.kind == Loc::OnVertex) continue;
            std::vector<int> seeds{loc.tri};
            if (loc.kind == Loc::OnEdge) {
                const Tri& L = tris[std::size_t(loc.tri)];
                int u = L.v[(loc.sub + 1) % 3], wv = L.v[(loc.sub + 2) % 3];
                if (is_constrained(u, wv)) {
                    push_seg(key(u, wv));
                    continue;
                }
                if (L.adj[loc.sub] >= 0) seeds.push_back(L.adj[loc.sub]);
            }
            Cavity cav = collect_cavity(q, seeds);
            // Ruppert rule: if the circumcenter encroaches a constrained wall,
            // split those segments instead of inserting the center.
            std::vector<std::pair<int, int>> encroached;
            for (const Wall& wall : cav.walls)
                if (is_constrained(wall.u, wall.w) &&
                    exact::in_diametral_circle(vq[std::size_t(wall.u)], vq[std::size_t(wall.w)], q) > 0)
                    encroached.push_back(key(wall.u, wall.w));
            if (!encroached.empty()) {
                bool progress = false;
                for (auto k : encroached)
                    if (constraints.count(k)) progress = do_split(k) || progress;
                if (progress) tri_queue.push_back(ti);
                else defer(ti);
                continue;
            }
            InsertResult r = commit_insert(q, cav);
            if (!r.ok) continue;
            deferred.resize(tris.size(), 0);
            after_insert(r);
        }
    }

private:
    std::unordered_map<std::uint64_t, int> point_index;

    static std::uint64_t pkey(const IPoint& q) {
        return (std::uint64_t(std::uint32_t(q.x)) << 32) ^ std::uint64_t(std::uint32_t(q.y)) ^
               (std::uint64_t(q.x < 0) << 63) ^ (std::uint64_t(q.y < 0) << 62);
    }
    static IPoint int_midpoint(const IPoint& a, const IPoint& b) {
        auto half = [](std::int64_t s) { return s >= 0 ? s / 2 : -((-s + 1) / 2); };
        return {half(a.x + b.x), half(a.y + b.y)};
    }

    int add_vertex(const IPoint& q) {
        vq.push_back(q);
        vpos.push_back(frame.unsnap(q));
        v2t.push_back(-1);
        point_index[pkey(q)] = int(vq.size()) - 1;
        return int(vq.size()) - 1;
    }
    int add_tri(int a, int b, int c) {
        Tri t;
        t.v = {a, b, c};
        t.alive = true;
        tris.push_back(t);
        return int(tris.size()) - 1;
    }
    int first_alive() const {
        for (int i = int(tris.size()) - 1; i >= 0; --i)
            if (tris[std::size_t(i)].alive) return i;
        throw MeshError("empty triangulation");
    }
    static int edge_index(const Tri& T, int a, int b) {
        for (int i = 0; i < 3; ++i) {
            int u = T.v[(i + 1) % 3], w = T.v[(i + 2) % 3];
            if ((u == a && w == b) || (u == b && w == a)) return i;
        }
        return -1;
    }
    void set_adj(int ti, int a, int b, int neighbor) {
        Tri& T = tris[std::size_t(ti)];
        int i = edge_index(T, a, b);
        if (i < 0) throw MeshError("adjacency stitch failed");
        T.adj[i] = neighbor;
    }
    int find_edge_tri(int a, int b) const {
        int t0 = v2t[std::size_t(a)];
        if (t0 < 0) return -1;
        for (int dir = 0; dir < 2; ++dir) {
            int t = t0;
            std::size_t guard = 0;
            while (t >= 0 && guard++ < tris.size() + 4) {
                const Tri& T = tris[std::size_t(t)];
                int ia = -1;
                for (int i = 0; i < 3; ++i)
                    if (T.v[i] == a) ia = i;
                if (ia < 0) break;
                if (T.v[(ia + 1) % 3] == b || T.v[(ia + 2) % 3] == b) return t;
                t = T.adj[dir == 0 ? (ia + 2) % 3 : (ia + 1) % 3];
                if (t == t0) break;
            }
        }
        return -1;
    }
    Loc locate_exhaustive(const IPoint& p) const {
        for (int i = 0; i < int(tris.size()); ++i) {
            const Tri& T = tris[std::size_t(i)];
            if (!T.alive) continue;
            int o[3];
            bool ok = true;
            for (int j = 0; j < 3; ++j) {
                o[j] = exact::orient(vq[T.v[(j + 1) % 3]], vq[T.v[(j + 2) % 3]], p);
                if (o[j] < 0) ok = false;
            }
            if (!ok) continue;
            Loc loc;
            loc.tri = i;
            int zeros = (o[0] == 0) + (o[1] == 0) + (o[2] == 0);
            if (zeros == 0) loc.kind = Loc::Inside;
            else if (zeros == 1) {
                loc.kind = Loc::OnEdge;
                for (int j = 0; j < 3; ++j) if (o[j] == 0) loc.sub = j;
            } else {
                loc.kind = Loc::OnVertex;
                for (int j = 0; j < 3; ++j)
                    if (o[(j + 1) % 3] == 0 && o[(j + 2) % 3] == 0) loc.sub = T.v[j];
            }
            return loc;
        }
        return Loc{};
    }

    void flood(int start, int region) {
        if (start < 0 || !tris[std::size_t(start)].alive) throw MeshError("flood from dead triangle");
        std::vector<int> stack{start};
        tris[std::size_t(start)].region = region;
        while (!stack.empty()) {
            int ti = stack.back();
            stack.pop_back();
            const Tri T = tris[std::size_t(ti)];
            for (int i = 0; i < 3; ++i) {
                int n = T.adj[i];
                if (n < 0 || !tris[std::size_t(n)].alive) continue;
                if (tris[std::size_t(n)].region != REGION_UNSET) continue;
                if (is_constrained(T.v[(i + 1) % 3], T.v[(i + 2) % 3])) continue;
                tris[std::size_t(n)].region = region;
                stack.push_back(n);
            }
        }
    }
};

} // namespace perfhom::cdt
