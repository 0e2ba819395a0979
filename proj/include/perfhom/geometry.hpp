#pragma once

// Perforation layouts and the structural/geometric audits that gate every
// downstream mesh and solve: shape inclusions, pairwise separation, boundary
// clearance, covering of the domain by enlarged balls, and the boundary-weight
// norm bounds for sign-definite Robin cavities.

#include <algorithm>
#include <functional>
#include <vector>

#include "perfhom/common.hpp"

namespace perfhom {

enum class BcType { Dirichlet, Robin };

struct ReferenceShape {
    enum class Kind { Disk, Polygon };
    Kind kind = Kind::Disk;
    double radius = 1.0;           // Disk
    std::vector<Vec2> vertices;    // Polygon, counterclockwise
    bool star_shaped = true;       // declared by the caller for polygons
};

struct CavitySpec {
    Vec2 center;                   // cavity center in physical coordinates
    ReferenceShape shape;          // reference shape, physical = center + eps*eta*shape
    Vec2 inner_center;             // center of the inscribed ball, reference coords
    double inner_radius = 0.5;     // must be >= R1
    BcType bc = BcType::Dirichlet;
    bool sign_definite = false;    // Robin cavities carrying the mu*alpha lower bound
};

struct OuterDomain {
    enum class Kind { Box, Disk };
    Kind kind = Kind::Box;
    Vec2 lo, hi;                   // Box corners
    Vec2 center;                   // Disk
    double radius = 1.0;

    static OuterDomain box(Vec2 lo, Vec2 hi) {
        OuterDomain d;
        d.kind = Kind::Box;
        d.lo = lo;
        d.hi = hi;
        if (!(lo.x < hi.x && lo.y < hi.y)) throw ConfigError("outer box has empty interior");
        return d;
    }
    static OuterDomain disk(Vec2 c, double r) {
        OuterDomain d;
        d.kind = Kind::Disk;
        d.center = c;
        d.radius = r;
        if (!(r > 0)) throw ConfigError("outer disk radius must be positive");
        return d;
    }

    bool contains(const Vec2& p) const {
        if (kind == Kind::Box)
            return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
        return dist(p, center) <= radius;
    }
    double dist_to_boundary(const Vec2& p) const {
        if (kind == Kind::Box) {
            double dx = std::min(p.x - lo.x, hi.x - p.x);
            double dy = std::min(p.y - lo.y, hi.y - p.y);
            return std::min(dx, dy);
        }
        return radius - dist(p, center);
    }
    void bbox(Vec2& blo, Vec2& bhi) const {
        if (kind == Kind::Box) {
            blo = lo;
            bhi = hi;
        } else {
            blo = {center.x - radius, center.y - radius};
            bhi = {center.x + radius, center.y + radius};
        }
    }
    double area() const {
        if (kind == Kind::Box) return (hi.x - lo.x) * (hi.y - lo.y);
        return PI * radius * radius;
    }
};

struct Radii {
    double R1 = 0.5, R2 = 1.0, R3 = 1.9, R4 = 3.0;
};

// The cavity family {M_k, omega_k, bc}, the scales and the constants R1..R4.
struct PerforationLayout {
    double epsilon = 0.0;
    double eta = 1.0;
    std::vector<CavitySpec> cavities;
    Radii radii;
    OuterDomain outer;

    double cavity_scale() const { return epsilon * eta; }

    // physical radius of a disk cavity
    double disk_radius(int k) const { return cavity_scale() * cavities[k].shape.radius; }

    std::vector<int> dirichlet_set() const { return select([](const CavitySpec& c) { return c.bc == BcType::Dirichlet; }); }
    std::vector<int> robin_set() const { return select([](const CavitySpec& c) { return c.bc == BcType::Robin; }); }
    std::vector<int> robin_definite_set() const {
        return select([](const CavitySpec& c) { return c.bc == BcType::Robin && c.sign_definite; });
    }
    // M_D union M_{R,0}: the cavities that qualify for the covering condition
    std::vector<int> covering_set() const {
        return select([](const CavitySpec& c) { return c.bc == BcType::Dirichlet || (c.bc == BcType::Robin && c.sign_definite); });
    }

    void validate() const {
        if (!(epsilon > 0)) throw ConfigError("epsilon must be positive");
        if (!(eta > 0 && eta <= 1)) throw ConfigError("eta must lie in (0, 1]");
        if (cavities.empty()) throw ConfigError("layout has no cavities");
        if (!(radii.R1 < radii.R2 && radii.R2 < radii.R3 && radii.R3 < radii.R4))
            throw ConfigError("radii must satisfy R1 < R2 < R3 < R4");
        for (const auto& c : cavities)
            if (!outer.contains(c.center)) throw ConfigError("cavity center lies outside the outer domain");
    }

private:
    template <class Pred>
    std::vector<int> select(Pred pred) const {
        std::vector<int> out;
        for (int k = 0; k < int(cavities.size()); ++k)
            if (pred(cavities[k])) out.push_back(k);
        return out;
    }
};

// ---------------------------------------------------------------------------
// Layout construction
// ---------------------------------------------------------------------------

struct BcAssignment {
    enum class Kind { AllDirichlet, AllRobin, Halfspace };
    Kind kind = Kind::AllDirichlet;
    bool sign_definite = true;     // for Robin cavities
    int axis = 1;                  // Halfspace: split coordinate
    double threshold = 0.0;        // Dirichlet side is axis-coordinate > threshold
};

struct LayoutConfig {
    enum class Generator { Periodic, Explicit, Jittered };
    Generator generator = Generator::Periodic;
    double epsilon = 0.125;
    double eta = 1.0;
    double spacing_factor = 4.0;     // lattice pitch = spacing_factor * epsilon
    Vec2 offset_frac = {0.5, 0.5};   // lattice offset as a fraction of the pitch
    std::vector<Vec2> explicit_centers;
    double jitter_frac = 0.2;        // jitter amplitude as a fraction of the pitch
    std::uint64_t seed = 1;
    ReferenceShape shape;
    BcAssignment bc;
    Radii radii;
    OuterDomain outer = OuterDomain::box({0, 0}, {1, 1});
};

inline BcType assign_bc(const BcAssignment& bc, const Vec2& center, bool& sign_definite) {
    switch (bc.kind) {
        case BcAssignment::Kind::AllDirichlet:
            sign_definite = false;
            return BcType::Dirichlet;
        case BcAssignment::Kind::AllRobin:
            sign_definite = bc.sign_definite;
            return BcType::Robin;
        case BcAssignment::Kind::Halfspace: {
            double v = bc.axis == 0 ? center.x : center.y;
            if (v > bc.threshold) {
                sign_definite = false;
                return BcType::Dirichlet;
            }
            sign_definite = bc.sign_definite;
            return BcType::Robin;
        }
    }
    sign_definite = false;
    return BcType::Dirichlet;
}

inline PerforationLayout build_layout(const LayoutConfig& cfg) {
    if (!(cfg.epsilon > 0)) throw ConfigError("epsilon must be positive");
    if (!(cfg.eta > 0 && cfg.eta <= 1)) throw ConfigError("eta must lie in (0, 1]");

    PerforationLayout layout;
    layout.epsilon = cfg.epsilon;
    layout.eta = cfg.eta;
    layout.radii = cfg.radii;
    layout.outer = cfg.outer;

    std::vector<Vec2> centers;
    const double clearance = cfg.radii.R3 * cfg.epsilon;
    if (cfg.generator == LayoutConfig::Generator::Explicit) {
        centers = cfg.explicit_centers;
    } else {
        const double pitch = cfg.spacing_factor * cfg.epsilon;
        Vec2 blo, bhi;
        cfg.outer.bbox(blo, bhi);
        const long i0 = long(std::floor((blo.x - pitch) / pitch));
        const long i1 = long(std::ceil((bhi.x + pitch) / pitch));
        const long j0 = long(std::floor((blo.y - pitch) / pitch));
        const long j1 = long(std::ceil((bhi.y + pitch) / pitch));
        SplitMix64 rng(cfg.seed);
        for (long j = j0; j <= j1; ++j) {
            for (long i = i0; i <= i1; ++i) {
                Vec2 p{(double(i) + cfg.offset_frac.x) * pitch, (double(j) + cfg.offset_frac.y) * pitch};
                if (cfg.generator == LayoutConfig::Generator::Jittered) {
                    // draw both coordinates regardless of acceptance so the
                    // stream stays aligned with the (i, j) enumeration
                    double dx = rng.sym(), dy = rng.sym();
                    p.x += cfg.jitter_frac * pitch * dx;
                    p.y += cfg.jitter_frac * pitch * dy;
                }
                if (!cfg.outer.contains(p)) continue;
                if (cfg.outer.dist_to_boundary(p) < clearance) continue;
                centers.push_back(p);
            }
        }
    }
    if (centers.empty()) throw ConfigError("layout generator produced no cavities");

    for (const Vec2& c : centers) {
        CavitySpec spec;
        spec.center = c;
        spec.shape = cfg.shape;
        spec.inner_center = {0, 0};
        spec.inner_radius = cfg.radii.R1;
        spec.bc = assign_bc(cfg.bc, c, spec.sign_definite);
        layout.cavities.push_back(spec);
    }
    layout.validate();
    return layout;
}

// ---------------------------------------------------------------------------
// Assumption audits
// ---------------------------------------------------------------------------

struct CavityCheck {
    bool inclusion_outer = false;   // shape fits in B_{R2}(0)
    bool inclusion_inner = false;   // B_{R1}(y_k) fits inside the shape
    bool connected_complement = false;
    double clearance_ratio = 0.0;   // dist(M_k, boundary) / (R3 eps)
};

struct AlphaCheck {
    int cavity = -1;
    double l2sq_ratio = 0.0;   // ||alpha||_L2^2 / (c2 (eps eta)^{n-1})
    double l1_ratio = 0.0;     // ||alpha||_L1 / (c3 (eps eta)^{n-1})
    bool nonnegative = true;
    bool pass() const { return nonnegative && l2sq_ratio <= 1.0 && l1_ratio >= 1.0; }
};

struct GeometryCheckReport {
    std::vector<CavityCheck> cavity_checks;
    double separation_ratio = 0.0;        // min pairwise distance / (2 R3 eps)
    double boundary_clearance_ratio = 0.0;
    bool a1_inclusions = false;
    bool a1_separation = false;
    bool a1_boundary_clearance = false;
    bool a1_connected = false;

    bool covering_pass = false;
    bool covering_certified = false;
    Vec2 covering_worst_point;
    double covering_worst_dist_ratio = 0.0;  // worst dist / (eps R4)
    int covering_levels = 0;

    std::vector<AlphaCheck> alpha_checks;

    bool a1_pass() const { return a1_inclusions && a1_separation && a1_boundary_clearance && a1_connected; }
};

namespace detail {

inline double point_segment_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double t = std::clamp((p - a).dot(ab) / std::max(ab.norm2(), 1e-300), 0.0, 1.0);
    return dist(p, a + ab * t);
}

inline bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        if ((poly[i].y > p.y) != (poly[j].y > p.y)) {
            double xi = poly[j].x + (poly[i].x - poly[j].x) * (p.y - poly[j].y) / (poly[i].y - poly[j].y);
            if (p.x < xi) inside = !inside;
        }
    }
    return inside;
}

inline double polygon_boundary_dist(const Vec2& p, const std::vector<Vec2>& poly) {
    double d = std::numeric_limits<double>::max();
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
        d = std::min(d, point_segment_dist(p, poly[j], poly[i]));
    return d;
}

} // namespace detail

inline CavityCheck check_cavity(const PerforationLayout& layout, const CavitySpec& c) {
    CavityCheck r;
    const double R1 = layout.radii.R1, R2 = layout.radii.R2;
    if (c.shape.kind == ReferenceShape::Kind::Disk) {
        r.inclusion_outer = c.shape.radius <= R2 + 1e-12;
        r.inclusion_inner = c.inner_center.norm() + c.inner_radius <= c.shape.radius + 1e-12 && c.inner_radius >= R1 - 1e-12;
        r.connected_complement = true;
    } else {
        r.inclusion_outer = true;
        for (const Vec2& v : c.shape.vertices)
            if (v.norm() > R2 + 1e-12) r.inclusion_outer = false;
        r.inclusion_inner = c.inner_radius >= R1 - 1e-12 &&
                            detail::point_in_polygon(c.inner_center, c.shape.vertices) &&
                            detail::polygon_boundary_dist(c.inner_center, c.shape.vertices) >= c.inner_radius - 1e-12;
        r.connected_complement = c.shape.star_shaped;
    }
    r.clearance_ratio = layout.outer.dist_to_boundary(c.center) / (layout.radii.R3 * layout.epsilon);
    return r;
}

// Audits the inclusion, separation, clearance and connectedness parts of the
// structural assumption. A failed check is a report entry, never an error.
inline GeometryCheckReport check_assumption_a1(const PerforationLayout& layout) {
    layout.validate();
    GeometryCheckReport rep;
    rep.a1_inclusions = true;
    rep.a1_connected = true;
    double min_clearance = std::numeric_limits<double>::max();
    for (const auto& c : layout.cavities) {
        CavityCheck cc = check_cavity(layout, c);
        rep.a1_inclusions = rep.a1_inclusions && cc.inclusion_outer && cc.inclusion_inner;
        rep.a1_connected = rep.a1_connected && cc.connected_complement;
        min_clearance = std::min(min_clearance, cc.clearance_ratio);
        rep.cavity_checks.push_back(cc);
    }
    rep.boundary_clearance_ratio = min_clearance;
    rep.a1_boundary_clearance = min_clearance >= 1.0;

    double min_dist = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < layout.cavities.size(); ++i)
        for (std::size_t j = i + 1; j < layout.cavities.size(); ++j)
            min_dist = std::min(min_dist, dist(layout.cavities[i].center, layout.cavities[j].center));
    rep.separation_ratio = layout.cavities.size() > 1
                               ? min_dist / (2.0 * layout.radii.R3 * layout.epsilon)
                               : std::numeric_limits<double>::infinity();
    rep.a1_separation = rep.separation_ratio >= 1.0;
    return rep;
}

struct CoveringResult {
    bool pass = false;
    bool certified = false;   // conservative grid certificate succeeded
    Vec2 worst_point;
    double worst_dist = 0.0;
    int levels = 0;           // grid halvings used
};

// Certified grid test of the covering condition: every point of the outer
// domain must lie within eps*R4 of a qualifying (Dirichlet or sign-definite
// Robin) center. A sample within eps*R4 - sqrt(2)*pitch certifies its whole
// grid cell; a sample farther than eps*R4 is a counterexample witness.
inline CoveringResult check_covering(const PerforationLayout& layout, double pitch = -1.0) {
    layout.validate();
    const double cover_r = layout.epsilon * layout.radii.R4;
    if (pitch <= 0) pitch = cover_r / 8.0;
    if (pitch > cover_r / 2.0) throw ConfigError("covering sample pitch exceeds eps*R4/2: uncertifiable");

    std::vector<Vec2> centers;
    for (int k : layout.covering_set()) centers.push_back(layout.cavities[k].center);
    if (centers.empty()) throw ConfigError("covering check requires a Dirichlet or sign-definite Robin cavity");

    // bucket centers on a uniform grid of cell size cover_r
    Vec2 blo, bhi;
    layout.outer.bbox(blo, bhi);
    const double cell = cover_r;
    const int nbx = std::max(1, int(std::ceil((bhi.x - blo.x) / cell)));
    const int nby = std::max(1, int(std::ceil((bhi.y - blo.y) / cell)));
    std::vector<std::vector<int>> buckets(std::size_t(nbx) * nby);
    auto bucket_of = [&](const Vec2& p) {
        int bx = std::clamp(int((p.x - blo.x) / cell), 0, nbx - 1);
        int by = std::clamp(int((p.y - blo.y) / cell), 0, nby - 1);
        return by * nbx + bx;
    };
    for (int i = 0; i < int(centers.size()); ++i) buckets[bucket_of(centers[i])].push_back(i);

    auto nearest_dist = [&](const Vec2& p) {
        int bx = std::clamp(int((p.x - blo.x) / cell), 0, nbx - 1);
        int by = std::clamp(int((p.y - blo.y) / cell), 0, nby - 1);
        double best = std::numeric_limits<double>::max();
        for (int r = 0; r < std::max(nbx, nby) + 1; ++r) {
            for (int jy = std::max(0, by - r); jy <= std::min(nby - 1, by + r); ++jy)
                for (int jx = std::max(0, bx - r); jx <= std::min(nbx - 1, bx + r); ++jx) {
                    if (std::max(std::abs(jx - bx), std::abs(jy - by)) != r) continue;
                    for (int i : buckets[std::size_t(jy) * nbx + jx]) best = std::min(best, dist(p, centers[i]));
                }
            if (best <= double(r) * cell) break;  // closer rings cannot improve
        }
        return best;
    };

    CoveringResult res;
    for (int level = 0;; ++level) {
        const double diag = pitch * std::sqrt(2.0);
        const long nx = long(std::ceil((bhi.x - blo.x) / pitch)) + 1;
        const long ny = long(std::ceil((bhi.y - blo.y) / pitch)) + 1;
        double worst = -1.0;
        Vec2 worst_p;
        bool all_certified = true;
        for (long j = 0; j < ny; ++j) {
            for (long i = 0; i < nx; ++i) {
                Vec2 p{std::min(blo.x + double(i) * pitch, bhi.x), std::min(blo.y + double(j) * pitch, bhi.y)};
                if (!layout.outer.contains(p)) continue;
                double d = nearest_dist(p);
                if (d > worst) {
                    worst = d;
                    worst_p = p;
                }
                if (d > cover_r - diag) all_certified = false;
            }
        }
        res.worst_point = worst_p;
        res.worst_dist = worst;
        res.levels = level;
        if (worst > cover_r) {
            res.pass = false;
            res.certified = true;  // witness point is a proof of failure
            return res;
        }
        if (all_certified) {
            res.pass = true;
            res.certified = true;
            return res;
        }
        if (pitch <= cover_r / 1024.0) {
            // inconclusive at the pitch floor: report the sampled verdict
            res.pass = true;
            res.certified = false;
            return res;
        }
        pitch /= 2.0;
    }
}

// Boundary-quadrature L1/L2 norms of the Robin weights alpha_k against the
// c2/c3 bounds. alpha is evaluated at physical boundary points of cavity k.
inline std::vector<AlphaCheck> check_alpha_bounds(const PerforationLayout& layout,
                                                  const std::function<double(int, Vec2)>& alpha,
                                                  double c2, double c3, int quad_order = 4) {
    layout.validate();
    if (!(c2 > 0 && c3 > 0)) throw ConfigError("alpha bound constants c2, c3 must be positive");
    std::vector<AlphaCheck> out;
    const double scale = layout.cavity_scale();        // eps*eta
    const double denom = scale;                        // (eps*eta)^{n-1}, n = 2
    // Gauss-Legendre nodes on [-1,1]
    std::vector<double> gx, gw;
    switch (std::max(2, quad_order)) {
        case 2: gx = {-0.5773502691896257, 0.5773502691896257}; gw = {1.0, 1.0}; break;
        case 3: gx = {-0.7745966692414834, 0.0, 0.7745966692414834}; gw = {5.0 / 9, 8.0 / 9, 5.0 / 9}; break;
        default:
            gx = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
            gw = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
    }
    for (int k : layout.robin_definite_set()) {
        const CavitySpec& c = layout.cavities[k];
        AlphaCheck ac;
        ac.cavity = k;
        double l1 = 0, l2sq = 0;
        auto accumulate = [&](const Vec2& x, double w) {
            double a = alpha(k, x);
            if (a < 0) ac.nonnegative = false;
            l1 += w * std::abs(a);
            l2sq += w * a * a;
        };
        if (c.shape.kind == ReferenceShape::Kind::Disk) {
            const double r = scale * c.shape.radius;
            const int segments = 64;
            const double dth = 2.0 * PI / segments;
            for (int s = 0; s < segments; ++s) {
                double th0 = s * dth;
                for (std::size_t q = 0; q < gx.size(); ++q) {
                    double th = th0 + 0.5 * dth * (1.0 + gx[q]);
                    Vec2 x = c.center + Vec2{r * std::cos(th), r * std::sin(th)};
                    accumulate(x, 0.5 * dth * r * gw[q]);
                }
            }
        } else {
            const auto& vs = c.shape.vertices;
            for (std::size_t i = 0, j = vs.size() - 1; i < vs.size(); j = i++) {
                Vec2 a = c.center + scale * vs[j];
                Vec2 b = c.center + scale * vs[i];
                double len = dist(a, b);
                for (std::size_t q = 0; q < gx.size(); ++q) {
                    Vec2 x = a + (b - a) * (0.5 * (1.0 + gx[q]));
                    accumulate(x, 0.5 * len * gw[q]);
                }
            }
        }
        ac.l2sq_ratio = l2sq / (c2 * denom);
        ac.l1_ratio = l1 / (c3 * denom);
        out.push_back(ac);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scalar formulas
// ---------------------------------------------------------------------------

// kappa = |ln eta| + 1 in dimension 2, and 1 in dimension >= 3
inline double kappa(double eta, int n = 2) {
    if (!(eta > 0)) throw ConfigError("kappa requires eta > 0");
    if (n < 2) throw ConfigError("kappa requires n >= 2");
    if (n >= 3) return 1.0;
    return std::abs(std::log(eta)) + 1.0;
}

// theta1 = eps eta^{-n+1} mu^{-1},  theta2 = eps^2 eta^{-n+2} kappa
inline std::pair<double, double> smallness_indicators(double eps, double eta, double mu, int n = 2) {
    if (!(eps > 0)) throw ConfigError("smallness indicators require eps > 0");
    if (!(eta > 0 && eta <= 1)) throw ConfigError("smallness indicators require eta in (0,1]");
    if (!(mu >= 1)) throw ConfigError("smallness indicators require mu >= 1");
    double theta1 = eps * std::pow(eta, double(-n + 1)) / mu;
    double theta2 = eps * eps * std::pow(eta, double(-n + 2)) * kappa(eta, n);
    return {theta1, theta2};
}

} // namespace perfhom
