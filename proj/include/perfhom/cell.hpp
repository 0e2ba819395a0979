#pragma once

// Periodic cell problems on the square (-2,2)^2 minus the disk B_eta(0):
// the Dirichlet corrector v0, the compatible Neumann problem v1 with flux
// constant c4 = |cell| / |hole boundary|, the Robin cell problem v_mu, the
// optional second corrector v2, and the auxiliary X problem on the annulus
// B_R3 \ B_eta. Periodicity is enforced by vertex identification on exactly
// matching boundary traces, not by penalties.

#include <memory>

#include "perfhom/eigs.hpp"
#include "perfhom/fem.hpp"

namespace perfhom {

struct CellField {
    enum class Kind { V0, V1, V2, VMu, X };
    Kind kind = Kind::V0;
    double eta = 1.0;
    double epsmu = 0.0;  // VMu only
    std::shared_ptr<const Mesh> mesh;
    std::vector<double> values;
    double solve_residual = 0.0;
    double compat_residual = 0.0;  // pure-Neumann compatibility defect (V1/V2)
};

struct CellMeshOptions {
    double h_target = 0.1;
    int hole_divisions = 0;  // 0: default from h_target
    double min_angle_deg = 20.0;
    std::size_t max_vertices = 400'000;
    double grade = 0.9;
};

class PeriodicCell {
public:
    PeriodicCell(double eta, CellMeshOptions opt = {}) : eta_(eta) {
        if (!(eta > 0 && eta < 2)) throw ConfigError("cell hole radius must lie in (0, 2)");
        build_mesh(opt);
        BcPolicy open{.outer_dirichlet = false, .cavity_dirichlet = false};
        FemSystem sys(*mesh_, CoefficientField::laplace(), open);
        const int n = int(mesh_->vertices.size());
        // fold matrices and boundary weights through the periodic identification
        fold_index_.assign(std::size_t(n), -1);
        for (int v = 0; v < n; ++v)
            if (master_[std::size_t(v)] == v) {
                fold_index_[std::size_t(v)] = n_fold_;
                ++n_fold_;
            }
        auto fidx = [&](int v) { return fold_index_[std::size_t(master_[std::size_t(v)])]; };
        std::vector<Eigen::Triplet<double>> tk, tm;
        for (int c = 0; c < sys.K.outerSize(); ++c)
            for (SpMat::InnerIterator it(sys.K, c); it; ++it)
                tk.emplace_back(fidx(int(it.row())), fidx(int(it.col())), it.value());
        for (int c = 0; c < sys.M.outerSize(); ++c)
            for (SpMat::InnerIterator it(sys.M, c); it; ++it)
                tm.emplace_back(fidx(int(it.row())), fidx(int(it.col())), it.value());
        K_.resize(n_fold_, n_fold_);
        M_.resize(n_fold_, n_fold_);
        K_.setFromTriplets(tk.begin(), tk.end());
        M_.setFromTriplets(tm.begin(), tm.end());
        load_ = Vector::Zero(n_fold_);
        Vector full_load = sys.assemble_load([](Vec2) { return 1.0; });
        for (int v = 0; v < n; ++v) load_[fidx(v)] += full_load[v];
        hole_weight_fold_ = Vector::Zero(n_fold_);
        for (int v = 0; v < n; ++v)
            if (sys.robin_weight[std::size_t(v)] > 0) {
                hole_weight_fold_[fidx(v)] += sys.robin_weight[std::size_t(v)];
                hole_nodes_.push_back(v);
            }
        area_ = mesh_->total_area();
        perimeter_ = hole_weight_fold_.sum();
        // pin the pure-Neumann kernel at the corner vertex (a master far from
        // the hole)
        pin_ = -1;
        double best = -1;
        for (int v = 0; v < n; ++v) {
            if (master_[std::size_t(v)] != v || sys.robin_weight[std::size_t(v)] > 0) continue;
            double d = mesh_->vertices[std::size_t(v)].norm();
            if (d > best) {
                best = d;
                pin_ = fidx(v);
            }
        }
    }

    const Mesh& mesh() const { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
    double eta() const { return eta_; }
    double area() const { return area_; }
    double hole_perimeter() const { return perimeter_; }
    double c4_discrete() const { return area_ / perimeter_; }
    double c4_analytic() const { return (16.0 - PI * eta_ * eta_) / (2.0 * PI * eta_); }

    double integral(const std::vector<double>& v) const {
        double s = 0;
        for (int t = 0; t < int(mesh_->triangles.size()); ++t) {
            const auto& T = mesh_->triangles[std::size_t(t)];
            s += mesh_->tri_area(t) * (v[std::size_t(T[0])] + v[std::size_t(T[1])] + v[std::size_t(T[2])]) / 3.0;
        }
        return s;
    }
    double hole_boundary_integral(const std::vector<double>& v) const {
        double s = 0;
        for (int vtx : hole_nodes_) s += hole_weight(vtx) * v[std::size_t(vtx)];
        return s;
    }
    double hole_boundary_mean(const std::vector<double>& v) const { return hole_boundary_integral(v) / perimeter_; }

    double max_periodic_mismatch(const std::vector<double>& v) const {
        double worst = 0;
        for (std::size_t i = 0; i < v.size(); ++i)
            worst = std::max(worst, std::abs(v[i] - v[std::size_t(master_[i])]));
        return worst;
    }

    // -Delta v0 = 1, v0 = 0 on the hole, periodic on the square
    CellField solve_v0() const {
        std::vector<bool> constrained(std::size_t(n_fold_), false);
        for (int v : hole_nodes_) constrained[std::size_t(fold_of(v))] = true;
        double res = 0;
        Vector u = solve_reduced(K_, load_, constrained, &res);
        CellField f = make_field(CellField::Kind::V0, u, 0.0);
        f.solve_residual = res;
        return f;
    }

    // -Delta v1 = 1, radial derivative c4 on the hole, zero hole mean (the
    // compatible pure-Neumann problem; c4 uses the discrete area/perimeter
    // quotient so the folded load sums to zero exactly)
    CellField solve_v1() const {
        Vector rhs = load_ - c4_discrete() * hole_weight_fold_;
        double compat = std::abs(rhs.sum());
        if (compat > 1e-8 * std::max(1.0, load_.sum()))
            throw NonConvergence("cell compatibility defect too large (quadrature inconsistency)", 0, compat);
        std::vector<bool> constrained(std::size_t(n_fold_), false);
        constrained[std::size_t(pin_)] = true;
        double res = 0;
        Vector u = solve_reduced(K_, rhs, constrained, &res);
        CellField f = make_field(CellField::Kind::V1, u, 0.0);
        f.solve_residual = res;
        double shift = hole_boundary_mean(f.values);
        for (auto& x : f.values) x -= shift;
        f.compat_residual = compat;
        return f;
    }

    // -Delta v = 1 with the Robin condition  dv/d|xi| = epsmu * v  on the hole
    CellField solve_vmu(double epsmu) const {
        if (!(epsmu > 0)) throw ConfigError("solve_vmu requires eps*mu > 0");
        std::vector<Eigen::Triplet<double>> td;
        for (int i = 0; i < n_fold_; ++i)
            if (hole_weight_fold_[i] != 0.0) td.emplace_back(i, i, epsmu * hole_weight_fold_[i]);
        SpMat B(n_fold_, n_fold_);
        B.setFromTriplets(td.begin(), td.end());
        SpMat A = K_ + B;
        std::vector<bool> constrained(std::size_t(n_fold_), false);
        double res = 0;
        Vector u = solve_reduced(A, load_, constrained, &res);
        CellField f = make_field(CellField::Kind::VMu, u, epsmu);
        f.solve_residual = res;
        return f;
    }

    // -Delta v2 = 0 with  dv2/d|xi| = v1  on the hole (second corrector)
    CellField solve_v2(const CellField& v1) const {
        if (v1.mesh.get() != mesh_.get()) throw ConfigError("solve_v2: v1 lives on a different cell mesh");
        Vector rhs = Vector::Zero(n_fold_);
        for (int v : hole_nodes_) rhs[fold_of(v)] -= hole_weight(v) * v1.values[std::size_t(v)];
        double compat = std::abs(rhs.sum());
        std::vector<bool> constrained(std::size_t(n_fold_), false);
        constrained[std::size_t(pin_)] = true;
        double res = 0;
        Vector u = solve_reduced(K_, rhs, constrained, &res);
        CellField f = make_field(CellField::Kind::V2, u, 0.0);
        f.solve_residual = res;
        double shift = hole_boundary_mean(f.values);
        for (auto& x : f.values) x -= shift;
        f.compat_residual = compat;
        return f;
    }

    Norms cell_norms(const std::vector<double>& v) const { return norms(*mesh_, v); }

private:
    double eta_;
    std::shared_ptr<Mesh> mesh_;
    std::vector<int> master_;
    std::vector<int> fold_index_;
    int n_fold_ = 0;
    SpMat K_, M_;
    Vector load_, hole_weight_fold_;
    std::vector<int> hole_nodes_;
    double area_ = 0, perimeter_ = 0;
    int pin_ = -1;

    int fold_of(int v) const { return fold_index_[std::size_t(master_[std::size_t(v)])]; }
    double hole_weight(int v) const { return hole_weight_fold_[fold_of(v)]; }

    CellField make_field(CellField::Kind kind, const Vector& folded, double epsmu) const {
        CellField f;
        f.kind = kind;
        f.eta = eta_;
        f.epsmu = epsmu;
        f.mesh = mesh_;
        f.values.resize(mesh_->vertices.size());
        for (int v = 0; v < int(mesh_->vertices.size()); ++v) f.values[std::size_t(v)] = folded[fold_of(v)];
        return f;
    }

    static Vector solve_reduced(const SpMat& A, const Vector& rhs, const std::vector<bool>& constrained,
                                double* residual = nullptr) {
        const int n = int(A.rows());
        std::vector<int> red(std::size_t(n), -1);
        int nr = 0;
        for (int i = 0; i < n; ++i)
            if (!constrained[std::size_t(i)]) red[std::size_t(i)] = nr++;
        std::vector<Eigen::Triplet<double>> t;
        for (int c = 0; c < A.outerSize(); ++c)
            for (SpMat::InnerIterator it(A, c); it; ++it) {
                int r_ = red[std::size_t(it.row())], c_ = red[std::size_t(it.col())];
                if (r_ >= 0 && c_ >= 0) t.emplace_back(r_, c_, it.value());
            }
        SpMat Ar(nr, nr);
        Ar.setFromTriplets(t.begin(), t.end());
        Vector br(nr);
        for (int i = 0; i < n; ++i)
            if (red[std::size_t(i)] >= 0) br[red[std::size_t(i)]] = rhs[i];
        Eigen::SimplicialLDLT<SpMat> ldlt(Ar);
        if (ldlt.info() != Eigen::Success) throw NonConvergence("cell solve factorization failed", 0, 0.0);
        Vector ur = ldlt.solve(br);
        if (residual) *residual = (Ar * ur - br).norm() / std::max(br.norm(), 1e-300);
        Vector full = Vector::Zero(n);
        for (int i = 0; i < n; ++i)
            if (red[std::size_t(i)] >= 0) full[i] = ur[red[std::size_t(i)]];
        return full;
    }

    void build_mesh(const CellMeshOptions& opt) {
        const double H = 2.0;  // half side of the cell square
        cdt::Triangulation tr(exact::SnapFrame::from_bbox({-H, -H}, {H, H}));
        tr.max_vertices = opt.max_vertices;
        int nseg = std::max(4, int(std::ceil(2.0 * H / opt.h_target)));
        struct Side {
            Vec2 a, b;
            TagKind tag;
        };
        // opposite sides are traversed so that matching subdivision points
        // land on identical snapped coordinates
        const Side sides[4] = {
            {{-H, -H}, {H, -H}, TagKind::PeriodicBottom},
            {{H, -H}, {H, H}, TagKind::PeriodicRight},
            {{H, H}, {-H, H}, TagKind::PeriodicTop},
            {{-H, H}, {-H, -H}, TagKind::PeriodicLeft},
        };
        std::vector<int> loop_ids;
        std::vector<TagKind> seg_tags;
        for (const Side& s : sides)
            for (int i = 0; i < nseg; ++i) {
                Vec2 p = s.a + (s.b - s.a) * (double(i) / nseg);
                auto r = tr.insert_point(p);
                if (!r.ok) throw MeshError("cell boundary insertion failed");
                loop_ids.push_back(r.vertex);
                seg_tags.push_back(s.tag);
            }
        for (std::size_t i = 0; i < loop_ids.size(); ++i) {
            cdt::SegTag st{.kind = int(seg_tags[i]), .cavity = -1, .no_split = true, .on_circle = false, .circle_center = {}, .circle_radius = 0.0};
            int tid = tr.add_tag(st);
            tr.insert_segment(loop_ids[i], loop_ids[(i + 1) % loop_ids.size()], tid);
        }
        int hole_div = opt.hole_divisions > 0 ? opt.hole_divisions : default_divisions(opt.h_target, eta_);
        auto hole_poly = meshdetail::circle_polygon({0, 0}, eta_, hole_div);
        cdt::SegTag hole_tag{.kind = int(TagKind::CavityRobin), .cavity = 0, .no_split = false, .on_circle = true, .circle_center = {0, 0}, .circle_radius = eta_};
        meshdetail::insert_loop(tr, hole_poly, hole_tag);
        tr.classify_regions({{0, 0}});
        cdt::Triangulation::RefineOptions ropt;
        ropt.min_angle_deg = opt.min_angle_deg;
        double hole_edge = 2.0 * eta_ * std::sin(PI / hole_div);
        double h = opt.h_target, grade = opt.grade, eta = eta_;
        ropt.sizing = [h, grade, eta, hole_edge](Vec2 x) {
            return std::min(h, hole_edge + grade * std::max(0.0, x.norm() - eta));
        };
        tr.refine(ropt);
        mesh_ = std::make_shared<Mesh>(meshdetail::extract(tr));
        mesh_->cavity_circles[0] = {{0, 0}, eta_};
        build_identification(H);
    }

    void build_identification(double H) {
        const int n = int(mesh_->vertices.size());
        master_.resize(std::size_t(n));
        for (int v = 0; v < n; ++v) master_[std::size_t(v)] = v;
        // match right -> left by exact y, top -> bottom by exact x; the
        // traces agree exactly because the side subdivisions were generated
        // from the same snapped points and carry no refinement splits
        std::map<double, int> left, bottom;
        for (int v = 0; v < n; ++v) {
            const Vec2& p = mesh_->vertices[std::size_t(v)];
            if (p.x == -H) left[p.y] = v;
            if (p.y == -H) bottom[p.x] = v;
        }
        auto step = [&](int v) {
            const Vec2& p = mesh_->vertices[std::size_t(v)];
            if (p.x == H) {
                auto it = left.find(p.y);
                if (it == left.end()) throw MeshError("periodic trace mismatch on x-sides");
                return it->second;
            }
            if (p.y == H) {
                auto it = bottom.find(p.x);
                if (it == bottom.end()) throw MeshError("periodic trace mismatch on y-sides");
                return it->second;
            }
            return v;
        };
        for (int v = 0; v < n; ++v) {
            int m = v;
            for (int guard = 0; guard < 4; ++guard) {
                int next = step(m);
                if (next == m) break;
                m = next;
            }
            master_[std::size_t(v)] = m;
        }
    }
};

// W21 norm of  v_mu - c4/epsmu - v1  on the cell (the expansion remainder)
inline double verify_expansion(const CellField& vmu, const CellField& v1, double c4, double epsmu) {
    if (!(epsmu > 0)) throw ConfigError("verify_expansion requires eps*mu > 0");
    if (vmu.mesh.get() != v1.mesh.get()) throw ConfigError("verify_expansion: fields on different meshes");
    std::vector<double> rem(vmu.values.size());
    for (std::size_t i = 0; i < rem.size(); ++i) rem[i] = vmu.values[i] - c4 / epsmu - v1.values[i];
    return norms(*vmu.mesh, rem).w12;
}

// the fundamental-solution scaling function
inline double G_fundamental(double t, int n = 2) {
    if (!(t > 0)) throw ConfigError("G requires t > 0");
    if (n < 2) throw ConfigError("G requires n >= 2");
    if (n == 2) return 16.0 / (2.0 * PI) * std::log(t);
    double sphere = 2.0 * std::pow(PI, double(n) / 2.0) / std::tgamma(double(n) / 2.0);
    return std::pow(4.0, double(n)) * std::pow(t, 2.0 - double(n)) / ((2.0 - double(n)) * sphere);
}

// ---------------------------------------------------------------------------
// X problem on the annulus B_R3(0) \ B_eta(0): -Delta X = 1, Dirichlet on the
// outer circle, Neumann on the hole
// ---------------------------------------------------------------------------

struct XField {
    CellField field;
    double flux_R5 = 0.0;        // loop integral of dX/dr over |x| = R5
    double flux_expected = 0.0;  // -pi (R5^2 - eta^2)
    Norms w21;
};

inline XField solve_X(double eta, double R3 = 1.9, TriangulateOptions opt = {.h_target = 0.06}) {
    if (!(eta > 0 && eta < R3)) throw ConfigError("solve_X requires 0 < eta < R3");
    LayoutConfig cfg;
    cfg.generator = LayoutConfig::Generator::Explicit;
    cfg.explicit_centers = {{0, 0}};
    cfg.epsilon = eta;
    cfg.eta = 1.0;
    cfg.shape.kind = ReferenceShape::Kind::Disk;
    cfg.shape.radius = 1.0;
    cfg.outer = OuterDomain::disk({0, 0}, R3);
    cfg.bc.kind = BcAssignment::Kind::AllRobin;  // Neumann: no Robin model attached
    auto layout = build_layout(cfg);
    auto mesh = std::make_shared<Mesh>(triangulate(layout, opt));
    ProblemData data;
    data.f = [](Vec2) { return 1.0; };
    Solution sol = solve(*mesh, CoefficientField::laplace(), RobinModel::none(), data);

    XField out;
    out.field.kind = CellField::Kind::X;
    out.field.eta = eta;
    out.field.mesh = mesh;
    out.field.values = sol.values;
    out.field.solve_residual = sol.residual;
    out.w21 = norms(*mesh, sol.values);

    const double R5 = (1.0 + R3) / 2.0;  // (R2 + R3)/2 with R2 = 1
    P1Interpolator interp(*mesh);
    const int N = 4096;
    double flux = 0;
    for (int i = 0; i < N; ++i) {
        double th = 2.0 * PI * (double(i) + 0.5) / N;
        Vec2 x{R5 * std::cos(th), R5 * std::sin(th)};
        double bary[3];
        int t = interp.locate(x, bary);
        if (t < 0) continue;
        const auto& T = mesh->triangles[std::size_t(t)];
        Vec2 g[3];
        double area;
        p1_gradients(mesh->vertices[std::size_t(T[0])], mesh->vertices[std::size_t(T[1])], mesh->vertices[std::size_t(T[2])], g, area);
        Vec2 grad = g[0] * sol.values[std::size_t(T[0])] + g[1] * sol.values[std::size_t(T[1])] + g[2] * sol.values[std::size_t(T[2])];
        flux += grad.dot(x / R5) * (2.0 * PI * R5 / N);
    }
    out.flux_R5 = flux;
    out.flux_expected = -PI * (R5 * R5 - eta * eta);
    return out;
}

// ---------------------------------------------------------------------------
// periodic tiling quadrature
// ---------------------------------------------------------------------------

// compactly supported polynomial bump  amp * (1 - |x-c|^2/r^2)^3
struct Bump {
    Vec2 center;
    double radius = 1.0;
    double amplitude = 1.0;

    double value(Vec2 x) const {
        double s = (x - center).norm2() / (radius * radius);
        if (s >= 1.0) return 0.0;
        double t = 1.0 - s;
        return amplitude * t * t * t;
    }
    Vec2 grad(Vec2 x) const {
        double s = (x - center).norm2() / (radius * radius);
        if (s >= 1.0) return {0, 0};
        double t = 1.0 - s;
        return (x - center) * (-6.0 * amplitude * t * t / (radius * radius));
    }
    double laplacian(Vec2 x) const {
        double r2 = radius * radius;
        double s = (x - center).norm2() / r2;
        if (s >= 1.0) return 0.0;
        double t = 1.0 - s;
        // div( -6 t^2 (x-c)/r^2 ) = -12 t^2 / r^2 + 24 t s / r^2
        return amplitude * (-12.0 * t * t + 24.0 * t * s) / r2;
    }
    double integral() const { return amplitude * PI * radius * radius / 4.0; }
    void support_box(Vec2& lo, Vec2& hi) const {
        lo = {center.x - radius, center.y - radius};
        hi = {center.x + radius, center.y + radius};
    }
};

namespace celldetail {

// iterates the tiles 4*eps*k + eps*square intersecting [lo,hi] and calls
// fn(tile_index_pair, tile_center)
template <class Fn>
inline void for_tiles(Vec2 lo, Vec2 hi, double eps, Fn&& fn) {
    long kx0 = long(std::floor((lo.x - 2 * eps) / (4 * eps)));
    long kx1 = long(std::ceil((hi.x + 2 * eps) / (4 * eps)));
    long ky0 = long(std::floor((lo.y - 2 * eps) / (4 * eps)));
    long ky1 = long(std::ceil((hi.y + 2 * eps) / (4 * eps)));
    for (long ky = ky0; ky <= ky1; ++ky)
        for (long kx = kx0; kx <= kx1; ++kx) {
            Vec2 c{4.0 * eps * double(kx), 4.0 * eps * double(ky)};
            if (c.x + 2 * eps < lo.x || c.x - 2 * eps > hi.x || c.y + 2 * eps < lo.y || c.y - 2 * eps > hi.y) continue;
            fn(std::pair<long, long>{kx, ky}, c);
        }
}

} // namespace celldetail

struct AveragingCheck {
    double lhs = 0.0;      // integral of v(x/eps) h(x) over the perforated tiling
    double leading = 0.0;  // (1/16) * cell integral of v * integral of h
    double error = 0.0;
};

// quadrature check of the periodic averaging identity for the discrete cell
// field v and a smooth compactly supported h
inline AveragingCheck averaging_check(const PeriodicCell& cell, const CellField& v,
                                      const std::function<double(Vec2)>& h, Vec2 supp_lo, Vec2 supp_hi,
                                      double eps, double integral_h = std::numeric_limits<double>::quiet_NaN()) {
    if (v.mesh.get() != &cell.mesh()) throw ConfigError("averaging_check: field not on this cell");
    double span = std::min(supp_hi.x - supp_lo.x, supp_hi.y - supp_lo.y);
    if (span < 4.0 * (4.0 * eps)) throw ConfigError("averaging_check: support too small relative to eps (needs >= 4 periods)");

    const Mesh& m = cell.mesh();
    const auto& rule = quad::tri_order4();
    double lhs = 0;
    celldetail::for_tiles(supp_lo, supp_hi, eps, [&](std::pair<long, long> k, Vec2) {
        Vec2 shift{4.0 * double(k.first), 4.0 * double(k.second)};
        for (const auto& T : m.triangles) {
            Vec2 p[3] = {m.vertices[std::size_t(T[0])], m.vertices[std::size_t(T[1])], m.vertices[std::size_t(T[2])]};
            double area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
            for (int q = 0; q < rule.n; ++q) {
                Vec2 xi = p[0] * rule.bary[std::size_t(q)][0] + p[1] * rule.bary[std::size_t(q)][1] + p[2] * rule.bary[std::size_t(q)][2];
                double vq = 0;
                for (int i = 0; i < 3; ++i) vq += rule.bary[std::size_t(q)][std::size_t(i)] * v.values[std::size_t(T[std::size_t(i)])];
                Vec2 x = (xi + shift) * eps;
                lhs += rule.w[std::size_t(q)] * area * eps * eps * vq * h(x);
            }
        }
    });

    double ih = integral_h;
    if (std::isnan(ih)) {
        // composite 2x2 Gauss tensor rule over the support box
        const int N = 256;
        const double gp[2] = {-0.5773502691896257, 0.5773502691896257};
        double hx = (supp_hi.x - supp_lo.x) / N, hy = (supp_hi.y - supp_lo.y) / N;
        ih = 0;
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i)
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) {
                        Vec2 x{supp_lo.x + hx * (i + 0.5 + 0.5 * gp[a]), supp_lo.y + hy * (j + 0.5 + 0.5 * gp[b])};
                        ih += 0.25 * hx * hy * h(x);
                    }
    }
    AveragingCheck out;
    out.lhs = lhs;
    out.leading = cell.integral(v.values) / 16.0 * ih;
    out.error = lhs - out.leading;
    return out;
}

struct SharpnessIntegrals {
    double u_l2 = 0.0;          // || eps^2 v(x/eps) f ||_L2
    double u_h1 = 0.0;          // || grad u ||_L2
    double f_minus_h_l2 = 0.0;  // || f - h ||_L2 with the corrector right-hand side
};

// norms of the composed sharpness solution u = eps^2 v(x/eps) f(x) and of the
// induced right-hand side f - h, integrated over the perforated tiling
inline SharpnessIntegrals sharpness_integrals(const PeriodicCell& cell, const CellField& v, double eps,
                                              const Bump& f) {
    if (v.mesh.get() != &cell.mesh()) throw ConfigError("sharpness_integrals: field not on this cell");
    const Mesh& m = cell.mesh();
    const auto& rule = quad::tri_order4();
    double u2 = 0, g2 = 0, fh2 = 0;
    Vec2 lo, hi;
    f.support_box(lo, hi);
    celldetail::for_tiles(lo, hi, eps, [&](std::pair<long, long> k, Vec2) {
        Vec2 shift{4.0 * double(k.first), 4.0 * double(k.second)};
        for (const auto& T : m.triangles) {
            Vec2 p[3] = {m.vertices[std::size_t(T[0])], m.vertices[std::size_t(T[1])], m.vertices[std::size_t(T[2])]};
            Vec2 gphi[3];
            double area;
            p1_gradients(p[0], p[1], p[2], gphi, area);
            Vec2 gv = gphi[0] * v.values[std::size_t(T[0])] + gphi[1] * v.values[std::size_t(T[1])] +
                      gphi[2] * v.values[std::size_t(T[2])];
            for (int q = 0; q < rule.n; ++q) {
                Vec2 xi = p[0] * rule.bary[std::size_t(q)][0] + p[1] * rule.bary[std::size_t(q)][1] + p[2] * rule.bary[std::size_t(q)][2];
                double vq = 0;
                for (int i = 0; i < 3; ++i) vq += rule.bary[std::size_t(q)][std::size_t(i)] * v.values[std::size_t(T[std::size_t(i)])];
                Vec2 x = (xi + shift) * eps;
                double fx = f.value(x);
                Vec2 gf = f.grad(x);
                double w = rule.w[std::size_t(q)] * area * eps * eps;
                double u = eps * eps * vq * fx;
                Vec2 gu = gv * (eps * fx) + gf * (eps * eps * vq);
                double hval = 2.0 * eps * gv.dot(gf) + eps * eps * vq * f.laplacian(x);
                u2 += w * u * u;
                g2 += w * gu.norm2();
                fh2 += w * (fx - hval) * (fx - hval);
            }
        }
    });
    SharpnessIntegrals out;
    out.u_l2 = std::sqrt(u2);
    out.u_h1 = std::sqrt(g2);
    out.f_minus_h_l2 = std::sqrt(fh2);
    return out;
}

} // namespace perfhom
