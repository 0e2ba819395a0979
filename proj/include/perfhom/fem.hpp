#pragma once

// P1 finite elements for the perforated boundary value problem: assembly of
// the second-order form (matrix coefficient, convection, reaction), lumped
// boundary terms for the nonlinear Robin condition, a damped-Newton solve with
// Picard fallback, norms and trace norms, and the certified coercivity shift.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <functional>

#include "perfhom/mesh.hpp"
#include "perfhom/quadrature.hpp"

namespace perfhom {

using SpMat = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

struct IndefiniteSystem : std::runtime_error {
    explicit IndefiniteSystem(const std::string& what) : std::runtime_error(what) {}
};

struct Mat2 {
    double a11 = 1, a12 = 0, a21 = 0, a22 = 1;
    Vec2 apply(const Vec2& v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
};

struct CoefficientField {
    std::function<Mat2(Vec2)> A;       // leading symmetric matrix coefficient
    std::function<Vec2(Vec2)> b;       // first-order coefficients (may be null)
    std::function<double(Vec2)> c;     // zero-order coefficient (may be null)
    double c0 = 1.0;                   // ellipticity constant
    double sup_b = 0.0;                // L-inf bound of |b|
    double sup_c_neg = 0.0;            // L-inf bound of max(-c, 0)

    static CoefficientField laplace() {
        CoefficientField f;
        f.A = [](Vec2) { return Mat2{}; };
        f.c0 = 1.0;
        return f;
    }
    bool symmetric() const { return !b; }
};

struct RobinModel {
    std::function<double(Vec2, double)> a;  // a(x, u) on Robin boundaries
    double a0 = 0.0;                        // Lipschitz constant of a in u
    double c1 = 0.0;                        // sign-bound constant (can be any sign)
    double mu = 1.0;                        // strength, >= 1 on sign-definite cavities
    std::function<double(int, Vec2)> alpha; // weights on sign-definite cavities
    double c2 = 8.0;
    double c3 = 6.0;

    static RobinModel none() {
        RobinModel r;
        r.a = nullptr;
        return r;
    }
    static RobinModel linear(double mu) {
        RobinModel r;
        r.a = [mu](Vec2, double u) { return mu * u; };
        r.a0 = mu;
        r.mu = mu;
        r.alpha = [](int, Vec2) { return 1.0; };
        return r;
    }
    // a(x,u) = mu (u + coeff tanh u), monotone for coeff > -1
    static RobinModel tanh_model(double mu, double coeff) {
        RobinModel r;
        r.a = [mu, coeff](Vec2, double u) { return mu * (u + coeff * std::tanh(u)); };
        r.a0 = mu * (1.0 + std::abs(coeff));
        r.mu = mu;
        r.alpha = [](int, Vec2) { return 1.0; };
        return r;
    }
};

struct ProblemData {
    std::function<double(Vec2)> f;
    double lambda = 0.0;
    // optional inhomogeneity g(x, n) in  du/dnu + a(x,u) = g  on Robin edges;
    // n is the unit normal pointing out of the domain (into the cavity)
    std::function<double(Vec2, Vec2)> robin_rhs;
};

// which tagged boundaries carry essential (zero Dirichlet) conditions
struct BcPolicy {
    bool outer_dirichlet = true;
    bool cavity_dirichlet = true;  // CavityDirichlet(k) tags
};

struct Solution {
    const Mesh* mesh = nullptr;
    std::vector<double> values;
    double residual = 0.0;
    int iterations = 0;
    bool used_picard_fallback = false;
};

struct Norms {
    double l2 = 0.0;
    double h1_semi = 0.0;
    double w12 = 0.0;
};

// ---------------------------------------------------------------------------
// element kernels
// ---------------------------------------------------------------------------

inline void p1_gradients(const Vec2& p0, const Vec2& p1, const Vec2& p2, Vec2 grad[3], double& area) {
    area = 0.5 * (p1 - p0).cross(p2 - p0);
    auto perp = [](Vec2 v) { return Vec2{-v.y, v.x}; };
    grad[0] = perp(p2 - p1) / (2.0 * area);
    grad[1] = perp(p0 - p2) / (2.0 * area);
    grad[2] = perp(p1 - p0) / (2.0 * area);
}

// full element matrix of the form sum (A grad u, grad v) + (b.grad u, v) + (c u, v)
inline void p1_element_form(const Vec2 p[3], const CoefficientField& cf, double K[3][3]) {
    Vec2 g[3];
    double area;
    p1_gradients(p[0], p[1], p[2], g, area);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) K[i][j] = 0.0;
    const auto& rule = quad::tri_order2();
    for (int q = 0; q < rule.n; ++q) {
        Vec2 x = p[0] * rule.bary[std::size_t(q)][0] + p[1] * rule.bary[std::size_t(q)][1] + p[2] * rule.bary[std::size_t(q)][2];
        double w = rule.w[std::size_t(q)] * area;
        Mat2 A = cf.A ? cf.A(x) : Mat2{};
        Vec2 bv = cf.b ? cf.b(x) : Vec2{0, 0};
        double cv = cf.c ? cf.c(x) : 0.0;
        for (int j = 0; j < 3; ++j) {
            Vec2 Agj = A.apply(g[j]);
            double bgj = bv.dot(g[j]);
            for (int i = 0; i < 3; ++i) {
                double phi_i = rule.bary[std::size_t(q)][std::size_t(i)];
                double phi_j = rule.bary[std::size_t(q)][std::size_t(j)];
                K[i][j] += w * (Agj.dot(g[i]) + bgj * phi_i + cv * phi_j * phi_i);
            }
        }
    }
}

inline void p1_element_mass(const Vec2 p[3], double M[3][3]) {
    double area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) M[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
}

// ---------------------------------------------------------------------------
// assembled discrete system
// ---------------------------------------------------------------------------

class FemSystem {
public:
    const Mesh& mesh;
    BcPolicy policy;
    std::vector<int> full2free;  // -1 for constrained nodes
    std::vector<int> free2full;
    SpMat K;  // reduced form matrix (A + b + c terms, no lambda shift)
    SpMat M;  // reduced mass
    std::vector<double> robin_weight;  // lumped boundary weights per full vertex
    std::vector<Vec2> robin_normal;    // length-weighted outward normal per full vertex
    std::vector<int> robin_nodes;      // full vertex ids with positive weight

    FemSystem(const Mesh& m, const CoefficientField& cf, BcPolicy pol = {}) : mesh(m), policy(pol) {
        const int n = int(mesh.vertices.size());
        std::vector<bool> constrained(std::size_t(n), false);
        robin_weight.assign(std::size_t(n), 0.0);
        robin_normal.assign(std::size_t(n), Vec2{0, 0});
        for (const auto& e : mesh.boundary_edges) {
            bool dir = (e.tag.kind == TagKind::OuterDirichlet && policy.outer_dirichlet) ||
                       (e.tag.kind == TagKind::CavityDirichlet && policy.cavity_dirichlet);
            if (dir) {
                constrained[std::size_t(e.a)] = true;
                constrained[std::size_t(e.b)] = true;
            }
            if (e.tag.kind == TagKind::CavityRobin) {
                Vec2 d = mesh.vertices[std::size_t(e.b)] - mesh.vertices[std::size_t(e.a)];
                double len = d.norm();
                Vec2 nrm{d.y / len, -d.x / len};  // domain lies left of a->b
                for (int v : {e.a, e.b}) {
                    robin_weight[std::size_t(v)] += 0.5 * len;
                    robin_normal[std::size_t(v)] += nrm * (0.5 * len);
                }
            }
        }
        full2free.assign(std::size_t(n), -1);
        for (int v = 0; v < n; ++v)
            if (!constrained[std::size_t(v)]) {
                full2free[std::size_t(v)] = int(free2full.size());
                free2full.push_back(v);
            }
        for (int v = 0; v < n; ++v)
            if (robin_weight[std::size_t(v)] > 0 && !constrained[std::size_t(v)]) robin_nodes.push_back(v);

        std::vector<Eigen::Triplet<double>> tk, tm;
        for (const auto& T : mesh.triangles) {
            Vec2 p[3] = {mesh.vertices[std::size_t(T[0])], mesh.vertices[std::size_t(T[1])], mesh.vertices[std::size_t(T[2])]};
            double Ke[3][3], Me[3][3];
            p1_element_form(p, cf, Ke);
            p1_element_mass(p, Me);
            for (int i = 0; i < 3; ++i) {
                int fi = full2free[std::size_t(T[std::size_t(i)])];
                if (fi < 0) continue;
                for (int j = 0; j < 3; ++j) {
                    int fj = full2free[std::size_t(T[std::size_t(j)])];
                    if (fj < 0) continue;
                    tk.emplace_back(fi, fj, Ke[i][j]);
                    tm.emplace_back(fi, fj, Me[i][j]);
                }
            }
        }
        const int nf = int(free2full.size());
        K.resize(nf, nf);
        M.resize(nf, nf);
        K.setFromTriplets(tk.begin(), tk.end());
        M.setFromTriplets(tm.begin(), tm.end());
    }

    int n_free() const { return int(free2full.size()); }

    Vector assemble_load(const std::function<double(Vec2)>& f) const {
        Vector b = Vector::Zero(n_free());
        if (!f) return b;
        const auto& rule = quad::tri_order4();
        for (const auto& T : mesh.triangles) {
            Vec2 p[3] = {mesh.vertices[std::size_t(T[0])], mesh.vertices[std::size_t(T[1])], mesh.vertices[std::size_t(T[2])]};
            double area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
            for (int q = 0; q < rule.n; ++q) {
                Vec2 x = p[0] * rule.bary[std::size_t(q)][0] + p[1] * rule.bary[std::size_t(q)][1] + p[2] * rule.bary[std::size_t(q)][2];
                double fw = f(x) * rule.w[std::size_t(q)] * area;
                for (int i = 0; i < 3; ++i) {
                    int fi = full2free[std::size_t(T[std::size_t(i)])];
                    if (fi >= 0) b[fi] += fw * rule.bary[std::size_t(q)][std::size_t(i)];
                }
            }
        }
        return b;
    }

    // boundary-lumped Robin residual sum_i a(x_i, u_i) w_i at the free nodes,
    // plus the finite-difference tangent diagonal
    void robin_residual(const RobinModel& robin, const Vector& u_free, Vector& residual, Vector* tangent) const {
        residual = Vector::Zero(n_free());
        if (tangent) *tangent = Vector::Zero(n_free());
        if (!robin.a) return;
        for (int v : robin_nodes) {
            int fi = full2free[std::size_t(v)];
            double uv = u_free[fi];
            Vec2 x = mesh.vertices[std::size_t(v)];
            double av = robin.a(x, uv);
            if (!std::isfinite(av)) throw NonConvergence("non-finite Robin nonlinearity value", 0, av);
            residual[fi] += robin_weight[std::size_t(v)] * av;
            if (tangent) {
                double d = 1e-6 * (1.0 + std::abs(uv));
                double da = (robin.a(x, uv + d) - robin.a(x, uv - d)) / (2.0 * d);
                (*tangent)[fi] += robin_weight[std::size_t(v)] * da;
            }
        }
    }

    Vector robin_source(const ProblemData& data) const {
        Vector g = Vector::Zero(n_free());
        if (!data.robin_rhs) return g;
        for (int v : robin_nodes) {
            Vec2 nrm = robin_normal[std::size_t(v)];
            double nn = nrm.norm();
            if (nn > 0) nrm = nrm / nn;
            g[full2free[std::size_t(v)]] += robin_weight[std::size_t(v)] * data.robin_rhs(mesh.vertices[std::size_t(v)], nrm);
        }
        return g;
    }
};

// ---------------------------------------------------------------------------
// nonlinear solve
// ---------------------------------------------------------------------------

struct SolveOptions {
    double tol = 1e-10;
    int max_iterations = 25;
    BcPolicy policy;
    bool check_indefinite = false;  // LDLT pivot check for symmetric systems
};

inline Solution solve(const Mesh& mesh, const CoefficientField& coeffs, const RobinModel& robin,
                      const ProblemData& data, const SolveOptions& opt = {}) {
    if (mesh_quality(mesh).degenerate) throw MeshError("solve rejected a degenerate mesh");
    FemSystem sys(mesh, coeffs, opt.policy);
    const int nf = sys.n_free();
    SpMat A = sys.K - data.lambda * sys.M;
    Vector rhs = sys.assemble_load(data.f) + sys.robin_source(data);

    const double scale = std::max(rhs.norm(), 1e-300);
    Vector u = Vector::Zero(nf);
    Vector rb, dtan;
    auto residual_of = [&](const Vector& v) {
        Vector r;
        sys.robin_residual(robin, v, r, nullptr);
        return Vector(A * v + r - rhs);
    };

    Vector F = residual_of(u);
    Solution sol;
    sol.mesh = &mesh;
    sol.used_picard_fallback = false;
    int it = 0;
    double fnorm = F.norm();
    bool symmetric = coeffs.symmetric();
    while (fnorm > opt.tol * scale) {
        if (it >= opt.max_iterations)
            throw NonConvergence("Newton iteration budget exhausted", it, fnorm / scale);
        ++it;
        sys.robin_residual(robin, u, rb, &dtan);
        SpMat J = A;
        if (robin.a) {
            SpMat D(nf, nf);
            std::vector<Eigen::Triplet<double>> td;
            for (int i = 0; i < nf; ++i)
                if (dtan[i] != 0.0) td.emplace_back(i, i, dtan[i]);
            D.setFromTriplets(td.begin(), td.end());
            J = A + D;
        }
        Vector delta;
        if (symmetric) {
            Eigen::SimplicialLDLT<SpMat> ldlt(J);
            if (ldlt.info() != Eigen::Success) throw NonConvergence("LDLT factorization failed", it, fnorm / scale);
            if (opt.check_indefinite) {
                double dscale = ldlt.vectorD().cwiseAbs().maxCoeff();
                if (ldlt.vectorD().minCoeff() < -1e-10 * dscale)
                    throw IndefiniteSystem("linearized operator lost coercivity (lambda above lambda0?)");
            }
            delta = ldlt.solve(-F);
        } else {
            Eigen::SparseLU<SpMat> lu(J);
            if (lu.info() != Eigen::Success) throw NonConvergence("LU factorization failed", it, fnorm / scale);
            delta = lu.solve(-F);
        }
        // Armijo backtracking on the residual norm
        double t = 1.0;
        Vector u_try;
        double fnew = fnorm;
        while (t > 1.0 / (1 << 20)) {
            u_try = u + t * delta;
            fnew = residual_of(u_try).norm();
            if (fnew <= (1.0 - 1e-4 * t) * fnorm) break;
            t *= 0.5;
        }
        if (t <= 1.0 / (1 << 20)) {
            // Picard fallback: freeze the boundary term at the current iterate
            sol.used_picard_fallback = true;
            sys.robin_residual(robin, u, rb, nullptr);
            Vector picard_rhs = rhs - rb;
            Vector u_pic;
            if (symmetric) {
                Eigen::SimplicialLDLT<SpMat> ldlt(A);
                u_pic = ldlt.solve(picard_rhs);
            } else {
                Eigen::SparseLU<SpMat> lu(A);
                u_pic = lu.solve(picard_rhs);
            }
            double s = 1.0;
            while (s > 1.0 / (1 << 20)) {
                u_try = u + s * (u_pic - u);
                fnew = residual_of(u_try).norm();
                if (fnew < fnorm) break;
                s *= 0.5;
            }
            if (fnew >= fnorm) throw NonConvergence("stalled Newton/Picard iteration", it, fnorm / scale);
        }
        u = u_try;
        F = residual_of(u);
        fnorm = F.norm();
    }
    sol.iterations = it;
    sol.residual = fnorm / scale;
    sol.values.assign(mesh.vertices.size(), 0.0);
    for (int i = 0; i < nf; ++i) sol.values[std::size_t(sys.free2full[std::size_t(i)])] = u[i];
    return sol;
}

// ---------------------------------------------------------------------------
// norms and boundary functionals
// ---------------------------------------------------------------------------

inline Norms norms(const Mesh& mesh, const std::vector<double>& v) {
    Norms out;
    double l2sq = 0, h1sq = 0;
    for (const auto& T : mesh.triangles) {
        Vec2 p[3] = {mesh.vertices[std::size_t(T[0])], mesh.vertices[std::size_t(T[1])], mesh.vertices[std::size_t(T[2])]};
        Vec2 g[3];
        double area;
        p1_gradients(p[0], p[1], p[2], g, area);
        double u0 = v[std::size_t(T[0])], u1 = v[std::size_t(T[1])], u2 = v[std::size_t(T[2])];
        l2sq += area / 6.0 * (u0 * u0 + u1 * u1 + u2 * u2 + u0 * u1 + u1 * u2 + u0 * u2);
        Vec2 grad = g[0] * u0 + g[1] * u1 + g[2] * u2;
        h1sq += area * grad.norm2();
    }
    out.l2 = std::sqrt(l2sq);
    out.h1_semi = std::sqrt(h1sq);
    out.w12 = std::sqrt(l2sq + h1sq);
    return out;
}

inline Norms norms(const Solution& sol) { return norms(*sol.mesh, sol.values); }

inline double boundary_trace_norm_sq(const Mesh& mesh, const std::vector<double>& v, const EdgeTag& tag) {
    bool found = false;
    double sum = 0.0;
    const auto& rule = quad::edge_gauss2();
    for (const auto& e : mesh.boundary_edges) {
        if (!(e.tag == tag)) continue;
        found = true;
        double len = dist(mesh.vertices[std::size_t(e.a)], mesh.vertices[std::size_t(e.b)]);
        for (int q = 0; q < 2; ++q) {
            double t = rule.t[std::size_t(q)];
            double uq = (1.0 - t) * v[std::size_t(e.a)] + t * v[std::size_t(e.b)];
            sum += rule.w[std::size_t(q)] * len * uq * uq;
        }
    }
    if (!found) throw ConfigError("boundary_trace_norm: unknown boundary tag");
    return sum;
}

struct MeanFreeSplit {
    double mean = 0.0;
    double region_area = 0.0;
    std::vector<double> fluctuation;  // full nodal field minus the mean
    std::vector<int> region_triangles;
};

// area-weighted mean over the triangles whose centroid satisfies the region
// predicate, and the fluctuation u - <u>
inline MeanFreeSplit mean_free_decompose(const Mesh& mesh, const std::vector<double>& v,
                                         const std::function<bool(Vec2)>& region) {
    MeanFreeSplit out;
    double integral = 0;
    for (int t = 0; t < int(mesh.triangles.size()); ++t) {
        if (!region(mesh.centroid(t))) continue;
        out.region_triangles.push_back(t);
        const auto& T = mesh.triangles[std::size_t(t)];
        double area = mesh.tri_area(t);
        integral += area * (v[std::size_t(T[0])] + v[std::size_t(T[1])] + v[std::size_t(T[2])]) / 3.0;
        out.region_area += area;
    }
    if (out.region_area <= 0) throw ConfigError("mean_free_decompose: empty region");
    out.mean = integral / out.region_area;
    out.fluctuation.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out.fluctuation[i] = v[i] - out.mean;
    return out;
}

// ---------------------------------------------------------------------------
// coercivity shift
// ---------------------------------------------------------------------------

struct CoercivityBound {
    double lambda0 = 0.0;
    double probe_eigenvalue = 0.0;  // smallest eigenvalue of (S - lambda0 M, M)
    bool probe_ok = false;
};

namespace femdetail {

// smallest eigenvalue of the pencil (A, M) by inverse iteration, A symmetric
// positive semidefinite up to the sigma shift
inline double smallest_pencil_eigenvalue(const SpMat& A, const SpMat& M, int max_iter = 400, double tol = 1e-11) {
    const int n = int(A.rows());
    double ascale = 0.0;
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it) ascale = std::max(ascale, std::abs(it.value()));
    SpMat As = A + SpMat((1e-12 * std::max(ascale, 1.0)) * Eigen::VectorXd::Ones(n).asDiagonal());
    Eigen::SimplicialLDLT<SpMat> fact(As);
    if (fact.info() != Eigen::Success) throw NonConvergence("eigen probe factorization failed", 0, 0.0);
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = 1.0 + std::sin(double(i));
    double lambda = 0, prev = std::numeric_limits<double>::max();
    for (int it = 0; it < max_iter; ++it) {
        Vector y = fact.solve(M * x);
        double m = std::sqrt(y.dot(M * y));
        if (!(m > 0)) throw NonConvergence("eigen probe degenerated", it, m);
        y /= m;
        lambda = y.dot(A * y) / y.dot(M * y);
        x = y;
        if (std::abs(lambda - prev) <= tol * std::max(1.0, std::abs(lambda))) return lambda;
        prev = lambda;
    }
    throw NonConvergence("inverse iteration did not converge", max_iter, lambda);
}

} // namespace femdetail

// Certified shift lambda0: the symmetric part of the discrete form minus
// lambda0 * mass stays positive semidefinite. Computed from the coefficient
// bounds (Young splitting of the convection term, negative part of c, Robin
// sign bound applied through the lumped boundary/mass weight ratio), then
// verified by an inverse-iteration probe.
inline CoercivityBound coercivity_bound(const Mesh& mesh, const CoefficientField& coeffs, const RobinModel& robin,
                                        double eps, double eta, const BcPolicy& policy = {}) {
    FemSystem sys(mesh, coeffs, policy);
    double lambda0 = 0.0;
    if (coeffs.sup_b > 0) lambda0 -= coeffs.sup_b * coeffs.sup_b / coeffs.c0;
    lambda0 -= coeffs.sup_c_neg;
    double robin_floor = 0.0;
    if (robin.a && robin.c1 > 0) {
        // lumped mass per free node
        Vector mlump = sys.M * Vector::Ones(sys.n_free());
        double worst = 0.0;
        for (int v : sys.robin_nodes) {
            int fi = sys.full2free[std::size_t(v)];
            if (mlump[fi] > 0) worst = std::max(worst, sys.robin_weight[std::size_t(v)] / mlump[fi]);
        }
        robin_floor = robin.c1 * eps / eta * worst;  // c1 eps eta^{-n+1}, n = 2
        lambda0 -= robin_floor;
    }

    // probe: symmetric part of K plus the Robin floor diagonal, shifted
    SpMat S = 0.5 * (SpMat(sys.K) + SpMat(sys.K.transpose()));
    if (robin.a && robin.c1 > 0) {
        std::vector<Eigen::Triplet<double>> td;
        for (int v : sys.robin_nodes)
            td.emplace_back(sys.full2free[std::size_t(v)], sys.full2free[std::size_t(v)],
                            -robin.c1 * eps / eta * sys.robin_weight[std::size_t(v)]);
        SpMat D(sys.n_free(), sys.n_free());
        D.setFromTriplets(td.begin(), td.end());
        S = S + D;
    }
    SpMat shifted = S - lambda0 * sys.M;
    CoercivityBound out;
    out.lambda0 = lambda0;
    out.probe_eigenvalue = femdetail::smallest_pencil_eigenvalue(shifted, sys.M);
    out.probe_ok = out.probe_eigenvalue >= -1e-8 * std::max(1.0, std::abs(lambda0));
    return out;
}

} // namespace perfhom
