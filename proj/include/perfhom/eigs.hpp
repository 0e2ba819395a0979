#pragma once

// Smallest-eigenpair probes for the stiffness/mass pencil and the local
// Poincare constants: best C in ||u||^2 <= C ||grad u||^2 on single-cavity
// ball domains under a Dirichlet or mean-zero constraint.

#include <Eigen/SparseLU>

#include "perfhom/fem.hpp"

namespace perfhom {

enum class PoincareVariant { DirichletHole, MeanFree, DirichletOuter };

namespace eigdetail {

// smallest eigenvalue of (A, M) restricted to the mean-free subspace
// {u : (M 1, u) = 0}, via inverse iteration on the augmented saddle system
// degenerate eigenpairs make the Rayleigh quotient creep at roundoff level,
// so the stopping tolerance is looser than for the simple-eigenvalue probe
inline double smallest_pencil_meanfree(const SpMat& A, const SpMat& M, int max_iter = 400, double tol = 3e-8) {
    const int n = int(A.rows());
    Vector m = M * Vector::Ones(n);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(std::size_t(A.nonZeros()) + 2 * std::size_t(n));
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it) t.emplace_back(int(it.row()), int(it.col()), it.value());
    for (int i = 0; i < n; ++i) {
        t.emplace_back(i, n, m[i]);
        t.emplace_back(n, i, m[i]);
    }
    SpMat Aug(n + 1, n + 1);
    Aug.setFromTriplets(t.begin(), t.end());
    Eigen::SparseLU<SpMat> lu(Aug);
    if (lu.info() != Eigen::Success) throw NonConvergence("deflated eigen factorization failed", 0, 0.0);

    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = std::sin(double(i) + 0.7);
    x -= (m.dot(x) / m.dot(Vector::Ones(n))) * Vector::Ones(n);
    double lambda = 0, prev = std::numeric_limits<double>::max();
    for (int it = 0; it < max_iter; ++it) {
        Vector rhs(n + 1);
        rhs.head(n) = M * x;
        rhs[n] = 0.0;
        Vector y = lu.solve(rhs).head(n);
        double nrm = std::sqrt(y.dot(M * y));
        if (!(nrm > 0)) throw NonConvergence("deflated eigen iteration degenerated", it, nrm);
        y /= nrm;
        lambda = y.dot(A * y) / y.dot(M * y);
        x = y;
        if (std::abs(lambda - prev) <= tol * std::max(1.0, std::abs(lambda))) return lambda;
        prev = lambda;
    }
    throw NonConvergence("deflated inverse iteration did not converge", max_iter, lambda);
}

} // namespace eigdetail

struct PoincareResult {
    double constant = 0.0;     // 1 / lambda_min
    double lambda_min = 0.0;
    int n_free = 0;
    MeshQualityReport mesh_quality_report;
};

// Builds the annulus B_outer(0) \ B_hole(0) (hole_radius 0 gives the full
// disk, only meaningful for MeanFree / DirichletOuter) and returns the best
// Poincare constant for the requested constraint variant.
inline PoincareResult local_poincare_annulus(double outer_radius, double hole_radius, PoincareVariant variant,
                                             TriangulateOptions opt) {
    Mesh mesh;
    if (hole_radius > 0) {
        LayoutConfig cfg;
        cfg.generator = LayoutConfig::Generator::Explicit;
        cfg.explicit_centers = {{0, 0}};
        cfg.epsilon = hole_radius;
        cfg.eta = 1.0;
        cfg.shape.kind = ReferenceShape::Kind::Disk;
        cfg.shape.radius = 1.0;
        cfg.radii.R3 = std::max(1.9, 1.05 * outer_radius / hole_radius);  // keep R ordering valid
        cfg.radii.R4 = 2.0 * cfg.radii.R3;
        cfg.outer = OuterDomain::disk({0, 0}, outer_radius);
        cfg.bc.kind = BcAssignment::Kind::AllDirichlet;
        auto layout = build_layout(cfg);
        mesh = triangulate(layout, opt);
    } else {
        mesh = triangulate_outer_only(OuterDomain::disk({0, 0}, outer_radius), opt);
    }

    BcPolicy policy;
    switch (variant) {
        case PoincareVariant::DirichletHole:
            policy.outer_dirichlet = false;
            policy.cavity_dirichlet = true;
            break;
        case PoincareVariant::DirichletOuter:
            policy.outer_dirichlet = true;
            policy.cavity_dirichlet = false;
            break;
        case PoincareVariant::MeanFree:
            policy.outer_dirichlet = false;
            policy.cavity_dirichlet = false;
            break;
    }
    FemSystem sys(mesh, CoefficientField::laplace(), policy);
    PoincareResult out;
    out.n_free = sys.n_free();
    out.mesh_quality_report = mesh_quality(mesh);
    if (variant == PoincareVariant::MeanFree)
        out.lambda_min = eigdetail::smallest_pencil_meanfree(sys.K, sys.M);
    else
        out.lambda_min = femdetail::smallest_pencil_eigenvalue(sys.K, sys.M);
    if (!(out.lambda_min > 0)) throw NonConvergence("nonpositive Poincare eigenvalue", 0, out.lambda_min);
    out.constant = 1.0 / out.lambda_min;
    return out;
}

// layout-level wrapper for cavity k: DirichletHole / DirichletOuter use the
// ball B_{eps R3}(M_k); MeanFree uses the small ball B_{eps eta R3}(M_k)
// carrying the zero-mean constraint of the scaled Poincare inequality.
inline PoincareResult local_poincare_constant(const PerforationLayout& layout, int k, PoincareVariant variant,
                                              TriangulateOptions opt) {
    if (k < 0 || k >= int(layout.cavities.size())) throw ConfigError("local_poincare_constant: no such cavity");
    const CavitySpec& c = layout.cavities[std::size_t(k)];
    if (c.shape.kind != ReferenceShape::Kind::Disk)
        throw ConfigError("local_poincare_constant supports disk cavities");
    double hole_r = layout.cavity_scale() * c.shape.radius;
    double outer_r = variant == PoincareVariant::MeanFree ? layout.epsilon * layout.eta * layout.radii.R3
                                                          : layout.epsilon * layout.radii.R3;
    return local_poincare_annulus(outer_r, hole_r, variant, opt);
}

} // namespace perfhom
