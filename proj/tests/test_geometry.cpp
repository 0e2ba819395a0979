#include <doctest.h>

#include <sstream>

#include "perfhom/geometry.hpp"

using namespace perfhom;

namespace {

LayoutConfig periodic_config(double eps, double eta, OuterDomain outer) {
    LayoutConfig cfg;
    cfg.generator = LayoutConfig::Generator::Periodic;
    cfg.epsilon = eps;
    cfg.eta = eta;
    cfg.outer = outer;
    cfg.shape.kind = ReferenceShape::Kind::Disk;
    cfg.shape.radius = 1.0;
    return cfg;
}

} // namespace

TEST_CASE("build_layout: periodic generator on the unit box") {
    // eps = 1/8: pitch 1/2, half-pitch offset -> 4 interior cavities with
    // clearance >= R3*eps = 0.2375
    auto layout = build_layout(periodic_config(0.125, 0.5, OuterDomain::box({0, 0}, {1, 1})));
    CHECK(layout.cavities.size() == 4);
    for (const auto& c : layout.cavities) {
        CHECK((std::abs(c.center.x - 0.25) < 1e-14 || std::abs(c.center.x - 0.75) < 1e-14));
        CHECK((std::abs(c.center.y - 0.25) < 1e-14 || std::abs(c.center.y - 0.75) < 1e-14));
    }
    CHECK(layout.cavity_scale() == doctest::Approx(1.0 / 16));

    auto one = build_layout(periodic_config(0.25, 0.5, OuterDomain::box({0, 0}, {1, 1})));
    CHECK(one.cavities.size() == 1);
    auto sixteen = build_layout(periodic_config(0.0625, 0.5, OuterDomain::box({0, 0}, {1, 1})));
    CHECK(sixteen.cavities.size() == 16);
}

TEST_CASE("build_layout: explicit passthrough and determinism of jitter") {
    LayoutConfig cfg = periodic_config(0.1, 1.0, OuterDomain::box({0, 0}, {1, 1}));
    cfg.generator = LayoutConfig::Generator::Explicit;
    cfg.explicit_centers = {{0.5, 0.5}};
    auto layout = build_layout(cfg);
    CHECK(layout.cavities.size() == 1);
    CHECK(layout.cavities[0].center.x == 0.5);

    LayoutConfig j = periodic_config(0.05, 0.8, OuterDomain::box({0, 0}, {2, 2}));
    j.generator = LayoutConfig::Generator::Jittered;
    j.seed = 42;
    auto a = build_layout(j), b = build_layout(j);
    REQUIRE(a.cavities.size() == b.cavities.size());
    for (std::size_t i = 0; i < a.cavities.size(); ++i) {
        CHECK(a.cavities[i].center.x == b.cavities[i].center.x);
        CHECK(a.cavities[i].center.y == b.cavities[i].center.y);
    }
    j.seed = 43;
    auto c = build_layout(j);
    bool any_diff = c.cavities.size() != a.cavities.size();
    for (std::size_t i = 0; !any_diff && i < a.cavities.size(); ++i)
        any_diff = a.cavities[i].center.x != c.cavities[i].center.x;
    CHECK(any_diff);
}

TEST_CASE("build_layout: rejects invalid scales and empty layouts") {
    auto cfg = periodic_config(0.125, 1.5, OuterDomain::box({0, 0}, {1, 1}));
    CHECK_THROWS_AS(build_layout(cfg), ConfigError);
    cfg = periodic_config(-0.1, 0.5, OuterDomain::box({0, 0}, {1, 1}));
    CHECK_THROWS_AS(build_layout(cfg), ConfigError);
    cfg = periodic_config(0.125, 0.5, OuterDomain::box({0, 0}, {1, 1}));
    cfg.generator = LayoutConfig::Generator::Explicit;
    cfg.explicit_centers = {};
    CHECK_THROWS_AS(build_layout(cfg), ConfigError);
}

TEST_CASE("check_assumption_a1: separation on the 4-eps lattice") {
    auto layout = build_layout(periodic_config(0.125, 0.5, OuterDomain::box({0, 0}, {1, 1})));
    auto rep = check_assumption_a1(layout);
    CHECK(rep.a1_pass());
    // center spacing 4 eps vs threshold 2*1.9 eps
    CHECK(rep.separation_ratio == doctest::Approx(4.0 / 3.8));

    // two cavities at distance 3 eps fail separation (3 < 2*1.9)
    LayoutConfig two = periodic_config(0.1, 0.5, OuterDomain::box({0, 0}, {2, 2}));
    two.generator = LayoutConfig::Generator::Explicit;
    two.explicit_centers = {{1.0, 1.0}, {1.3, 1.0}};
    auto rep2 = check_assumption_a1(build_layout(two));
    CHECK(!rep2.a1_separation);
    CHECK(rep2.separation_ratio == doctest::Approx(3.0 / 3.8));
    CHECK(rep2.a1_inclusions);
}

TEST_CASE("check_assumption_a1: inclusion checks") {
    // concentric disks: reference disk of radius R2 contains B_{R1}(0)
    LayoutConfig cfg = periodic_config(0.1, 0.5, OuterDomain::box({0, 0}, {2, 2}));
    cfg.generator = LayoutConfig::Generator::Explicit;
    cfg.explicit_centers = {{1.0, 1.0}};
    cfg.shape.radius = 1.0;  // == R2
    auto rep = check_assumption_a1(build_layout(cfg));
    CHECK(rep.cavity_checks[0].inclusion_outer);
    CHECK(rep.cavity_checks[0].inclusion_inner);

    cfg.shape.radius = 1.2;  // pokes out of B_{R2}
    auto rep2 = check_assumption_a1(build_layout(cfg));
    CHECK(!rep2.cavity_checks[0].inclusion_outer);

    // star-shaped polygon: a diamond with vertices inside B_{R2}
    cfg.shape.kind = ReferenceShape::Kind::Polygon;
    cfg.shape.radius = 0;
    cfg.shape.vertices = {{0.9, 0}, {0, 0.9}, {-0.9, 0}, {0, -0.9}};
    cfg.shape.star_shaped = true;
    auto rep3 = check_assumption_a1(build_layout(cfg));
    CHECK(rep3.cavity_checks[0].inclusion_outer);
    CHECK(rep3.cavity_checks[0].inclusion_inner);  // inradius 0.9/sqrt(2) > R1 = 0.5
    CHECK(rep3.a1_connected);

    cfg.shape.star_shaped = false;
    auto rep4 = check_assumption_a1(build_layout(cfg));
    CHECK(!rep4.a1_connected);
}

TEST_CASE("check_covering: 4-eps lattice with R4 = 3 passes, small R4 fails") {
    auto layout = build_layout(periodic_config(0.125, 0.5, OuterDomain::box({0, 0}, {1, 1})));
    auto res = check_covering(layout);
    CHECK(res.pass);
    CHECK(res.certified);
    // covering radius of the offset lattice is 2*sqrt(2)*eps at the corners
    CHECK(res.worst_dist == doctest::Approx(2.0 * std::sqrt(2.0) * 0.125).epsilon(1e-2));

    auto tight = layout;
    tight.radii.R4 = 1.95;  // still > R3, but below the 2*sqrt(2) covering radius
    auto res2 = check_covering(tight);
    CHECK(!res2.pass);
    CHECK(res2.certified);
    CHECK(res2.worst_dist > 1.95 * tight.epsilon);

    // single small cavity cannot cover a large box; worst point at a corner
    LayoutConfig single = periodic_config(0.1, 0.5, OuterDomain::box({0, 0}, {4, 4}));
    single.generator = LayoutConfig::Generator::Explicit;
    single.explicit_centers = {{2.0, 2.0}};
    auto res3 = check_covering(build_layout(single));
    CHECK(!res3.pass);
    CHECK(std::min({dist(res3.worst_point, {0, 0}), dist(res3.worst_point, {4, 0}),
                    dist(res3.worst_point, {0, 4}), dist(res3.worst_point, {4, 4})}) < 0.2);
}

TEST_CASE("check_covering: pitch validation and certified-pass soundness") {
    auto layout = build_layout(periodic_config(0.125, 0.5, OuterDomain::box({0, 0}, {1, 1})));
    CHECK_THROWS_AS(check_covering(layout, layout.epsilon * layout.radii.R4), ConfigError);

    auto res = check_covering(layout);
    REQUIRE(res.pass);
    // exhaustive finer sampling also passes
    auto fine = check_covering(layout, layout.epsilon * layout.radii.R4 / 64.0);
    CHECK(fine.pass);
    CHECK(fine.worst_dist <= layout.epsilon * layout.radii.R4);
}

TEST_CASE("check_covering: monotone in R4") {
    auto layout = build_layout(periodic_config(0.125, 0.5, OuterDomain::box({0, 0}, {1, 1})));
    bool prev_pass = false;
    for (double R4 : {2.0, 2.5, 2.9, 3.0, 3.5, 4.0}) {
        auto l = layout;
        l.radii.R4 = R4;
        auto r = check_covering(l);
        if (prev_pass) CHECK(r.pass);  // enlarging R4 never flips pass -> fail
        prev_pass = prev_pass || r.pass;
    }
    CHECK(prev_pass);
}

TEST_CASE("scale covariance of the geometric verdicts") {
    LayoutConfig cfg = periodic_config(0.1, 0.6, OuterDomain::box({0, 0}, {2, 2}));
    cfg.generator = LayoutConfig::Generator::Jittered;
    cfg.jitter_frac = 0.15;
    cfg.seed = 7;
    auto base = build_layout(cfg);
    auto rep = check_assumption_a1(base);
    auto cov = check_covering(base);
    for (double s : {0.5, 2.0, 3.7}) {
        PerforationLayout scaled = base;
        scaled.epsilon *= s;
        scaled.outer = OuterDomain::box({0, 0}, {2 * s, 2 * s});
        for (auto& c : scaled.cavities) c.center = c.center * s;
        auto rep_s = check_assumption_a1(scaled);
        CHECK(rep_s.a1_separation == rep.a1_separation);
        CHECK(rep_s.a1_boundary_clearance == rep.a1_boundary_clearance);
        CHECK(rep_s.separation_ratio == doctest::Approx(rep.separation_ratio).epsilon(1e-12));
        auto cov_s = check_covering(scaled);
        CHECK(cov_s.pass == cov.pass);
    }
}

TEST_CASE("check_alpha_bounds") {
    LayoutConfig cfg = periodic_config(0.1, 0.5, OuterDomain::box({0, 0}, {2, 2}));
    cfg.generator = LayoutConfig::Generator::Explicit;
    cfg.explicit_centers = {{1.0, 1.0}};
    cfg.bc.kind = BcAssignment::Kind::AllRobin;
    cfg.bc.sign_definite = true;
    auto layout = build_layout(cfg);
    const double r = layout.cavity_scale();  // disk radius eps*eta

    // alpha == 1: L1 = 2 pi r = 2 pi (eps eta)^{n-1}, so the c3-ratio is 2 pi
    auto res = check_alpha_bounds(layout, [](int, Vec2) { return 1.0; }, 1.0, 1.0);
    REQUIRE(res.size() == 1);
    CHECK(res[0].l1_ratio == doctest::Approx(2 * PI).epsilon(1e-6));
    CHECK(res[0].l2sq_ratio == doctest::Approx(2 * PI).epsilon(1e-6));
    CHECK(res[0].nonnegative);
    CHECK(res[0].l1_ratio >= 1.0);

    // alpha == 0 fails the lower bound
    auto zero = check_alpha_bounds(layout, [](int, Vec2) { return 0.0; }, 1.0, 1.0);
    CHECK(zero[0].l1_ratio == 0.0);
    CHECK(!zero[0].pass());

    // alpha = 1 + cos(theta): L1 = 2 pi r, L2^2 = 3 pi r
    Vec2 center{1.0, 1.0};
    auto trig = check_alpha_bounds(
        layout, [center](int, Vec2 x) { return 1.0 + (x.x - center.x) / dist(x, center); }, 2.0, 3.0);
    CHECK(trig[0].l2sq_ratio == doctest::Approx(3 * PI * r / (2.0 * r)).epsilon(1e-6));
    CHECK(trig[0].l1_ratio == doctest::Approx(2 * PI * r / (3.0 * r)).epsilon(1e-6));

    // negative alpha is flagged
    auto neg = check_alpha_bounds(layout, [center](int, Vec2 x) { return x.x - center.x; }, 1.0, 1.0);
    CHECK(!neg[0].nonnegative);
}

TEST_CASE("kappa") {
    CHECK(kappa(1.0, 2) == doctest::Approx(1.0));
    CHECK(kappa(std::exp(-1.0), 2) == doctest::Approx(2.0));
    CHECK(kappa(0.1, 3) == 1.0);
    CHECK_THROWS_AS(kappa(0.0, 2), ConfigError);
    CHECK_THROWS_AS(kappa(-1.0, 2), ConfigError);
}

TEST_CASE("smallness_indicators") {
    auto [t1a, t2a] = smallness_indicators(0.1, 1.0, 1.0, 2);
    CHECK(t1a == doctest::Approx(0.1));
    CHECK(t2a == doctest::Approx(0.01));
    auto [t1b, t2b] = smallness_indicators(0.1, 1.0, 10.0, 2);
    CHECK(t1b == doctest::Approx(0.01));
    CHECK(t2b == doctest::Approx(0.01));
    for (double eps : {0.3, 0.05}) {
        auto [t1, t2] = smallness_indicators(eps, 1.0, 1.0, 2);
        (void)t1;
        CHECK(t2 == doctest::Approx(eps * eps));
    }
    CHECK_THROWS_AS(smallness_indicators(0.1, 1.0, 0.5, 2), ConfigError);
}
