#pragma once

// Triangle and edge quadrature rules (barycentric weights normalized to 1).

#include <array>

#include "perfhom/common.hpp"

namespace perfhom::quad {

struct TriRule {
    int n = 0;
    // barycentric coordinates and weights (weights sum to 1)
    std::array<std::array<double, 3>, 6> bary{};
    std::array<double, 6> w{};
};

// midpoint rule, exact for quadratics
inline const TriRule& tri_order2() {
    static const TriRule r = [] {
        TriRule t;
        t.n = 3;
        t.bary[0] = {0.5, 0.5, 0.0};
        t.bary[1] = {0.0, 0.5, 0.5};
        t.bary[2] = {0.5, 0.0, 0.5};
        t.w = {1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 0, 0};
        return t;
    }();
    return r;
}

// 6-point rule, exact for quartics
inline const TriRule& tri_order4() {
    static const TriRule r = [] {
        TriRule t;
        t.n = 6;
        const double a1 = 0.445948490915965, w1 = 0.223381589678011;
        const double a2 = 0.091576213509771, w2 = 0.109951743655322;
        t.bary[0] = {a1, a1, 1 - 2 * a1};
        t.bary[1] = {a1, 1 - 2 * a1, a1};
        t.bary[2] = {1 - 2 * a1, a1, a1};
        t.bary[3] = {a2, a2, 1 - 2 * a2};
        t.bary[4] = {a2, 1 - 2 * a2, a2};
        t.bary[5] = {1 - 2 * a2, a2, a2};
        t.w = {w1, w1, w1, w2, w2, w2};
        return t;
    }();
    return r;
}

// 2-point Gauss on [0,1], exact for cubics
struct EdgeRule {
    std::array<double, 2> t{0.5 - 0.5 / 1.7320508075688772, 0.5 + 0.5 / 1.7320508075688772};
    std::array<double, 2> w{0.5, 0.5};
};

inline const EdgeRule& edge_gauss2() {
    static const EdgeRule r;
    return r;
}

} // namespace perfhom::quad
