#pragma once

// Exact geometric predicates on a snapped integer grid.
//
// All triangulation points are quantized to a 2^28 grid spanning the inflated
// domain bounding box. orient2d and incircle are then evaluated in 128-bit
// integer arithmetic, which is exact for this coordinate range, so the
// Bowyer-Watson cavity logic never sees an inconsistent sign. Quantization
// error is ~4e-9 of the domain span, far below any mesh size used here.

#include <cstdint>
#include <cmath>

#include "perfhom/common.hpp"

namespace perfhom::exact {

using i64 = std::int64_t;
using i128 = __int128;

struct IPoint {
    i64 x = 0, y = 0;
    bool operator==(const IPoint& o) const { return x == o.x && y == o.y; }
};

struct SnapFrame {
    Vec2 origin;
    double step = 1.0;

    // margin_frac inflates the frame beyond the domain box so circumcenters
    // of interior triangles stay representable.
    static SnapFrame from_bbox(Vec2 lo, Vec2 hi, double margin_frac = 0.5) {
        SnapFrame f;
        double span = std::max(hi.x - lo.x, hi.y - lo.y);
        if (!(span > 0)) throw MeshError("degenerate bounding box");
        f.step = span / double(1 << 28);
        f.origin = {lo.x - margin_frac * span, lo.y - margin_frac * span};
        return f;
    }

    IPoint snap(const Vec2& p) const {
        double qx = (p.x - origin.x) / step;
        double qy = (p.y - origin.y) / step;
        const double limit = 1.6e9;  // keep |q| well under 2^31
        if (!(std::abs(qx) < limit && std::abs(qy) < limit)) throw MeshError("point outside snap frame");
        return {i64(std::llround(qx)), i64(std::llround(qy))};
    }
    Vec2 unsnap(const IPoint& q) const {
        return {origin.x + double(q.x) * step, origin.y + double(q.y) * step};
    }
    bool representable(const Vec2& p) const {
        double qx = (p.x - origin.x) / step;
        double qy = (p.y - origin.y) / step;
        return std::abs(qx) < 1.6e9 && std::abs(qy) < 1.6e9;
    }
};

inline int sign_of(i128 v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

// > 0 iff (a,b,c) makes a left turn
inline int orient(const IPoint& a, const IPoint& b, const IPoint& c) {
    i128 det = i128(b.x - a.x) * i128(c.y - a.y) - i128(b.y - a.y) * i128(c.x - a.x);
    return sign_of(det);
}

// > 0 iff d lies strictly inside the circumcircle of CCW triangle (a,b,c)
inline int incircle(const IPoint& a, const IPoint& b, const IPoint& c, const IPoint& d) {
    i128 adx = a.x - d.x, ady = a.y - d.y;
    i128 bdx = b.x - d.x, bdy = b.y - d.y;
    i128 cdx = c.x - d.x, cdy = c.y - d.y;
    i128 ad2 = adx * adx + ady * ady;
    i128 bd2 = bdx * bdx + bdy * bdy;
    i128 cd2 = cdx * cdx + cdy * cdy;
    i128 det = adx * (bdy * cd2 - cdy * bd2) - ady * (bdx * cd2 - cdx * bd2) + ad2 * (bdx * cdy - cdx * bdy);
    return sign_of(det);
}

// > 0 iff p lies strictly inside the diametral circle of segment (a,b)
inline int in_diametral_circle(const IPoint& a, const IPoint& b, const IPoint& p) {
    i128 dot = i128(a.x - p.x) * i128(b.x - p.x) + i128(a.y - p.y) * i128(b.y - p.y);
    return sign_of(-dot);
}

inline i128 seg_length2(const IPoint& a, const IPoint& b) {
    return i128(a.x - b.x) * i128(a.x - b.x) + i128(a.y - b.y) * i128(a.y - b.y);
}

} // namespace perfhom::exact
