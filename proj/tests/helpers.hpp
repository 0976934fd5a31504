#pragma once

// Shared test fixtures: small reference meshes and analytic oracle values.

#include "mcs/geometry.hpp"

#include <cmath>
#include <map>
#include <vector>

namespace testutil {

using mcs::Mat;
using mcs::Vec;
using mcs::Vec3;

// Icosphere: subdivided icosahedron with vertices pushed to the unit sphere.
inline mcs::geom::TriangleMesh icosphere(int level) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                           {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                           {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
    for (auto& p : v) p.normalize();
    std::vector<std::array<int, 3>> f = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},
        {5, 11, 4}, {11, 10, 2}, {10, 7, 6},  {7, 1, 8},  {3, 9, 4},   {3, 4, 2},
        {3, 2, 6},  {3, 6, 8},  {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10},
        {8, 6, 7},  {9, 8, 1}};
    for (int it = 0; it < level; ++it) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto found = midpoint.find(key);
            if (found != midpoint.end()) return found->second;
            Vec3 m = (v[a] + v[b]).normalized();
            v.push_back(m);
            const int idx = static_cast<int>(v.size()) - 1;
            midpoint[key] = idx;
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(f.size() * 4);
        for (const auto& t : f) {
            const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        f = std::move(next);
    }
    Mat V(3, static_cast<int>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) V.col(static_cast<int>(i)) = v[i];
    return mcs::geom::TriangleMesh::build(std::move(V), std::move(f));
}

// Open cylinder of the given radius/height about the z axis.
inline mcs::geom::TriangleMesh cylinder(double radius, double z_lo, double z_hi, int n_seg,
                                        int n_rows) {
    Mat V(3, n_seg * (n_rows + 1));
    std::vector<std::array<int, 3>> F;
    for (int r = 0; r <= n_rows; ++r) {
        const double z = z_lo + (z_hi - z_lo) * r / n_rows;
        for (int k = 0; k < n_seg; ++k) {
            const double a = 2.0 * mcs::kPi * k / n_seg;
            V.col(r * n_seg + k) = Vec3(radius * std::cos(a), radius * std::sin(a), z);
        }
    }
    for (int r = 0; r < n_rows; ++r) {
        for (int k = 0; k < n_seg; ++k) {
            const int k2 = (k + 1) % n_seg;
            const int a = r * n_seg + k, b = r * n_seg + k2;
            const int c = (r + 1) * n_seg + k, d = (r + 1) * n_seg + k2;
            F.push_back({a, b, d});
            F.push_back({a, d, c});
        }
    }
    return mcs::geom::TriangleMesh::build(std::move(V), std::move(F));
}

// Analytic area of one Y sheet clipped to U: a half disk of radius 1-eta cut
// at height 1-2*eta on both sides.
inline double y_sheet_area(double eta) {
    const double rho = 1.0 - eta;
    const double d = 1.0 - 2.0 * eta;
    return d * std::sqrt(rho * rho - d * d) + rho * rho * std::asin(d / rho);
}

}  // namespace testutil
