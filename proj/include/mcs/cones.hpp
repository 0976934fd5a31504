#pragma once

// Cone specifications.  A cone is the union of 2-d sheets: one sheet per
// great-circle arc between singular directions and one per full great circle.
// The three model cones are the plane (one circle, no singular directions),
// the Y (two antipodal singular directions, three half-circle arcs through
// the 120-degree horizontal frame) and the T (four tetrahedral directions,
// six connecting arcs).  Specs built for ambient dimension n > 3 pad the 3-d
// coordinates with zeros.

#include "mcs/geometry.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace mcs::cones {

using geom::SphericalArc;

// Arc sheet between singular directions i and j; `via` pins the branch when
// the endpoints are antipodal.
struct ArcEdge {
    int i = -1;
    int j = -1;
    Vec via;  // point on the open arc, empty when the shorter arc is meant
    SphericalArc arc;
};

struct ConeSpec {
    std::string name;  // "plane", "y", "t" or a custom label
    int ambient_dim = 3;
    std::vector<Vec> singular_dirs;  // unit vectors, pairwise distinct
    std::vector<ArcEdge> arcs;
    std::vector<SphericalArc> circles;

    int sheet_count() const { return static_cast<int>(arcs.size() + circles.size()); }
    // Sheets in fixed order: arcs first, then circles.
    const SphericalArc& sheet(int k) const;
    std::string sheet_label(int k) const;  // "arc_0", ..., "circle_0", ...
    bool sheet_is_circle(int k) const { return k >= static_cast<int>(arcs.size()); }

    void validate() const;
};

// x(r, s) = base + r * y_k(s) on sheet k; the area element is r dr ds.
struct SheetPoint {
    Vec x;
    double jacobian;  // r
};
SheetPoint sheet_parametrization(const ConeSpec& spec, int sheet, const Vec& base, double r,
                                 double s);

ConeSpec build_plane(int dim = 3);
ConeSpec build_y(int dim = 3);
ConeSpec build_t(int dim = 3);
ConeSpec build_named(const std::string& name, int dim);

// Apply a rigid rotation to every direction and frame of the spec.
ConeSpec rotated(const ConeSpec& spec, const Mat& rotation);

// Distance from x to the cone (min over sheets, apex included).
double distance_to_cone(const ConeSpec& spec, const Vec& x);

nlohmann::json to_json(const ConeSpec& spec);
ConeSpec cone_from_json(const nlohmann::json& j);

// Pairwise Gram matrix of the singular directions.
Mat singular_gram(const ConeSpec& spec);

}  // namespace mcs::cones
