#pragma once

// The eta-convex neighborhood U of a cone inside the unit ball:
//
//   U = { x : |x| < 1,  <x, y> < 1-eta  for every y on the spherical net,
//             <x, a_j> < 1-2*eta  for every singular direction a_j }.
//
// Its boundary decomposes into flat plates (one disk per singular direction,
// radius R = sqrt(1-(1-2 eta)^2)), flat band strips over each net arc or
// circle (reaching R1 = sqrt(1-(1-eta)^2) on both sides) and leftover
// spherical pieces.  All defining constraints are positively homogeneous, so
// the Minkowski functional has a closed form and the radial map x -> x/r(x)
// projects onto the boundary.

#include "mcs/cones.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace mcs::domain {

using cones::ConeSpec;

enum class RegionKind { Plate, Band, CircleBand, Sphere };

struct RegionId {
    RegionKind kind = RegionKind::Sphere;
    int index = -1;  // plate: singular direction; band: arc index; circle band: circle index

    bool operator==(const RegionId& o) const { return kind == o.kind && index == o.index; }
    std::string label() const;
};

enum class Location { Interior, Boundary, Exterior };

struct Membership {
    Location location = Location::Exterior;
    RegionId region;     // meaningful on the boundary
    double max_excess;   // max over constraints of (value - level), <0 inside
};

class ConvexDomain {
  public:
    ConvexDomain(ConeSpec spec, double eta);

    const ConeSpec& spec() const { return spec_; }
    double eta() const { return eta_; }
    double plate_level() const { return 1.0 - 2.0 * eta_; }
    double band_level() const { return 1.0 - eta_; }
    // Plate radius R and band half-width R1.
    double plate_radius() const { return std::sqrt(1.0 - sq(plate_level())); }
    double band_halfwidth() const { return std::sqrt(1.0 - sq(band_level())); }
    // In-plate distance from a plate center to its rim chords.
    double plate_chord_distance() const { return std::sqrt(sq(band_level()) - sq(plate_level())); }
    // Arc parameter at which a sheet trace switches from plate to band.
    double gate_angle() const { return std::acos(plate_level() / band_level()); }

    // Minkowski functional: r(x) = inf { t > 0 : x/t in closure(U) }; the
    // radial boundary projection is x / r(x).
    double minkowski(const Vec& x) const;
    Vec project_boundary(const Vec& x) const;

    Membership membership(const Vec& x, double tol = 1e-10) const;
    bool contains(const Vec& x, double tol = 0.0) const;

    // Largest r >= 0 with base + r*u in closure(U); bisection to `tol`.
    // Requires base in closure(U).
    double ray_exit(const Vec& base, const Vec& u, double tol = 1e-12) const;

    // Distance from x to the cone itself (closed form per sheet).
    double cone_distance(const Vec& x) const { return cones::distance_to_cone(spec_, x); }

    // V_delta test: x lies on the boundary (within tol) and within delta of
    // the cone.  Fills the boundary region of x when it does.
    bool sliding_neighborhood_contains(const Vec& x, double delta, RegionId* region = nullptr,
                                       double tol = 1e-8) const;

    nlohmann::json to_json() const;
    static ConvexDomain from_json(const nlohmann::json& j);

  private:
    ConeSpec spec_;
    double eta_;
};

// Certified lower bound for the largest admissible eta: scans a grid of eta
// values and keeps those where (a) the plate caps around distinct singular
// directions stay disjoint (analytic spherical-cap test) and (b) no sampled
// boundary point has three near-active band constraints.  Returns the last
// passing grid value minus a safety margin.
struct Eta1Estimate {
    double eta1 = 0.0;
    double margin = 0.0;
    bool plate_limited = false;  // which test bound the estimate
};
Eta1Estimate eta1_estimate(const ConeSpec& spec, int grid = 80, int sphere_samples = 20000,
                           double margin = 1e-3);

}  // namespace mcs::domain
