#pragma once

// Hausdorff measures of clipped, translated cones.  Each sheet of the
// translated cone K + b meets the convex domain in a radially convex patch
// { b + r y(s) : 0 <= r <= rmax(s) }, so its area is the 1-d integral of
// rmax(s)^2 / 2.  rmax is located by bisection (the domain is convex), and
// the s-integral uses adaptive Gauss-Legendre subdivision so the kinks where
// the active constraint changes are resolved.  A stratified Monte Carlo
// estimator over the same (r, s) parametrization serves as an independent
// oracle.  Plane slices of films and the resulting coarea sums live here too.

#include "mcs/domain.hpp"

#include <map>
#include <vector>

namespace mcs::measure {

using domain::ConvexDomain;

struct Translation {
    Vec q;          // unit direction
    double t = 0.0; // magnitude

    Vec offset() const { return t * q; }
    static Translation none(int dim) { return Translation{Vec::Zero(dim), 0.0}; }
};

struct QuadBudget {
    double rel_tol = 1e-9;
    int max_intervals = 6000;   // across all sheets
    double bisect_tol = 1e-12;  // radial cut tolerance
};

struct AreaResult {
    double value = 0.0;
    double error = 0.0;  // quadrature error estimate
    std::map<std::string, double> per_piece;
    long evaluations = 0;
};

// H^2((K + t q) cap U).  Requires the translated apex to stay inside U.
AreaResult clipped_cone_area(const ConvexDomain& dom, const Translation& tr,
                             const QuadBudget& budget = {});

struct McResult {
    double value = 0.0;
    double stderr_est = 0.0;
    std::uint64_t samples = 0;
};

// Stratified Monte Carlo oracle for the same quantity (weight r in the
// (r, s) sheet parametrization, fixed strata, deterministic per seed).
McResult mc_cone_area_oracle(const ConvexDomain& dom, const Translation& tr,
                             std::uint64_t samples, std::uint64_t seed);

struct SliceProfile {
    double t = 0.0;
    std::vector<geom::Polyline> pieces;
    double length = 0.0;
    int degenerate_faces = 0;  // faces lying inside the slicing plane
};

// Closed-form slice of the (possibly translated) Y cone by the hyperplane
// <x, spine> = t: line segments from the spine point to the band gates.
SliceProfile slice_y_cone(const ConvexDomain& dom, const Translation& tr, double t);

// Generic mesh slice by <x, axis> = t; segments glued into chains when
// endpoints coincide within glue_tol.
SliceProfile slice_mesh(const geom::TriangleMesh& mesh, const Vec& axis, double t,
                        double glue_tol = 1e-7);

// Points of a slice lying on the domain boundary within tol.
Mat slice_gates(const ConvexDomain& dom, const SliceProfile& profile, double tol = 1e-8);

struct CoareaResult {
    double integral = 0.0;   // trapezoid of slice lengths over the t-grid
    double quad_error = 0.0; // Richardson estimate from the half-resolution grid
    std::vector<double> ts, lengths;
};

// Trapezoid approximation of the coarea integral of slice lengths.  For any
// film and a unit axis this is bounded by the film area up to quadrature
// error (the slices of a 1-Lipschitz level function cannot overshoot).
CoareaResult coarea_lower_bound(const geom::TriangleMesh& mesh, const Vec& axis, double t_lo,
                                double t_hi, int n_slices);

}  // namespace mcs::measure
