#pragma once
// Verification battery for the stability properties of the clipped cones:
// translation scans of the measure, the quadratic remainder of recentered
// cones, slice connectivity with the Fermat/Viviani lower bound, the band
// and plate projection constants, and the tetrahedral calibration identity
// with its lower-bound functional.
#include "mcs/boundary.hpp"
#include "mcs/measure.hpp"

#include <array>
#include <vector>

namespace mcs::stability {

using domain::ConvexDomain;

// --- translation scan -----------------------------------------------------

struct ScanSample {
    double t = 0.0;
    double area = 0.0;
    double error = 0.0;  // quadrature estimate
};

struct TranslationScan {
    Vec q;
    std::vector<ScanSample> samples;  // sorted by t, includes t = 0
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;  // least-squares area(t) ~ c0+c1 t+c2 t^2
    double max_rel_variation = 0.0;       // against the t = 0 sample
    double tol_effective = 0.0;           // max(tol_rel, 3x quadrature error)
    bool pass = false;
};

// Areas of the translated clipped cone over the grid; the verdict compares
// the relative variation against max(tol_rel, three times the worst
// quadrature error estimate).
TranslationScan measure_stability_scan(const ConvexDomain& dom, const Vec& q,
                                       std::vector<double> t_grid,
                                       const measure::QuadBudget& budget = {},
                                       double tol_rel = 1e-4);

// --- recentered cone gap ---------------------------------------------------

struct GapSample {
    double s = 0.0;
    double gap = 0.0;  // area(cone over old trace) - area(cone over new trace)
};

struct RecenteredGap {
    double t0 = 0.0;
    std::vector<GapSample> samples;
    double slope = 0.0;  // log-log least squares; quadratic remainder means ~2
    bool pass = false;   // slope >= 1.9
};

// Both cones are centered at the translated apex (t0+s)q and measured as
// dense fans over the exact wall traces of the cone translated by t0 and by
// t0+s; the common sampling makes the fan discretization bias cancel.
RecenteredGap recentered_cone_gap(const ConvexDomain& dom, const Vec& q, double t0,
                                  std::vector<double> s_list, int rim_samples = 3000);

// --- planar slice bounds ---------------------------------------------------

struct Line2 {
    Vec point;  // 2-d
    Vec dir;    // unit
};

// Sum of distances from p to the three sides; constant over an equilateral
// triangle, so any interior point returns the height.
double viviani_sum(const Mat& triangle, const Vec& p);

// Geometric median of a point set by Weiszfeld iteration (test oracle).
Vec fermat_point(const std::vector<Vec>& pts, int max_iter = 200, double tol = 1e-13);

// Lower bound for the length of any connected planar set meeting the three
// rim segments: the Fermat total of the three meeting points dominates the
// sum of line distances, which the equilateral enclosure makes constant.
double fermat_lower_bound(const std::vector<Vec>& gates, const std::array<Line2, 3>& lines);

// True when every gate is connected to the others through the slice pieces
// glued at glue_tol.
bool slice_connectivity(const measure::SliceProfile& profile, const Mat& gates,
                        double glue_tol = 1e-7);

// --- projection constants --------------------------------------------------

// Cylindrical strip over an arc of angle theta, half-width R1, with the two
// tilted projection planes spanned by e2 and cos(alpha) e1 +- sin(alpha) v.
struct BandSpec {
    double theta = kPi;
    double alpha = kPi / 2;
    double R1 = 0.5;
    Vec e1, e2, v;

    static BandSpec standard(double theta, double alpha, double R1);
};

struct ConstantCheck {
    double lhs = 0.0;
    double rhs = 0.0;
};

// lhs integrates the honest projection Jacobian cell by cell with each
// cell's assigned plane (+1 or -1); rhs is 4 R1 sin(alpha) sin(theta/2).
ConstantCheck band_constant_check(const BandSpec& band, const std::vector<int>& cell_signs,
                                  int n_beta, int n_u);

// Disk of radius R tilted by alpha against three projection planes, one per
// rim chord direction at mutual angle 2 pi/3.
struct PlateSpec {
    double R = 0.5;
    double alpha = kPi / 4;
    double chord_distance = 0.3;  // distance of the rim chords from the center

    static PlateSpec standard(double R, double alpha, double chord_distance);
};

// lhs sums |Jacobian| x exact polar cell area with each cell's assigned
// plane from the coloring (values 0, 1, 2); rhs is cos(alpha) pi R^2.
ConstantCheck plate_constant_check(const PlateSpec& plate, const std::vector<int>& coloring,
                                   int n_r, int n_phi);

// --- tetrahedral calibration -----------------------------------------------

// Film (the interior surface) plus the labeled wall shell. Each film face
// records the pair of complement cells it separates, normal pointing from
// cell_a toward cell_b; wall components map to cells via the antipodes.
struct LabeledSurface {
    geom::TriangleMesh film;
    std::vector<std::array<int, 2>> face_cells;  // per film face: (cell_a, cell_b)
    boundary::LabeledMesh shell;
    std::vector<int> cell_of_component;
    std::vector<Vec> cell_dirs;  // direction whose antipode anchors each cell

    int cell_count() const { return static_cast<int>(cell_of_component.size()); }
};

LabeledSurface t_labeled_surface(const ConvexDomain& dom, int resolution);

struct CalibrationResult {
    double flux = 0.0;   // sum over film faces of area <n, a_cell_a - a_cell_b>
    double bound = 0.0;  // |a_i - a_k| x film area, the Cauchy-Schwarz cap
    std::vector<double> closure_defect;  // per cell: |vector area of its shell+film|
    std::vector<double> shell_flux;      // per cell j: integral over D_j of |<n, a_j>|
    bool injective_sampled = true;       // no projected-centroid collisions found
    bool sign_constant = true;           // <n, a_j> one-signed on each D_j
};

CalibrationResult calibration_functional(const LabeledSurface& ls);

struct CalibrationIdentity {
    double lhs = 0.0;  // quadrature area of the clipped cone
    double rhs = 0.0;  // sqrt(3)/(2 sqrt(2)) x total shell flux
    CalibrationResult detail;
};

CalibrationIdentity t_calibration_identity(const ConvexDomain& dom, int resolution);

}  // namespace mcs::stability
