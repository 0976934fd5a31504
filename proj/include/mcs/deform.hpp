#pragma once
// Sliding-deformation harness: triangulate the clipped cone, perturb it by
// smooth random fields that keep boundary vertices on the domain wall and
// within delta of where they started, then run constrained area-gradient
// descent to see whether the cone is recovered.
#include "mcs/domain.hpp"

#include <string>
#include <vector>

namespace mcs::deform {

using domain::ConvexDomain;

// Triangulated K cap U with per-face sheet indices; vertices in the top row
// of each sheet sit on the domain boundary (placed by ray bisection).
struct ConeMesh {
    geom::TriangleMesh mesh;
    std::vector<int> face_sheet;
    std::vector<char> boundary_flag;  // per vertex
};

ConeMesh cone_mesh(const ConvexDomain& dom, int resolution);

// A deformable surface tied to its domain: boundary vertices must stay on
// the wall and within delta of their reference positions.
struct SlidingState {
    ConvexDomain dom;
    geom::TriangleMesh mesh;
    Mat reference;                    // vertex positions before any sliding
    std::vector<char> boundary_flag;  // per vertex
    double delta = 0.0;

    double max_boundary_drift() const;
    void validate() const;  // throws numeric_failure when an invariant fails
};

SlidingState make_state(const ConvexDomain& dom, int resolution, double delta);
SlidingState make_state_from_mesh(const ConvexDomain& dom, geom::TriangleMesh mesh,
                                  double delta);

// Displaces interior vertices by a bounded smooth field; boundary vertices
// move tangentially and are re-projected onto the wall radially. Halves the
// amplitude and retries when re-projection would break the drift bound.
SlidingState random_sliding_perturbation(const SlidingState& state, double amplitude,
                                         std::uint64_t seed);

// Per-vertex gradient of total mesh area, one column per vertex.
Mat area_gradient(const geom::TriangleMesh& mesh);

enum class StopReason { Converged, MaxIter, ConstraintHit };

struct DescentTrace {
    struct Step {
        int step;
        double area;
        double gradient_norm;
        double max_drift;
    };
    std::vector<Step> steps;
    StopReason reason = StopReason::MaxIter;
};

struct DescentResult {
    SlidingState state;
    DescentTrace trace;
};

struct DescentOptions {
    int max_iter = 400;
    double tol_grad = 1e-7;
};

DescentResult area_descent(const SlidingState& start, const DescentOptions& opt = {});

struct ExperimentOptions {
    int resolution = 16;
    double amplitude = 0.02;
    DescentOptions descent;
    double area_tol = 1e-3;           // final area may trail the cone by this
    std::string counterexample_path;  // OBJ written here when a trial ends low
};

struct ExperimentSummary {
    int trials = 0;
    int recovered = 0;  // trials ending within area_tol of the cone area
    double cone_area = 0.0;
    double min_final_area = 0.0;
    double max_final_area = 0.0;
    bool pass = false;
    std::string counterexample;        // path of the saved OBJ, empty when none
    std::vector<DescentTrace> traces;  // one per trial, in trial order
};

ExperimentSummary stability_experiment(const ConvexDomain& dom, double delta, int trials,
                                       std::uint64_t seed, const ExperimentOptions& opt = {});

}  // namespace mcs::deform
