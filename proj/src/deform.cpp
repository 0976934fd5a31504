#include "mcs/deform.hpp"

#include "mcs/boundary.hpp"
#include "mcs/measure.hpp"

#include <algorithm>
#include <cmath>
#include <future>

namespace mcs::deform {

using domain::RegionKind;

namespace {

// Outward normal of the wall region the point sits on; everything the
// perturbation and descent do to boundary vertices is tangential to this.
Vec wall_normal(const ConvexDomain& dom, const Vec& x) {
    const auto mem = dom.membership(x, 1e-7);
    const auto& spec = dom.spec();
    switch (mem.region.kind) {
        case RegionKind::Plate:
            return spec.singular_dirs[mem.region.index];
        case RegionKind::Band:
        case RegionKind::CircleBand: {
            const int k = mem.region.kind == RegionKind::Band
                              ? mem.region.index
                              : static_cast<int>(spec.arcs.size()) + mem.region.index;
            const auto& arc = spec.sheet(k);
            const Vec nu =
                Vec(Vec3(arc.frame_a()).cross(Vec3(arc.frame_w())).normalized());
            Vec r = x - x.dot(nu) * nu;
            return r / r.norm();
        }
        case RegionKind::Sphere:
            return x / x.norm();
    }
    throw numeric_failure("wall_normal: unknown region");
}

// Radial projection onto the wall, the Minkowski-functional normalization.
Vec to_wall(const ConvexDomain& dom, const Vec& x) {
    const double r = dom.minkowski(x);
    if (r < 1e-12) throw numeric_failure("to_wall: point at the apex");
    return x / r;
}

// Direction of the cone trace through a wall point, when the point sits on
// the trace. Descent restricts such vertices to the wall direction across
// the trace: a boundary polyline whose vertices bunch up along the trace
// cuts corners through the domain interior, which no continuous sliding
// deformation can do, and the spurious area gain grows with delta rather
// than vanishing with the mesh size.
bool trace_tangent(const ConvexDomain& dom, const Vec& x, Vec* t) {
    if (dom.cone_distance(x) > 1e-7) return false;
    const auto mem = dom.membership(x, 1e-7);
    const auto& spec = dom.spec();
    switch (mem.region.kind) {
        case RegionKind::Plate: {
            const Vec& a = spec.singular_dirs[mem.region.index];
            Vec w = x - x.dot(a) * a;
            const double n = w.norm();
            if (n < 1e-10) return false;  // plate center: the spine tip
            *t = w / n;
            return true;
        }
        case RegionKind::Band:
        case RegionKind::CircleBand: {
            const int k = mem.region.kind == RegionKind::Band
                              ? mem.region.index
                              : static_cast<int>(spec.arcs.size()) + mem.region.index;
            const auto& arc = spec.sheet(k);
            const Vec nu =
                Vec(Vec3(arc.frame_a()).cross(Vec3(arc.frame_w())).normalized());
            const Vec u = x - x.dot(nu) * nu;
            const double s = std::atan2(u.dot(arc.frame_w()), u.dot(arc.frame_a()));
            *t = arc.tangent(s);
            return true;
        }
        case RegionKind::Sphere:
            return false;
    }
    return false;
}

// Admissible descent direction for a boundary vertex: tangent to the wall,
// and across the trace when the vertex lies on it.
Vec admissible(const ConvexDomain& dom, const Vec& x, const Vec& g) {
    const Vec n = wall_normal(dom, x);
    Vec t;
    if (trace_tangent(dom, x, &t)) {
        Vec u = Vec(Vec3(n).cross(Vec3(t)));
        const double un = u.norm();
        if (un < 1e-10) return Vec(Vec::Zero(3));
        u /= un;
        return Vec(g.dot(u) * u);
    }
    return Vec(g - g.dot(n) * n);
}

// Moves a boundary vertex by d tangentially, puts it back on the wall, and
// keeps it inside the delta ball around its reference position.
Vec slide_vertex(const ConvexDomain& dom, const Vec& x, const Vec& d, const Vec& ref,
                 double delta, bool* clamped) {
    const Vec n = wall_normal(dom, x);
    Vec y = to_wall(dom, x + (d - d.dot(n) * n));
    for (int pass = 0; pass < 5; ++pass) {
        const double drift = (y - ref).norm();
        if (drift < delta * (1.0 - 1e-9)) return y;
        if (clamped) *clamped = true;
        y = to_wall(dom, ref + (y - ref) * (delta * (1.0 - 1e-6) / drift));
    }
    return y;
}

double ring_scale(const geom::TriangleMesh& mesh, std::vector<double>& ring) {
    ring.assign(mesh.nv(), 0.0);
    double total = 0.0;
    for (int f = 0; f < mesh.nf(); ++f) {
        const double a = mesh.face_area(f);
        total += a;
        for (int e = 0; e < 3; ++e) ring[mesh.F[f][e]] += a;
    }
    return total;
}

double min_face_area(const geom::TriangleMesh& mesh) {
    double m = std::numeric_limits<double>::infinity();
    for (int f = 0; f < mesh.nf(); ++f) m = std::min(m, mesh.face_area(f));
    return m;
}

}  // namespace

ConeMesh cone_mesh(const ConvexDomain& dom, int resolution) {
    if (resolution < 4)
        throw numeric_failure("cone_mesh: resolution too coarse near the plate rims");
    const auto& spec = dom.spec();
    const int dim = spec.ambient_dim;

    std::vector<Vec> verts;
    std::vector<std::array<int, 3>> faces;
    std::vector<int> face_sheet;
    verts.push_back(Vec::Zero(dim));  // shared apex

    const Vec origin = Vec::Zero(dim);
    for (int k = 0; k < spec.sheet_count(); ++k) {
        const auto& arc = spec.sheet(k);
        const bool circ = spec.sheet_is_circle(k);
        const auto grid = boundary::sheet_s_grid(dom, k, resolution);
        const int ns = static_cast<int>(grid.size()) - 1;
        const int nr = resolution;

        std::vector<std::vector<int>> vid(ns + 1, std::vector<int>(nr + 1));
        for (int j = 0; j < ns + (circ ? 0 : 1); ++j) {
            const Vec y = arc.point(grid[j]);
            const double rmax = dom.ray_exit(origin, y, 1e-12);
            vid[j][0] = 0;
            for (int i = 1; i <= nr; ++i) {
                verts.push_back((rmax * i / nr) * y);
                vid[j][i] = static_cast<int>(verts.size()) - 1;
            }
        }
        if (circ) vid[ns] = vid[0];  // periodic seam

        for (int j = 0; j < ns; ++j) {
            faces.push_back({0, vid[j][1], vid[j + 1][1]});
            face_sheet.push_back(k);
            for (int i = 1; i < nr; ++i) {
                faces.push_back({vid[j][i], vid[j][i + 1], vid[j + 1][i + 1]});
                faces.push_back({vid[j][i], vid[j + 1][i + 1], vid[j + 1][i]});
                face_sheet.push_back(k);
                face_sheet.push_back(k);
            }
        }
    }

    Mat V(dim, verts.size());
    for (size_t i = 0; i < verts.size(); ++i) V.col(i) = verts[i];
    ConeMesh out;
    out.mesh = geom::weld_vertices(V, faces, 1e-9);
    if (out.mesh.nf() != static_cast<int>(face_sheet.size()))
        throw numeric_failure("cone_mesh: degenerate faces produced");
    out.face_sheet = std::move(face_sheet);
    out.boundary_flag.assign(out.mesh.nv(), 0);
    for (int i = 0; i < out.mesh.nv(); ++i)
        out.boundary_flag[i] =
            std::abs(dom.minkowski(out.mesh.V.col(i)) - 1.0) <= 1e-8 ? 1 : 0;
    return out;
}

double SlidingState::max_boundary_drift() const {
    double m = 0.0;
    for (int i = 0; i < mesh.nv(); ++i)
        if (boundary_flag[i]) m = std::max(m, (mesh.V.col(i) - reference.col(i)).norm());
    return m;
}

void SlidingState::validate() const {
    if (mesh.nv() != reference.cols() ||
        mesh.nv() != static_cast<int>(boundary_flag.size()))
        throw numeric_failure("SlidingState: size mismatch");
    for (int i = 0; i < mesh.nv(); ++i)
        if (boundary_flag[i] && std::abs(dom.minkowski(mesh.V.col(i)) - 1.0) > 1e-8)
            throw numeric_failure("SlidingState: boundary vertex left the wall");
    if (max_boundary_drift() >= delta)
        throw numeric_failure("SlidingState: boundary drift reached delta");
}

SlidingState make_state(const ConvexDomain& dom, int resolution, double delta) {
    return make_state_from_mesh(dom, cone_mesh(dom, resolution).mesh, delta);
}

SlidingState make_state_from_mesh(const ConvexDomain& dom, geom::TriangleMesh mesh,
                                  double delta) {
    if (!(delta > 0.0) || delta > dom.band_halfwidth())
        throw invalid_input("SlidingState: delta must lie in (0, R1]");
    if (dom.spec().ambient_dim != 3)
        throw invalid_input("SlidingState: sliding harness is 3-d only");
    SlidingState st{dom, std::move(mesh), Mat(), {}, delta};
    st.reference = st.mesh.V;
    st.boundary_flag.assign(st.mesh.nv(), 0);
    for (int i = 0; i < st.mesh.nv(); ++i)
        st.boundary_flag[i] =
            std::abs(dom.minkowski(st.mesh.V.col(i)) - 1.0) <= 1e-8 ? 1 : 0;
    st.validate();
    return st;
}

SlidingState random_sliding_perturbation(const SlidingState& state, double amplitude,
                                         std::uint64_t seed) {
    if (amplitude < 0 || amplitude >= state.delta)
        throw invalid_input("random_sliding_perturbation: amplitude must lie in [0, delta)");
    if (amplitude == 0.0) return state;

    // Four smooth sinusoidal modes; the coefficient normalization makes the
    // field amplitude-bounded pointwise.
    Rng rng(seed);
    const int modes = 4;
    std::vector<Vec> wavevec, coeff;
    std::vector<double> phase;
    double csum = 0.0;
    for (int m = 0; m < modes; ++m) {
        wavevec.push_back(2.5 * rng.normal_vec(3));
        coeff.push_back(rng.uniform(0.5, 1.0) * rng.unit_vec(3));
        phase.push_back(rng.uniform(0.0, 2.0 * kPi));
        csum += coeff.back().norm();
    }
    auto field = [&](const Vec& x, double amp) {
        Vec f = Vec::Zero(3);
        for (int m = 0; m < modes; ++m)
            f += coeff[m] * std::sin(wavevec[m].dot(x) + phase[m]);
        return Vec((amp / csum) * f);
    };

    double amp = amplitude;
    for (int attempt = 0; attempt < 10; ++attempt, amp *= 0.5) {
        SlidingState next = state;
        bool ok = true;
        for (int i = 0; i < next.mesh.nv() && ok; ++i) {
            const Vec x = state.mesh.V.col(i);
            if (x.norm() < 1e-12) continue;  // apex stays put
            const Vec d = field(x, amp);
            if (state.boundary_flag[i]) {
                const Vec n = wall_normal(state.dom, x);
                const Vec y = to_wall(state.dom, x + (d - d.dot(n) * n));
                if ((y - state.reference.col(i)).norm() >= state.delta * (1.0 - 1e-9)) {
                    ok = false;
                    break;
                }
                next.mesh.V.col(i) = y;
            } else {
                Vec y = x + d;
                if (state.dom.minkowski(y) > 1.0) y = to_wall(state.dom, y);
                next.mesh.V.col(i) = y;
            }
        }
        if (!ok) continue;
        next.validate();
        return next;
    }
    throw numeric_failure("random_sliding_perturbation: drift bound kept failing");
}

Mat area_gradient(const geom::TriangleMesh& mesh) {
    if (mesh.V.rows() != 3) throw invalid_input("area_gradient: 3-d meshes only");
    Mat G = Mat::Zero(3, mesh.nv());
    for (int f = 0; f < mesh.nf(); ++f) {
        const auto& t = mesh.F[f];
        const Vec3 p(mesh.V.col(t[0])), q(mesh.V.col(t[1])), r(mesh.V.col(t[2]));
        const Vec3 n = (q - p).cross(r - p);
        const double nn = n.norm();
        if (nn < 1e-14) continue;  // gradient of a collapsed face is undefined
        const Vec3 nh = n / nn;
        G.col(t[0]) += 0.5 * nh.cross(r - q);
        G.col(t[1]) += 0.5 * nh.cross(p - r);
        G.col(t[2]) += 0.5 * nh.cross(q - p);
    }
    return G;
}

DescentResult area_descent(const SlidingState& start, const DescentOptions& opt) {
    DescentResult out{start, {}};
    SlidingState& st = out.state;
    const int nv = st.mesh.nv();

    std::vector<double> ring;
    double area = ring_scale(st.mesh, ring);
    double tau = 0.25;
    bool stopped = false;

    for (int iter = 0; iter <= opt.max_iter && !stopped; ++iter) {
        Mat G = area_gradient(st.mesh);
        // Only wall-tangential motion is admissible on the boundary, and
        // only across the trace for vertices sitting on the cone.
        for (int i = 0; i < nv; ++i)
            if (st.boundary_flag[i])
                G.col(i) = admissible(st.dom, st.mesh.V.col(i), Vec(G.col(i)));
        const double gnorm = G.norm();
        out.trace.steps.push_back({iter, area, gnorm, st.max_boundary_drift()});
        if (gnorm < opt.tol_grad) {
            out.trace.reason = StopReason::Converged;
            break;
        }
        if (iter == opt.max_iter) {
            out.trace.reason = StopReason::MaxIter;
            break;
        }

        // Jacobi step, ring-area preconditioned, backtracking on total area.
        bool accepted = false;
        bool clamped_any = false;
        for (int bt = 0; bt < 30 && !accepted; ++bt, tau *= 0.5) {
            geom::TriangleMesh trial = st.mesh;
            bool clamped = false;
            for (int i = 0; i < nv; ++i) {
                if (ring[i] < 1e-14) continue;
                const Vec d = Vec(-tau * 3.0 / ring[i] * G.col(i));
                const Vec x = st.mesh.V.col(i);
                if (x.norm() < 1e-12) continue;  // apex pinned by symmetry of its ring
                if (st.boundary_flag[i]) {
                    trial.V.col(i) = slide_vertex(st.dom, x, d, st.reference.col(i),
                                                  st.delta, &clamped);
                } else {
                    Vec y = x + d;
                    if (st.dom.minkowski(y) > 1.0) y = to_wall(st.dom, y);
                    trial.V.col(i) = y;
                }
            }
            std::vector<double> trial_ring;
            const double trial_area = ring_scale(trial, trial_ring);
            if (trial_area < area - 1e-15 * std::max(1.0, area) &&
                min_face_area(trial) > 1e-12) {
                st.mesh = std::move(trial);
                ring = std::move(trial_ring);
                area = trial_area;
                tau = std::min(tau * 2.6, 1.0);  // undo the halving, then grow
                accepted = true;
                clamped_any = clamped_any || clamped;
            }
        }
        if (!accepted) {
            out.trace.reason =
                clamped_any ? StopReason::ConstraintHit : StopReason::Converged;
            stopped = true;
        }
        if (tau < 1e-12) tau = 1e-12;
    }
    st.validate();
    return out;
}

ExperimentSummary stability_experiment(const ConvexDomain& dom, double delta, int trials,
                                       std::uint64_t seed, const ExperimentOptions& opt) {
    if (trials < 1) throw invalid_input("stability_experiment: trials must be positive");
    if (!(delta > 0.0) || delta > dom.band_halfwidth())
        throw invalid_input("stability_experiment: delta must lie in (0, R1]");

    ExperimentSummary sum;
    sum.trials = trials;
    sum.cone_area =
        measure::clipped_cone_area(dom, measure::Translation::none(dom.spec().ambient_dim), {}).value;

    const SlidingState base = make_state(dom, opt.resolution, delta);
    auto run_trial = [&](int t) {
        const SlidingState pert =
            random_sliding_perturbation(base, opt.amplitude, mix_seed(seed, t, 0));
        return area_descent(pert, opt.descent);
    };

    std::vector<std::future<DescentResult>> jobs;
    for (int t = 0; t < trials; ++t)
        jobs.push_back(std::async(std::launch::async, run_trial, t));

    sum.min_final_area = std::numeric_limits<double>::infinity();
    sum.max_final_area = 0.0;
    for (int t = 0; t < trials; ++t) {
        DescentResult r = jobs[t].get();
        const double a = r.trace.steps.back().area;
        if (a >= sum.cone_area - opt.area_tol) ++sum.recovered;
        else if (!opt.counterexample_path.empty() && sum.counterexample.empty()) {
            geom::write_obj(opt.counterexample_path, r.state.mesh);
            sum.counterexample = opt.counterexample_path;
        }
        sum.min_final_area = std::min(sum.min_final_area, a);
        sum.max_final_area = std::max(sum.max_final_area, a);
        sum.traces.push_back(std::move(r.trace));
    }
    sum.pass = sum.recovered == trials;
    return sum;
}

}  // namespace mcs::deform
