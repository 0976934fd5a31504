#include "mcs/stability.hpp"

#include "mcs/deform.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <numeric>

namespace mcs::stability {

using domain::RegionKind;
using measure::Translation;

// --- translation scan -------------------------------------------------------

TranslationScan measure_stability_scan(const ConvexDomain& dom, const Vec& q,
                                       std::vector<double> t_grid,
                                       const measure::QuadBudget& budget, double tol_rel) {
    if (q.size() != dom.spec().ambient_dim || std::abs(q.norm() - 1.0) > 1e-9)
        throw invalid_input("measure_stability_scan: q must be a unit direction");
    for (double t : t_grid)
        if (std::abs(t) >= dom.eta())
            throw invalid_input("measure_stability_scan: |t| must stay below eta");
    if (std::none_of(t_grid.begin(), t_grid.end(), [](double t) { return t == 0.0; }))
        t_grid.push_back(0.0);
    std::sort(t_grid.begin(), t_grid.end());
    t_grid.erase(std::unique(t_grid.begin(), t_grid.end()), t_grid.end());

    TranslationScan scan;
    scan.q = q;
    std::vector<std::future<measure::AreaResult>> jobs;
    for (double t : t_grid)
        jobs.push_back(std::async(std::launch::async, [&, t] {
            return measure::clipped_cone_area(dom, Translation{q, t}, budget);
        }));
    for (size_t i = 0; i < t_grid.size(); ++i) {
        const auto r = jobs[i].get();
        scan.samples.push_back({t_grid[i], r.value, r.error});
    }

    double area0 = 0.0, max_err = 0.0;
    for (const auto& s : scan.samples) {
        if (s.t == 0.0) area0 = s.area;
        max_err = std::max(max_err, s.error);
    }
    for (const auto& s : scan.samples)
        scan.max_rel_variation =
            std::max(scan.max_rel_variation, std::abs(s.area - area0) / area0);
    scan.tol_effective = std::max(tol_rel, 3.0 * max_err / area0);
    scan.pass = scan.max_rel_variation <= scan.tol_effective;

    // Least-squares quadratic in t for the slope/curvature report.
    const int n = static_cast<int>(scan.samples.size());
    Mat A(n, 3);
    Vec b(n);
    for (int i = 0; i < n; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = scan.samples[i].t;
        A(i, 2) = scan.samples[i].t * scan.samples[i].t;
        b(i) = scan.samples[i].area;
    }
    const Vec c = A.colPivHouseholderQr().solve(b);
    scan.c0 = c(0);
    scan.c1 = c(1);
    scan.c2 = c(2);
    return scan;
}

// --- recentered cone gap ------------------------------------------------------

namespace {

// Wall trace of the cone translated to `base`, sampled densely along one
// sheet with the exit-region switch points located by bisection; a kink in
// the trace between uniform samples would otherwise bias the fan area.
geom::Polyline sheet_trace(const ConvexDomain& dom, const Vec& base, int sheet, int n) {
    const auto& arc = dom.spec().sheet(sheet);
    const double theta = arc.angle();
    auto region_at = [&](double s) {
        const Vec y = arc.point(s);
        const double r = dom.ray_exit(base, y, 1e-12);
        return dom.membership(base + r * y).region;
    };
    std::vector<double> cuts;
    for (int i = 0; i <= n; ++i) cuts.push_back(theta * i / n);
    const int sweep = 64;
    const double inset = 1e-9 * theta;
    auto prev = region_at(inset);
    double s_prev = inset;
    for (int i = 1; i <= sweep; ++i) {
        const double s = i == sweep ? theta - inset : theta * i / sweep;
        const auto cur = region_at(s);
        if (!(cur == prev)) {
            double lo = s_prev, hi = s;
            while (hi - lo > 1e-12) {
                const double m = 0.5 * (lo + hi);
                if (region_at(m) == prev) lo = m;
                else hi = m;
            }
            cuts.push_back(0.5 * (lo + hi));
        }
        prev = cur;
        s_prev = s;
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return b - a < 1e-12; }),
               cuts.end());

    geom::Polyline line;
    line.pts = Mat(base.size(), cuts.size());
    for (size_t i = 0; i < cuts.size(); ++i) {
        const Vec y = arc.point(cuts[i]);
        line.pts.col(i) = base + dom.ray_exit(base, y, 1e-12) * y;
    }
    return line;
}

double fan_over_traces(const Vec& apex, const std::vector<geom::Polyline>& traces) {
    double a = 0.0;
    for (const auto& tr : traces) a += geom::cone_fan_area(apex, tr);
    return a;
}

}  // namespace

RecenteredGap recentered_cone_gap(const ConvexDomain& dom, const Vec& q, double t0,
                                  std::vector<double> s_list, int rim_samples) {
    if (s_list.size() < 3)
        throw invalid_input("recentered_cone_gap: need at least 3 offsets");
    std::sort(s_list.begin(), s_list.end());
    if (s_list.front() <= 0.0)
        throw invalid_input("recentered_cone_gap: offsets must be positive");
    if (std::abs(t0) + s_list.back() >= dom.eta())
        throw invalid_input("recentered_cone_gap: |t0|+s must stay below eta");
    if (std::abs(q.norm() - 1.0) > 1e-9)
        throw invalid_input("recentered_cone_gap: q must be a unit direction");

    const int sheets = dom.spec().sheet_count();
    std::vector<geom::Polyline> base_traces;
    const Vec base0 = t0 * q;
    for (int k = 0; k < sheets; ++k)
        base_traces.push_back(sheet_trace(dom, base0, k, rim_samples));

    RecenteredGap out;
    out.t0 = t0;
    for (double s : s_list) {
        const Vec os = (t0 + s) * q;
        std::vector<geom::Polyline> moved;
        for (int k = 0; k < sheets; ++k) moved.push_back(sheet_trace(dom, os, k, rim_samples));
        const double gap = fan_over_traces(os, base_traces) - fan_over_traces(os, moved);
        out.samples.push_back({s, gap});
    }

    // Log-log least squares for the remainder order.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& g : out.samples) {
        if (g.gap <= 0.0) continue;  // leaves slope 0 and an honest failure
        const double x = std::log(g.s), y = std::log(g.gap);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n >= 2) out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.pass = n == static_cast<int>(out.samples.size()) && out.slope >= 1.9;
    return out;
}

// --- planar slice bounds ------------------------------------------------------

namespace {

double line_distance(const Vec& p, const Line2& l) {
    const Vec d = p - l.point;
    return std::abs(d[0] * l.dir[1] - d[1] * l.dir[0]) / l.dir.norm();
}

}  // namespace

double viviani_sum(const Mat& triangle, const Vec& p) {
    if (triangle.rows() != 2 || triangle.cols() != 3 || p.size() != 2)
        throw invalid_input("viviani_sum: expects a planar triangle and point");
    const double side = (triangle.col(1) - triangle.col(0)).norm();
    for (int i = 0; i < 3; ++i) {
        const double s = (triangle.col((i + 1) % 3) - triangle.col(i)).norm();
        if (std::abs(s - side) > 1e-9 * std::max(1.0, side))
            throw invalid_input("viviani_sum: triangle is not equilateral");
    }
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) {
        const Vec a = triangle.col(i), b = triangle.col((i + 1) % 3);
        const Vec c = triangle.col((i + 2) % 3);
        const Vec e = (b - a).normalized();
        const double dp = (p - a)[0] * e[1] - (p - a)[1] * e[0];
        const double dc = (c - a)[0] * e[1] - (c - a)[1] * e[0];
        if (dp * dc < -1e-12 * side)
            throw invalid_input("viviani_sum: point lies outside the triangle");
        sum += std::abs(dp);
    }
    return sum;
}

Vec fermat_point(const std::vector<Vec>& pts, int max_iter, double tol) {
    if (pts.size() < 2) throw invalid_input("fermat_point: need at least two points");
    Vec x = Vec::Zero(pts[0].size());
    for (const Vec& p : pts) x += p;
    x /= static_cast<double>(pts.size());
    for (int it = 0; it < max_iter; ++it) {
        Vec num = Vec::Zero(x.size());
        double den = 0.0;
        int at = -1;
        for (size_t i = 0; i < pts.size(); ++i) {
            const double d = (x - pts[i]).norm();
            if (d < 1e-14) {
                at = static_cast<int>(i);
                continue;
            }
            num += pts[i] / d;
            den += 1.0 / d;
        }
        if (at >= 0) {
            // Vertex case: stay when the pull of the others is subunit.
            Vec pull = Vec::Zero(x.size());
            for (size_t i = 0; i < pts.size(); ++i)
                if (static_cast<int>(i) != at) pull += (pts[i] - x).normalized();
            if (pull.norm() <= 1.0) return x;
            x += 1e-9 * pull.normalized();
            continue;
        }
        const Vec next = num / den;
        if ((next - x).norm() < tol) return next;
        x = next;
    }
    return x;
}

double fermat_lower_bound(const std::vector<Vec>& gates, const std::array<Line2, 3>& lines) {
    if (gates.size() != 3) throw invalid_input("fermat_lower_bound: need three gates");
    for (const Vec& g : gates)
        if (g.size() != 2) throw invalid_input("fermat_lower_bound: gates must be planar");
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if ((gates[i] - gates[j]).norm() < 1e-9)
                throw invalid_input("fermat_lower_bound: gates are not separated");

    // Corners of the enclosure, one per line pair.
    Mat tri(2, 3);
    for (int i = 0; i < 3; ++i) {
        const Line2& a = lines[i];
        const Line2& b = lines[(i + 1) % 3];
        const double det = a.dir[0] * (-b.dir[1]) - (-b.dir[0]) * a.dir[1];
        if (std::abs(det) < 1e-12 * a.dir.norm() * b.dir.norm())
            throw invalid_input("fermat_lower_bound: parallel rim lines");
        const Vec rhs = b.point - a.point;
        const double s = (rhs[0] * (-b.dir[1]) - (-b.dir[0]) * rhs[1]) / det;
        tri.col(i) = a.point + s * a.dir;
    }
    const double side = (tri.col(1) - tri.col(0)).norm();
    for (int i = 0; i < 3; ++i)
        if (std::abs((tri.col((i + 1) % 3) - tri.col(i)).norm() - side) > 1e-7)
            throw invalid_input("fermat_lower_bound: enclosure is not equilateral");
    const Vec center = Vec(tri.rowwise().mean());
    // The gates must sit inside the enclosure for the Fermat point argument.
    for (const Vec& g : gates)
        viviani_sum(tri, g);  // throws when outside
    double sum = 0.0;
    for (const auto& l : lines) sum += line_distance(center, l);
    return sum;
}

bool slice_connectivity(const measure::SliceProfile& profile, const Mat& gates,
                        double glue_tol) {
    const int np = static_cast<int>(profile.pieces.size());
    const int ng = static_cast<int>(gates.cols());
    if (np == 0 || ng == 0) return false;

    std::vector<int> parent(np + ng);
    std::iota(parent.begin(), parent.end(), 0);
    // Smallest index wins so the merge order cannot matter.
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    auto unite = [&](int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a > b) std::swap(a, b);
        parent[b] = a;
    };

    auto seg_dist = [](const Vec& p, const Vec& a, const Vec& b) {
        const Vec ab = b - a;
        const double L2 = ab.squaredNorm();
        const double t = L2 < 1e-300 ? 0.0 : std::clamp((p - a).dot(ab) / L2, 0.0, 1.0);
        return (p - (a + t * ab)).norm();
    };
    auto point_to_piece = [&](const Vec& p, const geom::Polyline& pl) {
        double best = std::numeric_limits<double>::infinity();
        for (int s = 0; s + 1 < pl.size(); ++s)
            best = std::min(best, seg_dist(p, pl.pts.col(s), pl.pts.col(s + 1)));
        if (pl.size() == 1) best = (p - pl.pts.col(0)).norm();
        return best;
    };

    for (int a = 0; a < np; ++a)
        for (int b = a + 1; b < np; ++b) {
            bool touch = false;
            for (int v = 0; v < profile.pieces[a].size() && !touch; ++v)
                touch = point_to_piece(profile.pieces[a].pts.col(v), profile.pieces[b]) <=
                        glue_tol;
            if (touch) unite(a, b);
        }
    for (int g = 0; g < ng; ++g)
        for (int a = 0; a < np; ++a)
            if (point_to_piece(gates.col(g), profile.pieces[a]) <= glue_tol)
                unite(np + g, a);

    // All gates in one class, and that class must contain at least one piece
    // (gates never merge with each other directly, only through pieces).
    const int root = find(np);
    for (int g = 1; g < ng; ++g)
        if (find(np + g) != root) return false;
    for (int a = 0; a < np; ++a)
        if (find(a) == root) return true;
    return false;
}

// --- projection constants -----------------------------------------------------

BandSpec BandSpec::standard(double theta, double alpha, double R1) {
    BandSpec b;
    b.theta = theta;
    b.alpha = alpha;
    b.R1 = R1;
    b.e1 = Vec::Zero(3);
    b.e2 = Vec::Zero(3);
    b.v = Vec::Zero(3);
    b.e1[0] = 1.0;
    b.e2[1] = 1.0;
    b.v[2] = 1.0;
    return b;
}

namespace {

const double kGL4x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                         0.8611363115940526};
const double kGL4w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                         0.3478548451374538};

// Area scale of the orthogonal projection sending the (unit, orthogonal)
// tangent pair (t1, t2) into the plane spanned by the orthonormal (b1, b2).
double projection_jacobian(const Vec& t1, const Vec& t2, const Vec& b1, const Vec& b2) {
    return std::abs(t1.dot(b1) * t2.dot(b2) - t1.dot(b2) * t2.dot(b1));
}

}  // namespace

ConstantCheck band_constant_check(const BandSpec& band, const std::vector<int>& cell_signs,
                                  int n_beta, int n_u) {
    if (!(band.theta > 0.0 && band.theta <= kPi))
        throw invalid_input("band_constant_check: theta must lie in (0, pi]");
    if (!(band.alpha > 0.0 && band.alpha <= kPi / 2))
        throw invalid_input("band_constant_check: alpha must lie in (0, pi/2]");
    if (!(band.R1 > 0.0)) throw invalid_input("band_constant_check: R1 must be positive");
    if (n_beta < 1 || n_u < 1 ||
        cell_signs.size() != static_cast<size_t>(n_beta) * static_cast<size_t>(n_u))
        throw invalid_input("band_constant_check: one label per cell required");
    for (int s : cell_signs)
        if (s != 1 && s != -1)
            throw invalid_input("band_constant_check: labels must be +1 or -1");
    if (std::abs(band.e1.norm() - 1) > 1e-9 || std::abs(band.e2.norm() - 1) > 1e-9 ||
        std::abs(band.v.norm() - 1) > 1e-9 || std::abs(band.e1.dot(band.e2)) > 1e-9 ||
        std::abs(band.e1.dot(band.v)) > 1e-9 || std::abs(band.e2.dot(band.v)) > 1e-9)
        throw invalid_input("band_constant_check: frame must be orthonormal");

    // Tilted projection planes, one per sign.
    const Vec bp2 = std::cos(band.alpha) * band.e1 + std::sin(band.alpha) * band.v;
    const Vec bm2 = std::cos(band.alpha) * band.e1 - std::sin(band.alpha) * band.v;

    double lhs = 0.0;
    for (int ib = 0; ib < n_beta; ++ib) {
        const double b0 = -band.theta / 2 + band.theta * ib / n_beta;
        const double b1 = -band.theta / 2 + band.theta * (ib + 1) / n_beta;
        // Composite panels inside the cell keep the quadrature error far
        // below the comparison tolerances even for one-cell partitions.
        const int nsub = std::max(1, static_cast<int>(std::ceil((b1 - b0) / 0.05)));
        for (int iu = 0; iu < n_u; ++iu) {
            const double du = 2.0 * band.R1 / n_u;
            const Vec& plane2 = cell_signs[ib * n_u + iu] > 0 ? bp2 : bm2;
            double cell = 0.0;
            for (int s = 0; s < nsub; ++s) {
                const double p0 = b0 + (b1 - b0) * s / nsub;
                const double p1 = b0 + (b1 - b0) * (s + 1) / nsub;
                for (int g = 0; g < 4; ++g) {
                    const double beta = 0.5 * (p0 + p1) + 0.5 * (p1 - p0) * kGL4x[g];
                    const Vec tb = -std::sin(beta) * band.e1 + std::cos(beta) * band.e2;
                    cell += 0.5 * (p1 - p0) * kGL4w[g] *
                            projection_jacobian(tb, band.v, band.e2, plane2);
                }
            }
            lhs += cell * du;
        }
    }
    const double rhs = 4.0 * band.R1 * std::sin(band.alpha) * std::sin(band.theta / 2);
    return {lhs, rhs};
}

PlateSpec PlateSpec::standard(double R, double alpha, double chord_distance) {
    return PlateSpec{R, alpha, chord_distance};
}

ConstantCheck plate_constant_check(const PlateSpec& plate, const std::vector<int>& coloring,
                                   int n_r, int n_phi) {
    if (!(plate.R > 0.0)) throw invalid_input("plate_constant_check: radius must be positive");
    if (!(plate.alpha >= 0.0 && plate.alpha < kPi / 2))
        throw invalid_input("plate_constant_check: alpha must lie in [0, pi/2)");
    if (!(plate.chord_distance > 0.0 && plate.chord_distance < plate.R))
        throw invalid_input("plate_constant_check: chords must cut the disk");
    if (n_r < 1 || n_phi < 1 ||
        coloring.size() != static_cast<size_t>(n_r) * static_cast<size_t>(n_phi))
        throw invalid_input("plate_constant_check: one label per cell required");
    for (int c : coloring)
        if (c < 0 || c > 2)
            throw invalid_input("plate_constant_check: labels must be 0, 1 or 2");

    // Plate in the xy plane; projection plane j is spanned by the chord
    // direction w_j and the tilted complement.
    Vec a = Vec::Zero(3), ex = Vec::Zero(3), ey = Vec::Zero(3);
    a[2] = 1.0;
    ex[0] = 1.0;
    ey[1] = 1.0;
    std::array<Vec, 3> w, b2;
    for (int j = 0; j < 3; ++j) {
        const double phi = 2.0 * kPi * j / 3.0;
        w[j] = std::cos(phi) * ex + std::sin(phi) * ey;
        const Vec t = Vec(Vec3(a).cross(Vec3(w[j])));
        b2[j] = std::cos(plate.alpha) * t + std::sin(plate.alpha) * a;
    }

    double lhs = 0.0;
    for (int ir = 0; ir < n_r; ++ir) {
        const double r0 = plate.R * ir / n_r, r1 = plate.R * (ir + 1) / n_r;
        for (int ip = 0; ip < n_phi; ++ip) {
            const double p0 = 2.0 * kPi * ip / n_phi, p1 = 2.0 * kPi * (ip + 1) / n_phi;
            const int j = coloring[ir * n_phi + ip];
            const double cell_area = 0.5 * (p1 - p0) * (r1 * r1 - r0 * r0);
            lhs += projection_jacobian(ex, ey, w[j], b2[j]) * cell_area;
        }
    }
    const double rhs = std::cos(plate.alpha) * kPi * plate.R * plate.R;
    return {lhs, rhs};
}

// --- tetrahedral calibration ----------------------------------------------------

LabeledSurface t_labeled_surface(const ConvexDomain& dom, int resolution) {
    const auto& spec = dom.spec();
    if (spec.ambient_dim != 3 || spec.singular_dirs.size() != 4 ||
        spec.arcs.size() != 6)
        throw invalid_input("t_labeled_surface: needs the tetrahedral cone in 3-d");

    LabeledSurface ls;
    const auto cm = deform::cone_mesh(dom, resolution);
    ls.film = cm.mesh;

    // Cells are indexed by the singular direction whose antipode they hold;
    // the sheet over arc (i, k) separates the two complement cells.
    auto cell_at = [&](const Vec& p) {
        const Vec ph = p / p.norm();
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int j = 0; j < 4; ++j) {
            const double d = ph.dot(spec.singular_dirs[j]);
            if (d < bd) {
                bd = d;
                best = j;
            }
        }
        return best;
    };
    ls.face_cells.resize(ls.film.nf());
    for (int f = 0; f < ls.film.nf(); ++f) {
        const auto& arc = spec.arcs[cm.face_sheet[f]];
        std::array<int, 2> pair{};
        int idx = 0;
        for (int j = 0; j < 4; ++j)
            if (j != arc.i && j != arc.j) pair[idx++] = j;
        const Vec3 n = ls.film.face_normal3(f);
        const Vec probe = ls.film.face_centroid(f) + 1e-4 * Vec(n);
        const int side_b = cell_at(probe);
        if (side_b != pair[0] && side_b != pair[1])
            throw numeric_failure("t_labeled_surface: face probe left its cells");
        ls.face_cells[f] = {side_b == pair[0] ? pair[1] : pair[0], side_b};
    }

    ls.shell = boundary::boundary_mesh(dom, resolution);
    if (ls.shell.component_count != 4 || ls.shell.anchor_component.size() != 4)
        throw numeric_failure("t_labeled_surface: wall did not split into 4 pieces");
    ls.cell_of_component.assign(4, -1);
    for (int j = 0; j < 4; ++j) {
        const int c = ls.shell.anchor_component[j];
        if (ls.cell_of_component[c] != -1)
            throw numeric_failure("t_labeled_surface: two antipodes share a wall piece");
        ls.cell_of_component[c] = j;
    }
    ls.cell_dirs = spec.singular_dirs;
    return ls;
}

CalibrationResult calibration_functional(const LabeledSurface& ls) {
    const int cells = ls.cell_count();
    if (cells == 0 || ls.cell_dirs.size() != static_cast<size_t>(cells))
        throw invalid_input("calibration_functional: surface carries no cell directions");
    if (ls.face_cells.size() != static_cast<size_t>(ls.film.nf()))
        throw invalid_input("calibration_functional: film labels out of step with faces");

    CalibrationResult out;
    out.closure_defect.assign(cells, 0.0);
    out.shell_flux.assign(cells, 0.0);
    std::vector<Vec3> closure(cells, Vec3::Zero());

    // Film faces: the stored normal points from cell_a into cell_b, so it is
    // outward for cell_a and inward for cell_b.
    for (int f = 0; f < ls.film.nf(); ++f) {
        const double area = ls.film.face_area(f);
        const Vec3 n = ls.film.face_normal3(f);
        const int ca = ls.face_cells[f][0], cb = ls.face_cells[f][1];
        const Vec3 diff = Vec3(ls.cell_dirs[ca]) - Vec3(ls.cell_dirs[cb]);
        out.flux += area * n.dot(diff);
        out.bound += area * diff.norm();
        closure[ca] += area * n;
        closure[cb] -= area * n;
    }

    // Wall faces are oriented out of the domain, which is outward for the
    // cell that owns them.
    for (int f = 0; f < ls.shell.mesh.nf(); ++f) {
        const int cell = ls.cell_of_component[ls.shell.face_component[f]];
        const double area = ls.shell.mesh.face_area(f);
        const Vec3 n = ls.shell.mesh.face_normal3(f);
        const double dn = n.dot(Vec3(ls.cell_dirs[cell]));
        if (dn > 1e-9) out.sign_constant = false;
        out.shell_flux[cell] += area * std::abs(dn);
        closure[cell] += area * n;
    }
    for (int j = 0; j < cells; ++j) out.closure_defect[j] = closure[j].norm();

    // Sampled injectivity of the projection along each cell direction: two
    // wall patches of the same cell that land on top of each other in the
    // projection plane while being far apart in space mean the wall folds
    // over itself there. Bucket the projected centroids so only neighbours
    // are compared.
    for (int j = 0; j < cells && out.injective_sampled; ++j) {
        const Vec3 a = Vec3(ls.cell_dirs[j]);
        Vec3 u = std::abs(a[0]) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
        u = (u - u.dot(a) * a).normalized();
        const Vec3 v = a.cross(u);

        struct Sample {
            double x, y, diam;
            Vec3 c;
        };
        std::vector<Sample> pts;
        double max_diam = 0.0;
        for (int f = 0; f < ls.shell.mesh.nf(); ++f) {
            if (ls.cell_of_component[ls.shell.face_component[f]] != j) continue;
            const auto& tri = ls.shell.mesh.F[f];
            double diam = 0.0;
            for (int e = 0; e < 3; ++e)
                diam = std::max(diam, (ls.shell.mesh.V.col(tri[e]) -
                                       ls.shell.mesh.V.col(tri[(e + 1) % 3]))
                                          .norm());
            const Vec3 c = Vec3(ls.shell.mesh.face_centroid(f));
            pts.push_back({c.dot(u), c.dot(v), diam, c});
            max_diam = std::max(max_diam, diam);
        }
        if (pts.empty() || max_diam == 0.0) continue;
        // a pair is only flagged when dproj < 0.3 min(diam), so a grid this
        // fine still catches every candidate while keeping buckets small
        const double cellsz = 0.3 * max_diam;
        std::map<std::pair<long, long>, std::vector<int>> buckets;
        for (size_t i = 0; i < pts.size(); ++i)
            buckets[{static_cast<long>(std::floor(pts[i].x / cellsz)),
                     static_cast<long>(std::floor(pts[i].y / cellsz))}]
                .push_back(static_cast<int>(i));
        for (const auto& [key, ids] : buckets) {
            for (long dx = -1; dx <= 1 && out.injective_sampled; ++dx)
                for (long dy = -1; dy <= 1 && out.injective_sampled; ++dy) {
                    const auto it = buckets.find({key.first + dx, key.second + dy});
                    if (it == buckets.end()) continue;
                    for (int ia : ids) {
                        for (int ib : it->second) {
                            if (ib <= ia) continue;
                            const auto& A = pts[ia];
                            const auto& B = pts[ib];
                            const double dproj = std::hypot(A.x - B.x, A.y - B.y);
                            const double d3 = (A.c - B.c).norm();
                            if (dproj < 0.3 * std::min(A.diam, B.diam) &&
                                d3 > 3.0 * (A.diam + B.diam)) {
                                out.injective_sampled = false;
                                break;
                            }
                        }
                        if (!out.injective_sampled) break;
                    }
                }
            if (!out.injective_sampled) break;
        }
    }
    return out;
}

CalibrationIdentity t_calibration_identity(const ConvexDomain& dom, int resolution) {
    CalibrationIdentity id;
    id.lhs = measure::clipped_cone_area(
                 dom, Translation::none(dom.spec().ambient_dim), {})
                 .value;
    const LabeledSurface ls = t_labeled_surface(dom, resolution);
    id.detail = calibration_functional(ls);
    double total = 0.0;
    for (double f : id.detail.shell_flux) total += f;
    id.rhs = std::sqrt(3.0) / (2.0 * std::sqrt(2.0)) * total;
    return id;
}

}  // namespace mcs::stability
