#include "mcs/boundary.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <queue>
#include <set>

namespace mcs::boundary {

using domain::RegionId;
using domain::RegionKind;
using geom::TriangleMesh;

namespace {

// Accumulates patch geometry before welding; face labels ride along.
struct Builder {
    std::vector<Vec> verts;
    std::vector<std::array<int, 3>> faces;
    std::vector<RegionId> labels;

    int add_vertex(const Vec& v) {
        verts.push_back(v);
        return static_cast<int>(verts.size()) - 1;
    }
    void add_face(int a, int b, int c, const RegionId& id) {
        faces.push_back({a, b, c});
        labels.push_back(id);
    }
};

// Exact-coordinate key; shared border polylines copy the same doubles, so
// plain comparison is enough to stitch pieces.
using PtKey = std::array<double, 3>;
PtKey key_of(const Vec& v) { return {v[0], v[1], v[2]}; }

// One end of an arc at a plate: outgoing tangent direction in the plate
// plane, the band binormal, and the shared gate-chord vertex coordinates
// (ordered from u = -R1 to u = +R1).
struct ArcEnd {
    int arc = -1;
    Vec w;   // tangent into the arc, unit, orthogonal to the plate axis
    Vec nu;  // band binormal
    std::vector<Vec> chord;
};

Vec slerp(const Vec& a, const Vec& b, double f) {
    const double c = std::clamp(a.dot(b), -1.0, 1.0);
    const double ang = std::acos(c);
    if (ang < 1e-12) return b;
    Vec v = (std::sin((1.0 - f) * ang) * a + std::sin(f * ang) * b) / std::sin(ang);
    return v / v.norm();
}

}  // namespace

std::vector<double> sheet_s_grid(const ConvexDomain& dom, int sheet, int resolution) {
    const auto& arc = dom.spec().sheet(sheet);
    const double theta = arc.angle();
    const double h = dom.band_halfwidth() / resolution;
    const double rho = dom.band_level();
    std::vector<double> grid;
    if (dom.spec().sheet_is_circle(sheet)) {
        const int n = std::max(8, static_cast<int>(std::ceil(theta * rho / h)));
        for (int i = 0; i <= n; ++i) grid.push_back(theta * i / n);
        return grid;
    }
    const double sg = dom.gate_angle();
    const int n_end = std::max(2, static_cast<int>(std::ceil(sg * rho / h)));
    const int n_mid = std::max(4, static_cast<int>(std::ceil((theta - 2 * sg) * rho / h)));
    // Segment endpoints are written verbatim so gate lookups can compare
    // exactly.
    for (int i = 0; i < n_end; ++i) grid.push_back(sg * i / n_end);
    for (int i = 0; i < n_mid; ++i) grid.push_back(sg + (theta - 2 * sg) * i / n_mid);
    for (int i = 0; i < n_end; ++i) grid.push_back((theta - sg) + sg * i / n_end);
    grid.push_back(theta);
    return grid;
}

std::pair<int, int> band_grid_range(const ConvexDomain& dom, int sheet, int resolution) {
    const auto grid = sheet_s_grid(dom, sheet, resolution);
    if (dom.spec().sheet_is_circle(sheet)) return {0, static_cast<int>(grid.size()) - 1};
    const double sg = dom.gate_angle();
    const double theta = dom.spec().sheet(sheet).angle();
    int lo = -1, hi = -1;
    for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
        if (grid[i] == sg && lo < 0) lo = i;
        if (grid[i] == theta - sg) hi = i;
    }
    return {lo, hi};
}

LabeledMesh boundary_mesh(const ConvexDomain& dom, int resolution) {
    const auto& spec = dom.spec();
    if (spec.ambient_dim != 3)
        throw invalid_input("boundary_mesh: only 3-d domains are meshed");
    if (resolution < 2)
        throw numeric_failure("boundary_mesh: resolution too coarse to separate regions");
    // Rim chords of neighboring bands on one plate intersect outside the
    // plate disk exactly when the plate construction is consistent; guard it.
    if (2.0 * dom.plate_chord_distance() <= dom.plate_radius())
        throw numeric_failure("boundary_mesh: band chords overlap inside a plate");

    const double R1 = dom.band_halfwidth();
    const double Rp = dom.plate_radius();
    const double rho = dom.band_level();
    const double h = R1 / resolution;
    const int nu = 2 * resolution;  // u rows per band, centerline in the middle

    Builder bld;

    // Sphere-facing border pieces, stitched into loops later.  Each piece is
    // an open (or closed, for full circles) polyline of shared coordinates.
    std::vector<std::vector<Vec>> pieces;

    // --- bands over the arcs, with their gate chords kept for the plates ---
    const int narcs = static_cast<int>(spec.arcs.size());
    std::vector<std::array<ArcEnd, 2>> arc_ends(narcs);
    for (int k = 0; k < narcs; ++k) {
        const auto& arc = spec.sheet(k);
        const Vec nu_vec = Vec(Vec3(arc.frame_a()).cross(Vec3(arc.frame_w())).normalized());
        const auto grid = sheet_s_grid(dom, k, resolution);
        const auto [lo, hi] = band_grid_range(dom, k, resolution);
        if (lo < 0 || hi <= lo)
            throw numeric_failure("boundary_mesh: band grid failed to include the gates");

        const int ns = hi - lo;
        std::vector<std::vector<int>> vid(ns + 1, std::vector<int>(nu + 1));
        for (int c = 0; c <= ns; ++c) {
            const Vec y = arc.point(grid[lo + c]);
            for (int i = 0; i <= nu; ++i) {
                const double u = R1 * static_cast<double>(i - resolution) / resolution;
                vid[c][i] = bld.add_vertex(rho * y + u * nu_vec);
            }
        }
        const RegionId id{RegionKind::Band, k};
        for (int c = 0; c < ns; ++c)
            for (int i = 0; i < nu; ++i) {
                bld.add_face(vid[c][i], vid[c + 1][i], vid[c + 1][i + 1], id);
                bld.add_face(vid[c][i], vid[c + 1][i + 1], vid[c][i + 1], id);
            }

        // Long edges face the sphere pieces.
        std::vector<Vec> lo_edge, hi_edge;
        for (int c = 0; c <= ns; ++c) {
            lo_edge.push_back(bld.verts[vid[c][0]]);
            hi_edge.push_back(bld.verts[vid[c][nu]]);
        }
        pieces.push_back(std::move(lo_edge));
        pieces.push_back(std::move(hi_edge));

        // Gate chords, ordered from u=-R1 to u=+R1, shared with the plates.
        const double theta = arc.angle();
        for (int end = 0; end < 2; ++end) {
            ArcEnd ae;
            ae.arc = k;
            ae.nu = nu_vec;
            ae.w = end == 0 ? arc.frame_w()
                            : Vec(std::sin(theta) * arc.frame_a() - std::cos(theta) * arc.frame_w());
            const int c = end == 0 ? 0 : ns;
            for (int i = 0; i <= nu; ++i) ae.chord.push_back(bld.verts[vid[c][i]]);
            arc_ends[k][end] = std::move(ae);
        }
    }

    // --- circle bands (the plane cone) ---
    for (int k = narcs; k < spec.sheet_count(); ++k) {
        const auto& arc = spec.sheet(k);
        const Vec nu_vec = Vec(Vec3(arc.frame_a()).cross(Vec3(arc.frame_w())).normalized());
        const auto grid = sheet_s_grid(dom, k, resolution);
        const int ns = static_cast<int>(grid.size()) - 1;
        std::vector<std::vector<int>> vid(ns + 1, std::vector<int>(nu + 1));
        for (int c = 0; c < ns; ++c) {
            const Vec y = arc.point(grid[c]);
            for (int i = 0; i <= nu; ++i) {
                const double u = R1 * static_cast<double>(i - resolution) / resolution;
                vid[c][i] = bld.add_vertex(rho * y + u * nu_vec);
            }
        }
        for (int i = 0; i <= nu; ++i) vid[ns][i] = vid[0][i];  // periodic seam
        const RegionId id{RegionKind::CircleBand, k - narcs};
        for (int c = 0; c < ns; ++c)
            for (int i = 0; i < nu; ++i) {
                bld.add_face(vid[c][i], vid[c + 1][i], vid[c + 1][i + 1], id);
                bld.add_face(vid[c][i], vid[c + 1][i + 1], vid[c][i + 1], id);
            }
        std::vector<Vec> lo_edge, hi_edge;
        for (int c = 0; c <= ns; ++c) {
            lo_edge.push_back(bld.verts[vid[c][0]]);
            hi_edge.push_back(bld.verts[vid[c][nu]]);
        }
        pieces.push_back(std::move(lo_edge));  // closed: first == last
        pieces.push_back(std::move(hi_edge));
    }

    // --- plates: disk sectors between consecutive arc traces ---
    for (int j = 0; j < static_cast<int>(spec.singular_dirs.size()); ++j) {
        const Vec& a = spec.singular_dirs[j];
        const Vec c_center = dom.plate_level() * a;

        std::vector<ArcEnd*> ends;
        for (int k = 0; k < narcs; ++k) {
            if (spec.arcs[k].i == j) ends.push_back(&arc_ends[k][0]);
            if (spec.arcs[k].j == j) ends.push_back(&arc_ends[k][1]);
        }
        if (ends.size() < 2)
            throw numeric_failure("boundary_mesh: plate with fewer than two bands");

        // Order the incident traces by angle in the plate plane.
        const Vec e1 = ends[0]->w;
        const Vec e2 = Vec(Vec3(a).cross(Vec3(e1)).normalized());
        auto angle_of = [&](const Vec& v) { return std::atan2(v.dot(e2), v.dot(e1)); };
        std::sort(ends.begin(), ends.end(), [&](const ArcEnd* x, const ArcEnd* y) {
            return angle_of(x->w) < angle_of(y->w);
        });

        const RegionId id{RegionKind::Plate, j};
        const int m = static_cast<int>(ends.size());
        const int center_id = bld.add_vertex(c_center);
        for (int s = 0; s < m; ++s) {
            const ArcEnd& A = *ends[s];
            const ArcEnd& B = *ends[(s + 1) % m];
            // Chord halves facing this sector.
            const int sa = A.nu.dot(B.w) > 0 ? +1 : -1;
            const int sb = B.nu.dot(A.w) > 0 ? +1 : -1;
            std::vector<Vec> chain;  // gate A -> corner A -> rim -> corner B -> gate B
            for (int i = 0; i <= resolution; ++i)
                chain.push_back(A.chord[resolution + sa * i]);
            const Vec corner_a = chain.back();
            const Vec corner_b = B.chord[resolution + sb * resolution];
            // Rim arc between the two chord corners, counterclockwise.
            const double pa = angle_of(corner_a - c_center);
            const double pb = angle_of(corner_b - c_center);
            double span = pb - pa;
            while (span <= 0) span += 2 * kPi;
            const int nr = std::max(2, static_cast<int>(std::ceil(span * Rp / h)));
            for (int i = 1; i < nr; ++i) {
                const double p = pa + span * i / nr;
                chain.push_back(c_center + Rp * (std::cos(p) * e1 + std::sin(p) * e2));
            }
            chain.push_back(corner_b);
            for (int i = resolution; i >= 1; --i)
                chain.push_back(B.chord[resolution + sb * (i - 1)]);
            // Fan from the plate center over the chain.
            std::vector<int> cid;
            for (const Vec& p : chain) cid.push_back(bld.add_vertex(p));
            for (size_t t = 0; t + 1 < cid.size(); ++t)
                bld.add_face(center_id, cid[t], cid[t + 1], id);

            // The rim arc (corners included) faces a sphere piece.
            std::vector<Vec> rim(chain.begin() + resolution,
                                 chain.begin() + resolution + nr + 1);
            pieces.push_back(std::move(rim));
        }
    }

    // --- leftover sphere pieces: stitch border pieces into loops, fan them ---
    std::map<PtKey, std::vector<int>> piece_at;
    for (int p = 0; p < static_cast<int>(pieces.size()); ++p) {
        if (key_of(pieces[p].front()) == key_of(pieces[p].back())) continue;  // closed
        piece_at[key_of(pieces[p].front())].push_back(p);
        piece_at[key_of(pieces[p].back())].push_back(p);
    }
    for (const auto& [k, v] : piece_at)
        if (v.size() != 2)
            throw numeric_failure("boundary_mesh: border pieces do not close up");

    std::vector<char> used(pieces.size(), 0);
    std::vector<std::vector<Vec>> loops;
    for (int p0 = 0; p0 < static_cast<int>(pieces.size()); ++p0) {
        if (used[p0]) continue;
        used[p0] = 1;
        std::vector<Vec> loop = pieces[p0];
        if (key_of(loop.front()) == key_of(loop.back())) {
            loop.pop_back();
            loops.push_back(std::move(loop));
            continue;
        }
        while (key_of(loop.back()) != key_of(loop.front())) {
            const auto& cands = piece_at[key_of(loop.back())];
            int nxt = -1;
            for (int q : cands)
                if (!used[q]) nxt = q;
            if (nxt < 0) throw numeric_failure("boundary_mesh: open border chain");
            used[nxt] = 1;
            const auto& piece = pieces[nxt];
            if (key_of(piece.front()) == key_of(loop.back()))
                loop.insert(loop.end(), piece.begin() + 1, piece.end());
            else
                loop.insert(loop.end(), piece.rbegin() + 1, piece.rend());
        }
        loop.pop_back();
        loops.push_back(std::move(loop));
    }

    const RegionId sphere_id{RegionKind::Sphere, -1};
    for (const auto& loop : loops) {
        Vec q = Vec::Zero(3);
        for (const Vec& p : loop) q += p;
        q /= q.norm();
        double maxang = 0.0;
        for (const Vec& p : loop)
            maxang = std::max(maxang, std::acos(std::clamp(q.dot(p), -1.0, 1.0)));
        const int nring = std::max(2, static_cast<int>(std::ceil(maxang / h)));
        const int L = static_cast<int>(loop.size());

        const int apex = bld.add_vertex(q);
        std::vector<std::vector<int>> ring(nring + 1, std::vector<int>(L));
        for (int i = 1; i <= nring; ++i)
            for (int k = 0; k < L; ++k)
                ring[i][k] = i == nring ? bld.add_vertex(loop[k])
                                        : bld.add_vertex(slerp(q, loop[k], double(i) / nring));
        for (int k = 0; k < L; ++k)
            bld.add_face(apex, ring[1][k], ring[1][(k + 1) % L], sphere_id);
        for (int i = 1; i < nring; ++i)
            for (int k = 0; k < L; ++k) {
                const int k2 = (k + 1) % L;
                bld.add_face(ring[i][k], ring[i + 1][k], ring[i + 1][k2], sphere_id);
                bld.add_face(ring[i][k], ring[i + 1][k2], ring[i][k2], sphere_id);
            }
    }

    // --- orient every face outward (the domain contains the origin) ---
    for (auto& f : bld.faces) {
        const Vec &p = bld.verts[f[0]], &q = bld.verts[f[1]], &r = bld.verts[f[2]];
        const Vec3 n = (Vec3(q) - Vec3(p)).cross(Vec3(r) - Vec3(p));
        if (n.dot(Vec3(p) + Vec3(q) + Vec3(r)) < 0) std::swap(f[1], f[2]);
    }

    Mat V(3, bld.verts.size());
    for (int i = 0; i < static_cast<int>(bld.verts.size()); ++i) V.col(i) = bld.verts[i];
    LabeledMesh out;
    out.mesh = geom::weld_vertices(V, bld.faces, 1e-9);
    if (out.mesh.nf() != static_cast<int>(bld.labels.size()))
        throw numeric_failure("boundary_mesh: degenerate faces produced");
    out.face_region = std::move(bld.labels);

    // --- flood fill across edges not lying on the cone trace ---
    std::vector<char> on_cone(out.mesh.nv());
    for (int i = 0; i < out.mesh.nv(); ++i)
        on_cone[i] = dom.cone_distance(out.mesh.V.col(i)) <= 1e-7 ? 1 : 0;
    std::map<std::pair<int, int>, std::vector<int>> edge_faces;
    for (int f = 0; f < out.mesh.nf(); ++f) {
        const auto& tri = out.mesh.F[f];
        for (int e = 0; e < 3; ++e) {
            int a = tri[e], b = tri[(e + 1) % 3];
            if (a > b) std::swap(a, b);
            edge_faces[{a, b}].push_back(f);
        }
    }
    out.face_component.assign(out.mesh.nf(), -1);
    int comp = 0;
    for (int f0 = 0; f0 < out.mesh.nf(); ++f0) {
        if (out.face_component[f0] >= 0) continue;
        std::queue<int> bfs;
        bfs.push(f0);
        out.face_component[f0] = comp;
        while (!bfs.empty()) {
            const int f = bfs.front();
            bfs.pop();
            const auto& tri = out.mesh.F[f];
            for (int e = 0; e < 3; ++e) {
                int a = tri[e], b = tri[(e + 1) % 3];
                if (a > b) std::swap(a, b);
                if (on_cone[a] && on_cone[b]) continue;  // cone trace: wall
                for (int g : edge_faces[{a, b}])
                    if (out.face_component[g] < 0) {
                        out.face_component[g] = comp;
                        bfs.push(g);
                    }
            }
        }
        ++comp;
    }
    out.component_count = comp;

    out.component_areas.assign(comp, 0.0);
    for (int f = 0; f < out.mesh.nf(); ++f) {
        const double area = out.mesh.face_area(f);
        out.region_areas[out.face_region[f].label()] += area;
        out.component_areas[out.face_component[f]] += area;
    }

    // Component holding the antipode of each singular direction.
    if (!spec.singular_dirs.empty()) {
        std::vector<int> vert_face(out.mesh.nv(), -1);
        for (int f = 0; f < out.mesh.nf(); ++f)
            for (int e = 0; e < 3; ++e)
                if (vert_face[out.mesh.F[f][e]] < 0) vert_face[out.mesh.F[f][e]] = f;
        for (const Vec& a : spec.singular_dirs) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int i = 0; i < out.mesh.nv(); ++i) {
                const double d = (out.mesh.V.col(i) + a).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = i;
                }
            }
            out.anchor_component.push_back(out.face_component[vert_face[best]]);
        }
    }
    return out;
}

void write_labels_csv(const std::string& path, const LabeledMesh& lm) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw invalid_input("write_labels_csv: cannot open " + path);
    std::fprintf(fp, "face,region,component\n");
    for (int f = 0; f < lm.mesh.nf(); ++f)
        std::fprintf(fp, "%d,%s,%d\n", f, lm.face_region[f].label().c_str(),
                     lm.face_component[f]);
    std::fclose(fp);
}

}  // namespace mcs::boundary
