#include "mcs/measure.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <tuple>

namespace mcs::measure {

namespace {

// 10-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr int kGL = 10;
constexpr double kGLx[kGL] = {
    -0.9739065285171717, -0.8650633666889845, -0.6794095682990244, -0.4333953941292472,
    -0.1488743389816312, 0.1488743389816312,  0.4333953941292472,  0.6794095682990244,
    0.8650633666889845,  0.9739065285171717};
constexpr double kGLw[kGL] = {
    0.0666713443086881, 0.1494513491505806, 0.2190863625159820, 0.2692667193099963,
    0.2955242247147529, 0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
    0.1494513491505806, 0.0666713443086881};

struct Interval {
    double a, b;
    double value;   // GL estimate over [a,b]
    double error;   // |whole - two halves| from the last refinement
    int sheet;
};

}  // namespace

AreaResult clipped_cone_area(const ConvexDomain& dom, const Translation& tr,
                             const QuadBudget& budget) {
    const auto& spec = dom.spec();
    const Vec base = tr.t == 0.0 ? Vec(Vec::Zero(spec.ambient_dim)) : Vec(tr.offset());
    if (base.size() != spec.ambient_dim)
        throw invalid_input("clipped_cone_area: translation dimension mismatch");
    if (dom.minkowski(base) >= 1.0)
        throw invalid_input("clipped_cone_area: translated apex leaves the domain");

    AreaResult out;
    auto f = [&](int sheet, double s) {
        const double r = dom.ray_exit(base, spec.sheet(sheet).point(s), budget.bisect_tol);
        ++out.evaluations;
        return 0.5 * r * r;
    };
    auto gl = [&](int sheet, double a, double b) {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double acc = 0.0;
        for (int i = 0; i < kGL; ++i) acc += kGLw[i] * f(sheet, mid + half * kGLx[i]);
        return acc * half;
    };

    // r(s) is smooth while a single boundary constraint stays active and has a
    // kink wherever the exit ray switches plate/band/sphere. Translation moves
    // those switch points off the gate angles, and a kink that lands between
    // the first Gauss node and an interval endpoint is invisible to the
    // halving error estimate. So locate the switches exactly: sweep the
    // active region along the sheet and bisect every change.
    auto region_at = [&](int sheet, double s) {
        const Vec y = spec.sheet(sheet).point(s);
        const double r = dom.ray_exit(base, y, budget.bisect_tol);
        return dom.membership(base + r * y).region;
    };

    std::vector<Interval> intervals;
    const double sg = dom.gate_angle();
    for (int k = 0; k < spec.sheet_count(); ++k) {
        const double theta = spec.sheet(k).angle();
        std::vector<double> cuts{0.0, theta};
        if (!spec.sheet_is_circle(k))
            for (double c : {sg, theta - sg})
                if (c > 1e-9 && c < theta - 1e-9) cuts.push_back(c);
        for (int u = 1; u <= 3; ++u) cuts.push_back(theta * u / 4.0);

        const int sweep = 128;
        const double inset = 1e-9 * theta;
        domain::RegionId prev = region_at(k, inset);
        double s_prev = inset;
        for (int i = 1; i <= sweep; ++i) {
            const double s = i == sweep ? theta - inset : theta * i / sweep;
            const domain::RegionId cur = region_at(k, s);
            if (!(cur == prev)) {
                double lo = s_prev, hi = s;
                while (hi - lo > 1e-12) {
                    const double m = 0.5 * (lo + hi);
                    if (region_at(k, m) == prev)
                        lo = m;
                    else
                        hi = m;
                }
                cuts.push_back(0.5 * (lo + hi));
            }
            prev = cur;
            s_prev = s;
        }

        std::sort(cuts.begin(), cuts.end());
        for (size_t u = 0; u + 1 < cuts.size(); ++u) {
            if (cuts[u + 1] - cuts[u] < 1e-12) continue;
            Interval iv{cuts[u], cuts[u + 1], 0.0, 0.0, k};
            iv.value = gl(k, iv.a, iv.b);
            iv.error = std::abs(iv.value);  // refined below
            intervals.push_back(iv);
        }
    }

    auto cmp = [](const Interval& l, const Interval& r) { return l.error < r.error; };
    std::priority_queue<Interval, std::vector<Interval>, decltype(cmp)> heap(cmp);
    // Seed real error estimates with one refinement pass.
    for (auto& iv : intervals) {
        const double m = 0.5 * (iv.a + iv.b);
        Interval left{iv.a, m, gl(iv.sheet, iv.a, m), 0.0, iv.sheet};
        Interval right{m, iv.b, gl(iv.sheet, m, iv.b), 0.0, iv.sheet};
        const double err = std::abs(left.value + right.value - iv.value);
        left.error = right.error = 0.5 * err;
        heap.push(left);
        heap.push(right);
    }

    double total_err = 0.0;
    double total_val = 0.0;
    {
        // Track running totals; the heap holds the live partition.
        std::vector<Interval> live;
        while (!heap.empty()) {
            live.push_back(heap.top());
            heap.pop();
        }
        for (const auto& iv : live) {
            total_val += iv.value;
            total_err += iv.error;
        }
        for (const auto& iv : live) heap.push(iv);
    }

    const double scale = std::max(std::abs(total_val), 1e-6);
    int splits = static_cast<int>(2 * intervals.size());
    while (total_err > budget.rel_tol * scale && splits < budget.max_intervals) {
        Interval iv = heap.top();
        heap.pop();
        const double m = 0.5 * (iv.a + iv.b);
        Interval left{iv.a, m, gl(iv.sheet, iv.a, m), 0.0, iv.sheet};
        Interval right{m, iv.b, gl(iv.sheet, m, iv.b), 0.0, iv.sheet};
        const double err = std::abs(left.value + right.value - iv.value);
        left.error = right.error = 0.5 * err;
        total_val += left.value + right.value - iv.value;
        total_err += err - iv.error;
        heap.push(left);
        heap.push(right);
        ++splits;
    }

    // Deterministic reduction: re-sum the final partition sorted by
    // (sheet, position) so the result does not depend on heap order.
    std::vector<Interval> final_ivs;
    while (!heap.empty()) {
        final_ivs.push_back(heap.top());
        heap.pop();
    }
    std::sort(final_ivs.begin(), final_ivs.end(), [](const Interval& l, const Interval& r) {
        return std::tie(l.sheet, l.a) < std::tie(r.sheet, r.a);
    });
    out.value = 0.0;
    out.error = 0.0;
    for (int k = 0; k < spec.sheet_count(); ++k) out.per_piece[spec.sheet_label(k)] = 0.0;
    for (const auto& iv : final_ivs) {
        out.value += iv.value;
        out.error += iv.error;
        out.per_piece[spec.sheet_label(iv.sheet)] += iv.value;
    }
    return out;
}

McResult mc_cone_area_oracle(const ConvexDomain& dom, const Translation& tr,
                             std::uint64_t samples, std::uint64_t seed) {
    if (samples < 10000)
        throw invalid_input("mc_cone_area_oracle: need at least 1e4 samples");
    const auto& spec = dom.spec();
    const Vec base = tr.t == 0.0 ? Vec(Vec::Zero(spec.ambient_dim)) : Vec(tr.offset());
    const double rhi = 1.0 + base.norm() + 1e-9;

    // Allocate samples across sheets proportionally to parameter volume.
    std::vector<double> weight(spec.sheet_count());
    double wsum = 0.0;
    for (int k = 0; k < spec.sheet_count(); ++k) {
        weight[k] = spec.sheet(k).angle();
        wsum += weight[k];
    }

    McResult out;
    double acc = 0.0, var_acc = 0.0;
    for (int k = 0; k < spec.sheet_count(); ++k) {
        const auto& sheet = spec.sheet(k);
        const std::uint64_t budget_k = std::max<std::uint64_t>(
            1000, static_cast<std::uint64_t>(std::floor(samples * weight[k] / wsum)));
        // Strata grid: finer in s than in r.
        const int ns = std::max(8, static_cast<int>(std::ceil(sheet.angle() / (kPi / 16))));
        const int nr = 8;
        const std::uint64_t per =
            std::max<std::uint64_t>(8, budget_k / (static_cast<std::uint64_t>(ns) * nr));
        for (int is = 0; is < ns; ++is) {
            const double s0 = sheet.angle() * is / ns, s1 = sheet.angle() * (is + 1) / ns;
            for (int ir = 0; ir < nr; ++ir) {
                const double r0 = rhi * ir / nr, r1 = rhi * (ir + 1) / nr;
                Rng rng(mix_seed(seed, static_cast<std::uint64_t>(k) * 10007 + is, ir));
                const double vol = (s1 - s0) * (r1 - r0);
                double m1 = 0.0, m2 = 0.0;
                for (std::uint64_t n = 0; n < per; ++n) {
                    const double s = rng.uniform(s0, s1);
                    const double r = rng.uniform(r0, r1);
                    const Vec x = base + r * sheet.point(s);
                    const double fval = dom.contains(x) ? r : 0.0;
                    m1 += fval;
                    m2 += fval * fval;
                }
                const double mean = m1 / per;
                const double var = std::max(0.0, m2 / per - mean * mean);
                acc += vol * mean;
                var_acc += vol * vol * var / per;
                out.samples += per;
            }
        }
    }
    out.value = acc;
    out.stderr_est = std::sqrt(var_acc);
    return out;
}

SliceProfile slice_y_cone(const ConvexDomain& dom, const Translation& tr, double t) {
    const auto& spec = dom.spec();
    if (spec.name != "y")
        throw invalid_input("slice_y_cone: closed-form slicing is defined for the Y cone");
    const Vec spine = spec.singular_dirs[0];
    const Vec base = tr.t == 0.0 ? Vec(Vec::Zero(spec.ambient_dim)) : Vec(tr.offset());
    SliceProfile out;
    out.t = t;
    // Spine point at height t of the translated cone: base + (t - <base,spine>) spine.
    const double h = t - base.dot(spine);
    const Vec p0 = base + h * spine;
    if (dom.minkowski(p0) >= 1.0) return out;  // beyond the plates, empty slice
    for (size_t k = 0; k < spec.arcs.size(); ++k) {
        // Sheet k intersects {<x,spine>=t} in the ray p0 + r * leg_k; clip it.
        Vec leg = spec.arcs[k].arc.point(kPi / 2);  // horizontal leg direction
        const double r = dom.ray_exit(p0, leg);
        if (r <= 0.0) continue;
        Mat seg(spec.ambient_dim, 2);
        seg.col(0) = p0;
        seg.col(1) = p0 + r * leg;
        out.pieces.push_back(geom::Polyline{std::move(seg)});
        out.length += r;
    }
    return out;
}

namespace {

std::vector<long long> quantize(const Vec& p, double tol) {
    std::vector<long long> key(p.size());
    for (int d = 0; d < p.size(); ++d) key[d] = std::llround(p[d] / tol);
    return key;
}

}  // namespace

SliceProfile slice_mesh(const geom::TriangleMesh& mesh, const Vec& axis, double t,
                        double glue_tol) {
    if (axis.size() != mesh.dim()) throw invalid_input("slice_mesh: axis dimension mismatch");
    if (std::abs(axis.norm() - 1.0) > 1e-9) throw invalid_input("slice_mesh: axis must be unit");
    SliceProfile out;
    out.t = t;
    std::vector<std::pair<Vec, Vec>> segs;
    constexpr double kOnPlane = 1e-13;
    for (int fi = 0; fi < mesh.nf(); ++fi) {
        const auto& f = mesh.F[fi];
        double h[3];
        int zero = 0;
        for (int k = 0; k < 3; ++k) {
            h[k] = axis.dot(mesh.V.col(f[k])) - t;
            if (std::abs(h[k]) < kOnPlane) {
                h[k] = 0.0;
                ++zero;
            }
        }
        if (zero == 3) {
            ++out.degenerate_faces;
            continue;
        }
        std::vector<Vec> hits;
        for (int k = 0; k < 3; ++k) {
            const int k2 = (k + 1) % 3;
            if (h[k] == 0.0) hits.push_back(mesh.V.col(f[k]));
            if ((h[k] > 0 && h[k2] < 0) || (h[k] < 0 && h[k2] > 0)) {
                const double w = h[k] / (h[k] - h[k2]);
                hits.push_back(mesh.V.col(f[k]) * (1 - w) + mesh.V.col(f[k2]) * w);
            }
        }
        // Dedup coincident hits (vertex exactly on the plane produces one).
        std::vector<Vec> uniq;
        for (const auto& p : hits) {
            bool dup = false;
            for (const auto& q : uniq)
                if ((p - q).norm() < kOnPlane * 10) dup = true;
            if (!dup) uniq.push_back(p);
        }
        if (uniq.size() == 2) segs.emplace_back(uniq[0], uniq[1]);
    }

    // When the plane contains a mesh edge, both adjacent faces emit that
    // edge; keep one copy (keyed by sorted quantized endpoints).
    {
        std::set<std::pair<std::vector<long long>, std::vector<long long>>> seen;
        std::vector<std::pair<Vec, Vec>> uniq_segs;
        for (const auto& s : segs) {
            auto ka = quantize(s.first, glue_tol);
            auto kb = quantize(s.second, glue_tol);
            if (kb < ka) std::swap(ka, kb);
            if (ka == kb) continue;  // degenerate sliver below the glue scale
            if (seen.emplace(std::move(ka), std::move(kb)).second) uniq_segs.push_back(s);
        }
        segs = std::move(uniq_segs);
    }

    // Glue segments into chains by quantized endpoints.
    std::map<std::vector<long long>, std::vector<int>> at;
    for (size_t i = 0; i < segs.size(); ++i) {
        at[quantize(segs[i].first, glue_tol)].push_back(static_cast<int>(i));
        at[quantize(segs[i].second, glue_tol)].push_back(static_cast<int>(i));
    }
    std::vector<bool> used(segs.size(), false);
    for (size_t start = 0; start < segs.size(); ++start) {
        if (used[start]) continue;
        std::vector<Vec> chain{segs[start].first, segs[start].second};
        used[start] = true;
        // Extend forward then backward.
        for (int dir = 0; dir < 2; ++dir) {
            bool grew = true;
            while (grew) {
                grew = false;
                const Vec& tip = dir == 0 ? chain.back() : chain.front();
                for (int si : at[quantize(tip, glue_tol)]) {
                    if (used[si]) continue;
                    const auto& s = segs[si];
                    Vec next;
                    if ((s.first - tip).norm() <= glue_tol) next = s.second;
                    else if ((s.second - tip).norm() <= glue_tol) next = s.first;
                    else continue;
                    used[si] = true;
                    if (dir == 0) chain.push_back(next);
                    else chain.insert(chain.begin(), next);
                    grew = true;
                    break;
                }
            }
        }
        Mat pts(mesh.dim(), static_cast<int>(chain.size()));
        for (size_t k = 0; k < chain.size(); ++k) pts.col(static_cast<int>(k)) = chain[k];
        geom::Polyline pl{std::move(pts)};
        out.length += pl.length();
        out.pieces.push_back(std::move(pl));
    }
    return out;
}

Mat slice_gates(const ConvexDomain& dom, const SliceProfile& profile, double tol) {
    std::vector<Vec> gates;
    for (const auto& pl : profile.pieces) {
        for (int end : {0, pl.size() - 1}) {
            const Vec p = pl.pts.col(end);
            if (std::abs(dom.minkowski(p) - 1.0) <= tol) {
                bool dup = false;
                for (const auto& g : gates)
                    if ((g - p).norm() < tol * 10) dup = true;
                if (!dup) gates.push_back(p);
            }
        }
    }
    Mat out(profile.pieces.empty() ? 0 : profile.pieces[0].dim(),
            static_cast<int>(gates.size()));
    for (size_t k = 0; k < gates.size(); ++k) out.col(static_cast<int>(k)) = gates[k];
    return out;
}

CoareaResult coarea_lower_bound(const geom::TriangleMesh& mesh, const Vec& axis, double t_lo,
                                double t_hi, int n_slices) {
    if (n_slices < 4) throw invalid_input("coarea_lower_bound: need at least 4 slices");
    if (!(t_hi > t_lo)) throw invalid_input("coarea_lower_bound: empty range");
    CoareaResult out;
    auto trapezoid = [&](int n, std::vector<double>* ts, std::vector<double>* ls) {
        double acc = 0.0;
        double prev = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double t = t_lo + (t_hi - t_lo) * i / n;
            const double len = slice_mesh(mesh, axis, t).length;
            if (ts) ts->push_back(t);
            if (ls) ls->push_back(len);
            if (i > 0) acc += 0.5 * (prev + len) * (t_hi - t_lo) / n;
            prev = len;
        }
        return acc;
    };
    const double coarse = trapezoid(n_slices / 2, nullptr, nullptr);
    out.integral = trapezoid(n_slices, &out.ts, &out.lengths);
    out.quad_error = std::abs(out.integral - coarse) / 3.0;
    return out;
}

}  // namespace mcs::measure
