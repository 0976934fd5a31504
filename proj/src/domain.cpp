#include "mcs/domain.hpp"

#include <algorithm>
#include <cmath>

namespace mcs::domain {

std::string RegionId::label() const {
    switch (kind) {
        case RegionKind::Plate: return "plate_" + std::to_string(index);
        case RegionKind::Band: return "band_" + std::to_string(index);
        case RegionKind::CircleBand: return "circle_band_" + std::to_string(index);
        case RegionKind::Sphere: return "sphere";
    }
    return "unknown";
}

ConvexDomain::ConvexDomain(ConeSpec spec, double eta) : spec_(std::move(spec)), eta_(eta) {
    spec_.validate();
    if (!(eta > 0.0)) throw invalid_input("ConvexDomain: eta must be positive");
    // Regime guard: plates must exist and stay disjoint.  1-2*eta > 0 caps
    // eta below 1/2 whenever there are singular directions; the plane has
    // none and only needs eta < 1.
    if (spec_.singular_dirs.empty()) {
        if (!(eta < 1.0)) throw invalid_input("ConvexDomain: eta must be < 1 for a plane cone");
    } else {
        if (!(eta < 0.5))
            throw invalid_input("ConvexDomain: eta must be < 1/2 when plates are present");
        const double cap = std::acos(plate_level());
        for (size_t i = 0; i < spec_.singular_dirs.size(); ++i) {
            for (size_t j = i + 1; j < spec_.singular_dirs.size(); ++j) {
                const double gap = std::acos(std::clamp(
                    spec_.singular_dirs[i].dot(spec_.singular_dirs[j]), -1.0, 1.0));
                if (gap <= 2.0 * cap)
                    throw invalid_input("ConvexDomain: plates overlap at eta=" +
                                        std::to_string(eta));
            }
        }
    }
}

double ConvexDomain::minkowski(const Vec& x) const {
    if (x.size() != spec_.ambient_dim) throw invalid_input("minkowski: dimension mismatch");
    double r = x.norm();
    for (const auto& d : spec_.singular_dirs) r = std::max(r, x.dot(d) / plate_level());
    for (int k = 0; k < spec_.sheet_count(); ++k)
        r = std::max(r, spec_.sheet(k).sup_inner(x) / band_level());
    return std::max(0.0, r);
}

Vec ConvexDomain::project_boundary(const Vec& x) const {
    const double r = minkowski(x);
    if (r < 1e-14) throw invalid_input("project_boundary: cannot project the origin");
    return x / r;
}

Membership ConvexDomain::membership(const Vec& x, double tol) const {
    if (x.size() != spec_.ambient_dim) throw invalid_input("membership: dimension mismatch");
    Membership m;
    double excess = x.norm() - 1.0;
    RegionId best{RegionKind::Sphere, -1};
    int best_rank = 2;  // plate 0 < band 1 < sphere 2
    auto consider = [&](double e, RegionId id, int rank) {
        // Track the single largest excess; among constraints active within
        // tol of it, prefer plates over bands over the sphere.
        if (e > excess + tol) {
            excess = e;
            best = id;
            best_rank = rank;
        } else if (e >= excess - tol && rank < best_rank) {
            best = id;
            best_rank = rank;
            excess = std::max(excess, e);
        }
    };
    for (size_t j = 0; j < spec_.singular_dirs.size(); ++j)
        consider(x.dot(spec_.singular_dirs[j]) - plate_level(),
                 RegionId{RegionKind::Plate, static_cast<int>(j)}, 0);
    const int narcs = static_cast<int>(spec_.arcs.size());
    for (int k = 0; k < spec_.sheet_count(); ++k) {
        const RegionId id = k < narcs ? RegionId{RegionKind::Band, k}
                                      : RegionId{RegionKind::CircleBand, k - narcs};
        consider(spec_.sheet(k).sup_inner(x) - band_level(), id, 1);
    }
    m.max_excess = excess;
    if (excess < -tol) {
        m.location = Location::Interior;
    } else if (excess > tol) {
        m.location = Location::Exterior;
    } else {
        m.location = Location::Boundary;
        m.region = best;
    }
    return m;
}

bool ConvexDomain::contains(const Vec& x, double tol) const {
    return membership(x, 0.0).max_excess <= tol;
}

double ConvexDomain::ray_exit(const Vec& base, const Vec& u, double tol) const {
    if (minkowski(base) > 1.0 + 1e-12)
        throw invalid_input("ray_exit: base point lies outside the domain");
    if (u.norm() < 1e-14) throw invalid_input("ray_exit: zero direction");
    double lo = 0.0;
    double hi = (1.0 + base.norm()) / u.norm() + tol;  // |base + hi*u| > 1
    if (minkowski(base + hi * u) <= 1.0) return hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (minkowski(base + mid * u) <= 1.0 ? lo : hi) = mid;
    }
    return lo;
}

bool ConvexDomain::sliding_neighborhood_contains(const Vec& x, double delta, RegionId* region,
                                                 double tol) const {
    if (!(delta >= 0.0)) throw invalid_input("sliding_neighborhood_contains: delta < 0");
    const Membership m = membership(x, tol);
    if (m.location != Location::Boundary) return false;
    if (cone_distance(x) > delta) return false;
    if (region) *region = m.region;
    return true;
}

nlohmann::json ConvexDomain::to_json() const {
    nlohmann::json j;
    j["cone"] = cones::to_json(spec_);
    j["eta"] = eta_;
    j["plate_level"] = plate_level();
    j["band_level"] = band_level();
    return j;
}

ConvexDomain ConvexDomain::from_json(const nlohmann::json& j) {
    return ConvexDomain(cones::cone_from_json(j.at("cone")), j.at("eta").get<double>());
}

Eta1Estimate eta1_estimate(const ConeSpec& spec, int grid, int sphere_samples, double margin) {
    spec.validate();
    if (grid < 2 || sphere_samples < 100) throw invalid_input("eta1_estimate: budget too small");
    const double eta_cap = spec.singular_dirs.empty() ? 1.0 : 0.5;

    double min_gap = kPi;  // smallest angle between distinct singular directions
    for (size_t i = 0; i < spec.singular_dirs.size(); ++i)
        for (size_t j = i + 1; j < spec.singular_dirs.size(); ++j)
            min_gap = std::min(min_gap, std::acos(std::clamp(
                                            spec.singular_dirs[i].dot(spec.singular_dirs[j]),
                                            -1.0, 1.0)));

    // Fibonacci sphere sample of directions (3-d part of the spec; padded
    // specs put all geometry in the first three coordinates).
    std::vector<Vec> dirs;
    dirs.reserve(sphere_samples);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < sphere_samples; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / sphere_samples;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        Vec v = Vec::Zero(spec.ambient_dim);
        v[0] = rho * std::cos(phi);
        v[1] = rho * std::sin(phi);
        v[2] = z;
        dirs.push_back(std::move(v));
    }
    // Sample spacing bound for the triple-band slack: neighboring sample
    // directions are within ~sqrt(8/N) radians.
    const double spacing = std::sqrt(8.0 / sphere_samples);

    // The structure conditions only degrade as eta grows (caps widen, band
    // levels drop), so scan from the top of the grid down and return the
    // first value that passes both checks.  The sampled band certificate
    // needs its slack to fit inside the plate gap (which is exactly eta), so
    // a bottom-up scan would stall on sampling noise at tiny eta instead.
    Eta1Estimate best;
    best.margin = margin;
    bool failed_above_on_plates = false;
    for (int g = grid; g >= 1; --g) {
        const double eta = eta_cap * g / (grid + 1);
        const bool plates_ok = spec.singular_dirs.empty() ||
                               min_gap > 2.0 * std::acos(1.0 - 2.0 * eta) + margin;
        if (!plates_ok) {
            failed_above_on_plates = true;
            continue;
        }
        bool bands_ok = true;
        if (spec.sheet_count() >= 3) {
            const double level = 1.0 - eta;
            const double plate_lv = 1.0 - 2.0 * eta;
            // Activity must be tested at the boundary point x = v / r(v), not
            // at the raw direction v: near a singular direction every
            // adjacent band contains v itself, but the plate keeps the
            // boundary well below the band level there.  All constraints are
            // homogeneous, so sup_k(x) = sup_k(v) / r(v).  The boundary point
            // moves at most `lip` times as fast as v, which widens the slack
            // a sample of spacing h has to certify.
            const double lip = 1.0 + 1.0 / (spec.singular_dirs.empty() ? level : plate_lv);
            const double slack = lip * spacing + margin;
            std::vector<double> sups(spec.sheet_count());
            for (const auto& v : dirs) {
                double r = 1.0;  // |v| = 1 already
                for (const auto& a : spec.singular_dirs) r = std::max(r, v.dot(a) / plate_lv);
                for (int k = 0; k < spec.sheet_count(); ++k) {
                    sups[k] = spec.sheet(k).sup_inner(v);
                    r = std::max(r, sups[k] / level);
                }
                int active = 0;
                for (int k = 0; k < spec.sheet_count(); ++k)
                    if (sups[k] / r >= level - slack) ++active;
                if (active >= 3) {
                    bands_ok = false;
                    break;
                }
            }
        }
        if (!bands_ok) {
            failed_above_on_plates = false;
            continue;
        }
        best.eta1 = std::max(0.0, eta - margin);
        best.plate_limited = failed_above_on_plates;
        break;
    }
    return best;
}

}  // namespace mcs::domain
