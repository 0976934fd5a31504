#include "mcs/cones.hpp"

#include <cmath>

namespace mcs::cones {

namespace {

Vec padded(std::initializer_list<double> xyz, int dim) {
    Vec v = Vec::Zero(dim);
    int k = 0;
    for (double c : xyz) v[k++] = c;
    return v;
}

void check_dim(int dim) {
    if (dim < 3) throw invalid_input("cone builders need ambient dimension >= 3");
}

}  // namespace

const SphericalArc& ConeSpec::sheet(int k) const {
    if (k < 0 || k >= sheet_count()) throw invalid_input("ConeSpec::sheet: index out of range");
    if (k < static_cast<int>(arcs.size())) return arcs[k].arc;
    return circles[k - arcs.size()];
}

std::string ConeSpec::sheet_label(int k) const {
    if (k < static_cast<int>(arcs.size())) return "arc_" + std::to_string(k);
    return "circle_" + std::to_string(k - static_cast<int>(arcs.size()));
}

void ConeSpec::validate() const {
    if (ambient_dim < 3) throw invalid_input("ConeSpec: ambient_dim must be >= 3");
    for (const auto& d : singular_dirs) {
        if (d.size() != ambient_dim) throw invalid_input("ConeSpec: direction dimension mismatch");
        if (std::abs(d.norm() - 1.0) > 1e-9) throw invalid_input("ConeSpec: direction not unit");
    }
    for (size_t i = 0; i < singular_dirs.size(); ++i)
        for (size_t j = i + 1; j < singular_dirs.size(); ++j)
            if ((singular_dirs[i] - singular_dirs[j]).norm() < 1e-9)
                throw invalid_input("ConeSpec: repeated singular direction");
    for (const auto& e : arcs) {
        if (e.i < 0 || e.j < 0 || e.i >= static_cast<int>(singular_dirs.size()) ||
            e.j >= static_cast<int>(singular_dirs.size()) || e.i == e.j)
            throw invalid_input("ConeSpec: arc endpoint indices invalid");
        if (e.arc.dim() != ambient_dim) throw invalid_input("ConeSpec: arc dimension mismatch");
        if ((e.arc.endpoint_from() - singular_dirs[e.i]).norm() > 1e-9 ||
            (e.arc.endpoint_to() - singular_dirs[e.j]).norm() > 1e-9)
            throw invalid_input("ConeSpec: arc endpoints do not match their directions");
    }
    for (const auto& c : circles) {
        if (c.dim() != ambient_dim) throw invalid_input("ConeSpec: circle dimension mismatch");
        if (!c.closed()) throw invalid_input("ConeSpec: circle entry is not closed");
    }
    if (sheet_count() == 0) throw invalid_input("ConeSpec: no sheets");
}

SheetPoint sheet_parametrization(const ConeSpec& spec, int sheet, const Vec& base, double r,
                                 double s) {
    if (r < 0.0) throw invalid_input("sheet_parametrization: radius must be nonnegative");
    const SphericalArc& arc = spec.sheet(sheet);
    if (s < -1e-12 || s > arc.angle() + 1e-12)
        throw invalid_input("sheet_parametrization: arc parameter out of range");
    return SheetPoint{base + r * arc.point(s), r};
}

ConeSpec build_plane(int dim) {
    check_dim(dim);
    ConeSpec spec;
    spec.name = "plane";
    spec.ambient_dim = dim;
    spec.circles.push_back(
        SphericalArc::great_circle(padded({1, 0, 0}, dim), padded({0, 1, 0}, dim)));
    spec.validate();
    return spec;
}

ConeSpec build_y(int dim) {
    check_dim(dim);
    ConeSpec spec;
    spec.name = "y";
    spec.ambient_dim = dim;
    const Vec up = padded({0, 0, 1}, dim);
    spec.singular_dirs = {up, -up};
    const double s3 = std::sqrt(3.0) / 2.0;
    const std::vector<Vec> legs = {padded({1, 0, 0}, dim), padded({-0.5, s3, 0}, dim),
                                   padded({-0.5, -s3, 0}, dim)};
    for (const auto& leg : legs) {
        ArcEdge e{0, 1, leg, SphericalArc::through_via(up, -up, leg)};
        spec.arcs.push_back(std::move(e));
    }
    spec.validate();
    return spec;
}

ConeSpec build_t(int dim) {
    check_dim(dim);
    ConeSpec spec;
    spec.name = "t";
    spec.ambient_dim = dim;
    const double s3 = 1.0 / std::sqrt(3.0);
    spec.singular_dirs = {padded({s3, s3, s3}, dim), padded({s3, -s3, -s3}, dim),
                          padded({-s3, s3, -s3}, dim), padded({-s3, -s3, s3}, dim)};
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            ArcEdge e{i, j, Vec(),
                      SphericalArc::through(spec.singular_dirs[i], spec.singular_dirs[j])};
            spec.arcs.push_back(std::move(e));
        }
    }
    spec.validate();
    return spec;
}

ConeSpec build_named(const std::string& name, int dim) {
    if (name == "plane") return build_plane(dim);
    if (name == "y") return build_y(dim);
    if (name == "t") return build_t(dim);
    throw invalid_input("unknown cone name: " + name + " (expected plane, y or t)");
}

ConeSpec rotated(const ConeSpec& spec, const Mat& rotation) {
    if (rotation.rows() != spec.ambient_dim || rotation.cols() != spec.ambient_dim)
        throw invalid_input("rotated: rotation size mismatch");
    if ((rotation.transpose() * rotation - Mat::Identity(rotation.rows(), rotation.cols()))
            .cwiseAbs()
            .maxCoeff() > 1e-9)
        throw invalid_input("rotated: matrix is not orthogonal");
    ConeSpec out = spec;
    for (auto& d : out.singular_dirs) d = rotation * d;
    for (auto& e : out.arcs) {
        if (e.via.size()) e.via = rotation * e.via;
        e.arc = SphericalArc(rotation * e.arc.frame_a(), rotation * e.arc.frame_w(),
                             e.arc.angle(), e.arc.closed());
    }
    for (auto& c : out.circles)
        c = SphericalArc(rotation * c.frame_a(), rotation * c.frame_w(), c.angle(), c.closed());
    out.validate();
    return out;
}

double distance_to_cone(const ConeSpec& spec, const Vec& x) {
    // Per sheet, the squared distance is |x|^2 - max(0, sup_s <x,y(s)>)^2:
    // the nearest point on the cone over the arc is the radial projection
    // onto the best direction, or the apex when every inner product is <= 0.
    const double x2 = x.squaredNorm();
    double best = x2;
    for (int k = 0; k < spec.sheet_count(); ++k) {
        const double sup = std::max(0.0, spec.sheet(k).sup_inner(x));
        best = std::min(best, x2 - sup * sup);
    }
    return std::sqrt(std::max(0.0, best));
}

namespace {

nlohmann::json vec_to_json(const Vec& v) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Vec vec_from_json(const nlohmann::json& a) {
    Vec v(a.size());
    for (size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
    return v;
}

}  // namespace

nlohmann::json to_json(const ConeSpec& spec) {
    nlohmann::json j;
    j["name"] = spec.name;
    j["ambient_dim"] = spec.ambient_dim;
    j["singular_dirs"] = nlohmann::json::array();
    for (const auto& d : spec.singular_dirs) j["singular_dirs"].push_back(vec_to_json(d));
    j["arcs"] = nlohmann::json::array();
    for (const auto& e : spec.arcs) {
        nlohmann::json a;
        a["i"] = e.i;
        a["j"] = e.j;
        a["via"] = e.via.size() ? vec_to_json(e.via) : nlohmann::json();
        j["arcs"].push_back(a);
    }
    j["circles"] = nlohmann::json::array();
    for (const auto& c : spec.circles) {
        nlohmann::json a;
        a["u"] = vec_to_json(c.frame_a());
        a["v"] = vec_to_json(c.frame_w());
        j["circles"].push_back(a);
    }
    return j;
}

ConeSpec cone_from_json(const nlohmann::json& j) {
    ConeSpec spec;
    spec.name = j.value("name", "custom");
    spec.ambient_dim = j.at("ambient_dim").get<int>();
    for (const auto& d : j.at("singular_dirs")) spec.singular_dirs.push_back(vec_from_json(d));
    for (const auto& a : j.at("arcs")) {
        const int i = a.at("i").get<int>();
        const int jj = a.at("j").get<int>();
        if (i < 0 || jj < 0 || i >= static_cast<int>(spec.singular_dirs.size()) ||
            jj >= static_cast<int>(spec.singular_dirs.size()))
            throw invalid_input("cone_from_json: arc index out of range");
        Vec via;
        if (!a.at("via").is_null()) via = vec_from_json(a.at("via"));
        SphericalArc arc =
            via.size() ? SphericalArc::through_via(spec.singular_dirs[i], spec.singular_dirs[jj], via)
                       : SphericalArc::through(spec.singular_dirs[i], spec.singular_dirs[jj]);
        spec.arcs.push_back(ArcEdge{i, jj, via, std::move(arc)});
    }
    for (const auto& c : j.at("circles"))
        spec.circles.push_back(
            SphericalArc::great_circle(vec_from_json(c.at("u")), vec_from_json(c.at("v"))));
    spec.validate();
    return spec;
}

Mat singular_gram(const ConeSpec& spec) {
    const int m = static_cast<int>(spec.singular_dirs.size());
    Mat g(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) g(i, j) = spec.singular_dirs[i].dot(spec.singular_dirs[j]);
    return g;
}

}  // namespace mcs::cones
