#include "mcs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace mcs::geom {

UnitVector::UnitVector(Vec v, double tol) {
    const double n = v.norm();
    if (v.size() < 2 || std::abs(n - 1.0) > tol)
        throw invalid_input("UnitVector: norm " + std::to_string(n) + " not within tolerance of 1");
    v_ = v / n;
}

SphericalArc::SphericalArc(const Vec& a, const Vec& w, double theta, bool closed)
    : a_(a), w_(w), theta_(theta), closed_(closed) {
    if (a.size() != w.size() || a.size() < 2) throw invalid_input("SphericalArc: bad frame sizes");
    if (std::abs(a.norm() - 1.0) > 1e-9 || std::abs(w.norm() - 1.0) > 1e-9 ||
        std::abs(a.dot(w)) > 1e-9)
        throw invalid_input("SphericalArc: frame not orthonormal");
    if (closed) {
        theta_ = 2.0 * kPi;
    } else if (!(theta > 0.0 && theta < 2.0 * kPi)) {
        throw invalid_input("SphericalArc: angle must lie in (0, 2 pi)");
    }
    a_ /= a_.norm();
    w_ = (w_ - a_.dot(w_) * a_);
    w_ /= w_.norm();
}

SphericalArc SphericalArc::through(const Vec& from, const Vec& to) {
    const double c = from.dot(to);
    Vec w = to - c * from;
    const double wn = w.norm();
    if (wn < 1e-9)
        throw invalid_input("SphericalArc::through: endpoints colinear, pass a via point");
    return SphericalArc(from, w / wn, std::acos(std::clamp(c, -1.0, 1.0)));
}

SphericalArc SphericalArc::through_via(const Vec& from, const Vec& to, const Vec& via) {
    Vec w = via - from.dot(via) * from;
    const double wn = w.norm();
    if (wn < 1e-9) throw invalid_input("SphericalArc::through_via: via colinear with start");
    w /= wn;
    const double c = from.dot(to);
    const double sv = w.dot(to);
    double theta = std::atan2(sv, c);
    if (theta <= 1e-12) theta += 2.0 * kPi;
    SphericalArc arc(from, w, theta);
    if ((arc.point(theta) - to).norm() > 1e-9)
        throw invalid_input("SphericalArc::through_via: via not on the great circle of the endpoints");
    return arc;
}

SphericalArc SphericalArc::great_circle(const Vec& u, const Vec& v) {
    return SphericalArc(u, v, 2.0 * kPi, true);
}

Vec SphericalArc::point(double s) const { return std::cos(s) * a_ + std::sin(s) * w_; }

Vec SphericalArc::tangent(double s) const { return -std::sin(s) * a_ + std::cos(s) * w_; }

double SphericalArc::sup_inner(const Vec& x) const {
    const double al = x.dot(a_);
    const double be = x.dot(w_);
    const double r = std::hypot(al, be);
    if (closed_) return r;
    double phi = std::atan2(be, al);
    if (phi < 0.0) phi += 2.0 * kPi;
    if (phi <= theta_) return r;
    return std::max(al, al * std::cos(theta_) + be * std::sin(theta_));
}

double SphericalArc::arg_sup_inner(const Vec& x) const {
    const double al = x.dot(a_);
    const double be = x.dot(w_);
    double phi = std::atan2(be, al);
    if (closed_) return phi < 0.0 ? phi + 2.0 * kPi : phi;
    if (phi < 0.0) phi += 2.0 * kPi;
    if (phi <= theta_) return phi;
    // Off the range: the max sits at whichever endpoint scores higher.
    return (al >= al * std::cos(theta_) + be * std::sin(theta_)) ? 0.0 : theta_;
}

double Polyline::length() const {
    double len = 0.0;
    for (int k = 0; k + 1 < size(); ++k) len += (pts.col(k + 1) - pts.col(k)).norm();
    return len;
}

bool Polyline::is_closed(double tol) const {
    if (size() < 2) return false;
    return (pts.col(0) - pts.col(size() - 1)).norm() <= tol;
}

Polyline arc_sample(const SphericalArc& arc, int m, double radius) {
    if (m < 1) throw invalid_input("arc_sample: need at least one segment");
    Mat pts(arc.dim(), m + 1);
    for (int k = 0; k <= m; ++k)
        pts.col(k) = radius * arc.point(arc.angle() * static_cast<double>(k) / m);
    if (arc.closed()) pts.col(m) = pts.col(0);  // exact closure
    return Polyline{std::move(pts)};
}

double triangle_area(const Vec& p, const Vec& q, const Vec& r) {
    const Vec u = q - p;
    const Vec v = r - p;
    const double g = u.squaredNorm() * v.squaredNorm() - sq(u.dot(v));
    return 0.5 * std::sqrt(std::max(0.0, g));
}

double cone_fan_area(const Vec& apex, const Polyline& rim) {
    if (rim.dim() != apex.size()) throw invalid_input("cone_fan_area: dimension mismatch");
    double area = 0.0;
    for (int k = 0; k + 1 < rim.size(); ++k)
        area += triangle_area(apex, rim.pts.col(k), rim.pts.col(k + 1));
    return area;
}

TriangleMesh TriangleMesh::build(Mat V, std::vector<std::array<int, 3>> F, double degenerate_tol) {
    TriangleMesh m;
    const int nv = static_cast<int>(V.cols());
    std::vector<std::array<int, 3>> keep;
    keep.reserve(F.size());
    int dropped = 0;
    for (const auto& f : F) {
        for (int i : f)
            if (i < 0 || i >= nv) throw invalid_input("TriangleMesh: face index out of range");
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
            ++dropped;
            continue;
        }
        if (triangle_area(V.col(f[0]), V.col(f[1]), V.col(f[2])) <= degenerate_tol) {
            ++dropped;
            continue;
        }
        keep.push_back(f);
    }
    m.V = std::move(V);
    m.F = std::move(keep);
    m.dropped_degenerate = dropped;
    return m;
}

double TriangleMesh::face_area(int f) const {
    const auto& t = F[f];
    return triangle_area(V.col(t[0]), V.col(t[1]), V.col(t[2]));
}

double TriangleMesh::area() const {
    double a = 0.0;
    for (int f = 0; f < nf(); ++f) a += face_area(f);
    return a;
}

Vec3 TriangleMesh::face_normal3(int f) const {
    if (dim() != 3) throw invalid_input("face_normal3: mesh is not 3-d");
    const auto& t = F[f];
    const Vec3 p = V.col(t[0]), q = V.col(t[1]), r = V.col(t[2]);
    Vec3 n = (q - p).cross(r - p);
    const double nn = n.norm();
    if (nn < 1e-300) throw numeric_failure("face_normal3: degenerate face");
    return n / nn;
}

Vec TriangleMesh::face_centroid(int f) const {
    const auto& t = F[f];
    return (V.col(t[0]) + V.col(t[1]) + V.col(t[2])) / 3.0;
}

namespace {

struct EdgeUse {
    int count = 0;
    int balance = 0;  // +1 when traversed (lo,hi), -1 when (hi,lo)
};

std::map<std::pair<int, int>, EdgeUse> edge_table(const std::vector<std::array<int, 3>>& F) {
    std::map<std::pair<int, int>, EdgeUse> edges;
    for (const auto& f : F) {
        for (int e = 0; e < 3; ++e) {
            const int u = f[e], v = f[(e + 1) % 3];
            auto& rec = edges[{std::min(u, v), std::max(u, v)}];
            ++rec.count;
            rec.balance += (u < v) ? 1 : -1;
        }
    }
    return edges;
}

}  // namespace

std::vector<std::array<int, 2>> TriangleMesh::boundary_edges() const {
    std::vector<std::array<int, 2>> out;
    for (const auto& [key, rec] : edge_table(F))
        if (rec.count == 1)
            out.push_back(rec.balance > 0 ? std::array<int, 2>{key.first, key.second}
                                          : std::array<int, 2>{key.second, key.first});
    return out;
}

std::optional<std::vector<std::vector<int>>> TriangleMesh::boundary_loops() const {
    const auto edges = boundary_edges();
    std::map<int, int> next;
    for (const auto& e : edges) {
        if (next.count(e[0])) return std::nullopt;  // junction vertex
        next[e[0]] = e[1];
    }
    std::vector<std::vector<int>> loops;
    std::map<int, bool> used;
    for (const auto& e : edges) {
        if (used[e[0]]) continue;
        std::vector<int> loop;
        int v = e[0];
        while (!used[v]) {
            used[v] = true;
            loop.push_back(v);
            auto it = next.find(v);
            if (it == next.end()) return std::nullopt;  // open chain
            v = it->second;
        }
        if (v != loop.front()) return std::nullopt;
        loops.push_back(std::move(loop));
    }
    return loops;
}

std::vector<std::vector<int>> TriangleMesh::boundary_curves() const {
    const auto edges = boundary_edges();
    std::map<int, std::vector<int>> out_edges;
    std::map<int, int> degree;
    for (const auto& e : edges) {
        out_edges[e[0]].push_back(e[1]);
        ++degree[e[0]];
        ++degree[e[1]];
    }
    std::map<std::pair<int, int>, bool> used;
    std::vector<std::vector<int>> curves;
    auto walk = [&](int start, int to) {
        std::vector<int> chain{start, to};
        used[{start, to}] = true;
        int v = to;
        while (degree[v] == 2) {
            bool advanced = false;
            for (int w : out_edges[v]) {
                if (!used[{v, w}]) {
                    used[{v, w}] = true;
                    chain.push_back(w);
                    v = w;
                    advanced = true;
                    break;
                }
            }
            if (!advanced || v == start) break;
        }
        curves.push_back(std::move(chain));
    };
    // Chains from junction vertices first, then remaining pure cycles.
    for (const auto& e : edges)
        if (degree[e[0]] != 2 && !used[{e[0], e[1]}]) walk(e[0], e[1]);
    for (const auto& e : edges)
        if (!used[{e[0], e[1]}]) walk(e[0], e[1]);
    return curves;
}

bool TriangleMesh::orientation_consistent() const {
    for (const auto& [key, rec] : edge_table(F)) {
        (void)key;
        if (rec.count == 2 && rec.balance != 0) return false;
        if (rec.count > 2 && std::abs(rec.balance) > rec.count - 2) return false;
    }
    return true;
}

bool TriangleMesh::watertight() const {
    for (const auto& [key, rec] : edge_table(F)) {
        (void)key;
        if (rec.count != 2) return false;
    }
    return !F.empty();
}

int TriangleMesh::max_edge_incidence() const {
    int m = 0;
    for (const auto& [key, rec] : edge_table(F)) {
        (void)key;
        m = std::max(m, rec.count);
    }
    return m;
}

Mat orthonormalized(const Mat& basis) {
    Eigen::HouseholderQR<Mat> qr(basis);
    Mat q = qr.householderQ() * Mat::Identity(basis.rows(), basis.cols());
    Mat r = qr.matrixQR().topRows(basis.cols()).triangularView<Eigen::Upper>();
    for (int i = 0; i < basis.cols(); ++i) {
        if (std::abs(r(i, i)) < 1e-12 * std::max(1.0, basis.norm()))
            throw invalid_input("orthonormalized: basis is rank deficient");
        if (r(i, i) < 0) q.col(i) = -q.col(i);
    }
    return q;
}

Vec orthogonal_project(const Vec& x, const Mat& onb) { return onb * (onb.transpose() * x); }

Mat orthogonal_project_points(const Mat& pts, const Mat& onb) {
    return onb * (onb.transpose() * pts);
}

TriangleMesh orthogonal_project_mesh(const TriangleMesh& mesh, const Mat& onb) {
    // Projection may flatten faces; rebuild so degenerate ones are dropped.
    return TriangleMesh::build(orthogonal_project_points(mesh.V, onb), mesh.F);
}

namespace {

void append_num(std::string& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

Mat as_3d(const TriangleMesh& mesh) {
    if (mesh.dim() == 3) return mesh.V;
    if (mesh.dim() == 2) {
        Mat v = Mat::Zero(3, mesh.nv());
        v.topRows(2) = mesh.V;
        return v;
    }
    throw invalid_input("mesh export: only 2-d and 3-d vertices fit OBJ/OFF");
}

}  // namespace

void write_obj(const std::string& path, const TriangleMesh& mesh) {
    const Mat v = as_3d(mesh);
    std::string out;
    out.reserve(static_cast<size_t>(mesh.nv()) * 64 + static_cast<size_t>(mesh.nf()) * 24);
    for (int i = 0; i < mesh.nv(); ++i) {
        out += "v ";
        append_num(out, v(0, i));
        out += ' ';
        append_num(out, v(1, i));
        out += ' ';
        append_num(out, v(2, i));
        out += '\n';
    }
    for (const auto& f : mesh.F) {
        out += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) + ' ' +
               std::to_string(f[2] + 1) + '\n';
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw numeric_failure("write_obj: cannot open " + path);
    os << out;
}

void write_off(const std::string& path, const TriangleMesh& mesh) {
    const Mat v = as_3d(mesh);
    std::string out = "OFF\n";
    out += std::to_string(mesh.nv()) + ' ' + std::to_string(mesh.nf()) + " 0\n";
    for (int i = 0; i < mesh.nv(); ++i) {
        append_num(out, v(0, i));
        out += ' ';
        append_num(out, v(1, i));
        out += ' ';
        append_num(out, v(2, i));
        out += '\n';
    }
    for (const auto& f : mesh.F) {
        out += "3 " + std::to_string(f[0]) + ' ' + std::to_string(f[1]) + ' ' +
               std::to_string(f[2]) + '\n';
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw numeric_failure("write_off: cannot open " + path);
    os << out;
}

TriangleMesh read_obj(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw numeric_failure("read_obj: cannot open " + path);
    std::vector<Vec3> verts;
    std::vector<std::array<int, 3>> faces;
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "v") {
            Vec3 p;
            ls >> p[0] >> p[1] >> p[2];
            verts.push_back(p);
        } else if (tag == "f") {
            std::array<int, 3> f{};
            for (int k = 0; k < 3; ++k) {
                std::string tok;
                ls >> tok;
                f[k] = std::stoi(tok.substr(0, tok.find('/'))) - 1;
            }
            faces.push_back(f);
        }
    }
    Mat V(3, static_cast<int>(verts.size()));
    for (size_t i = 0; i < verts.size(); ++i) V.col(static_cast<int>(i)) = verts[i];
    return TriangleMesh::build(std::move(V), std::move(faces));
}

TriangleMesh read_off(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw numeric_failure("read_off: cannot open " + path);
    std::string magic;
    is >> magic;
    if (magic != "OFF") throw invalid_input("read_off: not an OFF file");
    int nv = 0, nf = 0, ne = 0;
    is >> nv >> nf >> ne;
    Mat V(3, nv);
    for (int i = 0; i < nv; ++i) is >> V(0, i) >> V(1, i) >> V(2, i);
    std::vector<std::array<int, 3>> faces;
    faces.reserve(nf);
    for (int f = 0; f < nf; ++f) {
        int k = 0;
        is >> k;
        if (k != 3) throw invalid_input("read_off: only triangle faces supported");
        std::array<int, 3> t{};
        is >> t[0] >> t[1] >> t[2];
        faces.push_back(t);
    }
    return TriangleMesh::build(std::move(V), std::move(faces));
}

TriangleMesh weld_vertices(const Mat& V, const std::vector<std::array<int, 3>>& F, double tol) {
    const int nv = static_cast<int>(V.cols());
    std::map<std::vector<long long>, int> buckets;
    std::vector<int> remap(nv, -1);
    std::vector<int> order;
    order.reserve(nv);
    for (int i = 0; i < nv; ++i) {
        std::vector<long long> key(V.rows());
        for (int d = 0; d < V.rows(); ++d) key[d] = std::llround(V(d, i) / tol);
        auto [it, fresh] = buckets.emplace(std::move(key), static_cast<int>(order.size()));
        if (fresh) order.push_back(i);
        remap[i] = it->second;
    }
    Mat W(V.rows(), static_cast<int>(order.size()));
    for (size_t k = 0; k < order.size(); ++k) W.col(static_cast<int>(k)) = V.col(order[k]);
    std::vector<std::array<int, 3>> faces;
    faces.reserve(F.size());
    for (const auto& f : F) faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
    return TriangleMesh::build(std::move(W), std::move(faces));
}

}  // namespace mcs::geom
