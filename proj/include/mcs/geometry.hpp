#pragma once

// Dimension-generic geometric primitives: unit vectors, great-circle arcs,
// polylines, triangle meshes, fan areas and orthogonal projections, plus
// OBJ/OFF import and export.  Everything here works in ambient dimension
// n >= 2; the mesh code additionally offers 3-d fast paths.

#include "mcs/common.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace mcs::geom {

// A vector certified to have unit norm (renormalized on construction,
// rejected if it is not close to unit length to begin with).
class UnitVector {
  public:
    explicit UnitVector(Vec v, double tol = 1e-6);
    const Vec& get() const { return v_; }
    operator const Vec&() const { return v_; }
    int dim() const { return static_cast<int>(v_.size()); }

  private:
    Vec v_;
};

// Great-circle arc y(s) = cos(s) a + sin(s) w, s in [0, theta], with a, w
// orthonormal.  A full great circle is the same frame with theta = 2 pi and
// the closed flag set.
class SphericalArc {
  public:
    SphericalArc(const Vec& a, const Vec& w, double theta, bool closed = false);

    // Shorter great-circle arc between two non-antipodal unit vectors.
    static SphericalArc through(const Vec& from, const Vec& to);
    // Arc from `from` to `to` passing through `via`; required when the
    // endpoints are antipodal and the branch is otherwise ambiguous.
    static SphericalArc through_via(const Vec& from, const Vec& to, const Vec& via);
    static SphericalArc great_circle(const Vec& u, const Vec& v);

    int dim() const { return static_cast<int>(a_.size()); }
    double angle() const { return theta_; }
    bool closed() const { return closed_; }
    const Vec& frame_a() const { return a_; }
    const Vec& frame_w() const { return w_; }

    Vec point(double s) const;
    Vec tangent(double s) const;
    Vec endpoint_from() const { return a_; }
    Vec endpoint_to() const { return point(theta_); }

    // max over s in [0, theta] of <x, y(s)>, in closed form.
    double sup_inner(const Vec& x) const;
    // The s attaining sup_inner (clamped to the parameter range).
    double arg_sup_inner(const Vec& x) const;

  private:
    Vec a_, w_;
    double theta_;
    bool closed_;
};

// Ordered point chain; column k of pts is the k-th point.  A closed polyline
// repeats its first point as the last column.
struct Polyline {
    Mat pts;

    int dim() const { return static_cast<int>(pts.rows()); }
    int size() const { return static_cast<int>(pts.cols()); }
    double length() const;
    bool is_closed(double tol = 0.0) const;
};

// Sample an arc at radius `radius` with m segments (m+1 points; for a closed
// circle the last point equals the first).
Polyline arc_sample(const SphericalArc& arc, int m, double radius = 1.0);

// Triangle area in any ambient dimension via the Gram determinant.
double triangle_area(const Vec& p, const Vec& q, const Vec& r);

// Area of the cone over a polyline with the given apex: sum of the triangle
// fan (apex, p_k, p_{k+1}).
double cone_fan_area(const Vec& apex, const Polyline& rim);

struct TriangleMesh {
    Mat V;                              // dim x nv
    std::vector<std::array<int, 3>> F;  // vertex index triples
    int dropped_degenerate = 0;         // faces removed at construction

    // Validates indices, drops degenerate faces (area <= degenerate_tol or a
    // repeated vertex index) and records how many were dropped.
    static TriangleMesh build(Mat V, std::vector<std::array<int, 3>> F,
                              double degenerate_tol = 1e-14);

    int dim() const { return static_cast<int>(V.rows()); }
    int nv() const { return static_cast<int>(V.cols()); }
    int nf() const { return static_cast<int>(F.size()); }

    double face_area(int f) const;
    double area() const;
    Vec3 face_normal3(int f) const;  // 3-d only, area-weighted direction normalized
    Vec face_centroid(int f) const;

    // Edges with exactly one incident face, directed as they appear in that face.
    std::vector<std::array<int, 2>> boundary_edges() const;
    // Boundary split into cycles; empty optional when a boundary vertex has
    // degree other than 2 (films with junction curves).
    std::optional<std::vector<std::vector<int>>> boundary_loops() const;
    // Maximal boundary chains between junction vertices (always available).
    std::vector<std::vector<int>> boundary_curves() const;

    // True when every interior edge (incidence 2) is traversed in opposite
    // directions by its two faces.  Edges of incidence >= 3 (film junctions)
    // are exempt.
    bool orientation_consistent() const;
    // Closed 2-manifold: every edge has incidence exactly 2.
    bool watertight() const;
    // Max edge incidence (3 at film junction edges).
    int max_edge_incidence() const;
};

// Orthonormalize the columns of `basis` (throws if rank-deficient).
Mat orthonormalized(const Mat& basis);

// Orthogonal projection onto the span of the orthonormal columns of `onb`,
// expressed in ambient coordinates.
Vec orthogonal_project(const Vec& x, const Mat& onb);
Mat orthogonal_project_points(const Mat& pts, const Mat& onb);
TriangleMesh orthogonal_project_mesh(const TriangleMesh& mesh, const Mat& onb);

// Wavefront OBJ (v/f records) and OFF, 3-d vertices, 17 significant digits.
void write_obj(const std::string& path, const TriangleMesh& mesh);
void write_off(const std::string& path, const TriangleMesh& mesh);
TriangleMesh read_obj(const std::string& path);
TriangleMesh read_off(const std::string& path);

// Merge vertices closer than tol (used to weld per-sheet grids into films).
TriangleMesh weld_vertices(const Mat& V, const std::vector<std::array<int, 3>>& F, double tol);

}  // namespace mcs::geom
