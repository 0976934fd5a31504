#include "mcs/measure.hpp"

#include "doctest.h"
#include "helpers.hpp"

using namespace mcs;
using namespace mcs::measure;
using cones::build_plane;
using cones::build_t;
using cones::build_y;
using domain::ConvexDomain;

namespace {

Vec unit3(double x, double y, double z) {
    Vec v(3);
    v << x, y, z;
    return v.normalized();
}

}  // namespace

TEST_CASE("plane disk area is exact") {
    // The clipped plane is the disk of radius 1-eta: area pi (1-eta)^2.
    for (double eta : {0.05, 0.1, 0.3}) {
        const ConvexDomain dom(build_plane(), eta);
        const auto res = clipped_cone_area(dom, Translation::none(3));
        // The radial cuts are bisected to 1e-12, which floors the accuracy.
        CHECK(res.value == doctest::Approx(kPi * sq(1 - eta)).epsilon(1e-10));
        CHECK(res.error < 1e-8);
        CHECK(res.per_piece.size() == 1);
        CHECK(res.per_piece.count("circle_0") == 1);
    }
    const ConvexDomain dom(build_plane(), 0.1);
    CHECK(clipped_cone_area(dom, Translation::none(3)).value ==
          doctest::Approx(2.5446900494077327).epsilon(1e-10));
}

TEST_CASE("y cone area matches the chord-cut formula") {
    // Each sheet is a half disk of radius 1-eta cut at height 1-2 eta:
    // area d*sqrt(rho^2-d^2) + rho^2*asin(d/rho).
    for (double eta : {0.05, 0.1}) {
        const ConvexDomain dom(build_y(), eta);
        const auto res = clipped_cone_area(dom, Translation::none(3));
        CHECK(res.value == doctest::Approx(3 * testutil::y_sheet_area(eta)).epsilon(1e-10));
        REQUIRE(res.per_piece.size() == 3);
        for (const auto& [label, piece] : res.per_piece)
            CHECK(piece == doctest::Approx(testutil::y_sheet_area(eta)).epsilon(1e-10));
    }
    const ConvexDomain dom(build_y(), 0.1);
    CHECK(clipped_cone_area(dom, Translation::none(3)).value ==
          doctest::Approx(3.650186557585026).epsilon(1e-10));
}

TEST_CASE("t cone area against the frozen prototype value") {
    const ConvexDomain dom(build_t(), 0.1);
    const auto res = clipped_cone_area(dom, Translation::none(3));
    CHECK(res.value == doctest::Approx(4.309141669073).epsilon(1e-6));
    CHECK(res.error < 1e-7);
    REQUIRE(res.per_piece.size() == 6);
    // All six sheets are congruent under the tetrahedral symmetry.
    const double each = res.value / 6.0;
    for (const auto& [label, piece] : res.per_piece)
        CHECK(piece == doctest::Approx(each).epsilon(1e-9));
}

TEST_CASE("translation leaves the clipped measure unchanged") {
    const double t = 0.05;

    // Plane translated inside itself: the clipped set is literally the same.
    const ConvexDomain plane(build_plane(), 0.1);
    const double p0 = clipped_cone_area(plane, Translation::none(3)).value;
    const double p1 = clipped_cone_area(plane, Translation{unit3(1, 0, 0), t}).value;
    CHECK(p1 == doctest::Approx(p0).epsilon(1e-11));

    // Y translated along a horizontal direction: sheets trade area exactly.
    const ConvexDomain y(build_y(), 0.1);
    const double y0 = clipped_cone_area(y, Translation::none(3)).value;
    for (const Vec& q : {unit3(1, 0, 0), unit3(-0.3, 0.7, 0)}) {
        const auto moved = clipped_cone_area(y, Translation{q, t});
        CHECK(moved.value == doctest::Approx(y0).epsilon(1e-8));
    }
    // Translation along the spine maps the cone into itself.
    const double y_spine = clipped_cone_area(y, Translation{unit3(0, 0, 1), t}).value;
    CHECK(y_spine == doctest::Approx(y0).epsilon(1e-10));

    // T translated toward a face center and along an edge direction.
    const ConvexDomain tdom(build_t(), 0.1);
    const double t0 = clipped_cone_area(tdom, Translation::none(3)).value;
    const Vec toward_face = -tdom.spec().singular_dirs[0];
    Vec along_edge = tdom.spec().singular_dirs[0] - tdom.spec().singular_dirs[1];
    for (const Vec& q : {Vec(toward_face.normalized()), Vec(along_edge.normalized())}) {
        const auto moved = clipped_cone_area(tdom, Translation{q, 0.03});
        CHECK(moved.value == doctest::Approx(t0).epsilon(1e-7));
    }
}

TEST_CASE("monte carlo oracle brackets the quadrature") {
    const ConvexDomain dom(build_y(), 0.1);
    const Translation tr{unit3(0.2, -0.4, 0), 0.04};
    const double quad = clipped_cone_area(dom, tr).value;

    const auto mc = mc_cone_area_oracle(dom, tr, 200000, 99);
    CHECK(mc.samples >= 150000);  // stratification rounds the budget down
    CHECK(mc.samples <= 200000);
    CHECK(mc.stderr_est > 0.0);
    CHECK(std::abs(mc.value - quad) <= 3.0 * mc.stderr_est);

    // Same seed, same answer, bit for bit; another seed moves it.
    const auto again = mc_cone_area_oracle(dom, tr, 200000, 99);
    CHECK(again.value == mc.value);
    CHECK(again.stderr_est == mc.stderr_est);
    const auto other = mc_cone_area_oracle(dom, tr, 200000, 100);
    CHECK(other.value != mc.value);
    CHECK(std::abs(other.value - quad) <= 3.0 * other.stderr_est);

    CHECK_THROWS_AS(mc_cone_area_oracle(dom, tr, 100, 1), invalid_input);
}

TEST_CASE("y slices are three spokes of equal length") {
    const double eta = 0.1;
    const ConvexDomain dom(build_y(), eta);
    const auto prof = slice_y_cone(dom, Translation::none(3), 0.0);
    REQUIRE(prof.pieces.size() == 3);
    CHECK(prof.length == doctest::Approx(3 * (1 - eta)).epsilon(1e-10));
    CHECK_THROWS_AS(slice_y_cone(ConvexDomain(build_plane(), eta), Translation::none(3), 0.0),
                    invalid_input);
    for (const auto& piece : prof.pieces) CHECK(piece.length() == doctest::Approx(1 - eta));

    // At height t each spoke is cut by its own band circle.
    for (double t : {0.2, -0.35, 0.6}) {
        const auto p = slice_y_cone(dom, Translation::none(3), t);
        CHECK(p.length == doctest::Approx(3 * std::sqrt(sq(1 - eta) - t * t)).epsilon(1e-9));
    }

    // Beyond the plate level the slice is empty.
    CHECK(slice_y_cone(dom, Translation::none(3), 0.85).pieces.empty());

    // Horizontal translations redistribute the three lengths but keep the
    // total (the legs sum to zero).
    const Translation tr{unit3(0.6, 0.3, 0), 0.05};
    for (double t : {0.0, 0.3}) {
        const auto p = slice_y_cone(dom, tr, t);
        REQUIRE(p.pieces.size() == 3);
        CHECK(p.length == doctest::Approx(3 * std::sqrt(sq(1 - eta) - t * t)).epsilon(1e-9));
    }

    // Slice gates land on the domain boundary.
    const auto gates = slice_gates(dom, slice_y_cone(dom, tr, 0.25));
    CHECK(gates.cols() == 3);
    for (int c = 0; c < gates.cols(); ++c)
        CHECK(dom.minkowski(gates.col(c)) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("mesh slices glue into chains") {
    const auto sphere = testutil::icosphere(4);
    Vec axis(3);
    axis << 0, 0, 1;
    const double t = 0.1234;
    const auto prof = slice_mesh(sphere, axis, t);
    REQUIRE(prof.pieces.size() == 1);
    CHECK(prof.pieces[0].is_closed(1e-7));
    CHECK(prof.length == doctest::Approx(2 * kPi * std::sqrt(1 - t * t)).epsilon(2e-3));
    CHECK(prof.degenerate_faces == 0);

    // A slice through the equator of a cylinder gives its circumference.
    const auto tube = testutil::cylinder(0.7, -0.5, 0.5, 96, 4);
    const auto ring = slice_mesh(tube, axis, 0.03);
    REQUIRE(ring.pieces.size() == 1);
    CHECK(ring.length == doctest::Approx(2 * kPi * 0.7).epsilon(1e-3));

    // Missing the mesh entirely gives an empty profile.
    CHECK(slice_mesh(tube, axis, 2.0).pieces.empty());
}

TEST_CASE("coarea sum stays below the area") {
    // Lateral cylinder surface: slices have constant length, the coarea
    // integral equals height times circumference, the area the same.
    const auto tube = testutil::cylinder(0.7, 0.0, 1.0, 128, 6);
    Vec axis(3);
    axis << 0, 0, 1;
    const auto co = coarea_lower_bound(tube, axis, 0.05, 0.95, 64);
    CHECK(co.ts.size() == 65);
    CHECK(co.lengths.size() == 65);
    const double per = co.lengths.front();
    for (double l : co.lengths) CHECK(l == doctest::Approx(per).epsilon(1e-9));
    CHECK(co.integral == doctest::Approx(0.9 * per).epsilon(1e-9));
    CHECK(co.quad_error < 1e-9);
    CHECK(co.integral <= tube.area() * (1 + 1e-3));

    // Tilted axis on a sphere: the slice-length integral of a 1-Lipschitz
    // height never exceeds the surface area.
    const auto sphere = testutil::icosphere(4);
    const Vec tilted = unit3(0.3, 0.1, 1.0);
    // The truncated range [-0.9, 0.9] carries 2*pi*1.512 of slice length
    // against the full area 4*pi, a ratio just over 3/4.
    const auto co2 = coarea_lower_bound(sphere, tilted, -0.9, 0.9, 180);
    CHECK(co2.integral <= sphere.area() * (1 + 1e-3));
    CHECK(co2.integral > 0.74 * sphere.area());
}
