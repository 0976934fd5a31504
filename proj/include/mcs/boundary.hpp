#pragma once

// Watertight triangle mesh of the domain boundary with per-face region
// labels.  Patches are built region by region (plate sector fans, band
// grids, spherical fans over the leftover pieces) sharing their border
// polylines vertex for vertex, then welded.  The trace of the cone on the
// boundary splits the surface into components, found by a flood fill that
// refuses to cross edges lying on the cone; for the tetrahedral cone these
// are the four pieces around the antipodes of the singular directions.

#include "mcs/domain.hpp"

#include <map>
#include <string>
#include <vector>

namespace mcs::boundary {

using domain::ConvexDomain;

struct LabeledMesh {
    geom::TriangleMesh mesh;
    std::vector<domain::RegionId> face_region;  // one label per face
    std::vector<int> face_component;            // component of boundary minus cone trace
    int component_count = 0;
    std::map<std::string, double> region_areas;  // keyed by RegionId::label()
    std::vector<double> component_areas;
    // For specs with singular directions: anchor_component[i] is the
    // component containing the point opposite singular direction i.
    std::vector<int> anchor_component;

    double total_area() const { return mesh.area(); }
};

// Shared parameter grid on a sheet: contains 0, theta and (for arc sheets)
// the two gate angles exactly, with spacing that scales as 1/resolution.
// The band patch of boundary_mesh and the film mesh of the deformation
// harness both use it, so their trace polylines coincide vertex for vertex.
std::vector<double> sheet_s_grid(const ConvexDomain& dom, int sheet, int resolution);

// Index range [lo, hi] of sheet_s_grid covering the band (between gates);
// the whole range for circle sheets.
std::pair<int, int> band_grid_range(const ConvexDomain& dom, int sheet, int resolution);

LabeledMesh boundary_mesh(const ConvexDomain& dom, int resolution);

// One line per face: index, region label, component id.
void write_labels_csv(const std::string& path, const LabeledMesh& lm);

}  // namespace mcs::boundary
