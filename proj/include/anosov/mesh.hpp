#pragma once
// Watertight triangulation of a surface assembly: icosphere sheets with the
// junction disks cut out and re-stitched to structured tube grids. Used for
// OBJ export, genus computation and Gauss-Bonnet quadrature; the dynamics
// never touch meshes.

#include <array>
#include <string>
#include <vector>

#include "anosov/surface.hpp"

namespace anosov {

struct IOError : std::runtime_error {
    explicit IOError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SurfaceMesh {
    std::vector<Vec3> vertices;               // global-chart coordinates
    std::vector<std::array<int, 3>> triangles;
    std::vector<double> K;                    // per-vertex Gauss curvature
    bool closed_manifold{false};
    int euler_characteristic{0};
    int genus{0};
};

// resolution is the ring vertex count per junction circle; tube rows and the
// sheet subdivision level follow from it.
SurfaceMesh build_mesh(const SurfaceAssembly& assembly, int resolution);

// Triangle quadrature of the Gauss curvature over the mesh in the assembly
// metric (vertex-mean K times conformal triangle area).
double integrate_K_dA(const SurfaceMesh& mesh, const SurfaceAssembly& assembly);

// OBJ file plus a sidecar CSV (vertex index, K).
void write_obj(const SurfaceMesh& mesh, const std::string& path);

// resolution >= 8 validated; writes OBJ + CSV and returns the mesh.
SurfaceMesh export_mesh(const SurfaceAssembly& assembly, int resolution, const std::string& path);

}  // namespace anosov
