#include "anosov/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <stdexcept>

#include "anosov/jet.hpp"

namespace anosov {

namespace {

constexpr double kPi = 3.141592653589793;

struct IcoSphere {
    std::vector<Vec3> verts;  // unit vectors
    std::vector<std::array<int, 3>> tris;
};

IcoSphere icosphere(int level) {
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    IcoSphere s;
    const double raw[12][3] = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                               {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                               {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
    for (const auto& v : raw) s.verts.push_back(Vec3(v[0], v[1], v[2]).normalized());
    s.tris = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
              {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
              {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
              {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const int idx = static_cast<int>(s.verts.size());
            s.verts.push_back((s.verts[a] + s.verts[b]).normalized());
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(s.tris.size() * 4);
        for (const auto& t : s.tris) {
            const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        s.tris = std::move(next);
    }
    return s;
}

Vec3 tube_point_global(const TubeRegion& tube, double s, double theta) {
    const ProfileSample p = tube.profile.at(s);
    Jet2 psi, rho;
    chart_to_axis(Jet2::constant(p.r), Jet2::constant(p.z), psi, rho);
    const Vec3 w = tube.frame_b1 * std::cos(theta) + tube.frame_b2 * std::sin(theta);
    return (tube.axis.v * std::cos(psi.f) + w * std::sin(psi.f)) * rho.f;
}

// Chains boundary edges (vertex pairs) into a closed loop.
std::vector<int> chain_loop(const std::vector<std::pair<int, int>>& edges) {
    std::map<int, std::vector<int>> adj;
    for (const auto& e : edges) {
        adj[e.first].push_back(e.second);
        adj[e.second].push_back(e.first);
    }
    for (const auto& [v, nb] : adj)
        if (nb.size() != 2) throw std::runtime_error("hole boundary is not a simple loop");
    std::vector<int> loop;
    const int start = edges.front().first;
    int prev = -1, cur = start;
    do {
        loop.push_back(cur);
        const auto& nb = adj[cur];
        const int next = (nb[0] == prev) ? nb[1] : nb[0];
        prev = cur;
        cur = next;
    } while (cur != start && loop.size() <= edges.size() + 1);
    if (cur != start || loop.size() != edges.size())
        throw std::runtime_error("hole boundary did not close");
    return loop;
}

}  // namespace

SurfaceMesh build_mesh(const SurfaceAssembly& assembly, int resolution) {
    SurfaceMesh mesh;
    const int M = resolution;
    const std::size_t n_tubes = assembly.tubes.size();

    // Tube grids first: ring rows shared with the sheets.
    // upper_ring[i][k], lower_ring[i][k] hold global vertex ids.
    std::vector<std::vector<int>> upper_ring(n_tubes), lower_ring(n_tubes);

    auto add_vertex = [&](const Vec3& p, double K) {
        mesh.vertices.push_back(p);
        mesh.K.push_back(K);
        return static_cast<int>(mesh.vertices.size()) - 1;
    };

    for (std::size_t i = 0; i < n_tubes; ++i) {
        const TubeRegion& tube = assembly.tubes[i];
        const int rows = std::max(9, resolution + 1);  // row count including both rings
        std::vector<std::vector<int>> grid(rows, std::vector<int>(M));
        for (int r = 0; r < rows; ++r) {
            const double s = tube.s_junction_minus +
                             (tube.s_junction_plus - tube.s_junction_minus) * r / (rows - 1);
            const double Ks = tube.profile.at(s).K;
            for (int k = 0; k < M; ++k) {
                const double theta = 2.0 * kPi * k / M;
                grid[r][k] = add_vertex(tube_point_global(tube, s, theta), Ks);
            }
        }
        lower_ring[i] = grid.front();
        upper_ring[i] = grid.back();
        for (int r = 0; r + 1 < rows; ++r)
            for (int k = 0; k < M; ++k) {
                const int k1 = (k + 1) % M;
                mesh.triangles.push_back({grid[r][k], grid[r][k1], grid[r + 1][k]});
                mesh.triangles.push_back({grid[r][k1], grid[r + 1][k1], grid[r + 1][k]});
            }
    }

    // Sheets: icosphere minus junction caps, stitched to the rings.
    double min_spacing = 1e9;
    for (std::size_t i = 0; i < n_tubes; ++i)
        min_spacing =
            std::min(min_spacing, 2.0 * kPi * std::sin(assembly.tubes[i].psi_junction) / M);
    int level = 0;
    double edge = 1.1071487177940904;  // icosahedron edge arc
    while (edge > min_spacing && level < 7) {
        edge *= 0.5;
        ++level;
    }
    const IcoSphere base = icosphere(level);

    for (int sheet = 0; sheet < 2; ++sheet) {
        const bool outer = sheet == 1;
        const SheetSpec& spec = outer ? assembly.sheet_outer : assembly.sheet_inner;

        // Keep triangles whose vertices all clear every junction cap.
        std::vector<char> inside(base.verts.size(), 0);
        for (std::size_t v = 0; v < base.verts.size(); ++v)
            for (std::size_t i = 0; i < n_tubes; ++i)
                if (std::acos(std::clamp(dot(base.verts[v], assembly.tubes[i].axis.v), -1.0, 1.0)) <
                    assembly.tubes[i].psi_junction) {
                    inside[v] = 1;
                    break;
                }

        std::vector<int> vmap(base.verts.size(), -1);
        auto sheet_vertex = [&](int v) {
            if (vmap[v] < 0) vmap[v] = add_vertex(base.verts[v] * spec.rho, spec.K);
            return vmap[v];
        };

        std::map<std::pair<int, int>, int> edge_use;  // base-vertex edges of kept triangles
        std::vector<std::array<int, 3>> kept;
        for (const auto& t : base.tris) {
            if (inside[t[0]] || inside[t[1]] || inside[t[2]]) continue;
            kept.push_back(t);
            for (int e = 0; e < 3; ++e) {
                const auto key = std::minmax(t[e], t[(e + 1) % 3]);
                ++edge_use[key];
            }
        }
        for (const auto& t : kept)
            mesh.triangles.push_back({sheet_vertex(t[0]), sheet_vertex(t[1]), sheet_vertex(t[2])});

        // Hole boundaries, grouped by nearest tube axis.
        std::vector<std::vector<std::pair<int, int>>> hole_edges(n_tubes);
        for (const auto& [key, count] : edge_use) {
            if (count != 1) continue;
            const Vec3 mid = (base.verts[key.first] + base.verts[key.second]).normalized();
            std::size_t best = 0;
            double best_d = 1e9;
            for (std::size_t i = 0; i < n_tubes; ++i) {
                const double d =
                    std::acos(std::clamp(dot(mid, assembly.tubes[i].axis.v), -1.0, 1.0));
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            hole_edges[best].push_back(key);
        }

        for (std::size_t i = 0; i < n_tubes; ++i) {
            if (hole_edges[i].empty())
                throw std::runtime_error("sheet subdivision too coarse: no hole for a tube");
            const TubeRegion& tube = assembly.tubes[i];
            std::vector<int> loop = chain_loop(hole_edges[i]);

            // Azimuth of each loop vertex about the tube axis.
            auto azimuth = [&](const Vec3& p) {
                const Vec3 w = p - tube.axis.v * dot(p, tube.axis.v);
                return std::atan2(dot(w, tube.frame_b2), dot(w, tube.frame_b1));
            };
            // Orient the loop with increasing azimuth.
            double wind = 0.0;
            for (std::size_t k = 0; k < loop.size(); ++k) {
                double d = azimuth(base.verts[loop[(k + 1) % loop.size()]]) -
                           azimuth(base.verts[loop[k]]);
                if (d > kPi) d -= 2.0 * kPi;
                if (d < -kPi) d += 2.0 * kPi;
                wind += d;
            }
            if (wind < 0.0) std::reverse(loop.begin(), loop.end());

            // Zip the hole loop to this sheet's ring: a two-pointer merge
            // over unrolled azimuths, one band triangle per step.
            const std::vector<int>& ring = outer ? upper_ring[i] : lower_ring[i];
            const std::size_t H = loop.size();
            std::size_t h0 = 0;
            {
                std::vector<double> az(H);
                for (std::size_t k = 0; k < H; ++k) az[k] = azimuth(base.verts[loop[k]]);
                for (std::size_t k = 1; k < H; ++k)
                    if (az[k] < az[h0]) h0 = k;
            }
            // Unwrap the loop azimuths (ragged boundaries zigzag locally),
            // then monotonize with a running max: the merge below only needs
            // a monotone parameter, not exact geometry.
            std::vector<double> phiA(H + 1);
            std::vector<int> A(H + 1);
            for (std::size_t k = 0; k <= H; ++k) {
                const int vid = loop[(h0 + k) % H];
                A[k] = sheet_vertex(vid);
                if (k == H) {
                    phiA[k] = phiA[0] + 2.0 * kPi;
                    break;
                }
                double az = azimuth(base.verts[vid]);
                if (k > 0) {
                    while (az < phiA[k - 1] - kPi) az += 2.0 * kPi;
                    while (az > phiA[k - 1] + kPi) az -= 2.0 * kPi;
                    az = std::max(az, phiA[k - 1]);
                    az = std::min(az, phiA[0] + 2.0 * kPi);
                }
                phiA[k] = az;
            }
            // Ring azimuth of vertex k is exactly 2*pi*k/M; start at the
            // first ring vertex at or after the hole start.
            const std::size_t r0 =
                static_cast<std::size_t>(std::ceil(phiA[0] / (2.0 * kPi) * M + 4.0 * M)) % M;
            std::vector<double> phiB(M + 1);
            std::vector<int> B(M + 1);
            double base_az = 2.0 * kPi * r0 / M;
            while (base_az < phiA[0] - 1e-12) base_az += 2.0 * kPi;
            while (base_az >= phiA[0] + 2.0 * kPi - 1e-12) base_az -= 2.0 * kPi;
            for (int k = 0; k <= M; ++k) {
                B[k] = ring[(r0 + k) % M];
                phiB[k] = base_az + 2.0 * kPi * k / M;
            }

            std::size_t ia = 0, ib = 0;
            while (ia < H || ib < static_cast<std::size_t>(M)) {
                const bool step_hole =
                    (ib >= static_cast<std::size_t>(M)) ||
                    (ia < H && phiA[ia + 1] <= phiB[ib + 1]);
                if (step_hole) {
                    mesh.triangles.push_back({A[ia], A[ia + 1], B[ib]});
                    ++ia;
                } else {
                    mesh.triangles.push_back({A[ia], B[ib + 1], B[ib]});
                    ++ib;
                }
            }
        }
    }

    // Orient consistently (flood fill over shared edges), then validate.
    {
        std::map<std::pair<int, int>, std::vector<int>> edge_tris;
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
            for (int e = 0; e < 3; ++e) {
                const auto key = std::minmax(mesh.triangles[t][e], mesh.triangles[t][(e + 1) % 3]);
                edge_tris[key].push_back(static_cast<int>(t));
            }
        bool manifold = true;
        for (const auto& [key, ts] : edge_tris)
            if (ts.size() != 2) manifold = false;

        if (manifold) {
            std::vector<int> state(mesh.triangles.size(), 0);  // 0 unseen, 1 queued/kept
            std::vector<int> stack;
            auto has_directed = [&](int t, int a, int b) {
                const auto& tr = mesh.triangles[t];
                for (int e = 0; e < 3; ++e)
                    if (tr[e] == a && tr[(e + 1) % 3] == b) return true;
                return false;
            };
            for (std::size_t seed = 0; seed < mesh.triangles.size(); ++seed) {
                if (state[seed]) continue;
                state[seed] = 1;
                stack.push_back(static_cast<int>(seed));
                while (!stack.empty()) {
                    const int t = stack.back();
                    stack.pop_back();
                    for (int e = 0; e < 3; ++e) {
                        const int a = mesh.triangles[t][e], b = mesh.triangles[t][(e + 1) % 3];
                        for (const int other : edge_tris[std::minmax(a, b)]) {
                            if (other == t || state[other]) continue;
                            if (has_directed(other, a, b))
                                std::swap(mesh.triangles[other][1], mesh.triangles[other][2]);
                            state[other] = 1;
                            stack.push_back(other);
                        }
                    }
                }
            }
            // Orientability check: every edge now used once per direction.
            std::map<std::pair<int, int>, int> directed;
            bool orientable = true;
            for (const auto& tr : mesh.triangles)
                for (int e = 0; e < 3; ++e)
                    if (++directed[{tr[e], tr[(e + 1) % 3]}] > 1) orientable = false;
            mesh.closed_manifold = orientable;
        }

        const long long V = static_cast<long long>(mesh.vertices.size());
        const long long E = static_cast<long long>(edge_tris.size());
        const long long F = static_cast<long long>(mesh.triangles.size());
        mesh.euler_characteristic = static_cast<int>(V - E + F);
        mesh.genus = (2 - mesh.euler_characteristic) / 2;
    }
    return mesh;
}

double integrate_K_dA(const SurfaceMesh& mesh, const SurfaceAssembly& assembly) {
    double total = 0.0;
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[t[0]];
        const Vec3& b = mesh.vertices[t[1]];
        const Vec3& c = mesh.vertices[t[2]];
        const double area_eucl = 0.5 * cross(b - a, c - a).norm();
        double factor = 1.0;
        if (assembly.ambient == Ambient::spherical_stereographic) {
            const Vec3 cen = (a + b + c) / 3.0;
            const double xi = 2.0 / (1.0 + cen.norm2());
            factor = xi * xi;
        }
        const double K_mean = (mesh.K[t[0]] + mesh.K[t[1]] + mesh.K[t[2]]) / 3.0;
        total += K_mean * area_eucl * factor;
    }
    return total;
}

void write_obj(const SurfaceMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IOError("cannot open " + path);
    out << std::setprecision(12);
    for (const auto& v : mesh.vertices) out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
    for (const auto& t : mesh.triangles)
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    std::ofstream csv(path + ".curvature.csv");
    if (!csv) throw IOError("cannot open " + path + ".curvature.csv");
    csv << std::setprecision(17) << "vertex,K\n";
    for (std::size_t i = 0; i < mesh.K.size(); ++i) csv << i << ',' << mesh.K[i] << '\n';
}

SurfaceMesh export_mesh(const SurfaceAssembly& assembly, int resolution, const std::string& path) {
    if (resolution < 8) throw std::invalid_argument("mesh resolution must be at least 8");
    SurfaceMesh mesh = build_mesh(assembly, resolution);
    write_obj(mesh, path);
    return mesh;
}

}  // namespace anosov
