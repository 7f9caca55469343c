#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "sbmrom/geom.hpp"
#include "sbmrom/mesh.hpp"

namespace sbmrom {

// Embedded cylinder cross-section; the only implicit geometry supported.
struct CircleGeometry {
    Vec2 center{0.0, 0.0};
    double radius = 0.0;
};

// Closest-point data of the surrogate-to-true boundary map at one point.
struct ClosestPoint {
    Vec2 x;   // projection onto the circle
    Vec2 d;   // x - x_tilde
    Vec2 n;   // outward normal of the fluid domain (points into the disk)
    Vec2 tau; // n rotated by +90 degrees
};

ClosestPoint closest_point(const CircleGeometry& geom, const Vec2& x_tilde);

struct SurrogatePoint {
    Vec2 x_tilde;        // quadrature point on the surrogate edge
    Vec2 x;              // mapped point on the true boundary
    Vec2 d;              // distance vector x - x_tilde
    Vec2 n;              // true boundary normal at x
    Vec2 tau;            // tangent at x
    double weight = 0.0; // edge-length quadrature weight
    double shape_a = 0.0; // trace of N_a at the point
    double shape_b = 0.0;
};

struct SurrogateEdge {
    int a = -1;
    int b = -1;
    int element = -1; // adjacent active element
    Vec2 n_tilde;     // unit normal pointing from the active side into the ghost area
    std::array<SurrogatePoint, 2> pts{};
};

/**
 * Active/inactive split of the background mesh against an embedded circle,
 * plus the surrogate boundary with its shifted-boundary geometric data.
 * An element is inactive iff any of its vertices lies in the closed disk, so
 * the surrogate domain is a union of whole elements. Immutable once built.
 */
class SurrogateDomain {
public:
    // Everything active; no embedded geometry (body-fitted channel runs).
    static SurrogateDomain all_active(const TriMesh& mesh);

    const std::vector<std::uint8_t>& element_active() const { return element_active_; }
    const std::vector<std::uint8_t>& node_active() const { return node_active_; }
    bool element_is_active(int e) const { return element_active_[e] != 0; }
    bool node_is_active(int a) const { return node_active_[a] != 0; }
    const std::vector<SurrogateEdge>& surrogate_edges() const { return surrogate_edges_; }
    int n_active_elements() const { return n_active_elements_; }
    int n_active_nodes() const { return n_active_nodes_; }
    bool has_geometry() const { return has_geometry_; }
    const CircleGeometry& geometry() const { return geometry_; }

private:
    friend SurrogateDomain classify(const TriMesh&, const CircleGeometry&);

    SurrogateDomain() = default;
    std::vector<std::uint8_t> element_active_;
    std::vector<std::uint8_t> node_active_;
    std::vector<SurrogateEdge> surrogate_edges_;
    int n_active_elements_ = 0;
    int n_active_nodes_ = 0;
    bool has_geometry_ = false;
    CircleGeometry geometry_;
};

SurrogateDomain classify(const TriMesh& mesh, const CircleGeometry& geom);

// Fill the two-point Gauss rule and per-point closest-point data of every
// surrogate edge. classify() already calls this; exposed for testing.
void surrogate_quadrature(const TriMesh& mesh, const CircleGeometry& geom,
                          std::vector<SurrogateEdge>& edges);

// Debug dump, one line per surrogate edge: x1 y1 x2 y2 nx ny
void write_surrogate_csv(const TriMesh& mesh, const SurrogateDomain& surrogate,
                         const std::filesystem::path& path);

} // namespace sbmrom
