#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "sbmrom/geom.hpp"

namespace sbmrom {

enum class BoundaryTag { Left, Right, Top, Bottom };

std::string to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_string(const std::string& s);

struct BoundaryEdge {
    int a = -1;
    int b = -1;
    BoundaryTag tag = BoundaryTag::Left;
};

// Area and the constant gradients of the three linear shape functions.
struct ElementGeometry {
    double area = 0.0;
    std::array<Vec2, 3> grad{};
};

ElementGeometry compute_element_geometry(const Vec2& p0, const Vec2& p1, const Vec2& p2);

/**
 * Immutable background triangulation with tagged boundary edges and a
 * per-element cache of linear-FEM geometry. Node and element indices are
 * 0-based; elements are stored counter-clockwise.
 */
class TriMesh {
public:
    TriMesh(std::vector<Vec2> nodes,
            std::vector<std::array<int, 3>> elements,
            std::vector<BoundaryEdge> boundary_edges);

    int n_nodes() const { return static_cast<int>(nodes_.size()); }
    int n_elements() const { return static_cast<int>(elements_.size()); }
    int n_boundary_edges() const { return static_cast<int>(boundary_edges_.size()); }

    const Vec2& node(int i) const { return nodes_[i]; }
    const std::array<int, 3>& element(int e) const { return elements_[e]; }
    const BoundaryEdge& boundary_edge(int k) const { return boundary_edges_[k]; }
    const ElementGeometry& geometry(int e) const { return geometry_[e]; }

    const std::vector<Vec2>& nodes() const { return nodes_; }
    const std::vector<std::array<int, 3>>& elements() const { return elements_; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

    // Element adjacent to a boundary edge (each boundary edge has exactly one).
    int boundary_edge_element(int k) const { return boundary_edge_element_[k]; }

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    double y_min() const { return y_min_; }
    double y_max() const { return y_max_; }

    bool operator==(const TriMesh& other) const;

private:
    std::vector<Vec2> nodes_;
    std::vector<std::array<int, 3>> elements_;
    std::vector<BoundaryEdge> boundary_edges_;
    std::vector<ElementGeometry> geometry_;
    std::vector<int> boundary_edge_element_;
    double x_min_ = 0.0, x_max_ = 0.0, y_min_ = 0.0, y_max_ = 0.0;

    void validate_and_build_cache();
};

/**
 * Structured triangulation of the rectangle [x0,x1] x [y0,y1] with cell counts
 * rounded from the target edge length. Cells are split along alternating
 * diagonals so that a y-symmetric range yields a mesh that is exactly mirror
 * symmetric about the centerline. Nodes are ordered row-major by (y, x).
 */
TriMesh generate_channel_mesh(double x0, double x1, double y0, double y1,
                              double target_edge);

// Plain-text format: "TRIMESH v1 <n_node> <n_elem> <n_bedge>" header, then one
// node, element, and tagged boundary edge per line. Round-trips bit exactly.
void save_mesh(const TriMesh& mesh, const std::filesystem::path& path);
TriMesh load_mesh(const std::filesystem::path& path);

} // namespace sbmrom
