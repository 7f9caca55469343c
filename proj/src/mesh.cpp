#include "sbmrom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "sbmrom/errors.hpp"

namespace sbmrom {

std::string to_string(BoundaryTag tag) {
    switch (tag) {
        case BoundaryTag::Left: return "LEFT";
        case BoundaryTag::Right: return "RIGHT";
        case BoundaryTag::Top: return "TOP";
        case BoundaryTag::Bottom: return "BOTTOM";
    }
    return "?";
}

BoundaryTag boundary_tag_from_string(const std::string& s) {
    if (s == "LEFT") return BoundaryTag::Left;
    if (s == "RIGHT") return BoundaryTag::Right;
    if (s == "TOP") return BoundaryTag::Top;
    if (s == "BOTTOM") return BoundaryTag::Bottom;
    throw ParseError("unknown boundary tag '" + s + "'");
}

ElementGeometry compute_element_geometry(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
    const Vec2 e1 = p1 - p0;
    const Vec2 e2 = p2 - p0;
    const double twice_area = cross(e1, e2);
    ElementGeometry g;
    g.area = 0.5 * twice_area;
    // grad N_a = perp(opposite edge) / (2 area), with the edge taken
    // counter-clockwise so the gradient points toward node a.
    const double inv = 1.0 / twice_area;
    g.grad[0] = perp(p2 - p1) * inv;
    g.grad[1] = perp(p0 - p2) * inv;
    g.grad[2] = perp(p1 - p0) * inv;
    return g;
}

TriMesh::TriMesh(std::vector<Vec2> nodes,
                 std::vector<std::array<int, 3>> elements,
                 std::vector<BoundaryEdge> boundary_edges)
    : nodes_(std::move(nodes)),
      elements_(std::move(elements)),
      boundary_edges_(std::move(boundary_edges)) {
    validate_and_build_cache();
}

void TriMesh::validate_and_build_cache() {
    const int nn = n_nodes();
    if (nn < 3 || elements_.empty()) throw InvalidMesh("mesh needs at least one triangle");

    x_min_ = x_max_ = nodes_[0].x;
    y_min_ = y_max_ = nodes_[0].y;
    for (const Vec2& p : nodes_) {
        x_min_ = std::min(x_min_, p.x);
        x_max_ = std::max(x_max_, p.x);
        y_min_ = std::min(y_min_, p.y);
        y_max_ = std::max(y_max_, p.y);
    }

    geometry_.reserve(elements_.size());
    for (size_t e = 0; e < elements_.size(); ++e) {
        for (int v : elements_[e]) {
            if (v < 0 || v >= nn)
                throw IndexError("element " + std::to_string(e) + " references node " +
                                 std::to_string(v) + " out of range");
        }
        const auto& el = elements_[e];
        ElementGeometry g = compute_element_geometry(nodes_[el[0]], nodes_[el[1]], nodes_[el[2]]);
        if (!(g.area > 0.0))
            throw InvalidMesh("element " + std::to_string(e) + " has non-positive area");
        geometry_.push_back(g);
    }

    // Edge incidence: interior edges are shared by exactly two elements,
    // boundary edges by exactly one.
    std::map<std::pair<int, int>, std::array<int, 2>> edge_elems;
    for (size_t e = 0; e < elements_.size(); ++e) {
        const auto& el = elements_[e];
        for (int k = 0; k < 3; ++k) {
            int a = el[k], b = el[(k + 1) % 3];
            auto key = std::minmax(a, b);
            auto [it, inserted] = edge_elems.try_emplace(key, std::array<int, 2>{-1, -1});
            auto& slots = it->second;
            if (slots[0] < 0) slots[0] = static_cast<int>(e);
            else if (slots[1] < 0) slots[1] = static_cast<int>(e);
            else throw InvalidMesh("edge shared by more than two elements");
        }
    }

    boundary_edge_element_.reserve(boundary_edges_.size());
    for (const BoundaryEdge& be : boundary_edges_) {
        if (be.a < 0 || be.a >= nn || be.b < 0 || be.b >= nn)
            throw IndexError("boundary edge references node out of range");
        auto it = edge_elems.find(std::minmax(be.a, be.b));
        if (it == edge_elems.end())
            throw InvalidMesh("boundary edge is not an element edge");
        if (it->second[1] >= 0)
            throw InvalidMesh("boundary edge belongs to two elements");
        boundary_edge_element_.push_back(it->second[0]);
    }
}

bool TriMesh::operator==(const TriMesh& other) const {
    if (nodes_.size() != other.nodes_.size() || elements_ != other.elements_) return false;
    for (size_t i = 0; i < nodes_.size(); ++i)
        if (!(nodes_[i] == other.nodes_[i])) return false;
    if (boundary_edges_.size() != other.boundary_edges_.size()) return false;
    for (size_t k = 0; k < boundary_edges_.size(); ++k) {
        const auto& x = boundary_edges_[k];
        const auto& y = other.boundary_edges_[k];
        if (x.a != y.a || x.b != y.b || x.tag != y.tag) return false;
    }
    return true;
}

TriMesh generate_channel_mesh(double x0, double x1, double y0, double y1,
                              double target_edge) {
    if (!(x1 > x0) || !(y1 > y0)) throw InvalidDomain("degenerate rectangle");
    if (!(target_edge > 0.0)) throw InvalidDomain("target edge must be positive");

    const int nx = std::max(1, static_cast<int>(std::lround((x1 - x0) / target_edge)));
    const int ny = std::max(1, static_cast<int>(std::lround((y1 - y0) / target_edge)));
    const double dx = (x1 - x0) / nx;
    const double dy = (y1 - y0) / ny;
    const double xm = 0.5 * (x0 + x1);
    const double ym = 0.5 * (y0 + y1);

    // Coordinates are laid out as offsets from the midpoint so that a
    // symmetric range produces bitwise mirror-symmetric node coordinates.
    std::vector<Vec2> nodes;
    nodes.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            nodes.emplace_back(xm + (i - 0.5 * nx) * dx, ym + (j - 0.5 * ny) * dy);

    auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

    std::vector<std::array<int, 3>> elements;
    elements.reserve(static_cast<size_t>(2) * nx * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            if ((i + j) % 2 == 0) {
                elements.push_back({v00, v10, v11});
                elements.push_back({v00, v11, v01});
            } else {
                elements.push_back({v00, v10, v01});
                elements.push_back({v10, v11, v01});
            }
        }
    }

    std::vector<BoundaryEdge> bedges;
    bedges.reserve(2 * (nx + ny));
    for (int i = 0; i < nx; ++i) {
        bedges.push_back({vid(i, 0), vid(i + 1, 0), BoundaryTag::Bottom});
        bedges.push_back({vid(i, ny), vid(i + 1, ny), BoundaryTag::Top});
    }
    for (int j = 0; j < ny; ++j) {
        bedges.push_back({vid(0, j), vid(0, j + 1), BoundaryTag::Left});
        bedges.push_back({vid(nx, j), vid(nx, j + 1), BoundaryTag::Right});
    }

    return TriMesh(std::move(nodes), std::move(elements), std::move(bedges));
}

void save_mesh(const TriMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "TRIMESH v1 " << mesh.n_nodes() << ' ' << mesh.n_elements() << ' '
        << mesh.n_boundary_edges() << '\n';
    char buf[64];
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        const Vec2& p = mesh.node(i);
        std::snprintf(buf, sizeof buf, "%.17g %.17g", p.x, p.y);
        out << buf << '\n';
    }
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& el = mesh.element(e);
        out << el[0] << ' ' << el[1] << ' ' << el[2] << '\n';
    }
    for (int k = 0; k < mesh.n_boundary_edges(); ++k) {
        const BoundaryEdge& be = mesh.boundary_edge(k);
        out << be.a << ' ' << be.b << ' ' << to_string(be.tag) << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

TriMesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");

    int lineno = 0;
    auto next_line = [&](std::string& line) {
        if (!std::getline(in, line))
            throw ParseError(path.string() + ": unexpected end of file at line " +
                             std::to_string(lineno + 1));
        ++lineno;
    };

    std::string line;
    next_line(line);
    std::istringstream header(line);
    std::string magic, version;
    int nn = 0, ne = 0, nb = 0;
    if (!(header >> magic >> version >> nn >> ne >> nb) || magic != "TRIMESH" || version != "v1")
        throw ParseError(path.string() + ":1: bad header, expected 'TRIMESH v1 <n> <e> <b>'");
    if (nn < 3 || ne < 1 || nb < 0)
        throw ParseError(path.string() + ":1: implausible mesh sizes");

    std::vector<Vec2> nodes(nn);
    for (int i = 0; i < nn; ++i) {
        next_line(line);
        std::istringstream ls(line);
        if (!(ls >> nodes[i].x >> nodes[i].y))
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad node line");
    }
    std::vector<std::array<int, 3>> elements(ne);
    for (int e = 0; e < ne; ++e) {
        next_line(line);
        std::istringstream ls(line);
        if (!(ls >> elements[e][0] >> elements[e][1] >> elements[e][2]))
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad element line");
        for (int v : elements[e])
            if (v < 0 || v >= nn)
                throw IndexError(path.string() + ":" + std::to_string(lineno) +
                                 ": node index out of range");
    }
    std::vector<BoundaryEdge> bedges(nb);
    for (int k = 0; k < nb; ++k) {
        next_line(line);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> bedges[k].a >> bedges[k].b >> tag))
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": bad boundary edge line");
        if (bedges[k].a < 0 || bedges[k].a >= nn || bedges[k].b < 0 || bedges[k].b >= nn)
            throw IndexError(path.string() + ":" + std::to_string(lineno) +
                             ": node index out of range");
        bedges[k].tag = boundary_tag_from_string(tag);
    }

    return TriMesh(std::move(nodes), std::move(elements), std::move(bedges));
}

} // namespace sbmrom
