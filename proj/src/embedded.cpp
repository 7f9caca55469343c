#include "sbmrom/embedded.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <utility>

#include "sbmrom/errors.hpp"

namespace sbmrom {

ClosestPoint closest_point(const CircleGeometry& geom, const Vec2& x_tilde) {
    const Vec2 r = x_tilde - geom.center;
    const double dist = norm(r);
    if (dist == 0.0) throw SingularProjection("projection undefined at the circle center");
    ClosestPoint cp;
    cp.x = geom.center + r * (geom.radius / dist);
    cp.d = cp.x - x_tilde;
    cp.n = (geom.center - cp.x) / geom.radius;
    cp.tau = perp(cp.n);
    return cp;
}

SurrogateDomain SurrogateDomain::all_active(const TriMesh& mesh) {
    SurrogateDomain s;
    s.element_active_.assign(mesh.n_elements(), 1);
    s.node_active_.assign(mesh.n_nodes(), 1);
    s.n_active_elements_ = mesh.n_elements();
    s.n_active_nodes_ = mesh.n_nodes();
    return s;
}

void surrogate_quadrature(const TriMesh& mesh, const CircleGeometry& geom,
                          std::vector<SurrogateEdge>& edges) {
    const double xi = 1.0 / std::sqrt(3.0);
    for (SurrogateEdge& se : edges) {
        const Vec2 pa = mesh.node(se.a);
        const Vec2 pb = mesh.node(se.b);
        const Vec2 mid = (pa + pb) * 0.5;
        const Vec2 half = (pb - pa) * 0.5;
        const double len = norm(pb - pa);

        // Unit edge normal oriented away from the adjacent active element.
        Vec2 nt = perp(pb - pa) / len;
        const auto& el = mesh.element(se.element);
        const Vec2 centroid = (mesh.node(el[0]) + mesh.node(el[1]) + mesh.node(el[2])) / 3.0;
        if (dot(nt, centroid - mid) > 0.0) nt = nt * -1.0;
        se.n_tilde = nt;

        const double s[2] = {-xi, xi};
        for (int q = 0; q < 2; ++q) {
            SurrogatePoint& p = se.pts[q];
            p.x_tilde = mid + half * s[q];
            p.shape_a = 0.5 * (1.0 - s[q]);
            p.shape_b = 0.5 * (1.0 + s[q]);
            p.weight = 0.5 * len;
            const ClosestPoint cp = closest_point(geom, p.x_tilde);
            p.x = cp.x;
            p.d = cp.d;
            p.n = cp.n;
            p.tau = cp.tau;
        }
    }
}

SurrogateDomain classify(const TriMesh& mesh, const CircleGeometry& geom) {
    if (!(geom.radius > 0.0)) throw GeometryOutOfBounds("radius must be positive");
    if (geom.center.x - geom.radius <= mesh.x_min() ||
        geom.center.x + geom.radius >= mesh.x_max() ||
        geom.center.y - geom.radius <= mesh.y_min() ||
        geom.center.y + geom.radius >= mesh.y_max())
        throw GeometryOutOfBounds("circle touches the outer boundary");

    SurrogateDomain s;
    s.has_geometry_ = true;
    s.geometry_ = geom;

    const double r2 = geom.radius * geom.radius;
    std::vector<std::uint8_t> node_in_disk(mesh.n_nodes(), 0);
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        const Vec2 d = mesh.node(i) - geom.center;
        node_in_disk[i] = (d.x * d.x + d.y * d.y <= r2) ? 1 : 0;
    }

    s.element_active_.assign(mesh.n_elements(), 1);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& el = mesh.element(e);
        if (node_in_disk[el[0]] || node_in_disk[el[1]] || node_in_disk[el[2]])
            s.element_active_[e] = 0;
    }

    s.node_active_.assign(mesh.n_nodes(), 0);
    s.n_active_elements_ = 0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!s.element_active_[e]) continue;
        ++s.n_active_elements_;
        for (int v : mesh.element(e)) s.node_active_[v] = 1;
    }
    if (s.n_active_elements_ == 0)
        throw DegenerateClassification("no active elements remain");
    s.n_active_nodes_ = 0;
    for (std::uint8_t f : s.node_active_)
        if (f) ++s.n_active_nodes_;

    // Interfaces between one active and one inactive element become the
    // surrogate boundary. The edge orientation follows the active element.
    std::map<std::pair<int, int>, std::array<int, 2>> edge_elems;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& el = mesh.element(e);
        for (int k = 0; k < 3; ++k) {
            auto key = std::minmax(el[k], el[(k + 1) % 3]);
            auto& slots = edge_elems.try_emplace(key, std::array<int, 2>{-1, -1}).first->second;
            (slots[0] < 0 ? slots[0] : slots[1]) = e;
        }
    }
    for (const auto& [key, slots] : edge_elems) {
        if (slots[1] < 0) {
            if (!s.element_active_[slots[0]])
                throw GeometryOutOfBounds("ghost area reaches the outer boundary");
            continue;
        }
        const bool a0 = s.element_active_[slots[0]];
        const bool a1 = s.element_active_[slots[1]];
        if (a0 == a1) continue;
        SurrogateEdge se;
        se.a = key.first;
        se.b = key.second;
        se.element = a0 ? slots[0] : slots[1];
        s.surrogate_edges_.push_back(se);
    }

    surrogate_quadrature(mesh, geom, s.surrogate_edges_);
    return s;
}

void write_surrogate_csv(const TriMesh& mesh, const SurrogateDomain& surrogate,
                         const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "x1,y1,x2,y2,nx,ny\n";
    char buf[160];
    for (const SurrogateEdge& se : surrogate.surrogate_edges()) {
        const Vec2 pa = mesh.node(se.a);
        const Vec2 pb = mesh.node(se.b);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                      pa.x, pa.y, pb.x, pb.y, se.n_tilde.x, se.n_tilde.y);
        out << buf << '\n';
    }
}

} // namespace sbmrom
