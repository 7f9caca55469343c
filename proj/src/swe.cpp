#include "sbmrom/swe.hpp"

#include <cmath>

namespace sbmrom {

ConsState clamp_state(const ConsState& u, double h_min, ClampStats* stats) {
    if (u.h >= h_min) return u;
    if (stats) ++stats->clamped;
    return {h_min, u.q1, u.q2};
}

FluxTensor flux(const ConsState& u, double g) {
    const double v1 = u.q1 / u.h;
    const double v2 = u.q2 / u.h;
    const double p = 0.5 * g * u.h * u.h;
    FluxTensor f;
    f.fx = {u.q1, u.q1 * v1 + p, u.q1 * v2};
    f.fy = {u.q2, u.q2 * v1, u.q2 * v2 + p};
    return f;
}

void jacobians(const ConsState& u, double g, Mat3& a1, Mat3& a2) {
    const double v1 = u.q1 / u.h;
    const double v2 = u.q2 / u.h;
    const double gh = g * u.h;
    a1 = {{{0.0, 1.0, 0.0},
           {gh - v1 * v1, 2.0 * v1, 0.0},
           {-v1 * v2, v2, v1}}};
    a2 = {{{0.0, 0.0, 1.0},
           {-v1 * v2, v2, v1},
           {gh - v2 * v2, 0.0, 2.0 * v2}}};
}

Mat3 a0_inverse(const ConsState& u) {
    const double inv_h = 1.0 / u.h;
    const double v1 = u.q1 * inv_h;
    const double v2 = u.q2 * inv_h;
    return {{{1.0, 0.0, 0.0},
             {-v1 * inv_h, inv_h, 0.0},
             {-v2 * inv_h, 0.0, inv_h}}};
}

Vec3 source(const ConsState& u, const PhysicsParams& params) {
    const double v1 = u.q1 / u.h;
    const double v2 = u.q2 / u.h;
    double sf1 = 0.0, sf2 = 0.0;
    if (params.manning > 0.0) {
        const double speed = std::sqrt(v1 * v1 + v2 * v2);
        const double c = params.manning * params.manning * speed * std::pow(u.h, -4.0 / 3.0);
        sf1 = c * v1;
        sf2 = c * v2;
    }
    const double gh = params.g * u.h;
    return {0.0, gh * (-params.grad_z.x - sf1), gh * (-params.grad_z.y - sf2)};
}

double wave_speed(const ConsState& u, double g) {
    const double v1 = u.q1 / u.h;
    const double v2 = u.q2 / u.h;
    return std::sqrt(v1 * v1 + v2 * v2) + std::sqrt(g * u.h);
}

} // namespace sbmrom
