#pragma once

#include <array>

#include "sbmrom/geom.hpp"

namespace sbmrom {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

// Conserved shallow-water state: height and the two discharges q_i = h v_i.
struct ConsState {
    double h = 0.0;
    double q1 = 0.0;
    double q2 = 0.0;
};

struct PhysicsParams {
    double g = 9.81;
    Vec2 grad_z{0.0, 0.0}; // bed slope, S_o = -grad z
    double manning = 0.0;  // friction coefficient f
    double h_min = 1e-8;   // clamp applied before any division by h
};

struct ClampStats {
    long long clamped = 0;
};

// Clamp the height away from zero; divisions downstream assume h >= h_min.
ConsState clamp_state(const ConsState& u, double h_min, ClampStats* stats = nullptr);

struct FluxTensor {
    Vec3 fx{};
    Vec3 fy{};
};

FluxTensor flux(const ConsState& u, double g);

// Flux Jacobians A_i = dF_i/dU.
void jacobians(const ConsState& u, double g, Mat3& a1, Mat3& a2);

// Inverse of the conserved-to-primitive scaling matrix A0.
Mat3 a0_inverse(const ConsState& u);

// Source vector Z = (0, S_1, S_2) with bed slope and Manning friction.
Vec3 source(const ConsState& u, const PhysicsParams& params);

// |v| + sqrt(g h), the largest characteristic speed.
double wave_speed(const ConsState& u, double g);

inline Vec3 mat_vec(const Mat3& m, const Vec3& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
}

} // namespace sbmrom
