#pragma once

// Test-only reference integrator for the linear-block vector field,
// independent of the closed forms used by the library.

#include <Eigen/Core>

#include "specflow/params.hpp"

namespace specflow::testing {

inline Eigen::Vector3d rk4_block(const GeometricLorenzParams& g, Eigen::Vector3d p, double t,
                                 int steps = 20000) {
    auto f = [&](const Eigen::Vector3d& q) {
        return Eigen::Vector3d(g.lambda1 * q.x(), -g.lambda2 * q.y(), -g.lambda3 * q.z());
    };
    const double h = t / steps;
    for (int i = 0; i < steps; ++i) {
        const Eigen::Vector3d k1 = f(p);
        const Eigen::Vector3d k2 = f(p + 0.5 * h * k1);
        const Eigen::Vector3d k3 = f(p + 0.5 * h * k2);
        const Eigen::Vector3d k4 = f(p + h * k3);
        p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return p;
}

}  // namespace specflow::testing
