#include "specflow/tangent.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "specflow/errors.hpp"

namespace specflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int side_of(Region r) { return r == Region::TubePlus ? +1 : -1; }

Matrix3d block_tangent(const GeometricLorenzParams& g, double dt) {
    Matrix3d d = Matrix3d::Zero();
    d(0, 0) = std::exp(g.lambda1 * dt);
    d(1, 1) = std::exp(-g.lambda2 * dt);
    d(2, 2) = std::exp(-g.lambda3 * dt);
    return d;
}

Vector3d block_field(const GeometricLorenzParams& g, const Vector3d& p) {
    return Vector3d(g.lambda1 * p.x(), -g.lambda2 * p.y(), -g.lambda3 * p.z());
}

/// Columns d(position)/d(y_e, z_e, clock) of the tube parametrization
/// P = (1 - rho) E + rho Lambda(E), rho = clock / tau.
Matrix3d tube_frame(const GeometricLorenzParams& g, int side, const Vector3d& entry,
                    double clock) {
    const double rho = clock / g.tau_tube;
    const double s = static_cast<double>(side);
    const Vector3d land = tube_landing(g, side, entry);
    Matrix3d a;
    a.col(0) = Vector3d(0.0, (1.0 - rho) + rho * g.b, 0.0);
    a.col(1) = Vector3d(rho * s * g.k, 0.0, 1.0 - rho);
    a.col(2) = (land - entry) / g.tau_tube;
    return a;
}

/// Time-shear correction at a transversal region boundary with normal n.
Matrix3d saltation(const Vector3d& v_pre, const Vector3d& v_post, const Vector3d& n) {
    const double denom = n.dot(v_pre);
    return Matrix3d::Identity() + (v_post - v_pre) * n.transpose() / denom;
}

}  // namespace

Matrix3d tangent_matrix(const GeometricLorenzParams& g, const State3& s0, double t) {
    if (t < 0.0) {
        const State3 back = flow(g, s0, t);
        return tangent_matrix(g, back, -t).inverse();
    }
    Matrix3d d = Matrix3d::Identity();
    State3 s = s0;
    double rem = t;
    while (rem > 0.0) {
        if (s.region == Region::LinearBlock) {
            const double te = s.p.x() == 0.0 ? kInf : time_to_exit(g, s);
            if (rem <= te) {
                d = block_tangent(g, rem) * d;
                return d;
            }
            d = block_tangent(g, te) * d;
            const int side = s.p.x() > 0.0 ? +1 : -1;
            s = flow(g, s, te);
            Vector3d exit = s.p;
            exit.x() = static_cast<double>(side);
            const Vector3d v_pre = block_field(g, exit);
            const Vector3d v_post = (tube_landing(g, side, exit) - exit) / g.tau_tube;
            const Vector3d n(static_cast<double>(side), 0.0, 0.0);
            d = saltation(v_pre, v_post, n) * d;
            s = State3{side > 0 ? Region::TubePlus : Region::TubeMinus, exit, 0.0};
            rem -= te;
        } else {
            const int side = side_of(s.region);
            const double room = g.tau_tube - s.clock;
            const double dt = std::min(rem, room);
            if (dt > 0.0) {
                const Matrix3d a1 = tube_frame(g, side, s.p, s.clock);
                const Matrix3d a2 = tube_frame(g, side, s.p, s.clock + dt);
                d = a2 * a1.inverse() * d;
            }
            if (rem <= room) {
                s.clock += rem;
                return d;
            }
            rem -= room;
            const Vector3d land = tube_landing(g, side, s.p);
            const Vector3d v_pre = (land - s.p) / g.tau_tube;
            const Vector3d v_post = block_field(g, land);
            d = saltation(v_pre, v_post, Vector3d(0.0, 0.0, 1.0)) * d;
            s = block_state(land);
        }
    }
    return d;
}

Vector3d tangent_flow(const GeometricLorenzParams& g, const State3& s, const Vector3d& v,
                      double t) {
    return tangent_matrix(g, s, t) * v;
}

Matrix3d return_tangent(const GeometricLorenzParams& g, const CrossSectionPoint& q) {
    if (q.x == 0.0) throw DomainGammaError();
    const double flight = first_return_flow(g, q).flight_time;
    return tangent_matrix(g, sigma_state(q), flight);
}

}  // namespace specflow
