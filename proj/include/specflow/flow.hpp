#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "specflow/params.hpp"

namespace specflow {

using Eigen::Vector2d;
using Eigen::Vector3d;

enum class Region { LinearBlock, TubePlus, TubeMinus };

const char* region_name(Region r);

/// Hybrid state of the geometric Lorenz flow.
///
/// In the linear block `p` is the ambient point. In a tube `p` is the entry
/// point on the exit face {x = +-1} and `clock` in [0, tau_tube] is the
/// region-local time; the ambient position interpolates linearly between the
/// entry point and its landing point on Sigma.
struct State3 {
    Region region = Region::LinearBlock;
    Vector3d p = Vector3d::Zero();
    double clock = 0.0;
};

/// Point on the cross-section Sigma = {(x, y, 1) : |x|,|y| <= 1}.
struct CrossSectionPoint {
    double x = 0.0;
    double y = 0.0;
    bool on_gamma() const { return x == 0.0; }
};

struct TrajectorySample {
    double t = 0.0;
    Vector3d pos = Vector3d::Zero();
    Region region = Region::LinearBlock;
};

struct SigmaCrossing {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
};

/// Time-stamped orbit samples plus every Sigma-crossing event (t > 0).
struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<SigmaCrossing> crossings;
};

State3 block_state(double x, double y, double z);
State3 block_state(const Vector3d& p);
State3 sigma_state(double x, double y);
State3 sigma_state(const CrossSectionPoint& q);

/// Ambient position of a hybrid state (tube states are interpolated).
Vector3d position(const GeometricLorenzParams& params, const State3& s);

/// Velocity of the hybrid flow at `s` (block field, or tube chord velocity).
Vector3d velocity(const GeometricLorenzParams& params, const State3& s);

/// Landing point on Sigma of a tube entered at face point `entry` on side
/// sigma = +-1: (sigma*(k*z_e - 1), sigma*c + b*y_e, 1).
Vector3d tube_landing(const GeometricLorenzParams& params, int side, const Vector3d& entry);

/// First time the block orbit of `s` reaches |x| = 1. Throws
/// OnStableManifoldError when x = 0.
double time_to_exit(const GeometricLorenzParams& params, const State3& s);

/// Evaluate the flow for time t (t < 0 reaches back at most to the block's
/// entry face Sigma; beyond that throws BackwardThroughTubeError).
State3 flow(const GeometricLorenzParams& params, State3 s, double t);

/// Sample the orbit of s0 on the uniform grid {0, dt, 2dt, ...} up to t_max,
/// inserting every region transition and Sigma-crossing event exactly.
Trajectory sample_orbit(const GeometricLorenzParams& params, const State3& s0, double t_max,
                        double dt);

struct ReturnEvent {
    CrossSectionPoint point;
    double flight_time = 0.0;
};

/// First return to Sigma computed through the flow (exit closed form plus
/// tube map). Throws DomainGammaError when q.x = 0.
ReturnEvent first_return_flow(const GeometricLorenzParams& params, const CrossSectionPoint& q);

/// True when the state lies in the model's trapping region (block or tube
/// with valid coordinates), with slack `tol` on the face inequalities.
bool in_trapping_region(const GeometricLorenzParams& params, const State3& s, double tol = 1e-12);

/// Upper bound for the ambient speed over the trapping region (block field
/// bound plus the longest tube chord).
double max_speed(const GeometricLorenzParams& params);

void write_trajectory_csv(const Trajectory& traj, const std::string& path);
void write_crossings_csv(const Trajectory& traj, const std::string& path);

}  // namespace specflow
