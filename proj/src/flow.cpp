#include "specflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "specflow/errors.hpp"

namespace specflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int side_of(Region r) { return r == Region::TubePlus ? +1 : -1; }

Region tube_region(int side) { return side > 0 ? Region::TubePlus : Region::TubeMinus; }

void check_block_state(const State3& s) {
    const double ax = std::abs(s.p.x());
    const double ay = std::abs(s.p.y());
    if (ax > 1.0 + 1e-9 || ay > 1.0 + 1e-9 || s.p.z() < -1e-12 || s.p.z() > 1.0 + 1e-9)
        throw Error("state outside the linear block");
}

/// Closed-form block flow for time t (no face checks).
Vector3d block_advance(const GeometricLorenzParams& g, const Vector3d& p, double t) {
    return Vector3d(p.x() * std::exp(g.lambda1 * t), p.y() * std::exp(-g.lambda2 * t),
                    p.z() * std::exp(-g.lambda3 * t));
}

}  // namespace

const char* region_name(Region r) {
    switch (r) {
        case Region::LinearBlock: return "block";
        case Region::TubePlus: return "tube+";
        case Region::TubeMinus: return "tube-";
    }
    return "?";
}

State3 block_state(double x, double y, double z) { return State3{Region::LinearBlock, {x, y, z}, 0.0}; }
State3 block_state(const Vector3d& p) { return State3{Region::LinearBlock, p, 0.0}; }
State3 sigma_state(double x, double y) { return block_state(x, y, 1.0); }
State3 sigma_state(const CrossSectionPoint& q) { return sigma_state(q.x, q.y); }

Vector3d tube_landing(const GeometricLorenzParams& g, int side, const Vector3d& entry) {
    const double s = static_cast<double>(side);
    return Vector3d(s * (g.k * entry.z() - 1.0), s * g.c + g.b * entry.y(), 1.0);
}

Vector3d position(const GeometricLorenzParams& g, const State3& s) {
    if (s.region == Region::LinearBlock) return s.p;
    const double rho = s.clock / g.tau_tube;
    const Vector3d land = tube_landing(g, side_of(s.region), s.p);
    return (1.0 - rho) * s.p + rho * land;
}

Vector3d velocity(const GeometricLorenzParams& g, const State3& s) {
    if (s.region == Region::LinearBlock)
        return Vector3d(g.lambda1 * s.p.x(), -g.lambda2 * s.p.y(), -g.lambda3 * s.p.z());
    const Vector3d land = tube_landing(g, side_of(s.region), s.p);
    return (land - s.p) / g.tau_tube;
}

double time_to_exit(const GeometricLorenzParams& g, const State3& s) {
    if (s.region != Region::LinearBlock) throw Error("time_to_exit: state not in the linear block");
    const double ax = std::abs(s.p.x());
    if (ax == 0.0) throw OnStableManifoldError();
    return -std::log(ax) / g.lambda1;
}

State3 flow(const GeometricLorenzParams& g, State3 s, double t) {
    if (t >= 0.0) {
        double rem = t;
        while (rem > 0.0) {
            if (s.region == Region::LinearBlock) {
                check_block_state(s);
                if (s.p.x() == 0.0) {
                    s.p = block_advance(g, s.p, rem);
                    return s;
                }
                const double te = time_to_exit(g, s);
                if (rem <= te) {
                    s.p = block_advance(g, s.p, rem);
                    return s;
                }
                // Exit through |x| = 1 into the matching tube.
                const int side = s.p.x() > 0.0 ? +1 : -1;
                Vector3d exit = block_advance(g, s.p, te);
                exit.x() = static_cast<double>(side);  // land exactly on the face
                s = State3{tube_region(side), exit, 0.0};
                rem -= te;
            } else {
                const double room = g.tau_tube - s.clock;
                if (rem <= room) {
                    s.clock += rem;
                    return s;
                }
                rem -= room;
                s = block_state(tube_landing(g, side_of(s.region), s.p));
            }
        }
        return s;
    }

    double rem = -t;
    while (rem > 0.0) {
        if (s.region == Region::LinearBlock) {
            check_block_state(s);
            // Backward limits: |y| reaches 1 at ty, z reaches 1 (the entry
            // face Sigma) at tz; x only shrinks backward.
            const double ay = std::abs(s.p.y());
            const double ty = ay > 0.0 ? -std::log(ay) / g.lambda2 : kInf;
            const double tz = s.p.z() > 0.0 ? -std::log(s.p.z()) / g.lambda3 : kInf;
            const double tmax = std::min(ty, tz);
            if (rem <= tmax + 1e-12) {  // slack for exactly-on-face round-trips
                s.p = block_advance(g, s.p, -std::min(rem, tmax));
                return s;
            }
            throw BackwardThroughTubeError(
                tz <= ty ? "backward flow beyond the block entry face Sigma"
                         : "backward orbit leaves the model through |y| = 1");
        }
        if (s.clock >= rem) {
            s.clock -= rem;
            return s;
        }
        rem -= s.clock;
        s = block_state(s.p);  // tube entry point lies on the block exit face
    }
    return s;
}

Trajectory sample_orbit(const GeometricLorenzParams& g, const State3& s0, double t_max,
                        double dt) {
    if (!(dt > 0.0) || !(t_max > 0.0)) throw Error("sample_orbit: need dt > 0 and t_max > 0");
    Trajectory traj;
    State3 s = s0;
    double t_cur = 0.0;
    traj.samples.push_back({0.0, position(g, s), s.region});
    double next_grid = dt;
    const double eps_t = 1e-12 * std::max(1.0, t_max);

    while (t_cur < t_max - eps_t) {
        double dte;  // time to the next region event
        if (s.region == Region::LinearBlock) {
            dte = s.p.x() == 0.0 ? kInf : time_to_exit(g, s);
        } else {
            dte = g.tau_tube - s.clock;
        }
        const double t_event = t_cur + dte;
        const double t_stop = std::min(t_event, t_max);

        while (next_grid < t_stop - eps_t) {
            State3 mid = flow(g, s, next_grid - t_cur);
            traj.samples.push_back({next_grid, position(g, mid), mid.region});
            next_grid += dt;
        }

        if (t_event >= t_max - eps_t) {
            State3 fin = flow(g, s, t_max - t_cur);
            traj.samples.push_back({t_max, position(g, fin), fin.region});
            return traj;
        }

        // Cross into the next region exactly at the event time.
        if (s.region == Region::LinearBlock) {
            const int side = s.p.x() > 0.0 ? +1 : -1;
            Vector3d exit = block_advance(g, s.p, dte);
            exit.x() = static_cast<double>(side);
            s = State3{tube_region(side), exit, 0.0};
        } else {
            const Vector3d land = tube_landing(g, side_of(s.region), s.p);
            s = block_state(land);
            traj.crossings.push_back({t_event, land.x(), land.y()});
        }
        t_cur = t_event;
        traj.samples.push_back({t_cur, position(g, s), s.region});
        while (next_grid <= t_cur + eps_t) next_grid += dt;  // grid point swallowed by the event
    }
    return traj;
}

ReturnEvent first_return_flow(const GeometricLorenzParams& g, const CrossSectionPoint& q) {
    if (q.x == 0.0) throw DomainGammaError();
    const State3 s = sigma_state(q);
    const double te = time_to_exit(g, s);
    const int side = q.x > 0.0 ? +1 : -1;
    Vector3d exit = block_advance(g, s.p, te);
    exit.x() = static_cast<double>(side);
    const Vector3d land = tube_landing(g, side, exit);
    return ReturnEvent{CrossSectionPoint{land.x(), land.y()}, te + g.tau_tube};
}

bool in_trapping_region(const GeometricLorenzParams& g, const State3& s, double tol) {
    if (s.region == Region::LinearBlock) {
        return std::abs(s.p.x()) <= 1.0 + tol && std::abs(s.p.y()) <= 1.0 + tol &&
               s.p.z() >= -tol && s.p.z() <= 1.0 + tol;
    }
    return std::abs(std::abs(s.p.x()) - 1.0) <= tol && std::abs(s.p.y()) <= 1.0 + tol &&
           s.p.z() >= -tol && s.p.z() <= 1.0 + tol && s.clock >= -tol &&
           s.clock <= g.tau_tube + tol;
}

double max_speed(const GeometricLorenzParams& g) {
    const double block = Vector3d(g.lambda1, g.lambda2, g.lambda3).norm();
    // Longest possible tube chord: |dx| <= 2, |dy| <= |c| + 1 + b, |dz| <= 1.
    const double dy = std::abs(g.c) + 1.0 + g.b;
    const double tube = std::sqrt(4.0 + dy * dy + 1.0) / g.tau_tube;
    return std::max(block, tube);
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path);
    out << "t,x,y,z,region\n";
    char buf[160];
    for (const auto& s : traj.samples) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%s\n", s.t, s.pos.x(), s.pos.y(),
                      s.pos.z(), region_name(s.region));
        out << buf;
    }
}

void write_crossings_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path);
    out << "t,x,y\n";
    char buf[120];
    for (const auto& cr : traj.crossings) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", cr.t, cr.x, cr.y);
        out << buf;
    }
}

}  // namespace specflow
