#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "specflow/specification.hpp"

namespace specflow {

/// Hyperbolic toral automorphism [[2,1],[1,1]] on the 2-torus: the positive
/// control where the gluing search must succeed.
struct TorusCatSystem {
    Eigen::Matrix2d m;
    double lambda_u = 0.0;  // (3 + sqrt 5) / 2

    TorusCatSystem();
    Eigen::Vector2d step(const Eigen::Vector2d& x) const;
    Eigen::Vector2d iterate(Eigen::Vector2d x, int n) const;
};

/// Distance on the torus (both coordinates mod 1).
double torus_dist(const Eigen::Vector2d& a, const Eigen::Vector2d& b);

struct CatSegment {
    Eigen::Vector2d start;
    int t_begin = 0;
    int t_end = 0;  // inclusive integer ticks
};

struct CatInstance {
    CatSegment s1, s2;
    double eps = 0.0;
};

/// Two random segments of the given length separated by gap T (the
/// specification transition time), drawn from the seeded engine.
CatInstance random_cat_instance(const TorusCatSystem& sys, std::uint64_t seed, double eps,
                                int seg_len, int gap_T);

struct CatBowenResult {
    bool inside = false;
    double max_deviation = 0.0;
    int escape_step = -1;  // first tick with deviation > eps, -1 if none
};

CatBowenResult cat_in_bowen_ball(const TorusCatSystem& sys, const Eigen::Vector2d& x,
                                 const Eigen::Vector2d& ref, int n_steps, double eps);

struct CatSearchResult {
    bool witness_found = false;
    Eigen::Vector2d witness = Eigen::Vector2d::Zero();
    double witness_deviation = 0.0;
    double best_deviation = 0.0;
    long long cells_visited = 0;
    int depth_used = 0;
};

/// Exhaustive gluing search on the grid_n^2 torus grid with certified
/// Lipschitz rejection (||M^t|| = lambda_u^t), descending into surviving
/// cells until a witness is verified or every cell is excluded at the
/// stated resolution. Deterministic: cells are explored in row-major order,
/// best-deviation-first within a level.
CatSearchResult search_gluing_cat(const TorusCatSystem& sys, const CatInstance& inst, int grid_n,
                                  int max_depth = 48);

json cat_control_report(std::uint64_t seed, int n_instances, double eps, int seg_len, int grid_n);

}  // namespace specflow
