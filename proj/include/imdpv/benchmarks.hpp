#pragma once

#include "imdpv/imdp.hpp"
#include "imdpv/random.hpp"
#include "imdpv/trajectory.hpp"

#include <cstdint>
#include <string>

namespace imdpv {

/**
 * Waypoint following in [0, 12]^2: the agent steps gain * (estimated
 * waypoint - position), capped at step_cap, and hits a barricade at x >= 12
 * or y >= 12. The waypoint estimate is waypoint + bias + N(0, sigma^2(d) I).
 */
struct GoalReachEnv {
    Vector waypoint = Vector::Constant(2, 10.0);
    Vector start = Vector::Zero(2);
    double domain_lower = 0.0;
    double domain_upper = 12.0;
    double gain = 0.5;
    double step_cap = 0.7;
    double goal_radius = 2.0;
    Index horizon = 100;
    double sigma2_min = 0.5;
    double sigma2_max = 4.0;
    double d_min = 2.0;
    double d_max = 14.14;
    Vector bias = Vector::Zero(2);
    std::uint64_t seed = 0;

    void validate() const;
};

/// Affine noise law in the distance to the waypoint, clamped to [d_min, d_max].
double goal_noise_variance(const GoalReachEnv& env, double distance);

/// Capped proportional step towards the estimated waypoint.
Vector goal_reach_action(const GoalReachEnv& env, const Vector& position, const Vector& estimate);
Vector goal_reach_estimate(const GoalReachEnv& env, const Vector& position, Rng& rng);
/// Sound box of every step the controller can take over a tile pair.
BoxD goal_reach_step_enclosure(const GoalReachEnv& env, const BoxD& position_box,
                               const BoxD& estimate_box);
ControlLoop goal_reach_loop(const GoalReachEnv& env);

/// Outcome labels written to dataset metadata.
inline constexpr const char* kSuccess = "success";
inline constexpr const char* kCollision = "collision";
inline constexpr const char* kTimeout = "timeout";

/// Estimates record the estimated waypoint.
TrajectoryDataset simulate_goal_reach(const GoalReachEnv& env, Index num_trajectories,
                                      unsigned threads = 1);

/**
 * Classic control mountain car, state (x, v). The estimate is the clamped
 * position error x - xhat with xhat = x + bias + N(0, sigma^2); the policy
 * sees xhat = x - error and the true velocity.
 */
struct MountainCarEnv {
    double min_position = -1.2;
    double max_position = 0.6;
    double max_speed = 0.07;
    double force = 0.001;
    double gravity = 0.0025;
    double goal_x = 0.45;
    double sigma = 0.1;
    double bias = 0.0;
    double error_limit = 0.5;
    double start_low = -0.6;
    double start_high = -0.4;
    Index horizon = 200;
    std::uint64_t seed = 0;

    void validate() const;
};

/// One step of the reference dynamics for action a in {0, 1, 2}.
Vector mountain_car_dynamics(const MountainCarEnv& env, const Vector& state, int action);

/**
 * Energy pumping: push right (2) while moving right, left (0) while moving
 * left; at rest push away from the valley bottom.
 */
int energy_pumping_policy(const Vector& state, double perceived_x);

double mountain_car_error(const MountainCarEnv& env, double x, Rng& rng);
BoxD mountain_car_enclosure(const MountainCarEnv& env, const BoxD& state_box, const BoxD& error_box);
/// Loop over (state, error); `lipschitz` pads corner boxes for the cos(3x) term.
ControlLoop mountain_car_loop(const MountainCarEnv& env, const Vector& lipschitz, bool use_enclosure = true);

TrajectoryDataset simulate_mountain_car(const MountainCarEnv& env, Index num_trajectories,
                                        unsigned threads = 1);

/// samples_per_tile one-step records at every tile center of `grid` (tile order).
TrajectoryDataset collect_per_tile(const GoalReachEnv& env, const Grid& grid, Index samples_per_tile);
TrajectoryDataset collect_per_tile(const MountainCarEnv& env, const Grid& grid, Index samples_per_tile);

} // namespace imdpv
