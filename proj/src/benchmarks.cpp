#include "imdpv/benchmarks.hpp"

#include "imdpv/json_io.hpp"
#include "imdpv/parallel.hpp"

#include <cmath>
#include <numbers>

namespace imdpv {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
// valley bottom of sin(3x)
constexpr double kValley = -kPi / 6.0;

double wrap(double a) {
    while (a > kPi)
        a -= 2.0 * kPi;
    while (a <= -kPi)
        a += 2.0 * kPi;
    return a;
}

BoxD arc_box(double radius, double from, double to) {
    Vector lo(2), hi(2);
    lo << radius * std::cos(from), radius * std::sin(from);
    hi = lo;
    auto add = [&](double a) {
        Vector p(2);
        p << radius * std::cos(a), radius * std::sin(a);
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    };
    add(to);
    for (int k = -8; k <= 8; ++k) {
        const double axis = k * kPi / 2.0;
        if (axis > from && axis < to)
            add(axis);
    }
    return {lo, hi};
}

// exact range of cos(3x) over [a, b]
std::pair<double, double> cos3_range(double a, double b) {
    double lo = std::min(std::cos(3.0 * a), std::cos(3.0 * b));
    double hi = std::max(std::cos(3.0 * a), std::cos(3.0 * b));
    for (long k = long(std::ceil(3.0 * a / kPi)); k * kPi <= 3.0 * b; ++k) {
        if (k % 2 == 0)
            hi = 1.0;
        else
            lo = -1.0;
    }
    return {lo, hi};
}

json vector_param(const Vector& v) { return to_json(v); }

} // namespace

void GoalReachEnv::validate() const {
    if (waypoint.size() != 2 || start.size() != 2 || bias.size() != 2)
        throw ConfigError("goal-reaching waypoint, start and bias must be 2-D");
    if (!(sigma2_min >= 0.0) || !(sigma2_min <= sigma2_max))
        throw ConfigError("goal-reaching noise needs 0 <= sigma2_min <= sigma2_max");
    if (horizon < 1)
        throw ConfigError("goal-reaching horizon must be at least 1");
    if (!(gain > 0.0) || !(step_cap > 0.0) || !(goal_radius >= 0.0) || !(d_min < d_max))
        throw ConfigError("invalid goal-reaching controller or noise constants");
}

double goal_noise_variance(const GoalReachEnv& env, double distance) {
    if (!(distance >= 0.0))
        throw InputError("distance must be nonnegative");
    const double d = std::clamp(distance, env.d_min, env.d_max);
    return (d - env.d_min) * (env.sigma2_max - env.sigma2_min) / (env.d_max - env.d_min) +
           env.sigma2_min;
}

Vector goal_reach_action(const GoalReachEnv& env, const Vector& position, const Vector& estimate) {
    Vector step = env.gain * (estimate - position);
    const double n = step.norm();
    if (n > env.step_cap)
        step *= env.step_cap / n;
    return step;
}

Vector goal_reach_estimate(const GoalReachEnv& env, const Vector& position, Rng& rng) {
    const double sd = std::sqrt(goal_noise_variance(env, (position - env.waypoint).norm()));
    Vector e = env.waypoint + env.bias;
    for (Index d = 0; d < e.size(); ++d)
        e[d] += sd * rng.normal();
    return e;
}

BoxD goal_reach_step_enclosure(const GoalReachEnv& env, const BoxD& position_box,
                               const BoxD& estimate_box) {
    // the step is gain * V shrunk towards 0, V = estimate - position
    const Vector vlo = estimate_box.min_corner - position_box.max_corner;
    const Vector vhi = estimate_box.max_corner - position_box.min_corner;
    const double cap = env.step_cap;
    const Vector cap_lo = Vector::Constant(2, -cap);
    const Vector cap_hi = Vector::Constant(2, cap);
    const bool has_origin = (vlo.array() <= 0.0).all() && (vhi.array() >= 0.0).all();
    if (has_origin) {
        return {(env.gain * vlo).cwiseMax(cap_lo).cwiseMin(Vector::Zero(2)),
                (env.gain * vhi).cwiseMin(cap_hi).cwiseMax(Vector::Zero(2))};
    }
    Vector nearest = Vector::Zero(2).cwiseMax(vlo).cwiseMin(vhi);
    const bool linear_part = env.gain * nearest.norm() <= cap;

    const Vector center = (vlo + vhi) / 2.0;
    const double phi = std::atan2(center[1], center[0]);
    double from = kPi, to = -kPi;
    for (int c = 0; c < 4; ++c) {
        const double x = c & 1 ? vhi[0] : vlo[0];
        const double y = c & 2 ? vhi[1] : vlo[1];
        const double d = wrap(std::atan2(y, x) - phi);
        from = std::min(from, d);
        to = std::max(to, d);
    }
    BoxD box = arc_box(cap, phi + from, phi + to);
    if (linear_part)
        box = box.hull(BoxD{(env.gain * vlo).cwiseMax(cap_lo), (env.gain * vhi).cwiseMin(cap_hi)});
    box.min_corner.array() -= 1e-12;
    box.max_corner.array() += 1e-12;
    return box;
}

ControlLoop goal_reach_loop(const GoalReachEnv& env) {
    ControlLoop loop;
    loop.policy = [env](const Vector& s, const Vector& e) { return goal_reach_action(env, s, e); };
    loop.dynamics = [](const Vector& s, const Vector& u) -> Vector { return s + u; };
    loop.displacement_enclosure = [env](const BoxD& sbox, const BoxD& ebox) -> std::optional<BoxD> {
        return goal_reach_step_enclosure(env, sbox, ebox);
    };
    return loop;
}

TrajectoryDataset simulate_goal_reach(const GoalReachEnv& env, Index num_trajectories,
                                      unsigned threads) {
    env.validate();
    if (num_trajectories < 0)
        throw ConfigError("number of trajectories must be nonnegative");
    TrajectoryDataset ds;
    ds.trajectories.resize(std::size_t(num_trajectories));
    ds.metadata.outcomes.resize(std::size_t(num_trajectories));
    parallel_for(num_trajectories, threads, [&](Index k) {
        Rng rng(env.seed, std::uint64_t(k));
        Trajectory& traj = ds.trajectories[std::size_t(k)];
        std::string outcome = kTimeout;
        Vector s = env.start;
        for (Index t = 0;; ++t) {
            traj.push_back({t, s, goal_reach_estimate(env, s, rng)});
            if ((s - env.waypoint).norm() <= env.goal_radius) {
                outcome = kSuccess;
                break;
            }
            if (t == env.horizon)
                break;
            s = s + goal_reach_action(env, s, traj.back().estimate);
            if ((s.array() >= env.domain_upper).any()) {
                traj.push_back({t + 1, s, goal_reach_estimate(env, s, rng)});
                outcome = kCollision;
                break;
            }
        }
        ds.metadata.outcomes[std::size_t(k)] = outcome;
    });
    ds.metadata.environment = "goal_reach";
    ds.metadata.seed = env.seed;
    ds.metadata.parameters = {{"waypoint", vector_param(env.waypoint)},
                              {"start", vector_param(env.start)},
                              {"gain", env.gain},
                              {"step_cap", env.step_cap},
                              {"goal_radius", env.goal_radius},
                              {"horizon", env.horizon},
                              {"sigma2_min", env.sigma2_min},
                              {"sigma2_max", env.sigma2_max},
                              {"bias", vector_param(env.bias)},
                              {"num_trajectories", num_trajectories}};
    return ds;
}

void MountainCarEnv::validate() const {
    if (!(sigma >= 0.0))
        throw ConfigError("mountain-car sigma must be nonnegative");
    if (horizon < 1)
        throw ConfigError("mountain-car horizon must be at least 1");
    if (!(start_low <= start_high) || !(min_position < max_position) || !(error_limit > 0.0))
        throw ConfigError("invalid mountain-car bounds");
}

Vector mountain_car_dynamics(const MountainCarEnv& env, const Vector& state, int action) {
    double x = state[0];
    double v = state[1];
    v += (action - 1) * env.force + std::cos(3.0 * x) * (-env.gravity);
    v = std::clamp(v, -env.max_speed, env.max_speed);
    x += v;
    x = std::clamp(x, env.min_position, env.max_position);
    if (x == env.min_position && v < 0.0)
        v = 0.0;
    Vector next(2);
    next << x, v;
    return next;
}

int energy_pumping_policy(const Vector& state, double perceived_x) {
    const double v = state[1];
    if (v > 0.0 || (v == 0.0 && perceived_x < kValley))
        return 2;
    return 0;
}

double mountain_car_error(const MountainCarEnv& env, double x, Rng& rng) {
    const double xhat = x + env.bias + env.sigma * rng.normal();
    return std::clamp(x - xhat, -env.error_limit, env.error_limit);
}

BoxD mountain_car_enclosure(const MountainCarEnv& env, const BoxD& sbox, const BoxD& ebox) {
    const double xl = sbox.min_corner[0], xh = sbox.max_corner[0];
    const double vl = sbox.min_corner[1], vh = sbox.max_corner[1];
    const double px_lo = xl - ebox.max_corner[0];
    const double px_hi = xh - ebox.min_corner[0];
    const bool rest = vl <= 0.0 && vh >= 0.0;
    const bool right = vh > 0.0 || (rest && px_lo < kValley);
    const bool left = vl < 0.0 || (rest && px_hi >= kValley);
    const double f_lo = left ? -env.force : env.force;
    const double f_hi = right ? env.force : -env.force;
    const auto [c_lo, c_hi] = cos3_range(xl, xh);
    const double a_lo = f_lo - env.gravity * c_hi;
    const double a_hi = f_hi - env.gravity * c_lo;

    const double m = env.max_speed;
    double dv_lo = std::clamp(a_lo, -m - vh, m - vh);
    double dv_hi = std::clamp(a_hi, -m - vl, m - vl);
    const double nv_lo = std::clamp(vl + a_lo, -m, m);
    const double nv_hi = std::clamp(vh + a_hi, -m, m);
    const double dx_lo = std::clamp(nv_lo, env.min_position - xh, env.max_position - xh);
    const double dx_hi = std::clamp(nv_hi, env.min_position - xl, env.max_position - xl);
    if (xl + nv_lo <= env.min_position && nv_lo < 0.0) {
        // inelastic stop at the left wall
        dv_lo = std::min(dv_lo, -vh);
        dv_hi = std::max(dv_hi, -vl);
    }
    Vector lo(2), hi(2);
    lo << dx_lo, dv_lo;
    hi << dx_hi, dv_hi;
    lo.array() -= 1e-12;
    hi.array() += 1e-12;
    return {lo, hi};
}

ControlLoop mountain_car_loop(const MountainCarEnv& env, const Vector& lipschitz, bool use_enclosure) {
    ControlLoop loop;
    loop.policy = [](const Vector& s, const Vector& e) {
        Vector a(1);
        a << double(energy_pumping_policy(s, s[0] - e[0]));
        return a;
    };
    loop.dynamics = [env](const Vector& s, const Vector& a) {
        return mountain_car_dynamics(env, s, int(a[0]));
    };
    loop.lipschitz = lipschitz;
    if (use_enclosure)
        loop.displacement_enclosure = [env](const BoxD& sbox, const BoxD& ebox) -> std::optional<BoxD> {
            return mountain_car_enclosure(env, sbox, ebox);
        };
    return loop;
}

TrajectoryDataset simulate_mountain_car(const MountainCarEnv& env, Index num_trajectories,
                                        unsigned threads) {
    env.validate();
    if (num_trajectories < 0)
        throw ConfigError("number of trajectories must be nonnegative");
    TrajectoryDataset ds;
    ds.trajectories.resize(std::size_t(num_trajectories));
    ds.metadata.outcomes.resize(std::size_t(num_trajectories));
    parallel_for(num_trajectories, threads, [&](Index k) {
        Rng rng(env.seed, std::uint64_t(k));
        Trajectory& traj = ds.trajectories[std::size_t(k)];
        Vector s(2);
        s << rng.uniform(env.start_low, env.start_high), 0.0;
        std::string outcome = kTimeout;
        for (Index t = 0;; ++t) {
            Vector e(1);
            e << mountain_car_error(env, s[0], rng);
            traj.push_back({t, s, e});
            if (s[0] >= env.goal_x) {
                outcome = kSuccess;
                break;
            }
            if (t == env.horizon)
                break;
            s = mountain_car_dynamics(env, s, energy_pumping_policy(s, s[0] - e[0]));
        }
        ds.metadata.outcomes[std::size_t(k)] = outcome;
    });
    ds.metadata.environment = "mountain_car";
    ds.metadata.seed = env.seed;
    ds.metadata.parameters = {{"sigma", env.sigma},
                              {"bias", env.bias},
                              {"horizon", env.horizon},
                              {"goal_x", env.goal_x},
                              {"start", {env.start_low, env.start_high}},
                              {"num_trajectories", num_trajectories}};
    return ds;
}

namespace {

template <typename Sample>
TrajectoryDataset per_tile(const Grid& grid, Index samples_per_tile, std::uint64_t seed,
                           Sample&& sample) {
    if (samples_per_tile < 0)
        throw ConfigError("samples per tile must be nonnegative");
    TrajectoryDataset ds;
    const Index n = grid.num_tiles();
    ds.trajectories.resize(std::size_t(n * samples_per_tile));
    parallel_for(n, 1, [&](Index s) {
        Rng rng(seed, std::uint64_t(s));
        const Vector c = concretize(s, grid).center();
        for (Index j = 0; j < samples_per_tile; ++j)
            ds.trajectories[std::size_t(s * samples_per_tile + j)] = {{0, c, sample(c, rng)}};
    });
    ds.metadata.seed = seed;
    ds.metadata.parameters = {{"samples_per_tile", samples_per_tile},
                              {"grid", to_json(grid)}};
    return ds;
}

} // namespace

TrajectoryDataset collect_per_tile(const GoalReachEnv& env, const Grid& grid, Index samples_per_tile) {
    env.validate();
    TrajectoryDataset ds = per_tile(grid, samples_per_tile, env.seed, [&](const Vector& c, Rng& rng) {
        return goal_reach_estimate(env, c, rng);
    });
    ds.metadata.environment = "goal_reach";
    ds.metadata.parameters["sigma2_min"] = env.sigma2_min;
    ds.metadata.parameters["sigma2_max"] = env.sigma2_max;
    ds.metadata.parameters["bias"] = vector_param(env.bias);
    return ds;
}

TrajectoryDataset collect_per_tile(const MountainCarEnv& env, const Grid& grid, Index samples_per_tile) {
    env.validate();
    TrajectoryDataset ds = per_tile(grid, samples_per_tile, env.seed, [&](const Vector& c, Rng& rng) {
        Vector e(1);
        e << mountain_car_error(env, c[0], rng);
        return e;
    });
    ds.metadata.environment = "mountain_car";
    ds.metadata.parameters["sigma"] = env.sigma;
    ds.metadata.parameters["bias"] = env.bias;
    return ds;
}

} // namespace imdpv
