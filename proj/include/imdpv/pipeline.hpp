#pragma once

#include "imdpv/benchmarks.hpp"
#include "imdpv/config.hpp"
#include "imdpv/imdp.hpp"
#include "imdpv/validator.hpp"
#include "imdpv/verifier.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace imdpv {

enum class Benchmark { goal_reach, mountain_car };

/// Settings shared by every command, resolved from a Config.
struct Experiment {
    Benchmark benchmark = Benchmark::goal_reach;
    Grid state_grid;
    Grid estimate_grid;
    double alpha = 0.05;
    ConfIntOptions confint;
    BoundedProperty property;
    std::vector<Predicate> predicates;
    /// Positions reported by verify (also the roots of the forward closure).
    std::vector<Vector> initial_points;
    /// Build successors only for tiles reachable from the initial points.
    bool forward_closure = true;
    bool unbounded_estimate_edges = true;
    Vector lipschitz;
    bool use_enclosure = true;
    /// Sub-boxes per dimension when computing successors.
    Index refine = 1;
    VerifyOptions verify;
    ValidateOptions validate;
    unsigned threads = 1;
    bool timing = false;
    std::filesystem::path output_dir = ".";
};

Experiment load_experiment(const Config& cfg);

/// Environment from [environment], overlaid by keys of `overlay` (e.g. "train", "validation").
GoalReachEnv goal_reach_env(const Config& cfg, const std::string& overlay);
MountainCarEnv mountain_car_env(const Config& cfg, const std::string& overlay);

/// Parses "box <lower..> <upper..> <over|under>" or "ball <center..> <radius> <over|under>".
Predicate parse_predicate(const std::string& name, const std::string& spec, Index dims);

ControlLoop control_loop(const Config& cfg, const Experiment& exp);

/// [train]: mode = per_tile | trajectories.
TrajectoryDataset training_data(const Config& cfg, const Experiment& exp);
/// Trajectories from the [validation] environment; optional bias distance and seed overrides.
TrajectoryDataset validation_data(const Config& cfg, const Experiment& exp,
                                  std::optional<double> bias_distance = {},
                                  std::optional<std::uint64_t> seed = {});

std::vector<Index> initial_tiles(const Experiment& exp);

/// Successors and labels, without interval data.
Imdp build_structure(const Experiment& exp, const ControlLoop& loop, DynStructReport* report = nullptr);

struct TransitionAudit {
    Index transitions = 0;
    Index contained = 0;
    /// Mean over visited (state, estimate) pairs of |observed successors| / |abstract successors|.
    double jaccard = 0.0;
    Index pairs = 0;
};

/// Checks every consecutive pair of steps against the successor sets.
TransitionAudit audit_transitions(const Imdp& imdp, const TrajectoryDataset& data);

struct ShiftRow {
    std::string label;
    double distance = 0.0;
    std::uint64_t seed = 0;
    Index trajectories = 0;
    double success_rate = 0.0;
    ProbabilityInterval success_ci;
    double conformance = 0.0;
};

/// Validation runs for the ID seeds and OOD distances of [shift].
std::vector<ShiftRow> shift_table(const Config& cfg, const Experiment& exp,
                                  const IntervalTransitionFunction& delta);

struct AlphaRow {
    double alpha = 0.0;
    Index initial_tile = 0;
    double lower_bound = 0.0;
    double conformance = 0.0;
    Index iterations = 0;
    double wallclock_ms = 0.0;
};

/// One row per alpha: minimum bound over the initial tiles and the median conformance.
std::vector<AlphaRow> alpha_tradeoff(const Experiment& exp, const Imdp& structure,
                                     const BinnedSamples& train, const TrajectoryDataset& validation,
                                     const std::vector<double>& alphas);

struct GranularityRow {
    double tile_size = 0.0;
    Index tiles = 0;
    double lower_bound = 0.0;
    double conformance = 0.0;
    double checking_ms = 0.0;
};

std::vector<GranularityRow> granularity_sweep(const Config& cfg, const std::vector<double>& sizes);

/// CLI commands; each returns the files it wrote.
struct CommandOptions {
    std::filesystem::path data;
    std::filesystem::path delta;
    std::filesystem::path imdp;
    std::filesystem::path out;
    std::string which;
};

std::vector<std::filesystem::path> cmd_simulate(const Config& cfg, const CommandOptions& opt);
std::vector<std::filesystem::path> cmd_abstract(const Config& cfg, const CommandOptions& opt);
std::vector<std::filesystem::path> cmd_verify(const Config& cfg, const CommandOptions& opt);
std::vector<std::filesystem::path> cmd_validate(const Config& cfg, const CommandOptions& opt);
std::vector<std::filesystem::path> cmd_sweep(const Config& cfg, const CommandOptions& opt);
std::vector<std::filesystem::path> cmd_export(const Config& cfg, const CommandOptions& opt);

} // namespace imdpv
