#pragma once

#include "imdpv/grid.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace imdpv {

/// One (true state, estimate) sample of an execution.
struct TrajectoryStep {
    Index time_index = 0;
    Vector state;
    /// Value in the benchmark's estimate space (estimated waypoint, position error, ...).
    Vector estimate;
};

using Trajectory = std::vector<TrajectoryStep>;

struct DatasetMetadata {
    std::string environment;
    std::uint64_t seed = 0;
    /// Generation parameters, echoed verbatim into the header line.
    nlohmann::json parameters = nlohmann::json::object();
    /// Per-trajectory outcome ("success", "collision", "timeout"), may be empty.
    std::vector<std::string> outcomes;
};

/**
 * Executions D^train / D^val. Invariants (checked by validate()): every
 * trajectory is nonempty, time indices run 0, 1, 2, ..., and all states and
 * all estimates share one dimension each.
 */
struct TrajectoryDataset {
    std::vector<Trajectory> trajectories;
    DatasetMetadata metadata;

    std::size_t num_steps() const;
    Index state_dims() const;
    Index estimate_dims() const;

    /// Throws InputError on any invariant violation or non-finite value.
    void validate() const;
};

bool operator==(const TrajectoryStep& a, const TrajectoryStep& b);
bool operator==(const TrajectoryDataset& a, const TrajectoryDataset& b);

/**
 * Reads the JSON-lines format: an optional header {"meta": {...}} on line 1,
 * then one step per line {"traj": int, "t": int, "s": [..], "shat": [..]}.
 * Steps of a trajectory are contiguous; trajectory ids are 0, 1, 2, ...
 * Errors name the offending line.
 */
TrajectoryDataset load_dataset(const std::filesystem::path& path);

/// Writes the format read by load_dataset. Rejects non-finite values and empty trajectories.
void save_dataset(const TrajectoryDataset& dataset, const std::filesystem::path& path);

/// Estimate-bin samples grouped by state tile (flat indices), multiplicity preserved.
struct BinnedSamples {
    std::map<Index, std::vector<Index>> by_state;
    Index num_estimate_bins = 0;
    /// Steps whose state or estimate fell outside its grid and was clamped.
    Index clamped_states = 0;
    Index clamped_estimates = 0;

    std::size_t total() const;
    /// Occurrence count per estimate bin at one state.
    Eigen::VectorXi counts(Index state) const;
};

BinnedSamples bin_dataset(const TrajectoryDataset& dataset, const Grid& state_grid,
                          const Grid& estimate_grid);

} // namespace imdpv
