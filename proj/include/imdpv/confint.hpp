#pragma once

#include "imdpv/grid.hpp"
#include "imdpv/trajectory.hpp"

#include <filesystem>
#include <map>
#include <vector>

namespace imdpv {

/// Closed interval [lo, hi] with 0 <= lo <= hi <= 1.
struct ProbabilityInterval {
    double lo = 0.0;
    double hi = 1.0;

    bool contains(double p) const { return p >= lo && p <= hi; }
};

/// Intervals of one abstract state, indexed by flat estimate bin.
struct IntervalRow {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
    /// Binomial trials: samples observed at the state.
    Index trials = 0;

    Index size() const { return lo.size(); }
    ProbabilityInterval operator[](Index e) const { return {lo[e], hi[e]}; }
    bool feasible(double tol = 1e-12) const {
        return lo.sum() <= 1.0 + tol && hi.sum() >= 1.0 - tol;
    }
};

/// Interval probability transition function Delta, one row per observed state tile.
struct IntervalTransitionFunction {
    double alpha = 0.05;
    Grid state_grid;
    Grid estimate_grid;
    std::map<Index, IntervalRow> rows;
    /// Rows whose intervals had to be widened to make them feasible.
    Index repairs = 0;
    /// Observed states with fewer samples than the configured minimum.
    std::vector<Index> undersampled_states;

    Index num_estimate_bins() const { return estimate_grid.num_tiles(); }
    const IntervalRow* find(Index state) const {
        auto it = rows.find(state);
        return it == rows.end() ? nullptr : &it->second;
    }
};

/**
 * Clopper-Pearson interval for `successes` out of `trials` at the
 * Bonferroni-corrected level alpha / (2 num_bins) per side:
 * lo = BetaInv(alpha/(2N); k, n-k+1) (0 when k = 0),
 * hi = BetaInv(1-alpha/(2N); k+1, n-k) (1 when k = n).
 */
ProbabilityInterval clopper_pearson(Index successes, Index trials, double alpha, Index num_bins);

/**
 * Widens an infeasible row in place: hi values are scaled up (capped at 1)
 * until they sum to at least 1, lo values scaled down until they sum to at
 * most 1. Returns true if anything changed.
 */
bool repair_feasibility(IntervalRow& row);

struct ConfIntOptions {
    Index min_samples = 10;
    unsigned threads = 1;
};

/**
 * Builds Delta from binned samples: for every observed state, one
 * Clopper-Pearson interval per estimate bin (unobserved bins get the
 * zero-successes interval) with trials = samples at the state and
 * num_bins = all bins of the estimate grid.
 */
IntervalTransitionFunction conf_int(const BinnedSamples& samples, const Grid& state_grid,
                                    const Grid& estimate_grid, double alpha,
                                    const ConfIntOptions& options = {});

IntervalTransitionFunction conf_int(const TrajectoryDataset& dataset, const Grid& state_grid,
                                    const Grid& estimate_grid, double alpha,
                                    const ConfIntOptions& options = {});

/// JSON-lines: a {"delta": {...}} header, then one {"s", "e", "lo", "hi"} line per entry.
void save_delta(const IntervalTransitionFunction& delta, const std::filesystem::path& path);
IntervalTransitionFunction load_delta(const std::filesystem::path& path);

} // namespace imdpv
