#pragma once

#include "imdpv/confint.hpp"
#include "imdpv/trajectory.hpp"

#include <cstdint>
#include <filesystem>
#include <map>

namespace imdpv {

/// Dirichlet posterior concentrations per state tile.
struct PosteriorParams {
    std::map<Index, Eigen::VectorXd> concentrations;
};

/// prior + counts, elementwise.
Eigen::VectorXd dirichlet_update(const Eigen::VectorXd& prior, const Eigen::VectorXi& counts);

/**
 * Fraction of num_samples Dirichlet(concentrations) draws whose every
 * component lies in [lo, hi]. Draws are normalized unit Gamma variates from
 * the stream Rng(seed, stream).
 */
double mc_conformance(const Eigen::VectorXd& concentrations, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& hi, Index num_samples, std::uint64_t seed,
                      std::uint64_t stream = 0);

struct ValidateOptions {
    double prior_value = 1.0;
    Index num_samples = 10000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct ConformanceReport {
    /// 1 - gamma per state tile with validation data.
    std::map<Index, double> per_state_confidence;
    /// Median over states with data.
    double aggregate_confidence = 0.0;
    double min_confidence = 0.0;
    double mean_confidence = 0.0;
    Index num_samples = 0;
    std::uint64_t seed = 0;
    double prior_value = 1.0;
    Index states_with_data = 0;
    /// States seen in the data but absent from Delta (scored 0).
    Index states_missing_from_delta = 0;
    /// States in Delta without validation data (excluded).
    Index states_without_data = 0;
    Index clamped_steps = 0;
    PosteriorParams posterior;
};

/// Median of a nonempty sample; mean of the two middle values for even sizes.
double median(std::vector<double> values);

ConformanceReport validate(const IntervalTransitionFunction& delta, const Grid& state_grid,
                           const Grid& estimate_grid, const TrajectoryDataset& dataset,
                           const ValidateOptions& options = {});

} // namespace imdpv
