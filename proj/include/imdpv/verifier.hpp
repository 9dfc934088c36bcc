#pragma once

#include "imdpv/imdp.hpp"
#include "imdpv/trajectory.hpp"

#include <map>
#include <string>
#include <vector>

namespace imdpv {

/**
 * safe U<=horizon target, or F<=horizon target. A safe label written
 * "!name" means "not labeled name".
 */
struct BoundedProperty {
    enum class Kind { until, eventually };

    Kind kind = Kind::eventually;
    std::string safe_label;
    std::string target_label;
    Index horizon = 1;
};

/// Value assigned to reached states that have no interval data.
enum class MissingData {
    pessimistic, // value 0
    uniform,     // every bin gets [0, 1]
};

struct VerifyOptions {
    MissingData missing_data = MissingData::pessimistic;
    bool record_policy = false;
    unsigned threads = 1;
};

/// Adversary choice at one state in the last iteration.
struct AdversaryChoice {
    Eigen::VectorXd distribution;
    /// Minimizing successor per estimate bin.
    std::vector<Index> successor;
};

struct VerificationResult {
    /// V_H over every state tile: lower bound on Pr^min from that tile.
    Eigen::VectorXd values;
    /// V_{H-1}, used for the bound at t = 0 with an unknown first estimate.
    Eigen::VectorXd previous_values;
    Index iterations_run = 0;
    /// Expanded states lacking interval data.
    std::vector<Index> states_without_data;
    std::map<Index, AdversaryChoice> worst_case_policy;
};

/**
 * min p . values over {lo <= p <= hi, sum p = 1}: bins sorted by value
 * (ties by index) receive lo, then the leftover mass is poured into the
 * cheapest bins up to hi. Throws NumericError when the set is empty.
 */
double worst_case_expectation(const Eigen::VectorXd& values, const Eigen::VectorXd& lo,
                              const Eigen::VectorXd& hi, Eigen::VectorXd* distribution = nullptr);

/// Target tiles of the property (sorted).
std::vector<Index> target_states(const Imdp& imdp, const BoundedProperty& property);
/// Tiles violating the safe label of an until property (sorted, excludes targets).
std::vector<Index> unsafe_states(const Imdp& imdp, const BoundedProperty& property);

VerificationResult robust_value_iteration(const Imdp& imdp, const BoundedProperty& property,
                                          const VerifyOptions& options = {});

/**
 * Bound from a state when the first estimate is unknown: the minimum over
 * estimate bins of the worst successor's V_{H-1}. Targets give 1, unsafe 0.
 */
double initial_lower_bound(const Imdp& imdp, const BoundedProperty& property,
                           const VerificationResult& result, Index state);

struct SweepRow {
    double alpha = 0.0;
    Index initial_tile = 0;
    double lower_bound = 0.0;
    double state_value = 0.0;
    Index iterations = 0;
    double wallclock_ms = 0.0;
};

/**
 * Rebuilds the interval function for each alpha from the same samples and
 * verifies on the fixed successor structure of `structure`.
 */
std::vector<SweepRow> sweep_alpha(const BinnedSamples& samples, const Imdp& structure,
                                  const std::vector<double>& alphas,
                                  const BoundedProperty& property,
                                  const std::vector<Index>& initial_tiles,
                                  const VerifyOptions& options = {});

} // namespace imdpv
