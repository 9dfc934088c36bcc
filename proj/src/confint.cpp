#include "imdpv/confint.hpp"

#include "imdpv/beta.hpp"
#include "imdpv/json_io.hpp"
#include "imdpv/parallel.hpp"

#include <cmath>
#include <fstream>

namespace imdpv {

using nlohmann::json;

ProbabilityInterval clopper_pearson(Index successes, Index trials, double alpha, Index num_bins) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InputError("alpha must lie in (0, 1)");
    if (trials <= 0 || successes < 0 || successes > trials)
        throw InputError("Clopper-Pearson needs 0 <= successes <= trials and trials > 0");
    if (num_bins <= 0)
        throw InputError("number of bins must be positive");
    const double tail = alpha / (2.0 * double(num_bins));
    const double k = double(successes);
    const double n = double(trials);
    ProbabilityInterval ci;
    ci.lo = successes == 0 ? 0.0 : inverse_regularized_incomplete_beta(tail, k, n - k + 1.0);
    ci.hi = successes == trials ? 1.0
                                : inverse_regularized_incomplete_beta(1.0 - tail, k + 1.0, n - k);
    return ci;
}

bool repair_feasibility(IntervalRow& row) {
    bool changed = false;
    for (int pass = 0; pass < 64 && row.hi.sum() < 1.0; ++pass) {
        const double s = row.hi.sum();
        if (s <= 0.0) {
            row.hi.setConstant(1.0);
        } else {
            row.hi = (row.hi * (1.0 / s)).cwiseMin(1.0);
        }
        changed = true;
    }
    if (row.hi.sum() < 1.0) {
        row.hi.setConstant(1.0);
        changed = true;
    }
    if (row.lo.sum() > 1.0) {
        row.lo *= 1.0 / row.lo.sum();
        row.lo = row.lo.cwiseMax(0.0).cwiseMin(row.hi);
        changed = true;
    }
    return changed;
}

IntervalTransitionFunction conf_int(const BinnedSamples& samples, const Grid& state_grid,
                                    const Grid& estimate_grid, double alpha,
                                    const ConfIntOptions& options) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InputError("alpha must lie in (0, 1)");
    if (samples.total() == 0)
        throw InputError("no observations: cannot build interval transition function");
    if (samples.num_estimate_bins != estimate_grid.num_tiles())
        throw InputError("binned samples do not match the estimate grid");

    const Index num_bins = estimate_grid.num_tiles();
    std::vector<Index> states;
    states.reserve(samples.by_state.size());
    for (const auto& [s, v] : samples.by_state)
        states.push_back(s);

    std::vector<IntervalRow> rows(states.size());
    std::vector<char> repaired(states.size(), 0);
    parallel_for(Index(states.size()), options.threads, [&](Index i) {
        const Eigen::VectorXi counts = samples.counts(states[i]);
        const Index trials = counts.sum();
        IntervalRow row;
        row.trials = trials;
        row.lo.resize(num_bins);
        row.hi.resize(num_bins);
        // every unobserved bin shares the zero-successes interval
        const ProbabilityInterval empty = clopper_pearson(0, trials, alpha, num_bins);
        for (Index e = 0; e < num_bins; ++e) {
            const ProbabilityInterval ci =
                counts[e] == 0 ? empty : clopper_pearson(counts[e], trials, alpha, num_bins);
            row.lo[e] = ci.lo;
            row.hi[e] = ci.hi;
        }
        repaired[i] = repair_feasibility(row);
        rows[i] = std::move(row);
    });

    IntervalTransitionFunction delta;
    delta.alpha = alpha;
    delta.state_grid = state_grid;
    delta.estimate_grid = estimate_grid;
    for (std::size_t i = 0; i < states.size(); ++i) {
        delta.repairs += repaired[i];
        if (rows[i].trials < options.min_samples)
            delta.undersampled_states.push_back(states[i]);
        delta.rows.emplace(states[i], std::move(rows[i]));
    }
    return delta;
}

IntervalTransitionFunction conf_int(const TrajectoryDataset& dataset, const Grid& state_grid,
                                    const Grid& estimate_grid, double alpha,
                                    const ConfIntOptions& options) {
    if (dataset.num_steps() == 0)
        throw InputError("no observations: dataset is empty");
    if (dataset.state_dims() != state_grid.dims() ||
        dataset.estimate_dims() != estimate_grid.dims())
        throw InputError("dataset dimensions do not match the grids");
    return conf_int(bin_dataset(dataset, state_grid, estimate_grid), state_grid, estimate_grid,
                    alpha, options);
}

void save_delta(const IntervalTransitionFunction& delta, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw InputError("cannot write " + path.string());
    json header = {{"alpha", delta.alpha},
                   {"state_grid", to_json(delta.state_grid)},
                   {"estimate_grid", to_json(delta.estimate_grid)},
                   {"num_estimate_bins", delta.num_estimate_bins()},
                   {"num_states", delta.rows.size()},
                   {"repairs", delta.repairs},
                   {"undersampled_states", delta.undersampled_states}};
    out << json{{"delta", header}}.dump() << '\n';
    for (const auto& [s, row] : delta.rows)
        for (Index e = 0; e < row.size(); ++e)
            out << json{{"s", s}, {"e", e}, {"n", row.trials}, {"lo", row.lo[e]}, {"hi", row.hi[e]}}
                       .dump()
                << '\n';
    if (!out)
        throw InputError("write failed for " + path.string());
}

IntervalTransitionFunction load_delta(const std::filesystem::path& path) {
    const auto lines = read_json_lines(path);
    if (lines.empty() || !lines.front().contains("delta"))
        throw InputError(path.string() + ": missing {\"delta\": ...} header");
    const json& h = lines.front()["delta"];
    IntervalTransitionFunction delta;
    delta.alpha = h.at("alpha").get<double>();
    delta.state_grid = grid_from_json(h.at("state_grid"), path.string());
    delta.estimate_grid = grid_from_json(h.at("estimate_grid"), path.string());
    delta.repairs = h.value("repairs", Index{0});
    if (h.contains("undersampled_states"))
        delta.undersampled_states = h["undersampled_states"].get<std::vector<Index>>();
    const Index num_bins = delta.num_estimate_bins();
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const json& j = lines[i];
        const std::string where = path.string() + ": entry " + std::to_string(i);
        if (!j.contains("s") || !j.contains("e") || !j.contains("lo") || !j.contains("hi"))
            throw InputError(where + " lacks s/e/lo/hi");
        const auto s = j["s"].get<Index>();
        const auto e = j["e"].get<Index>();
        if (s < 0 || s >= delta.state_grid.num_tiles() || e < 0 || e >= num_bins)
            throw InputError(where + " has an out-of-range tile");
        auto [it, inserted] = delta.rows.try_emplace(s);
        IntervalRow& row = it->second;
        if (inserted) {
            row.lo = Eigen::VectorXd::Zero(num_bins);
            row.hi = Eigen::VectorXd::Ones(num_bins);
        }
        row.trials = j.value("n", Index{0});
        row.lo[e] = j["lo"].get<double>();
        row.hi[e] = j["hi"].get<double>();
        if (!(row.lo[e] >= 0.0 && row.lo[e] <= row.hi[e] && row.hi[e] <= 1.0))
            throw InputError(where + " is not an interval inside [0, 1]");
    }
    return delta;
}

} // namespace imdpv
