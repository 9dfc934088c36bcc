#include "imdpv/validator.hpp"

#include "imdpv/parallel.hpp"
#include "imdpv/random.hpp"

#include <algorithm>

namespace imdpv {

Eigen::VectorXd dirichlet_update(const Eigen::VectorXd& prior, const Eigen::VectorXi& counts) {
    if (prior.size() != counts.size())
        throw InputError("prior and counts differ in length");
    if ((counts.array() < 0).any())
        throw InputError("counts must be nonnegative");
    return prior + counts.cast<double>();
}

double mc_conformance(const Eigen::VectorXd& concentrations, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& hi, Index num_samples, std::uint64_t seed,
                      std::uint64_t stream) {
    const Index k = concentrations.size();
    if (lo.size() != k || hi.size() != k)
        throw InputError("concentrations and intervals differ in length");
    if (num_samples <= 0)
        throw InputError("number of samples must be positive");
    if (!(concentrations.array() > 0.0).all())
        throw InputError("Dirichlet concentrations must be positive");
    Rng rng(seed, stream);
    Eigen::VectorXd g(k);
    Index inside = 0;
    for (Index n = 0; n < num_samples; ++n) {
        for (Index i = 0; i < k; ++i)
            g[i] = rng.gamma(concentrations[i]);
        const double total = g.sum();
        if (!(total > 0.0))
            throw NumericError("degenerate Dirichlet draw");
        g /= total;
        inside += (g.array() >= lo.array()).all() && (g.array() <= hi.array()).all();
    }
    return double(inside) / double(num_samples);
}

double median(std::vector<double> values) {
    if (values.empty())
        throw InputError("median of an empty sample");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    const double upper = values[mid];
    if (values.size() % 2)
        return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + mid);
    return (lower + upper) / 2.0;
}

ConformanceReport validate(const IntervalTransitionFunction& delta, const Grid& state_grid,
                           const Grid& estimate_grid, const TrajectoryDataset& dataset,
                           const ValidateOptions& options) {
    if (!(delta.state_grid == state_grid) || !(delta.estimate_grid == estimate_grid))
        throw InputError("grids do not match those of the interval transition function");
    if (dataset.num_steps() == 0)
        throw InputError("no observations: validation dataset is empty");
    if (!(options.prior_value > 0.0))
        throw InputError("prior value must be positive");
    const BinnedSamples bins = bin_dataset(dataset, state_grid, estimate_grid);

    ConformanceReport rep;
    rep.num_samples = options.num_samples;
    rep.seed = options.seed;
    rep.prior_value = options.prior_value;
    rep.clamped_steps = bins.clamped_states + bins.clamped_estimates;

    std::vector<Index> states;
    for (const auto& [s, v] : bins.by_state)
        states.push_back(s);
    const Eigen::VectorXd prior = Eigen::VectorXd::Constant(estimate_grid.num_tiles(), options.prior_value);
    std::vector<double> conf(states.size(), 0.0);
    std::vector<Eigen::VectorXd> post(states.size());
    parallel_for(Index(states.size()), options.threads, [&](Index i) {
        const Index s = states[std::size_t(i)];
        post[std::size_t(i)] = dirichlet_update(prior, bins.counts(s));
        if (const IntervalRow* row = delta.find(s))
            conf[std::size_t(i)] = mc_conformance(post[std::size_t(i)], row->lo, row->hi,
                                                  options.num_samples, options.seed, std::uint64_t(s));
    });
    for (std::size_t i = 0; i < states.size(); ++i) {
        rep.per_state_confidence[states[i]] = conf[i];
        rep.posterior.concentrations[states[i]] = std::move(post[i]);
        rep.states_missing_from_delta += delta.find(states[i]) == nullptr;
    }
    for (const auto& [s, row] : delta.rows)
        rep.states_without_data += bins.by_state.count(s) == 0;
    rep.states_with_data = Index(states.size());
    rep.aggregate_confidence = median(conf);
    rep.min_confidence = *std::min_element(conf.begin(), conf.end());
    double sum = 0.0;
    for (double c : conf)
        sum += c;
    rep.mean_confidence = sum / double(conf.size());
    return rep;
}

} // namespace imdpv
