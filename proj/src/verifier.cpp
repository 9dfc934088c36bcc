#include "imdpv/verifier.hpp"

#include "imdpv/parallel.hpp"

#include <chrono>
#include <numeric>

namespace imdpv {

double worst_case_expectation(const Eigen::VectorXd& values, const Eigen::VectorXd& lo,
                              const Eigen::VectorXd& hi, Eigen::VectorXd* distribution) {
    const Index n = values.size();
    if (lo.size() != n || hi.size() != n)
        throw InputError("values and intervals differ in length");
    const double lo_sum = lo.sum();
    const double hi_sum = hi.sum();
    if (lo_sum > 1.0 + 1e-9 || hi_sum < 1.0 - 1e-9)
        throw NumericError("infeasible interval row: sum lo = " + std::to_string(lo_sum) +
                           ", sum hi = " + std::to_string(hi_sum));
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return values[a] < values[b]; });
    Eigen::VectorXd p = lo;
    double rest = 1.0 - lo_sum;
    for (Index i : order) {
        if (rest <= 0.0)
            break;
        const double add = std::min(hi[i] - lo[i], rest);
        p[i] += add;
        rest -= add;
    }
    if (distribution)
        *distribution = p;
    return p.dot(values);
}

namespace {

std::vector<Index> tiles_with(const Imdp& imdp, const std::string& label) {
    if (label.empty())
        throw InputError("property references an empty label");
    const bool negated = label[0] == '!';
    const std::string name = negated ? label.substr(1) : label;
    auto it = imdp.labels.find(name);
    if (it == imdp.labels.end())
        throw InputError("unknown label '" + name + "'");
    if (!negated)
        return it->second;
    std::vector<Index> out;
    for (Index s = 0; s < imdp.state_grid.num_tiles(); ++s)
        if (!std::binary_search(it->second.begin(), it->second.end(), s))
            out.push_back(s);
    return out;
}

enum class Kind : char { free, target, unsafe };

std::vector<Kind> classify(const Imdp& imdp, const BoundedProperty& property) {
    std::vector<Kind> kind(std::size_t(imdp.state_grid.num_tiles()), Kind::free);
    if (property.kind == BoundedProperty::Kind::until) {
        std::vector<char> safe(kind.size(), 0);
        for (Index s : tiles_with(imdp, property.safe_label))
            safe[std::size_t(s)] = 1;
        for (std::size_t s = 0; s < kind.size(); ++s)
            if (!safe[s])
                kind[s] = Kind::unsafe;
    }
    for (Index s : tiles_with(imdp, property.target_label))
        kind[std::size_t(s)] = Kind::target;
    return kind;
}

} // namespace

std::vector<Index> target_states(const Imdp& imdp, const BoundedProperty& property) {
    return tiles_with(imdp, property.target_label);
}

std::vector<Index> unsafe_states(const Imdp& imdp, const BoundedProperty& property) {
    std::vector<Index> out;
    const auto kind = classify(imdp, property);
    for (std::size_t s = 0; s < kind.size(); ++s)
        if (kind[s] == Kind::unsafe)
            out.push_back(Index(s));
    return out;
}

VerificationResult robust_value_iteration(const Imdp& imdp, const BoundedProperty& property,
                                          const VerifyOptions& options) {
    if (property.horizon < 1)
        throw InputError("property horizon must be at least 1");
    const Index num_tiles = imdp.state_grid.num_tiles();
    const Index num_bins = imdp.num_estimate_bins();
    const auto kind = classify(imdp, property);

    VerificationResult result;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(num_tiles);
    for (Index s = 0; s < num_tiles; ++s)
        if (kind[std::size_t(s)] == Kind::target)
            v[s] = 1.0;

    // states updated by the recursion
    std::vector<Index> active;
    std::vector<const IntervalRow*> rows;
    std::vector<const SuccessorRow*> succ;
    for (const auto& [s, row] : imdp.successors) {
        if (kind[std::size_t(s)] != Kind::free)
            continue;
        const IntervalRow* delta = imdp.delta.find(s);
        if (!delta)
            result.states_without_data.push_back(s);
        if (!delta && options.missing_data == MissingData::pessimistic)
            continue;
        if (delta && delta->size() != num_bins)
            throw InputError("interval row of state " + std::to_string(s) + " has the wrong length");
        active.push_back(s);
        rows.push_back(delta);
        succ.push_back(&row);
    }
    const Eigen::VectorXd full_lo = Eigen::VectorXd::Zero(num_bins);
    const Eigen::VectorXd full_hi = Eigen::VectorXd::Ones(num_bins);

    std::vector<AdversaryChoice> choices(options.record_policy ? active.size() : 0);
    Eigen::VectorXd next = v;
    for (Index k = 1; k <= property.horizon; ++k) {
        const bool last = k == property.horizon;
        parallel_for(Index(active.size()), options.threads, [&](Index i) {
            const SuccessorRow& row = *succ[std::size_t(i)];
            Eigen::VectorXd inner(num_bins);
            std::vector<Index> pick(std::size_t(num_bins), -1);
            for (Index e = 0; e < num_bins; ++e) {
                const auto& targets = row[std::size_t(e)];
                double best = 0.0;
                if (!targets.empty()) {
                    best = v[targets.front()];
                    pick[std::size_t(e)] = targets.front();
                    for (Index t : targets)
                        if (v[t] < best) {
                            best = v[t];
                            pick[std::size_t(e)] = t;
                        }
                }
                inner[e] = best;
            }
            const IntervalRow* delta = rows[std::size_t(i)];
            Eigen::VectorXd dist;
            double value;
            try {
                value = worst_case_expectation(inner, delta ? delta->lo : full_lo,
                                               delta ? delta->hi : full_hi, &dist);
            } catch (const NumericError& err) {
                throw NumericError(std::string(err.what()) + " at state " +
                                   std::to_string(active[std::size_t(i)]));
            }
            next[active[std::size_t(i)]] = std::clamp(value, 0.0, 1.0);
            if (last && options.record_policy)
                choices[std::size_t(i)] = {dist, pick};
        });
        result.previous_values = v;
        v = next;
        result.iterations_run = k;
    }
    result.values = v;
    for (std::size_t i = 0; i < choices.size(); ++i)
        result.worst_case_policy.emplace(active[i], std::move(choices[i]));
    return result;
}

double initial_lower_bound(const Imdp& imdp, const BoundedProperty& property,
                           const VerificationResult& result, Index state) {
    if (state < 0 || state >= imdp.state_grid.num_tiles())
        throw InputError("initial tile out of range");
    const auto kind = classify(imdp, property);
    if (kind[std::size_t(state)] == Kind::target)
        return 1.0;
    if (kind[std::size_t(state)] == Kind::unsafe)
        return 0.0;
    const auto it = imdp.successors.find(state);
    if (it == imdp.successors.end())
        return 0.0;
    // V_H is never below the per-bin minimum, except for states without data
    double bound = result.values[state];
    for (const auto& targets : it->second) {
        if (targets.empty())
            return 0.0;
        for (Index t : targets)
            bound = std::min(bound, result.previous_values[t]);
    }
    return bound;
}

std::vector<SweepRow> sweep_alpha(const BinnedSamples& samples, const Imdp& structure,
                                  const std::vector<double>& alphas,
                                  const BoundedProperty& property,
                                  const std::vector<Index>& initial_tiles,
                                  const VerifyOptions& options) {
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] > 0.0 && alphas[i] < 1.0))
            throw InputError("every alpha must lie in (0, 1)");
        if (i > 0 && alphas[i] < alphas[i - 1])
            throw InputError("alphas must be sorted ascending");
    }
    std::vector<SweepRow> out;
    Imdp imdp = structure;
    for (double alpha : alphas) {
        const auto start = std::chrono::steady_clock::now();
        ConfIntOptions ci;
        ci.threads = options.threads;
        imdp.delta = conf_int(samples, structure.state_grid, structure.estimate_grid, alpha, ci);
        const VerificationResult r = robust_value_iteration(imdp, property, options);
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        for (Index s : initial_tiles)
            out.push_back({alpha, s, initial_lower_bound(imdp, property, r, s), r.values[s],
                           r.iterations_run, ms});
    }
    return out;
}

} // namespace imdpv
