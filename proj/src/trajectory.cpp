#include "imdpv/trajectory.hpp"

#include "imdpv/json_io.hpp"

#include <fstream>
#include <sstream>

namespace imdpv {

using nlohmann::json;

std::size_t TrajectoryDataset::num_steps() const {
    std::size_t n = 0;
    for (const auto& t : trajectories)
        n += t.size();
    return n;
}

Index TrajectoryDataset::state_dims() const {
    for (const auto& t : trajectories)
        if (!t.empty())
            return t.front().state.size();
    return 0;
}

Index TrajectoryDataset::estimate_dims() const {
    for (const auto& t : trajectories)
        if (!t.empty())
            return t.front().estimate.size();
    return 0;
}

void TrajectoryDataset::validate() const {
    const Index sd = state_dims();
    const Index ed = estimate_dims();
    for (std::size_t k = 0; k < trajectories.size(); ++k) {
        const auto& traj = trajectories[k];
        const std::string name = "trajectory " + std::to_string(k);
        if (traj.empty())
            throw InputError(name + " has no steps");
        for (std::size_t t = 0; t < traj.size(); ++t) {
            const auto& step = traj[t];
            if (step.time_index != Index(t))
                throw InputError(name + ": time indices must be consecutive from 0");
            if (step.state.size() != sd || step.estimate.size() != ed)
                throw InputError(name + ": inconsistent state or estimate dimension");
            if (!step.state.allFinite() || !step.estimate.allFinite())
                throw InputError(name + ": non-finite value at step " + std::to_string(t));
        }
    }
    if (!metadata.outcomes.empty() && metadata.outcomes.size() != trajectories.size())
        throw InputError("outcome list does not match the number of trajectories");
}

bool operator==(const TrajectoryStep& a, const TrajectoryStep& b) {
    return a.time_index == b.time_index && a.state.size() == b.state.size() &&
           a.estimate.size() == b.estimate.size() && a.state == b.state &&
           a.estimate == b.estimate;
}

bool operator==(const TrajectoryDataset& a, const TrajectoryDataset& b) {
    return a.trajectories == b.trajectories && a.metadata.environment == b.metadata.environment &&
           a.metadata.seed == b.metadata.seed && a.metadata.parameters == b.metadata.parameters &&
           a.metadata.outcomes == b.metadata.outcomes;
}

TrajectoryDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open dataset file " + path.string());
    TrajectoryDataset ds;
    std::string line;
    std::size_t line_no = 0;
    Index state_dims = -1, estimate_dims = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw InputError(where + ": malformed JSON (" + e.what() + ")");
        }
        if (!j.is_object())
            throw InputError(where + ": expected a JSON object");
        if (j.contains("meta")) {
            if (line_no != 1 || !ds.trajectories.empty())
                throw InputError(where + ": header line allowed only as line 1");
            const json& m = j["meta"];
            ds.metadata.environment = m.value("environment", "");
            ds.metadata.seed = m.value("seed", std::uint64_t{0});
            if (m.contains("parameters"))
                ds.metadata.parameters = m["parameters"];
            if (m.contains("outcomes"))
                ds.metadata.outcomes = m["outcomes"].get<std::vector<std::string>>();
            continue;
        }
        for (const char* key : {"traj", "t", "s", "shat"})
            if (!j.contains(key))
                throw InputError(where + ": missing field \"" + key + "\"");
        if (!j["traj"].is_number_integer() || !j["t"].is_number_integer())
            throw InputError(where + ": \"traj\" and \"t\" must be integers");
        const auto traj = j["traj"].get<Index>();
        TrajectoryStep step;
        step.time_index = j["t"].get<Index>();
        step.state = vector_from_json(j["s"], where + " field \"s\"");
        step.estimate = vector_from_json(j["shat"], where + " field \"shat\"");
        if (state_dims < 0) {
            state_dims = step.state.size();
            estimate_dims = step.estimate.size();
        }
        if (step.state.size() != state_dims)
            throw InputError(where + ": state has " + std::to_string(step.state.size()) +
                             " components, expected " + std::to_string(state_dims));
        if (step.estimate.size() != estimate_dims)
            throw InputError(where + ": estimate has " + std::to_string(step.estimate.size()) +
                             " components, expected " + std::to_string(estimate_dims));
        const auto current = static_cast<Index>(ds.trajectories.size()) - 1;
        if (traj == current + 1) {
            ds.trajectories.emplace_back();
        } else if (traj != current) {
            throw InputError(where + ": trajectory ids must be contiguous and increasing");
        }
        auto& steps = ds.trajectories.back();
        if (step.time_index != static_cast<Index>(steps.size()))
            throw InputError(where + ": time index " + std::to_string(step.time_index) +
                             " breaks the consecutive sequence");
        steps.push_back(std::move(step));
    }
    if (!ds.metadata.outcomes.empty() && ds.metadata.outcomes.size() != ds.trajectories.size())
        throw InputError(path.string() + ": header outcome count does not match trajectories");
    return ds;
}

void save_dataset(const TrajectoryDataset& dataset, const std::filesystem::path& path) {
    dataset.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw InputError("cannot write dataset file " + path.string());
    json meta = {{"environment", dataset.metadata.environment},
                 {"seed", dataset.metadata.seed},
                 {"parameters", dataset.metadata.parameters},
                 {"num_trajectories", dataset.trajectories.size()}};
    if (!dataset.metadata.outcomes.empty())
        meta["outcomes"] = dataset.metadata.outcomes;
    out << json{{"meta", meta}}.dump() << '\n';
    for (std::size_t k = 0; k < dataset.trajectories.size(); ++k)
        for (const auto& step : dataset.trajectories[k]) {
            json j = {{"traj", k},
                      {"t", step.time_index},
                      {"s", to_json(step.state)},
                      {"shat", to_json(step.estimate)}};
            out << j.dump() << '\n';
        }
    if (!out)
        throw InputError("write failed for " + path.string());
}

std::size_t BinnedSamples::total() const {
    std::size_t n = 0;
    for (const auto& [s, v] : by_state)
        n += v.size();
    return n;
}

Eigen::VectorXi BinnedSamples::counts(Index state) const {
    Eigen::VectorXi c = Eigen::VectorXi::Zero(num_estimate_bins);
    auto it = by_state.find(state);
    if (it != by_state.end())
        for (Index e : it->second)
            ++c[e];
    return c;
}

BinnedSamples bin_dataset(const TrajectoryDataset& dataset, const Grid& state_grid,
                          const Grid& estimate_grid) {
    BinnedSamples out;
    out.num_estimate_bins = estimate_grid.num_tiles();
    for (const auto& traj : dataset.trajectories)
        for (const auto& step : traj) {
            bool cs = false, ce = false;
            const Index s = abstract_index(step.state, state_grid, &cs);
            const Index e = abstract_index(step.estimate, estimate_grid, &ce);
            out.clamped_states += cs;
            out.clamped_estimates += ce;
            out.by_state[s].push_back(e);
        }
    return out;
}

} // namespace imdpv
