#include <doctest.h>

#include "imdpv/random.hpp"
#include "imdpv/trajectory.hpp"

#include <fstream>
#include <limits>

using namespace imdpv;
namespace fs = std::filesystem;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs)
        v[i++] = x;
    return v;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "imdpv_test_trajectory";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

TrajectoryDataset random_dataset(Rng& rng, int trajectories) {
    TrajectoryDataset ds;
    ds.metadata.environment = "synthetic";
    ds.metadata.seed = 42;
    ds.metadata.parameters = {{"gain", 0.5}};
    for (int k = 0; k < trajectories; ++k) {
        Trajectory tr;
        const int len = 1 + int(rng.uniform() * 6);
        for (int t = 0; t < len; ++t)
            tr.push_back({t, vec({rng.normal(), rng.uniform(-1e-7, 1e-7)}), vec({rng.uniform(0, 1) * 1e5, rng.normal()})});
        ds.trajectories.push_back(tr);
        ds.metadata.outcomes.push_back(k % 2 ? "success" : "timeout");
    }
    return ds;
}

// mountain-car state grid and position-error bins labeled -5 .. 5
Grid mc_state_grid() { return Grid(vec({-1.2, -0.07}), vec({0.6, 0.07}), vec({0.05, 0.005})); }
Grid mc_error_grid() { return Grid(vec({-0.5}), vec({0.6}), vec({0.1})); }

} // namespace

TEST_CASE("dataset round trip is bit exact") {
    Rng rng(5);
    const TrajectoryDataset ds = random_dataset(rng, 10);
    const fs::path p = scratch("roundtrip.jsonl");
    save_dataset(ds, p);
    const TrajectoryDataset back = load_dataset(p);
    CHECK(back == ds);
    CHECK(back.metadata.seed == 42);
    CHECK(back.metadata.outcomes == ds.metadata.outcomes);
    CHECK(back.metadata.parameters == ds.metadata.parameters);
}

TEST_CASE("a thousand trajectories parse") {
    Rng rng(9);
    const TrajectoryDataset ds = random_dataset(rng, 1000);
    const fs::path p = scratch("thousand.jsonl");
    save_dataset(ds, p);
    CHECK(load_dataset(p).trajectories.size() == 1000);
}

TEST_CASE("empty file gives an empty dataset") {
    const fs::path p = scratch("empty.jsonl");
    write_text(p, "");
    const TrajectoryDataset ds = load_dataset(p);
    CHECK(ds.trajectories.empty());
    CHECK(ds.num_steps() == 0);
}

TEST_CASE("schema violations name the line") {
    const fs::path p = scratch("bad.jsonl");
    write_text(p, "{\"traj\":0,\"t\":0,\"s\":[0,0],\"shat\":[1]}\n"
                  "{\"traj\":0,\"t\":1,\"s\":[0,0],\"shat\":[1,2]}\n");
    try {
        load_dataset(p);
        FAIL("expected an error");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }

    write_text(p, "{\"traj\":0,\"t\":1,\"s\":[0],\"shat\":[1]}\n");
    CHECK_THROWS_AS(load_dataset(p), InputError);
    write_text(p, "{\"traj\":0,\"t\":0,\"s\":[0]}\n");
    CHECK_THROWS_AS(load_dataset(p), InputError);
    write_text(p, "not json\n");
    CHECK_THROWS_AS(load_dataset(p), InputError);
    CHECK_THROWS_AS(load_dataset(scratch("missing.jsonl")), InputError);
}

TEST_CASE("save rejects invalid datasets") {
    TrajectoryDataset ds;
    ds.trajectories.push_back({{0, vec({0.0}), vec({std::numeric_limits<double>::quiet_NaN()})}});
    CHECK_THROWS_AS(save_dataset(ds, scratch("nan.jsonl")), InputError);

    TrajectoryDataset empty_traj;
    empty_traj.trajectories.push_back({});
    CHECK_THROWS_AS(save_dataset(empty_traj, scratch("zero.jsonl")), InputError);

    TrajectoryDataset gap;
    gap.trajectories.push_back({{0, vec({0.0}), vec({0.0})}, {2, vec({0.0}), vec({0.0})}});
    CHECK_THROWS_AS(gap.validate(), InputError);
}

TEST_CASE("binning the running example") {
    const Grid sg = mc_state_grid();
    const Grid eg = mc_error_grid();
    TrajectoryDataset ds;
    Trajectory tr;
    const double errors[] = {-0.05, 0.05, 0.05, 0.15};
    for (int t = 0; t < 4; ++t)
        tr.push_back({t, vec({0.01, 0.001}), vec({errors[t]})});
    ds.trajectories.push_back(tr);

    const BinnedSamples b = bin_dataset(ds, sg, eg);
    const Index s = abstract_index(vec({0.01, 0.001}), sg);
    CHECK(tile_label(tile_at(s, sg), sg) == Eigen::Vector2i(0, 0));
    REQUIRE(b.by_state.size() == 1);
    const Eigen::VectorXi counts = b.counts(s);
    auto bin = [&](int label) { return label + 5; };
    CHECK(tile_label(tile_at(bin(-1), eg), eg)[0] == -1);
    CHECK(counts[bin(-1)] == 1);
    CHECK(counts[bin(0)] == 2);
    CHECK(counts[bin(1)] == 1);
    CHECK(counts.sum() == 4);
}

TEST_CASE("single bin and multiplicity") {
    const Grid sg = mc_state_grid();
    const Grid eg = mc_error_grid();
    Rng rng(1);
    TrajectoryDataset ds;
    for (int k = 0; k < 5; ++k) {
        Trajectory tr;
        for (int t = 0; t < 7; ++t)
            tr.push_back({t, vec({rng.uniform(-1.2, 0.6), rng.uniform(-0.07, 0.07)}), vec({rng.uniform(-0.5, 0.5)})});
        ds.trajectories.push_back(tr);
    }
    const BinnedSamples once = bin_dataset(ds, sg, eg);
    CHECK(once.total() == ds.num_steps());
    CHECK(once.clamped_states == 0);

    TrajectoryDataset twice = ds;
    for (const auto& tr : ds.trajectories)
        twice.trajectories.push_back(tr);
    const BinnedSamples doubled = bin_dataset(twice, sg, eg);
    // recount directly
    for (const auto& [s, bins] : once.by_state) {
        Eigen::VectorXi recount = Eigen::VectorXi::Zero(eg.num_tiles());
        for (const auto& tr : ds.trajectories)
            for (const auto& step : tr)
                if (abstract_index(step.state, sg) == s)
                    ++recount[abstract_index(step.estimate, eg)];
        CHECK(once.counts(s) == recount);
        CHECK(doubled.counts(s) == 2 * recount);
    }

    TrajectoryDataset same;
    same.trajectories.push_back({{0, vec({0.01, 0.001}), vec({0.02})}, {1, vec({0.01, 0.001}), vec({0.03})}});
    const BinnedSamples one = bin_dataset(same, sg, eg);
    REQUIRE(one.by_state.size() == 1);
    CHECK((one.counts(one.by_state.begin()->first).array() > 0).count() == 1);
}
