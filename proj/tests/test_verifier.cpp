#include <doctest.h>

#include "oracles.hpp"

#include "imdpv/verifier.hpp"

using namespace imdpv;

namespace {

Grid line(Index k) {
    Vector lo(1), hi(1), w(1);
    lo << 0;
    hi << double(k);
    w << 1;
    return Grid(lo, hi, w);
}

BoundedProperty random_property(Rng& rng) {
    BoundedProperty p;
    p.kind = rng.uniform() < 0.5 ? BoundedProperty::Kind::until : BoundedProperty::Kind::eventually;
    p.safe_label = "!bad";
    p.target_label = "goal";
    p.horizon = 1 + Index(rng.uniform() * 5);
    return p;
}

// 0 -> {goal 1, stay 0, bad 2} by estimate bin
Imdp three_state(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
    Imdp imdp;
    imdp.state_grid = line(3);
    imdp.estimate_grid = line(3);
    imdp.delta.state_grid = imdp.state_grid;
    imdp.delta.estimate_grid = imdp.estimate_grid;
    imdp.successors[0] = SuccessorRow{{1}, {0}, {2}};
    IntervalRow row;
    row.lo = lo;
    row.hi = hi;
    imdp.delta.rows[0] = row;
    imdp.labels["goal"] = {1};
    imdp.labels["bad"] = {2};
    return imdp;
}

} // namespace

TEST_CASE("two outcomes") {
    Eigen::VectorXd dist;
    const double v = worst_case_expectation(Eigen::Vector2d(0, 1), Eigen::Vector2d(0.2, 0.4),
                                            Eigen::Vector2d(0.6, 0.8), &dist);
    CHECK(v == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(dist[0] == doctest::Approx(0.6));
    CHECK(dist[1] == doctest::Approx(0.4));
    CHECK(std::abs(oracle::grid_minimum(Eigen::Vector2d(0, 1), Eigen::Vector2d(0.2, 0.4), Eigen::Vector2d(0.6, 0.8)) - 0.4) < 1e-9);
}

TEST_CASE("greedy matches vertex enumeration and the 1e-3 grid") {
    Rng rng(53);
    int grid_checked = 0;
    for (int rep = 0; rep < 300; ++rep) {
        const Index n = 1 + Index(rng.uniform() * 5);
        Eigen::VectorXd lo, hi, values(n);
        oracle::random_intervals(rng, n, lo, hi);
        for (Index i = 0; i < n; ++i)
            values[i] = rng.uniform() < 0.2 ? 0.5 : rng.uniform();
        Eigen::VectorXd dist;
        const double greedy = worst_case_expectation(values, lo, hi, &dist);
        CHECK(std::abs(greedy - oracle::vertex_minimum(values, lo, hi)) < 1e-9);
        CHECK(std::abs(dist.sum() - 1.0) < 1e-12);
        CHECK((dist.array() >= lo.array() - 1e-15).all());
        CHECK((dist.array() <= hi.array() + 1e-15).all());
        if (n <= 3) {
            const double g = oracle::grid_minimum(values, lo, hi);
            if (!std::isnan(g)) {
                CHECK(std::abs(greedy - g) < 2e-3);
                ++grid_checked;
            }
        }
    }
    CHECK(grid_checked > 50);
}

TEST_CASE("infeasible rows raise numeric errors") {
    CHECK_THROWS_AS(worst_case_expectation(Eigen::Vector2d(0, 1), Eigen::Vector2d(0.6, 0.6), Eigen::Vector2d(1, 1)),
                    NumericError);
    CHECK_THROWS_AS(worst_case_expectation(Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 0), Eigen::Vector2d(0.3, 0.3)),
                    NumericError);
    CHECK_THROWS_AS(worst_case_expectation(Eigen::Vector2d(0, 1), Eigen::Vector3d(0, 0, 0), Eigen::Vector2d(1, 1)),
                    InputError);
}

TEST_CASE("absorbing target") {
    Imdp imdp = three_state(Eigen::Vector3d(0.2, 0.2, 0.2), Eigen::Vector3d(0.6, 0.6, 0.6));
    for (Index h : {1, 5, 50}) {
        BoundedProperty p{BoundedProperty::Kind::eventually, "", "goal", h};
        const auto r = robust_value_iteration(imdp, p);
        CHECK(r.values[1] == 1.0);
        CHECK(initial_lower_bound(imdp, p, r, 1) == 1.0);
        CHECK(r.iterations_run == h);
    }
}

TEST_CASE("three-state chain has a closed form") {
    // greedy: worst case puts 0.6 on bad, 0.2 stays, 0.2 to goal
    Imdp imdp = three_state(Eigen::Vector3d(0.2, 0.2, 0.2), Eigen::Vector3d(0.6, 0.6, 0.6));
    BoundedProperty p{BoundedProperty::Kind::until, "!bad", "goal", 4};
    const auto r = robust_value_iteration(imdp, p, {MissingData::pessimistic, true, 1});
    double expect = 0.0;
    for (int k = 0; k < 4; ++k)
        expect += 0.2 * std::pow(0.2, k);
    CHECK(r.values[0] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(r.values[2] == 0.0);
    const AdversaryChoice& choice = r.worst_case_policy.at(0);
    CHECK(choice.distribution[2] == doctest::Approx(0.6));
    CHECK(choice.successor == std::vector<Index>{1, 0, 2});
    // first estimate unknown: worst successor after H - 1 steps
    CHECK(initial_lower_bound(imdp, p, r, 0) == 0.0);
}

TEST_CASE("random IMDPs against brute force") {
    Rng rng(59);
    for (int rep = 0; rep < 100; ++rep) {
        const Imdp imdp = oracle::random_imdp(rng);
        const BoundedProperty p = random_property(rng);
        const auto r = robust_value_iteration(imdp, p);
        const Eigen::VectorXd expect = oracle::brute_force_values(imdp, p);
        CHECK((r.values - expect).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("values are bounded and grow with the horizon") {
    Rng rng(61);
    for (int rep = 0; rep < 50; ++rep) {
        const Imdp imdp = oracle::random_imdp(rng);
        BoundedProperty p{BoundedProperty::Kind::eventually, "", "goal", 1};
        Eigen::VectorXd prev = Eigen::VectorXd::Zero(imdp.state_grid.num_tiles());
        for (Index h = 1; h <= 6; ++h) {
            p.horizon = h;
            const auto r = robust_value_iteration(imdp, p);
            CHECK((r.values.array() >= 0.0).all());
            CHECK((r.values.array() <= 1.0).all());
            CHECK((r.values.array() >= prev.array() - 1e-12).all());
            prev = r.values;
        }
    }
}

TEST_CASE("missing data conventions") {
    Imdp imdp = three_state(Eigen::Vector3d(0.2, 0.2, 0.2), Eigen::Vector3d(0.6, 0.6, 0.6));
    imdp.delta.rows.clear();
    BoundedProperty p{BoundedProperty::Kind::eventually, "", "goal", 3};
    auto r = robust_value_iteration(imdp, p);
    CHECK(r.values[0] == 0.0);
    CHECK(r.states_without_data == std::vector<Index>{0});
    r = robust_value_iteration(imdp, p, {MissingData::uniform, false, 1});
    // all mass may go to the non-goal bins
    CHECK(r.values[0] == 0.0);
    imdp.successors[0] = SuccessorRow{{1}, {1}, {1}};
    r = robust_value_iteration(imdp, p, {MissingData::uniform, false, 1});
    CHECK(r.values[0] == 1.0);
}

TEST_CASE("unknown labels and horizons") {
    Imdp imdp = three_state(Eigen::Vector3d(0.2, 0.2, 0.2), Eigen::Vector3d(0.6, 0.6, 0.6));
    CHECK_THROWS_AS(robust_value_iteration(imdp, {BoundedProperty::Kind::eventually, "", "nowhere", 3}), InputError);
    CHECK_THROWS_AS(robust_value_iteration(imdp, {BoundedProperty::Kind::eventually, "", "goal", 0}), InputError);
}

TEST_CASE("alpha sweep rows") {
    Imdp structure = three_state(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 1));
    BinnedSamples samples;
    samples.num_estimate_bins = 3;
    samples.by_state[0] = std::vector<Index>(60, 0);
    samples.by_state[0].insert(samples.by_state[0].end(), 30, 1);
    samples.by_state[0].insert(samples.by_state[0].end(), 10, 2);
    const BoundedProperty p{BoundedProperty::Kind::until, "!bad", "goal", 5};

    const auto one = sweep_alpha(samples, structure, {0.05}, p, {0});
    CHECK(one.size() == 1);
    const auto dup = sweep_alpha(samples, structure, {0.05, 0.05}, p, {0});
    REQUIRE(dup.size() == 2);
    CHECK(dup[0].lower_bound == dup[1].lower_bound);
    CHECK(dup[0].state_value == dup[1].state_value);

    const auto rows = sweep_alpha(samples, structure, {0.001, 0.01, 0.1, 0.3}, p, {0});
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i].state_value >= rows[i - 1].state_value);
    CHECK(rows.back().state_value > rows.front().state_value);
    CHECK_THROWS_AS(sweep_alpha(samples, structure, {0.1, 0.01}, p, {0}), InputError);
    CHECK_THROWS_AS(sweep_alpha(samples, structure, {1.5}, p, {0}), InputError);
}
