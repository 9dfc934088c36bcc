#include <doctest.h>

#include "imdpv/grid.hpp"
#include "imdpv/random.hpp"

#include <set>

using namespace imdpv;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs)
        v[i++] = x;
    return v;
}

Grid mountain_car_grid() { return Grid(vec({-1.2, -0.07}), vec({0.6, 0.07}), vec({0.05, 0.005})); }

Grid goal_grid() { return Grid(vec({0, 0}), vec({12, 12}), vec({0.5, 0.5})); }

Grid random_grid(Rng& rng) {
    const int d = 1 + int(rng.uniform() * 3);
    Vector lo(d), hi(d), w(d);
    for (int i = 0; i < d; ++i) {
        lo[i] = rng.uniform(-5, 5);
        hi[i] = lo[i] + rng.uniform(0.5, 6);
        w[i] = (hi[i] - lo[i]) / rng.uniform(1.0, 9.0);
    }
    return Grid(lo, hi, w);
}

} // namespace

TEST_CASE("tile counts of the benchmark grids") {
    CHECK(goal_grid().num_tiles() == 576);
    CHECK(mountain_car_grid().num_tiles() == 1008);
    CHECK(mountain_car_grid().counts()[0] == 36);
    CHECK(mountain_car_grid().counts()[1] == 28);
    const Grid line(vec({0}), vec({1}), vec({0.5}));
    CHECK(line.num_tiles() == 2);
    CHECK(enumerate_tiles(line).size() == 2);
}

TEST_CASE("running example tile (-6, 12)") {
    const Grid g = mountain_car_grid();
    const Tile t = abstract_point(vec({-0.3, 0.06}), g);
    const Eigen::VectorXi label = tile_label(t, g);
    CHECK(label[0] == -6);
    CHECK(label[1] == 12);

    const BoxD b = concretize(t, g);
    CHECK(b.min_corner[0] == doctest::Approx(-0.30).epsilon(1e-12));
    CHECK(b.max_corner[0] == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(b.min_corner[1] == doctest::Approx(0.06).epsilon(1e-12));
    CHECK(b.max_corner[1] == doctest::Approx(0.065).epsilon(1e-12));
}

TEST_CASE("boundary conventions") {
    const Grid g = goal_grid();
    bool clamped = true;
    const Tile lower = abstract_point(vec({0, 0}), g, &clamped);
    CHECK(lower == Tile{0, 0});
    CHECK_FALSE(clamped);

    const Tile upper = abstract_point(vec({12, 12}), g, &clamped);
    CHECK(upper == Tile{23, 23});
    CHECK_FALSE(clamped);

    const Tile outside = abstract_point(vec({-1, 13}), g, &clamped);
    CHECK(outside == Tile{0, 23});
    CHECK(clamped);

    // interior edge belongs to the upper tile
    CHECK(abstract_point(vec({0.5, 1.0}), g) == Tile{1, 2});
}

TEST_CASE("single-tile grid concretizes to the domain") {
    const Grid g(vec({-2, 3}), vec({4, 5}), vec({6, 2}));
    REQUIRE(g.num_tiles() == 1);
    const BoxD b = concretize(Index(0), g);
    CHECK(b.min_corner == vec({-2, 3}));
    CHECK(b.max_corner == vec({4, 5}));
}

TEST_CASE("truncated last tile") {
    const Grid g(vec({0}), vec({1}), vec({0.3}));
    CHECK(g.num_tiles() == 4);
    const BoxD last = concretize(Index(3), g);
    CHECK(last.min_corner[0] == doctest::Approx(0.9));
    CHECK(last.max_corner[0] == 1.0);
}

TEST_CASE("invalid grids and tiles") {
    CHECK_THROWS_AS(Grid(vec({0}), vec({0}), vec({1})), InputError);
    CHECK_THROWS_AS(Grid(vec({0}), vec({1}), vec({0})), InputError);
    CHECK_THROWS_AS(Grid(vec({0, 0}), vec({1}), vec({1})), InputError);
    const Grid g = goal_grid();
    CHECK_THROWS_AS(concretize(Tile{24, 0}, g), InputError);
    CHECK_THROWS_AS(tile_at(576, g), InputError);
    CHECK_THROWS_AS(abstract_point(vec({1}), g), InputError);
}

TEST_CASE("lexicographic enumeration") {
    const Grid g(vec({0, 0}), vec({3, 2}), vec({1, 1}));
    const auto tiles = enumerate_tiles(g);
    REQUIRE(tiles.size() == 6);
    for (std::size_t k = 0; k < tiles.size(); ++k) {
        CHECK(flat_index(tiles[k], g) == Index(k));
        if (k > 0)
            CHECK(tiles[k - 1] < tiles[k]);
    }
    CHECK(tiles[1] == Tile{0, 1});
    CHECK(tiles[2] == Tile{1, 0});
}

TEST_CASE("round trip over random tiles") {
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const Grid g = random_grid(rng);
        for (int k = 0; k < 50; ++k) {
            const Index flat = Index(rng.uniform() * double(g.num_tiles()));
            const Tile t = tile_at(flat, g);
            CHECK(abstract_point(concretize(t, g).center(), g) == t);
        }
    }
}

TEST_CASE("partition property") {
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const Grid g = random_grid(rng);
        for (int k = 0; k < 200; ++k) {
            Vector p(g.dims());
            for (Index d = 0; d < g.dims(); ++d)
                p[d] = rng.uniform(g.lower()[d], g.upper()[d]);
            const Index owner = abstract_index(p, g);
            // brute force: half-open membership, last tile closed
            int holders = 0;
            for (Index s = 0; s < g.num_tiles(); ++s) {
                const BoxD b = concretize(s, g);
                bool in = true;
                for (Index d = 0; d < g.dims(); ++d) {
                    const bool last = tile_at(s, g).indices[d] == g.counts()[d] - 1;
                    in = in && p[d] >= b.min_corner[d] && (p[d] < b.max_corner[d] || (last && p[d] <= b.max_corner[d]));
                }
                if (in) {
                    ++holders;
                    CHECK(s == owner);
                }
            }
            CHECK(holders == 1);
            CHECK(concretize(owner, g).contains(p));
        }
    }
}

TEST_CASE("tiles intersecting a box") {
    const Grid g = goal_grid();
    BoxD b{vec({0.9, 0.4}), vec({1.5, 0.6})};
    const auto tiles = tiles_intersecting(b, g);
    std::set<Index> expect;
    for (int i : {1, 2, 3})
        for (int j : {0, 1})
            expect.insert(flat_index(Tile{i, j}, g));
    CHECK(std::set<Index>(tiles.begin(), tiles.end()) == expect);

    bool clipped = false;
    const auto edge = tiles_intersecting(BoxD{vec({-1, 11.9}), vec({0.2, 13})}, g, &clipped);
    CHECK(clipped);
    CHECK(edge.size() == 1);
    CHECK(edge[0] == flat_index(Tile{0, 23}, g));
}

TEST_CASE("tile count is the product of counts") {
    Rng rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        const Grid g = random_grid(rng);
        Index prod = 1;
        for (Index d = 0; d < g.dims(); ++d)
            prod *= g.counts()[d];
        CHECK(g.num_tiles() == prod);
    }
}
