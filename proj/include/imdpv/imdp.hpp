#pragma once

#include "imdpv/confint.hpp"
#include "imdpv/grid.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace imdpv {

/**
 * Closed loop s' = f(s, pi(s, shat)). The policy receives the concrete
 * state as well because some estimate spaces (mountain-car position error)
 * only determine the perceived state together with it.
 */
struct ControlLoop {
    std::function<Vector(const Vector& state, const Vector& estimate)> policy;
    std::function<Vector(const Vector& state, const Vector& action)> dynamics;
    /// Per state dimension; the displacement box is padded by sum_d L_d * width_d / 2.
    Vector lipschitz;
    /// Optional sound enclosure of f(s, pi(s, shat)) - s over a tile pair, joined with the corner box.
    std::function<std::optional<BoxD>(const BoxD& state_box, const BoxD& estimate_box)>
        displacement_enclosure;

    Vector step(const Vector& state, const Vector& estimate) const {
        return dynamics(state, policy(state, estimate));
    }
};

/// Region of the concrete state space used for atomic propositions.
struct Predicate {
    enum class Shape { box, ball };
    enum class Mode { over, under };

    std::string name;
    Shape shape = Shape::box;
    /// Box bounds (may be +-infinity).
    Vector lower, upper;
    /// Ball center and radius.
    Vector center;
    double radius = 0.0;
    /// over: tile intersects the region; under: tile lies inside it.
    Mode mode = Mode::over;
};

/// Does the tile carry the predicate's label?
bool tile_satisfies(Index tile, const Grid& grid, const Predicate& predicate);

using SuccessorRow = std::vector<std::vector<Index>>;

/// IMDP: successor sets per (state, estimate bin), interval transition function and labels.
struct Imdp {
    Grid state_grid;
    Grid estimate_grid;
    /// state -> estimate bin -> sorted successor tiles.
    std::map<Index, SuccessorRow> successors;
    IntervalTransitionFunction delta;
    /// proposition -> sorted tiles carrying it.
    std::map<std::string, std::vector<Index>> labels;

    Index num_estimate_bins() const { return estimate_grid.num_tiles(); }
    Index num_pairs() const;
    Index num_transitions() const;
    bool has_label(Index state, const std::string& name) const;
    std::vector<std::string> labels_of(Index state) const;
    /// Null when the pair has no successor entry.
    const std::vector<Index>* successors_of(Index state, Index estimate_bin) const;
};

struct DynStructOptions {
    /// Tiles to start the forward closure from; empty means every state tile.
    std::vector<Index> initial_states;
    /// Tiles whose successors are not expanded (goal and unsafe tiles).
    std::vector<Index> absorbing_states;
    /// Stretch the outermost estimate bins far outward (10^6 grid extents), so
    /// estimates clamped into them during binning stay covered.
    bool unbounded_estimate_edges = false;
    /// Split each state tile and estimate bin into refine^dims sub-boxes and join their successors.
    Index refine = 1;
    unsigned threads = 1;
};

struct DynStructReport {
    Index pairs = 0;
    Index transitions = 0;
    /// Pairs whose reachable box left the state domain and was clipped.
    Index clipped_pairs = 0;
};

/**
 * Successor structure: for each state tile reached from the initial tiles and
 * each estimate bin, every corner of state box x estimate box is pushed through
 * the loop; the displacement box [min, max] (hulled with the loop's enclosure,
 * padded by the Lipschitz slack) is added to the state box and the tiles it
 * touches become the successors.
 */
std::map<Index, SuccessorRow> dyn_struct(const ControlLoop& loop, const Grid& state_grid,
                                         const Grid& estimate_grid,
                                         const DynStructOptions& options = {},
                                         DynStructReport* report = nullptr);

/// Displacement box of one tile pair (exposed for audits).
BoxD displacement_box(const ControlLoop& loop, const BoxD& state_box, const BoxD& estimate_box);

/// Computes every predicate's tile set over the full state grid; equal names are joined.
void label_states(Imdp& imdp, const std::vector<Predicate>& predicates);

/**
 * JSON-lines: header {"imdp": {grids, labels, delta file}} then one
 * {"s", "e", "succ"} line per pair. The delta is written next to it.
 */
void save_imdp(const Imdp& imdp, const std::filesystem::path& path,
               const std::filesystem::path& delta_path);
Imdp load_imdp(const std::filesystem::path& path);

} // namespace imdpv
