#include "imdpv/imdp.hpp"

#include "imdpv/json_io.hpp"
#include "imdpv/parallel.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace imdpv {

using nlohmann::json;

namespace {

constexpr double kTol = 1e-9;

bool is_last(const Grid& grid, const Tile& t, Index d) { return t.indices[d] == grid.counts()[d] - 1; }

// Widens the outermost estimate bins far beyond the grid.
BoxD widen_edges(BoxD box, const Tile& t, const Grid& grid) {
    for (Index d = 0; d < grid.dims(); ++d) {
        const double far = 1e6 * (grid.upper()[d] - grid.lower()[d]);
        if (t.indices[d] == 0)
            box.min_corner[d] = grid.lower()[d] - far;
        if (is_last(grid, t, d))
            box.max_corner[d] = grid.upper()[d] + far;
    }
    return box;
}

// Equal slices of `box` (refine per dimension); with stretch, the outer slices
// of the bin keep the far bounds of `outer`.
std::vector<BoxD> split_box(const BoxD& box, const BoxD& outer, Index refine) {
    const Index n = box.dims();
    Index count = 1;
    for (Index d = 0; d < n; ++d)
        count *= refine;
    std::vector<BoxD> out;
    out.reserve(std::size_t(count));
    for (Index k = 0; k < count; ++k) {
        BoxD b = box;
        Index rest = k;
        for (Index d = 0; d < n; ++d) {
            const Index i = rest % refine;
            rest /= refine;
            const double w = (box.max_corner[d] - box.min_corner[d]) / double(refine);
            b.min_corner[d] = i == 0 ? outer.min_corner[d] : box.min_corner[d] + double(i) * w;
            b.max_corner[d] = i == refine - 1 ? outer.max_corner[d] : box.min_corner[d] + double(i + 1) * w;
        }
        out.push_back(b);
    }
    return out;
}

// Tiles met by a reachable box. Images of a half-open tile stay below the
// box's upper face, so an upper face on a tile edge excludes the tile above,
// except from the closed last tile. Faces within kEdge widths of an edge count as on it.
constexpr double kEdge = 1e-7;

std::vector<Index> reach_tiles(const BoxD& reach, const Grid& grid, const Tile& from, bool& clipped) {
    const Index n = grid.dims();
    Eigen::VectorXi lo(n), hi(n);
    for (Index d = 0; d < n; ++d) {
        const double w = grid.widths()[d];
        const int last = grid.counts()[d] - 1;
        const double a = (reach.min_corner[d] - grid.lower()[d]) / w;
        const double b = (reach.max_corner[d] - grid.lower()[d]) / w;
        clipped = clipped || a < -kEdge || reach.max_corner[d] > grid.upper()[d] + kEdge * w;
        double i = std::floor(a + kEdge);
        double j = is_last(grid, from, d) ? std::floor(b + kEdge) : std::ceil(b - kEdge) - 1.0;
        i = std::clamp(i, 0.0, double(last));
        j = std::clamp(j, i, double(last));
        lo[d] = int(i);
        hi[d] = int(j);
    }
    std::vector<Index> out;
    Eigen::VectorXi cur = lo;
    while (true) {
        Index flat = 0;
        for (Index d = 0; d < n; ++d)
            flat += Index(cur[d]) * grid.strides()[d];
        out.push_back(flat);
        Index d = n - 1;
        while (d >= 0 && cur[d] == hi[d]) {
            cur[d] = lo[d];
            --d;
        }
        if (d < 0)
            break;
        ++cur[d];
    }
    return out;
}

std::string pair_name(Index s, Index e) {
    return "(state " + std::to_string(s) + ", estimate " + std::to_string(e) + ")";
}

} // namespace

bool tile_satisfies(Index tile, const Grid& grid, const Predicate& p) {
    const Tile t = tile_at(tile, grid);
    const BoxD box = concretize(t, grid);
    const Index n = grid.dims();
    if (p.shape == Predicate::Shape::box) {
        if (p.lower.size() != n || p.upper.size() != n)
            throw InputError("predicate '" + p.name + "' has the wrong dimension");
        for (Index d = 0; d < n; ++d) {
            const double tol = kTol * grid.widths()[d];
            const double lo = box.min_corner[d], hi = box.max_corner[d];
            if (p.mode == Predicate::Mode::over) {
                // tiles are half-open: [lo, hi) only meets x >= a when hi > a
                const bool upper_ok = is_last(grid, t, d) ? hi >= p.lower[d] - tol : hi > p.lower[d] + tol;
                if (!(lo <= p.upper[d] + tol && upper_ok))
                    return false;
            } else if (!(lo >= p.lower[d] - tol && hi <= p.upper[d] + tol)) {
                return false;
            }
        }
        return true;
    }
    if (p.shape == Predicate::Shape::ball) {
        if (p.center.size() != n)
            throw InputError("predicate '" + p.name + "' has the wrong dimension");
        double dist2 = 0.0;
        for (Index d = 0; d < n; ++d) {
            const double lo = box.min_corner[d], hi = box.max_corner[d], c = p.center[d];
            double gap;
            if (p.mode == Predicate::Mode::over)
                gap = c < lo ? lo - c : (c > hi ? c - hi : 0.0);
            else
                gap = std::max(std::abs(c - lo), std::abs(hi - c));
            dist2 += gap * gap;
        }
        return std::sqrt(dist2) <= p.radius + kTol * grid.widths().minCoeff();
    }
    throw InputError("unknown predicate shape for '" + p.name + "'");
}

Index Imdp::num_pairs() const {
    Index n = 0;
    for (const auto& [s, row] : successors)
        for (const auto& succ : row)
            n += !succ.empty();
    return n;
}

Index Imdp::num_transitions() const {
    Index n = 0;
    for (const auto& [s, row] : successors)
        for (const auto& succ : row)
            n += Index(succ.size());
    return n;
}

bool Imdp::has_label(Index state, const std::string& name) const {
    auto it = labels.find(name);
    return it != labels.end() && std::binary_search(it->second.begin(), it->second.end(), state);
}

std::vector<std::string> Imdp::labels_of(Index state) const {
    std::vector<std::string> out;
    for (const auto& [name, tiles] : labels)
        if (std::binary_search(tiles.begin(), tiles.end(), state))
            out.push_back(name);
    return out;
}

const std::vector<Index>* Imdp::successors_of(Index state, Index estimate_bin) const {
    auto it = successors.find(state);
    if (it == successors.end() || estimate_bin < 0 || estimate_bin >= Index(it->second.size()))
        return nullptr;
    const auto& succ = it->second[estimate_bin];
    return succ.empty() ? nullptr : &succ;
}

BoxD displacement_box(const ControlLoop& loop, const BoxD& state_box, const BoxD& estimate_box) {
    const Index n = state_box.dims();
    const Index m = estimate_box.dims();
    const Index corners = Index(1) << (n + m);
    Vector lo = Vector::Constant(n, std::numeric_limits<double>::infinity());
    Vector hi = -lo;
    Vector s(n), e(m);
    for (Index c = 0; c < corners; ++c) {
        for (Index d = 0; d < n; ++d)
            s[d] = (c >> d) & 1 ? state_box.max_corner[d] : state_box.min_corner[d];
        for (Index d = 0; d < m; ++d)
            e[d] = (c >> (n + d)) & 1 ? estimate_box.max_corner[d] : estimate_box.min_corner[d];
        const Vector next = loop.step(s, e);
        if (next.size() != n)
            throw InputError("dynamics returned a state of the wrong dimension");
        const Vector delta = next - s;
        if (!delta.allFinite())
            throw NumericError("non-finite displacement");
        lo = lo.cwiseMin(delta);
        hi = hi.cwiseMax(delta);
    }
    BoxD box{lo, hi};
    if (loop.displacement_enclosure)
        if (auto extra = loop.displacement_enclosure(state_box, estimate_box))
            box = box.hull(*extra);
    double pad = 0.0;
    if (loop.lipschitz.size() == n)
        pad = (loop.lipschitz.array() * (state_box.max_corner - state_box.min_corner).array()).sum() / 2.0;
    else if (loop.lipschitz.size() != 0)
        throw InputError("Lipschitz vector must have one entry per state dimension");
    box.min_corner.array() -= pad;
    box.max_corner.array() += pad;
    return box;
}

std::map<Index, SuccessorRow> dyn_struct(const ControlLoop& loop, const Grid& state_grid,
                                         const Grid& estimate_grid, const DynStructOptions& options,
                                         DynStructReport* report) {
    if (!loop.policy || !loop.dynamics)
        throw InputError("control loop needs a policy and dynamics");
    if (options.refine < 1)
        throw InputError("refine must be at least 1");
    const Index num_bins = estimate_grid.num_tiles();
    std::vector<std::vector<BoxD>> estimate_boxes;
    estimate_boxes.reserve(std::size_t(num_bins));
    for (Index e = 0; e < num_bins; ++e) {
        const Tile t = tile_at(e, estimate_grid);
        const BoxD b = concretize(t, estimate_grid);
        estimate_boxes.push_back(
            split_box(b, options.unbounded_estimate_edges ? widen_edges(b, t, estimate_grid) : b, options.refine));
    }
    const std::set<Index> absorbing(options.absorbing_states.begin(), options.absorbing_states.end());

    std::map<Index, SuccessorRow> out;
    DynStructReport rep;
    std::set<Index> seen;
    std::vector<Index> frontier;
    if (options.initial_states.empty()) {
        for (Index s = 0; s < state_grid.num_tiles(); ++s)
            frontier.push_back(s);
    } else {
        frontier = options.initial_states;
    }
    for (Index s : frontier) {
        if (s < 0 || s >= state_grid.num_tiles())
            throw InputError("initial state tile " + std::to_string(s) + " out of range");
        seen.insert(s);
    }
    std::sort(frontier.begin(), frontier.end());
    frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());

    while (!frontier.empty()) {
        std::vector<SuccessorRow> rows(frontier.size());
        std::vector<Index> clipped(frontier.size(), 0);
        parallel_for(Index(frontier.size()), options.threads, [&](Index i) {
            const Index s = frontier[i];
            if (absorbing.count(s))
                return;
            const Tile from = tile_at(s, state_grid);
            const BoxD tile_box = concretize(from, state_grid);
            const auto state_boxes = split_box(tile_box, tile_box, options.refine);
            SuccessorRow row(static_cast<std::size_t>(num_bins));
            for (Index e = 0; e < num_bins; ++e) {
                std::set<Index> succ;
                bool any_clipped = false;
                for (const BoxD& sbox : state_boxes)
                    for (const BoxD& ebox : estimate_boxes[std::size_t(e)]) {
                        BoxD reach;
                        try {
                            const BoxD delta = displacement_box(loop, sbox, ebox);
                            reach = {sbox.min_corner + delta.min_corner, sbox.max_corner + delta.max_corner};
                        } catch (const NumericError& err) {
                            throw NumericError(std::string(err.what()) + " at " + pair_name(s, e));
                        }
                        for (Index t : reach_tiles(reach, state_grid, from, any_clipped))
                            succ.insert(t);
                    }
                row[std::size_t(e)].assign(succ.begin(), succ.end());
                clipped[i] += any_clipped;
            }
            rows[i] = std::move(row);
        });
        std::vector<Index> next;
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            if (rows[i].empty())
                continue;
            rep.clipped_pairs += clipped[i];
            for (const auto& succ : rows[i]) {
                ++rep.pairs;
                rep.transitions += Index(succ.size());
                for (Index t : succ)
                    if (seen.insert(t).second)
                        next.push_back(t);
            }
            out.emplace(frontier[i], std::move(rows[i]));
        }
        std::sort(next.begin(), next.end());
        frontier = std::move(next);
    }
    if (report)
        *report = rep;
    return out;
}

void label_states(Imdp& imdp, const std::vector<Predicate>& predicates) {
    // predicates sharing a name form a union
    std::map<std::string, std::set<Index>> sets;
    for (const auto& p : predicates) {
        if (p.name.empty() || p.name[0] == '!')
            throw InputError("invalid proposition name '" + p.name + "'");
        auto& tiles = sets[p.name];
        for (Index s = 0; s < imdp.state_grid.num_tiles(); ++s)
            if (tile_satisfies(s, imdp.state_grid, p))
                tiles.insert(s);
    }
    for (auto& [name, tiles] : sets)
        imdp.labels[name] = std::vector<Index>(tiles.begin(), tiles.end());
}

void save_imdp(const Imdp& imdp, const std::filesystem::path& path,
               const std::filesystem::path& delta_path) {
    save_delta(imdp.delta, delta_path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw InputError("cannot write " + path.string());
    json labels = json::object();
    for (const auto& [name, tiles] : imdp.labels)
        labels[name] = tiles;
    std::filesystem::path ref = delta_path;
    if (delta_path.parent_path() == path.parent_path())
        ref = delta_path.filename();
    json header = {{"state_grid", to_json(imdp.state_grid)},
                   {"estimate_grid", to_json(imdp.estimate_grid)},
                   {"delta", ref.generic_string()},
                   {"labels", labels},
                   {"num_states", imdp.successors.size()},
                   {"num_pairs", imdp.num_pairs()},
                   {"num_transitions", imdp.num_transitions()}};
    out << json{{"imdp", header}}.dump() << '\n';
    for (const auto& [s, row] : imdp.successors)
        for (std::size_t e = 0; e < row.size(); ++e)
            if (!row[e].empty())
                out << json{{"s", s}, {"e", e}, {"succ", row[e]}}.dump() << '\n';
    if (!out)
        throw InputError("write failed for " + path.string());
}

Imdp load_imdp(const std::filesystem::path& path) {
    const auto lines = read_json_lines(path);
    if (lines.empty() || !lines.front().contains("imdp"))
        throw InputError(path.string() + ": missing {\"imdp\": ...} header");
    const json& h = lines.front()["imdp"];
    Imdp imdp;
    imdp.state_grid = grid_from_json(h.at("state_grid"), path.string());
    imdp.estimate_grid = grid_from_json(h.at("estimate_grid"), path.string());
    std::filesystem::path ref = h.at("delta").get<std::string>();
    if (ref.is_relative())
        ref = path.parent_path() / ref;
    imdp.delta = load_delta(ref);
    if (!(imdp.delta.state_grid == imdp.state_grid) || !(imdp.delta.estimate_grid == imdp.estimate_grid))
        throw InputError(path.string() + ": grids differ from those of " + ref.string());
    for (const auto& [name, tiles] : h.at("labels").items())
        imdp.labels[name] = tiles.get<std::vector<Index>>();
    const Index num_bins = imdp.num_estimate_bins();
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const json& j = lines[i];
        const std::string where = path.string() + ": entry " + std::to_string(i);
        if (!j.contains("s") || !j.contains("e") || !j.contains("succ"))
            throw InputError(where + " lacks s/e/succ");
        const auto s = j["s"].get<Index>();
        const auto e = j["e"].get<Index>();
        if (s < 0 || s >= imdp.state_grid.num_tiles() || e < 0 || e >= num_bins)
            throw InputError(where + " has an out-of-range tile");
        auto& row = imdp.successors[s];
        row.resize(std::size_t(num_bins));
        row[std::size_t(e)] = j["succ"].get<std::vector<Index>>();
        for (Index t : row[std::size_t(e)])
            if (t < 0 || t >= imdp.state_grid.num_tiles())
                throw InputError(where + " has an out-of-range successor");
    }
    return imdp;
}

} // namespace imdpv
