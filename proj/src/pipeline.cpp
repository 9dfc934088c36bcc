#include "imdpv/pipeline.hpp"

#include "imdpv/json_io.hpp"
#include "imdpv/model_export.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace imdpv {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::string timing_cell(const Experiment& exp, double ms) { return exp.timing ? fmt(ms) : ""; }

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok)
        out.push_back(tok);
    return out;
}

Predicate::Mode parse_mode(const std::string& s, const std::string& name) {
    if (s == "over")
        return Predicate::Mode::over;
    if (s == "under")
        return Predicate::Mode::under;
    throw ConfigError("label '" + name + "': mode must be over or under, got '" + s + "'");
}

std::vector<double> reals(const Config& cfg, const std::string& section, const std::string& key) {
    const Vector v = cfg.vector(section, key);
    return std::vector<double>(v.data(), v.data() + v.size());
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw InputError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw InputError("cannot write " + path.string());
    return out;
}

fs::path out_dir(const Experiment& exp) {
    fs::create_directories(exp.output_dir);
    return exp.output_dir;
}

fs::path or_default(const fs::path& given, const fs::path& fallback) {
    return given.empty() ? fallback : given;
}

json provenance(const Config& cfg, std::optional<std::uint64_t> seed) {
    json j = {{"version", kVersion}, {"config_hash", cfg.hash()}};
    j["seed"] = seed ? json(*seed) : json(nullptr);
    return j;
}

std::string tile_text(const Grid& grid, Index s) {
    const Eigen::VectorXi label = tile_label(tile_at(s, grid), grid);
    std::string out = "(";
    for (Index d = 0; d < label.size(); ++d)
        out += (d ? " " : "") + std::to_string(label[d]);
    return out + ")";
}

Vector goal_bias(const Config& cfg, const std::string& overlay, double distance) {
    Vector dir = cfg.vector(overlay, "bias_direction",
                            cfg.vector("environment", "bias_direction", Vector::Zero(0)));
    if (dir.size() == 0) {
        dir.resize(2);
        dir << 1.0, -1.0;
    }
    if (dir.size() != 2 || !(dir.norm() > 0.0))
        throw ConfigError("bias_direction must be a nonzero 2-D vector");
    return distance * dir / dir.norm();
}

template <typename T>
T pick(const Config& cfg, const std::string& overlay, const std::string& key, T fallback);

template <>
double pick(const Config& cfg, const std::string& overlay, const std::string& key, double fallback) {
    return cfg.real(overlay, key, cfg.real("environment", key, fallback));
}

template <>
Index pick(const Config& cfg, const std::string& overlay, const std::string& key, Index fallback) {
    return cfg.integer(overlay, key, cfg.integer("environment", key, fallback));
}

template <>
Vector pick(const Config& cfg, const std::string& overlay, const std::string& key, Vector fallback) {
    return cfg.vector(overlay, key, cfg.vector("environment", key, fallback));
}

bool any_has(const Config& cfg, const std::string& overlay, const std::string& key) {
    return cfg.has(overlay, key) || cfg.has("environment", key);
}

} // namespace

Predicate parse_predicate(const std::string& name, const std::string& spec, Index dims) {
    const auto tok = split_ws(spec);
    Predicate p;
    p.name = name;
    auto vec = [&](std::size_t from) {
        Vector v(dims);
        for (Index d = 0; d < dims; ++d)
            v[d] = parse_vector(tok[from + std::size_t(d)], "label " + name)[0];
        return v;
    };
    if (!tok.empty() && tok[0] == "box" && tok.size() == std::size_t(2 * dims + 2)) {
        p.shape = Predicate::Shape::box;
        p.lower = vec(1);
        p.upper = vec(1 + std::size_t(dims));
        p.mode = parse_mode(tok.back(), name);
        if (!(p.lower.array() <= p.upper.array()).all())
            throw ConfigError("label '" + name + "': box lower bound above upper bound");
        return p;
    }
    if (!tok.empty() && tok[0] == "ball" && tok.size() == std::size_t(dims + 3)) {
        p.shape = Predicate::Shape::ball;
        p.center = vec(1);
        p.radius = parse_vector(tok[std::size_t(dims) + 1], "label " + name)[0];
        p.mode = parse_mode(tok.back(), name);
        if (!(p.radius >= 0.0))
            throw ConfigError("label '" + name + "': negative radius");
        return p;
    }
    throw ConfigError("label '" + name + "': expected 'box <lower> <upper> <mode>' or "
                      "'ball <center> <radius> <mode>', got '" + spec + "'");
}

Experiment load_experiment(const Config& cfg) {
    Experiment exp;
    const std::string name = cfg.text("benchmark", "name");
    if (name == "goal_reach")
        exp.benchmark = Benchmark::goal_reach;
    else if (name == "mountain_car")
        exp.benchmark = Benchmark::mountain_car;
    else
        throw ConfigError("unknown benchmark '" + name + "'");
    exp.state_grid = cfg.grid("state_grid");
    exp.estimate_grid = cfg.grid("estimate_grid");
    const Index n = exp.state_grid.dims();
    const Index m = exp.estimate_grid.dims();
    if (exp.benchmark == Benchmark::goal_reach && (n != 2 || m != 2))
        throw ConfigError("goal_reach needs 2-D state and estimate grids");
    if (exp.benchmark == Benchmark::mountain_car && (n != 2 || m != 1))
        throw ConfigError("mountain_car needs a 2-D state grid and a 1-D estimate grid");

    exp.alpha = cfg.real("abstraction", "alpha", 0.05);
    if (!(exp.alpha > 0.0 && exp.alpha < 1.0))
        throw ConfigError("[abstraction] alpha must lie in (0, 1)");
    exp.confint.min_samples = cfg.integer("abstraction", "min_samples", 10);
    exp.forward_closure = cfg.flag("abstraction", "forward_closure", true);
    exp.unbounded_estimate_edges = cfg.flag("abstraction", "unbounded_estimate_edges", true);
    exp.use_enclosure = cfg.flag("abstraction", "enclosure", true);
    exp.refine = cfg.integer("abstraction", "refine", 1);
    if (exp.refine < 1)
        throw ConfigError("[abstraction] refine must be at least 1");
    exp.lipschitz = cfg.vector("abstraction", "lipschitz", Vector::Zero(n));
    if (exp.lipschitz.size() != n)
        throw ConfigError("[abstraction] lipschitz needs one entry per state dimension");

    const std::string kind = cfg.text("property", "kind");
    if (kind == "until") {
        exp.property.kind = BoundedProperty::Kind::until;
        exp.property.safe_label = cfg.text("property", "safe");
    } else if (kind == "eventually") {
        exp.property.kind = BoundedProperty::Kind::eventually;
    } else {
        throw ConfigError("[property] kind must be until or eventually");
    }
    exp.property.target_label = cfg.text("property", "target");
    exp.property.horizon = cfg.integer("property", "horizon");
    if (exp.property.horizon < 1)
        throw ConfigError("[property] horizon must be at least 1");

    for (const auto& key : cfg.keys("labels"))
        for (const auto& item : cfg.items("labels", key))
            exp.predicates.push_back(parse_predicate(key, item, n));
    std::set<std::string> names;
    for (const auto& p : exp.predicates)
        names.insert(p.name);
    for (std::string label : {exp.property.safe_label, exp.property.target_label}) {
        if (!label.empty() && label[0] == '!')
            label = label.substr(1);
        if (!label.empty() && !names.count(label))
            throw ConfigError("property references undefined label '" + label + "'");
    }

    for (const auto& item : cfg.items("verify", "initial_points")) {
        Vector p = parse_vector(item, "[verify] initial_points");
        if (p.size() != n)
            throw ConfigError("[verify] initial point '" + item + "' has the wrong dimension");
        exp.initial_points.push_back(p);
    }
    const std::string missing = cfg.text("verify", "missing_data", "pessimistic");
    if (missing == "pessimistic")
        exp.verify.missing_data = MissingData::pessimistic;
    else if (missing == "uniform")
        exp.verify.missing_data = MissingData::uniform;
    else
        throw ConfigError("[verify] missing_data must be pessimistic or uniform");
    exp.verify.record_policy = cfg.flag("verify", "record_policy", false);

    exp.validate.prior_value = cfg.real("validation", "prior", 1.0);
    exp.validate.num_samples = cfg.integer("validation", "num_samples", 10000);
    if (!(exp.validate.prior_value > 0.0) || exp.validate.num_samples < 1)
        throw ConfigError("[validation] prior must be positive and num_samples at least 1");
    if (cfg.has("validation", "seed"))
        exp.validate.seed = cfg.seed("validation");

    const auto threads = cfg.integer("run", "threads", 1);
    if (threads < 0)
        throw ConfigError("[run] threads must be nonnegative");
    exp.threads = unsigned(threads);
    exp.confint.threads = exp.verify.threads = exp.validate.threads = exp.threads;
    exp.timing = cfg.flag("run", "timing", false);
    exp.output_dir = cfg.text("run", "output_dir", ".");
    return exp;
}

GoalReachEnv goal_reach_env(const Config& cfg, const std::string& overlay) {
    GoalReachEnv env;
    env.waypoint = pick(cfg, overlay, "waypoint", env.waypoint);
    env.start = pick(cfg, overlay, "start", env.start);
    env.gain = pick(cfg, overlay, "gain", env.gain);
    env.step_cap = pick(cfg, overlay, "step_cap", env.step_cap);
    env.goal_radius = pick(cfg, overlay, "goal_radius", env.goal_radius);
    env.horizon = pick(cfg, overlay, "horizon", env.horizon);
    env.sigma2_min = pick(cfg, overlay, "sigma2_min", env.sigma2_min);
    env.sigma2_max = pick(cfg, overlay, "sigma2_max", env.sigma2_max);
    env.domain_upper = pick(cfg, overlay, "domain_upper", env.domain_upper);
    if (any_has(cfg, overlay, "bias"))
        env.bias = pick(cfg, overlay, "bias", env.bias);
    else
        env.bias = goal_bias(cfg, overlay, pick(cfg, overlay, "bias_distance", 0.0));
    env.validate();
    return env;
}

MountainCarEnv mountain_car_env(const Config& cfg, const std::string& overlay) {
    MountainCarEnv env;
    env.sigma = pick(cfg, overlay, "sigma", env.sigma);
    env.bias = pick(cfg, overlay, "bias", env.bias);
    env.horizon = pick(cfg, overlay, "horizon", env.horizon);
    env.goal_x = pick(cfg, overlay, "goal_x", env.goal_x);
    env.start_low = pick(cfg, overlay, "start_low", env.start_low);
    env.start_high = pick(cfg, overlay, "start_high", env.start_high);
    env.error_limit = pick(cfg, overlay, "error_limit", env.error_limit);
    env.validate();
    return env;
}

ControlLoop control_loop(const Config& cfg, const Experiment& exp) {
    if (exp.benchmark == Benchmark::goal_reach) {
        ControlLoop loop = goal_reach_loop(goal_reach_env(cfg, "environment"));
        if (!exp.use_enclosure)
            loop.displacement_enclosure = nullptr;
        loop.lipschitz = exp.lipschitz;
        return loop;
    }
    return mountain_car_loop(mountain_car_env(cfg, "environment"), exp.lipschitz, exp.use_enclosure);
}

TrajectoryDataset training_data(const Config& cfg, const Experiment& exp) {
    const std::string mode = cfg.text("train", "mode", "per_tile");
    const std::uint64_t seed = cfg.seed("train");
    if (mode == "per_tile") {
        const Index per_tile = cfg.integer("train", "samples_per_tile");
        if (exp.benchmark == Benchmark::goal_reach) {
            GoalReachEnv env = goal_reach_env(cfg, "train");
            env.seed = seed;
            return collect_per_tile(env, exp.state_grid, per_tile);
        }
        MountainCarEnv env = mountain_car_env(cfg, "train");
        env.seed = seed;
        return collect_per_tile(env, exp.state_grid, per_tile);
    }
    if (mode == "trajectories") {
        const Index n = cfg.integer("train", "num_trajectories");
        if (exp.benchmark == Benchmark::goal_reach) {
            GoalReachEnv env = goal_reach_env(cfg, "train");
            env.seed = seed;
            return simulate_goal_reach(env, n, exp.threads);
        }
        MountainCarEnv env = mountain_car_env(cfg, "train");
        env.seed = seed;
        return simulate_mountain_car(env, n, exp.threads);
    }
    throw ConfigError("[train] mode must be per_tile or trajectories");
}

TrajectoryDataset validation_data(const Config& cfg, const Experiment& exp,
                                  std::optional<double> bias_distance,
                                  std::optional<std::uint64_t> seed) {
    const Index n = cfg.integer("validation", "num_trajectories");
    const std::uint64_t s = seed ? *seed : cfg.seed("validation", "data_seed");
    if (exp.benchmark == Benchmark::goal_reach) {
        GoalReachEnv env = goal_reach_env(cfg, "validation");
        if (bias_distance)
            env.bias = goal_bias(cfg, "validation", *bias_distance);
        env.seed = s;
        return simulate_goal_reach(env, n, exp.threads);
    }
    MountainCarEnv env = mountain_car_env(cfg, "validation");
    if (bias_distance)
        env.bias = *bias_distance;
    env.seed = s;
    return simulate_mountain_car(env, n, exp.threads);
}

std::vector<Index> initial_tiles(const Experiment& exp) {
    std::vector<Index> out;
    for (const auto& p : exp.initial_points)
        out.push_back(abstract_index(p, exp.state_grid));
    return out;
}

Imdp build_structure(const Experiment& exp, const ControlLoop& loop, DynStructReport* report) {
    Imdp imdp;
    imdp.state_grid = exp.state_grid;
    imdp.estimate_grid = exp.estimate_grid;
    label_states(imdp, exp.predicates);
    DynStructOptions opt;
    if (exp.forward_closure) {
        opt.initial_states = initial_tiles(exp);
        if (opt.initial_states.empty())
            throw ConfigError("forward closure needs [verify] initial_points");
    }
    opt.unbounded_estimate_edges = exp.unbounded_estimate_edges;
    opt.refine = exp.refine;
    opt.threads = exp.threads;
    imdp.successors = dyn_struct(loop, exp.state_grid, exp.estimate_grid, opt, report);
    imdp.delta.state_grid = exp.state_grid;
    imdp.delta.estimate_grid = exp.estimate_grid;
    imdp.delta.alpha = exp.alpha;
    return imdp;
}

TransitionAudit audit_transitions(const Imdp& imdp, const TrajectoryDataset& data) {
    TransitionAudit audit;
    std::map<std::pair<Index, Index>, std::set<Index>> observed;
    for (const auto& traj : data.trajectories)
        for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
            const Index s = abstract_index(traj[t].state, imdp.state_grid);
            const Index e = abstract_index(traj[t].estimate, imdp.estimate_grid);
            const Index next = abstract_index(traj[t + 1].state, imdp.state_grid);
            ++audit.transitions;
            const auto* succ = imdp.successors_of(s, e);
            if (succ && std::binary_search(succ->begin(), succ->end(), next)) {
                ++audit.contained;
                observed[{s, e}].insert(next);
            }
        }
    double sum = 0.0;
    for (const auto& [key, real] : observed)
        sum += double(real.size()) / double(imdp.successors_of(key.first, key.second)->size());
    audit.pairs = Index(observed.size());
    audit.jaccard = observed.empty() ? 0.0 : sum / double(observed.size());
    return audit;
}

std::vector<ShiftRow> shift_table(const Config& cfg, const Experiment& exp,
                                  const IntervalTransitionFunction& delta) {
    std::vector<std::pair<double, std::uint64_t>> runs;
    std::vector<std::string> labels;
    for (double s : reals(cfg, "shift", "id_seeds")) {
        runs.emplace_back(0.0, std::uint64_t(s));
        labels.push_back("ID");
    }
    std::uint64_t ood_seed = cfg.seed("shift", "ood_seed");
    for (double d : reals(cfg, "shift", "ood_distances")) {
        runs.emplace_back(d, ood_seed++);
        labels.push_back("OOD");
    }
    std::vector<ShiftRow> out;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto data = validation_data(cfg, exp, runs[i].first, runs[i].second);
        ShiftRow row;
        row.label = labels[i];
        row.distance = runs[i].first;
        row.seed = runs[i].second;
        row.trajectories = Index(data.trajectories.size());
        Index wins = 0;
        for (const auto& o : data.metadata.outcomes)
            wins += o == kSuccess;
        row.success_rate = row.trajectories ? double(wins) / double(row.trajectories) : 0.0;
        if (row.trajectories)
            row.success_ci = clopper_pearson(wins, row.trajectories, 0.01, 1);
        row.conformance = validate(delta, exp.state_grid, exp.estimate_grid, data, exp.validate)
                              .aggregate_confidence;
        out.push_back(row);
    }
    return out;
}

std::vector<AlphaRow> alpha_tradeoff(const Experiment& exp, const Imdp& structure,
                                     const BinnedSamples& train, const TrajectoryDataset& validation,
                                     const std::vector<double>& alphas) {
    const auto tiles = initial_tiles(exp);
    if (tiles.empty())
        throw ConfigError("alpha sweep needs [verify] initial_points");
    std::vector<AlphaRow> out;
    for (const SweepRow& r : sweep_alpha(train, structure, alphas, exp.property, tiles, exp.verify)) {
        if (!out.empty() && out.back().alpha == r.alpha) {
            AlphaRow& row = out.back();
            if (r.lower_bound < row.lower_bound) {
                row.lower_bound = r.lower_bound;
                row.initial_tile = r.initial_tile;
            }
            continue;
        }
        out.push_back({r.alpha, r.initial_tile, r.lower_bound, 0.0, r.iterations, r.wallclock_ms});
    }
    for (auto& row : out) {
        const auto delta = conf_int(train, exp.state_grid, exp.estimate_grid, row.alpha, exp.confint);
        row.conformance = validate(delta, exp.state_grid, exp.estimate_grid, validation, exp.validate)
                              .aggregate_confidence;
    }
    return out;
}

std::vector<GranularityRow> granularity_sweep(const Config& cfg, const std::vector<double>& sizes) {
    std::vector<GranularityRow> out;
    for (double size : sizes) {
        Config local = cfg;
        const Grid g = cfg.grid("state_grid", size);
        for (Index d = 0; d < g.dims(); ++d)
            local.set("state_grid", "dim" + std::to_string(d),
                      fmt(g.lower()[d]) + ", " + fmt(g.upper()[d]) + ", " + fmt(size));
        const Experiment exp = load_experiment(local);
        const Imdp structure = build_structure(exp, control_loop(local, exp));
        const auto train = bin_dataset(training_data(local, exp), exp.state_grid, exp.estimate_grid);
        Imdp imdp = structure;
        imdp.delta = conf_int(train, exp.state_grid, exp.estimate_grid, exp.alpha, exp.confint);
        const auto start = std::chrono::steady_clock::now();
        const auto result = robust_value_iteration(imdp, exp.property, exp.verify);
        const double ms = elapsed_ms(start);
        GranularityRow row;
        row.tile_size = size;
        row.tiles = exp.state_grid.num_tiles();
        row.lower_bound = 1.0;
        for (Index s : initial_tiles(exp))
            row.lower_bound = std::min(row.lower_bound, initial_lower_bound(imdp, exp.property, result, s));
        row.conformance = validate(imdp.delta, exp.state_grid, exp.estimate_grid,
                                   validation_data(local, exp), exp.validate)
                              .aggregate_confidence;
        row.checking_ms = ms;
        out.push_back(row);
    }
    return out;
}

std::vector<fs::path> cmd_simulate(const Config& cfg, const CommandOptions& opt) {
    const Experiment exp = load_experiment(cfg);
    const std::string which = opt.which.empty() ? "train" : opt.which;
    TrajectoryDataset ds;
    if (which == "train")
        ds = training_data(cfg, exp);
    else if (which == "validation")
        ds = validation_data(cfg, exp);
    else
        throw ConfigError("simulate: dataset must be train or validation");
    const fs::path dir = out_dir(exp);
    const fs::path data = or_default(opt.out, dir / (which + ".jsonl"));
    save_dataset(ds, data);

    std::map<std::string, Index> outcomes;
    for (const auto& o : ds.metadata.outcomes)
        ++outcomes[o];
    json report = provenance(cfg, ds.metadata.seed);
    report["command"] = "simulate";
    report["dataset"] = which;
    report["environment"] = ds.metadata.environment;
    report["trajectories"] = ds.trajectories.size();
    report["steps"] = ds.num_steps();
    report["outcomes"] = outcomes;
    if (!ds.metadata.outcomes.empty())
        report["success_rate"] = double(outcomes[kSuccess]) / double(ds.trajectories.size());
    const fs::path rep = dir / ("simulate_" + which + ".json");
    write_json(rep, report);
    return {data, rep};
}

std::vector<fs::path> cmd_abstract(const Config& cfg, const CommandOptions& opt) {
    const Experiment exp = load_experiment(cfg);
    const fs::path dir = out_dir(exp);
    const fs::path data_path = or_default(opt.data, dir / "train.jsonl");
    const TrajectoryDataset data = load_dataset(data_path);
    if (data.num_steps() == 0)
        throw InputError("no observations in " + data_path.string());
    const BinnedSamples bins = bin_dataset(data, exp.state_grid, exp.estimate_grid);

    DynStructReport dyn;
    Imdp imdp = build_structure(exp, control_loop(cfg, exp), &dyn);
    imdp.delta = conf_int(bins, exp.state_grid, exp.estimate_grid, exp.alpha, exp.confint);

    const fs::path imdp_path = or_default(opt.out, dir / "imdp.jsonl");
    const fs::path delta_path = imdp_path.parent_path() / "delta.jsonl";
    save_imdp(imdp, imdp_path, delta_path);

    json report = provenance(cfg, data.metadata.seed);
    report["command"] = "abstract";
    report["alpha"] = exp.alpha;
    report["state_tiles"] = exp.state_grid.num_tiles();
    report["estimate_bins"] = exp.estimate_grid.num_tiles();
    report["observed_states"] = imdp.delta.rows.size();
    report["expanded_states"] = imdp.successors.size();
    report["pairs"] = dyn.pairs;
    report["transitions"] = dyn.transitions;
    report["clipped_pairs"] = dyn.clipped_pairs;
    report["repairs"] = imdp.delta.repairs;
    report["undersampled_states"] = imdp.delta.undersampled_states.size();
    report["clamped_states"] = bins.clamped_states;
    report["clamped_estimates"] = bins.clamped_estimates;
    json labels = json::object();
    for (const auto& [name, tiles] : imdp.labels)
        labels[name] = tiles.size();
    report["labels"] = labels;
    const fs::path rep = dir / "abstract_report.json";
    write_json(rep, report);
    return {imdp_path, delta_path, rep};
}

std::vector<fs::path> cmd_verify(const Config& cfg, const CommandOptions& opt) {
    const Experiment exp = load_experiment(cfg);
    const fs::path dir = out_dir(exp);
    const Imdp imdp = load_imdp(or_default(opt.imdp, dir / "imdp.jsonl"));
    if (!(imdp.state_grid == exp.state_grid) || !(imdp.estimate_grid == exp.estimate_grid))
        throw ConfigError("IMDP grids differ from the configured grids");
    const auto tiles = initial_tiles(exp);
    if (tiles.empty())
        throw ConfigError("verify needs [verify] initial_points");

    const auto start = std::chrono::steady_clock::now();
    const VerificationResult result = robust_value_iteration(imdp, exp.property, exp.verify);
    const double ms = elapsed_ms(start);

    const fs::path csv = or_default(opt.out, dir / "verify.csv");
    auto out = open_out(csv);
    out << "alpha,initial_tile,lower_bound,iterations,wallclock_ms,tile_label,x0,state_value\n";
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        std::string point;
        for (Index d = 0; d < exp.initial_points[i].size(); ++d)
            point += (d ? " " : "") + fmt(exp.initial_points[i][d]);
        out << fmt(imdp.delta.alpha) << ',' << tiles[i] << ','
            << fmt(initial_lower_bound(imdp, exp.property, result, tiles[i])) << ','
            << result.iterations_run << ',' << timing_cell(exp, ms) << ','
            << tile_text(exp.state_grid, tiles[i]) << ',' << point << ','
            << fmt(result.values[tiles[i]]) << '\n';
    }
    std::vector<fs::path> written{csv};

    json report = provenance(cfg, std::nullopt);
    report["command"] = "verify";
    report["alpha"] = imdp.delta.alpha;
    report["horizon"] = exp.property.horizon;
    report["iterations"] = result.iterations_run;
    report["states_without_data"] = result.states_without_data.size();
    report["missing_data"] = exp.verify.missing_data == MissingData::pessimistic ? "pessimistic" : "uniform";
    report["initial_convention"] = "minimum over estimate bins at the initial tile";
    if (exp.timing)
        report["wallclock_ms"] = ms;
    const fs::path rep = dir / "verify_report.json";
    write_json(rep, report);
    written.push_back(rep);

    if (exp.verify.record_policy) {
        const fs::path pol = dir / "policy.jsonl";
        auto p = open_out(pol);
        for (const auto& [s, choice] : result.worst_case_policy)
            p << json{{"s", s}, {"p", to_json(choice.distribution)}, {"succ", choice.successor}}.dump()
              << '\n';
        written.push_back(pol);
    }
    return written;
}

std::vector<fs::path> cmd_validate(const Config& cfg, const CommandOptions& opt) {
    const Experiment exp = load_experiment(cfg);
    if (!cfg.has("validation", "seed"))
        cfg.seed("validation");
    const fs::path dir = out_dir(exp);
    const IntervalTransitionFunction delta = load_delta(or_default(opt.delta, dir / "delta.jsonl"));
    const TrajectoryDataset data = load_dataset(or_default(opt.data, dir / "validation.jsonl"));
    const ConformanceReport r = validate(delta, exp.state_grid, exp.estimate_grid, data, exp.validate);

    json per_state = json::array();
    const fs::path csv = dir / "conformance.csv";
    auto out = open_out(csv);
    out << "state_tile,tile_label,samples,confidence\n";
    const BinnedSamples bins = bin_dataset(data, exp.state_grid, exp.estimate_grid);
    for (const auto& [s, c] : r.per_state_confidence) {
        const Index n = Index(bins.by_state.at(s).size());
        out << s << ',' << tile_text(exp.state_grid, s) << ',' << n << ',' << fmt(c) << '\n';
        per_state.push_back({{"state", s}, {"samples", n}, {"confidence", c}});
    }
    json report = provenance(cfg, r.seed);
    report["command"] = "validate";
    report["alpha"] = delta.alpha;
    report["aggregate_confidence"] = r.aggregate_confidence;
    report["aggregation"] = "median";
    report["min_confidence"] = r.min_confidence;
    report["mean_confidence"] = r.mean_confidence;
    report["num_samples"] = r.num_samples;
    report["prior"] = r.prior_value;
    report["states_with_data"] = r.states_with_data;
    report["states_missing_from_delta"] = r.states_missing_from_delta;
    report["states_without_data"] = r.states_without_data;
    report["clamped_steps"] = r.clamped_steps;
    report["per_state"] = per_state;
    const fs::path path = or_default(opt.out, dir / "conformance.json");
    write_json(path, report);
    return {path, csv};
}

std::vector<fs::path> cmd_sweep(const Config& cfg, const CommandOptions& opt) {
    const Experiment exp = load_experiment(cfg);
    const fs::path dir = out_dir(exp);
    const std::string which = opt.which.empty() ? "alpha" : opt.which;
    std::vector<fs::path> written;
    if (which == "alpha" || which == "all") {
        cfg.seed("validation");
        const auto alphas = reals(cfg, "sweep", "alphas");
        const Imdp structure = build_structure(exp, control_loop(cfg, exp));
        const auto train = bin_dataset(training_data(cfg, exp), exp.state_grid, exp.estimate_grid);
        const auto rows = alpha_tradeoff(exp, structure, train, validation_data(cfg, exp), alphas);
        const fs::path csv = dir / "sweep_alpha.csv";
        auto out = open_out(csv);
        out << "alpha,initial_tile,lower_bound,conformance,iterations,wallclock_ms\n";
        for (const auto& r : rows)
            out << fmt(r.alpha) << ',' << r.initial_tile << ',' << fmt(r.lower_bound) << ','
                << fmt(r.conformance) << ',' << r.iterations << ',' << timing_cell(exp, r.wallclock_ms)
                << '\n';
        written.push_back(csv);
    }
    if (which == "granularity" || which == "all") {
        cfg.seed("validation");
        const auto rows = granularity_sweep(cfg, reals(cfg, "sweep", "tile_sizes"));
        const fs::path csv = dir / "sweep_granularity.csv";
        auto out = open_out(csv);
        out << "tile_size,tiles,lower_bound,conformance,checking_ms\n";
        for (const auto& r : rows)
            out << fmt(r.tile_size) << ',' << r.tiles << ',' << fmt(r.lower_bound) << ','
                << fmt(r.conformance) << ',' << timing_cell(exp, r.checking_ms) << '\n';
        written.push_back(csv);
    }
    if (which == "shift" || which == "all") {
        cfg.seed("validation");
        const auto train = bin_dataset(training_data(cfg, exp), exp.state_grid, exp.estimate_grid);
        const auto delta = conf_int(train, exp.state_grid, exp.estimate_grid, exp.alpha, exp.confint);
        const double threshold = cfg.real("shift", "threshold", 0.25);
        const fs::path csv = dir / "sweep_shift.csv";
        auto out = open_out(csv);
        out << "case,distance,seed,trajectories,success_rate,ci_lo,ci_hi,conformance,classified\n";
        for (const auto& r : shift_table(cfg, exp, delta))
            out << r.label << ',' << fmt(r.distance) << ',' << r.seed << ',' << r.trajectories << ','
                << fmt(r.success_rate) << ',' << fmt(r.success_ci.lo) << ',' << fmt(r.success_ci.hi)
                << ',' << fmt(r.conformance) << ',' << (r.conformance >= threshold ? "ID" : "OOD")
                << '\n';
        written.push_back(csv);
    }
    if (written.empty())
        throw ConfigError("sweep: kind must be alpha, granularity, shift or all");
    json report = provenance(cfg, exp.validate.seed);
    report["command"] = "sweep";
    report["kind"] = which;
    json files = json::array();
    for (const auto& w : written)
        files.push_back(w.filename().string());
    report["files"] = files;
    const fs::path rep = dir / ("sweep_" + which + ".json");
    write_json(rep, report);
    written.push_back(rep);
    return written;
}

std::vector<fs::path> cmd_export(const Config& cfg, const CommandOptions& opt) {
    const Experiment exp = load_experiment(cfg);
    const fs::path dir = out_dir(exp);
    const Imdp imdp = load_imdp(or_default(opt.imdp, dir / "imdp.jsonl"));
    const fs::path model = or_default(opt.out, dir / "model.prism");
    fs::path props = model;
    props.replace_extension(".props");
    const ExportReport r = export_prism(imdp, exp.property, initial_tiles(exp), model, props);
    json report = provenance(cfg, std::nullopt);
    report["command"] = "export";
    report["states"] = r.states;
    report["commands"] = r.commands;
    report["branches"] = r.branches;
    report["imdp_transitions"] = imdp.num_transitions();
    report["horizon_steps"] = 2 * exp.property.horizon;
    const fs::path rep = dir / "export_report.json";
    write_json(rep, report);
    return {model, props, rep};
}

} // namespace imdpv
