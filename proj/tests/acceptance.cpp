// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "oracles.hpp"

#include "imdpv/confint.hpp"
#include "imdpv/pipeline.hpp"
#include "imdpv/validator.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <sys/wait.h>

using namespace imdpv;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = IMDPV_CONFIG_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

Config load(const std::string& name) { return Config::load(kConfigs / name, {}, false); }

Grid line(Index k) {
    Vector lo(1), hi(1), w(1);
    lo << 0;
    hi << double(k);
    w << 1;
    return Grid(lo, hi, w);
}

Index draw(Rng& rng, const Eigen::VectorXd& p) {
    double u = rng.uniform();
    Index e = 0;
    while (e + 1 < p.size() && u >= p[e])
        u -= p[e++];
    return e;
}

std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]])
            ++j;
        for (std::size_t k = i; k <= j; ++k)
            r[order[k]] = 0.5 * double(i + j) + 1.0;
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const auto rx = ranks(x), ry = ranks(y);
    const double n = double(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxx > 0 && syy > 0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

Outcome cp_coverage() {
    const int n = 100, regenerations = 10000;
    Rng rng(1001);
    int covered = 0;
    for (int r = 0; r < regenerations; ++r) {
        int k = 0;
        for (int i = 0; i < n; ++i)
            k += rng.uniform() < 0.3;
        covered += clopper_pearson(k, n, 0.05, 1).contains(0.3);
    }
    const double c = double(covered) / regenerations;
    return {c >= 0.94, fmt("coverage %.4f (>= 0.94)", c)};
}

Outcome joint_coverage() {
    const Eigen::VectorXd p = (Eigen::VectorXd(5) << 0.35, 0.25, 0.2, 0.15, 0.05).finished();
    const int regenerations = 5000;
    Rng rng(1002);
    int covered = 0;
    for (int r = 0; r < regenerations; ++r) {
        BinnedSamples b;
        b.num_estimate_bins = 5;
        auto& bins = b.by_state[0];
        for (int i = 0; i < 200; ++i)
            bins.push_back(draw(rng, p));
        const IntervalRow row = conf_int(b, line(1), line(5), 0.05).rows.at(0);
        bool all = true;
        for (Index e = 0; e < 5; ++e)
            all = all && row[e].contains(p[e]);
        covered += all;
    }
    const double c = double(covered) / regenerations;
    return {c >= 0.93, fmt("joint coverage %.4f (>= 0.93)", c)};
}

Outcome abstraction_soundness() {
    const Config cfg = load("goal_reach.ini");
    const Experiment exp = load_experiment(cfg);
    const Imdp imdp = build_structure(exp, control_loop(cfg, exp));
    const TrajectoryDataset data = validation_data(cfg, exp);
    const TransitionAudit a = audit_transitions(imdp, data);
    const bool ok = data.trajectories.size() == 1000 && a.transitions > 0 && a.contained == a.transitions &&
                    a.jaccard >= 0.05 && a.jaccard <= 0.6;
    return {ok, fmt("%.0f/%.0f transitions contained, Jaccard %.4f (in [0.05, 0.6])", double(a.contained),
                    double(a.transitions), a.jaccard)};
}

Outcome value_iteration_brute_force() {
    Rng rng(1004);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const Imdp imdp = oracle::random_imdp(rng);
        BoundedProperty p;
        p.kind = rng.uniform() < 0.5 ? BoundedProperty::Kind::until : BoundedProperty::Kind::eventually;
        p.safe_label = "!bad";
        p.target_label = "goal";
        p.horizon = 1 + Index(rng.uniform() * 5);
        const auto r = robust_value_iteration(imdp, p);
        worst = std::max(worst, (r.values - oracle::brute_force_values(imdp, p)).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-6, fmt("max deviation %.2e over 200 IMDPs (<= 1e-6)", worst)};
}

Outcome greedy_vs_grid() {
    Rng rng(1005);
    double worst = 0.0;
    int checked = 0;
    while (checked < 500) {
        const Index n = 1 + Index(rng.uniform() * 5);
        Eigen::VectorXd lo, hi, values(n);
        oracle::random_intervals(rng, n, lo, hi);
        for (Index i = 0; i < n; ++i)
            values[i] = rng.uniform();
        const double g = oracle::grid_minimum(values, lo, hi);
        if (std::isnan(g))
            continue;
        worst = std::max(worst, std::abs(worst_case_expectation(values, lo, hi) - g));
        ++checked;
    }
    return {worst <= 2e-3, fmt("max deviation %.2e over 500 instances (<= 2e-3)", worst)};
}

Outcome shift_discrimination() {
    const Config cfg = load("goal_reach_shift.ini");
    const Experiment exp = load_experiment(cfg);
    const auto train = bin_dataset(training_data(cfg, exp), exp.state_grid, exp.estimate_grid);
    const auto delta = conf_int(train, exp.state_grid, exp.estimate_grid, exp.alpha, exp.confint);
    const auto rows = shift_table(cfg, exp, delta);
    bool ok = rows.size() == 7;
    double id_min = 1.0, ood_max = 0.0;
    int correct = 0;
    for (const auto& r : rows) {
        ok = ok && r.trajectories == 200;
        if (r.label == "ID")
            id_min = std::min(id_min, r.conformance);
        else
            ood_max = std::max(ood_max, r.conformance);
        correct += (r.conformance >= 0.25) == (r.label == "ID");
    }
    ok = ok && id_min >= 0.5 && ood_max <= 0.05 && correct == 7;
    return {ok, fmt("ID min %.4f (>= 0.5), OOD max %.4f (<= 0.05), %.0f/7 classified", id_min, ood_max, correct)};
}

Outcome tradeoff_trends() {
    const Config cfg = load("goal_reach_verify.ini");
    const Experiment exp = load_experiment(cfg);
    const Imdp structure = build_structure(exp, control_loop(cfg, exp));
    const auto train = bin_dataset(training_data(cfg, exp), exp.state_grid, exp.estimate_grid);
    const std::vector<double> alphas{0.001, 0.003, 0.01, 0.03, 0.1, 0.3};
    const auto rows = alpha_tradeoff(exp, structure, train, validation_data(cfg, exp), alphas);
    std::vector<double> a, safety, conf;
    for (const auto& r : rows) {
        a.push_back(r.alpha);
        safety.push_back(r.lower_bound);
        conf.push_back(r.conformance);
    }
    const double rs = spearman(a, safety), rc = spearman(a, conf);
    return {rs >= 0.8 && rc <= -0.8,
            fmt("rho(alpha, 1-beta) %.3f (>= 0.8), rho(alpha, 1-gamma) %.3f (<= -0.8)", rs, rc)};
}

Outcome diagonal_trend() {
    Config cfg = load("goal_reach_verify.ini");
    cfg.set("verify.initial_points=0, 0 | 2.5, 2.5 | 5, 5 | 7.5, 7.5");
    const Experiment exp = load_experiment(cfg);
    Imdp imdp = build_structure(exp, control_loop(cfg, exp));
    imdp.delta = conf_int(bin_dataset(training_data(cfg, exp), exp.state_grid, exp.estimate_grid),
                          exp.state_grid, exp.estimate_grid, exp.alpha, exp.confint);
    const auto result = robust_value_iteration(imdp, exp.property, exp.verify);
    std::vector<double> b;
    for (Index s : initial_tiles(exp))
        b.push_back(initial_lower_bound(imdp, exp.property, result, s));
    bool ok = b.size() == 4;
    for (std::size_t i = 1; i < b.size(); ++i)
        ok = ok && b[i] >= b[i - 1];
    return {ok, fmt("bounds %.4f <= %.4f <= %.4f <= %.4f", b[0], b[1], b[2], b[3])};
}

Outcome soundness_rate() {
    // A = 0, B = 1, goal = 2; per bin: A -> {goal, B, A}, B -> {goal, A, B}
    const Eigen::Vector3d pa(0.5, 0.3, 0.2), pb(0.4, 0.4, 0.2);
    const Index horizon = 4;
    Eigen::Vector3d v(0, 0, 1);
    for (Index k = 0; k < horizon; ++k)
        v = Eigen::Vector3d(pa[0] * v[2] + pa[1] * v[1] + pa[2] * v[0], pb[0] * v[2] + pb[1] * v[0] + pb[2] * v[1], 1);
    const double truth = v[0];

    Imdp imdp;
    imdp.state_grid = line(3);
    imdp.estimate_grid = line(3);
    imdp.successors[0] = SuccessorRow{{2}, {1}, {0}};
    imdp.successors[1] = SuccessorRow{{2}, {0}, {1}};
    imdp.labels["goal"] = {2};
    const BoundedProperty prop{BoundedProperty::Kind::eventually, "", "goal", horizon};

    Rng rng(1009);
    const int runs = 500;
    int violations = 0;
    for (int r = 0; r < runs; ++r) {
        TrajectoryDataset data;
        for (Index s : {0, 1}) {
            Trajectory tr;
            for (Index t = 0; t < 100; ++t) {
                Vector state(1), est(1);
                state << double(s) + 0.5;
                est << double(draw(rng, s == 0 ? Eigen::VectorXd(pa) : Eigen::VectorXd(pb))) + 0.5;
                tr.push_back({t, state, est});
            }
            data.trajectories.push_back(tr);
        }
        imdp.delta = conf_int(data, imdp.state_grid, imdp.estimate_grid, 0.1);
        const auto result = robust_value_iteration(imdp, prop);
        violations += truth < result.values[0];
    }
    const double rate = double(violations) / runs;
    return {rate <= 0.13, fmt("violation rate %.4f (<= 0.13), true probability %.4f", rate, truth)};
}

Outcome dirichlet_exact() {
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(11);
    counts.head(5) << 0, 3, 7, 11, 7;
    const Eigen::VectorXd post = dirichlet_update(Eigen::VectorXd::Ones(11), counts);
    const double expect[11] = {1, 4, 8, 12, 8, 1, 1, 1, 1, 1, 1};
    bool ok = post.size() == 11;
    for (Index i = 0; ok && i < 11; ++i)
        ok = post[i] == expect[i];
    return {ok, "posterior {1,4,8,12,8,1,...,1} reproduced bit-exactly"};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out[entry.path().filename().string()] = ss.str();
    }
    return out;
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "imdpv_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string base = std::string(IMDPV_CLI) + " -c " + (kConfigs / "goal_reach.ini").string() +
                             " --set run.output_dir=" + dir.string();
    const std::vector<std::string> commands{"simulate --which train", "simulate --which validation", "abstract",
                                            "verify", "validate", "sweep --which all", "export"};
    std::map<std::string, std::string> first;
    for (int round = 0; round < 2; ++round) {
        for (const auto& c : commands) {
            const std::string cmd = base + " " + c + " >/dev/null 2>&1";
            const int status = std::system(cmd.c_str());
            if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
                return {false, "command failed: " + c};
        }
        if (round == 0)
            first = snapshot(dir);
    }
    const auto second = snapshot(dir);
    std::size_t differing = 0;
    for (const auto& [name, bytes] : first)
        differing += !second.count(name) || second.at(name) != bytes;
    const bool ok = first.size() >= 15 && first.size() == second.size() && differing == 0;
    return {ok, fmt("%.0f output files, %.0f differ between runs", double(first.size()), double(differing))};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "Clopper-Pearson coverage", 10, cp_coverage},
        {2, "simultaneous interval coverage", 30, joint_coverage},
        {3, "abstraction soundness", 120, abstraction_soundness},
        {4, "value iteration vs brute force", 60, value_iteration_brute_force},
        {5, "greedy inner problem vs grid", 30, greedy_vs_grid},
        {6, "ID/OOD discrimination", 180, shift_discrimination},
        {7, "alpha tradeoff trends", 600, tradeoff_trends},
        {8, "diagonal bound ordering", 300, diagonal_trend},
        {9, "statistical soundness check", 300, soundness_rate},
        {10, "Dirichlet update exactness", 1e9, dirichlet_exact},
        {11, "determinism", 1e9, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = s <= c.limit_s;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("criterion %2d %s  %s: %s [%.1f s%s]\n", c.id, pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), s,
                    in_time ? "" : ", over time limit");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
