// Acceptance checks on the desk profile. Prints one PASS/FAIL line per
// criterion and exits non-zero if any fails.
//
//   acceptance [--cache-dir DIR] [--only 1,2,...]
//
// With --cache-dir, finished desk runs are stored there and reused when the
// stored config matches; without it every run is computed fresh.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "evoprune/analysis.hpp"
#include "evoprune/evolution.hpp"
#include "evoprune/experiments.hpp"
#include "evoprune/format.hpp"
#include "evoprune/maze.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace evoprune;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

int shell(const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---------------------------------------------------------------------------
// Desk runs, optionally cached on disk.

class Runs {
public:
    explicit Runs(std::optional<fs::path> cache) : cache_(std::move(cache)) {}

    const RunRecord& get(const ExperimentConfig& config, std::uint64_t seed) {
        const std::string key = config_to_text(config) + "#" + std::to_string(seed);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;

        std::optional<fs::path> dir;
        if (cache_) {
            dir = *cache_ / slug(config.name) / ("n" + std::to_string(config.n_neurons)) /
                  ("seed_" + std::to_string(seed));
            if (fs::exists(*dir / "run.json")) {
                auto stored = read_run(*dir);
                if (stored.completed && stored.config == config && stored.run_seed == seed) {
                    std::cerr << "  reuse " << config.name << " n=" << config.n_neurons << " seed " << seed << "\n";
                    return memo_.emplace(key, std::move(stored)).first->second;
                }
            }
        }
        const auto t0 = std::chrono::steady_clock::now();
        RunOptions opts;
        opts.out_dir = dir;
        auto record = run_single(config, seed, opts);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cerr << "  ran " << config.name << " n=" << config.n_neurons << " seed " << seed << " in " << fmt(secs)
                  << " s: best perf " << fmt(record.metrics.front().best_train_perf) << " -> "
                  << fmt(record.metrics.back().best_train_perf) << ", sparsity " << fmt(record.metrics.back().mean_sparsity)
                  << ", validation " << fmt(record.final_validation().overall) << "\n";
        return memo_.emplace(key, std::move(record)).first->second;
    }

private:
    std::optional<fs::path> cache_;
    std::map<std::string, RunRecord> memo_;
};

ExperimentConfig connect_arm(double p_connect) {
    auto c = table1_config("connection severance");
    c.p_connect = p_connect;
    if (p_connect != c.p_disconnect) c.name = "connection severance [sweep]";
    return c;
}

// ---------------------------------------------------------------------------

Verdict determinism(const std::string& cli) {
    const auto dir = fs::temp_directory_path() / "evoprune_acceptance_det";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string bin = "'" + cli + "'";
    const std::string cd = "cd '" + dir.string() + "' && ";
    const std::string train = " train --experiment 'connection severance' --pool-size 40 --generations 20 --seed 7";
    std::vector<std::string> failures;
    auto run = [&](const std::string& args) {
        if (shell(cd + bin + args) != 0) failures.push_back("command failed:" + args);
    };
    run(train + " --threads 1 --out-dir a");
    run(train + " --threads 1 --out-dir b");
    run(train + " --threads 8 --out-dir c");
    run(" sweep --axis p-connect --values 0,0.1 --experiment 'connection severance' --pool-size 20 --generations 5"
        " --seed 3 --threads 1 --out-dir s1");
    run(" sweep --axis p-connect --values 0,0.1 --experiment 'connection severance' --pool-size 20 --generations 5"
        " --seed 3 --threads 8 --out-dir s8");
    const std::string genome = "a/connection_severance/seed_7/best_genome.json";
    run(" replay --genome " + genome + " --maze 2003 --out t1.tsv");
    run(" replay --genome " + genome + " --maze 2003 --out t2.tsv");
    run(" generate-maze --seed 5 --out m1.json");
    run(" generate-maze --seed 5 --out m2.json");

    auto same = [&](const fs::path& x, const fs::path& y) {
        try {
            if (read_file((dir / x).string()) != read_file((dir / y).string()))
                failures.push_back(x.string() + " != " + y.string());
        } catch (const std::exception& e) {
            failures.push_back(e.what());
        }
    };
    const fs::path run_dir = "connection_severance/seed_7";
    for (const char* f : {"metrics.csv", "validation.csv", "final_population.json", "best_genome.json"}) {
        same(fs::path("a") / run_dir / f, fs::path("b") / run_dir / f);
        same(fs::path("a") / run_dir / f, fs::path("c") / run_dir / f);
    }
    for (const char* arm : {"p_connect_0", "p_connect_0.1"})
        same(fs::path("s1/connection_severance") / arm / "seed_3/metrics.csv",
             fs::path("s8/connection_severance") / arm / "seed_3/metrics.csv");
    same("t1.tsv", "t2.tsv");
    same("m1.json", "m2.json");
    fs::remove_all(dir);
    if (!failures.empty()) return {false, failures.front()};
    return {true, "train x3 (threads 1/1/8), sweep (threads 1/8), replay x2, generate-maze x2 byte-identical"};
}

Verdict oracle_equivalence() {
    constexpr int kInstances = 10000;
    std::mt19937_64 gen(20240601);
    std::vector<std::string> failures;
    auto fail = [&](const std::string& what) {
        if (failures.size() < 3) failures.push_back(what);
    };

    // smr
    {
        std::uniform_int_distribution<int> len(1, 12);
        std::uniform_real_distribution<double> d(0.0, 399.0);
        int bad = 0;
        for (int k = 0; k < kInstances; ++k) {
            std::vector<double> v(static_cast<std::size_t>(len(gen)));
            for (auto& x : v) x = k % 2 ? std::floor(d(gen)) : d(gen);
            const double got = smr(v), want = oracle::smr(v);
            if (std::abs(got - want) > 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, want)) ++bad;
        }
        if (bad) fail("smr: " + std::to_string(bad) + " mismatches");
    }
    // sense
    {
        int checked = 0, bad = 0;
        for (std::uint64_t seed = 500; checked < kInstances; ++seed) {
            const Maze m = generate_maze(seed);
            std::uniform_int_distribution<int> xs(0, m.width() - 1), ys(0, m.height() - 1), hs(0, 3);
            for (int k = 0; k < 400; ++k) {
                const int x = xs(gen), y = ys(gen), h = hs(gen);
                if (m.is_wall(x, y)) continue;
                const auto got = sense(m, {x, y, static_cast<Heading>(h)});
                const auto want = oracle::sense(m, x, y, h);
                if (got.front != want.front || got.left != want.left || got.right != want.right ||
                    got.compass[h] != 1.0)
                    ++bad;
                ++checked;
            }
        }
        if (bad) fail("sense: " + std::to_string(bad) + " mismatches");
    }
    // select_action, alone and through the forward pass
    {
        int bad = 0;
        std::uniform_int_distribution<int> pick(0, 4), range(0, 10), heading(0, 3);
        std::uniform_real_distribution<double> act(0.0, 2.0);
        for (int k = 0; k < kInstances; ++k) {
            std::vector<double> out(3);
            // a coarse grid gives plenty of ties and all-zero vectors
            for (auto& v : out) v = pick(gen) * 0.25;
            if (static_cast<int>(select_action(out)) != oracle::argmax_first(out)) ++bad;

            const auto g = testing::random_genome(gen, 16, 0.3);
            SensorReading sensors;
            sensors.front = range(gen);
            sensors.left = range(gen);
            sensors.right = range(gen);
            const int h = heading(gen);
            sensors.compass[h] = 1.0;
            std::vector<double> state(16);
            for (auto& v : state) v = act(gen);
            const auto step = forward_step(g, state, sensors);
            auto clamped = state;
            clamped[0] = sensors.front;
            clamped[1] = sensors.left;
            clamped[2] = sensors.right;
            for (int c = 0; c < 4; ++c) clamped[3 + c] = c == h ? 1.0 : 0.0;
            clamped[kBiasIndex] = 1.0;
            const auto next = oracle::relu_matvec(g, clamped);
            const std::vector<double> outs(next.begin() + kOutputBegin, next.begin() + kOutputBegin + kOutputCount);
            if (static_cast<int>(step.action) != oracle::argmax_first(outs)) ++bad;
        }
        if (bad) fail("select_action: " + std::to_string(bad) + " mismatches");
    }
    // reproduction probabilities
    {
        int bad = 0;
        std::uniform_int_distribution<int> size(20, 120);
        std::lognormal_distribution<double> heavy(0.0, 2.0);
        std::normal_distribution<double> mixed(0.0, 50.0);
        for (int k = 0; k < kInstances; ++k) {
            std::vector<double> f(static_cast<std::size_t>(size(gen)));
            for (auto& v : f) v = k % 2 ? heavy(gen) : mixed(gen);
            const auto p = reproduction_probabilities(f);
            std::vector<std::size_t> order(f.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return f[x] > f[y]; });
            const std::size_t top = f.size() / 2;
            const double lowest = f[order[top - 1]];
            std::vector<double> w;
            for (std::size_t r = 0; r < top; ++r) w.push_back(f[order[r]] - std::min(0.0, lowest));
            const auto want = oracle::capped_shares(w, 0.1);
            double sum = 0.0;
            bool ok = true;
            for (double v : p) sum += v;
            ok = ok && std::abs(sum - 1.0) <= 1e-12;
            for (std::size_t r = 0; r < top; ++r)
                ok = ok && std::abs(p[order[r]] - want[r]) <= 1e-9 * std::max(1e-3, want[r]);
            for (std::size_t r = top; r < f.size(); ++r) ok = ok && p[order[r]] == 0.0;
            bad += !ok;
        }
        if (bad) fail("reproduction_probabilities: " + std::to_string(bad) + " mismatches");
    }
    // rank correlation
    {
        int bad = 0;
        std::uniform_int_distribution<int> size(2, 60), coarse(0, 6);
        std::normal_distribution<double> fine(0.0, 1.0);
        for (int k = 0; k < kInstances; ++k) {
            const auto n = static_cast<std::size_t>(size(gen));
            std::vector<double> x(n), y(n);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = k % 2 ? coarse(gen) : fine(gen);
                y[i] = k % 3 ? coarse(gen) : x[i] + fine(gen);
            }
            const double got = rank_correlation(x, y), want = oracle::kendall_tau_b(x, y);
            if (std::abs(got - want) > 1e-12) ++bad;
        }
        if (bad) fail("rank_correlation: " + std::to_string(bad) + " mismatches");
    }
    // connected components
    {
        int bad = 0;
        std::uniform_real_distribution<double> density(0.0, 0.25), w(-1.0, 1.0);
        std::uniform_int_distribution<int> size(11, 20);
        for (int k = 0; k < kInstances; ++k) {
            auto g = testing::zero_genome(size(gen));
            std::bernoulli_distribution keep(density(gen));
            for (int i = 0; i < g.n; ++i)
                for (int j = 0; j < g.n; ++j)
                    if (keep(gen)) g.weights(i, j) = w(gen);
            if (subnetwork_components(g).label != oracle::flood_fill(g)) ++bad;
        }
        if (bad) fail("components: " + std::to_string(bad) + " mismatches");
    }
    if (!failures.empty()) return {false, failures.front()};
    return {true, "smr, sense, select_action, reproduction_probabilities, rank_correlation, components: "
                  "10000 instances each, no mismatch"};
}

Verdict learning(Runs& runs, const std::vector<std::uint64_t>& seeds) {
    std::string detail;
    bool pass = true;
    for (const auto& name : table1_names()) {
        if (name == "connection severance no mut") continue;
        double first = 0.0, last = 0.0;
        double worst = std::numeric_limits<double>::infinity();
        for (auto s : seeds) {
            const auto& r = runs.get(table1_config(name), s);
            first += r.metrics.front().best_train_perf;
            last += r.metrics.back().best_train_perf;
            worst = std::min(worst, r.metrics.back().best_train_perf / r.metrics.front().best_train_perf);
        }
        const double ratio = last / first;
        pass = pass && ratio >= 3.0;
        detail += name + " x" + fmt(ratio, 3) + " (worst seed x" + fmt(worst, 3) + "); ";
    }
    return {pass, detail};
}

Verdict sparsification(Runs& runs, const std::vector<std::uint64_t>& seeds) {
    int sparse = 0, monotone = 0;
    std::string detail = "mean sparsity";
    for (auto s : seeds) {
        const auto& r = runs.get(table1_config("connection severance"), s);
        const double sp = r.metrics.back().mean_sparsity;
        sparse += sp > 0.05;
        detail += " " + fmt(sp, 3);
        const auto& arm = runs.get(connect_arm(0.0), s);
        bool ok = true;
        for (std::size_t g = 1; g < arm.metrics.size(); ++g)
            ok = ok && arm.metrics[g].min_sparsity >= arm.metrics[g - 1].min_sparsity;
        monotone += ok;
    }
    const int need = (2 * static_cast<int>(seeds.size()) + 2) / 3;
    detail += "; seeds > 0.05: " + std::to_string(sparse) + "/" + std::to_string(seeds.size()) +
              "; p_connect=0 densest-agent count non-increasing: " + std::to_string(monotone) + "/" +
              std::to_string(seeds.size());
    return {sparse >= need && monotone >= need, detail};
}

Verdict generalization(Runs& runs, const std::vector<std::uint64_t>& seeds) {
    std::vector<RunRecord> pool;
    for (const auto& name : table1_names()) {
        if (name == "connection severance no mut") continue;
        for (auto s : seeds) pool.push_back(runs.get(table1_config(name), s));
    }
    const auto r = sparsity_vs_validation(pool);
    return {r.coefficient > 0.0, "tau_b over " + std::to_string(pool.size()) + " runs = " + fmt(r.coefficient)};
}

Verdict connect_ratio(Runs& runs, const std::vector<std::uint64_t>& seeds) {
    int ok = 0;
    std::string detail;
    for (auto s : seeds) {
        double best_low = -1.0;
        for (double p : {0.0, 0.001, 0.01}) best_low = std::max(best_low, runs.get(connect_arm(p), s).final_validation().overall);
        const double high = runs.get(connect_arm(0.1), s).final_validation().overall;
        ok += best_low >= high;
        detail += "seed " + std::to_string(s) + ": " + fmt(best_low) + " vs " + fmt(high) + "; ";
    }
    const int need = (2 * static_cast<int>(seeds.size()) + 2) / 3;
    return {ok >= need, detail + std::to_string(ok) + "/" + std::to_string(seeds.size()) + " seeds"};
}

Verdict prune_robustness(Runs& runs, const std::vector<std::uint64_t>& seeds) {
    bool pass = true;
    std::string detail;
    for (auto s : seeds) {
        auto budget = [&](const ExperimentConfig& c) {
            const auto& r = runs.get(c, s);
            const auto mazes = make_mazes(c.validation_maze_seeds, c.maze);
            const auto& g = r.best_genome();
            return prune_budget(threshold_prune_curve(g, mazes, prune_thresholds(g), c.episode_options()), 0.05);
        };
        const auto sev = budget(table1_config("connection severance"));
        const auto ctl = budget(table1_config("control"));
        const bool ok = sev.removed_fraction >= 0.2 && sev.remaining < ctl.remaining;
        pass = pass && ok;
        detail += "seed " + std::to_string(s) + ": severance removes " + fmt(100 * sev.removed_fraction, 3) +
                  "% (left " + std::to_string(sev.remaining) + "), control left " + std::to_string(ctl.remaining) +
                  "; ";
    }
    return {pass, detail};
}

Verdict invariant_suite(const std::string& unit_tests) {
    const int rc = shell("'" + unit_tests + "'");
    return {rc == 0, rc == 0 ? "unit_tests property suite passed" : "unit_tests exit code " + std::to_string(rc)};
}

Verdict size_floor(Runs& runs, const std::vector<std::uint64_t>& seeds) {
    int ok = 0;
    std::string detail;
    for (auto s : seeds) {
        auto small = table1_config("control");
        small.n_neurons = 11;
        const double p11 = runs.get(small, s).metrics.back().best_train_perf;
        const double p16 = runs.get(table1_config("control"), s).metrics.back().best_train_perf;
        ok += p11 < 0.5 * p16;
        detail += "seed " + std::to_string(s) + ": " + fmt(p11) + " vs " + fmt(p16) + "; ";
    }
    const int need = (2 * static_cast<int>(seeds.size()) + 2) / 3;
    return {ok >= need, detail + std::to_string(ok) + "/" + std::to_string(seeds.size()) + " seeds"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-profile acceptance checks"};
    std::string cache;
    std::vector<int> only;
    app.add_option("--cache-dir", cache, "reuse finished desk runs stored here");
    app.add_option("--only", only, "criteria to run")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    Runs runs(cache.empty() ? std::nullopt : std::optional<fs::path>(cache));
    const auto seeds = table1_config("control").run_seeds;
    const std::set<int> selected(only.begin(), only.end());

    const std::vector<std::pair<int, std::function<Verdict()>>> criteria{
        {1, [] { return determinism(EVOPRUNE_CLI); }},
        {2, [] { return oracle_equivalence(); }},
        {8, [] { return invariant_suite(UNIT_TESTS); }},
        {3, [&] { return learning(runs, seeds); }},
        {4, [&] { return sparsification(runs, seeds); }},
        {5, [&] { return generalization(runs, seeds); }},
        {6, [&] { return connect_ratio(runs, seeds); }},
        {7, [&] { return prune_robustness(runs, seeds); }},
        {9, [&] { return size_floor(runs, seeds); }},
    };
    bool all = true;
    for (const auto& [id, check] : criteria) {
        if (!selected.empty() && !selected.contains(id)) continue;
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        all = all && v.pass;
        std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << " - " << v.detail << std::endl;
    }
    return all ? 0 : 1;
}
