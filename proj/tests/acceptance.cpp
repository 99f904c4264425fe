// End-to-end acceptance checks for the counterfactual pipeline. Each
// criterion prints one [PASS]/[FAIL] line; the process exits 1 if any
// criterion fails. argv[1] must name the CLI binary (used by criterion 7).

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sepcf/fidelity.hpp"
#include "sepcf/genetic.hpp"
#include "sepcf/ingest.hpp"
#include "sepcf/metrics.hpp"
#include "sepcf/reconstruct.hpp"
#include "sepcf/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Pinned tolerances and limits.
constexpr double kSliceTolerance = 1e-9;    // criterion 6 slice-mean match
constexpr double kProximityRatio = 0.5;     // criterion 3 DTW ratio bar
constexpr double kUnchangedFloor = 0.90;    // criterion 4 sparsity bar
constexpr double kAccuracyFloor = 0.9;      // criterion 9 held-out accuracy
constexpr double kTssFloor = 0.8;           // criterion 9 held-out TSS
// Criterion 8 slack: final populations carry fresh, not-yet-selected children
// whose ordering violations are mutation churn, independent of the penalty
// weight. The churn floor measures ~0.02 violations per candidate with
// seed-to-seed spread well under 0.01, so this tolerance treats flat-at-floor
// means as non-increasing while a backwards-wired penalty (which rewards
// violations and drives the mean up by an order of magnitude) still fails.
constexpr double kMonotoneTolerance = 0.01;
constexpr double kGenerationTimeLimit = 120.0;  // criterion 1 runtime budget
constexpr double kDtwOracleTimeLimit = 30.0;    // criterion 5 runtime budget

struct Criterion {
    int id = 0;
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

// ---------------------------------------------------------------------------
// Shared benchmark fixture: seed-fixed synthetic dataset, 100 events,
// 20 held-out test instances, fitted spec and trained forest.
// ---------------------------------------------------------------------------

struct Bench {
    sepcf::WindowGrid grid;
    sepcf::ChannelLayout layout;
    std::vector<sepcf::FeatureVector> train;
    std::vector<sepcf::FeatureVector> test;
    sepcf::PhysicsSpec spec;
    sepcf::ForestModel model;
};

Bench make_bench() {
    sepcf::SyntheticConfig cfg;  // 50 SEP + 50 quiet events of 72 samples
    cfg.seed = 42;
    const auto data = sepcf::generate_synthetic(cfg);
    Bench b{sepcf::WindowGrid::sliding(72, 6, 6), {}, {}, {}, {}, {}};
    const auto vectors = sepcf::event_feature_vectors(data.series, data.catalog, b.grid);
    std::vector<int> labels;
    for (const auto& v : vectors) labels.push_back(v.label.value_or(sepcf::kLabelNonSep));
    const auto split = sepcf::split_event_indices(labels, 0.2, 42);
    for (std::size_t i : split.train) b.train.push_back(vectors[i]);
    for (std::size_t i : split.test) b.test.push_back(vectors[i]);
    b.layout = sepcf::ChannelLayout{data.series.channels(), b.grid.count(),
                                    data.series.channel_names()};
    b.spec = sepcf::fit_spec(b.train, b.layout);
    b.model = sepcf::train_forest(b.train, sepcf::ForestHyperparams{}, 42);
    return b;
}

// Mean per-channel DTW between the query's and each candidate's window
// sequences, averaged over channels and candidates (the benchmark metric).
double set_mean_dtw(const sepcf::CounterfactualSet& set, const sepcf::ChannelLayout& layout) {
    const std::size_t W = layout.windows;
    std::vector<double> q(W), p(W);
    double total = 0.0;
    for (const auto& cand : set.candidates) {
        double channel_sum = 0.0;
        for (std::size_t i = 0; i < layout.channels; ++i) {
            for (std::size_t j = 0; j < W; ++j) {
                q[j] = set.query.values[layout.feature_index(i, j)];
                p[j] = cand.features.values[layout.feature_index(i, j)];
            }
            channel_sum += sepcf::dtw(q, p);
        }
        total += channel_sum / static_cast<double>(layout.channels);
    }
    return total / static_cast<double>(set.candidates.size());
}

double set_mean_unchanged(const sepcf::CounterfactualSet& set, const sepcf::Normalizer& norm) {
    const double d = static_cast<double>(set.query.dimension());
    double total = 0.0;
    for (const auto& cand : set.candidates) {
        const auto changed = norm.changed_count(cand.features.values, set.query.values);
        total += 1.0 - static_cast<double>(changed) / d;
    }
    return total / static_cast<double>(set.candidates.size());
}

// Criteria 1-4 share one benchmark run: constrained and baseline
// counterfactuals for every held-out instance, same per-instance seeds and
// generation budget in both modes.
void run_benchmark_criteria(const Bench& bench, std::vector<Criterion>& out) {
    std::vector<sepcf::CounterfactualSet> constrained_sets, baseline_sets;
    std::vector<std::uint64_t> seeds;
    {
        sepcf::Rng seed_rng(777);
        for (std::size_t i = 0; i < bench.test.size(); ++i) seeds.push_back(seed_rng.next_u64());
    }

    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < bench.test.size(); ++i) {
        sepcf::GAConfig ga;
        ga.seed = seeds[i];
        ga.n_counterfactuals = 3;
        constrained_sets.push_back(
            sepcf::evolve(bench.test[i], bench.model, bench.spec, sepcf::ObjectiveWeights{}, ga));
    }
    const double constrained_elapsed = seconds_since(t0);

    for (std::size_t i = 0; i < bench.test.size(); ++i) {
        sepcf::GAConfig ga;
        ga.seed = seeds[i];
        ga.n_counterfactuals = 3;
        ga.constrained = false;
        sepcf::ObjectiveWeights w;
        w.ordering_penalty_weight = 0.0;
        w.range_penalty_weight = 0.0;
        baseline_sets.push_back(sepcf::evolve(bench.test[i], bench.model, bench.spec, w, ga));
    }

    // Criterion 1: every constrained candidate satisfies both physics
    // penalties exactly, within the runtime budget.
    {
        std::size_t candidates = 0, violations = 0;
        for (const auto& set : constrained_sets) {
            for (const auto& cand : set.candidates) {
                ++candidates;
                if (sepcf::ordering_penalty(cand.features.values, bench.spec) != 0 ||
                    sepcf::range_penalty(cand.features.values, bench.spec) != 0)
                    ++violations;
            }
        }
        Criterion c{1, violations == 0 && candidates > 0 &&
                           constrained_elapsed <= kGenerationTimeLimit,
                    ""};
        c.detail = std::to_string(candidates - violations) + "/" + std::to_string(candidates) +
                   " constrained candidates with zero ordering and range penalties in " +
                   fmt(constrained_elapsed) + " s (limit " + fmt(kGenerationTimeLimit) + " s)";
        out.push_back(std::move(c));
    }

    // Criterion 2: candidates flagged valid re-classify to the target label,
    // so fidelity accuracy over the valid subset is exactly 1.0.
    {
        std::size_t valid = 0, hits = 0;
        for (const auto* sets : {&constrained_sets, &baseline_sets}) {
            for (const auto& set : *sets) {
                for (const auto& cand : set.candidates) {
                    if (!cand.valid) continue;
                    ++valid;
                    if (bench.model.predict_proba(cand.features.values).label == set.target_class)
                        ++hits;
                }
            }
        }
        const bool pass = valid > 0 && hits == valid;
        out.push_back({2, pass,
                       "fidelity accuracy " +
                           (valid > 0 ? fmt(static_cast<double>(hits) / valid) : std::string("n/a")) +
                           " over " + std::to_string(valid) + " valid-flagged candidates"});
    }

    // Criterion 3: constrained-mode mean DTW at most half the baseline's.
    // Known to fail at this bar: both modes share every weight except the two
    // physics-penalty terms (the fair-comparison contract), so the constrained
    // search optimizes the same proximity objective over a subset of the
    // baseline's feasible region and cannot do better than parity in the
    // limit; measured ratios sit near 1.0.
    double pgce_dtw = 0.0, base_dtw = 0.0;
    for (std::size_t i = 0; i < constrained_sets.size(); ++i) {
        pgce_dtw += set_mean_dtw(constrained_sets[i], bench.layout);
        base_dtw += set_mean_dtw(baseline_sets[i], bench.layout);
    }
    pgce_dtw /= static_cast<double>(constrained_sets.size());
    base_dtw /= static_cast<double>(baseline_sets.size());
    out.push_back({3, pgce_dtw <= kProximityRatio * base_dtw,
                   "mean DTW constrained " + fmt(pgce_dtw) + " vs baseline " + fmt(base_dtw) +
                       " (ratio " + fmt(pgce_dtw / base_dtw) + ", bar " + fmt(kProximityRatio) +
                       ") over " + std::to_string(constrained_sets.size()) + " instances"});

    // Criterion 4: constrained-mode mean unchanged-feature fraction.
    // Known to fail at this bar: on this benchmark the forest's 100 trees are
    // all single-split stumps with votes spread over ~25 of the 36 features,
    // and flipping a majority requires moving at least 9 features (verified by
    // steepest-ascent search on every held-out instance). The best possible
    // unchanged fraction for any valid counterfactual is therefore 27/36 =
    // 0.75, below the 0.90 floor, before accounting for search noise.
    const sepcf::Normalizer norm(bench.spec);
    double pgce_unchanged = 0.0, base_unchanged = 0.0;
    for (std::size_t i = 0; i < constrained_sets.size(); ++i) {
        pgce_unchanged += set_mean_unchanged(constrained_sets[i], norm);
        base_unchanged += set_mean_unchanged(baseline_sets[i], norm);
    }
    pgce_unchanged /= static_cast<double>(constrained_sets.size());
    base_unchanged /= static_cast<double>(baseline_sets.size());
    out.push_back({4,
                   pgce_unchanged >= kUnchangedFloor && pgce_unchanged >= base_unchanged,
                   "mean unchanged fraction constrained " + fmt(pgce_unchanged) + " vs baseline " +
                       fmt(base_unchanged) + " (floor " + fmt(kUnchangedFloor) + ")"});
}

// ---------------------------------------------------------------------------
// Criterion 5: DTW dynamic programming vs exhaustive warping-path search.
// ---------------------------------------------------------------------------

// Exact branch-and-bound enumeration of all monotone warping paths. Bounding
// only discards path prefixes already at or above the best complete path, so
// the returned minimum equals the full enumeration's.
struct PathSearch {
    const int* a = nullptr;
    const int* b = nullptr;
    int n = 0, m = 0;
    int best = 0;

    int greedy_cost() const {
        int i = 0, j = 0, cost = std::abs(a[0] - b[0]);
        while (i < n - 1 || j < m - 1) {
            if (i < n - 1 && j < m - 1) {
                ++i;
                ++j;
            } else if (i < n - 1) {
                ++i;
            } else {
                ++j;
            }
            cost += std::abs(a[i] - b[j]);
        }
        return cost;
    }

    void dfs(int i, int j, int acc) {
        acc += std::abs(a[i] - b[j]);
        if (acc >= best) return;
        if (i == n - 1 && j == m - 1) {
            best = acc;
            return;
        }
        if (i < n - 1 && j < m - 1) dfs(i + 1, j + 1, acc);
        if (i < n - 1) dfs(i + 1, j, acc);
        if (j < m - 1) dfs(i, j + 1, acc);
    }

    int run() {
        best = greedy_cost() + 1;
        dfs(0, 0, 0);
        return best;
    }
};

Criterion check_dtw_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr int kMaxLen = 6;
    constexpr int kAlphabet = 4;  // values {0, 1, 2, 3}

    std::vector<std::vector<int>> sequences;
    for (int len = 1; len <= kMaxLen; ++len) {
        std::size_t count = 1;
        for (int k = 0; k < len; ++k) count *= kAlphabet;
        for (std::size_t code = 0; code < count; ++code) {
            std::vector<int> s(len);
            std::size_t rest = code;
            for (int k = 0; k < len; ++k) {
                s[k] = static_cast<int>(rest % kAlphabet);
                rest /= kAlphabet;
            }
            sequences.push_back(std::move(s));
        }
    }

    std::size_t pairs = 0, mismatches = 0;
    for (const auto& sa : sequences) {
        std::vector<double> da(sa.begin(), sa.end());
        for (const auto& sb : sequences) {
            ++pairs;
            PathSearch search{sa.data(), sb.data(), static_cast<int>(sa.size()),
                              static_cast<int>(sb.size()), 0};
            const int oracle = search.run();
            const std::vector<double> db(sb.begin(), sb.end());
            if (sepcf::dtw(da, db) != static_cast<double>(oracle)) ++mismatches;
        }
    }
    const double elapsed = seconds_since(t0);
    Criterion c{5, mismatches == 0 && elapsed <= kDtwOracleTimeLimit, ""};
    c.detail = std::to_string(pairs - mismatches) + "/" + std::to_string(pairs) +
               " sequence pairs matched the path-enumeration oracle exactly in " + fmt(elapsed) +
               " s (limit " + fmt(kDtwOracleTimeLimit) + " s)";
    return c;
}

// ---------------------------------------------------------------------------
// Criterion 6: reconstruction slice-mean identity and overlap averaging.
// ---------------------------------------------------------------------------

Criterion check_reconstruction() {
    bool ok = true;
    std::string detail;

    // Non-overlapping grid: each reconstructed slice mean must equal its
    // counterfactual target.
    {
        const std::size_t samples = 12;
        std::vector<std::vector<double>> values(3, std::vector<double>(samples));
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t t = 0; t < samples; ++t)
                values[i][t] = 100.0 / static_cast<double>(i + 1) +
                               static_cast<double>(t) + static_cast<double>(t % 3);
        const sepcf::FluxSeries series(0, 300, {"P3", "P5", "P7"}, values);
        const auto grid = sepcf::WindowGrid::sliding(samples, 4, 4);
        const sepcf::ChannelLayout layout{3, grid.count(), series.channel_names()};

        sepcf::FeatureVector cfe = sepcf::vectorize(sepcf::extract_features(series, grid), layout);
        for (std::size_t f = 0; f < cfe.values.size(); ++f)
            cfe.values[f] += 1.0 + 0.5 * static_cast<double>(f);

        double worst = 0.0;
        for (std::size_t channel = 0; channel < 3; ++channel) {
            const auto r = sepcf::reconstruct(series, cfe, grid, channel);
            for (std::size_t j = 0; j < grid.count(); ++j) {
                const auto& bounds = grid.boundaries()[j];
                double mean = 0.0;
                for (std::size_t t = bounds.start; t < bounds.end; ++t) mean += r.perturbed[t];
                mean /= static_cast<double>(bounds.end - bounds.start);
                worst = std::max(worst,
                                 std::abs(mean - cfe.values[layout.feature_index(channel, j)]));
            }
        }
        if (worst > kSliceTolerance) ok = false;
        detail = "non-overlap worst slice-mean error " + fmt(worst) + " (tolerance " +
                 fmt(kSliceTolerance) + ")";
    }

    // Overlapping three-point fixture: series [1,2,3], slice [0,2) target
    // mean 2 and slice [1,3) target mean 4 give offsets [0.5, 1.0, 1.5].
    {
        const sepcf::FluxSeries series(0, 60, {"P3"}, {{1.0, 2.0, 3.0}});
        const sepcf::WindowGrid grid({{0, 2}, {1, 3}}, 2, 1);
        sepcf::FeatureVector cfe;
        cfe.values = {2.0, 4.0};
        const auto r = sepcf::reconstruct(series, cfe, grid, 0);
        const bool offsets_ok =
            r.offsets == std::vector<double>{0.5, 1.0, 1.5};
        const bool perturbed_ok =
            r.perturbed == std::vector<double>{1.5, 3.0, 4.5};
        if (!offsets_ok || !perturbed_ok) ok = false;
        detail += std::string("; overlap offsets ") + (offsets_ok ? "exact" : "WRONG") +
                  ", perturbed " + (perturbed_ok ? "exact" : "WRONG");
    }

    return {6, ok, detail};
}

// ---------------------------------------------------------------------------
// Criterion 7: byte-identical reruns of train/explain/benchmark.
// ---------------------------------------------------------------------------

int run_cli(const std::string& command) {
    const int rc = std::system((command + " > /dev/null 2>&1").c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Strips the trailing runtime_seconds column from a benchmark CSV row.
std::string drop_last_field(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        const auto pos = line.rfind(',');
        out << (pos == std::string::npos ? line : line.substr(0, pos)) << '\n';
    }
    return out.str();
}

std::string drop_runtime_rows(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("runtime,", 0) != 0) out << line << '\n';
    return out.str();
}

json masked_set_json(const fs::path& p) {
    json j = json::parse(read_file(p));
    if (j.contains("provenance")) j["provenance"].erase("runtime_seconds");
    return j;
}

json masked_summary_json(const fs::path& p) {
    json j = json::parse(read_file(p));
    if (j.contains("metrics")) {
        json kept = json::array();
        for (auto& entry : j["metrics"])
            if (entry.value("metric", "") != "runtime") kept.push_back(entry);
        j["metrics"] = std::move(kept);
    }
    return j;
}

Criterion check_determinism(const std::string& cli) {
    if (cli.empty()) return {7, false, "no CLI binary path supplied"};
    const fs::path root = fs::temp_directory_path() / "sepcf_acceptance_c7";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string data_dir = (root / "data").string();

    if (run_cli(cli + " synth --seed 21 --sep 12 --quiet 12 --event-minutes 120 --out " +
                data_dir) != 0)
        return {7, false, "synth run failed"};

    const std::string flux = data_dir + "/flux.csv";
    const std::string catalog = data_dir + "/catalog.csv";
    const std::string common = " --flux " + flux + " --catalog " + catalog +
                               " --window-minutes 30 --stride-minutes 30";

    std::vector<std::string> problems;
    const auto compare = [&](const std::string& what, const std::string& got_a,
                             const std::string& got_b) {
        if (got_a != got_b) problems.push_back(what + " differs between reruns");
    };

    // train twice
    for (const char* tag : {"a", "b"}) {
        const std::string out = (root / (std::string("train_") + tag)).string();
        if (run_cli(cli + " train" + common +
                    " --seed 21 --folds 3 --trees 25 --depth 6 --out " + out) != 0)
            return {7, false, "train run failed"};
    }
    for (const char* name : {"model.json", "spec.txt", "train_report.json", "quality.json",
                             "config_used.json"})
        compare(std::string("train/") + name, read_file(root / "train_a" / name),
                read_file(root / "train_b" / name));

    // explain twice
    const std::string model = (root / "train_a" / "model.json").string();
    const std::string spec = (root / "train_a" / "spec.txt").string();
    for (const char* tag : {"a", "b"}) {
        const std::string out = (root / (std::string("explain_") + tag)).string();
        if (run_cli(cli + " explain" + common + " --model " + model + " --spec " + spec +
                    " --instance 0 --seed 9 --n 3 --reconstruct --out " + out) != 0)
            return {7, false, "explain run failed"};
    }
    if (masked_set_json(root / "explain_a" / "set.json") !=
        masked_set_json(root / "explain_b" / "set.json"))
        problems.push_back("explain/set.json differs after masking runtime");
    for (const char* name : {"config_used.json", "reconstruction.csv", "verify_report.json"})
        compare(std::string("explain/") + name, read_file(root / "explain_a" / name),
                read_file(root / "explain_b" / name));

    // benchmark twice
    for (const char* tag : {"a", "b"}) {
        const std::string out = (root / (std::string("benchmark_") + tag)).string();
        if (run_cli(cli + " benchmark" + common + " --model " + model + " --spec " + spec +
                    " --seed 13 --instances 3 --n 2 --out " + out) != 0)
            return {7, false, "benchmark run failed"};
    }
    compare("benchmark/config_used.json", read_file(root / "benchmark_a" / "config_used.json"),
            read_file(root / "benchmark_b" / "config_used.json"));
    compare("benchmark/benchmark_instances.csv",
            drop_last_field(read_file(root / "benchmark_a" / "benchmark_instances.csv")),
            drop_last_field(read_file(root / "benchmark_b" / "benchmark_instances.csv")));
    compare("benchmark/radar.csv", drop_runtime_rows(read_file(root / "benchmark_a" / "radar.csv")),
            drop_runtime_rows(read_file(root / "benchmark_b" / "radar.csv")));
    if (masked_summary_json(root / "benchmark_a" / "benchmark_summary.json") !=
        masked_summary_json(root / "benchmark_b" / "benchmark_summary.json"))
        problems.push_back("benchmark summary differs after masking runtime");

    fs::remove_all(root);
    if (!problems.empty()) {
        std::string joined;
        for (const auto& p : problems) joined += (joined.empty() ? "" : "; ") + p;
        return {7, false, joined};
    }
    return {7, true,
            "train, explain, and benchmark reruns byte-identical outside wall-clock fields"};
}

// ---------------------------------------------------------------------------
// Criterion 8: mean pre-repair ordering penalty of the final population is
// non-increasing in the ordering penalty weight.
// ---------------------------------------------------------------------------

Criterion check_penalty_monotonicity(const Bench& bench) {
    // Quiet queries (target SEP) are the binding case: a flip can be reached
    // by raising P5/P7 alone, so candidates with P5 pushed past quiet-level P3
    // are genuinely competitive and the ordering term has work to do. SEP
    // queries evolve naturally ordered populations whose penalty is exactly 0
    // at every weight, which would make the comparison vacuous.
    std::vector<const sepcf::FeatureVector*> queries;
    for (const auto& v : bench.test) {
        if (v.label == sepcf::kLabelNonSep) queries.push_back(&v);
        if (queries.size() == 2) break;
    }
    if (queries.empty()) return {8, false, "no quiet instance in the held-out set"};

    const std::vector<double> grid = {0.0, 1.0, 10.0};
    constexpr std::size_t kSeeds = 20;
    std::vector<double> means;
    for (double w : grid) {
        double total = 0.0;
        for (const auto* query : queries) {
            for (std::size_t seed = 0; seed < kSeeds; ++seed) {
                sepcf::ObjectiveWeights weights;
                weights.ordering_penalty_weight = w;
                sepcf::GAConfig ga;
                ga.seed = seed;
                ga.constrained = false;  // penalties must act through fitness, not repair
                const auto set = sepcf::evolve(*query, bench.model, bench.spec, weights, ga);
                total += set.diagnostics.mean_final_ordering_penalty;
            }
        }
        means.push_back(total / static_cast<double>(kSeeds * queries.size()));
    }
    const bool pass =
        means[1] <= means[0] + kMonotoneTolerance && means[2] <= means[1] + kMonotoneTolerance;
    return {8, pass,
            "mean final-population ordering penalty " + fmt(means[0]) + " / " + fmt(means[1]) +
                " / " + fmt(means[2]) + " at weights 0 / 1 / 10 over " + std::to_string(kSeeds) +
                " seeds x " + std::to_string(queries.size()) + " quiet queries"};
}

// ---------------------------------------------------------------------------
// Criterion 9: classifier sanity on held-out data plus exact skill fixtures.
// ---------------------------------------------------------------------------

Criterion check_classifier(const Bench& bench) {
    sepcf::ConfusionCounts held;
    for (const auto& v : bench.test) {
        const int predicted = bench.model.predict_proba(v.values).label;
        if (v.label == 1)
            predicted == 1 ? ++held.tp : ++held.fn;
        else
            predicted == 1 ? ++held.fp : ++held.tn;
    }
    const auto scores = sepcf::skill_scores(held);
    const bool held_ok = scores.accuracy && *scores.accuracy >= kAccuracyFloor && scores.tss &&
                         *scores.tss >= kTssFloor;

    const auto perfect = sepcf::skill_scores({5, 0, 0, 5});
    const auto no_skill = sepcf::skill_scores({5, 5, 5, 5});
    const bool fixtures_ok = perfect.accuracy == 1.0 && perfect.tss == 1.0 &&
                             perfect.hss == 1.0 && no_skill.tss == 0.0 && no_skill.hss == 0.0;

    return {9, held_ok && fixtures_ok,
            "held-out accuracy " + (scores.accuracy ? fmt(*scores.accuracy) : std::string("n/a")) +
                ", TSS " + (scores.tss ? fmt(*scores.tss) : std::string("n/a")) + " on " +
                std::to_string(bench.test.size()) + " instances; skill fixtures " +
                (fixtures_ok ? "exact" : "WRONG")};
}

// ---------------------------------------------------------------------------
// Criterion 10: metric formula fixtures.
// ---------------------------------------------------------------------------

Criterion check_metric_fixtures() {
    bool ok = true;

    const auto identity = sepcf::sparsity({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, 1e-6);
    ok = ok && identity.changed_count == 0 && identity.unchanged_fraction == 1.0;

    const auto one_changed = sepcf::sparsity({1.0, 2.0, 3.0}, {1.0, 2.5, 3.0}, 1e-6);
    ok = ok && one_changed.changed_count == 1 &&
         one_changed.unchanged_fraction == 1.0 - 1.0 / 3.0;

    const auto all_changed = sepcf::sparsity({1.0, 2.0, 3.0}, {2.0, 3.0, 4.0}, 1e-6);
    ok = ok && all_changed.changed_count == 3 && all_changed.unchanged_fraction == 0.0;

    const double pair = sepcf::diversity_mean({{1.0, 2.0}, {3.0, 4.0}});
    ok = ok && pair == 4.0;

    const double single = sepcf::diversity_mean({{1.0, 2.0}});
    ok = ok && single == 0.0;

    return {10, ok,
            "sparsity counts (0, 1, 3), unchanged fractions, and pair diversity 4.0 all exact"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    std::vector<Criterion> results;

    std::optional<Bench> bench;
    try {
        bench = make_bench();
    } catch (const std::exception& e) {
        for (int id : {1, 2, 3, 4, 8, 9})
            results.push_back({id, false, std::string("fixture setup failed: ") + e.what()});
    }

    const auto guarded = [&results](int id, auto&& fn) {
        try {
            results.push_back(fn());
        } catch (const std::exception& e) {
            results.push_back({id, false, std::string("exception: ") + e.what()});
        }
    };

    if (bench) {
        try {
            run_benchmark_criteria(*bench, results);
        } catch (const std::exception& e) {
            for (int id : {1, 2, 3, 4})
                results.push_back({id, false, std::string("exception: ") + e.what()});
        }
    }
    guarded(5, [] { return check_dtw_oracle(); });
    guarded(6, [] { return check_reconstruction(); });
    guarded(7, [&cli] { return check_determinism(cli); });
    if (bench) {
        guarded(8, [&bench] { return check_penalty_monotonicity(*bench); });
        guarded(9, [&bench] { return check_classifier(*bench); });
    }
    guarded(10, [] { return check_metric_fixtures(); });

    std::sort(results.begin(), results.end(),
              [](const Criterion& a, const Criterion& b) { return a.id < b.id; });

    bool all_pass = true;
    for (const auto& c : results) {
        all_pass = all_pass && c.pass;
        std::cout << (c.pass ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.detail
                  << '\n';
    }
    std::cout << (all_pass ? "acceptance: all criteria passed"
                           : "acceptance: at least one criterion failed")
              << std::endl;
    return all_pass ? 0 : 1;
}
