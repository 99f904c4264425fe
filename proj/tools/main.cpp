#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "sepcf/sepcf.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

json load_config(const std::string& path) {
    return path.empty() ? json::object() : sepcf::read_json_file(path);
}

template <typename T>
void overlay(const json& cfg, const char* key, T& value) {
    if (!cfg.contains(key)) return;
    try {
        value = cfg.at(key).get<T>();
    } catch (const json::exception& e) {
        throw sepcf::SchemaError("config key '" + std::string(key) + "': " + e.what());
    }
}

std::uint64_t require_seed(std::int64_t seed) {
    if (seed < 0) throw sepcf::InvalidConfig("a seed is required (no entropy defaults)");
    return static_cast<std::uint64_t>(seed);
}

void ensure_outdir(const std::string& out) {
    if (out.empty()) throw sepcf::InvalidConfig("an output directory is required");
    fs::create_directories(out);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw sepcf::Error("cannot write '" + path + "'");
    os << text;
}

// Wall-clock facts live here, never in the primary outputs.
void write_run_meta(const std::string& out, const std::string& subcommand, double wall_seconds) {
    const auto now = std::chrono::system_clock::now();
    const std::int64_t epoch =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    sepcf::write_json_file(out + "/run_meta.json",
                           json{{"subcommand", subcommand},
                                {"wall_seconds", wall_seconds},
                                {"finished", sepcf::format_iso8601(epoch)}});
}

template <typename F>
void parallel_for(std::size_t n, std::size_t jobs, F&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    const std::size_t workers = std::min(jobs, n);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Input pipeline shared by train/explain/gridsearch/benchmark
// ---------------------------------------------------------------------------

struct Pipeline {
    sepcf::LoadedFlux flux;
    sepcf::EventCatalog catalog;
    sepcf::WindowGrid grid;  // laid out relative to one event segment
    sepcf::ChannelLayout layout;
    std::size_t event_samples = 0;

    std::vector<int> labels() const {
        std::vector<int> out;
        for (const auto& e : catalog.events) out.push_back(e.label);
        return out;
    }

    sepcf::WindowBounds event_bounds(std::size_t index) const {
        const auto& e = catalog.events.at(index);
        const std::size_t first = static_cast<std::size_t>(
            (e.start - flux.series.start_time()) / flux.series.cadence());
        return sepcf::WindowBounds{first, first + event_samples};
    }
};

Pipeline load_pipeline(const std::string& flux_path, const std::string& catalog_path,
                       std::size_t window_minutes, std::size_t stride_minutes) {
    if (flux_path.empty()) throw sepcf::InvalidConfig("a flux CSV path is required");
    if (catalog_path.empty()) throw sepcf::InvalidConfig("a catalog CSV path is required");
    auto flux = sepcf::load_flux_csv(flux_path);
    auto catalog = sepcf::load_catalog_csv(catalog_path);
    const auto& e0 = catalog.events.front();
    const std::int64_t cadence = flux.series.cadence();
    if ((e0.end - e0.start) % cadence != 0)
        throw sepcf::SchemaError("event duration is not a multiple of the series cadence");
    const std::size_t event_samples = static_cast<std::size_t>((e0.end - e0.start) / cadence);
    if (window_minutes == 0 || stride_minutes == 0)
        throw sepcf::InvalidConfig("window and stride minutes must be positive");
    if ((window_minutes * 60) % cadence != 0 || (stride_minutes * 60) % cadence != 0)
        throw sepcf::InvalidConfig("window/stride must be multiples of the series cadence");
    auto grid = sepcf::WindowGrid::sliding(
        event_samples, window_minutes * 60 / static_cast<std::size_t>(cadence),
        stride_minutes * 60 / static_cast<std::size_t>(cadence));
    sepcf::ChannelLayout layout{flux.series.channels(), grid.count(),
                                flux.series.channel_names()};
    return Pipeline{std::move(flux), std::move(catalog), std::move(grid), std::move(layout),
                    event_samples};
}

// ---------------------------------------------------------------------------
// Per-set metric evaluation shared by gridsearch/benchmark
// ---------------------------------------------------------------------------

struct SetEval {
    double dtw_features = 0.0;
    double dtw_raw = 0.0;
    double sparsity_fraction = 0.0;
    double diversity = 0.0;
    double runtime_seconds = 0.0;
    double valid_fraction = 0.0;
    double mean_final_ordering_penalty = 0.0;
};

// DTW is computed per channel over the W-window feature sequences, averaged
// over channels and candidates. When an event sub-series and grid are given,
// raw-series DTW over the reconstructed signals is reported alongside.
SetEval evaluate_set(const sepcf::CounterfactualSet& set, const sepcf::PhysicsSpec& spec,
                     const sepcf::FluxSeries* event_series, const sepcf::WindowGrid* grid) {
    SetEval ev;
    const auto& layout = spec.layout;
    const std::size_t W = layout.windows;
    const std::size_t d = layout.dimension();
    sepcf::Normalizer norm(spec);
    ev.runtime_seconds = set.runtime_seconds;
    ev.mean_final_ordering_penalty = set.diagnostics.mean_final_ordering_penalty;

    std::vector<std::vector<double>> cand_values;
    for (const auto& c : set.candidates) cand_values.push_back(c.features.values);
    ev.diversity = sepcf::diversity_mean(cand_values);

    std::vector<double> q(W), p(W);
    for (const auto& cand : set.candidates) {
        double channel_sum = 0.0;
        for (std::size_t i = 0; i < layout.channels; ++i) {
            for (std::size_t j = 0; j < W; ++j) {
                q[j] = set.query.values[layout.feature_index(i, j)];
                p[j] = cand.features.values[layout.feature_index(i, j)];
            }
            channel_sum += sepcf::dtw(q, p);
        }
        ev.dtw_features += channel_sum / static_cast<double>(layout.channels);
        const std::size_t changed = norm.changed_count(cand.features.values, set.query.values);
        ev.sparsity_fraction += 1.0 - static_cast<double>(changed) / static_cast<double>(d);
        if (cand.valid) ev.valid_fraction += 1.0;

        if (event_series != nullptr && grid != nullptr) {
            double raw_sum = 0.0;
            for (std::size_t i = 0; i < layout.channels; ++i) {
                const auto r = sepcf::reconstruct(*event_series, cand.features, *grid, i);
                raw_sum += sepcf::dtw(r.original, r.perturbed);
            }
            ev.dtw_raw += raw_sum / static_cast<double>(layout.channels);
        }
    }
    const double n = static_cast<double>(set.candidates.size());
    if (n > 0) {
        ev.dtw_features /= n;
        ev.dtw_raw /= n;
        ev.sparsity_fraction /= n;
        ev.valid_fraction /= n;
    }
    return ev;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string config_path;
    std::string out;
    std::int64_t seed = -1;
    std::size_t n_sep = 50;
    std::size_t n_quiet = 50;
    std::int64_t cadence = 300;
    std::size_t event_minutes = 360;
    double noise_level = 0.05;
    double enhancement = 8.0;
    std::string quiet_mode = "random_quiet";
};

int cmd_synth(SynthArgs args) {
    const auto t0 = std::chrono::steady_clock::now();
    const json cfg = load_config(args.config_path);
    overlay(cfg, "out", args.out);
    overlay(cfg, "seed", args.seed);
    overlay(cfg, "n_sep", args.n_sep);
    overlay(cfg, "n_quiet", args.n_quiet);
    overlay(cfg, "cadence", args.cadence);
    overlay(cfg, "event_minutes", args.event_minutes);
    overlay(cfg, "noise_level", args.noise_level);
    overlay(cfg, "enhancement", args.enhancement);
    overlay(cfg, "quiet_mode", args.quiet_mode);

    sepcf::SyntheticConfig sc;
    sc.n_sep = args.n_sep;
    sc.n_quiet = args.n_quiet;
    sc.cadence = args.cadence;
    if ((args.event_minutes * 60) % static_cast<std::size_t>(sc.cadence) != 0)
        throw sepcf::InvalidConfig("event_minutes must be a multiple of the cadence");
    sc.event_samples = args.event_minutes * 60 / static_cast<std::size_t>(sc.cadence);
    sc.noise_level = args.noise_level;
    sc.enhancement = args.enhancement;
    if (args.quiet_mode == "random_quiet")
        sc.quiet_mode = sepcf::QuietMode::RandomQuiet;
    else if (args.quiet_mode == "pre_event")
        sc.quiet_mode = sepcf::QuietMode::PreEvent;
    else
        throw sepcf::InvalidConfig("quiet_mode must be 'random_quiet' or 'pre_event'");
    sc.seed = require_seed(args.seed);

    const auto data = sepcf::generate_synthetic(sc);
    ensure_outdir(args.out);
    {
        std::ofstream os(args.out + "/flux.csv");
        sepcf::write_flux_csv(os, data.series);
    }
    {
        std::ofstream os(args.out + "/catalog.csv");
        sepcf::write_catalog_csv(os, data.catalog);
    }
    sepcf::write_json_file(args.out + "/config_used.json",
                           json{{"subcommand", "synth"},
                                {"seed", sc.seed},
                                {"n_sep", sc.n_sep},
                                {"n_quiet", sc.n_quiet},
                                {"cadence", sc.cadence},
                                {"event_minutes", args.event_minutes},
                                {"noise_level", sc.noise_level},
                                {"enhancement", sc.enhancement},
                                {"quiet_mode", args.quiet_mode}});
    write_run_meta(args.out, "synth",
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    std::cout << "synth: " << data.catalog.events.size() << " events, "
              << data.series.samples() << " samples -> " << args.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string config_path;
    std::string flux;
    std::string catalog;
    std::string out;
    std::int64_t seed = -1;
    std::size_t window_minutes = 30;
    std::size_t stride_minutes = 30;
    double test_fraction = 0.2;
    std::size_t folds = 5;
    double quantile_margin = 0.0;
    double delta_factor = 1.5;
    bool global_bounds = false;
    std::vector<std::size_t> grid_trees = {50, 100};
    std::vector<std::size_t> grid_depth = {8, 12};
    std::size_t min_leaf = 1;
    std::size_t jobs = 1;
};

int cmd_train(TrainArgs args) {
    const auto t0 = std::chrono::steady_clock::now();
    const json cfg = load_config(args.config_path);
    overlay(cfg, "flux", args.flux);
    overlay(cfg, "catalog", args.catalog);
    overlay(cfg, "out", args.out);
    overlay(cfg, "seed", args.seed);
    overlay(cfg, "window_minutes", args.window_minutes);
    overlay(cfg, "stride_minutes", args.stride_minutes);
    overlay(cfg, "test_fraction", args.test_fraction);
    overlay(cfg, "folds", args.folds);
    overlay(cfg, "quantile_margin", args.quantile_margin);
    overlay(cfg, "delta_factor", args.delta_factor);
    overlay(cfg, "global_bounds", args.global_bounds);
    overlay(cfg, "grid_trees", args.grid_trees);
    overlay(cfg, "grid_depth", args.grid_depth);
    overlay(cfg, "min_leaf", args.min_leaf);
    overlay(cfg, "jobs", args.jobs);
    const std::uint64_t seed = require_seed(args.seed);

    Pipeline pipe = load_pipeline(args.flux, args.catalog, args.window_minutes,
                                  args.stride_minutes);
    const auto split = sepcf::build_dataset(pipe.flux.series, pipe.catalog, pipe.grid,
                                            args.test_fraction, seed);
    if (split.train.empty()) throw sepcf::EmptyTrainingSet("empty training split");

    const sepcf::PhysicsSpec spec = sepcf::fit_spec(
        split.train, pipe.layout,
        sepcf::FitSpecOptions{args.quantile_margin, args.delta_factor, args.global_bounds});

    std::vector<sepcf::ForestHyperparams> grid;
    for (std::size_t trees : args.grid_trees)
        for (std::size_t depth : args.grid_depth) {
            sepcf::ForestHyperparams hp;
            hp.n_trees = trees;
            hp.max_depth = depth;
            hp.min_leaf = args.min_leaf;
            grid.push_back(hp);
        }
    const auto cv = sepcf::cross_validate(split.train, args.folds, grid, seed, args.jobs);
    const auto model = sepcf::train_forest(split.train, cv.best_params, seed, args.jobs);

    sepcf::ConfusionCounts held;
    for (const auto& v : split.test) {
        const int predicted = model.predict_proba(v.values).label;
        if (*v.label == 1)
            predicted == 1 ? ++held.tp : ++held.fn;
        else
            predicted == 1 ? ++held.fp : ++held.tn;
    }
    std::size_t train_hits = 0;
    for (const auto& v : split.train)
        if (model.predict_proba(v.values).label == *v.label) ++train_hits;

    json cv_grid = json::array();
    for (const auto& gp : cv.grid) {
        json folds = json::array();
        for (const auto& f : gp.folds)
            folds.push_back({{"confusion", sepcf::confusion_to_json(f.confusion)},
                             {"scores", sepcf::skill_to_json(f.scores)}});
        cv_grid.push_back({{"params",
                            {{"n_trees", gp.params.n_trees},
                             {"max_depth", gp.params.max_depth},
                             {"min_leaf", gp.params.min_leaf}}},
                           {"folds", std::move(folds)},
                           {"mean_f1", gp.mean_f1}});
    }
    const json report{
        {"cv",
         {{"folds", args.folds},
          {"grid", std::move(cv_grid)},
          {"best_index", cv.best_index},
          {"best_params",
           {{"n_trees", cv.best_params.n_trees},
            {"max_depth", cv.best_params.max_depth},
            {"min_leaf", cv.best_params.min_leaf}}}}},
        {"held_out",
         {{"n", split.test.size()},
          {"confusion", sepcf::confusion_to_json(held)},
          {"scores", sepcf::skill_to_json(sepcf::skill_scores(held))}}},
        {"train_size", split.train.size()},
        {"training_accuracy",
         static_cast<double>(train_hits) / static_cast<double>(split.train.size())}};

    ensure_outdir(args.out);
    sepcf::save_forest(model, args.out + "/model.json");
    sepcf::save_spec(spec, args.out + "/spec.txt");
    sepcf::write_json_file(args.out + "/train_report.json", report);
    sepcf::write_json_file(args.out + "/quality.json", sepcf::quality_to_json(pipe.flux.quality));
    sepcf::write_json_file(args.out + "/config_used.json",
                           json{{"subcommand", "train"},
                                {"flux", args.flux},
                                {"catalog", args.catalog},
                                {"seed", seed},
                                {"window_minutes", args.window_minutes},
                                {"stride_minutes", args.stride_minutes},
                                {"test_fraction", args.test_fraction},
                                {"folds", args.folds},
                                {"quantile_margin", args.quantile_margin},
                                {"delta_factor", args.delta_factor},
                                {"global_bounds", args.global_bounds},
                                {"grid_trees", args.grid_trees},
                                {"grid_depth", args.grid_depth},
                                {"min_leaf", args.min_leaf}});
    write_run_meta(args.out, "train",
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

    const auto held_scores = sepcf::skill_scores(held);
    std::cout << "train: " << split.train.size() << " train / " << split.test.size()
              << " test, best n_trees=" << cv.best_params.n_trees
              << " max_depth=" << cv.best_params.max_depth << ", held-out accuracy="
              << (held_scores.accuracy ? sepcf::format_double(*held_scores.accuracy) : "undefined")
              << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// explain
// ---------------------------------------------------------------------------

struct ExplainArgs {
    std::string config_path;
    std::string model;
    std::string spec;
    std::string flux;
    std::string catalog;
    std::string out;
    std::int64_t seed = -1;
    std::size_t window_minutes = 30;
    std::size_t stride_minutes = 30;
    std::int64_t instance = 0;
    int target = -1;
    std::size_t n_counterfactuals = 3;
    bool baseline = false;
    bool reconstruct = false;
    bool strict = false;
};

// Shared by explain/gridsearch/benchmark: resolve weights + GA config from
// defaults, then flags, then config file.
sepcf::ObjectiveWeights resolve_weights(const json& cfg, sepcf::ObjectiveWeights base) {
    if (cfg.contains("weights")) base = sepcf::weights_from_json(cfg.at("weights"), base);
    return base;
}

sepcf::GAConfig resolve_ga(const json& cfg, sepcf::GAConfig base) {
    if (cfg.contains("ga")) base = sepcf::gaconfig_from_json(cfg.at("ga"), base);
    return base;
}

int cmd_explain(ExplainArgs args) {
    const auto t0 = std::chrono::steady_clock::now();
    const json cfg = load_config(args.config_path);
    overlay(cfg, "model", args.model);
    overlay(cfg, "spec", args.spec);
    overlay(cfg, "flux", args.flux);
    overlay(cfg, "catalog", args.catalog);
    overlay(cfg, "out", args.out);
    overlay(cfg, "seed", args.seed);
    overlay(cfg, "window_minutes", args.window_minutes);
    overlay(cfg, "stride_minutes", args.stride_minutes);
    overlay(cfg, "instance", args.instance);
    overlay(cfg, "target", args.target);
    overlay(cfg, "n_counterfactuals", args.n_counterfactuals);
    overlay(cfg, "baseline", args.baseline);
    overlay(cfg, "reconstruct", args.reconstruct);
    overlay(cfg, "strict", args.strict);

    if (args.model.empty() || args.spec.empty())
        throw sepcf::InvalidConfig("model and spec paths are required");
    const auto model = sepcf::load_forest(args.model);
    const auto spec = sepcf::load_spec(args.spec);
    Pipeline pipe = load_pipeline(args.flux, args.catalog, args.window_minutes,
                                  args.stride_minutes);
    if (spec.layout.dimension() != pipe.layout.dimension() ||
        model.n_features() != pipe.layout.dimension())
        throw sepcf::DimensionMismatch("model, spec, and window grid disagree on dimension");

    const auto vectors = sepcf::event_feature_vectors(pipe.flux.series, pipe.catalog, pipe.grid);
    if (args.instance < 0 || static_cast<std::size_t>(args.instance) >= vectors.size())
        throw sepcf::InvalidConfig("instance index out of range (catalog has " +
                                   std::to_string(vectors.size()) + " events)");
    const auto& x = vectors[static_cast<std::size_t>(args.instance)];

    sepcf::ObjectiveWeights weights;
    if (args.baseline) {
        weights.ordering_penalty_weight = 0.0;
        weights.range_penalty_weight = 0.0;
    }
    weights = resolve_weights(cfg, weights);
    sepcf::GAConfig ga;
    ga.seed = require_seed(args.seed);
    ga.target_class = args.target;
    ga.n_counterfactuals = args.n_counterfactuals;
    ga.constrained = !args.baseline;
    ga = resolve_ga(cfg, ga);

    const auto set = sepcf::evolve(x, model, spec, weights, ga);

    ensure_outdir(args.out);
    sepcf::save_cfe_set(set, args.out + "/set.json");
    sepcf::write_json_file(args.out + "/config_used.json",
                           json{{"subcommand", "explain"},
                                {"model", args.model},
                                {"spec", args.spec},
                                {"flux", args.flux},
                                {"catalog", args.catalog},
                                {"instance", args.instance},
                                {"baseline", args.baseline},
                                {"reconstruct", args.reconstruct},
                                {"strict", args.strict},
                                {"weights", sepcf::weights_to_json(weights)},
                                {"ga", sepcf::gaconfig_to_json(ga)}});

    if (args.reconstruct) {
        const auto bounds = pipe.event_bounds(static_cast<std::size_t>(args.instance));
        const auto event_series = sepcf::slice_series(pipe.flux.series, bounds);
        const auto items = sepcf::reconstruct_all(event_series, set, pipe.grid);
        {
            std::ofstream os(args.out + "/reconstruction.csv");
            sepcf::write_reconstruction_csv(os, event_series, items);
        }
        json verify = json::array();
        for (const auto& item : items) {
            json entry{{"candidate", item.candidate_index},
                       {"channel", pipe.layout.channel_names[item.channel]},
                       {"ok", item.ok}};
            if (item.ok) {
                const auto report = sepcf::verify_reconstruction(
                    item.result, set.candidates[item.candidate_index].features, pipe.grid);
                entry["report"] = sepcf::reconstruction_report_to_json(report);
                std::ofstream os(args.out + "/reconstruction_candidate" +
                                 std::to_string(item.candidate_index) + "_" +
                                 pipe.layout.channel_names[item.channel] + ".csv");
                sepcf::write_reconstruction_csv(os, event_series, {item});
            } else {
                entry["error"] = item.error;
            }
            verify.push_back(std::move(entry));
        }
        sepcf::write_json_file(args.out + "/verify_report.json", json{{"items", std::move(verify)}});
    }

    write_run_meta(args.out, "explain",
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    std::cout << "explain: instance " << args.instance << " target "
              << sepcf::label_name(set.target_class) << ", " << set.valid_count() << "/"
              << set.candidates.size() << " valid candidates -> " << args.out << "\n";
    if (args.strict && !set.any_valid())
        throw sepcf::NoValidCandidate("no candidate flips the prediction");
    return 0;
}

// ---------------------------------------------------------------------------
// gridsearch
// ---------------------------------------------------------------------------

struct GridsearchArgs {
    std::string config_path;
    std::string model;
    std::string spec;
    std::string flux;
    std::string catalog;
    std::string out;
    std::int64_t seed = -1;
    std::size_t window_minutes = 30;
    std::size_t stride_minutes = 30;
    std::int64_t instance = -1;  // -1: first SEP event
    std::size_t n_seeds = 20;
    std::size_t jobs = 1;
    std::vector<double> grid_proximity = {10.0};
    std::vector<double> grid_sparsity = {0.1};
    std::vector<double> grid_diversity = {1.0};
    std::vector<double> grid_ordering = {0.0, 1.0, 10.0};
    std::vector<double> selection_weights = {1.0, 1.0, 1.0};
};

int cmd_gridsearch(GridsearchArgs args) {
    const auto t0 = std::chrono::steady_clock::now();
    const json cfg = load_config(args.config_path);
    overlay(cfg, "model", args.model);
    overlay(cfg, "spec", args.spec);
    overlay(cfg, "flux", args.flux);
    overlay(cfg, "catalog", args.catalog);
    overlay(cfg, "out", args.out);
    overlay(cfg, "seed", args.seed);
    overlay(cfg, "window_minutes", args.window_minutes);
    overlay(cfg, "stride_minutes", args.stride_minutes);
    overlay(cfg, "instance", args.instance);
    overlay(cfg, "n_seeds", args.n_seeds);
    overlay(cfg, "jobs", args.jobs);
    if (cfg.contains("grid")) {
        const json& g = cfg.at("grid");
        overlay(g, "proximity_weight", args.grid_proximity);
        overlay(g, "sparsity_weight", args.grid_sparsity);
        overlay(g, "diversity_weight", args.grid_diversity);
        overlay(g, "ordering_penalty_weight", args.grid_ordering);
    }
    overlay(cfg, "selection_weights", args.selection_weights);
    const std::uint64_t seed = require_seed(args.seed);
    if (args.n_seeds == 0) throw sepcf::InvalidConfig("n_seeds must be >= 1");
    if (args.selection_weights.size() != 3)
        throw sepcf::InvalidConfig("selection_weights must have 3 entries");

    const auto model = sepcf::load_forest(args.model.empty()
                                              ? throw sepcf::InvalidConfig("model path required")
                                              : args.model);
    const auto spec = sepcf::load_spec(args.spec.empty()
                                           ? throw sepcf::InvalidConfig("spec path required")
                                           : args.spec);
    Pipeline pipe = load_pipeline(args.flux, args.catalog, args.window_minutes,
                                  args.stride_minutes);
    const auto vectors = sepcf::event_feature_vectors(pipe.flux.series, pipe.catalog, pipe.grid);

    std::size_t instance = 0;
    if (args.instance >= 0) {
        if (static_cast<std::size_t>(args.instance) >= vectors.size())
            throw sepcf::InvalidConfig("instance index out of range");
        instance = static_cast<std::size_t>(args.instance);
    } else {
        bool found = false;
        for (std::size_t i = 0; i < vectors.size() && !found; ++i)
            if (*vectors[i].label == sepcf::kLabelSep) {
                instance = i;
                found = true;
            }
        if (!found) throw sepcf::InvalidConfig("catalog has no SEP event to explain");
    }
    const auto& x = vectors[instance];

    // Weight grid in declaration order; the physics penalty acts as a soft
    // objective here (no repair), so its weight is the lever under test.
    struct GridPoint {
        sepcf::ObjectiveWeights weights;
    };
    std::vector<GridPoint> points;
    for (double pw : args.grid_proximity)
        for (double sw : args.grid_sparsity)
            for (double dw : args.grid_diversity)
                for (double ow : args.grid_ordering) {
                    sepcf::ObjectiveWeights w = resolve_weights(cfg, sepcf::ObjectiveWeights{});
                    w.proximity_weight = pw;
                    w.sparsity_weight = sw;
                    w.diversity_weight = dw;
                    w.ordering_penalty_weight = ow;
                    points.push_back(GridPoint{w});
                }

    sepcf::GAConfig ga_base;
    ga_base.constrained = false;
    ga_base = resolve_ga(cfg, ga_base);

    std::vector<std::uint64_t> run_seeds(args.n_seeds);
    {
        sepcf::Rng seeder(seed);
        for (std::size_t k = 0; k < args.n_seeds; ++k) run_seeds[k] = seeder.next_u64();
    }

    struct Accum {
        double dtw = 0, sparsity = 0, diversity = 0, order_pen = 0, valid = 0;
    };
    std::vector<Accum> results(points.size());
    parallel_for(points.size(), args.jobs, [&](std::size_t c) {
        Accum acc;
        for (std::size_t k = 0; k < args.n_seeds; ++k) {
            sepcf::GAConfig ga = ga_base;
            ga.seed = run_seeds[k];
            const auto set = sepcf::evolve(x, model, spec, points[c].weights, ga);
            const SetEval ev = evaluate_set(set, spec, nullptr, nullptr);
            acc.dtw += ev.dtw_features;
            acc.sparsity += ev.sparsity_fraction;
            acc.diversity += ev.diversity;
            acc.order_pen += ev.mean_final_ordering_penalty;
            acc.valid += ev.valid_fraction;
        }
        const double n = static_cast<double>(args.n_seeds);
        results[c] = Accum{acc.dtw / n, acc.sparsity / n, acc.diversity / n, acc.order_pen / n,
                           acc.valid / n};
    });

    ensure_outdir(args.out);
    {
        std::ofstream os(args.out + "/gridsearch.csv");
        os << "proximity_weight,sparsity_weight,diversity_weight,ordering_penalty_weight,"
              "metric,value\n";
        for (std::size_t c = 0; c < points.size(); ++c) {
            const auto& w = points[c].weights;
            const auto row = [&](const char* metric, double value) {
                os << sepcf::format_double(w.proximity_weight) << ','
                   << sepcf::format_double(w.sparsity_weight) << ','
                   << sepcf::format_double(w.diversity_weight) << ','
                   << sepcf::format_double(w.ordering_penalty_weight) << ',' << metric << ','
                   << sepcf::format_double(value) << '\n';
            };
            row("proximity_dtw", results[c].dtw);
            row("sparsity_fraction", results[c].sparsity);
            row("diversity", results[c].diversity);
            row("mean_ordering_penalty", results[c].order_pen);
            row("valid_fraction", results[c].valid);
        }
    }

    // Best configuration under the declared objective: minimize
    // s0*norm(dtw) + s1*(1 - norm(sparsity)) + s2*(1 - norm(diversity)),
    // each metric min-max normalized across the grid.
    const auto norm_of = [&](auto getter) {
        double lo = results[0].dtw, hi = lo;
        std::vector<double> vals;
        for (const auto& r : results) vals.push_back(getter(r));
        lo = *std::min_element(vals.begin(), vals.end());
        hi = *std::max_element(vals.begin(), vals.end());
        std::vector<double> out;
        for (double v : vals) out.push_back(hi > lo ? (v - lo) / (hi - lo) : 0.5);
        return out;
    };
    const auto ndtw = norm_of([](const Accum& r) { return r.dtw; });
    const auto nspars = norm_of([](const Accum& r) { return r.sparsity; });
    const auto ndiv = norm_of([](const Accum& r) { return r.diversity; });
    std::size_t best = 0;
    double best_score = 0.0;
    for (std::size_t c = 0; c < points.size(); ++c) {
        const double score = args.selection_weights[0] * ndtw[c] +
                             args.selection_weights[1] * (1.0 - nspars[c]) +
                             args.selection_weights[2] * (1.0 - ndiv[c]);
        if (c == 0 || score < best_score) {
            best = c;
            best_score = score;
        }
    }
    sepcf::write_json_file(
        args.out + "/best_config.json",
        json{{"objective",
              "minimize sel0*norm(proximity_dtw) + sel1*(1-norm(sparsity_fraction)) + "
              "sel2*(1-norm(diversity)) over the grid"},
             {"selection_weights", args.selection_weights},
             {"best_index", best},
             {"weights", sepcf::weights_to_json(points[best].weights)},
             {"metrics",
              {{"proximity_dtw", results[best].dtw},
               {"sparsity_fraction", results[best].sparsity},
               {"diversity", results[best].diversity},
               {"mean_ordering_penalty", results[best].order_pen},
               {"valid_fraction", results[best].valid}}}});

    sepcf::write_json_file(args.out + "/config_used.json",
                           json{{"subcommand", "gridsearch"},
                                {"model", args.model},
                                {"spec", args.spec},
                                {"flux", args.flux},
                                {"catalog", args.catalog},
                                {"seed", seed},
                                {"instance", instance},
                                {"n_seeds", args.n_seeds},
                                {"grid",
                                 {{"proximity_weight", args.grid_proximity},
                                  {"sparsity_weight", args.grid_sparsity},
                                  {"diversity_weight", args.grid_diversity},
                                  {"ordering_penalty_weight", args.grid_ordering}}},
                                {"selection_weights", args.selection_weights},
                                {"ga", sepcf::gaconfig_to_json(ga_base)}});
    write_run_meta(args.out, "gridsearch",
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    std::cout << "gridsearch: " << points.size() << " configurations x " << args.n_seeds
              << " seeds on instance " << instance << " -> " << args.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

struct BenchmarkArgs {
    std::string config_path;
    std::string model;
    std::string spec;
    std::string flux;
    std::string catalog;
    std::string out;
    std::int64_t seed = -1;
    std::size_t window_minutes = 30;
    std::size_t stride_minutes = 30;
    std::size_t instances = 20;
    std::size_t n_counterfactuals = 3;
    double test_fraction = 0.2;
    std::int64_t split_seed = -1;  // defaults to --seed
    std::size_t jobs = 1;
};

int cmd_benchmark(BenchmarkArgs args) {
    const auto t0 = std::chrono::steady_clock::now();
    const json cfg = load_config(args.config_path);
    overlay(cfg, "model", args.model);
    overlay(cfg, "spec", args.spec);
    overlay(cfg, "flux", args.flux);
    overlay(cfg, "catalog", args.catalog);
    overlay(cfg, "out", args.out);
    overlay(cfg, "seed", args.seed);
    overlay(cfg, "window_minutes", args.window_minutes);
    overlay(cfg, "stride_minutes", args.stride_minutes);
    overlay(cfg, "instances", args.instances);
    overlay(cfg, "n_counterfactuals", args.n_counterfactuals);
    overlay(cfg, "test_fraction", args.test_fraction);
    overlay(cfg, "split_seed", args.split_seed);
    overlay(cfg, "jobs", args.jobs);
    const std::uint64_t seed = require_seed(args.seed);
    const std::uint64_t split_seed =
        args.split_seed >= 0 ? static_cast<std::uint64_t>(args.split_seed) : seed;
    if (args.instances == 0) throw sepcf::InvalidConfig("instances must be >= 1");

    if (args.model.empty() || args.spec.empty())
        throw sepcf::InvalidConfig("model and spec paths are required");
    const auto model = sepcf::load_forest(args.model);
    const auto spec = sepcf::load_spec(args.spec);
    Pipeline pipe = load_pipeline(args.flux, args.catalog, args.window_minutes,
                                  args.stride_minutes);
    if (model.n_features() != pipe.layout.dimension() ||
        spec.layout.dimension() != pipe.layout.dimension())
        throw sepcf::DimensionMismatch("model, spec, and window grid disagree on dimension");
    const auto vectors = sepcf::event_feature_vectors(pipe.flux.series, pipe.catalog, pipe.grid);

    const auto split = sepcf::split_event_indices(pipe.labels(), args.test_fraction, split_seed);
    std::vector<std::size_t> pool = split.test;
    sepcf::Rng rng(seed);
    for (std::size_t i = pool.size(); i > 1; --i)
        std::swap(pool[i - 1], pool[rng.bounded(i)]);
    if (pool.size() > args.instances) pool.resize(args.instances);
    if (pool.empty()) throw sepcf::InvalidConfig("test split has no instances to sample");
    std::vector<std::uint64_t> instance_seeds(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) instance_seeds[i] = rng.next_u64();

    sepcf::ObjectiveWeights pgce_weights = resolve_weights(cfg, sepcf::ObjectiveWeights{});
    sepcf::ObjectiveWeights base_weights = pgce_weights;
    base_weights.ordering_penalty_weight = 0.0;
    base_weights.range_penalty_weight = 0.0;
    sepcf::GAConfig ga_proto;
    ga_proto.n_counterfactuals = args.n_counterfactuals;
    ga_proto = resolve_ga(cfg, ga_proto);

    struct InstanceRun {
        bool ok = false;
        std::string error;
        std::size_t event_index = 0;
        SetEval pgce;
        SetEval base;
        sepcf::CounterfactualSet pgce_set;
        sepcf::CounterfactualSet base_set;
    };
    std::vector<InstanceRun> runs(pool.size());
    parallel_for(pool.size(), args.jobs, [&](std::size_t i) {
        InstanceRun& run = runs[i];
        run.event_index = pool[i];
        try {
            const auto& x = vectors[pool[i]];
            const auto bounds = pipe.event_bounds(pool[i]);
            const auto event_series = sepcf::slice_series(pipe.flux.series, bounds);

            sepcf::GAConfig ga = ga_proto;
            ga.seed = instance_seeds[i];
            ga.constrained = true;
            run.pgce_set = sepcf::evolve(x, model, spec, pgce_weights, ga);
            run.pgce = evaluate_set(run.pgce_set, spec, &event_series, &pipe.grid);

            ga.constrained = false;
            run.base_set = sepcf::evolve(x, model, spec, base_weights, ga);
            run.base = evaluate_set(run.base_set, spec, &event_series, &pipe.grid);
            run.ok = true;
        } catch (const std::exception& e) {
            run.error = e.what();
        }
    });

    sepcf::MethodMetrics pgce, base;
    pgce.method = "pgce";
    base.method = "baseline";
    std::vector<double> pgce_raw, base_raw;
    std::size_t excluded = 0;
    sepcf::ConfusionCounts valid_confusion;
    double pgce_valid = 0.0, base_valid = 0.0;
    for (const auto& run : runs) {
        if (!run.ok) {
            ++excluded;
            std::cerr << "benchmark: instance " << run.event_index << " failed: " << run.error
                      << "\n";
            continue;
        }
        pgce.dtw_values.push_back(run.pgce.dtw_features);
        pgce.sparsity_fractions.push_back(run.pgce.sparsity_fraction);
        pgce.diversity_values.push_back(run.pgce.diversity);
        pgce.runtimes_seconds.push_back(run.pgce.runtime_seconds);
        pgce_raw.push_back(run.pgce.dtw_raw);
        base.dtw_values.push_back(run.base.dtw_features);
        base.sparsity_fractions.push_back(run.base.sparsity_fraction);
        base.diversity_values.push_back(run.base.diversity);
        base.runtimes_seconds.push_back(run.base.runtime_seconds);
        base_raw.push_back(run.base.dtw_raw);
        pgce_valid += run.pgce.valid_fraction;
        base_valid += run.base.valid_fraction;
        for (const auto* set : {&run.pgce_set, &run.base_set}) {
            for (const auto& cand : set->candidates) {
                if (!cand.valid) continue;
                const int predicted = model.predict_proba(cand.features.values).label;
                if (set->target_class == 1)
                    predicted == 1 ? ++valid_confusion.tp : ++valid_confusion.fn;
                else
                    predicted == 1 ? ++valid_confusion.fp : ++valid_confusion.tn;
            }
        }
    }
    if (pgce.dtw_values.empty()) throw sepcf::Error("benchmark: every instance failed");

    auto report = sepcf::benchmark_compare(pgce, base);
    report.summaries.push_back(sepcf::summarize_pair("dtw_raw", false, pgce_raw, base_raw));

    const double used = static_cast<double>(pgce.dtw_values.size());
    json summary = sepcf::benchmark_report_to_json(report);
    summary["instances_requested"] = args.instances;
    summary["instances_used"] = pgce.dtw_values.size();
    summary["instances_excluded"] = excluded;
    summary["n_counterfactuals"] = args.n_counterfactuals;
    summary["valid_fraction"] = {{"pgce", pgce_valid / used}, {"baseline", base_valid / used}};
    if (valid_confusion.total() > 0) {
        summary["valid_candidate_fidelity"] = {
            {"n", valid_confusion.total()},
            {"accuracy", static_cast<double>(valid_confusion.tp + valid_confusion.tn) /
                             static_cast<double>(valid_confusion.total())}};
    }

    ensure_outdir(args.out);
    sepcf::write_json_file(args.out + "/benchmark_summary.json", summary);
    {
        std::ofstream os(args.out + "/benchmark_instances.csv");
        os << "method,instance,event_index,dtw,dtw_raw,sparsity_fraction,diversity,"
              "runtime_seconds\n";
        std::size_t row = 0;
        for (const auto& run : runs) {
            if (!run.ok) continue;
            const auto emit = [&](const char* method, const SetEval& ev) {
                os << method << ',' << row << ',' << run.event_index << ','
                   << sepcf::format_double(ev.dtw_features) << ','
                   << sepcf::format_double(ev.dtw_raw) << ','
                   << sepcf::format_double(ev.sparsity_fraction) << ','
                   << sepcf::format_double(ev.diversity) << ','
                   << sepcf::format_double(ev.runtime_seconds) << '\n';
            };
            emit("pgce", run.pgce);
            emit("baseline", run.base);
            ++row;
        }
    }
    {
        std::ofstream os(args.out + "/radar.csv");
        sepcf::write_radar_csv(os, report);
    }
    sepcf::write_json_file(args.out + "/config_used.json",
                           json{{"subcommand", "benchmark"},
                                {"model", args.model},
                                {"spec", args.spec},
                                {"flux", args.flux},
                                {"catalog", args.catalog},
                                {"seed", seed},
                                {"split_seed", split_seed},
                                {"test_fraction", args.test_fraction},
                                {"instances", args.instances},
                                {"n_counterfactuals", args.n_counterfactuals},
                                {"weights", sepcf::weights_to_json(pgce_weights)},
                                {"ga", sepcf::gaconfig_to_json(ga_proto)}});
    write_run_meta(args.out, "benchmark",
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

    for (const auto& s : report.summaries)
        std::cout << "benchmark " << s.metric << ": pgce " << sepcf::format_double(s.a.mean)
                  << " +- " << sepcf::format_double(s.a.stddev) << " | baseline "
                  << sepcf::format_double(s.b.mean) << " +- "
                  << sepcf::format_double(s.b.stddev) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// fidelity
// ---------------------------------------------------------------------------

struct FidelityArgs {
    std::string config_path;
    std::string model;
    std::string sets_dir;
    std::string out;
};

int cmd_fidelity(FidelityArgs args) {
    const auto t0 = std::chrono::steady_clock::now();
    const json cfg = load_config(args.config_path);
    overlay(cfg, "model", args.model);
    overlay(cfg, "sets", args.sets_dir);
    overlay(cfg, "out", args.out);
    if (args.model.empty() || args.sets_dir.empty())
        throw sepcf::InvalidConfig("model and sets paths are required");

    const auto model = sepcf::load_forest(args.model);
    if (!fs::is_directory(args.sets_dir))
        throw sepcf::EmptyFile("'" + args.sets_dir + "' is not a directory");
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(args.sets_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());

    std::vector<sepcf::CounterfactualSet> sets;
    std::vector<std::string> set_paths;
    for (const auto& p : paths) {
        const json j = sepcf::read_json_file(p);
        if (j.value("format", "") != "sep-cfe-set") continue;
        sets.push_back(sepcf::cfe_set_from_json(j));
        set_paths.push_back(p);
    }
    if (sets.empty())
        throw sepcf::EmptySet("no counterfactual set files found in '" + args.sets_dir + "'");
    for (const auto& set : sets)
        if (set.query.dimension() != model.n_features())
            throw sepcf::DimensionMismatch("set feature space does not match the model");

    const auto pooled = sepcf::fidelity(sets, model);
    json per_set = json::array();
    for (std::size_t i = 0; i < sets.size(); ++i)
        per_set.push_back({{"path", set_paths[i]},
                           {"target", sepcf::label_name(sets[i].target_class)},
                           {"report", sepcf::fidelity_to_json(sepcf::fidelity(sets[i], model))}});

    ensure_outdir(args.out);
    sepcf::write_json_file(args.out + "/fidelity_report.json",
                           json{{"pooled", sepcf::fidelity_to_json(pooled)},
                                {"sets", std::move(per_set)}});
    sepcf::write_json_file(args.out + "/config_used.json",
                           json{{"subcommand", "fidelity"},
                                {"model", args.model},
                                {"sets", args.sets_dir}});
    write_run_meta(args.out, "fidelity",
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    std::cout << "fidelity: " << pooled.n_candidates << " candidates, accuracy "
              << sepcf::format_double(pooled.accuracy) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Physics-guided counterfactual explanations for SEP event classifiers"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Generate the synthetic flux benchmark");
    s->add_option("--config", synth.config_path, "JSON config (overrides flags)");
    s->add_option("--out", synth.out, "Output directory");
    s->add_option("--seed", synth.seed, "RNG seed (required)");
    s->add_option("--sep", synth.n_sep, "SEP events");
    s->add_option("--quiet", synth.n_quiet, "non-SEP events");
    s->add_option("--cadence", synth.cadence, "Sample cadence in seconds");
    s->add_option("--event-minutes", synth.event_minutes, "Observation window per event");
    s->add_option("--noise", synth.noise_level, "Multiplicative noise level");
    s->add_option("--enhancement", synth.enhancement, "SEP peak multiplier");
    s->add_option("--quiet-mode", synth.quiet_mode, "random_quiet or pre_event");

    TrainArgs train;
    auto* t = app.add_subcommand("train", "Train and persist the classifier");
    t->add_option("--config", train.config_path, "JSON config (overrides flags)");
    t->add_option("--flux", train.flux, "Flux CSV");
    t->add_option("--catalog", train.catalog, "Event catalog CSV");
    t->add_option("--out", train.out, "Output directory");
    t->add_option("--seed", train.seed, "RNG seed (required)");
    t->add_option("--window-minutes", train.window_minutes, "Feature window length");
    t->add_option("--stride-minutes", train.stride_minutes, "Feature window stride");
    t->add_option("--test-fraction", train.test_fraction, "Held-out fraction");
    t->add_option("--folds", train.folds, "Cross-validation folds");
    t->add_option("--quantile-margin", train.quantile_margin, "Bound quantile margin");
    t->add_option("--delta-factor", train.delta_factor, "Smoothness tolerance factor");
    t->add_flag("--global-bounds", train.global_bounds, "One bound pair per channel");
    t->add_option("--trees", train.grid_trees, "Forest size grid");
    t->add_option("--depth", train.grid_depth, "Max depth grid");
    t->add_option("--min-leaf", train.min_leaf, "Min samples per leaf");
    t->add_option("--jobs", train.jobs, "Worker threads");

    ExplainArgs explain;
    auto* e = app.add_subcommand("explain", "Generate counterfactuals for one instance");
    e->add_option("--config", explain.config_path, "JSON config (overrides flags)");
    e->add_option("--model", explain.model, "Model file");
    e->add_option("--spec", explain.spec, "Physics spec file");
    e->add_option("--flux", explain.flux, "Flux CSV");
    e->add_option("--catalog", explain.catalog, "Event catalog CSV");
    e->add_option("--out", explain.out, "Output directory");
    e->add_option("--seed", explain.seed, "RNG seed (required)");
    e->add_option("--window-minutes", explain.window_minutes, "Feature window length");
    e->add_option("--stride-minutes", explain.stride_minutes, "Feature window stride");
    e->add_option("--instance", explain.instance, "Catalog event index");
    e->add_option("--target", explain.target, "Target class (0, 1, or -1 for flip)");
    e->add_option("--n", explain.n_counterfactuals, "Counterfactuals to return");
    e->add_flag("--baseline", explain.baseline, "Unconstrained comparison mode");
    e->add_flag("--reconstruct", explain.reconstruct, "Emit reconstruction CSVs");
    e->add_flag("--strict", explain.strict, "Fail when no candidate is valid");

    GridsearchArgs gs;
    auto* g = app.add_subcommand("gridsearch", "Sweep objective weights");
    g->add_option("--config", gs.config_path, "JSON config (overrides flags)");
    g->add_option("--model", gs.model, "Model file");
    g->add_option("--spec", gs.spec, "Physics spec file");
    g->add_option("--flux", gs.flux, "Flux CSV");
    g->add_option("--catalog", gs.catalog, "Event catalog CSV");
    g->add_option("--out", gs.out, "Output directory");
    g->add_option("--seed", gs.seed, "RNG seed (required)");
    g->add_option("--window-minutes", gs.window_minutes, "Feature window length");
    g->add_option("--stride-minutes", gs.stride_minutes, "Feature window stride");
    g->add_option("--instance", gs.instance, "Catalog event index (-1: first SEP)");
    g->add_option("--seeds", gs.n_seeds, "Runs per configuration");
    g->add_option("--jobs", gs.jobs, "Worker threads");
    g->add_option("--proximity-grid", gs.grid_proximity, "proximity_weight values");
    g->add_option("--sparsity-grid", gs.grid_sparsity, "sparsity_weight values");
    g->add_option("--diversity-grid", gs.grid_diversity, "diversity_weight values");
    g->add_option("--ordering-grid", gs.grid_ordering, "ordering_penalty_weight values");

    BenchmarkArgs bench;
    auto* b = app.add_subcommand("benchmark", "Compare constrained vs baseline generation");
    b->add_option("--config", bench.config_path, "JSON config (overrides flags)");
    b->add_option("--model", bench.model, "Model file");
    b->add_option("--spec", bench.spec, "Physics spec file");
    b->add_option("--flux", bench.flux, "Flux CSV");
    b->add_option("--catalog", bench.catalog, "Event catalog CSV");
    b->add_option("--out", bench.out, "Output directory");
    b->add_option("--seed", bench.seed, "RNG seed (required)");
    b->add_option("--window-minutes", bench.window_minutes, "Feature window length");
    b->add_option("--stride-minutes", bench.stride_minutes, "Feature window stride");
    b->add_option("--instances", bench.instances, "Test instances to sample");
    b->add_option("--n", bench.n_counterfactuals, "Counterfactuals per instance");
    b->add_option("--test-fraction", bench.test_fraction, "Held-out fraction");
    b->add_option("--split-seed", bench.split_seed, "Split seed (defaults to --seed)");
    b->add_option("--jobs", bench.jobs, "Worker threads");

    FidelityArgs fid;
    auto* f = app.add_subcommand("fidelity", "Re-classify stored counterfactual sets");
    f->add_option("--config", fid.config_path, "JSON config (overrides flags)");
    f->add_option("--model", fid.model, "Model file");
    f->add_option("--sets", fid.sets_dir, "Directory of counterfactual set JSON files");
    f->add_option("--out", fid.out, "Output directory");

    try {
        app.parse(argc, argv);
        if (s->parsed()) return cmd_synth(synth);
        if (t->parsed()) return cmd_train(train);
        if (e->parsed()) return cmd_explain(explain);
        if (g->parsed()) return cmd_gridsearch(gs);
        if (b->parsed()) return cmd_benchmark(bench);
        if (f->parsed()) return cmd_fidelity(fid);
        return 2;
    } catch (const CLI::ParseError& err) {
        const int rc = app.exit(err);
        return rc == 0 ? 0 : 2;
    } catch (const sepcf::SchemaError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const sepcf::InvalidConfig& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const sepcf::EmptyFile& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const sepcf::IrregularCadence& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}
