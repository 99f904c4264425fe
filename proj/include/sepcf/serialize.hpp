#pragma once

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sepcf/constraints.hpp"
#include "sepcf/fidelity.hpp"
#include "sepcf/forest.hpp"
#include "sepcf/genetic.hpp"
#include "sepcf/ingest.hpp"
#include "sepcf/metrics.hpp"
#include "sepcf/reconstruct.hpp"

namespace sepcf {

inline constexpr int kForestFormatVersion = 1;
inline constexpr int kCfeSetFormatVersion = 1;

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EmptyFile("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("invalid JSON in '" + path + "': " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Forest model files
// ---------------------------------------------------------------------------

inline nlohmann::json forest_to_json(const ForestModel& model) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : model.trees()) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : t.nodes)
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.count0, n.count1});
        trees.push_back(std::move(nodes));
    }
    const auto& hp = model.hyperparams();
    return nlohmann::json{{"format", "sep-cfe-forest"},
                          {"version", kForestFormatVersion},
                          {"n_features", model.n_features()},
                          {"feature_names", model.feature_names()},
                          {"seed", model.seed()},
                          {"hyperparams",
                           {{"n_trees", hp.n_trees},
                            {"max_depth", hp.max_depth},
                            {"min_leaf", hp.min_leaf},
                            {"feature_subsample", hp.feature_subsample}}},
                          {"trees", std::move(trees)}};
}

inline ForestModel forest_from_json(const nlohmann::json& j) {
    try {
        if (j.value("format", "") != "sep-cfe-forest")
            throw SchemaError("not a forest model file");
        if (j.value("version", 0) != kForestFormatVersion)
            throw SchemaError("unsupported forest model version " +
                              std::to_string(j.value("version", 0)));
        ForestHyperparams hp;
        const auto& hj = j.at("hyperparams");
        hp.n_trees = hj.at("n_trees").get<std::size_t>();
        hp.max_depth = hj.at("max_depth").get<std::size_t>();
        hp.min_leaf = hj.at("min_leaf").get<std::size_t>();
        hp.feature_subsample = hj.at("feature_subsample").get<std::size_t>();
        std::vector<DecisionTree> trees;
        for (const auto& tj : j.at("trees")) {
            DecisionTree t;
            for (const auto& nj : tj) {
                TreeNode n;
                n.feature = nj.at(0).get<std::int32_t>();
                n.threshold = nj.at(1).get<double>();
                n.left = nj.at(2).get<std::uint32_t>();
                n.right = nj.at(3).get<std::uint32_t>();
                n.count0 = nj.at(4).get<std::uint32_t>();
                n.count1 = nj.at(5).get<std::uint32_t>();
                t.nodes.push_back(n);
            }
            trees.push_back(std::move(t));
        }
        return ForestModel(std::move(trees), hp, j.at("seed").get<std::uint64_t>(),
                           j.at("n_features").get<std::size_t>(),
                           j.value("feature_names", std::vector<std::string>{}));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed forest model file: ") + e.what());
    }
}

inline void save_forest(const ForestModel& model, const std::string& path) {
    write_json_file(path, forest_to_json(model));
}

inline ForestModel load_forest(const std::string& path) {
    return forest_from_json(read_json_file(path));
}

// ---------------------------------------------------------------------------
// Objective weights and GA configuration
// ---------------------------------------------------------------------------

inline nlohmann::json weights_to_json(const ObjectiveWeights& w) {
    return {{"proximity_weight", w.proximity_weight},
            {"sparsity_weight", w.sparsity_weight},
            {"diversity_weight", w.diversity_weight},
            {"validity_weight", w.validity_weight},
            {"ordering_penalty_weight", w.ordering_penalty_weight},
            {"range_penalty_weight", w.range_penalty_weight},
            {"smoothness_penalty_weight", w.smoothness_penalty_weight}};
}

// Overlay semantics: keys present in `j` override `base`, everything else
// keeps the base value. Lets config files specify only what changes.
inline ObjectiveWeights weights_from_json(const nlohmann::json& j,
                                          ObjectiveWeights base = ObjectiveWeights{}) {
    try {
        base.proximity_weight = j.value("proximity_weight", base.proximity_weight);
        base.sparsity_weight = j.value("sparsity_weight", base.sparsity_weight);
        base.diversity_weight = j.value("diversity_weight", base.diversity_weight);
        base.validity_weight = j.value("validity_weight", base.validity_weight);
        base.ordering_penalty_weight =
            j.value("ordering_penalty_weight", base.ordering_penalty_weight);
        base.range_penalty_weight = j.value("range_penalty_weight", base.range_penalty_weight);
        base.smoothness_penalty_weight =
            j.value("smoothness_penalty_weight", base.smoothness_penalty_weight);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed weights: ") + e.what());
    }
    return base;
}

inline std::string penalty_mode_name(PenaltyMode m) {
    return m == PenaltyMode::Count ? "count" : "magnitude";
}

inline PenaltyMode parse_penalty_mode(const std::string& s) {
    if (s == "count") return PenaltyMode::Count;
    if (s == "magnitude") return PenaltyMode::Magnitude;
    throw SchemaError("penalty_mode must be 'count' or 'magnitude', got '" + s + "'");
}

inline nlohmann::json gaconfig_to_json(const GAConfig& c) {
    return {{"population_size", c.population_size},
            {"generations", c.generations},
            {"tournament_size", c.tournament_size},
            {"blend_alpha", c.blend_alpha},
            {"mutation_rate", c.mutation_rate},
            {"mutation_scale", c.mutation_scale},
            {"elitism_count", c.elitism_count},
            {"n_counterfactuals", c.n_counterfactuals},
            {"target_class", c.target_class},
            {"seed", c.seed},
            {"constrained", c.constrained},
            {"smoothing_window", c.smoothing_window},
            {"penalty_mode", penalty_mode_name(c.penalty_mode)}};
}

inline GAConfig gaconfig_from_json(const nlohmann::json& j, GAConfig base = GAConfig{}) {
    try {
        base.population_size = j.value("population_size", base.population_size);
        base.generations = j.value("generations", base.generations);
        base.tournament_size = j.value("tournament_size", base.tournament_size);
        base.blend_alpha = j.value("blend_alpha", base.blend_alpha);
        base.mutation_rate = j.value("mutation_rate", base.mutation_rate);
        base.mutation_scale = j.value("mutation_scale", base.mutation_scale);
        base.elitism_count = j.value("elitism_count", base.elitism_count);
        base.n_counterfactuals = j.value("n_counterfactuals", base.n_counterfactuals);
        base.target_class = j.value("target_class", base.target_class);
        base.seed = j.value("seed", base.seed);
        base.constrained = j.value("constrained", base.constrained);
        base.smoothing_window = j.value("smoothing_window", base.smoothing_window);
        if (j.contains("penalty_mode"))
            base.penalty_mode = parse_penalty_mode(j.at("penalty_mode").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed GA config: ") + e.what());
    }
    return base;
}

// ---------------------------------------------------------------------------
// Counterfactual set documents
// ---------------------------------------------------------------------------

inline nlohmann::json breakdown_to_json(const FitnessBreakdown& b) {
    return {{"proximity", b.proximity},
            {"validity_loss", b.validity_loss},
            {"ordering_penalty", b.ordering_penalty},
            {"range_penalty", b.range_penalty},
            {"smoothness_penalty", b.smoothness_penalty},
            {"sparsity_fraction", b.sparsity_fraction},
            {"total", b.total}};
}

inline FitnessBreakdown breakdown_from_json(const nlohmann::json& j) {
    FitnessBreakdown b;
    b.proximity = j.at("proximity").get<double>();
    b.validity_loss = j.at("validity_loss").get<double>();
    b.ordering_penalty = j.at("ordering_penalty").get<double>();
    b.range_penalty = j.at("range_penalty").get<double>();
    b.smoothness_penalty = j.value("smoothness_penalty", 0.0);
    b.sparsity_fraction = j.at("sparsity_fraction").get<double>();
    b.total = j.at("total").get<double>();
    return b;
}

inline nlohmann::json cfe_set_to_json(const CounterfactualSet& set) {
    nlohmann::json candidates = nlohmann::json::array();
    for (const auto& c : set.candidates) {
        candidates.push_back({{"values", c.features.values},
                              {"predicted_label", c.predicted_label},
                              {"predicted_name", label_name(c.predicted_label)},
                              {"target_probability", c.target_probability},
                              {"p1", c.p1},
                              {"valid", c.valid},
                              {"smoothing_reverted", c.smoothing_reverted},
                              {"fitness", breakdown_to_json(c.breakdown)}});
    }
    return nlohmann::json{
        {"format", "sep-cfe-set"},
        {"version", kCfeSetFormatVersion},
        {"target_class", set.target_class},
        {"target_name", label_name(set.target_class)},
        {"query",
         {{"values", set.query.values},
          {"names", set.query.names},
          {"label", set.query_label},
          {"p1", set.query_p1}}},
        {"candidates", std::move(candidates)},
        {"provenance",
         {{"weights", weights_to_json(set.weights)},
          {"config", gaconfig_to_json(set.config)},
          {"seed", set.config.seed},
          {"runtime_seconds", set.runtime_seconds},
          {"diagnostics",
           {{"best_fitness_per_generation", set.diagnostics.best_fitness_per_generation},
            {"mean_final_ordering_penalty", set.diagnostics.mean_final_ordering_penalty},
            {"mean_final_range_penalty", set.diagnostics.mean_final_range_penalty}}}}}};
}

inline CounterfactualSet cfe_set_from_json(const nlohmann::json& j) {
    try {
        if (j.value("format", "") != "sep-cfe-set")
            throw SchemaError("not a counterfactual set file");
        if (j.value("version", 0) != kCfeSetFormatVersion)
            throw SchemaError("unsupported counterfactual set version");
        CounterfactualSet set;
        set.target_class = j.at("target_class").get<int>();
        const auto& qj = j.at("query");
        set.query.values = qj.at("values").get<std::vector<double>>();
        set.query.names = qj.value("names", std::vector<std::string>{});
        set.query_label = qj.at("label").get<int>();
        set.query.label = set.query_label;
        set.query_p1 = qj.at("p1").get<double>();
        for (const auto& cj : j.at("candidates")) {
            CandidateResult c;
            c.features.values = cj.at("values").get<std::vector<double>>();
            c.features.names = set.query.names;
            c.predicted_label = cj.at("predicted_label").get<int>();
            c.features.label = c.predicted_label;
            c.target_probability = cj.at("target_probability").get<double>();
            c.p1 = cj.at("p1").get<double>();
            c.valid = cj.at("valid").get<bool>();
            c.smoothing_reverted = cj.value("smoothing_reverted", false);
            c.breakdown = breakdown_from_json(cj.at("fitness"));
            set.candidates.push_back(std::move(c));
        }
        const auto& pj = j.at("provenance");
        set.weights = weights_from_json(pj.at("weights"));
        set.config = gaconfig_from_json(pj.at("config"));
        set.runtime_seconds = pj.value("runtime_seconds", 0.0);
        const auto& dj = pj.at("diagnostics");
        set.diagnostics.best_fitness_per_generation =
            dj.at("best_fitness_per_generation").get<std::vector<double>>();
        set.diagnostics.mean_final_ordering_penalty =
            dj.at("mean_final_ordering_penalty").get<double>();
        set.diagnostics.mean_final_range_penalty =
            dj.at("mean_final_range_penalty").get<double>();
        return set;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed counterfactual set file: ") + e.what());
    }
}

inline void save_cfe_set(const CounterfactualSet& set, const std::string& path) {
    write_json_file(path, cfe_set_to_json(set));
}

inline CounterfactualSet load_cfe_set(const std::string& path) {
    return cfe_set_from_json(read_json_file(path));
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline nlohmann::json quality_to_json(const DataQualityReport& q) {
    nlohmann::json channels = nlohmann::json::array();
    for (const auto& c : q.channels)
        channels.push_back({{"channel", c.channel},
                            {"empty_fields", c.empty_fields},
                            {"nonnumeric", c.nonnumeric},
                            {"nonpositive", c.nonpositive},
                            {"excluded", c.excluded()}});
    return {{"rows", q.rows}, {"channels", std::move(channels)}};
}

inline nlohmann::json skill_to_json(const SkillScores& s) {
    nlohmann::json j = nlohmann::json::object();
    const auto put = [&](const char* key, const std::optional<double>& v) {
        if (v)
            j[key] = *v;
        else
            j[key] = "undefined";
    };
    put("accuracy", s.accuracy);
    put("tss", s.tss);
    put("hss", s.hss);
    put("precision", s.precision);
    put("recall", s.recall);
    put("f1", s.f1);
    return j;
}

inline nlohmann::json confusion_to_json(const ConfusionCounts& c) {
    return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

inline nlohmann::json fidelity_to_json(const FidelityReport& r) {
    const auto cls = [](const ClassScores& s) {
        nlohmann::json j = nlohmann::json::object();
        j["precision"] = s.precision ? nlohmann::json(*s.precision) : nlohmann::json("undefined");
        j["recall"] = s.recall ? nlohmann::json(*s.recall) : nlohmann::json("undefined");
        j["f1"] = s.f1 ? nlohmann::json(*s.f1) : nlohmann::json("undefined");
        return j;
    };
    return {{"n_candidates", r.n_candidates},
            {"accuracy", r.accuracy},
            {"confusion", confusion_to_json(r.confusion)},
            {"SEP", cls(r.sep)},
            {"non-SEP", cls(r.non_sep)}};
}

inline nlohmann::json reconstruction_report_to_json(const ReconstructionReport& r) {
    nlohmann::json slices = nlohmann::json::array();
    for (const auto& s : r.slices)
        slices.push_back({{"slice", s.slice_index + 1},
                          {"target_mean", s.target_mean},
                          {"reconstructed_mean", s.reconstructed_mean},
                          {"residual", s.residual},
                          {"overlapped", s.overlapped}});
    return {{"slices", std::move(slices)},
            {"max_abs_residual_nonoverlap", r.max_abs_residual_nonoverlap},
            {"max_abs_residual_overlap", r.max_abs_residual_overlap},
            {"max_adjacent_jump", r.max_adjacent_jump},
            {"negative_perturbed", r.negative_perturbed}};
}

inline nlohmann::json benchmark_report_to_json(const MetricsReport& r) {
    nlohmann::json metrics = nlohmann::json::array();
    for (const auto& s : r.summaries)
        metrics.push_back({{"metric", s.metric},
                           {"higher_is_better", s.higher_is_better},
                           {r.method_a,
                            {{"mean", s.a.mean}, {"std", s.a.stddev}, {"normalized", s.a_normalized}}},
                           {r.method_b,
                            {{"mean", s.b.mean}, {"std", s.b.stddev}, {"normalized", s.b_normalized}}}});
    return {{"method_a", r.method_a}, {"method_b", r.method_b}, {"metrics", std::move(metrics)}};
}

// One row per instance per method; the tidy data behind the summary table.
inline void write_benchmark_csv(std::ostream& os, const MethodMetrics& a,
                                const MethodMetrics& b) {
    os << "method,instance,dtw,sparsity_fraction,diversity,runtime_seconds\n";
    const auto rows = [&os](const MethodMetrics& m) {
        for (std::size_t i = 0; i < m.dtw_values.size(); ++i)
            os << m.method << ',' << i << ',' << format_double(m.dtw_values[i]) << ','
               << format_double(m.sparsity_fractions[i]) << ','
               << format_double(m.diversity_values[i]) << ','
               << format_double(m.runtimes_seconds[i]) << '\n';
    };
    rows(a);
    rows(b);
}

// Radar-plot data: per-metric min-max normalized means, one row per
// method per axis.
inline void write_radar_csv(std::ostream& os, const MetricsReport& r) {
    os << "metric,method,normalized_value\n";
    for (const auto& s : r.summaries) {
        os << s.metric << ',' << r.method_a << ',' << format_double(s.a_normalized) << '\n';
        os << s.metric << ',' << r.method_b << ',' << format_double(s.b_normalized) << '\n';
    }
}

}  // namespace sepcf
