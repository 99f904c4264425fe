#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sepcf/constraints.hpp"
#include "sepcf/errors.hpp"
#include "sepcf/features.hpp"
#include "sepcf/forest.hpp"
#include "sepcf/rng.hpp"

namespace sepcf {

struct ObjectiveWeights {
    double proximity_weight = 10.0;
    double sparsity_weight = 0.1;
    double diversity_weight = 1.0;
    // Heavy enough that a prediction flip always pays for the proximity cost
    // of crossing the class gap; with weaker values the search settles on
    // near-query candidates that never flip.
    double validity_weight = 1000.0;
    double ordering_penalty_weight = 10.0;
    double range_penalty_weight = 10.0;
    // Off by default: temporal consistency is normally enforced by the
    // post-hoc smoothing pass, not inside the fitness.
    double smoothness_penalty_weight = 0.0;

    void validate() const {
        for (double w : {proximity_weight, sparsity_weight, diversity_weight, validity_weight,
                         ordering_penalty_weight, range_penalty_weight,
                         smoothness_penalty_weight})
            if (!(w >= 0.0)) throw InvalidConfig("objective weights must be >= 0");
    }
};

struct GAConfig {
    std::size_t population_size = 120;
    std::size_t generations = 150;
    std::size_t tournament_size = 3;
    double blend_alpha = 1.0;
    double mutation_rate = 0.2;
    // Mutation step as a fraction of each feature's bound width.
    double mutation_scale = 0.1;
    std::size_t elitism_count = 2;
    std::size_t n_counterfactuals = 3;
    // Desired class for the counterfactuals; -1 means "opposite of the query".
    int target_class = -1;
    std::uint64_t seed = 0;
    // When true, candidates are clamped into bounds and ordering-repaired
    // after initialization, mutation, and smoothing.
    bool constrained = true;
    // Rolling-mean window applied to returned candidates; 0 or 1 disables it.
    std::size_t smoothing_window = 3;
    PenaltyMode penalty_mode = PenaltyMode::Count;

    void validate() const {
        if (n_counterfactuals < 1) throw InvalidConfig("n_counterfactuals must be >= 1");
        if (population_size < n_counterfactuals)
            throw InvalidConfig("population_size must be >= n_counterfactuals");
        if (tournament_size < 2) throw InvalidConfig("tournament_size must be >= 2");
        if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0))
            throw InvalidConfig("mutation_rate must be in [0, 1]");
        if (!(blend_alpha > 0.0 && blend_alpha <= 1.0))
            throw InvalidConfig("blend_alpha must be in (0, 1]");
        if (!(mutation_scale >= 0.0)) throw InvalidConfig("mutation_scale must be >= 0");
        if (target_class > 1) throw InvalidConfig("target_class must be 0, 1, or -1 for auto");
        if (smoothing_window > 1 && smoothing_window % 2 == 0)
            throw InvalidConfig("smoothing_window must be odd (or 0/1 to disable)");
    }
};

// Per-feature min-max scaling derived from the spec bounds, so proximity,
// sparsity, and diversity are scale-free across channels.
class Normalizer {
public:
    explicit Normalizer(const PhysicsSpec& spec) {
        lo_.reserve(spec.bounds.size());
        width_.reserve(spec.bounds.size());
        for (const auto& b : spec.bounds) {
            lo_.push_back(b.lo);
            const double w = b.hi - b.lo;
            width_.push_back(w > 0.0 ? w : 1.0);
        }
    }

    std::size_t dimension() const { return lo_.size(); }

    double scale(std::size_t f, double v) const { return (v - lo_[f]) / width_[f]; }

    double l1(const std::vector<double>& a, const std::vector<double>& b) const {
        double s = 0.0;
        for (std::size_t f = 0; f < a.size(); ++f) s += std::abs(a[f] - b[f]) / width_[f];
        return s;
    }

    std::size_t changed_count(const std::vector<double>& a, const std::vector<double>& b,
                              double epsilon = 1e-6) const {
        std::size_t changed = 0;
        for (std::size_t f = 0; f < a.size(); ++f)
            if (std::abs(a[f] - b[f]) / width_[f] > epsilon) ++changed;
        return changed;
    }

private:
    std::vector<double> lo_;
    std::vector<double> width_;
};

struct FitnessBreakdown {
    double proximity = 0.0;
    double validity_loss = 0.0;
    double ordering_penalty = 0.0;
    double range_penalty = 0.0;
    double smoothness_penalty = 0.0;
    double sparsity_fraction = 0.0;
    double total = 0.0;
};

inline FitnessBreakdown fitness(const std::vector<double>& candidate,
                                const std::vector<double>& query, const ForestModel& model,
                                const PhysicsSpec& spec, const ObjectiveWeights& weights,
                                int target_class, const Normalizer& norm,
                                PenaltyMode mode = PenaltyMode::Count) {
    if (candidate.size() != query.size() || candidate.size() != spec.layout.dimension())
        throw DimensionMismatch("fitness operands disagree on dimension");
    FitnessBreakdown b;
    b.proximity = norm.l1(candidate, query);
    const Prediction pred = model.predict_proba(candidate);
    const double p_target = target_class == 1 ? pred.p1 : pred.p0;
    b.validity_loss = std::max(0.0, 0.5 - p_target);
    b.ordering_penalty = mode == PenaltyMode::Count
                             ? static_cast<double>(ordering_penalty(candidate, spec))
                             : ordering_penalty_magnitude(candidate, spec);
    b.range_penalty = mode == PenaltyMode::Count
                          ? static_cast<double>(range_penalty(candidate, spec))
                          : range_penalty_magnitude(candidate, spec);
    b.smoothness_penalty = weights.smoothness_penalty_weight > 0.0
                               ? static_cast<double>(smoothness_violations(candidate, spec))
                               : 0.0;
    b.sparsity_fraction = static_cast<double>(norm.changed_count(candidate, query)) /
                          static_cast<double>(candidate.size());
    b.total = weights.proximity_weight * b.proximity + weights.validity_weight * b.validity_loss +
              weights.ordering_penalty_weight * b.ordering_penalty +
              weights.range_penalty_weight * b.range_penalty +
              weights.smoothness_penalty_weight * b.smoothness_penalty +
              weights.sparsity_weight * b.sparsity_fraction;
    return b;
}

inline FitnessBreakdown fitness(const FeatureVector& candidate, const FeatureVector& query,
                                const ForestModel& model, const PhysicsSpec& spec,
                                const ObjectiveWeights& weights, int target_class,
                                PenaltyMode mode = PenaltyMode::Count) {
    Normalizer norm(spec);
    return fitness(candidate.values, query.values, model, spec, weights, target_class, norm, mode);
}

// Clamp into bounds, then one descending ordering pass per window group.
// The pass re-clamps each fixed value, which makes repair idempotent even
// when bounds and ordering disagree; with coherent bounds (as produced by
// fit_spec) the result satisfies both ordering and range exactly.
inline std::vector<double> repair(std::vector<double> x, const PhysicsSpec& spec) {
    if (x.size() != spec.layout.dimension())
        throw DimensionMismatch("repair input does not match the spec dimension");
    for (std::size_t f = 0; f < x.size(); ++f)
        x[f] = std::clamp(x[f], spec.bounds[f].lo, spec.bounds[f].hi);
    for (const auto& group : spec.ordering_groups) {
        for (std::size_t p = 1; p < group.size(); ++p) {
            const std::size_t prev = group[p - 1];
            const std::size_t cur = group[p];
            double v = std::min(x[cur], x[prev]);
            x[cur] = std::clamp(v, spec.bounds[cur].lo, spec.bounds[cur].hi);
        }
    }
    return x;
}

inline FeatureVector repair(const FeatureVector& x, const PhysicsSpec& spec) {
    FeatureVector out = x;
    out.values = repair(x.values, spec);
    return out;
}

struct CandidateResult {
    FeatureVector features;
    int predicted_label = 0;
    double target_probability = 0.0;
    double p1 = 0.0;
    FitnessBreakdown breakdown;
    bool valid = false;
    bool smoothing_reverted = false;
};

struct EvolveDiagnostics {
    std::vector<double> best_fitness_per_generation;
    // Raw final-population penalties, taken before selection and smoothing.
    double mean_final_ordering_penalty = 0.0;
    double mean_final_range_penalty = 0.0;
};

struct CounterfactualSet {
    FeatureVector query;
    int query_label = 0;
    double query_p1 = 0.0;
    int target_class = 1;
    std::vector<CandidateResult> candidates;
    ObjectiveWeights weights;
    GAConfig config;
    double runtime_seconds = 0.0;
    EvolveDiagnostics diagnostics;

    bool any_valid() const {
        return std::any_of(candidates.begin(), candidates.end(),
                           [](const CandidateResult& c) { return c.valid; });
    }
    std::size_t valid_count() const {
        return static_cast<std::size_t>(std::count_if(
            candidates.begin(), candidates.end(), [](const CandidateResult& c) { return c.valid; }));
    }
};

namespace detail {

struct ScoredVector {
    std::vector<double> values;
    FitnessBreakdown breakdown;
};

inline std::size_t tournament_pick(const std::vector<ScoredVector>& pop, std::size_t rounds,
                                   Rng& rng) {
    std::size_t best = rng.bounded(pop.size());
    for (std::size_t k = 1; k < rounds; ++k) {
        const std::size_t challenger = rng.bounded(pop.size());
        if (pop[challenger].breakdown.total < pop[best].breakdown.total) best = challenger;
    }
    return best;
}

inline CandidateResult score_candidate(std::vector<double> values, const FeatureVector& query,
                                       const ForestModel& model, const PhysicsSpec& spec,
                                       const ObjectiveWeights& weights, int target,
                                       const Normalizer& norm, PenaltyMode mode) {
    CandidateResult r;
    r.breakdown = fitness(values, query.values, model, spec, weights, target, norm, mode);
    const Prediction pred = model.predict_proba(values);
    r.predicted_label = pred.label;
    r.p1 = pred.p1;
    r.target_probability = target == 1 ? pred.p1 : pred.p0;
    r.valid = pred.label == target;
    r.features.values = std::move(values);
    r.features.names = query.names;
    r.features.label = r.predicted_label;
    return r;
}

}  // namespace detail

// Generates counterfactual candidates for one query instance by a seeded
// genetic search over the spec's feature box. Deterministic given the seed;
// only runtime_seconds varies between identical runs.
inline CounterfactualSet evolve(const FeatureVector& x, const ForestModel& model,
                                const PhysicsSpec& spec, const ObjectiveWeights& weights,
                                const GAConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    config.validate();
    weights.validate();
    spec.validate();
    const std::size_t d = spec.layout.dimension();
    if (x.dimension() != d || model.n_features() != d)
        throw DimensionMismatch("query, model, and spec disagree on dimension");

    CounterfactualSet out;
    out.query = x;
    out.weights = weights;
    out.config = config;

    const Prediction query_pred = model.predict_proba(x.values);
    out.query_label = query_pred.label;
    out.query_p1 = query_pred.p1;
    const int target = config.target_class >= 0 ? config.target_class : 1 - query_pred.label;
    out.target_class = target;
    out.config.target_class = target;

    const Normalizer norm(spec);

    if (query_pred.label == target) {
        // Degenerate query: it already carries the target label.
        out.candidates.push_back(detail::score_candidate(x.values, x, model, spec, weights, target,
                                                         norm, config.penalty_mode));
        out.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
    }

    Rng rng(config.seed);
    const std::size_t P = config.population_size;
    std::vector<detail::ScoredVector> pop;
    pop.reserve(P);

    const std::size_t k_resample = std::max<std::size_t>(1, d / 10);
    std::vector<std::size_t> feature_ids(d);
    std::iota(feature_ids.begin(), feature_ids.end(), std::size_t{0});

    for (std::size_t i = 0; i < P; ++i) {
        std::vector<double> v;
        if (i < P / 2) {
            v.resize(d);
            for (std::size_t f = 0; f < d; ++f)
                v[f] = rng.uniform(spec.bounds[f].lo, spec.bounds[f].hi);
        } else {
            v = x.values;
            for (std::size_t k = 0; k < k_resample; ++k) {
                const std::size_t pick = k + rng.bounded(d - k);
                std::swap(feature_ids[k], feature_ids[pick]);
                const std::size_t f = feature_ids[k];
                v[f] = rng.uniform(spec.bounds[f].lo, spec.bounds[f].hi);
            }
        }
        if (config.constrained) v = repair(std::move(v), spec);
        detail::ScoredVector sv;
        sv.breakdown = fitness(v, x.values, model, spec, weights, target, norm, config.penalty_mode);
        sv.values = std::move(v);
        pop.push_back(std::move(sv));
    }

    std::vector<std::size_t> order(P);
    for (std::size_t gen = 0; gen < config.generations; ++gen) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return pop[a].breakdown.total < pop[b].breakdown.total;
        });
        out.diagnostics.best_fitness_per_generation.push_back(pop[order[0]].breakdown.total);

        std::vector<detail::ScoredVector> next;
        next.reserve(P);
        for (std::size_t e = 0; e < std::min(config.elitism_count, P); ++e)
            next.push_back(pop[order[e]]);

        while (next.size() < P) {
            const auto& a = pop[detail::tournament_pick(pop, config.tournament_size, rng)];
            const auto& b = pop[detail::tournament_pick(pop, config.tournament_size, rng)];
            std::vector<double> child(d);
            for (std::size_t f = 0; f < d; ++f) {
                const double alpha = rng.uniform() * config.blend_alpha;
                child[f] = alpha * a.values[f] + (1.0 - alpha) * b.values[f];
            }
            for (std::size_t f = 0; f < d; ++f) {
                if (rng.uniform() < config.mutation_rate)
                    child[f] += rng.gaussian() * config.mutation_scale * spec.range_width(f);
            }
            if (config.constrained) child = repair(std::move(child), spec);
            detail::ScoredVector sv;
            sv.breakdown =
                fitness(child, x.values, model, spec, weights, target, norm, config.penalty_mode);
            sv.values = std::move(child);
            next.push_back(std::move(sv));
        }
        pop = std::move(next);
    }

    double order_sum = 0.0, range_sum = 0.0;
    for (const auto& sv : pop) {
        order_sum += static_cast<double>(ordering_penalty(sv.values, spec));
        range_sum += static_cast<double>(range_penalty(sv.values, spec));
    }
    out.diagnostics.mean_final_ordering_penalty = order_sum / static_cast<double>(P);
    out.diagnostics.mean_final_range_penalty = range_sum / static_cast<double>(P);

    // Greedy diversity-aware pick of n distinct candidates: best fitness
    // first, then repeatedly the lowest (fitness - diversity_weight * mean
    // normalized L1 distance to those already picked).
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pop[a].breakdown.total < pop[b].breakdown.total;
    });
    std::vector<std::size_t> distinct;
    for (std::size_t idx : order) {
        const bool dup = std::any_of(distinct.begin(), distinct.end(), [&](std::size_t seen) {
            return pop[seen].values == pop[idx].values;
        });
        if (!dup) distinct.push_back(idx);
    }

    std::vector<std::size_t> picked;
    const std::size_t n_wanted = std::min(config.n_counterfactuals, distinct.size());
    while (picked.size() < n_wanted) {
        if (picked.empty()) {
            picked.push_back(distinct.front());
            continue;
        }
        std::size_t best_idx = 0;
        double best_score = 0.0;
        bool have = false;
        for (std::size_t c = 0; c < distinct.size(); ++c) {
            const std::size_t idx = distinct[c];
            if (std::find(picked.begin(), picked.end(), idx) != picked.end()) continue;
            double dist_sum = 0.0;
            for (std::size_t p : picked) dist_sum += norm.l1(pop[idx].values, pop[p].values);
            const double score = pop[idx].breakdown.total -
                                 weights.diversity_weight *
                                     (dist_sum / static_cast<double>(picked.size()));
            if (!have || score < best_score) {
                have = true;
                best_score = score;
                best_idx = idx;
            }
        }
        picked.push_back(best_idx);
    }

    for (std::size_t idx : picked) {
        std::vector<double> raw = pop[idx].values;
        CandidateResult pre = detail::score_candidate(raw, x, model, spec, weights, target, norm,
                                                      config.penalty_mode);
        if (config.smoothing_window > 1) {
            std::vector<double> smoothed =
                rolling_mean_smooth(raw, config.smoothing_window, spec.layout);
            if (config.constrained) smoothed = repair(std::move(smoothed), spec);
            CandidateResult post = detail::score_candidate(std::move(smoothed), x, model, spec,
                                                           weights, target, norm,
                                                           config.penalty_mode);
            if (post.valid || !pre.valid) {
                out.candidates.push_back(std::move(post));
            } else {
                pre.smoothing_reverted = true;
                out.candidates.push_back(std::move(pre));
            }
        } else {
            out.candidates.push_back(std::move(pre));
        }
    }

    out.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace sepcf
