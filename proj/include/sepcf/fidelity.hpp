#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sepcf/errors.hpp"
#include "sepcf/forest.hpp"
#include "sepcf/genetic.hpp"
#include "sepcf/metrics.hpp"

namespace sepcf {

struct ClassScores {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

struct FidelityReport {
    std::size_t n_candidates = 0;
    double accuracy = 0.0;
    ConfusionCounts confusion;
    ClassScores sep;
    ClassScores non_sep;
};

namespace detail {

inline void fidelity_accumulate(const CounterfactualSet& set, const ForestModel& model,
                                ConfusionCounts& confusion) {
    for (const auto& cand : set.candidates) {
        const int predicted = model.predict_proba(cand.features.values).label;
        if (set.target_class == 1)
            predicted == 1 ? ++confusion.tp : ++confusion.fn;
        else
            predicted == 1 ? ++confusion.fp : ++confusion.tn;
    }
}

inline FidelityReport fidelity_from_confusion(const ConfusionCounts& confusion) {
    FidelityReport r;
    r.confusion = confusion;
    r.n_candidates = static_cast<std::size_t>(confusion.total());
    if (r.n_candidates == 0) throw EmptySet("no candidates to evaluate");
    r.accuracy = static_cast<double>(confusion.tp + confusion.tn) /
                 static_cast<double>(confusion.total());
    const SkillScores pos = skill_scores(confusion);
    const SkillScores neg = skill_scores(swap_classes(confusion));
    r.sep = ClassScores{pos.precision, pos.recall, pos.f1};
    r.non_sep = ClassScores{neg.precision, neg.recall, neg.f1};
    return r;
}

}  // namespace detail

// Re-classifies every candidate with the model and scores it against the
// set's intended target label. Accuracy 1.0 means every explanation really
// flips the classifier.
inline FidelityReport fidelity(const CounterfactualSet& set, const ForestModel& model) {
    if (set.candidates.empty()) throw EmptySet("counterfactual set has no candidates");
    ConfusionCounts confusion;
    detail::fidelity_accumulate(set, model, confusion);
    return detail::fidelity_from_confusion(confusion);
}

// Pooled fidelity over several sets (e.g. SEP-to-quiet and quiet-to-SEP runs).
inline FidelityReport fidelity(const std::vector<CounterfactualSet>& sets,
                               const ForestModel& model) {
    if (sets.empty()) throw EmptySet("no counterfactual sets given");
    ConfusionCounts confusion;
    for (const auto& set : sets) detail::fidelity_accumulate(set, model, confusion);
    return detail::fidelity_from_confusion(confusion);
}

}  // namespace sepcf
