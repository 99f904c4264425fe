#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sepcf/errors.hpp"

namespace sepcf {

// Classic dynamic-programming DTW with |a - b| local cost and steps
// {(i-1,j), (i,j-1), (i-1,j-1)}. No band constraint.
inline double dtw(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw EmptySequence("dtw requires nonempty sequences");
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<double> prev(m), curr(m);
    prev[0] = std::abs(a[0] - b[0]);
    for (std::size_t j = 1; j < m; ++j) prev[j] = prev[j - 1] + std::abs(a[0] - b[j]);
    for (std::size_t i = 1; i < n; ++i) {
        curr[0] = prev[0] + std::abs(a[i] - b[0]);
        for (std::size_t j = 1; j < m; ++j) {
            const double best = std::min({prev[j], curr[j - 1], prev[j - 1]});
            curr[j] = best + std::abs(a[i] - b[j]);
        }
        std::swap(prev, curr);
    }
    return prev[m - 1];
}

struct SparsityResult {
    std::size_t changed_count = 0;
    double unchanged_fraction = 1.0;
};

// Changed-feature count (|x_i - x'_i| > epsilon) and the complementary
// unchanged fraction 1 - changed/d.
inline SparsityResult sparsity(const std::vector<double>& x, const std::vector<double>& xp,
                               double epsilon) {
    if (x.size() != xp.size()) throw DimensionMismatch("sparsity needs equal-length vectors");
    if (x.empty()) throw DimensionMismatch("sparsity needs at least one feature");
    if (epsilon < 0.0) throw InvalidConfig("sparsity epsilon must be >= 0");
    SparsityResult r;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (std::abs(x[i] - xp[i]) > epsilon) ++r.changed_count;
    r.unchanged_fraction =
        1.0 - static_cast<double>(r.changed_count) / static_cast<double>(x.size());
    return r;
}

inline double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimensionMismatch("distance needs equal-length vectors");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
}

inline double l2_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimensionMismatch("distance needs equal-length vectors");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

enum class DistanceNorm { L1, L2 };

// Mean pairwise distance over all unordered candidate pairs; 0 for fewer
// than two candidates. L1 is the published definition; L2 is optional.
inline double diversity_mean(const std::vector<std::vector<double>>& candidates,
                             DistanceNorm norm = DistanceNorm::L1) {
    const std::size_t n = candidates.size();
    if (n <= 1) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            sum += norm == DistanceNorm::L1 ? l1_distance(candidates[i], candidates[j])
                                            : l2_distance(candidates[i], candidates[j]);
    return sum * 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
}

// ---------------------------------------------------------------------------
// Skill scores
// ---------------------------------------------------------------------------

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
};

// A score is absent (not NaN) when its denominator vanishes.
struct SkillScores {
    std::optional<double> accuracy;
    std::optional<double> tss;
    std::optional<double> hss;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

inline SkillScores skill_scores(const ConfusionCounts& c) {
    SkillScores s;
    const double tp = static_cast<double>(c.tp);
    const double fp = static_cast<double>(c.fp);
    const double fn = static_cast<double>(c.fn);
    const double tn = static_cast<double>(c.tn);
    if (c.total() > 0) s.accuracy = (tp + tn) / static_cast<double>(c.total());
    if (c.tp + c.fn > 0 && c.fp + c.tn > 0) s.tss = tp / (tp + fn) - fp / (fp + tn);
    const double hss_denom = (tp + fn) * (fn + tn) + (tp + fp) * (fp + tn);
    if (hss_denom > 0.0) s.hss = 2.0 * (tp * tn - fp * fn) / hss_denom;
    if (c.tp + c.fp > 0) s.precision = tp / (tp + fp);
    if (c.tp + c.fn > 0) s.recall = tp / (tp + fn);
    if (2 * c.tp + c.fp + c.fn > 0) s.f1 = 2.0 * tp / (2.0 * tp + fp + fn);
    return s;
}

// Per-class precision/recall/F1 for a binary problem: class 1 uses the
// matrix as-is, class 0 the swapped one.
inline ConfusionCounts swap_classes(const ConfusionCounts& c) {
    return ConfusionCounts{c.tn, c.fn, c.fp, c.tp};
}

// ---------------------------------------------------------------------------
// Aggregation for method comparisons
// ---------------------------------------------------------------------------

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t count = 0;
};

inline MeanStd mean_std(const std::vector<double>& values) {
    MeanStd r;
    r.count = values.size();
    if (values.empty()) return r;
    double sum = 0.0;
    for (double v : values) sum += v;
    r.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - r.mean) * (v - r.mean);
    // Population std; a single sample has spread 0.
    r.stddev = std::sqrt(sq / static_cast<double>(values.size()));
    return r;
}

// Per-instance metric values for one method on a shared instance set.
struct MethodMetrics {
    std::string method;
    std::vector<double> dtw_values;
    std::vector<double> sparsity_fractions;
    std::vector<double> diversity_values;
    std::vector<double> runtimes_seconds;
};

struct MetricSummary {
    std::string metric;
    bool higher_is_better = false;
    MeanStd a;
    MeanStd b;
    double a_normalized = 0.0;  // min-max across the two methods
    double b_normalized = 0.0;
};

struct MetricsReport {
    std::string method_a;
    std::string method_b;
    std::vector<MetricSummary> summaries;
};

namespace detail {
inline void normalize_pair(MetricSummary& s) {
    const double lo = std::min(s.a.mean, s.b.mean);
    const double hi = std::max(s.a.mean, s.b.mean);
    if (hi > lo) {
        s.a_normalized = (s.a.mean - lo) / (hi - lo);
        s.b_normalized = (s.b.mean - lo) / (hi - lo);
    } else {
        s.a_normalized = s.b_normalized = 0.5;
    }
}
}  // namespace detail

inline MetricSummary summarize_pair(const std::string& name, bool higher_is_better,
                                    const std::vector<double>& va,
                                    const std::vector<double>& vb) {
    MetricSummary s;
    s.metric = name;
    s.higher_is_better = higher_is_better;
    s.a = mean_std(va);
    s.b = mean_std(vb);
    detail::normalize_pair(s);
    return s;
}

// Mean +- std per metric per method, plus [0,1] min-max normalized values
// for radar-style plots. Both methods must cover the same instances.
inline MetricsReport benchmark_compare(const MethodMetrics& a, const MethodMetrics& b) {
    const auto check = [&](const std::vector<double>& va, const std::vector<double>& vb) {
        if (va.size() != vb.size())
            throw MismatchedInstanceSets("methods ran on different instance sets");
    };
    check(a.dtw_values, b.dtw_values);
    check(a.sparsity_fractions, b.sparsity_fractions);
    check(a.diversity_values, b.diversity_values);
    check(a.runtimes_seconds, b.runtimes_seconds);
    if (a.dtw_values.empty()) throw MismatchedInstanceSets("no instances to compare");

    MetricsReport report;
    report.method_a = a.method;
    report.method_b = b.method;
    report.summaries.push_back(summarize_pair("dtw", false, a.dtw_values, b.dtw_values));
    report.summaries.push_back(
        summarize_pair("sparsity", true, a.sparsity_fractions, b.sparsity_fractions));
    report.summaries.push_back(
        summarize_pair("diversity", true, a.diversity_values, b.diversity_values));
    report.summaries.push_back(
        summarize_pair("runtime", false, a.runtimes_seconds, b.runtimes_seconds));
    return report;
}

}  // namespace sepcf
