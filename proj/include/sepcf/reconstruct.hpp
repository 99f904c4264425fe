#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "sepcf/errors.hpp"
#include "sepcf/features.hpp"
#include "sepcf/genetic.hpp"
#include "sepcf/series.hpp"

namespace sepcf {

struct ReconstructionResult {
    std::size_t channel = 0;
    std::string channel_name;
    std::size_t candidate_index = 0;
    WindowBounds window_range{0, 0};
    std::vector<double> original;
    std::vector<double> offsets;
    std::vector<double> perturbed;
    std::vector<bool> missing;
    std::vector<std::size_t> slice_coverage;
    double y_min = 0.0;
    double y_max = 0.0;
    bool negative_perturbed = false;
};

namespace detail {

// Feature lookup for (channel, window): by name when the vector carries
// names, positionally via the grid width otherwise.
inline double cfe_slice_mean(const FeatureVector& cfe, const std::string& channel_name,
                             std::size_t channel, std::size_t window, std::size_t n_windows) {
    if (!cfe.names.empty()) {
        const std::string wanted = feature_name(channel_name, window);
        for (std::size_t f = 0; f < cfe.names.size(); ++f)
            if (cfe.names[f] == wanted) return cfe.values[f];
        throw MissingCfeFeature("counterfactual vector has no feature named " + wanted);
    }
    const std::size_t idx = channel * n_windows + window;
    if (idx >= cfe.values.size())
        throw MissingCfeFeature("counterfactual vector too short for window " +
                                std::to_string(window + 1) + " of channel " + channel_name);
    return cfe.values[idx];
}

}  // namespace detail

// Maps one channel of a counterfactual feature vector back onto the series:
// every grid slice inside window_range receives a constant offset equal to
// (counterfactual slice mean) - (original slice mean); overlapping slices
// average their accumulated offsets.
inline ReconstructionResult reconstruct(const FluxSeries& series, const FeatureVector& cfe,
                                        const WindowGrid& grid, std::size_t channel,
                                        WindowBounds window_range) {
    const std::size_t n = series.samples();
    if (channel >= series.channels())
        throw DimensionMismatch("channel index out of range");
    if (window_range.end > n || window_range.start >= window_range.end)
        throw EventOutsideSeries("observation window does not fit the series");

    ReconstructionResult r;
    r.channel = channel;
    r.channel_name = series.channel_names()[channel];
    r.window_range = window_range;
    r.original = series.channel(channel);
    r.missing = series.missing(channel);
    r.offsets.assign(n, 0.0);
    r.slice_coverage.assign(n, 0);

    std::vector<double> accum(n, 0.0);
    const std::size_t n_windows = grid.boundaries().size();
    for (std::size_t j = 0; j < n_windows; ++j) {
        const WindowBounds slice = grid.boundaries()[j];
        const bool starts_inside = slice.start >= window_range.start && slice.start < window_range.end;
        const bool ends_inside = slice.end > window_range.start && slice.end <= window_range.end;
        if (!starts_inside && !ends_inside) continue;  // fully outside
        if (!(starts_inside && ends_inside))
            throw SliceOutsideWindow("grid slice " + std::to_string(j + 1) +
                                     " crosses the observation window boundary");

        double orig_sum = 0.0;
        std::size_t orig_count = 0;
        for (std::size_t t = slice.start; t < slice.end; ++t) {
            if (series.is_missing(channel, t)) continue;
            orig_sum += r.original[t];
            ++orig_count;
        }
        if (orig_count == 0)
            throw EmptyWindow("slice " + std::to_string(j + 1) + " of channel " + r.channel_name +
                              " has no present samples");
        const double target = detail::cfe_slice_mean(cfe, r.channel_name, channel, j, n_windows);
        const double delta = target - orig_sum / static_cast<double>(orig_count);
        for (std::size_t t = slice.start; t < slice.end; ++t) {
            accum[t] += delta;
            ++r.slice_coverage[t];
        }
    }

    r.perturbed.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        if (r.slice_coverage[t] > 0 && !series.is_missing(channel, t))
            r.offsets[t] = accum[t] / static_cast<double>(r.slice_coverage[t]);
        r.perturbed[t] = r.original[t] + r.offsets[t];
        if (r.perturbed[t] < 0.0) r.negative_perturbed = true;
    }

    r.y_min = r.original[0];
    r.y_max = r.original[0];
    for (const auto* arr : {&r.original, &r.offsets, &r.perturbed}) {
        for (double v : *arr) {
            r.y_min = std::min(r.y_min, v);
            r.y_max = std::max(r.y_max, v);
        }
    }
    return r;
}

inline ReconstructionResult reconstruct(const FluxSeries& series, const FeatureVector& cfe,
                                        const WindowGrid& grid, std::size_t channel) {
    return reconstruct(series, cfe, grid, channel, WindowBounds{0, series.samples()});
}

// ---------------------------------------------------------------------------
// Verification report
// ---------------------------------------------------------------------------

struct SliceResidual {
    std::size_t slice_index = 0;
    double target_mean = 0.0;
    double reconstructed_mean = 0.0;
    double residual = 0.0;
    bool overlapped = false;
};

struct ReconstructionReport {
    std::vector<SliceResidual> slices;
    double max_abs_residual_nonoverlap = 0.0;
    double max_abs_residual_overlap = 0.0;
    double max_adjacent_jump = 0.0;
    bool negative_perturbed = false;
};

// Checks that each reconstructed slice mean matches the counterfactual's
// target mean. Non-overlapped slices must match to rounding error; slices
// sharing samples with a neighbour report the averaging residual.
inline ReconstructionReport verify_reconstruction(const ReconstructionResult& result,
                                                  const FeatureVector& cfe,
                                                  const WindowGrid& grid) {
    ReconstructionReport report;
    report.negative_perturbed = result.negative_perturbed;
    const std::size_t n_windows = grid.boundaries().size();
    for (std::size_t j = 0; j < n_windows; ++j) {
        const WindowBounds slice = grid.boundaries()[j];
        if (slice.start < result.window_range.start || slice.end > result.window_range.end)
            continue;
        SliceResidual sr;
        sr.slice_index = j;
        sr.target_mean =
            detail::cfe_slice_mean(cfe, result.channel_name, result.channel, j, n_windows);
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t t = slice.start; t < slice.end; ++t) {
            if (result.missing[t]) continue;
            sum += result.perturbed[t];
            ++count;
            if (result.slice_coverage[t] > 1) sr.overlapped = true;
        }
        if (count == 0) continue;
        sr.reconstructed_mean = sum / static_cast<double>(count);
        sr.residual = std::abs(sr.reconstructed_mean - sr.target_mean);
        if (sr.overlapped)
            report.max_abs_residual_overlap = std::max(report.max_abs_residual_overlap, sr.residual);
        else
            report.max_abs_residual_nonoverlap =
                std::max(report.max_abs_residual_nonoverlap, sr.residual);
        report.slices.push_back(sr);
    }
    for (std::size_t t = 1; t < result.perturbed.size(); ++t)
        report.max_adjacent_jump =
            std::max(report.max_adjacent_jump, std::abs(result.perturbed[t] - result.perturbed[t - 1]));
    return report;
}

// ---------------------------------------------------------------------------
// Batch reconstruction over a counterfactual set
// ---------------------------------------------------------------------------

struct ReconstructionItem {
    std::size_t candidate_index = 0;
    std::size_t channel = 0;
    bool ok = false;
    std::string error;
    ReconstructionResult result;
};

// One reconstruction per (candidate, channel); failures are recorded per
// item so one bad candidate cannot abort the batch.
inline std::vector<ReconstructionItem> reconstruct_all(const FluxSeries& series,
                                                       const CounterfactualSet& cfe_set,
                                                       const WindowGrid& grid,
                                                       WindowBounds window_range) {
    std::vector<ReconstructionItem> items;
    for (std::size_t c = 0; c < cfe_set.candidates.size(); ++c) {
        for (std::size_t ch = 0; ch < series.channels(); ++ch) {
            ReconstructionItem item;
            item.candidate_index = c;
            item.channel = ch;
            try {
                item.result = reconstruct(series, cfe_set.candidates[c].features, grid, ch,
                                          window_range);
                item.result.candidate_index = c;
                item.ok = true;
            } catch (const Error& e) {
                item.error = e.what();
            }
            items.push_back(std::move(item));
        }
    }
    return items;
}

inline std::vector<ReconstructionItem> reconstruct_all(const FluxSeries& series,
                                                       const CounterfactualSet& cfe_set,
                                                       const WindowGrid& grid) {
    return reconstruct_all(series, cfe_set, grid, WindowBounds{0, series.samples()});
}

// Long-format CSV for plotting: original rows carry candidate_id -1 and are
// written once per channel; offset/perturbed rows repeat per candidate.
inline void write_reconstruction_csv(std::ostream& os, const FluxSeries& series,
                                     const std::vector<ReconstructionItem>& items) {
    os << "timestamp,channel,variant,candidate_id,value\n";
    std::vector<std::size_t> originals_written;
    for (const auto& item : items) {
        if (!item.ok) continue;
        const ReconstructionResult& r = item.result;
        if (std::find(originals_written.begin(), originals_written.end(), r.channel) ==
            originals_written.end()) {
            for (std::size_t t = 0; t < r.original.size(); ++t)
                os << format_iso8601(series.time_at(t)) << ',' << r.channel_name << ",original,-1,"
                   << format_double(r.original[t]) << '\n';
            originals_written.push_back(r.channel);
        }
        for (std::size_t t = 0; t < r.offsets.size(); ++t)
            os << format_iso8601(series.time_at(t)) << ',' << r.channel_name << ",offset,"
               << item.candidate_index << ',' << format_double(r.offsets[t]) << '\n';
        for (std::size_t t = 0; t < r.perturbed.size(); ++t)
            os << format_iso8601(series.time_at(t)) << ',' << r.channel_name << ",perturbed,"
               << item.candidate_index << ',' << format_double(r.perturbed[t]) << '\n';
    }
}

}  // namespace sepcf
