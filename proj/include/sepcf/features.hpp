#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "sepcf/errors.hpp"
#include "sepcf/series.hpp"

namespace sepcf {

// Per-window per-channel statistics: entry (i, j) is the mean flux of
// channel i inside window j. Stored row-major, channels x windows.
class FeatureMatrix {
public:
    FeatureMatrix(std::size_t channels, std::size_t windows)
        : channels_(channels), windows_(windows), entries_(channels * windows, 0.0) {
        if (channels == 0 || windows == 0)
            throw DimensionMismatch("feature matrix needs at least one channel and window");
    }

    std::size_t channels() const { return channels_; }
    std::size_t windows() const { return windows_; }

    double& at(std::size_t channel, std::size_t window) {
        check(channel, window);
        return entries_[channel * windows_ + window];
    }
    double at(std::size_t channel, std::size_t window) const {
        check(channel, window);
        return entries_[channel * windows_ + window];
    }

    const std::vector<double>& entries() const { return entries_; }

    bool operator==(const FeatureMatrix& o) const {
        return channels_ == o.channels_ && windows_ == o.windows_ && entries_ == o.entries_;
    }

private:
    void check(std::size_t channel, std::size_t window) const {
        if (channel >= channels_ || window >= windows_)
            throw DimensionMismatch("feature matrix index out of range");
    }

    std::size_t channels_;
    std::size_t windows_;
    std::vector<double> entries_;
};

// Flat channel-major view of a FeatureMatrix: the optimizer's search space.
// Labels: 1 = SEP, 0 = non-SEP.
struct FeatureVector {
    std::vector<double> values;
    std::vector<std::string> names;
    std::optional<int> label;

    std::size_t dimension() const { return values.size(); }
};

constexpr int kLabelNonSep = 0;
constexpr int kLabelSep = 1;

inline int parse_label(const std::string& s) {
    if (s == "SEP") return kLabelSep;
    if (s == "non-SEP") return kLabelNonSep;
    throw SchemaError("label must be 'SEP' or 'non-SEP', got '" + s + "'");
}

inline std::string label_name(int label) { return label == kLabelSep ? "SEP" : "non-SEP"; }

// Mean of the non-missing samples of each channel inside each grid window.
// A window with zero usable samples for some channel is an error.
inline FeatureMatrix extract_features(const FluxSeries& series, const WindowGrid& grid) {
    if (grid.max_end() > series.samples())
        throw DimensionMismatch("window grid extends past the end of the series");
    FeatureMatrix out(series.channels(), grid.count());
    for (std::size_t i = 0; i < series.channels(); ++i) {
        const auto& vals = series.channel(i);
        const auto& miss = series.missing(i);
        for (std::size_t j = 0; j < grid.count(); ++j) {
            const auto& w = grid.window(j);
            double sum = 0.0;
            std::size_t n = 0;
            for (std::size_t t = w.start; t < w.end; ++t) {
                if (miss[t]) continue;
                sum += vals[t];
                ++n;
            }
            if (n == 0)
                throw EmptyWindow("window " + std::to_string(j + 1) + " of channel '" +
                                  series.channel_names()[i] + "' has no usable samples");
            out.at(i, j) = sum / static_cast<double>(n);
        }
    }
    return out;
}

// x = flattened X, channel-major: [x_1[w_1] .. x_1[w_W], x_2[w_1], ...].
inline FeatureVector vectorize(const FeatureMatrix& matrix,
                               const std::vector<std::string>& channel_names) {
    if (channel_names.size() != matrix.channels())
        throw DimensionMismatch("channel name count does not match matrix");
    FeatureVector v;
    v.values = matrix.entries();
    v.names.reserve(v.values.size());
    for (std::size_t i = 0; i < matrix.channels(); ++i)
        for (std::size_t j = 0; j < matrix.windows(); ++j)
            v.names.push_back(feature_name(channel_names[i], j));
    return v;
}

inline FeatureVector vectorize(const FeatureMatrix& matrix, const ChannelLayout& layout) {
    if (layout.channels != matrix.channels() || layout.windows != matrix.windows())
        throw DimensionMismatch("layout does not match matrix");
    return vectorize(matrix, layout.channel_names);
}

// Exact inverse of vectorize.
inline FeatureMatrix unvectorize(const std::vector<double>& values, std::size_t channels,
                                 std::size_t windows) {
    if (values.size() != channels * windows)
        throw DimensionMismatch("vector length " + std::to_string(values.size()) +
                                " does not factor as " + std::to_string(channels) + "x" +
                                std::to_string(windows));
    FeatureMatrix m(channels, windows);
    for (std::size_t i = 0; i < channels; ++i)
        for (std::size_t j = 0; j < windows; ++j) m.at(i, j) = values[i * windows + j];
    return m;
}

inline FeatureMatrix unvectorize(const FeatureVector& v, std::size_t channels,
                                 std::size_t windows) {
    return unvectorize(v.values, channels, windows);
}

}  // namespace sepcf
