#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "sepcf/errors.hpp"

namespace sepcf {

// ---------------------------------------------------------------------------
// UTC time helpers. Timestamps are epoch seconds; files use ISO-8601.
// ---------------------------------------------------------------------------

namespace detail {

// Howard Hinnant's civil-days algorithm.
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yr + (m <= 2));
}

inline bool parse_fixed_uint(const std::string& s, std::size_t off, std::size_t len, int& out) {
    if (off + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = 0; i < len; ++i) {
        const char c = s[off + i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

}  // namespace detail

// Parses "YYYY-MM-DDTHH:MM:SS" with optional trailing 'Z'. Throws SchemaError.
inline std::int64_t parse_iso8601(const std::string& s) {
    std::string t = s;
    if (!t.empty() && t.back() == 'Z') t.pop_back();
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
    const bool ok = t.size() == 19 && t[4] == '-' && t[7] == '-' &&
                    (t[10] == 'T' || t[10] == ' ') && t[13] == ':' && t[16] == ':' &&
                    detail::parse_fixed_uint(t, 0, 4, y) && detail::parse_fixed_uint(t, 5, 2, mo) &&
                    detail::parse_fixed_uint(t, 8, 2, d) && detail::parse_fixed_uint(t, 11, 2, h) &&
                    detail::parse_fixed_uint(t, 14, 2, mi) && detail::parse_fixed_uint(t, 17, 2, se);
    if (!ok || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 59)
        throw SchemaError("bad ISO-8601 timestamp: '" + s + "'");
    return detail::days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
           h * 3600 + mi * 60 + se;
}

inline std::string format_iso8601(std::int64_t epoch_seconds) {
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y;
    unsigned mo, d;
    detail::civil_from_days(days, y, mo, d);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, mo, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

// Shortest round-trip decimal form, used by every text output format.
inline std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

// ---------------------------------------------------------------------------
// Core series types
// ---------------------------------------------------------------------------

// Channel/window geometry of a feature space. Channel index 0 is the lowest
// energy channel (highest characteristic flux); d = channels * windows.
struct ChannelLayout {
    std::size_t channels = 0;
    std::size_t windows = 0;
    std::vector<std::string> channel_names;

    std::size_t dimension() const { return channels * windows; }
    std::size_t feature_index(std::size_t channel, std::size_t window) const {
        return channel * windows + window;
    }

    void validate() const {
        if (channels == 0 || windows == 0)
            throw InvalidConfig("layout needs at least one channel and one window");
        if (channel_names.size() != channels)
            throw InvalidConfig("layout channel_names size does not match channel count");
        for (std::size_t i = 0; i < channels; ++i)
            for (std::size_t k = i + 1; k < channels; ++k)
                if (channel_names[i] == channel_names[k])
                    throw InvalidConfig("duplicate channel name '" + channel_names[i] + "'");
    }
};

// Canonical feature name for channel `name`, window j (0-based in code,
// 1-based in the name).
inline std::string feature_name(const std::string& channel_name, std::size_t window) {
    return channel_name + "_w" + std::to_string(window + 1);
}

inline std::vector<std::string> feature_names(const ChannelLayout& layout) {
    std::vector<std::string> names;
    names.reserve(layout.dimension());
    for (std::size_t i = 0; i < layout.channels; ++i)
        for (std::size_t j = 0; j < layout.windows; ++j)
            names.push_back(feature_name(layout.channel_names[i], j));
    return names;
}

// Raw multi-channel flux series at a fixed cadence. values[i][t] is channel
// i at sample t; missing[i][t] marks samples excluded from every statistic.
class FluxSeries {
public:
    // An empty missing mask means "all samples present".
    FluxSeries(std::int64_t start_time, std::int64_t cadence_seconds,
               std::vector<std::string> channel_names, std::vector<std::vector<double>> values,
               std::vector<std::vector<bool>> missing = {})
        : start_time_(start_time),
          cadence_(cadence_seconds),
          channel_names_(std::move(channel_names)),
          values_(std::move(values)),
          missing_(std::move(missing)) {
        if (cadence_ <= 0) throw InvalidConfig("cadence must be positive");
        if (values_.empty() || channel_names_.size() != values_.size())
            throw InvalidConfig("channel names and value rows must agree and be nonempty");
        const std::size_t t = values_.front().size();
        if (missing_.empty())
            missing_.assign(values_.size(), std::vector<bool>(t, false));
        if (missing_.size() != values_.size())
            throw InvalidConfig("missing mask must have one row per channel");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (values_[i].size() != t || missing_[i].size() != t)
                throw InvalidConfig("all channel rows must share the same length");
            for (std::size_t k = 0; k < t; ++k)
                if (!missing_[i][k] && !std::isfinite(values_[i][k]))
                    throw InvalidConfig("non-missing sample is not finite");
        }
        for (std::size_t i = 0; i < channel_names_.size(); ++i)
            for (std::size_t k = i + 1; k < channel_names_.size(); ++k)
                if (channel_names_[i] == channel_names_[k])
                    throw InvalidConfig("duplicate channel name '" + channel_names_[i] + "'");
    }

    std::int64_t start_time() const { return start_time_; }
    std::int64_t cadence() const { return cadence_; }
    std::size_t channels() const { return values_.size(); }
    std::size_t samples() const { return values_.front().size(); }
    const std::vector<std::string>& channel_names() const { return channel_names_; }
    const std::vector<double>& channel(std::size_t i) const { return values_.at(i); }
    const std::vector<bool>& missing(std::size_t i) const { return missing_.at(i); }
    double value(std::size_t i, std::size_t t) const { return values_.at(i).at(t); }
    bool is_missing(std::size_t i, std::size_t t) const { return missing_.at(i).at(t); }

    std::int64_t time_at(std::size_t t) const {
        return start_time_ + static_cast<std::int64_t>(t) * cadence_;
    }

    std::size_t channel_index(const std::string& name) const {
        for (std::size_t i = 0; i < channel_names_.size(); ++i)
            if (channel_names_[i] == name) return i;
        throw InvalidConfig("unknown channel '" + name + "'");
    }

private:
    std::int64_t start_time_;
    std::int64_t cadence_;
    std::vector<std::string> channel_names_;
    std::vector<std::vector<double>> values_;
    std::vector<std::vector<bool>> missing_;
};

// Half-open [start, end) sample-index window.
struct WindowBounds {
    std::size_t start = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - start; }
};

// Copy of the sample range [bounds.start, bounds.end) as its own series.
inline FluxSeries slice_series(const FluxSeries& series, WindowBounds bounds) {
    if (bounds.end > series.samples() || bounds.start >= bounds.end)
        throw InvalidConfig("slice range outside the series");
    std::vector<std::vector<double>> values(series.channels());
    std::vector<std::vector<bool>> missing(series.channels());
    for (std::size_t i = 0; i < series.channels(); ++i) {
        const auto& v = series.channel(i);
        const auto& m = series.missing(i);
        values[i].assign(v.begin() + static_cast<std::ptrdiff_t>(bounds.start),
                         v.begin() + static_cast<std::ptrdiff_t>(bounds.end));
        missing[i].assign(m.begin() + static_cast<std::ptrdiff_t>(bounds.start),
                          m.begin() + static_cast<std::ptrdiff_t>(bounds.end));
    }
    return FluxSeries(series.time_at(bounds.start), series.cadence(), series.channel_names(),
                      std::move(values), std::move(missing));
}

// Sliding-window segmentation over a series of T samples.
class WindowGrid {
public:
    WindowGrid(std::vector<WindowBounds> boundaries, std::size_t window_samples,
               std::size_t stride_samples)
        : boundaries_(std::move(boundaries)),
          window_samples_(window_samples),
          stride_samples_(stride_samples) {
        if (boundaries_.empty()) throw InvalidConfig("window grid needs at least one window");
        std::size_t prev_start = 0;
        for (std::size_t j = 0; j < boundaries_.size(); ++j) {
            const auto& b = boundaries_[j];
            if (b.end <= b.start) throw InvalidConfig("window must span at least one sample");
            if (j > 0 && b.start < prev_start) throw InvalidConfig("windows must be sorted by start");
            prev_start = b.start;
        }
    }

    // Windows of `window_samples` samples every `stride_samples`, fitting
    // entirely inside [0, total_samples).
    static WindowGrid sliding(std::size_t total_samples, std::size_t window_samples,
                              std::size_t stride_samples) {
        if (window_samples == 0 || stride_samples == 0)
            throw InvalidConfig("window and stride must be positive");
        if (window_samples > total_samples)
            throw InvalidConfig("window length exceeds series length");
        std::vector<WindowBounds> b;
        for (std::size_t s = 0; s + window_samples <= total_samples; s += stride_samples)
            b.push_back({s, s + window_samples});
        return WindowGrid(std::move(b), window_samples, stride_samples);
    }

    std::size_t count() const { return boundaries_.size(); }
    const WindowBounds& window(std::size_t j) const { return boundaries_.at(j); }
    const std::vector<WindowBounds>& boundaries() const { return boundaries_; }
    std::size_t window_samples() const { return window_samples_; }
    std::size_t stride_samples() const { return stride_samples_; }
    bool overlapping() const { return stride_samples_ < window_samples_; }

    std::size_t max_end() const {
        std::size_t e = 0;
        for (const auto& b : boundaries_) e = std::max(e, b.end);
        return e;
    }

private:
    std::vector<WindowBounds> boundaries_;
    std::size_t window_samples_;
    std::size_t stride_samples_;
};

}  // namespace sepcf
