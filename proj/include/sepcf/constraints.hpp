#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "sepcf/errors.hpp"
#include "sepcf/features.hpp"
#include "sepcf/series.hpp"

namespace sepcf {

struct FeatureBounds {
    double lo = 0.0;
    double hi = 0.0;
};

// The three physical feasibility constraints, fitted from training data:
//   1. per-window channel ordering (group position p must be >= position p+1),
//   2. per-feature range bounds,
//   3. per-channel max adjacent-window jump (temporal smoothness).
struct PhysicsSpec {
    ChannelLayout layout;
    // One group per window; indices ordered lowest-energy (highest flux) first.
    std::vector<std::vector<std::size_t>> ordering_groups;
    std::vector<FeatureBounds> bounds;              // size d
    std::vector<double> smoothness_tolerance;       // size channels
    double quantile_margin = 0.0;                   // provenance of the fit
    bool global_per_channel = false;

    void validate() const {
        layout.validate();
        const std::size_t d = layout.dimension();
        if (bounds.size() != d) throw InvalidConfig("bounds must cover every feature");
        for (const auto& b : bounds)
            if (!(b.lo <= b.hi)) throw InvalidConfig("bound pair with min > max");
        if (smoothness_tolerance.size() != layout.channels)
            throw InvalidConfig("one smoothness tolerance per channel required");
        for (double t : smoothness_tolerance)
            if (!(t > 0.0)) throw InvalidConfig("smoothness tolerance must be positive");
        if (ordering_groups.size() != layout.windows)
            throw InvalidConfig("one ordering group per window required");
        std::vector<char> seen(d, 0);
        for (const auto& g : ordering_groups) {
            for (std::size_t idx : g) {
                if (idx >= d) throw InvalidConfig("ordering group references invalid feature");
                if (seen[idx]) throw InvalidConfig("feature appears in more than one group");
                seen[idx] = 1;
            }
        }
        for (char c : seen)
            if (!c) throw InvalidConfig("every feature must belong to an ordering group");
    }

    double range_width(std::size_t feature) const {
        return bounds[feature].hi - bounds[feature].lo;
    }
};

namespace detail {
inline void check_dimension(std::size_t got, const PhysicsSpec& spec) {
    if (got != spec.layout.dimension())
        throw DimensionMismatch("vector dimension " + std::to_string(got) +
                                " does not match spec dimension " +
                                std::to_string(spec.layout.dimension()));
}
}  // namespace detail

// Number of adjacent-pair ordering violations over all windows. Zero iff
// every window is non-increasing along its group.
inline std::size_t ordering_penalty(const std::vector<double>& x, const PhysicsSpec& spec) {
    detail::check_dimension(x.size(), spec);
    std::size_t count = 0;
    for (const auto& group : spec.ordering_groups)
        for (std::size_t p = 0; p + 1 < group.size(); ++p)
            if (x[group[p]] < x[group[p + 1]]) ++count;
    return count;
}

// Number of features strictly outside their bounds (bounds are inclusive).
inline std::size_t range_penalty(const std::vector<double>& x, const PhysicsSpec& spec) {
    detail::check_dimension(x.size(), spec);
    std::size_t count = 0;
    for (std::size_t f = 0; f < x.size(); ++f)
        if (x[f] < spec.bounds[f].lo || x[f] > spec.bounds[f].hi) ++count;
    return count;
}

// Magnitude variants: sum of violation distances instead of counts. These
// give the GA a gradient near feasibility; selected via PenaltyMode.
inline double ordering_penalty_magnitude(const std::vector<double>& x, const PhysicsSpec& spec) {
    detail::check_dimension(x.size(), spec);
    double total = 0.0;
    for (const auto& group : spec.ordering_groups)
        for (std::size_t p = 0; p + 1 < group.size(); ++p)
            if (x[group[p]] < x[group[p + 1]]) total += x[group[p + 1]] - x[group[p]];
    return total;
}

inline double range_penalty_magnitude(const std::vector<double>& x, const PhysicsSpec& spec) {
    detail::check_dimension(x.size(), spec);
    double total = 0.0;
    for (std::size_t f = 0; f < x.size(); ++f) {
        if (x[f] < spec.bounds[f].lo)
            total += spec.bounds[f].lo - x[f];
        else if (x[f] > spec.bounds[f].hi)
            total += x[f] - spec.bounds[f].hi;
    }
    return total;
}

enum class PenaltyMode { Count, Magnitude };

// Adjacent-window jumps per channel exceeding that channel's tolerance.
inline std::size_t smoothness_violations(const std::vector<double>& x, const PhysicsSpec& spec) {
    detail::check_dimension(x.size(), spec);
    std::size_t count = 0;
    for (std::size_t i = 0; i < spec.layout.channels; ++i) {
        const double delta = spec.smoothness_tolerance[i];
        for (std::size_t j = 0; j + 1 < spec.layout.windows; ++j) {
            const double a = x[spec.layout.feature_index(i, j)];
            const double b = x[spec.layout.feature_index(i, j + 1)];
            if (std::abs(b - a) > delta) ++count;
        }
    }
    return count;
}

inline std::size_t ordering_penalty(const FeatureVector& x, const PhysicsSpec& spec) {
    return ordering_penalty(x.values, spec);
}
inline std::size_t range_penalty(const FeatureVector& x, const PhysicsSpec& spec) {
    return range_penalty(x.values, spec);
}
inline std::size_t smoothness_violations(const FeatureVector& x, const PhysicsSpec& spec) {
    return smoothness_violations(x.values, spec);
}

// Centered rolling mean per channel across its window-features, truncated at
// channel edges. window must be odd; window = 1 is the identity. Never mixes
// values across channel boundaries.
inline std::vector<double> rolling_mean_smooth(const std::vector<double>& x, std::size_t window,
                                               const ChannelLayout& layout) {
    if (x.size() != layout.dimension())
        throw DimensionMismatch("vector dimension does not match layout");
    if (window == 0 || window % 2 == 0)
        throw InvalidConfig("smoothing window must be odd and at least 1");
    if (window == 1) return x;
    const std::size_t half = window / 2;
    const std::size_t w_count = layout.windows;
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < layout.channels; ++i) {
        const std::size_t base = i * w_count;
        for (std::size_t j = 0; j < w_count; ++j) {
            const std::size_t lo = j >= half ? j - half : 0;
            const std::size_t hi = std::min(w_count - 1, j + half);
            double sum = 0.0;
            for (std::size_t k = lo; k <= hi; ++k) sum += x[base + k];
            out[base + j] = sum / static_cast<double>(hi - lo + 1);
        }
    }
    return out;
}

inline FeatureVector rolling_mean_smooth(const FeatureVector& x, std::size_t window,
                                         const ChannelLayout& layout) {
    FeatureVector out = x;
    out.values = rolling_mean_smooth(x.values, window, layout);
    return out;
}

struct FitSpecOptions {
    // 0 keeps the empirical min/max; q in (0, 0.5) moves the bounds to the
    // q-th and (1-q)-th sample quantiles.
    double quantile_margin = 0.0;
    // Tolerance = empirical max adjacent-window jump per channel, times this.
    double delta_factor = 1.5;
    // Share one [min, max] per channel across all windows. Useful when the
    // training set is too small for stable per-window ranges.
    bool global_per_channel = false;
};

namespace detail {

// Sample quantile with linear interpolation between order statistics.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

// Fits ranges, ordering groups and smoothness tolerances from a training
// sample. Bounds are widened where needed so that, in every window, the
// bounds themselves respect the channel ordering; otherwise the ordering
// constraint could be unsatisfiable inside the box.
inline PhysicsSpec fit_spec(const std::vector<FeatureVector>& training,
                            const ChannelLayout& layout, const FitSpecOptions& options = {}) {
    layout.validate();
    if (training.empty()) throw EmptyTrainingSet("cannot fit a physics spec from zero instances");
    if (options.quantile_margin < 0.0 || options.quantile_margin >= 0.5)
        throw InvalidConfig("quantile_margin must lie in [0, 0.5)");
    const std::size_t d = layout.dimension();
    for (const auto& v : training)
        if (v.dimension() != d)
            throw DimensionMismatch("training vector dimension does not match layout");

    PhysicsSpec spec;
    spec.layout = layout;
    spec.quantile_margin = options.quantile_margin;
    spec.global_per_channel = options.global_per_channel;
    spec.bounds.resize(d);

    std::vector<double> column(training.size());
    for (std::size_t f = 0; f < d; ++f) {
        for (std::size_t k = 0; k < training.size(); ++k) column[k] = training[k].values[f];
        std::sort(column.begin(), column.end());
        if (options.quantile_margin == 0.0) {
            spec.bounds[f] = {column.front(), column.back()};
        } else {
            spec.bounds[f] = {detail::quantile_sorted(column, options.quantile_margin),
                              detail::quantile_sorted(column, 1.0 - options.quantile_margin)};
        }
    }

    if (options.global_per_channel) {
        for (std::size_t i = 0; i < layout.channels; ++i) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < layout.windows; ++j) {
                lo = std::min(lo, spec.bounds[layout.feature_index(i, j)].lo);
                hi = std::max(hi, spec.bounds[layout.feature_index(i, j)].hi);
            }
            for (std::size_t j = 0; j < layout.windows; ++j)
                spec.bounds[layout.feature_index(i, j)] = {lo, hi};
        }
    }

    spec.ordering_groups.resize(layout.windows);
    for (std::size_t j = 0; j < layout.windows; ++j) {
        spec.ordering_groups[j].reserve(layout.channels);
        for (std::size_t i = 0; i < layout.channels; ++i)
            spec.ordering_groups[j].push_back(layout.feature_index(i, j));
    }

    // Widen bounds so each group position dominates the next: push maxima up
    // the group and minima down it. Containment of the training data is kept
    // because bounds only ever grow.
    for (std::size_t j = 0; j < layout.windows; ++j) {
        const auto& g = spec.ordering_groups[j];
        for (std::size_t p = 1; p < g.size(); ++p)
            spec.bounds[g[p - 1]].hi = std::max(spec.bounds[g[p - 1]].hi, spec.bounds[g[p]].hi);
        for (std::size_t p = g.size(); p-- > 1;)
            spec.bounds[g[p]].lo = std::min(spec.bounds[g[p]].lo, spec.bounds[g[p - 1]].lo);
    }

    spec.smoothness_tolerance.assign(layout.channels, 0.0);
    for (std::size_t i = 0; i < layout.channels; ++i) {
        double max_jump = 0.0;
        for (const auto& v : training)
            for (std::size_t j = 0; j + 1 < layout.windows; ++j)
                max_jump = std::max(max_jump, std::abs(v.values[layout.feature_index(i, j + 1)] -
                                                       v.values[layout.feature_index(i, j)]));
        double tol = max_jump * options.delta_factor;
        if (!(tol > 0.0)) tol = 1.0;  // constant training channel: any positive tolerance
        spec.smoothness_tolerance[i] = tol;
    }

    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// Spec file format: human-readable key-value lines plus per-feature tables.
// ---------------------------------------------------------------------------

namespace detail {

inline double parse_double(const std::string& s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw SchemaError("bad numeric value '" + s + "'");
    return v;
}

}  // namespace detail

inline std::string to_spec_text(const PhysicsSpec& spec) {
    std::ostringstream out;
    out << "# physics spec v1\n";
    out << "channels";
    for (const auto& n : spec.layout.channel_names) out << ' ' << n;
    out << '\n';
    out << "windows " << spec.layout.windows << '\n';
    out << "quantile_margin " << format_double(spec.quantile_margin) << '\n';
    out << "global_per_channel " << (spec.global_per_channel ? 1 : 0) << '\n';
    for (std::size_t i = 0; i < spec.layout.channels; ++i)
        out << "delta " << spec.layout.channel_names[i] << ' '
            << format_double(spec.smoothness_tolerance[i]) << '\n';
    out << "# bounds: channel window min max\n";
    for (std::size_t i = 0; i < spec.layout.channels; ++i)
        for (std::size_t j = 0; j < spec.layout.windows; ++j) {
            const auto& b = spec.bounds[spec.layout.feature_index(i, j)];
            out << "bound " << spec.layout.channel_names[i] << ' ' << (j + 1) << ' '
                << format_double(b.lo) << ' ' << format_double(b.hi) << '\n';
        }
    return out.str();
}

inline PhysicsSpec parse_spec_text(std::istream& in) {
    PhysicsSpec spec;
    std::vector<std::string> channel_names;
    std::size_t windows = 0;
    std::vector<std::pair<std::string, double>> deltas;
    struct BoundLine {
        std::string channel;
        std::size_t window;
        double lo, hi;
    };
    std::vector<BoundLine> bound_lines;

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "channels") {
            std::string n;
            while (ls >> n) channel_names.push_back(n);
            ls.clear();  // the name loop always ends in a failed read
        } else if (key == "windows") {
            ls >> windows;
        } else if (key == "quantile_margin") {
            std::string v;
            ls >> v;
            spec.quantile_margin = detail::parse_double(v);
        } else if (key == "global_per_channel") {
            int v = 0;
            ls >> v;
            spec.global_per_channel = v != 0;
        } else if (key == "delta") {
            std::string ch, v;
            ls >> ch >> v;
            deltas.emplace_back(ch, detail::parse_double(v));
        } else if (key == "bound") {
            BoundLine b;
            std::string lo, hi;
            ls >> b.channel >> b.window >> lo >> hi;
            if (b.window == 0) throw SchemaError("bound window index is 1-based");
            b.lo = detail::parse_double(lo);
            b.hi = detail::parse_double(hi);
            bound_lines.push_back(b);
        } else {
            throw SchemaError("unknown spec key '" + key + "'");
        }
        if (ls.fail()) throw SchemaError("malformed spec line: '" + line + "'");
    }
    if (channel_names.empty() || windows == 0)
        throw SchemaError("spec file must declare channels and windows");

    spec.layout = ChannelLayout{channel_names.size(), windows, channel_names};
    spec.layout.validate();
    spec.bounds.assign(spec.layout.dimension(), FeatureBounds{});
    std::vector<char> have(spec.layout.dimension(), 0);
    for (const auto& b : bound_lines) {
        std::size_t i = channel_names.size();
        for (std::size_t k = 0; k < channel_names.size(); ++k)
            if (channel_names[k] == b.channel) i = k;
        if (i == channel_names.size())
            throw SchemaError("bound for unknown channel '" + b.channel + "'");
        if (b.window > windows) throw SchemaError("bound window index out of range");
        const std::size_t f = spec.layout.feature_index(i, b.window - 1);
        spec.bounds[f] = {b.lo, b.hi};
        have[f] = 1;
    }
    for (char c : have)
        if (!c) throw SchemaError("spec file is missing bounds for some features");

    spec.smoothness_tolerance.assign(channel_names.size(), 0.0);
    std::vector<char> have_delta(channel_names.size(), 0);
    for (const auto& [ch, v] : deltas) {
        bool found = false;
        for (std::size_t k = 0; k < channel_names.size(); ++k)
            if (channel_names[k] == ch) {
                spec.smoothness_tolerance[k] = v;
                have_delta[k] = 1;
                found = true;
            }
        if (!found) throw SchemaError("delta for unknown channel '" + ch + "'");
    }
    for (char c : have_delta)
        if (!c) throw SchemaError("spec file is missing a delta for some channel");

    spec.ordering_groups.resize(windows);
    for (std::size_t j = 0; j < windows; ++j)
        for (std::size_t i = 0; i < channel_names.size(); ++i)
            spec.ordering_groups[j].push_back(spec.layout.feature_index(i, j));

    spec.validate();
    return spec;
}

inline void save_spec(const PhysicsSpec& spec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot open '" + path + "' for writing");
    out << to_spec_text(spec);
}

inline PhysicsSpec load_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open spec file '" + path + "'");
    return parse_spec_text(in);
}

}  // namespace sepcf
