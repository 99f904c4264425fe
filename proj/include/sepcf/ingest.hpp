#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sepcf/errors.hpp"
#include "sepcf/features.hpp"
#include "sepcf/rng.hpp"
#include "sepcf/series.hpp"

namespace sepcf {

// ---------------------------------------------------------------------------
// Event catalog
// ---------------------------------------------------------------------------

struct CatalogEvent {
    std::int64_t start = 0;  // inclusive
    std::int64_t end = 0;    // exclusive
    int label = kLabelNonSep;
};

struct EventCatalog {
    std::vector<CatalogEvent> events;
    std::string source_id;

    void validate() const {
        for (const auto& e : events)
            if (e.start >= e.end) throw SchemaError("catalog event with start >= end");
        std::vector<CatalogEvent> sorted = events;
        std::sort(sorted.begin(), sorted.end(),
                  [](const CatalogEvent& a, const CatalogEvent& b) { return a.start < b.start; });
        for (std::size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i].start < sorted[i - 1].end)
                throw SchemaError("catalog events overlap at " + format_iso8601(sorted[i].start));
    }
};

// ---------------------------------------------------------------------------
// Flux CSV loading
// ---------------------------------------------------------------------------

struct ChannelQuality {
    std::string channel;
    std::size_t empty_fields = 0;
    std::size_t nonnumeric = 0;
    std::size_t nonpositive = 0;

    std::size_t excluded() const { return empty_fields + nonnumeric + nonpositive; }
};

struct DataQualityReport {
    std::size_t rows = 0;
    std::vector<ChannelQuality> channels;
};

struct LoadedFlux {
    FluxSeries series;
    DataQualityReport quality;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace detail

// Schema: header `timestamp,<channel>...` (canonically timestamp,P3,P5,P7),
// ISO-8601 timestamps at a constant cadence. Empty, non-numeric, and
// non-positive flux fields become missing samples, never silent drops; the
// quality report counts each category per channel.
inline LoadedFlux load_flux_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw EmptyFile("flux CSV has no header");
    const auto header = detail::split_csv_line(detail::strip_cr(line));
    if (header.size() < 2 || header[0] != "timestamp")
        throw SchemaError("flux CSV header must be 'timestamp,<channel>...'");
    std::vector<std::string> channel_names(header.begin() + 1, header.end());

    DataQualityReport quality;
    for (const auto& name : channel_names) quality.channels.push_back(ChannelQuality{name});

    std::vector<std::int64_t> times;
    std::vector<std::vector<double>> values(channel_names.size());
    std::vector<std::vector<bool>> missing(channel_names.size());

    while (std::getline(in, line)) {
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw SchemaError("flux CSV row with " + std::to_string(fields.size()) +
                              " fields, expected " + std::to_string(header.size()));
        times.push_back(parse_iso8601(fields[0]));
        ++quality.rows;
        for (std::size_t i = 0; i < channel_names.size(); ++i) {
            const std::string& f = fields[i + 1];
            double v = 0.0;
            bool bad = false;
            if (f.empty()) {
                ++quality.channels[i].empty_fields;
                bad = true;
            } else {
                auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
                if (ec != std::errc() || p != f.data() + f.size() || !std::isfinite(v)) {
                    ++quality.channels[i].nonnumeric;
                    bad = true;
                } else if (v <= 0.0) {
                    ++quality.channels[i].nonpositive;
                    bad = true;
                }
            }
            values[i].push_back(bad ? 0.0 : v);
            missing[i].push_back(bad);
        }
    }

    if (times.empty()) throw EmptyFile("flux CSV has no data rows");
    if (times.size() < 2) throw IrregularCadence("need at least two rows to infer the cadence");
    const std::int64_t cadence = times[1] - times[0];
    if (cadence <= 0) throw IrregularCadence("timestamps must be strictly increasing");
    for (std::size_t t = 1; t < times.size(); ++t)
        if (times[t] - times[t - 1] != cadence)
            throw IrregularCadence("cadence breaks at row " + std::to_string(t + 1) + " (" +
                                   format_iso8601(times[t]) + ")");

    return LoadedFlux{FluxSeries(times[0], cadence, std::move(channel_names), std::move(values),
                                 std::move(missing)),
                      std::move(quality)};
}

inline LoadedFlux load_flux_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EmptyFile("cannot open flux CSV '" + path + "'");
    return load_flux_csv(in);
}

inline void write_flux_csv(std::ostream& os, const FluxSeries& series) {
    os << "timestamp";
    for (const auto& name : series.channel_names()) os << ',' << name;
    os << '\n';
    for (std::size_t t = 0; t < series.samples(); ++t) {
        os << format_iso8601(series.time_at(t));
        for (std::size_t i = 0; i < series.channels(); ++i) {
            os << ',';
            if (!series.is_missing(i, t)) os << format_double(series.value(i, t));
        }
        os << '\n';
    }
}

// Catalog schema: `start,end,label` with ISO-8601 bounds (end exclusive) and
// label SEP or non-SEP.
inline EventCatalog load_catalog_csv(std::istream& in, std::string source_id = "") {
    std::string line;
    if (!std::getline(in, line)) throw EmptyFile("catalog CSV has no header");
    if (detail::strip_cr(line) != "start,end,label")
        throw SchemaError("catalog CSV header must be 'start,end,label'");
    EventCatalog catalog;
    catalog.source_id = std::move(source_id);
    while (std::getline(in, line)) {
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 3) throw SchemaError("catalog CSV row must have 3 fields");
        CatalogEvent e;
        e.start = parse_iso8601(fields[0]);
        e.end = parse_iso8601(fields[1]);
        e.label = parse_label(fields[2]);
        catalog.events.push_back(e);
    }
    if (catalog.events.empty()) throw EmptyFile("catalog CSV has no events");
    catalog.validate();
    return catalog;
}

inline EventCatalog load_catalog_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EmptyFile("cannot open catalog CSV '" + path + "'");
    return load_catalog_csv(in, path);
}

inline void write_catalog_csv(std::ostream& os, const EventCatalog& catalog) {
    os << "start,end,label\n";
    for (const auto& e : catalog.events)
        os << format_iso8601(e.start) << ',' << format_iso8601(e.end) << ','
           << label_name(e.label) << '\n';
}

// ---------------------------------------------------------------------------
// Dataset assembly
// ---------------------------------------------------------------------------

// Extracts one labeled feature vector per catalog event. Every event must
// cover the same duration and align to the series cadence; `grid` is laid
// out relative to a single event segment.
inline std::vector<FeatureVector> event_feature_vectors(const FluxSeries& series,
                                                        const EventCatalog& catalog,
                                                        const WindowGrid& grid) {
    catalog.validate();
    std::vector<FeatureVector> out;
    const std::int64_t duration0 =
        catalog.events.empty() ? 0 : catalog.events.front().end - catalog.events.front().start;
    for (const auto& e : catalog.events) {
        if (e.end - e.start != duration0)
            throw SchemaError("catalog events must share one observation length");
        if ((e.start - series.start_time()) % series.cadence() != 0)
            throw SchemaError("event at " + format_iso8601(e.start) +
                              " is not aligned to the series cadence");
        if (e.start < series.start_time()) throw EventOutsideSeries(format_iso8601(e.start));
        const std::size_t first =
            static_cast<std::size_t>((e.start - series.start_time()) / series.cadence());
        const std::size_t n_samples = static_cast<std::size_t>((e.end - e.start) / series.cadence());
        if (first + n_samples > series.samples())
            throw EventOutsideSeries("event at " + format_iso8601(e.start) +
                                     " extends past the series end");
        if (grid.max_end() > n_samples)
            throw DimensionMismatch("window grid does not fit the event observation length");

        std::vector<WindowBounds> shifted;
        shifted.reserve(grid.count());
        for (const auto& b : grid.boundaries())
            shifted.push_back(WindowBounds{b.start + first, b.end + first});
        const WindowGrid event_grid(std::move(shifted), grid.window_samples(),
                                    grid.stride_samples());
        FeatureVector v = vectorize(extract_features(series, event_grid),
                                    ChannelLayout{series.channels(), grid.count(),
                                                  series.channel_names()});
        v.label = e.label;
        out.push_back(std::move(v));
    }
    return out;
}

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Stratified split over event indices: per class, shuffle by seed and hold
// out round(count * test_fraction) instances.
inline SplitIndices split_event_indices(const std::vector<int>& labels, double test_fraction,
                                        std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        throw InvalidConfig("test_fraction must be in [0, 1)");
    Rng rng(seed);
    SplitIndices split;
    for (int cls : {kLabelSep, kLabelNonSep}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) members.push_back(i);
        for (std::size_t i = members.size(); i > 1; --i)
            std::swap(members[i - 1], members[rng.bounded(i)]);
        std::size_t n_test = static_cast<std::size_t>(
            std::llround(static_cast<double>(members.size()) * test_fraction));
        n_test = std::min(n_test, members.size());
        for (std::size_t k = 0; k < members.size(); ++k)
            (k < n_test ? split.test : split.train).push_back(members[k]);
    }
    return split;
}

struct DatasetSplit {
    std::vector<FeatureVector> train;
    std::vector<FeatureVector> test;
};

inline DatasetSplit build_dataset(const FluxSeries& series, const EventCatalog& catalog,
                                  const WindowGrid& grid, double test_fraction,
                                  std::uint64_t seed) {
    const auto vectors = event_feature_vectors(series, catalog, grid);
    std::vector<int> labels;
    labels.reserve(catalog.events.size());
    for (const auto& e : catalog.events) labels.push_back(e.label);
    const SplitIndices idx = split_event_indices(labels, test_fraction, seed);
    DatasetSplit split;
    for (std::size_t i : idx.train) split.train.push_back(vectors[i]);
    for (std::size_t i : idx.test) split.test.push_back(vectors[i]);
    return split;
}

// ---------------------------------------------------------------------------
// Synthetic benchmark generator
// ---------------------------------------------------------------------------

// Where non-SEP instances come from: independent quiet stretches (default)
// or the window immediately preceding each SEP onset.
enum class QuietMode { RandomQuiet, PreEvent };

struct SyntheticConfig {
    std::size_t n_sep = 50;
    std::size_t n_quiet = 50;
    std::int64_t cadence = 300;
    std::size_t event_samples = 72;  // 6 hours at 5-minute cadence
    std::vector<std::string> channel_names = {"P3", "P5", "P7"};
    std::vector<double> base_levels = {1000.0, 150.0, 20.0};
    double enhancement = 8.0;         // peak multiplier during an SEP event
    double onset_fraction = 0.2;      // ramp start within the event window
    double rise_fraction = 0.15;      // ramp duration as a fraction of the window
    double decay_fraction = 0.35;     // exponential decay time constant, same units
    std::size_t onset_delay_step = 2; // extra onset delay per higher-energy channel
    double noise_level = 0.05;        // stddev of multiplicative log-scale noise
    std::size_t gap_samples = 24;
    QuietMode quiet_mode = QuietMode::RandomQuiet;
    std::int64_t start_time = 1735689600;  // 2025-01-01T00:00:00Z
    std::uint64_t seed = 0;

    void validate() const {
        if (n_sep == 0 || n_quiet == 0)
            throw InvalidConfig("need at least one event per class");
        if (cadence <= 0) throw InvalidConfig("cadence must be positive");
        if (event_samples < 4) throw InvalidConfig("event_samples must be >= 4");
        if (channel_names.empty() || channel_names.size() != base_levels.size())
            throw InvalidConfig("channel_names and base_levels must match and be nonempty");
        for (std::size_t i = 1; i < base_levels.size(); ++i)
            if (!(base_levels[i] < base_levels[i - 1]))
                throw InvalidConfig("base_levels must be strictly decreasing");
        if (base_levels.back() <= 0.0) throw InvalidConfig("base_levels must be positive");
        if (!(noise_level >= 0.0)) throw InvalidConfig("noise_level must be >= 0");
        if (!(enhancement > 1.0)) throw InvalidConfig("enhancement must exceed 1");
        if (!(onset_fraction >= 0.0 && onset_fraction < 1.0) ||
            !(rise_fraction > 0.0 && rise_fraction <= 1.0) || !(decay_fraction > 0.0))
            throw InvalidConfig("onset/rise/decay fractions out of range");
        if (quiet_mode == QuietMode::PreEvent && n_quiet > n_sep)
            throw InvalidConfig("pre-event quiet mode needs n_quiet <= n_sep");
    }
};

struct SyntheticData {
    FluxSeries series;
    EventCatalog catalog;
};

namespace detail {

// Shared multiplicative enhancement profile; the per-channel onset delay
// widens the inter-channel gap during the rise, so channel ordering is
// preserved exactly in the noiseless signal.
inline double enhancement_profile(std::size_t t, std::size_t onset, std::size_t rise,
                                  double decay_samples) {
    if (t < onset) return 0.0;
    const std::size_t since = t - onset;
    if (since < rise) return static_cast<double>(since + 1) / static_cast<double>(rise);
    return std::exp(-static_cast<double>(since - rise) / decay_samples);
}

}  // namespace detail

inline SyntheticData generate_synthetic(const SyntheticConfig& config) {
    config.validate();
    Rng rng(config.seed);
    const std::size_t m = config.channel_names.size();
    const std::size_t L = config.event_samples;

    // Deterministically shuffled label order; in pre-event mode each quiet
    // window instead precedes an SEP event directly.
    std::vector<int> labels;
    std::vector<bool> lead_quiet;
    if (config.quiet_mode == QuietMode::RandomQuiet) {
        labels.assign(config.n_sep, kLabelSep);
        labels.insert(labels.end(), config.n_quiet, kLabelNonSep);
        for (std::size_t i = labels.size(); i > 1; --i)
            std::swap(labels[i - 1], labels[rng.bounded(i)]);
    } else {
        labels.assign(config.n_sep, kLabelSep);
        lead_quiet.assign(config.n_sep, false);
        for (std::size_t k = 0; k < config.n_quiet; ++k) lead_quiet[k] = true;
    }

    std::vector<std::vector<double>> values(m);
    EventCatalog catalog;
    catalog.source_id = "synthetic";
    std::size_t cursor = 0;

    const std::size_t onset0 = static_cast<std::size_t>(
        config.onset_fraction * static_cast<double>(L));
    const std::size_t rise = std::max<std::size_t>(
        1, static_cast<std::size_t>(config.rise_fraction * static_cast<double>(L)));
    const double decay_samples = config.decay_fraction * static_cast<double>(L);

    const auto push_samples = [&](bool sep, std::size_t count) {
        for (std::size_t t = 0; t < count; ++t) {
            for (std::size_t i = 0; i < m; ++i) {
                double v = config.base_levels[i];
                if (sep) {
                    const std::size_t onset = onset0 + i * config.onset_delay_step;
                    const double f =
                        detail::enhancement_profile(t, onset, rise, decay_samples);
                    v *= 1.0 + (config.enhancement - 1.0) * f;
                }
                if (config.noise_level > 0.0)
                    v *= std::exp(config.noise_level * rng.gaussian());
                values[i].push_back(v);
            }
        }
        cursor += count;
    };
    const auto mark_event = [&](int label, std::size_t first) {
        CatalogEvent e;
        e.start = config.start_time + static_cast<std::int64_t>(first) * config.cadence;
        e.end = e.start + static_cast<std::int64_t>(L) * config.cadence;
        e.label = label;
        catalog.events.push_back(e);
    };

    push_samples(false, config.gap_samples);
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (config.quiet_mode == QuietMode::PreEvent) {
            if (lead_quiet[k]) {
                mark_event(kLabelNonSep, cursor);
                push_samples(false, L);
            }
            mark_event(kLabelSep, cursor);
            push_samples(true, L);
        } else {
            mark_event(labels[k], cursor);
            push_samples(labels[k] == kLabelSep, L);
        }
        push_samples(false, config.gap_samples);
    }

    FluxSeries series(config.start_time, config.cadence, config.channel_names, std::move(values));
    return SyntheticData{std::move(series), std::move(catalog)};
}

}  // namespace sepcf
