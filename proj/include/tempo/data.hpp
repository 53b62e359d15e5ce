#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tempo::data {

struct Channel {
    std::string name;
    std::vector<double> values;

    friend bool operator==(const Channel&, const Channel&) = default;
};

/// Multivariate series; every channel has the same length.
struct SeriesFrame {
    std::vector<Channel> channels;
    std::optional<std::vector<double>> timestamps;  // seconds since epoch, or integer index
    std::string sampling_note;

    std::size_t length() const { return channels.empty() ? 0 : channels.front().values.size(); }
    std::size_t channel_count() const { return channels.size(); }

    /// Throws ValidationError on ragged channels, non-finite values or
    /// non-increasing timestamps.
    void validate() const;

    friend bool operator==(const SeriesFrame&, const SeriesFrame&) = default;
};

struct WindowPair {
    std::vector<double> lookback;
    std::vector<double> horizon;
    std::size_t channel_id = 0;
    std::size_t origin_t = 0;
};

struct SplitSpec {
    double train = 0.7;
    double val = 0.1;
    double test = 0.2;

    void validate() const;
};

struct Splits {
    SeriesFrame train;
    SeriesFrame val;
    SeriesFrame test;
    std::size_t val_offset = 0;   // index of val[0] in the source series
    std::size_t test_offset = 0;
};

enum class MissingPolicy { error, linear };

/// Reads a header-first CSV. With has_timestamp the first column must be named
/// "timestamp" and hold ISO-8601 dates or integers.
SeriesFrame load_csv(const std::filesystem::path& path, bool has_timestamp,
                     MissingPolicy missing = MissingPolicy::error);

/// Autodetects a leading "timestamp" column.
SeriesFrame load_csv_auto(const std::filesystem::path& path,
                          MissingPolicy missing = MissingPolicy::error);

void write_csv(const SeriesFrame& frame, const std::filesystem::path& path);

/// Parses "2016-07-01", "2016-07-01 00:15:00", "2016-07-01T00:15:00Z" or an integer.
double parse_timestamp(const std::string& text);

/// Chronological split. val/test get floor(frac * len) rows; the remainder
/// goes to train. With require_eval, empty val or test is an error.
Splits split_chrono(const SeriesFrame& frame, const SplitSpec& spec, bool require_eval = true);

std::size_t window_count(std::size_t len, std::size_t lookback, std::size_t horizon,
                         std::size_t stride);

/// Sliding lookback/horizon windows starting at 0, stride, 2*stride, ...
/// origin_t is reported relative to the series start plus origin_offset.
std::vector<WindowPair> make_windows(std::span<const double> channel, std::size_t lookback,
                                     std::size_t horizon, std::size_t stride,
                                     std::size_t channel_id = 0, std::size_t origin_offset = 0);

std::vector<SeriesFrame> channelize(const SeriesFrame& frame);
SeriesFrame unchannelize(std::span<const SeriesFrame> parts);

struct SynthSpec {
    std::size_t length = 2000;
    std::size_t period = 24;
    double trend_slope = 0.0;
    double season_amp = 1.0;
    double noise_std = 0.0;
    std::uint64_t seed = 0;
};

/// x_t = slope * t + amp * sin(2 pi t / period) + N(0, noise_std^2)
SeriesFrame synth_generate(const SynthSpec& spec, std::string channel_name = "x");

} // namespace tempo::data
