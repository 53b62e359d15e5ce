#include "tempo/data.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "tempo/errors.hpp"

namespace tempo::data {
namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool is_missing(const std::string& cell) {
    return cell.empty() || cell == "nan" || cell == "NaN" || cell == "NA" || cell == "null";
}

std::optional<double> parse_number(const std::string& cell) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return v;
}

void interpolate_linear(std::vector<double>& v, const std::vector<bool>& missing) {
    const std::size_t n = v.size();
    std::optional<std::size_t> prev;
    for (std::size_t i = 0; i < n; ++i) {
        if (missing[i]) continue;
        if (!prev) {
            for (std::size_t j = 0; j < i; ++j) v[j] = v[i];
        } else if (i > *prev + 1) {
            const double a = v[*prev], b = v[i];
            const double span = static_cast<double>(i - *prev);
            for (std::size_t j = *prev + 1; j < i; ++j)
                v[j] = a + (b - a) * static_cast<double>(j - *prev) / span;
        }
        prev = i;
    }
    if (!prev) throw ValidationError("parse", "column has no observed values to interpolate from");
    for (std::size_t j = *prev + 1; j < n; ++j) v[j] = v[*prev];
}

} // namespace

void SeriesFrame::validate() const {
    if (channels.empty()) throw ValidationError("shape", "frame has no channels");
    const std::size_t n = length();
    if (n == 0) throw ValidationError("shape", "no rows");
    for (const Channel& c : channels) {
        if (c.values.size() != n)
            throw ValidationError("shape", "channel '" + c.name + "' has a different length");
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isfinite(c.values[i]))
                throw ValidationError("nonfinite", "channel '" + c.name + "' has a non-finite value at index " +
                                                       std::to_string(i));
    }
    if (timestamps) {
        if (timestamps->size() != n) throw ValidationError("shape", "timestamp column length differs");
        for (std::size_t i = 1; i < n; ++i)
            if (!((*timestamps)[i] > (*timestamps)[i - 1]))
                throw ValidationError("timestamp", "timestamps are not strictly increasing at index " +
                                                       std::to_string(i));
    }
}

void SplitSpec::validate() const {
    for (double f : {train, val, test})
        if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("split fractions must lie in [0, 1]");
    if (std::abs(train + val + test - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
}

double parse_timestamp(const std::string& text) {
    if (auto v = parse_number(text)) return *v;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0;
    double s = 0.0;
    char sep1 = 0, sep2 = 0;
    std::istringstream in(text);
    in >> y >> sep1 >> mo >> sep2 >> d;
    if (!in || sep1 != '-' || sep2 != '-') throw ValidationError("parse", "bad timestamp '" + text + "'");
    if (in.peek() == 'T' || in.peek() == ' ') {
        in.get();
        char c1 = 0, c2 = 0;
        in >> h >> c1 >> mi;
        if (!in || c1 != ':') throw ValidationError("parse", "bad timestamp '" + text + "'");
        if (in.peek() == ':') {
            in >> c2 >> s;
            if (!in) throw ValidationError("parse", "bad timestamp '" + text + "'");
        }
    }
    std::string rest;
    in >> rest;
    if (!rest.empty() && rest != "Z") throw ValidationError("parse", "bad timestamp '" + text + "'");
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw ValidationError("parse", "bad timestamp '" + text + "'");
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<double>(days) * 86400.0 + h * 3600.0 + mi * 60.0 + s;
}

SeriesFrame load_csv(const std::filesystem::path& path, bool has_timestamp, MissingPolicy missing) {
    std::ifstream in(path);
    if (!in) throw ValidationError("io", "cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("parse", "no header");
    std::vector<std::string> header = split_line(line);
    for (auto& h : header) h = trim(h);
    const std::size_t first = has_timestamp ? 1 : 0;
    if (has_timestamp && (header.empty() || header[0] != "timestamp"))
        throw ValidationError("parse", "first column must be named 'timestamp'");
    if (header.size() <= first) throw ValidationError("parse", "no value columns");

    SeriesFrame frame;
    for (std::size_t c = first; c < header.size(); ++c) frame.channels.push_back({header[c], {}});
    std::vector<double> stamps;
    std::vector<std::vector<bool>> gaps(frame.channels.size());
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw ValidationError("parse", "ragged row " + std::to_string(row) + ": expected " +
                                               std::to_string(header.size()) + " cells, got " +
                                               std::to_string(cells.size()));
        if (has_timestamp) stamps.push_back(parse_timestamp(trim(cells[0])));
        for (std::size_t c = first; c < cells.size(); ++c) {
            const std::string cell = trim(cells[c]);
            auto& ch = frame.channels[c - first];
            if (is_missing(cell)) {
                if (missing == MissingPolicy::error)
                    throw ValidationError("missing", "missing value at row " + std::to_string(row) +
                                                         ", column \"" + header[c] + "\"");
                ch.values.push_back(0.0);
                gaps[c - first].push_back(true);
                continue;
            }
            auto v = parse_number(cell);
            if (!v || !std::isfinite(*v))
                throw ValidationError("parse", "parse error at row " + std::to_string(row) + ", column \"" +
                                                   header[c] + "\": '" + cell + "'");
            ch.values.push_back(*v);
            gaps[c - first].push_back(false);
        }
    }
    if (frame.length() == 0) throw ValidationError("parse", "no rows");
    if (missing == MissingPolicy::linear)
        for (std::size_t c = 0; c < frame.channels.size(); ++c)
            interpolate_linear(frame.channels[c].values, gaps[c]);
    if (has_timestamp) frame.timestamps = std::move(stamps);
    frame.sampling_note = path.filename().string();
    frame.validate();
    return frame;
}

SeriesFrame load_csv_auto(const std::filesystem::path& path, MissingPolicy missing) {
    std::ifstream in(path);
    if (!in) throw ValidationError("io", "cannot open '" + path.string() + "'");
    std::string line;
    std::getline(in, line);
    const auto header = split_line(line);
    const bool ts = !header.empty() && trim(header[0]) == "timestamp";
    return load_csv(path, ts, missing);
}

void write_csv(const SeriesFrame& frame, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("io", "cannot write '" + path.string() + "'");
    out << std::setprecision(17);
    bool first = true;
    if (frame.timestamps) {
        out << "timestamp";
        first = false;
    }
    for (const auto& c : frame.channels) {
        out << (first ? "" : ",") << c.name;
        first = false;
    }
    out << '\n';
    for (std::size_t t = 0; t < frame.length(); ++t) {
        first = true;
        if (frame.timestamps) {
            out << (*frame.timestamps)[t];
            first = false;
        }
        for (const auto& c : frame.channels) {
            out << (first ? "" : ",") << c.values[t];
            first = false;
        }
        out << '\n';
    }
}

namespace {

SeriesFrame slice_frame(const SeriesFrame& f, std::size_t begin, std::size_t end) {
    SeriesFrame out;
    out.sampling_note = f.sampling_note;
    for (const auto& c : f.channels)
        out.channels.push_back({c.name, std::vector<double>(c.values.begin() + begin, c.values.begin() + end)});
    if (f.timestamps)
        out.timestamps = std::vector<double>(f.timestamps->begin() + begin, f.timestamps->begin() + end);
    return out;
}

std::size_t floor_count(double frac, std::size_t len) {
    return static_cast<std::size_t>(std::floor(frac * static_cast<double>(len) + 1e-9));
}

} // namespace

Splits split_chrono(const SeriesFrame& frame, const SplitSpec& spec, bool require_eval) {
    spec.validate();
    const std::size_t len = frame.length();
    if (len < 10) throw ValidationError("shape", "series too short to split (need at least 10 rows)");
    const std::size_t n_val = floor_count(spec.val, len);
    const std::size_t n_test = floor_count(spec.test, len);
    if (require_eval && (n_val == 0 || n_test == 0))
        throw ValidationError("shape", "split leaves validation or test data empty");
    const std::size_t n_train = len - n_val - n_test;
    Splits s;
    s.train = slice_frame(frame, 0, n_train);
    s.val = slice_frame(frame, n_train, n_train + n_val);
    s.test = slice_frame(frame, n_train + n_val, len);
    s.val_offset = n_train;
    s.test_offset = n_train + n_val;
    return s;
}

std::size_t window_count(std::size_t len, std::size_t lookback, std::size_t horizon, std::size_t stride) {
    if (lookback == 0 || horizon == 0 || stride == 0) throw std::invalid_argument("window sizes must be >= 1");
    if (len < lookback + horizon) return 0;
    return (len - lookback - horizon) / stride + 1;
}

std::vector<WindowPair> make_windows(std::span<const double> channel, std::size_t lookback,
                                     std::size_t horizon, std::size_t stride, std::size_t channel_id,
                                     std::size_t origin_offset) {
    const std::size_t count = window_count(channel.size(), lookback, horizon, stride);
    if (count == 0)
        throw ValidationError("shape", "series of length " + std::to_string(channel.size()) +
                                           " is shorter than lookback + horizon");
    std::vector<WindowPair> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t o = k * stride;
        WindowPair w;
        w.lookback.assign(channel.begin() + o, channel.begin() + o + lookback);
        w.horizon.assign(channel.begin() + o + lookback, channel.begin() + o + lookback + horizon);
        w.channel_id = channel_id;
        w.origin_t = origin_offset + o;
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<SeriesFrame> channelize(const SeriesFrame& frame) {
    std::vector<SeriesFrame> out;
    for (const auto& c : frame.channels) {
        SeriesFrame f;
        f.channels.push_back(c);
        f.timestamps = frame.timestamps;
        f.sampling_note = frame.sampling_note;
        out.push_back(std::move(f));
    }
    return out;
}

SeriesFrame unchannelize(std::span<const SeriesFrame> parts) {
    SeriesFrame out;
    if (parts.empty()) return out;
    out.timestamps = parts.front().timestamps;
    out.sampling_note = parts.front().sampling_note;
    for (const auto& p : parts)
        for (const auto& c : p.channels) out.channels.push_back(c);
    return out;
}

SeriesFrame synth_generate(const SynthSpec& spec, std::string channel_name) {
    if (spec.period < 2) throw ConfigError("synth: period must be >= 2");
    if (spec.length < 2 * spec.period) throw ConfigError("synth: length must be >= 2 * period");
    if (!(spec.noise_std >= 0.0) || !std::isfinite(spec.noise_std)) throw ConfigError("synth: noise_std must be >= 0");
    if (!std::isfinite(spec.trend_slope) || !std::isfinite(spec.season_amp))
        throw ConfigError("synth: slope and amplitude must be finite");
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_std > 0.0 ? spec.noise_std : 1.0);
    const double w = 2.0 * std::numbers::pi / static_cast<double>(spec.period);
    std::vector<double> x(spec.length);
    for (std::size_t t = 0; t < spec.length; ++t) {
        const double td = static_cast<double>(t);
        double v = spec.trend_slope * td;
        if (spec.season_amp != 0.0) v += spec.season_amp * std::sin(w * static_cast<double>(t % spec.period));
        if (spec.noise_std > 0.0) v += noise(rng);
        x[t] = v;
    }
    SeriesFrame f;
    f.channels.push_back({std::move(channel_name), std::move(x)});
    std::ostringstream note;
    note << "synth(period=" << spec.period << ", slope=" << spec.trend_slope << ", amp=" << spec.season_amp
         << ", noise=" << spec.noise_std << ", seed=" << spec.seed << ")";
    f.sampling_note = note.str();
    return f;
}

} // namespace tempo::data
