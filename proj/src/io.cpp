#include "qjspec/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace qjspec::io {

namespace {

[[noreturn]] void parse_fail(const std::string& name, int line, const std::string& what) {
    throw std::runtime_error(name + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& name, int line, std::string_view tok) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        parse_fail(name, line, "expected a number, got '" + std::string(tok) + "'");
    return v;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ofstream os(path, mode);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    return os;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ifstream is(path, mode);
    if (!is) throw std::runtime_error("cannot open for reading: " + path.string());
    return is;
}

// header lines look like "# tag key=value key=value"
double header_value(const std::string& name, const std::string& header,
                    const std::string& key) {
    const std::string needle = key + "=";
    const auto at = header.find(needle);
    if (at == std::string::npos) parse_fail(name, 1, "missing header field " + key);
    auto end = header.find(' ', at);
    if (end == std::string::npos) end = header.size();
    return parse_double(name, 1, std::string_view(header).substr(at + needle.size(),
                                                                 end - at - needle.size()));
}

std::string header_string(const std::string& name, const std::string& header,
                          const std::string& key) {
    const std::string needle = key + "=";
    const auto at = header.find(needle);
    if (at == std::string::npos) parse_fail(name, 1, "missing header field " + key);
    auto end = header.find(' ', at);
    if (end == std::string::npos) end = header.size();
    return header.substr(at + needle.size(), end - at - needle.size());
}

struct CsvRow {
    double a = 0.0;
    double b = 0.0;
};

// reads "# ..." header then two-column rows
std::pair<std::string, std::vector<CsvRow>> read_two_column(const std::filesystem::path& path) {
    std::ifstream is = open_in(path, std::ios::in);
    const std::string name = path.filename().string();
    std::string header;
    if (!std::getline(is, header) || header.empty() || header[0] != '#')
        parse_fail(name, 1, "expected '#' header line");
    std::vector<CsvRow> rows;
    std::string line;
    int ln = 1;
    while (std::getline(is, line)) {
        ++ln;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) parse_fail(name, ln, "expected 'a,b' row");
        CsvRow row;
        row.a = parse_double(name, ln, std::string_view(line).substr(0, comma));
        row.b = parse_double(name, ln, std::string_view(line).substr(comma + 1));
        rows.push_back(row);
    }
    return {header, rows};
}

}  // namespace

std::string fmt_g15(double x) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                   std::chars_format::general, 15);
    return std::string(buf.data(), ptr);
}

// ---------------------------------------------------------------------------

void write_trajectory(std::ostream& os, const JumpTrajectory& traj) {
    os << fmt_g15(traj.duration) << ' '
       << (traj.initial_state == GateState::Bright ? "bright" : "dark") << '\n';
    for (double t : traj.switch_times) os << fmt_g15(t) << '\n';
}

void write_trajectory(const std::filesystem::path& path, const JumpTrajectory& traj) {
    auto os = open_out(path, std::ios::out);
    write_trajectory(os, traj);
}

JumpTrajectory read_trajectory(std::istream& is, const std::string& name) {
    JumpTrajectory traj;
    std::string line;
    if (!std::getline(is, line)) parse_fail(name, 1, "empty trajectory record");
    std::istringstream head(line);
    std::string dur_tok, state_tok;
    if (!(head >> dur_tok >> state_tok)) parse_fail(name, 1, "expected 'duration state'");
    traj.duration = parse_double(name, 1, dur_tok);
    if (state_tok == "bright")
        traj.initial_state = GateState::Bright;
    else if (state_tok == "dark")
        traj.initial_state = GateState::Dark;
    else
        parse_fail(name, 1, "state must be 'bright' or 'dark'");
    int ln = 1;
    while (std::getline(is, line)) {
        ++ln;
        if (line.empty()) continue;
        traj.switch_times.push_back(parse_double(name, ln, line));
    }
    try {
        traj.validate();
    } catch (const std::exception& e) {
        parse_fail(name, ln, e.what());
    }
    return traj;
}

JumpTrajectory read_trajectory(const std::filesystem::path& path) {
    auto is = open_in(path, std::ios::in);
    return read_trajectory(is, path.filename().string());
}

// ---------------------------------------------------------------------------

void write_counts_csv(const std::filesystem::path& path, const CountTrace& trace) {
    auto os = open_out(path, std::ios::out);
    os << "# count_trace bin_width=" << fmt_g15(trace.bin_width)
       << " origin=" << fmt_g15(trace.origin_time) << '\n';
    for (Eigen::Index k = 0; k < trace.counts.size(); ++k)
        os << fmt_g15(trace.origin_time + static_cast<double>(k) * trace.bin_width) << ','
           << trace.counts[k] << '\n';
}

CountTrace read_counts_csv(const std::filesystem::path& path) {
    auto [header, rows] = read_two_column(path);
    const std::string name = path.filename().string();
    CountTrace trace;
    trace.bin_width = header_value(name, header, "bin_width");
    trace.origin_time = header_value(name, header, "origin");
    trace.counts.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].b < 0.0)
            parse_fail(name, static_cast<int>(i) + 2, "negative count");
        trace.counts[static_cast<Eigen::Index>(i)] = static_cast<int>(rows[i].b);
    }
    return trace;
}

void write_intensity_csv(const std::filesystem::path& path, const IntensityTrace& trace) {
    auto os = open_out(path, std::ios::out);
    os << "# intensity_trace sample_period=" << fmt_g15(trace.sample_period)
       << " origin=" << fmt_g15(trace.origin_time) << '\n';
    for (Eigen::Index k = 0; k < trace.values.size(); ++k)
        os << fmt_g15(trace.origin_time + static_cast<double>(k) * trace.sample_period) << ','
           << fmt_g15(trace.values[k]) << '\n';
}

IntensityTrace read_intensity_csv(const std::filesystem::path& path) {
    auto [header, rows] = read_two_column(path);
    IntensityTrace trace;
    trace.sample_period = header_value(path.filename().string(), header, "sample_period");
    trace.origin_time = header_value(path.filename().string(), header, "origin");
    trace.values.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        trace.values[static_cast<Eigen::Index>(i)] = rows[i].b;
    return trace;
}

// ---------------------------------------------------------------------------

namespace {
constexpr char SIGNAL_MAGIC[8] = {'Q', 'J', 'S', 'I', 'G', 'v', '1', '\0'};
constexpr char BASEBAND_MAGIC[8] = {'Q', 'J', 'B', 'B', 'v', '1', '\0', '\0'};

static_assert(std::endian::native == std::endian::little,
              "signal records are little-endian; byte swapping not implemented");
}  // namespace

void write_signal(const std::filesystem::path& path, const SampledSignal& signal) {
    auto os = open_out(path, std::ios::binary);
    os.write(SIGNAL_MAGIC, 8);
    os.write(reinterpret_cast<const char*>(&signal.sample_rate), 8);
    os.write(reinterpret_cast<const char*>(signal.samples.data()),
             static_cast<std::streamsize>(signal.samples.size() * 8));
}

SampledSignal read_signal(const std::filesystem::path& path) {
    auto is = open_in(path, std::ios::binary);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, SIGNAL_MAGIC, 8) != 0)
        throw std::runtime_error(path.string() + ": not a signal record (bad magic)");
    SampledSignal sig;
    is.read(reinterpret_cast<char*>(&sig.sample_rate), 8);
    if (!is) throw std::runtime_error(path.string() + ": truncated header");
    is.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::uint64_t>(is.tellg()) - 16;
    if (bytes % 8 != 0)
        throw std::runtime_error(path.string() + ": truncated sample data");
    is.seekg(16);
    sig.samples.resize(static_cast<Eigen::Index>(bytes / 8));
    is.read(reinterpret_cast<char*>(sig.samples.data()),
            static_cast<std::streamsize>(bytes));
    if (!is) throw std::runtime_error(path.string() + ": short read");
    return sig;
}

void write_signal_csv(const std::filesystem::path& path, const SampledSignal& signal) {
    auto os = open_out(path, std::ios::out);
    os << "# sampled_signal sample_rate=" << fmt_g15(signal.sample_rate)
       << " carrier_hint=" << fmt_g15(signal.carrier_hint) << '\n';
    const double dt = 1.0 / signal.sample_rate;
    for (Eigen::Index k = 0; k < signal.samples.size(); ++k)
        os << fmt_g15(static_cast<double>(k) * dt) << ',' << fmt_g15(signal.samples[k])
           << '\n';
}

SampledSignal read_signal_csv(const std::filesystem::path& path) {
    auto [header, rows] = read_two_column(path);
    SampledSignal sig;
    const std::string name = path.filename().string();
    sig.sample_rate = header_value(name, header, "sample_rate");
    sig.carrier_hint = header_value(name, header, "carrier_hint");
    sig.samples.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        sig.samples[static_cast<Eigen::Index>(i)] = rows[i].b;
    return sig;
}

void write_baseband(const std::filesystem::path& path, const BasebandSignal& signal) {
    auto os = open_out(path, std::ios::binary);
    os.write(BASEBAND_MAGIC, 8);
    const double head[4] = {signal.sample_rate, signal.center_freq, signal.origin_time,
                            signal.passband};
    os.write(reinterpret_cast<const char*>(head), 32);
    os.write(reinterpret_cast<const char*>(signal.samples.data()),
             static_cast<std::streamsize>(signal.samples.size() * 16));
}

BasebandSignal read_baseband(const std::filesystem::path& path) {
    auto is = open_in(path, std::ios::binary);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, BASEBAND_MAGIC, 8) != 0)
        throw std::runtime_error(path.string() + ": not a baseband record (bad magic)");
    double head[4];
    is.read(reinterpret_cast<char*>(head), 32);
    if (!is) throw std::runtime_error(path.string() + ": truncated header");
    BasebandSignal sig;
    sig.sample_rate = head[0];
    sig.center_freq = head[1];
    sig.origin_time = head[2];
    sig.passband = head[3];
    is.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::uint64_t>(is.tellg()) - 40;
    if (bytes % 16 != 0) throw std::runtime_error(path.string() + ": truncated sample data");
    is.seekg(40);
    sig.samples.resize(static_cast<Eigen::Index>(bytes / 16));
    is.read(reinterpret_cast<char*>(sig.samples.data()),
            static_cast<std::streamsize>(bytes));
    if (!is) throw std::runtime_error(path.string() + ": short read");
    return sig;
}

// ---------------------------------------------------------------------------

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& spec) {
    auto os = open_out(path, std::ios::out);
    os << "# spectrum delta_R=" << fmt_g15(spec.delta_R) << " enbw=" << fmt_g15(spec.enbw)
       << " n_averages=" << spec.n_averages << " window=" << to_string(spec.window)
       << " valid_span=" << fmt_g15(spec.valid_span) << '\n';
    for (Eigen::Index k = 0; k < spec.freq_offsets.size(); ++k)
        os << fmt_g15(spec.freq_offsets[k]) << ',' << fmt_g15(spec.psd[k]) << '\n';
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
    auto [header, rows] = read_two_column(path);
    const std::string name = path.filename().string();
    Spectrum spec;
    spec.delta_R = header_value(name, header, "delta_R");
    spec.enbw = header_value(name, header, "enbw");
    spec.n_averages = static_cast<int>(header_value(name, header, "n_averages"));
    spec.window = window_from_string(header_string(name, header, "window"));
    spec.valid_span = header_value(name, header, "valid_span");
    spec.freq_offsets.resize(static_cast<Eigen::Index>(rows.size()));
    spec.psd.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        spec.freq_offsets[static_cast<Eigen::Index>(i)] = rows[i].a;
        spec.psd[static_cast<Eigen::Index>(i)] = rows[i].b;
    }
    return spec;
}

void write_periods_csv(const std::filesystem::path& path, const PeriodList& periods) {
    auto os = open_out(path, std::ios::out);
    os << "# periods trace_duration=" << fmt_g15(periods.trace_duration)
       << " no_switching=" << (periods.no_switching ? 1 : 0) << '\n';
    for (const auto& p : periods.periods)
        os << (p.state == GateState::Bright ? "bright," : "dark,") << fmt_g15(p.start) << ','
           << fmt_g15(p.duration) << '\n';
}

void write_histogram_csv(const std::filesystem::path& path, const DurationHistogram& hist) {
    auto os = open_out(path, std::ios::out);
    os << "# duration_histogram t_min=" << fmt_g15(hist.t_min) << '\n';
    for (Eigen::Index k = 0; k < hist.counts.size(); ++k)
        os << fmt_g15(0.5 * (hist.bin_edges[static_cast<std::size_t>(k)] +
                             hist.bin_edges[static_cast<std::size_t>(k) + 1]))
           << ',' << hist.counts[k] << '\n';
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const SpectralPrediction& pred) {
    return {{"delta_L_hz", pred.delta_L},
            {"A_L", pred.A_L},
            {"delta_R_hz", pred.delta_R},
            {"duty_cycle", pred.p},
            {"line_weight", pred.line_weight},
            {"pedestal_weight", pred.pedestal_weight},
            {"gamma_per_s", pred.gamma},
            {"resolution_flag", pred.resolution_flag}};
}

nlohmann::json to_json(const PedestalFit& fit) {
    const char* status = fit.status == FitStatus::Converged ? "converged"
                         : fit.status == FitStatus::DegeneratePedestal
                             ? "degenerate_pedestal"
                             : "max_iterations";
    return {{"center_hz", fit.center},
            {"peak_height", fit.peak_height},
            {"pedestal_height", fit.pedestal_height},
            {"delta_L_hat_hz", fit.delta_L_hat},
            {"baseline", fit.baseline},
            {"sigma_center_hz", fit.sigma_center},
            {"sigma_peak_height", fit.sigma_peak_height},
            {"sigma_pedestal_height", fit.sigma_pedestal_height},
            {"sigma_delta_L_hz", fit.sigma_delta_L},
            {"sigma_baseline", fit.sigma_baseline},
            {"A_L_hat", fit.A_L_hat},
            {"sigma_A_L", fit.sigma_A_L},
            {"weight_ratio_hat", fit.weight_ratio_hat},
            {"sigma_weight_ratio", fit.sigma_weight_ratio},
            {"snr_hat", fit.snr_hat},
            {"residual_rms", fit.residual_rms},
            {"status", status},
            {"iterations", fit.iterations}};
}

nlohmann::json to_json(const JumpStatsResult& stats) {
    return {{"tau_dark_hat_s", stats.tau_dark_hat},
            {"sigma_dark_s", stats.sigma_dark},
            {"tau_bright_hat_s", stats.tau_bright_hat},
            {"sigma_bright_s", stats.sigma_bright},
            {"n_dark", stats.n_dark},
            {"n_bright", stats.n_bright},
            {"ks_pvalue_dark", stats.ks_pvalue_dark},
            {"ks_pvalue_bright", stats.ks_pvalue_bright}};
}

nlohmann::json to_json(const OracleComparison& cmp) {
    return {{"band_lo_hz", cmp.band_lo},
            {"band_hi_hz", cmp.band_hi},
            {"n_bins", cmp.n_bins},
            {"rms_rel_dev", cmp.rms_rel_dev},
            {"mean_rel_dev", cmp.mean_rel_dev},
            {"max_abs_rel_dev", cmp.max_abs_rel_dev}};
}

// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string digest_hex(const std::filesystem::path& path) {
    auto is = open_in(path, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ull;
    std::array<char, 65536> buf{};
    while (is) {
        is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        const auto got = static_cast<std::size_t>(is.gcount());
        for (std::size_t i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    std::array<char, 17> hex{};
    std::snprintf(hex.data(), hex.size(), "%016llx", static_cast<unsigned long long>(h));
    return std::string(hex.data(), 16);
}

}  // namespace qjspec::io
