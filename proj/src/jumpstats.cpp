#include "qjspec/jumpstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qjspec/rng.hpp"

namespace qjspec {

void ThresholdConfig::validate() const {
    if (!(0.0 < low_fraction && low_fraction < high_fraction && high_fraction < 1.0))
        throw std::invalid_argument("threshold: need 0 < low < high < 1");
    if (!(min_duration >= 0.0))
        throw std::invalid_argument("threshold: min_duration must be >= 0");
    if (!auto_levels && !(bright_level > dark_level))
        throw std::invalid_argument("threshold: bright_level must exceed dark_level");
}

namespace {

struct Levels {
    double dark = 0.0;
    double bright = 0.0;
    bool bimodal = false;
};

// Otsu split of the value histogram; bimodal when both classes carry weight
// and the class means are separated by more than the pooled in-class spread.
Levels find_levels(const Eigen::ArrayXd& values) {
    Levels out;
    const double lo = values.minCoeff();
    const double hi = values.maxCoeff();
    if (!(hi > lo)) return out;

    constexpr int NBINS = 128;
    Eigen::ArrayXd hist = Eigen::ArrayXd::Zero(NBINS);
    const double scale = NBINS / (hi - lo);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        int b = static_cast<int>((values[i] - lo) * scale);
        hist[std::clamp(b, 0, NBINS - 1)] += 1.0;
    }

    const double total = hist.sum();
    double best_between = -1.0;
    int best_split = -1;
    double w0 = 0.0, sum0 = 0.0;
    double sum_all = 0.0;
    for (int b = 0; b < NBINS; ++b) sum_all += hist[b] * b;
    for (int b = 0; b < NBINS - 1; ++b) {
        w0 += hist[b];
        sum0 += hist[b] * b;
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double m0 = sum0 / w0;
        const double m1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (m1 - m0) * (m1 - m0);
        if (between > best_between) {
            best_between = between;
            best_split = b;
        }
    }
    if (best_split < 0) return out;

    const double split_value = lo + (best_split + 1) / scale;
    double n0 = 0.0, n1 = 0.0, m0 = 0.0, m1 = 0.0, v0 = 0.0, v1 = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values[i] <= split_value) {
            n0 += 1.0;
            m0 += values[i];
        } else {
            n1 += 1.0;
            m1 += values[i];
        }
    }
    if (n0 < 2.0 || n1 < 2.0) return out;
    m0 /= n0;
    m1 /= n1;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (v <= split_value)
            v0 += (v - m0) * (v - m0);
        else
            v1 += (v - m1) * (v - m1);
    }
    const double spread = std::sqrt(v0 / n0) + std::sqrt(v1 / n1);
    out.dark = m0;
    out.bright = m1;
    out.bimodal = (m1 - m0) > 2.0 * spread && n0 / total > 1e-4 && n1 / total > 1e-4;
    return out;
}

}  // namespace

PeriodList detect_periods(const IntensityTrace& trace, const ThresholdConfig& cfg) {
    cfg.validate();
    if (trace.values.size() == 0) throw std::invalid_argument("detect_periods: empty trace");

    PeriodList out;
    out.trace_duration = static_cast<double>(trace.values.size()) * trace.sample_period;

    Levels lv;
    if (cfg.auto_levels) {
        lv = find_levels(trace.values);
        if (!lv.bimodal) {
            // no separable switching: report the whole trace as one period
            out.no_switching = true;
            out.dark_level = lv.dark;
            out.bright_level = lv.bright;
            out.periods.push_back({GateState::Bright, 0.0, out.trace_duration});
            return out;
        }
    } else {
        lv.dark = cfg.dark_level;
        lv.bright = cfg.bright_level;
        lv.bimodal = true;
    }
    out.dark_level = lv.dark;
    out.bright_level = lv.bright;

    const double span = lv.bright - lv.dark;
    const double low = lv.dark + cfg.low_fraction * span;
    const double high = lv.dark + cfg.high_fraction * span;

    // hysteresis scan with interpolated crossing times
    const double dt = trace.sample_period;
    const double mid = 0.5 * (low + high);
    bool bright = trace.values[0] > mid;
    std::vector<double> switches;
    std::vector<GateState> states_after;
    for (Eigen::Index i = 1; i < trace.values.size(); ++i) {
        const double prev = trace.values[i - 1];
        const double cur = trace.values[i];
        if (bright && cur < low) {
            const double frac = prev > cur ? std::clamp((prev - low) / (prev - cur), 0.0, 1.0) : 1.0;
            switches.push_back(trace.origin_time + (static_cast<double>(i - 1) + frac) * dt);
            states_after.push_back(GateState::Dark);
            bright = false;
        } else if (!bright && cur > high) {
            const double frac = cur > prev ? std::clamp((high - prev) / (cur - prev), 0.0, 1.0) : 1.0;
            switches.push_back(trace.origin_time + (static_cast<double>(i - 1) + frac) * dt);
            states_after.push_back(GateState::Bright);
            bright = true;
        }
    }

    if (switches.empty()) {
        out.no_switching = true;
        out.periods.push_back(
            {trace.values[0] > mid ? GateState::Bright : GateState::Dark, 0.0,
             out.trace_duration});
        return out;
    }

    // periods between crossings, partial ends included for now
    std::vector<Period> periods;
    const GateState first_state = flipped(states_after.front());
    periods.push_back({first_state, trace.origin_time, switches.front() - trace.origin_time});
    for (std::size_t k = 0; k < switches.size(); ++k) {
        const double end =
            k + 1 < switches.size() ? switches[k + 1] : trace.origin_time + out.trace_duration;
        periods.push_back({states_after[k], switches[k], end - switches[k]});
    }

    // merge sub-resolution periods into their neighbors, shortest first
    if (cfg.min_duration > 0.0) {
        for (;;) {
            std::size_t shortest = periods.size();
            double dmin = cfg.min_duration;
            for (std::size_t k = 1; k + 1 < periods.size(); ++k) {
                if (periods[k].duration < dmin) {
                    dmin = periods[k].duration;
                    shortest = k;
                }
            }
            if (shortest == periods.size()) break;
            Period merged = periods[shortest - 1];
            merged.duration += periods[shortest].duration + periods[shortest + 1].duration;
            periods.erase(periods.begin() + static_cast<std::ptrdiff_t>(shortest) - 1,
                          periods.begin() + static_cast<std::ptrdiff_t>(shortest) + 2);
            periods.insert(periods.begin() + static_cast<std::ptrdiff_t>(shortest) - 1, merged);
        }
    }

    // drop the censored first and last periods; with a single surviving
    // switch there is no complete period to report
    if (periods.size() > 2) out.periods.assign(periods.begin() + 1, periods.end() - 1);
    return out;
}

namespace {

std::vector<double> qualifying_durations(const PeriodList& list, GateState state,
                                         double t_min) {
    std::vector<double> out;
    for (const auto& p : list.periods)
        if (p.state == state && p.duration >= t_min) out.push_back(p.duration);
    return out;
}

}  // namespace

DurationHistogram make_histogram(const PeriodList& periods, GateState state,
                                 double bin_width, double t_min) {
    if (!(bin_width > 0.0))
        throw std::invalid_argument("make_histogram: bin_width must be positive");
    const std::vector<double> d = qualifying_durations(periods, state, t_min);
    if (d.empty()) throw std::invalid_argument("make_histogram: no qualifying durations");

    const double dmax = *std::max_element(d.begin(), d.end());
    const auto n_bins =
        static_cast<Eigen::Index>(std::floor((dmax - t_min) / bin_width)) + 1;
    DurationHistogram h;
    h.t_min = t_min;
    h.counts = Eigen::ArrayXi::Zero(n_bins);
    h.bin_edges.resize(static_cast<std::size_t>(n_bins) + 1);
    for (std::size_t k = 0; k < h.bin_edges.size(); ++k)
        h.bin_edges[k] = t_min + static_cast<double>(k) * bin_width;
    for (double x : d) {
        auto b = static_cast<Eigen::Index>((x - t_min) / bin_width);
        h.counts[std::min(b, n_bins - 1)] += 1;
    }
    return h;
}

std::pair<double, double> fit_exponential(const PeriodList& periods, GateState state,
                                          double t_min) {
    const std::vector<double> d = qualifying_durations(periods, state, t_min);
    if (d.empty()) throw std::invalid_argument("fit_exponential: insufficient data");
    double mean = 0.0;
    for (double x : d) mean += x - t_min;
    mean /= static_cast<double>(d.size());
    return {mean, mean / std::sqrt(static_cast<double>(d.size()))};
}

double ks_statistic_exponential(std::vector<double> sample, double mean) {
    std::sort(sample.begin(), sample.end());
    const auto n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = 1.0 - std::exp(-sample[i] / mean);
        d = std::max(d, std::max((static_cast<double>(i) + 1.0) / n - f,
                                 f - static_cast<double>(i) / n));
    }
    return d;
}

double gof_exponential(const PeriodList& periods, GateState state, double tau_hat,
                       double t_min, int n_bootstrap, std::uint64_t seed) {
    std::vector<double> d = qualifying_durations(periods, state, t_min);
    if (d.size() < 10) throw std::invalid_argument("gof_exponential: need >= 10 durations");
    if (!(tau_hat > 0.0)) throw std::invalid_argument("gof_exponential: tau_hat must be > 0");
    if (n_bootstrap < 19) throw std::invalid_argument("gof_exponential: n_bootstrap too small");

    for (double& x : d) x -= t_min;
    const double d_obs = ks_statistic_exponential(d, tau_hat);

    // parametric bootstrap with the mean re-estimated per replicate
    Rng rng(seed_for(seed, "ks-bootstrap"));
    const std::size_t n = d.size();
    std::vector<double> rep(n);
    int exceed = 0;
    for (int b = 0; b < n_bootstrap; ++b) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            rep[i] = rng.exponential(tau_hat);
            m += rep[i];
        }
        m /= static_cast<double>(n);
        if (ks_statistic_exponential(rep, m) >= d_obs) ++exceed;
    }
    return (1.0 + exceed) / (1.0 + n_bootstrap);
}

JumpStatsResult analyze_jumps(const PeriodList& periods, double t_min, int n_bootstrap,
                              std::uint64_t seed) {
    JumpStatsResult res;
    const auto dark = qualifying_durations(periods, GateState::Dark, t_min);
    const auto bright = qualifying_durations(periods, GateState::Bright, t_min);
    res.n_dark = static_cast<int>(dark.size());
    res.n_bright = static_cast<int>(bright.size());
    if (!dark.empty()) {
        std::tie(res.tau_dark_hat, res.sigma_dark) =
            fit_exponential(periods, GateState::Dark, t_min);
        if (dark.size() >= 10)
            res.ks_pvalue_dark = gof_exponential(periods, GateState::Dark, res.tau_dark_hat,
                                                 t_min, n_bootstrap, seed);
    }
    if (!bright.empty()) {
        std::tie(res.tau_bright_hat, res.sigma_bright) =
            fit_exponential(periods, GateState::Bright, t_min);
        if (bright.size() >= 10)
            res.ks_pvalue_bright = gof_exponential(periods, GateState::Bright,
                                                   res.tau_bright_hat, t_min, n_bootstrap,
                                                   seed_for(seed, "bright"));
    }
    return res;
}

}  // namespace qjspec
