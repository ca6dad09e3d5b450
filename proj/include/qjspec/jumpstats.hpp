#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "qjspec/photon.hpp"
#include "qjspec/telegraph.hpp"

namespace qjspec {

struct ThresholdConfig {
    double low_fraction = 0.3;   // enter dark below dark_level + low*span
    double high_fraction = 0.7;  // exit dark above dark_level + high*span
    bool auto_levels = true;     // levels from the bimodal value histogram
    double dark_level = 0.0;     // used when auto_levels is false
    double bright_level = 0.0;
    double min_duration = 0.005;  // periods shorter than this merge into neighbors

    void validate() const;
};

struct Period {
    GateState state = GateState::Bright;
    double start = 0.0;
    double duration = 0.0;
};

struct PeriodList {
    std::vector<Period> periods;  // time ordered, alternating states
    double trace_duration = 0.0;
    bool no_switching = false;  // set when the trace never crosses a threshold
    double dark_level = 0.0;    // levels actually used by the detector
    double bright_level = 0.0;
};

struct DurationHistogram {
    std::vector<double> bin_edges;  // ascending, first edge = t_min
    Eigen::ArrayXi counts;
    double t_min = 0.0;
};

struct JumpStatsResult {
    double tau_dark_hat = 0.0, sigma_dark = 0.0;
    double tau_bright_hat = 0.0, sigma_bright = 0.0;
    int n_dark = 0, n_bright = 0;
    double ks_pvalue_dark = 0.0, ks_pvalue_bright = 0.0;
};

// Hysteresis discrimination of the filtered intensity. Threshold crossings
// are located by linear interpolation between samples; periods shorter than
// min_duration are merged into their (same state) neighbors; the partial
// first and last periods are dropped. A trace with no detected switching
// comes back as one full-length period with no_switching set.
PeriodList detect_periods(const IntensityTrace& trace, const ThresholdConfig& cfg);

DurationHistogram make_histogram(const PeriodList& periods, GateState state,
                                 double bin_width, double t_min);

// Truncated-exponential MLE: tau = mean(d - t_min | d >= t_min), sigma =
// tau/sqrt(n). Valid by memorylessness for any t_min >= 0.
std::pair<double, double> fit_exponential(const PeriodList& periods, GateState state,
                                          double t_min);

// Kolmogorov-Smirnov statistic of the sample against Exponential(mean).
double ks_statistic_exponential(std::vector<double> sample, double mean);

// Goodness of fit to the exponential dwell law with parametric bootstrap
// (the estimated-parameter correction): p-value of the KS statistic.
double gof_exponential(const PeriodList& periods, GateState state, double tau_hat,
                       double t_min, int n_bootstrap, std::uint64_t seed = 0x6f5u);

// Full dwell analysis of one trace: both states fitted and tested.
JumpStatsResult analyze_jumps(const PeriodList& periods, double t_min, int n_bootstrap,
                              std::uint64_t seed = 0x6f5u);

}  // namespace qjspec
