#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "qjspec/telegraph.hpp"

namespace qjspec {

struct DetectionParams {
    double rate_bright = 3.5e4;  // detected counts/s while fluorescing
    double rate_stray = 500.0;   // stray light + detector dark pulses, counts/s
    double bin_width = 1e-3;     // s

    void validate() const;
};

// Binned photon counts, bin k covering [origin_time + k*bin_width, +bin_width).
struct CountTrace {
    double bin_width = 0.0;
    double origin_time = 0.0;
    Eigen::ArrayXi counts;

    double duration() const { return bin_width * static_cast<double>(counts.size()); }
};

// Low-pass filtered count rate, same grid as the source CountTrace.
struct IntensityTrace {
    double sample_period = 0.0;
    double origin_time = 0.0;
    Eigen::ArrayXd values;  // counts/s equivalent
};

// Poisson counts per bin with mean rate_stray*bin + rate_bright*(bright time
// within the bin). The bright time comes exactly from the switch times, so
// dwell periods shorter than a bin still contribute their true fraction.
CountTrace synthesize_counts(const JumpTrajectory& traj, const DetectionParams& det,
                             std::uint64_t seed);

// Single-pole recursive filter on the binned rate estimate:
//   y[n] = alpha x[n]/bin + (1-alpha) y[n-1],  alpha = 1 - exp(-bin/tc),
// initialized to the first sample to avoid a startup transient.
IntensityTrace low_pass(const CountTrace& trace, double time_constant);

}  // namespace qjspec
