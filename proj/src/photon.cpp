#include "qjspec/photon.hpp"

#include <cmath>
#include <stdexcept>

#include "qjspec/rng.hpp"

namespace qjspec {

void DetectionParams::validate() const {
    if (!(rate_bright >= 0.0) || !(rate_stray >= 0.0))
        throw std::invalid_argument("detection: count rates must be >= 0");
    if (!(bin_width > 0.0))
        throw std::invalid_argument("detection: bin_width must be positive");
}

CountTrace synthesize_counts(const JumpTrajectory& traj, const DetectionParams& det,
                             std::uint64_t seed) {
    det.validate();
    const auto n_bins = static_cast<Eigen::Index>(traj.duration / det.bin_width);
    if (n_bins < 1)
        throw std::invalid_argument("synthesize_counts: trajectory shorter than one bin");

    CountTrace out;
    out.bin_width = det.bin_width;
    out.origin_time = 0.0;
    out.counts.resize(n_bins);

    Rng rng(seed);
    const auto& sw = traj.switch_times;
    std::size_t cursor = 0;  // first switch not yet consumed
    GateState state = traj.initial_state;
    for (Eigen::Index k = 0; k < n_bins; ++k) {
        const double t0 = static_cast<double>(k) * det.bin_width;
        const double t1 = t0 + det.bin_width;
        // walk switches inside this bin once; trajectory is consumed in order
        double bright = 0.0;
        double mark = t0;
        while (cursor < sw.size() && sw[cursor] < t1) {
            if (state == GateState::Bright) bright += sw[cursor] - mark;
            mark = sw[cursor];
            state = flipped(state);
            ++cursor;
        }
        if (state == GateState::Bright) bright += t1 - mark;
        const double mean = det.rate_stray * det.bin_width + det.rate_bright * bright;
        out.counts[k] = static_cast<int>(rng.poisson(mean));
    }
    return out;
}

IntensityTrace low_pass(const CountTrace& trace, double time_constant) {
    if (!(time_constant > 0.0))
        throw std::invalid_argument("low_pass: time_constant must be positive");
    if (trace.counts.size() == 0) throw std::invalid_argument("low_pass: empty trace");

    const double alpha = 1.0 - std::exp(-trace.bin_width / time_constant);
    IntensityTrace out;
    out.sample_period = trace.bin_width;
    out.origin_time = trace.origin_time;
    out.values.resize(trace.counts.size());
    double y = static_cast<double>(trace.counts[0]) / trace.bin_width;
    out.values[0] = y;
    for (Eigen::Index n = 1; n < trace.counts.size(); ++n) {
        y = alpha * static_cast<double>(trace.counts[n]) / trace.bin_width + (1.0 - alpha) * y;
        out.values[n] = y;
    }
    return out;
}

}  // namespace qjspec
