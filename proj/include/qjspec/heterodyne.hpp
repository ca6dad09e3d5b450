#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "qjspec/rng.hpp"
#include "qjspec/telegraph.hpp"

namespace qjspec {

struct HeterodyneParams {
    double nu_L = 70e3;           // down-converted carrier, Hz
    double sample_rate = 262144;  // Hz; > 2 nu_L
    double carrier_amplitude = 1.0;
    double noise_density = 5e-4;  // one-sided, units^2/Hz (defaults give 30 dB at 1 Hz RBW)
    double phase_walk_rate = 0.0; // Wiener phase diffusion, rad^2/s; 0 disables
    std::vector<std::pair<double, double>> acoustic_sidebands;  // (offset Hz, relative amp)
    std::uint64_t seed = 0;

    void validate() const;
};

// Uniformly sampled real record of the down-converted beat.
struct SampledSignal {
    double sample_rate = 0.0;
    double carrier_hint = 0.0;  // where the carrier nominally sits, Hz
    Eigen::ArrayXd samples;

    double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
    void validate() const;
};

// Carrier amplitude giving the requested carrier-power to noise-power ratio
// inside one resolution bandwidth: A^2/2 = snr * noise_density * delta_R.
double amplitude_for_snr(double snr_power_ratio, double noise_density, double delta_R);

// Streaming generator for
//   s[n] = A g(t_n) cos(2 pi nu_L t_n + phi0 + phi_w(t_n)) + sidebands + w[n]
// with w white Gaussian of variance noise_density * fs / 2 and phi_w a Wiener
// process. The sample stream for a given (trajectory, params) is identical
// however it is cut into chunks, so long records can be produced and consumed
// without ever holding them in memory.
class BeatSynthesizer {
  public:
    BeatSynthesizer(const JumpTrajectory& traj, const HeterodyneParams& het);

    // next n samples; fewer at the end of the record, empty when exhausted
    Eigen::ArrayXd next_chunk(Eigen::Index max_samples);

    std::uint64_t total_samples() const { return total_samples_; }
    std::uint64_t produced() const { return produced_; }

  private:
    struct Tone {
        double freq = 0.0;
        double amp = 0.0;
        double phase0 = 0.0;
        double rot_re = 1.0, rot_im = 0.0;  // running phasor
        double step_re = 1.0, step_im = 0.0;
    };

    void refresh_tone(Tone& t, std::uint64_t n) const;

    const JumpTrajectory& traj_;
    HeterodyneParams het_;
    Rng rng_;
    std::vector<Tone> tones_;  // carrier first, then sidebands
    std::uint64_t total_samples_ = 0;
    std::uint64_t produced_ = 0;
    std::size_t switch_cursor_ = 0;
    bool bright_ = true;
    double wiener_phase_ = 0.0;
    double wiener_step_ = 0.0;
    double noise_sigma_ = 0.0;
};

// One-shot synthesis; requires the whole record to fit in memory.
SampledSignal synthesize_beat(const JumpTrajectory& traj, const HeterodyneParams& het);

// Linear-phase FIR band-pass (Kaiser design), group delay compensated so the
// carrier phase is preserved. Stopband > 40 dB one bandwidth beyond the edges.
SampledSignal bandpass(const SampledSignal& signal, double center_hz, double bandwidth_hz);

}  // namespace qjspec
