#include "qjspec/heterodyne.hpp"

#include <cmath>
#include <stdexcept>

#include "qjspec/fir.hpp"

namespace qjspec {

void HeterodyneParams::validate() const {
    if (!(nu_L > 0.0)) throw std::invalid_argument("heterodyne: nu_L must be positive");
    if (!(sample_rate > 2.0 * nu_L))
        throw std::invalid_argument("heterodyne: sample_rate must exceed 2*nu_L");
    if (!(noise_density >= 0.0))
        throw std::invalid_argument("heterodyne: noise_density must be >= 0");
    if (!(phase_walk_rate >= 0.0))
        throw std::invalid_argument("heterodyne: phase_walk_rate must be >= 0");
    for (const auto& [offset, amp] : acoustic_sidebands) {
        if (std::abs(nu_L + offset) >= 0.5 * sample_rate)
            throw std::invalid_argument("heterodyne: sideband outside Nyquist range");
        if (!(amp >= 0.0)) throw std::invalid_argument("heterodyne: sideband amplitude < 0");
    }
}

void SampledSignal::validate() const {
    if (samples.size() < 2) throw std::invalid_argument("signal: need at least 2 samples");
    if (!(sample_rate > 0.0)) throw std::invalid_argument("signal: sample_rate must be > 0");
    if (!samples.isFinite().all())
        throw std::invalid_argument("signal: samples must be finite");
}

double amplitude_for_snr(double snr_power_ratio, double noise_density, double delta_R) {
    if (!(snr_power_ratio > 0.0) || !(noise_density > 0.0) || !(delta_R > 0.0))
        throw std::invalid_argument("amplitude_for_snr: all arguments must be positive");
    return std::sqrt(2.0 * snr_power_ratio * noise_density * delta_R);
}

namespace {
constexpr std::uint64_t ROTOR_REFRESH = 1024;  // exact phasor recompute interval
}

BeatSynthesizer::BeatSynthesizer(const JumpTrajectory& traj, const HeterodyneParams& het)
    : traj_(traj), het_(het), rng_(seed_for(het.seed, "beat")) {
    het_.validate();
    total_samples_ = static_cast<std::uint64_t>(traj.duration * het.sample_rate);
    if (total_samples_ < 2)
        throw std::invalid_argument("synthesize_beat: trajectory shorter than 2 samples");

    // phases drawn up front, before any per-sample noise, so the tone setup
    // never shifts the noise stream
    Tone carrier;
    carrier.freq = het.nu_L;
    carrier.amp = het.carrier_amplitude;
    carrier.phase0 = 2.0 * M_PI * rng_.uniform();
    tones_.push_back(carrier);
    for (const auto& [offset, rel] : het.acoustic_sidebands) {
        Tone sb;
        sb.freq = het.nu_L + offset;
        sb.amp = rel * het.carrier_amplitude;
        sb.phase0 = 2.0 * M_PI * rng_.uniform();
        tones_.push_back(sb);
    }
    for (auto& t : tones_) {
        const double dtheta = 2.0 * M_PI * t.freq / het.sample_rate;
        t.step_re = std::cos(dtheta);
        t.step_im = std::sin(dtheta);
        refresh_tone(t, 0);
    }

    bright_ = traj.initial_state == GateState::Bright;
    wiener_step_ = std::sqrt(het.phase_walk_rate / het.sample_rate);
    noise_sigma_ = std::sqrt(het.noise_density * het.sample_rate / 2.0);
}

void BeatSynthesizer::refresh_tone(Tone& t, std::uint64_t n) const {
    // exact phase at absolute sample n; fmod argument stays below 2^53
    // for any run length this artifact produces
    const double cycles = std::fmod(t.freq * static_cast<double>(n), het_.sample_rate);
    const double theta = 2.0 * M_PI * cycles / het_.sample_rate + t.phase0;
    t.rot_re = std::cos(theta);
    t.rot_im = std::sin(theta);
}

Eigen::ArrayXd BeatSynthesizer::next_chunk(Eigen::Index max_samples) {
    const std::uint64_t remaining = total_samples_ - produced_;
    const auto n = static_cast<Eigen::Index>(
        std::min<std::uint64_t>(remaining, static_cast<std::uint64_t>(max_samples)));
    Eigen::ArrayXd out(n);

    const auto& sw = traj_.switch_times;
    const double dt = 1.0 / het_.sample_rate;
    const bool walk = het_.phase_walk_rate > 0.0;
    const bool noisy = noise_sigma_ > 0.0;

    double walk_re = std::cos(wiener_phase_);
    double walk_im = std::sin(wiener_phase_);

    for (Eigen::Index i = 0; i < n; ++i) {
        const std::uint64_t abs_n = produced_ + static_cast<std::uint64_t>(i);
        const double t = static_cast<double>(abs_n) * dt;
        while (switch_cursor_ < sw.size() && sw[switch_cursor_] <= t) {
            bright_ = !bright_;
            ++switch_cursor_;
        }
        if (abs_n % ROTOR_REFRESH == 0) {
            for (auto& tone : tones_) refresh_tone(tone, abs_n);
        }

        double s = 0.0;
        if (bright_) {
            if (walk) {
                wiener_phase_ += wiener_step_ * rng_.normal();
                walk_re = std::cos(wiener_phase_);
                walk_im = std::sin(wiener_phase_);
                for (const auto& tone : tones_)
                    s += tone.amp * (tone.rot_re * walk_re - tone.rot_im * walk_im);
            } else {
                for (const auto& tone : tones_) s += tone.amp * tone.rot_re;
            }
        } else if (walk) {
            // keep the phase diffusing (and the draw sequence aligned)
            // through dark periods
            wiener_phase_ += wiener_step_ * rng_.normal();
            walk_re = std::cos(wiener_phase_);
            walk_im = std::sin(wiener_phase_);
        }
        if (noisy) s += noise_sigma_ * rng_.normal();
        out[i] = s;

        for (auto& tone : tones_) {
            const double re = tone.rot_re * tone.step_re - tone.rot_im * tone.step_im;
            tone.rot_im = tone.rot_re * tone.step_im + tone.rot_im * tone.step_re;
            tone.rot_re = re;
        }
    }

    produced_ += static_cast<std::uint64_t>(n);
    return out;
}

SampledSignal synthesize_beat(const JumpTrajectory& traj, const HeterodyneParams& het) {
    BeatSynthesizer synth(traj, het);
    SampledSignal sig;
    sig.sample_rate = het.sample_rate;
    sig.carrier_hint = het.nu_L;
    sig.samples.resize(static_cast<Eigen::Index>(synth.total_samples()));
    Eigen::Index at = 0;
    while (synth.produced() < synth.total_samples()) {
        Eigen::ArrayXd chunk = synth.next_chunk(1 << 18);
        sig.samples.segment(at, chunk.size()) = chunk;
        at += chunk.size();
    }
    return sig;
}

SampledSignal bandpass(const SampledSignal& signal, double center_hz, double bandwidth_hz) {
    signal.validate();
    if (!(center_hz - 0.5 * bandwidth_hz > 0.0) ||
        !(center_hz + 0.5 * bandwidth_hz < 0.5 * signal.sample_rate))
        throw std::invalid_argument("bandpass: band outside (0, Nyquist)");
    const Eigen::ArrayXd taps =
        design_bandpass(signal.sample_rate, center_hz, bandwidth_hz, bandwidth_hz, 50.0);
    SampledSignal out;
    out.sample_rate = signal.sample_rate;
    out.carrier_hint = signal.carrier_hint;
    out.samples = filter_zero_phase(signal.samples, taps);
    return out;
}

}  // namespace qjspec
