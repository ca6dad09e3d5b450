#pragma once

#include <Eigen/Core>
#include <complex>
#include <memory>
#include <optional>
#include <string>

#include "qjspec/heterodyne.hpp"
#include "qjspec/telegraph.hpp"

namespace qjspec {

enum class WindowKind { Hann, Rectangular };

std::string to_string(WindowKind w);
WindowKind window_from_string(const std::string& name);

struct WelchConfig {
    Eigen::Index segment_length = 1024;  // power of two, >= 256
    double overlap_fraction = 0.5;       // in [0, 1)
    WindowKind window = WindowKind::Hann;
    bool detrend = false;  // per-segment mean removal; keep off when the
                           // carrier sits at offset 0

    void validate() const;
};

// Welch-averaged PSD on a frequency-offset grid (0 = carrier).
struct Spectrum {
    Eigen::ArrayXd freq_offsets;  // Hz, uniform ascending
    Eigen::ArrayXd psd;           // power / Hz
    double delta_R = 0.0;         // FWHM of the window line response, Hz
    double enbw = 0.0;            // equivalent noise bandwidth, Hz
    int n_averages = 0;
    WindowKind window = WindowKind::Hann;
    double valid_span = 0.0;  // |offset| guaranteed unaffected by decimation rolloff

    double bin_spacing() const { return freq_offsets[1] - freq_offsets[0]; }
};

// Complex down-converted signal: sample m sits at origin_time + m/sample_rate
// and frequency offsets are relative to center_freq.
struct BasebandSignal {
    double sample_rate = 0.0;
    double center_freq = 0.0;
    double origin_time = 0.0;
    double passband = 0.0;  // alias-protected half-width, Hz
    Eigen::ArrayXcd samples;

    double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

// Window line response |W(x)|^2 normalized to 1 at x = 0, x in bins.
double window_line_response(WindowKind w, double x_bins);
// FWHM of the line response in bins (~1.438 hann, ~0.886 rectangular).
double window_fwhm_bins(WindowKind w);
// Exact equivalent noise bandwidth in bins for an N-point window.
double window_enbw_bins(WindowKind w, Eigen::Index n);

// Streaming mixer + multistage FIR decimator: multiplies by
// sqrt(2) exp(-i 2 pi center t) and reduces the rate by `factor`, so the
// baseband two-sided density equals the real signal's one-sided density
// near the carrier. Aliases are held 55 dB down inside +-passband_hz.
class BasebandDecimator {
  public:
    BasebandDecimator(double sample_rate, double center_hz, int factor, double passband_hz);

    void push(const double* samples, std::size_t n);
    void push(const Eigen::ArrayXd& chunk) {
        push(chunk.data(), static_cast<std::size_t>(chunk.size()));
    }
    // flushes nothing: trailing partial filter state is simply dropped
    BasebandSignal finish();

    double output_rate() const { return out_rate_; }

  private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

// One-shot wrapper over BasebandDecimator.
BasebandSignal decimate_to_band(const SampledSignal& signal, int factor, double passband_hz);

// Direct Welch estimate of the real record: one-sided density over
// [0, fs/2], axis re-centered so carrier_hint maps to offset 0.
Spectrum estimate_psd(const SampledSignal& signal, const WelchConfig& cfg);

// Welch estimate of the down-converted record, offsets symmetric about 0.
Spectrum estimate_psd(const BasebandSignal& signal, const WelchConfig& cfg);

// Welch averaging restricted to segments lying wholly inside bright periods
// of length >= min_bright. Inside such segments the gate never switches, so
// the jump pedestal is absent from the average by construction.
Spectrum conditional_psd(const BasebandSignal& signal, const JumpTrajectory& traj,
                         const WelchConfig& cfg, double min_bright);
Spectrum conditional_psd(const SampledSignal& signal, const JumpTrajectory& traj,
                         const WelchConfig& cfg, double min_bright);

enum class FitStatus { Converged, DegeneratePedestal, MaxIterations };

// Line + pedestal + baseline decomposition of a Spectrum. Heights are PSD
// densities; A_L_hat converts the measured height ratio into the convention
// where the line is rendered as a Lorentzian of FWHM delta_R (peak 2/(pi
// delta_R) per unit power), via A_L = ratio * pi * delta_R / (2 * enbw).
struct PedestalFit {
    double center = 0.0;           // Hz offset of the line
    double peak_height = 0.0;      // line component peak density
    double pedestal_height = 0.0;  // pedestal density at the center
    double delta_L_hat = 0.0;      // pedestal FWHM, Hz
    double baseline = 0.0;         // flat noise floor density

    double sigma_center = 0.0;
    double sigma_peak_height = 0.0;
    double sigma_pedestal_height = 0.0;
    double sigma_delta_L = 0.0;
    double sigma_baseline = 0.0;

    double A_L_hat = 0.0;
    double sigma_A_L = 0.0;
    double weight_ratio_hat = 0.0;  // pedestal power / line power
    double sigma_weight_ratio = 0.0;
    double snr_hat = 0.0;  // line power / (baseline * delta_R)

    double residual_rms = 0.0;
    FitStatus status = FitStatus::Converged;
    int iterations = 0;
};

PedestalFit fit_pedestal(const Spectrum& spec, std::optional<PedestalFit> init = {});

// Expected Welch spectrum for a gated carrier of ungated power total_power
// over a flat noise floor: baseline + line rendered through the window
// response + pedestal Lorentzian convolved with the window kernel.
Eigen::ArrayXd render_model(const Spectrum& grid, const SpectralPrediction& pred,
                            double total_power, double baseline_density);

struct OracleComparison {
    double band_lo = 0.0, band_hi = 0.0;  // applied to |offset|
    int n_bins = 0;
    double rms_rel_dev = 0.0;
    double mean_rel_dev = 0.0;
    double max_abs_rel_dev = 0.0;
    Eigen::ArrayXd freq;     // bins inside the band
    Eigen::ArrayXd rel_dev;  // (measured - model)/model per bin
};

// Per-bin relative deviation between a measured Spectrum and the rendered
// analytic model over band_lo <= |offset| <= band_hi.
OracleComparison oracle_compare(const Spectrum& spec, const SpectralPrediction& pred,
                                double band_lo, double band_hi, double total_power,
                                double baseline_density);

}  // namespace qjspec
