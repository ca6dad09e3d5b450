#pragma once

#include <Eigen/Core>
#include <complex>
#include <vector>

namespace qjspec {

// Kaiser-windowed sinc low-pass. Cutoff midway through the transition band;
// taps normalized to unit DC gain; odd length (integer group delay).
Eigen::ArrayXd design_lowpass(double sample_rate, double pass_hz, double stop_hz,
                              double atten_db);

// Band-pass by modulating a low-pass prototype of cutoff bandwidth/2 up to
// center_hz; unit gain at the center frequency.
Eigen::ArrayXd design_bandpass(double sample_rate, double center_hz, double bandwidth_hz,
                               double transition_hz, double atten_db);

// Zero-phase application: convolve and drop the (odd-length) kernel's group
// delay, zero padding at the ends. Output has the input's length.
Eigen::ArrayXd filter_zero_phase(const Eigen::ArrayXd& x, const Eigen::ArrayXd& taps);

// Streaming FIR + downsampler for complex chunks. Output sample m is the
// convolution evaluated at absolute input index m*factor; history persists
// across push() calls so chunk boundaries are seamless.
class FirDecimator {
  public:
    FirDecimator(Eigen::ArrayXd taps, int factor);

    std::vector<std::complex<double>> push(const std::complex<double>* x, std::size_t n);

    int factor() const { return factor_; }
    // group delay in input samples (taps are odd-length, so this is exact)
    std::size_t delay() const { return (taps_.size() - 1) / 2; }

  private:
    std::vector<double> taps_;  // reversed for contiguous dot products
    int factor_;
    std::vector<std::complex<double>> history_;  // last ntaps-1 inputs
    std::uint64_t next_output_pos_ = 0;          // absolute input index of next output
    std::uint64_t consumed_ = 0;                 // absolute input count so far
};

}  // namespace qjspec
