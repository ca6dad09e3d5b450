#include "qjspec/fir.hpp"

#include <cmath>
#include <stdexcept>

namespace qjspec {

namespace {

double bessel_i0(double x) {
    // series converges quickly for the beta range used here
    double sum = 1.0;
    double term = 1.0;
    const double q = 0.25 * x * x;
    for (int k = 1; k < 80; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

double kaiser_beta(double atten_db) {
    if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
    if (atten_db >= 21.0)
        return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
    return 0.0;
}

Eigen::ArrayXd kaiser_sinc(double sample_rate, double cutoff_hz, double transition_hz,
                           double atten_db) {
    const double d_omega = 2.0 * M_PI * transition_hz / sample_rate;
    int ntaps = static_cast<int>(std::ceil((atten_db - 7.95) / (2.285 * d_omega))) + 1;
    if (ntaps % 2 == 0) ++ntaps;
    if (ntaps < 5) ntaps = 5;

    const double beta = kaiser_beta(atten_db);
    const double i0b = bessel_i0(beta);
    const int mid = (ntaps - 1) / 2;
    const double fc = cutoff_hz / sample_rate;  // normalized cutoff

    Eigen::ArrayXd h(ntaps);
    for (int n = 0; n < ntaps; ++n) {
        const double m = static_cast<double>(n - mid);
        const double x = 2.0 * M_PI * fc * m;
        const double sinc = m == 0.0 ? 2.0 * fc : std::sin(x) / (M_PI * m);
        const double r = m / static_cast<double>(mid);
        const double w = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
        h[n] = sinc * w;
    }
    return h;
}

}  // namespace

Eigen::ArrayXd design_lowpass(double sample_rate, double pass_hz, double stop_hz,
                              double atten_db) {
    if (!(0.0 < pass_hz && pass_hz < stop_hz && stop_hz < 0.5 * sample_rate))
        throw std::invalid_argument("design_lowpass: need 0 < pass < stop < Nyquist");
    Eigen::ArrayXd h =
        kaiser_sinc(sample_rate, 0.5 * (pass_hz + stop_hz), stop_hz - pass_hz, atten_db);
    return h / h.sum();
}

Eigen::ArrayXd design_bandpass(double sample_rate, double center_hz, double bandwidth_hz,
                               double transition_hz, double atten_db) {
    const double lo = center_hz - 0.5 * bandwidth_hz;
    const double hi = center_hz + 0.5 * bandwidth_hz;
    if (!(lo > 0.0) || !(hi < 0.5 * sample_rate))
        throw std::invalid_argument("design_bandpass: band outside (0, Nyquist)");
    Eigen::ArrayXd proto = kaiser_sinc(sample_rate, 0.5 * bandwidth_hz + 0.5 * transition_hz,
                                       transition_hz, atten_db);
    proto /= proto.sum();
    const int mid = (static_cast<int>(proto.size()) - 1) / 2;
    Eigen::ArrayXd h(proto.size());
    for (Eigen::Index n = 0; n < proto.size(); ++n) {
        const double m = static_cast<double>(n - mid);
        h[n] = 2.0 * proto[n] * std::cos(2.0 * M_PI * center_hz * m / sample_rate);
    }
    return h;
}

Eigen::ArrayXd filter_zero_phase(const Eigen::ArrayXd& x, const Eigen::ArrayXd& taps) {
    const Eigen::Index n = x.size();
    const Eigen::Index L = taps.size();
    const Eigen::Index d = (L - 1) / 2;
    Eigen::ArrayXd y = Eigen::ArrayXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        const Eigen::Index k_lo = std::max<Eigen::Index>(0, i + d - n + 1);
        const Eigen::Index k_hi = std::min<Eigen::Index>(L - 1, i + d);
        for (Eigen::Index k = k_lo; k <= k_hi; ++k) acc += taps[k] * x[i + d - k];
        y[i] = acc;
    }
    return y;
}

FirDecimator::FirDecimator(Eigen::ArrayXd taps, int factor) : factor_(factor) {
    if (taps.size() % 2 == 0)
        throw std::invalid_argument("FirDecimator: taps must have odd length");
    if (factor < 1) throw std::invalid_argument("FirDecimator: factor must be >= 1");
    taps_.resize(static_cast<std::size_t>(taps.size()));
    for (Eigen::Index j = 0; j < taps.size(); ++j)
        taps_[static_cast<std::size_t>(j)] = taps[taps.size() - 1 - j];  // reversed
    history_.assign(taps_.size() - 1, {0.0, 0.0});
}

std::vector<std::complex<double>> FirDecimator::push(const std::complex<double>* x,
                                                     std::size_t n) {
    const std::size_t L = taps_.size();
    std::vector<std::complex<double>> work;
    work.reserve(history_.size() + n);
    work.insert(work.end(), history_.begin(), history_.end());
    work.insert(work.end(), x, x + n);

    std::vector<std::complex<double>> out;
    // work[j] holds absolute input index consumed_ - (L-1) + j, so the
    // window x[pos-L+1 .. pos] starts at local index pos - consumed_
    while (next_output_pos_ < consumed_ + n) {
        const std::size_t start = static_cast<std::size_t>(next_output_pos_ - consumed_);
        double re = 0.0;
        double im = 0.0;
        const std::complex<double>* w = work.data() + start;
        for (std::size_t j = 0; j < L; ++j) {
            re += taps_[j] * w[j].real();
            im += taps_[j] * w[j].imag();
        }
        out.emplace_back(re, im);
        next_output_pos_ += static_cast<std::uint64_t>(factor_);
    }

    consumed_ += n;
    history_.assign(work.end() - static_cast<std::ptrdiff_t>(L - 1), work.end());
    return out;
}

}  // namespace qjspec
