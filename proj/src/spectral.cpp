#include "qjspec/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qjspec/fir.hpp"
#include "qjspec/lm.hpp"
#include "qjspec/mathutil.hpp"

namespace qjspec {

std::string to_string(WindowKind w) {
    return w == WindowKind::Hann ? "hann" : "rectangular";
}

WindowKind window_from_string(const std::string& name) {
    if (name == "hann") return WindowKind::Hann;
    if (name == "rectangular" || name == "rect") return WindowKind::Rectangular;
    throw std::invalid_argument("unknown window: " + name);
}

void WelchConfig::validate() const {
    if (segment_length < 256 || (segment_length & (segment_length - 1)) != 0)
        throw std::invalid_argument("welch: segment_length must be a power of two >= 256");
    if (!(overlap_fraction >= 0.0) || !(overlap_fraction < 1.0))
        throw std::invalid_argument("welch: overlap_fraction must be in [0, 1)");
}

double window_line_response(WindowKind w, double x) {
    const double ax = std::abs(x);
    double amp;
    if (w == WindowKind::Rectangular) {
        amp = ax < 1e-9 ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
    } else {
        if (ax < 1e-9) {
            amp = 1.0;
        } else if (std::abs(ax - 1.0) < 1e-9) {
            amp = 0.5;
        } else {
            amp = std::sin(M_PI * x) / (M_PI * x * (1.0 - x * x));
        }
    }
    return amp * amp;
}

double window_fwhm_bins(WindowKind w) {
    // half-power point of the line response by bisection
    double lo = 0.1, hi = 1.2;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (window_line_response(w, mid) > 0.5 ? lo : hi) = mid;
    }
    return lo + hi;  // 2 * half-width
}

namespace {

Eigen::ArrayXd make_window(WindowKind w, Eigen::Index n) {
    if (w == WindowKind::Rectangular) return Eigen::ArrayXd::Ones(n);
    Eigen::ArrayXd out(n);
    for (Eigen::Index i = 0; i < n; ++i)
        out[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) /
                                       static_cast<double>(n)));
    return out;
}

// binary-counter pairwise accumulation: the reduction tree depends only on
// the segment index, never on evaluation order
struct PairwiseAccum {
    std::vector<Eigen::ArrayXd> levels;
    std::vector<bool> occupied;
    int count = 0;

    void add(Eigen::ArrayXd value) {
        std::size_t i = 0;
        while (i < levels.size() && occupied[i]) {
            value += levels[i];
            occupied[i] = false;
            ++i;
        }
        if (i == levels.size()) {
            levels.push_back(std::move(value));
            occupied.push_back(true);
        } else {
            levels[i] = std::move(value);
            occupied[i] = true;
        }
        ++count;
    }

    Eigen::ArrayXd total(Eigen::Index n) const {
        Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(n);
        for (std::size_t i = 0; i < levels.size(); ++i)
            if (occupied[i]) sum += levels[i];
        return sum;
    }
};

struct SegmentGrid {
    Eigen::Index hop = 0;
    Eigen::Index count = 0;
};

SegmentGrid segment_grid(Eigen::Index total, const WelchConfig& cfg) {
    cfg.validate();
    if (total < cfg.segment_length)
        throw std::invalid_argument("estimate_psd: signal shorter than one segment");
    SegmentGrid g;
    g.hop = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(std::lround(
               static_cast<double>(cfg.segment_length) * (1.0 - cfg.overlap_fraction))));
    g.count = (total - cfg.segment_length) / g.hop + 1;
    return g;
}

void fill_common(Spectrum& s, const WelchConfig& cfg, double fs, int k_averages) {
    const double bin = fs / static_cast<double>(cfg.segment_length);
    s.window = cfg.window;
    s.n_averages = k_averages;
    s.delta_R = window_fwhm_bins(cfg.window) * bin;
    s.enbw = window_enbw_bins(cfg.window, cfg.segment_length) * bin;
}

}  // namespace

double window_enbw_bins(WindowKind w, Eigen::Index n) {
    const Eigen::ArrayXd win = make_window(w, n);
    const double s1 = win.sum();
    const double s2 = win.square().sum();
    return static_cast<double>(n) * s2 / (s1 * s1);
}

namespace {

// one-sided Welch over real segments selected by `take(m)`
Spectrum welch_real(const SampledSignal& signal, const WelchConfig& cfg,
                    const std::function<bool(Eigen::Index)>& take) {
    signal.validate();
    const Eigen::Index n = cfg.segment_length;
    const SegmentGrid grid = segment_grid(signal.samples.size(), cfg);
    const Eigen::ArrayXd win = make_window(cfg.window, n);
    const double u = win.square().sum();

    Eigen::FFT<double> fft;
    std::vector<double> seg(static_cast<std::size_t>(n));
    std::vector<std::complex<double>> spec;
    const Eigen::Index n_out = n / 2 + 1;

    PairwiseAccum accum;
    for (Eigen::Index m = 0; m < grid.count; ++m) {
        if (!take(m)) continue;
        Eigen::ArrayXd chunk = signal.samples.segment(m * grid.hop, n);
        if (cfg.detrend) chunk -= chunk.mean();
        chunk *= win;
        std::copy(chunk.data(), chunk.data() + n, seg.begin());
        fft.fwd(spec, seg);
        Eigen::ArrayXd p(n_out);
        for (Eigen::Index k = 0; k < n_out; ++k) {
            const double scale = (k == 0 || k == n / 2) ? 1.0 : 2.0;
            p[k] = scale * std::norm(spec[static_cast<std::size_t>(k)]);
        }
        accum.add(std::move(p));
    }
    if (accum.count == 0)
        throw std::invalid_argument("conditional_psd: no qualifying segments");

    Spectrum out;
    out.psd = accum.total(n_out) / (static_cast<double>(accum.count) * signal.sample_rate * u);
    out.freq_offsets.resize(n_out);
    const double bin = signal.sample_rate / static_cast<double>(n);
    for (Eigen::Index k = 0; k < n_out; ++k)
        out.freq_offsets[k] = static_cast<double>(k) * bin - signal.carrier_hint;
    fill_common(out, cfg, signal.sample_rate, accum.count);
    out.valid_span = 0.5 * signal.sample_rate;
    return out;
}

}  // namespace

Spectrum estimate_psd(const SampledSignal& signal, const WelchConfig& cfg) {
    return welch_real(signal, cfg, [](Eigen::Index) { return true; });
}

namespace {

// two-sided Welch over complex baseband segments selected by `take(m)`
Spectrum welch_complex(const BasebandSignal& signal, const WelchConfig& cfg,
                       const std::function<bool(Eigen::Index)>& take) {
    if (!signal.samples.allFinite())
        throw std::invalid_argument("estimate_psd: NaN samples");
    const Eigen::Index n = cfg.segment_length;
    const SegmentGrid grid = segment_grid(signal.samples.size(), cfg);
    const Eigen::ArrayXd win = make_window(cfg.window, n);
    const double u = win.square().sum();

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> seg(static_cast<std::size_t>(n)), spec;

    PairwiseAccum accum;
    for (Eigen::Index m = 0; m < grid.count; ++m) {
        if (!take(m)) continue;
        Eigen::ArrayXcd chunk = signal.samples.segment(m * grid.hop, n);
        if (cfg.detrend) chunk -= chunk.mean();
        for (Eigen::Index i = 0; i < n; ++i)
            seg[static_cast<std::size_t>(i)] = chunk[i] * win[i];
        fft.fwd(spec, seg);
        Eigen::ArrayXd p(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            // fftshift: bin k of the DFT lands at offset index (k + n/2) mod n
            const Eigen::Index at = (k + n / 2) % n;
            p[at] = std::norm(spec[static_cast<std::size_t>(k)]);
        }
        accum.add(std::move(p));
    }
    if (accum.count == 0)
        throw std::invalid_argument("conditional_psd: no qualifying segments");

    Spectrum out;
    out.psd = accum.total(n) / (static_cast<double>(accum.count) * signal.sample_rate * u);
    out.freq_offsets.resize(n);
    const double bin = signal.sample_rate / static_cast<double>(n);
    for (Eigen::Index k = 0; k < n; ++k)
        out.freq_offsets[k] = static_cast<double>(k - n / 2) * bin;
    fill_common(out, cfg, signal.sample_rate, accum.count);
    out.valid_span = signal.passband > 0.0 ? signal.passband : 0.5 * signal.sample_rate;
    return out;
}

std::vector<std::pair<double, double>> bright_intervals(const JumpTrajectory& traj,
                                                        double min_len) {
    std::vector<std::pair<double, double>> out;
    double t = 0.0;
    GateState state = traj.initial_state;
    for (double s : traj.switch_times) {
        if (state == GateState::Bright && s - t >= min_len) out.emplace_back(t, s);
        t = s;
        state = flipped(state);
    }
    if (state == GateState::Bright && traj.duration - t >= min_len)
        out.emplace_back(t, traj.duration);
    return out;
}

std::function<bool(Eigen::Index)> bright_segment_filter(
    const JumpTrajectory& traj, double origin_time, double sample_rate, Eigen::Index hop,
    Eigen::Index seg_len, double min_bright) {
    const double seg_dur = static_cast<double>(seg_len - 1) / sample_rate;
    auto intervals = bright_intervals(traj, std::max(min_bright, seg_dur));
    return [intervals = std::move(intervals), origin_time, sample_rate, hop,
            seg_dur](Eigen::Index m) {
        const double t0 = origin_time + static_cast<double>(m * hop) / sample_rate;
        const double t1 = t0 + seg_dur;
        auto it = std::upper_bound(intervals.begin(), intervals.end(),
                                   std::make_pair(t0, std::numeric_limits<double>::max()));
        if (it == intervals.begin()) return false;
        --it;
        return it->first <= t0 && t1 <= it->second;
    };
}

}  // namespace

Spectrum estimate_psd(const BasebandSignal& signal, const WelchConfig& cfg) {
    return welch_complex(signal, cfg, [](Eigen::Index) { return true; });
}

Spectrum conditional_psd(const BasebandSignal& signal, const JumpTrajectory& traj,
                         const WelchConfig& cfg, double min_bright) {
    const SegmentGrid grid = segment_grid(signal.samples.size(), cfg);
    return welch_complex(signal, cfg,
                         bright_segment_filter(traj, signal.origin_time, signal.sample_rate,
                                               grid.hop, cfg.segment_length, min_bright));
}

Spectrum conditional_psd(const SampledSignal& signal, const JumpTrajectory& traj,
                         const WelchConfig& cfg, double min_bright) {
    const SegmentGrid grid = segment_grid(signal.samples.size(), cfg);
    return welch_real(signal, cfg,
                      bright_segment_filter(traj, 0.0, signal.sample_rate, grid.hop,
                                            cfg.segment_length, min_bright));
}

// ---------------------------------------------------------------------------
// mixing + decimation

struct BasebandDecimator::Impl {
    double fs_in = 0.0;
    double center = 0.0;
    double passband = 0.0;
    int factor = 1;
    double out_rate = 0.0;
    std::vector<FirDecimator> stages;
    std::uint64_t delay_inputs = 0;  // cascade group delay in input samples

    std::uint64_t mix_n = 0;
    double rot_re = 1.0, rot_im = 0.0;
    double step_re = 1.0, step_im = 0.0;
    std::vector<std::complex<double>> collected;
};

namespace {
std::vector<int> stage_plan(int factor) {
    std::vector<int> plan;
    int m = factor;
    for (;;) {
        bool found = false;
        for (int f : {8, 7, 6, 5, 4, 3, 2}) {
            if (m % f == 0 && m / f > 1) {
                plan.push_back(f);
                m /= f;
                found = true;
                break;
            }
        }
        if (!found) break;
    }
    if (m > 1) plan.push_back(m);
    return plan;
}
}  // namespace

BasebandDecimator::BasebandDecimator(double sample_rate, double center_hz, int factor,
                                     double passband_hz)
    : impl_(std::make_shared<Impl>()) {
    if (factor < 1) throw std::invalid_argument("decimator: factor must be >= 1");
    Impl& d = *impl_;
    d.fs_in = sample_rate;
    d.center = center_hz;
    d.passband = passband_hz;
    d.factor = factor;
    d.out_rate = sample_rate / factor;
    if (!(d.out_rate > 2.0 * passband_hz))
        throw std::invalid_argument("decimator: passband too wide for this factor");

    double fs = sample_rate;
    std::uint64_t cum = 1;
    for (int f : stage_plan(factor)) {
        const double fs_out = fs / f;
        const Eigen::ArrayXd taps = design_lowpass(fs, passband_hz, fs_out - passband_hz, 55.0);
        FirDecimator stage(taps, f);
        d.delay_inputs += cum * stage.delay();
        d.stages.push_back(std::move(stage));
        cum *= static_cast<std::uint64_t>(f);
        fs = fs_out;
    }

    const double dtheta = 2.0 * M_PI * center_hz / sample_rate;
    d.step_re = std::cos(dtheta);
    d.step_im = -std::sin(dtheta);  // e^{-i theta} rotor
    d.rot_re = 1.0;
    d.rot_im = 0.0;
}

void BasebandDecimator::push(const double* samples, std::size_t n) {
    Impl& d = *impl_;
    std::vector<std::complex<double>> mixed(n);
    const double root2 = std::sqrt(2.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t abs_n = d.mix_n + i;
        if (abs_n % 1024 == 0) {
            const double cycles =
                std::fmod(d.center * static_cast<double>(abs_n), d.fs_in);
            const double theta = 2.0 * M_PI * cycles / d.fs_in;
            d.rot_re = std::cos(theta);
            d.rot_im = -std::sin(theta);
        }
        mixed[i] = {root2 * samples[i] * d.rot_re, root2 * samples[i] * d.rot_im};
        const double re = d.rot_re * d.step_re - d.rot_im * d.step_im;
        d.rot_im = d.rot_re * d.step_im + d.rot_im * d.step_re;
        d.rot_re = re;
    }
    d.mix_n += n;

    for (auto& stage : d.stages) {
        mixed = stage.push(mixed.data(), mixed.size());
        if (mixed.empty()) return;
    }
    d.collected.insert(d.collected.end(), mixed.begin(), mixed.end());
}

BasebandSignal BasebandDecimator::finish() {
    Impl& d = *impl_;
    const auto m = static_cast<std::uint64_t>(d.factor);
    const std::uint64_t first_keep = (d.delay_inputs + m - 1) / m;

    BasebandSignal out;
    out.sample_rate = d.out_rate;
    out.center_freq = d.center;
    out.passband = d.passband;
    out.origin_time = (static_cast<double>(first_keep * m) -
                       static_cast<double>(d.delay_inputs)) /
                      d.fs_in;
    const std::size_t keep =
        d.collected.size() > first_keep ? d.collected.size() - first_keep : 0;
    out.samples.resize(static_cast<Eigen::Index>(keep));
    for (std::size_t i = 0; i < keep; ++i)
        out.samples[static_cast<Eigen::Index>(i)] = d.collected[first_keep + i];
    return out;
}

BasebandSignal decimate_to_band(const SampledSignal& signal, int factor, double passband_hz) {
    signal.validate();
    BasebandDecimator dec(signal.sample_rate, signal.carrier_hint, factor, passband_hz);
    dec.push(signal.samples.data(), static_cast<std::size_t>(signal.samples.size()));
    return dec.finish();
}

// ---------------------------------------------------------------------------
// line + pedestal fit

namespace {

struct FitData {
    Eigen::ArrayXd freq;
    Eigen::ArrayXd psd;
    Eigen::ArrayXd inv_sigma;
    double bin = 0.0;
    WindowKind window = WindowKind::Hann;
};

Eigen::ArrayXd eval_model(const FitData& d, const Eigen::VectorXd& x) {
    const double center = x[0], h_line = x[1], h_ped = x[2], delta_l = x[3], base = x[4];
    Eigen::ArrayXd m(d.freq.size());
    for (Eigen::Index i = 0; i < d.freq.size(); ++i) {
        const double nu = d.freq[i] - center;
        m[i] = base + h_line * window_line_response(d.window, nu / d.bin) +
               h_ped * lorentzian_peak_norm(nu, delta_l);
    }
    return m;
}

double median(Eigen::ArrayXd v) {
    std::sort(v.data(), v.data() + v.size());
    const Eigen::Index n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

PedestalFit fit_pedestal(const Spectrum& spec, std::optional<PedestalFit> init) {
    if (spec.freq_offsets.size() < 16)
        throw std::invalid_argument("fit_pedestal: spectrum too small");

    FitData d;
    d.bin = spec.bin_spacing();
    d.window = spec.window;
    // restrict to the alias-protected span
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < spec.freq_offsets.size(); ++i)
        if (std::abs(spec.freq_offsets[i]) <= spec.valid_span) keep.push_back(i);
    d.freq.resize(static_cast<Eigen::Index>(keep.size()));
    d.psd.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        d.freq[static_cast<Eigen::Index>(i)] = spec.freq_offsets[keep[i]];
        d.psd[static_cast<Eigen::Index>(i)] = spec.psd[keep[i]];
    }

    const double span = d.freq.abs().maxCoeff();
    Eigen::Index imax = 0;
    d.psd.maxCoeff(&imax);
    const double c0 = d.freq[imax];
    const double b0 = median(d.psd);
    const double h_l0 = std::max(d.psd[imax] - b0, 1e-300);

    double delta_l0;
    if (init && init->delta_L_hat > 0.0) {
        delta_l0 = init->delta_L_hat;
        if (5.0 * delta_l0 > span)
            throw std::invalid_argument(
                "fit_pedestal: spectrum span below 5x initial pedestal width");
    } else {
        // second moment of the background-subtracted spectrum, core excluded
        double num = 0.0, den = 0.0;
        for (Eigen::Index i = 0; i < d.freq.size(); ++i) {
            const double nu = d.freq[i] - c0;
            if (std::abs(nu) < 3.0 * d.bin || std::abs(nu) > 0.8 * span) continue;
            const double excess = std::max(d.psd[i] - b0, 0.0);
            num += excess * nu * nu;
            den += excess;
        }
        const double m2 = den > 0.0 ? num / den : 0.0;
        delta_l0 = std::clamp(M_PI * m2 / (0.8 * span), 4.0 * d.bin, span / 6.0);
    }

    double h_p0 = 0.0;
    {
        int n_p = 0;
        for (Eigen::Index i = 0; i < d.freq.size(); ++i) {
            const double nu = std::abs(d.freq[i] - c0);
            if (nu < 5.0 * d.bin || nu > std::max(10.0 * d.bin, delta_l0)) continue;
            h_p0 += std::max(d.psd[i] - b0, 0.0);
            ++n_p;
        }
        h_p0 = n_p > 0 ? h_p0 / n_p : 0.0;
    }

    const double k_avg = std::max(1, spec.n_averages);
    const double floor = std::max(d.psd.maxCoeff() * 1e-12, 1e-300);
    d.inv_sigma = (std::sqrt(k_avg) / d.psd.max(floor)).eval();

    const auto residual = [&d](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        const Eigen::ArrayXd m = eval_model(d, x);
        r = ((m - d.psd) * d.inv_sigma).matrix();
    };

    Eigen::VectorXd x0(5), lo(5), hi(5), scale(5);
    x0 << c0, h_l0, h_p0, delta_l0, b0;
    lo << c0 - 3.0 * d.bin, 0.0, 0.0, 2.0 * d.bin, 0.0;
    hi << c0 + 3.0 * d.bin, 10.0 * (h_l0 + b0), 2.0 * (h_l0 + b0), 2.0 * span,
        10.0 * (b0 + 1e-300);
    scale << d.bin, h_l0, std::max(h_p0, 1e-3 * h_l0), delta_l0, std::max(b0, 1e-6 * h_l0);

    LmOptions opts;
    opts.x_scale = scale;
    LmResult lm = levenberg_marquardt(residual, x0, lo, hi,
                                      static_cast<int>(d.freq.size()), opts);

    PedestalFit fit;
    auto fill = [&](const LmResult& r, bool fixed_width, double fixed_delta) {
        fit.center = r.x[0];
        fit.peak_height = r.x[1];
        fit.pedestal_height = r.x[2];
        fit.delta_L_hat = fixed_width ? fixed_delta : r.x[3];
        fit.baseline = r.x[4];
        const auto sig = [&](int i) {
            return r.covariance_ok ? std::sqrt(std::max(0.0, r.covariance(i, i))) : 0.0;
        };
        fit.sigma_center = sig(0);
        fit.sigma_peak_height = sig(1);
        fit.sigma_pedestal_height = sig(2);
        fit.sigma_delta_L = fixed_width ? 0.0 : sig(3);
        fit.sigma_baseline = sig(4);
        fit.iterations += r.iterations;

        const double conv = M_PI * spec.delta_R / (2.0 * spec.enbw);
        const double hl = std::max(fit.peak_height, 1e-300);
        fit.A_L_hat = conv * fit.pedestal_height / hl;
        // first-order propagation through the (h_ped, h_line) pair
        {
            Eigen::Vector2d g(conv / hl, -conv * fit.pedestal_height / (hl * hl));
            Eigen::Matrix2d c = Eigen::Matrix2d::Zero();
            if (r.covariance_ok) {
                c(0, 0) = r.covariance(2, 2);
                c(0, 1) = c(1, 0) = r.covariance(2, 1);
                c(1, 1) = r.covariance(1, 1);
            }
            fit.sigma_A_L = std::sqrt(std::max(0.0, g.dot(c * g)));
        }
        // pedestal power over line power
        fit.weight_ratio_hat =
            fit.pedestal_height * M_PI * fit.delta_L_hat / (2.0 * hl * spec.enbw);
        {
            Eigen::Vector3d g;  // d/d(h_ped), d/d(delta_L), d/d(h_line)
            g << M_PI * fit.delta_L_hat / (2.0 * hl * spec.enbw),
                fit.pedestal_height * M_PI / (2.0 * hl * spec.enbw),
                -fit.weight_ratio_hat / hl;
            Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
            if (r.covariance_ok) {
                const int idx[3] = {2, 3, 1};
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        c(a, b) = fixed_width && (a == 1 || b == 1)
                                      ? 0.0
                                      : r.covariance(idx[a], idx[b]);
            }
            fit.sigma_weight_ratio = std::sqrt(std::max(0.0, g.dot(c * g)));
        }
        fit.snr_hat = fit.peak_height * spec.enbw /
                      std::max(fit.baseline * spec.delta_R, 1e-300);
        const Eigen::ArrayXd m = eval_model(
            d, fixed_width
                   ? (Eigen::VectorXd(5) << r.x[0], r.x[1], r.x[2], fixed_delta, r.x[4])
                         .finished()
                   : r.x);
        fit.residual_rms = std::sqrt((m - d.psd).square().mean());
    };

    fill(lm, false, 0.0);
    fit.status = lm.converged ? FitStatus::Converged : FitStatus::MaxIterations;

    // pedestal indistinguishable from the baseline: pin the width at the
    // initial guess and report weight zero with its uncertainty as the bound
    const bool degenerate = lm.converged && (fit.pedestal_height < 2.0 * fit.sigma_pedestal_height ||
                                             fit.delta_L_hat >= 1.99 * span);
    if (degenerate) {
        const double fixed_delta = delta_l0;
        const auto residual4 = [&d, fixed_delta](const Eigen::VectorXd& x,
                                                 Eigen::VectorXd& r) {
            Eigen::VectorXd full(5);
            full << x[0], x[1], x[2], fixed_delta, x[3];
            const Eigen::ArrayXd m = eval_model(d, full);
            r = ((m - d.psd) * d.inv_sigma).matrix();
        };
        Eigen::VectorXd x40(4), lo4(4), hi4(4), sc4(4);
        x40 << lm.x[0], lm.x[1], lm.x[2], lm.x[4];
        lo4 << lo[0], lo[1], lo[2], lo[4];
        hi4 << hi[0], hi[1], hi[2], hi[4];
        sc4 << scale[0], scale[1], scale[2], scale[4];
        LmOptions o4;
        o4.x_scale = sc4;
        LmResult lm4 = levenberg_marquardt(residual4, x40, lo4, hi4,
                                           static_cast<int>(d.freq.size()), o4);
        // re-expand to the 5-parameter layout for fill()
        LmResult expanded;
        expanded.x = Eigen::VectorXd(5);
        expanded.x << lm4.x[0], lm4.x[1], lm4.x[2], fixed_delta, lm4.x[3];
        expanded.covariance = Eigen::MatrixXd::Zero(5, 5);
        if (lm4.covariance_ok) {
            const int map[4] = {0, 1, 2, 4};
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    expanded.covariance(map[a], map[b]) = lm4.covariance(a, b);
        }
        expanded.covariance_ok = lm4.covariance_ok;
        expanded.converged = lm4.converged;
        expanded.iterations = lm4.iterations;
        fill(expanded, true, fixed_delta);
        fit.weight_ratio_hat = 0.0;  // reported as zero, sigma is the bound
        fit.status = FitStatus::DegeneratePedestal;
    }
    return fit;
}

// ---------------------------------------------------------------------------
// analytic rendering and comparison

Eigen::ArrayXd render_model(const Spectrum& grid, const SpectralPrediction& pred,
                            double total_power, double baseline_density) {
    const double bin = grid.bin_spacing();
    const double line_power = total_power * pred.line_weight;
    const double ped_power = total_power * pred.pedestal_weight;

    // window kernel as a unit-area discrete convolution kernel
    const int k_half = 16;
    Eigen::ArrayXd kernel(2 * k_half + 1);
    for (int j = -k_half; j <= k_half; ++j)
        kernel[j + k_half] = window_line_response(grid.window, static_cast<double>(j));
    kernel /= kernel.sum() * bin;

    Eigen::ArrayXd out(grid.freq_offsets.size());
    for (Eigen::Index i = 0; i < grid.freq_offsets.size(); ++i) {
        const double nu = grid.freq_offsets[i];
        double ped = 0.0;
        for (int j = -k_half; j <= k_half; ++j)
            ped += kernel[j + k_half] * bin *
                   lorentzian_unit_area(nu - static_cast<double>(j) * bin, pred.delta_L);
        out[i] = baseline_density +
                 line_power * window_line_response(grid.window, nu / bin) / grid.enbw +
                 ped_power * ped;
    }
    return out;
}

OracleComparison oracle_compare(const Spectrum& spec, const SpectralPrediction& pred,
                                double band_lo, double band_hi, double total_power,
                                double baseline_density) {
    const double span = spec.freq_offsets.abs().maxCoeff();
    if (!(band_lo >= 0.0) || !(band_hi > band_lo) || band_hi > span)
        throw std::invalid_argument("oracle_compare: band outside spectrum span");

    const Eigen::ArrayXd model = render_model(spec, pred, total_power, baseline_density);

    OracleComparison cmp;
    cmp.band_lo = band_lo;
    cmp.band_hi = band_hi;
    std::vector<double> freq, dev;
    for (Eigen::Index i = 0; i < spec.freq_offsets.size(); ++i) {
        const double a = std::abs(spec.freq_offsets[i]);
        if (a < band_lo || a > band_hi) continue;
        freq.push_back(spec.freq_offsets[i]);
        dev.push_back((spec.psd[i] - model[i]) / model[i]);
    }
    cmp.n_bins = static_cast<int>(dev.size());
    if (cmp.n_bins == 0) throw std::invalid_argument("oracle_compare: empty band");
    cmp.freq = Eigen::Map<Eigen::ArrayXd>(freq.data(), static_cast<Eigen::Index>(freq.size()));
    cmp.rel_dev = Eigen::Map<Eigen::ArrayXd>(dev.data(), static_cast<Eigen::Index>(dev.size()));
    cmp.rms_rel_dev = std::sqrt(cmp.rel_dev.square().mean());
    cmp.mean_rel_dev = cmp.rel_dev.mean();
    cmp.max_abs_rel_dev = cmp.rel_dev.abs().maxCoeff();
    return cmp;
}

}  // namespace qjspec
