#include "qjspec/telegraph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qjspec/mathutil.hpp"
#include "qjspec/rng.hpp"

namespace qjspec {

void TelegraphParams::validate() const {
    if (!(tau_bright > 0.0) || !std::isfinite(tau_bright))
        throw std::invalid_argument("telegraph: tau_bright must be positive and finite");
    if (!(tau_dark > 0.0) || !std::isfinite(tau_dark))
        throw std::invalid_argument("telegraph: tau_dark must be positive and finite");
}

void JumpTrajectory::validate() const {
    if (!(duration >= 0.0)) throw std::invalid_argument("trajectory: negative duration");
    double prev = 0.0;
    for (double t : switch_times) {
        if (!(t > prev) || !(t < duration))
            throw std::invalid_argument(
                "trajectory: switch times must be strictly increasing within (0, duration)");
        prev = t;
    }
}

JumpTrajectory sample_trajectory(const TelegraphParams& params, double duration,
                                 std::uint64_t seed, InitialState initial) {
    params.validate();
    if (!(duration >= 0.0) || !std::isfinite(duration))
        throw std::invalid_argument("sample_trajectory: duration must be >= 0 and finite");

    Rng rng(seed);
    JumpTrajectory traj;
    traj.duration = duration;
    switch (initial) {
        case InitialState::Bright: traj.initial_state = GateState::Bright; break;
        case InitialState::Dark: traj.initial_state = GateState::Dark; break;
        case InitialState::Stationary:
            traj.initial_state = rng.uniform() < params.duty_cycle() ? GateState::Bright
                                                                     : GateState::Dark;
            break;
    }

    GateState state = traj.initial_state;
    double t = 0.0;
    for (;;) {
        const double mean =
            state == GateState::Bright ? params.tau_bright : params.tau_dark;
        t += rng.exponential(mean);
        if (t >= duration) break;
        traj.switch_times.push_back(t);
        state = flipped(state);
    }
    return traj;
}

GateState occupancy(const JumpTrajectory& traj, double t) {
    if (!(t >= 0.0) || !(t <= traj.duration))
        throw std::invalid_argument("occupancy: t outside [0, duration]");
    // switches at exactly t count: state changes take effect at the switch instant
    const auto n = std::upper_bound(traj.switch_times.begin(), traj.switch_times.end(), t) -
                   traj.switch_times.begin();
    return traj.state_after_switches(static_cast<std::size_t>(n));
}

double bright_time(const JumpTrajectory& traj, double t0, double t1) {
    if (!(t0 >= 0.0) || !(t1 <= traj.duration) || !(t0 <= t1))
        throw std::invalid_argument("bright_time: window outside trajectory");
    const auto& sw = traj.switch_times;
    auto it = std::upper_bound(sw.begin(), sw.end(), t0);
    GateState state = traj.state_after_switches(static_cast<std::size_t>(it - sw.begin()));
    double acc = 0.0;
    double cursor = t0;
    for (; it != sw.end() && *it < t1; ++it) {
        if (state == GateState::Bright) acc += *it - cursor;
        cursor = *it;
        state = flipped(state);
    }
    if (state == GateState::Bright) acc += t1 - cursor;
    return acc;
}

double bright_fraction(const JumpTrajectory& traj) {
    if (traj.duration <= 0.0) return traj.initial_state == GateState::Bright ? 1.0 : 0.0;
    return bright_time(traj, 0.0, traj.duration) / traj.duration;
}

SpectralPrediction predict_pedestal(const TelegraphParams& params, double delta_R) {
    params.validate();
    if (!(delta_R > 0.0) || !std::isfinite(delta_R))
        throw std::invalid_argument("predict_pedestal: delta_R must be positive");

    SpectralPrediction out;
    out.gamma = params.gamma();
    out.delta_L = out.gamma / M_PI;
    out.p = params.duty_cycle();
    out.line_weight = out.p * out.p;
    out.pedestal_weight = out.p - out.line_weight;  // sums to p exactly
    out.delta_R = delta_R;
    out.A_L = M_PI * delta_R * params.tau_dark * params.tau_dark /
              (params.tau_bright + params.tau_dark);
    out.resolution_flag = delta_R > out.delta_L / 10.0;
    return out;
}

double autocorrelation(const TelegraphParams& params, double lag) {
    params.validate();
    const double p = params.duty_cycle();
    return p * p + p * (1.0 - p) * std::exp(-params.gamma() * std::abs(lag));
}

double analytic_psd(const TelegraphParams& params, double delta_R, double total_power,
                    double nu_offset) {
    if (!(total_power > 0.0))
        throw std::invalid_argument("analytic_psd: total_power must be positive");
    const SpectralPrediction pred = predict_pedestal(params, delta_R);
    return total_power * (pred.line_weight * lorentzian_unit_area(nu_offset, delta_R) +
                          pred.pedestal_weight * lorentzian_unit_area(nu_offset, pred.delta_L));
}

RateModelFit calibrate_rate_model(const std::vector<RateCalibrationPoint>& points,
                                  double tau_spont) {
    if (points.empty())
        throw std::invalid_argument("calibrate_rate_model: no calibration points");
    if (!(tau_spont > 0.0))
        throw std::invalid_argument("calibrate_rate_model: tau_spont must be positive");

    RateModelFit fit;
    fit.model.tau_spont = tau_spont;
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& pt : points) {
        if (!(pt.power_mw >= 0.0))
            throw std::invalid_argument("calibrate_rate_model: negative power");
        if (!(pt.tau_dark > 0.0))
            throw std::invalid_argument("calibrate_rate_model: nonpositive tau_dark");
        const double y = 1.0 / pt.tau_dark - 1.0 / tau_spont;
        double w = 1.0;
        if (pt.tau_dark > tau_spont) {
            // above the spontaneous floor: inconsistent with the rate model
            w = 0.1;
            ++fit.downweighted_points;
        }
        sxy += w * pt.power_mw * y;
        sxx += w * pt.power_mw * pt.power_mw;
    }
    fit.model.k_deshelve = sxx > 0.0 ? std::max(0.0, sxy / sxx) : 0.0;
    return fit;
}

double tau_dark_of_power(const RepumpRateModel& model, double power_mw) {
    if (!(power_mw >= 0.0))
        throw std::invalid_argument("tau_dark_of_power: negative power");
    return 1.0 / (1.0 / model.tau_spont + model.k_deshelve * power_mw);
}

}  // namespace qjspec
