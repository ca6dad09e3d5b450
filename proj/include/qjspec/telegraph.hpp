#pragma once

#include <cstdint>
#include <vector>

namespace qjspec {

enum class GateState { Bright, Dark };

inline GateState flipped(GateState s) {
    return s == GateState::Bright ? GateState::Dark : GateState::Bright;
}

// Mean bright / dark dwell times of the two-state gate, in seconds.
struct TelegraphParams {
    double tau_bright = 0.0;
    double tau_dark = 0.0;

    void validate() const;
    // stationary bright probability tau_B / (tau_B + tau_D)
    double duty_cycle() const { return tau_bright / (tau_bright + tau_dark); }
    // dwell rate sum 1/tau_B + 1/tau_D
    double gamma() const { return 1.0 / tau_bright + 1.0 / tau_dark; }
};

// One realization of the gate over [0, duration]. The state changes at each
// switch time; occupancy is right-continuous (the new state holds exactly at
// the switch instant).
struct JumpTrajectory {
    double duration = 0.0;
    GateState initial_state = GateState::Bright;
    std::vector<double> switch_times;  // strictly increasing, in (0, duration)

    GateState state_after_switches(std::size_t n_switches) const {
        return (n_switches % 2 == 0) ? initial_state : flipped(initial_state);
    }
    GateState final_state() const { return state_after_switches(switch_times.size()); }
    void validate() const;
};

// Closed-form spectrum summary for a gated monochromatic emitter:
// a resolution-limited line of weight p^2 over a Lorentzian pedestal of
// weight p(1-p) and FWHM gamma/pi.
struct SpectralPrediction {
    double delta_L = 0.0;         // pedestal FWHM, Hz
    double A_L = 0.0;             // pedestal/peak height ratio at delta_R
    double delta_R = 0.0;         // resolution bandwidth assumed, Hz
    double p = 0.0;               // duty cycle
    double line_weight = 0.0;     // p^2
    double pedestal_weight = 0.0; // p(1-p)
    double gamma = 0.0;           // 1/tau_B + 1/tau_D, 1/s
    // set when delta_R > delta_L/10, i.e. the height-ratio formula is used
    // outside its delta_R << delta_L validity range
    bool resolution_flag = false;
};

// Dark-time vs repump-power model: 1/tau_D(P) = 1/tau_spont + k * P.
struct RepumpRateModel {
    double tau_spont = 0.053;   // spontaneous deshelving floor, s
    double k_deshelve = 0.0;    // induced deshelving rate per applied mW, 1/(s mW)
};

struct RateModelFit {
    RepumpRateModel model;
    std::size_t downweighted_points = 0;  // calibration points above the spontaneous floor
};

enum class InitialState { Bright, Dark, Stationary };

// Draws alternating exponential dwells. `Stationary` picks the initial state
// bright with probability p so the record is stationary from t = 0.
// Identical (params, duration, seed, initial) give the identical trajectory.
JumpTrajectory sample_trajectory(const TelegraphParams& params, double duration,
                                 std::uint64_t seed,
                                 InitialState initial = InitialState::Stationary);

// Gate state at time t in [0, duration].
GateState occupancy(const JumpTrajectory& traj, double t);

// Lebesgue measure of {t in [t0, t1] : gate bright}, computed exactly from
// the switch times.
double bright_time(const JumpTrajectory& traj, double t0, double t1);

// Realized bright fraction over the whole record.
double bright_fraction(const JumpTrajectory& traj);

SpectralPrediction predict_pedestal(const TelegraphParams& params, double delta_R);

// Stationary gate autocorrelation C(tau) = p^2 + p(1-p) exp(-gamma |tau|).
double autocorrelation(const TelegraphParams& params, double lag);

// One-sided PSD of the gated carrier on the offset axis:
//   P * [p^2 L(nu; delta_R) + p(1-p) L(nu; delta_L)]
// with L the unit-area Lorentzian of the given FWHM. The line term renders
// the monochromatic component at the resolution bandwidth.
double analytic_psd(const TelegraphParams& params, double delta_R, double total_power,
                    double nu_offset);

struct RateCalibrationPoint {
    double power_mw = 0.0;
    double tau_dark = 0.0;
};

// Least squares for k in rate space (rates add; dwell times do not):
// y_i = 1/tau_i - 1/tau_spont regressed on P_i through the origin.
// Points with tau_dark above the spontaneous floor are inconsistent with the
// model and enter with weight 0.1.
RateModelFit calibrate_rate_model(const std::vector<RateCalibrationPoint>& points,
                                  double tau_spont = 0.053);

double tau_dark_of_power(const RepumpRateModel& model, double power_mw);

}  // namespace qjspec
