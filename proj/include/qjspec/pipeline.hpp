#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qjspec/heterodyne.hpp"
#include "qjspec/jumpstats.hpp"
#include "qjspec/photon.hpp"
#include "qjspec/spectral.hpp"
#include "qjspec/telegraph.hpp"

namespace qjspec {

inline constexpr const char* VERSION = "0.1.0";

// Spectral analysis settings. The defaults decimate the 2^18 Hz record by
// 368 so that 1024-sample hann segments give a resolution bandwidth of
// 1.0006 Hz with the carrier alias-protected over +-300 Hz.
struct AnalysisConfig {
    int decim_factor = 368;
    double passband = 300.0;  // Hz, alias-protected half width
    WelchConfig welch;
    double lp_time_constant = 1e-3;    // intensity-path filter, s
    double fit_t_min = 0.005;          // dwell-fit truncation, s
    int ks_bootstrap = 200;            // replicates for the dwell GOF test
    Eigen::Index conditional_segment = 256;  // segment length for bright-only spectra
    double min_bright_factor = 5.0;          // min_bright = factor * tau_bright
};

struct RunConfig {
    double tau_bright = 0.171;             // s
    std::optional<double> tau_dark;        // s; exactly one of these two
    std::optional<double> repump_power_mw; // mW, mapped through the rate model
    RepumpRateModel rate_model;            // defaults calibrated in resolve()
    bool rate_model_explicit = false;

    DetectionParams detection;
    HeterodyneParams heterodyne;
    AnalysisConfig analysis;
    ThresholdConfig threshold;

    double duration = 60.0;  // s
    std::uint64_t master_seed = 1;
    std::filesystem::path out_dir = "qjspec-out";
    bool write_beat = true;
    bool write_baseband = true;

    // resolved telegraph parameters; throws unless exactly one of
    // tau_dark / repump_power_mw is set
    TelegraphParams resolve_params() const;
    void validate() const;
};

nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

// Default dark-time model: rate fit through the bundled repump calibration
// endpoints (2 mW -> 8 ms, 0.2 mW -> 40 ms).
RepumpRateModel default_rate_model();

struct SimulationResult {
    TelegraphParams params;
    JumpTrajectory trajectory;
    CountTrace counts;
    IntensityTrace intensity;
    BasebandSignal baseband;
    nlohmann::json manifest;
};

// Stage seeds derive from the master seed and the stage name.
std::uint64_t stage_seed(const RunConfig& cfg, std::string_view stage);

// predict -> simulate: samples the trajectory, synthesizes counts and the
// beat (streamed through the decimator; the full-rate record is written to
// disk, never held in memory), writes stage files + manifest.json.
SimulationResult run_simulate(const RunConfig& cfg);

struct AnalysisResult {
    SpectralPrediction prediction;
    Spectrum spectrum;
    PedestalFit fit;
    JumpStatsResult jump_stats;
    OracleComparison oracle;
    std::vector<std::pair<std::string, bool>> checks;
    bool all_pass = false;
};

// Fig. 3/4-style analysis of simulated outputs: PSD + pedestal fit, dwell
// statistics, oracle comparison, pass/fail against the closed-form
// prediction. Works on an in-memory SimulationResult...
AnalysisResult run_analyze(const RunConfig& cfg, const SimulationResult& sim,
                           const std::filesystem::path* write_dir = nullptr);
// ...or on a manifest directory produced by run_simulate.
AnalysisResult run_analyze_dir(const std::filesystem::path& dir);

// acceptance tolerances: fractional errors against the closed-form values
namespace accept {
inline constexpr double DELTA_L_TOL = 0.15;
inline constexpr double A_L_TOL = 0.20;
inline constexpr double WEIGHT_RATIO_TOL = 0.20;
inline constexpr double NOJUMP_WEIGHT_FRACTION = 0.20;
inline constexpr double BRIGHT_ONLY_SUPPRESSION = 10.0;
inline constexpr double RATE_MODEL_TOL = 0.25;
inline constexpr double SNR_DB_TOL = 1.0;
inline constexpr double PARSEVAL_TOL = 0.01;
inline constexpr double PSD_INTEGRAL_TOL = 1e-6;
inline constexpr double RUNTIME_BUDGET_S = 600.0;
inline constexpr double FIG3_KS_LEVEL = 0.05;
inline constexpr double FIG3_KS_ACCEPT_FRACTION = 0.90;
inline constexpr int FIG3_REPS = 50;
}  // namespace accept

struct CheckRow {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyOptions {
    double duration = 600.0;     // record length for the spectral suites, s
    std::uint64_t seed = 2020;
    bool reuse_allowed = true;
};

// bundled reference settings: (tau_bright, tau_dark) in seconds
inline constexpr std::array<std::pair<double, double>, 3> FIG4_SETTINGS = {
    {{0.103, 0.008}, {0.171, 0.021}, {0.160, 0.039}}};

struct Fig4Artifacts {
    TelegraphParams params;
    JumpTrajectory trajectory;
    BasebandSignal baseband;
    Spectrum spectrum;
    SpectralPrediction prediction;
    PedestalFit fit;
    double total_power = 0.0;      // ungated carrier power A^2/2
    double noise_density = 0.0;
    double elapsed_s = 0.0;
};

// One spectral run at the given jump statistics (600 s by default),
// synthesized in streaming chunks and analyzed at the default 1 Hz RBW.
Fig4Artifacts run_reference_case(const TelegraphParams& params, double duration,
                                 std::uint64_t seed);

std::vector<CheckRow> verify_fig4(const VerifyOptions& opts,
                                  std::vector<Fig4Artifacts>* keep = nullptr);
std::vector<CheckRow> verify_no_jump(const VerifyOptions& opts);
std::vector<CheckRow> verify_fig3(const VerifyOptions& opts);
std::vector<CheckRow> verify_oracle(const VerifyOptions& opts,
                                    const Fig4Artifacts* reuse = nullptr);
std::vector<CheckRow> verify_bright_only(const VerifyOptions& opts,
                                         const Fig4Artifacts* reuse = nullptr);
std::vector<CheckRow> verify_rate_model(const VerifyOptions& opts);
std::vector<CheckRow> verify_properties(const VerifyOptions& opts);

// named suite dispatch ("fig4", "fig3", "no-jump", "oracle", "bright-only",
// "rate-model", "properties", "all"); throws on unknown names
std::vector<CheckRow> run_verify_suite(const std::string& name, const VerifyOptions& opts);
std::vector<std::string> verify_suite_names();

}  // namespace qjspec
