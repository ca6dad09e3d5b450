#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "qjspec/jumpstats.hpp"
#include "qjspec/photon.hpp"
#include "qjspec/spectral.hpp"
#include "qjspec/telegraph.hpp"

namespace qjspec::io {

// locale-independent formatting, 15 significant digits
std::string fmt_g15(double x);

// --- trajectory text record: "duration initial_state" header, one switch
// time per line ---------------------------------------------------------
void write_trajectory(std::ostream& os, const JumpTrajectory& traj);
void write_trajectory(const std::filesystem::path& path, const JumpTrajectory& traj);
JumpTrajectory read_trajectory(std::istream& is, const std::string& name = "<stream>");
JumpTrajectory read_trajectory(const std::filesystem::path& path);

// --- two-column CSV traces with a '#' parameter header ------------------
void write_counts_csv(const std::filesystem::path& path, const CountTrace& trace);
CountTrace read_counts_csv(const std::filesystem::path& path);
void write_intensity_csv(const std::filesystem::path& path, const IntensityTrace& trace);
IntensityTrace read_intensity_csv(const std::filesystem::path& path);

// --- sampled signal: 16-byte header (8-byte magic, 8-byte LE double
// sample rate) followed by 8-byte LE doubles ------------------------------
void write_signal(const std::filesystem::path& path, const SampledSignal& signal);
SampledSignal read_signal(const std::filesystem::path& path);
void write_signal_csv(const std::filesystem::path& path, const SampledSignal& signal);
SampledSignal read_signal_csv(const std::filesystem::path& path);

// --- complex baseband record (extension format) -------------------------
void write_baseband(const std::filesystem::path& path, const BasebandSignal& signal);
BasebandSignal read_baseband(const std::filesystem::path& path);

// --- spectrum CSV (offset_Hz, psd) ---------------------------------------
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& spec);
Spectrum read_spectrum_csv(const std::filesystem::path& path);

// --- period list / histogram CSV -----------------------------------------
void write_periods_csv(const std::filesystem::path& path, const PeriodList& periods);
void write_histogram_csv(const std::filesystem::path& path, const DurationHistogram& hist);

// --- JSON views -----------------------------------------------------------
nlohmann::json to_json(const SpectralPrediction& pred);
nlohmann::json to_json(const PedestalFit& fit);
nlohmann::json to_json(const JumpStatsResult& stats);
nlohmann::json to_json(const OracleComparison& cmp);

// --- digests ---------------------------------------------------------------
std::uint64_t fnv1a64(const void* data, std::size_t n);
std::string digest_hex(const std::filesystem::path& path);

}  // namespace qjspec::io
