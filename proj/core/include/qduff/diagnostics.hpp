#pragma once

// Chaos diagnostics: strobed Poincare sections, Hann-windowed periodograms
// with spline smoothing, the low-frequency-rise chaos metric, interwell and
// tunneling event detection, and the per-beta transition report.

#include <string>
#include <vector>

#include "qduff/qsd.hpp"

namespace qduff {

struct PoincareSection {
    std::vector<std::pair<double, double>> points;         // physical (<Q>, <P>)
    std::vector<std::pair<double, double>> scaled_points;  // (beta <Q>, beta <P>)
    std::vector<std::size_t> periods;
    double beta = 0.0;
    double strobe_period = 0.0;

    std::size_t count() const { return points.size(); }
    /// RMS dispersion of the scaled points about their centroid.
    double scaled_rms_dispersion() const;
};

PoincareSection strobe_section(const TrajectoryRecord& record, std::size_t transient_skip);

/// Classical counterpart: build a section from a strobe-only classical
/// trajectory (coordinates already in classical units; scaled == raw).
PoincareSection classical_section(const std::vector<std::pair<double, double>>& strobed,
                                  std::size_t transient_skip);

struct PowerSpectrum {
    std::vector<double> omega;     // angular frequency grid, (0, pi/dt]
    std::vector<double> s_raw;     // one-sided periodogram
    std::vector<double> s_smooth;  // spline-smoothed (empty until spline_smooth)
    double sample_interval = 0.0;
    std::string window = "hann";
};

/// Hann-windowed one-sided periodogram with window-weighted mean removal,
/// normalized so that sum(S * d_omega) equals the windowed series variance.
PowerSpectrum periodogram(const std::vector<double>& series, double sample_interval);

/// Least-squares cubic B-spline fit of log S over log-spaced knots, evaluated
/// back on the original grid.
void spline_smooth(PowerSpectrum& spectrum, std::size_t knot_count = 24);

/// R = mean log S over (0, low_edge * Omega] minus mean log S over
/// [band_lo, band_hi] * Omega. Uses s_smooth when present, s_raw otherwise.
/// The default reference band sits in the valley above the chaotic hopping
/// plateau (telegraph widths stay below ~0.5 Omega) and below the drive line.
double low_freq_rise(const PowerSpectrum& spectrum, double drive_omega,
                     double low_edge = 0.1, double band_lo = 0.5, double band_hi = 0.8);

struct InterwellEvent {
    double t;
    int direction;  // +1 crossing upward, -1 downward
    double energy;  // <H_D> interpolated at the zero crossing
    bool below_barrier;
};

struct EventList {
    std::vector<InterwellEvent> events;
};

/// Hysteresis detector on s(t) = beta <Q>(t): an event fires when s moves
/// from beyond +h to beyond -h (or the reverse).
EventList interwell_events(const TrajectoryRecord& record, double threshold_fraction = 0.5);

/// Same detector over raw (t, q_scaled, energy) triples (classical runs).
EventList interwell_events_series(const std::vector<double>& t, const std::vector<double>& s,
                                  const std::vector<double>& energy,
                                  double threshold_fraction = 0.5);

EventList tunneling_events(const EventList& events);

enum class TransitionVerdict { MonotoneDecreasing, NonMonotone, Inconclusive };

std::string to_string(TransitionVerdict v);

struct BetaSummary {
    double beta;
    double rise;  // R
    std::size_t interwell_count;
    std::size_t tunneling_count;
    double section_rms;
};

struct TransitionReport {
    std::vector<BetaSummary> rows;  // sorted by beta
    TransitionVerdict verdict;
};

/// Orders the summaries by beta and classifies the R sequence. Differences
/// must exceed rise_threshold to count as ordered.
TransitionReport transition_report(std::vector<BetaSummary> per_beta,
                                   double rise_threshold = 1.0);

}  // namespace qduff
