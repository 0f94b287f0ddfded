#include "qduff/diagnostics.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace qduff {

double PoincareSection::scaled_rms_dispersion() const {
    if (scaled_points.empty()) return 0.0;
    double mq = 0.0, mp = 0.0;
    for (const auto& [q, p] : scaled_points) {
        mq += q;
        mp += p;
    }
    mq /= static_cast<double>(scaled_points.size());
    mp /= static_cast<double>(scaled_points.size());
    double ss = 0.0;
    for (const auto& [q, p] : scaled_points) ss += (q - mq) * (q - mq) + (p - mp) * (p - mp);
    return std::sqrt(ss / static_cast<double>(scaled_points.size()));
}

PoincareSection strobe_section(const TrajectoryRecord& record, std::size_t transient_skip) {
    PoincareSection sec;
    sec.beta = record.params.beta;
    sec.strobe_period = record.period;
    for (const auto& s : record.strobes) {
        if (s.period <= transient_skip) continue;  // strobe 0 is the initial state
        sec.periods.push_back(s.period);
        sec.points.emplace_back(s.q_exp, s.p_exp);
        sec.scaled_points.emplace_back(sec.beta * s.q_exp, sec.beta * s.p_exp);
    }
    if (sec.points.size() < 50)
        throw Error("strobe_section: only " + std::to_string(sec.points.size()) +
                    " post-transient points (need >= 50)");
    return sec;
}

PoincareSection classical_section(const std::vector<std::pair<double, double>>& strobed,
                                  std::size_t transient_skip) {
    PoincareSection sec;
    sec.beta = 1.0;
    for (std::size_t i = 0; i < strobed.size(); ++i) {
        if (i < transient_skip) continue;
        sec.periods.push_back(i);
        sec.points.push_back(strobed[i]);
        sec.scaled_points.push_back(strobed[i]);
    }
    if (sec.points.size() < 50) throw Error("classical_section: fewer than 50 points");
    return sec;
}

namespace {
std::mutex fftw_plan_mutex;
}

PowerSpectrum periodogram(const std::vector<double>& series, double sample_interval) {
    const std::size_t n = series.size();
    if (n < 128) throw Error("periodogram: series length must be >= 128");
    if (!(sample_interval > 0.0)) throw Error("periodogram: sample interval must be positive");

    // Window-weighted mean removal zeroes the DC bin exactly, so the
    // one-sided sum over k >= 1 satisfies Parseval with no dropped power.
    std::vector<double> w(n);
    double wsum = 0.0, wxsum = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        w[m] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(m) /
                                     static_cast<double>(n - 1)));
        wsum += w[m];
        wxsum += w[m] * series[m];
    }
    const double mean = wxsum / wsum;

    std::vector<double> y(n);
    for (std::size_t m = 0; m < n; ++m) y[m] = (series[m] - mean) * w[m];

    const std::size_t nbins = n / 2;  // k = 1 .. n/2 (n even), 1 .. (n-1)/2 (odd)
    std::vector<std::complex<double>> spec(n / 2 + 1);
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex);
        fftw_plan plan = fftw_plan_dft_r2c_1d(
            static_cast<int>(n), y.data(), reinterpret_cast<fftw_complex*>(spec.data()),
            FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }

    PowerSpectrum ps;
    ps.sample_interval = sample_interval;
    const double d_omega = 2.0 * std::numbers::pi / (static_cast<double>(n) * sample_interval);
    const double nn = static_cast<double>(n) * static_cast<double>(n);
    for (std::size_t k = 1; k <= nbins; ++k) {
        const bool nyquist = (n % 2 == 0) && (k == n / 2);
        const double fold = nyquist ? 1.0 : 2.0;
        ps.omega.push_back(static_cast<double>(k) * d_omega);
        ps.s_raw.push_back(fold * std::norm(spec[k]) / (nn * d_omega));
    }
    return ps;
}

namespace {

// Cox-de Boor cubic B-spline basis on a clamped knot vector.
double bspline_basis(const std::vector<double>& knots, std::size_t i, int degree, double x) {
    if (degree == 0)
        return (x >= knots[i] && x < knots[i + 1]) ? 1.0 : 0.0;
    double left = 0.0, right = 0.0;
    const double dl = knots[i + degree] - knots[i];
    if (dl > 0.0) left = (x - knots[i]) / dl * bspline_basis(knots, i, degree - 1, x);
    const double dr = knots[i + degree + 1] - knots[i + 1];
    if (dr > 0.0)
        right = (knots[i + degree + 1] - x) / dr * bspline_basis(knots, i + 1, degree - 1, x);
    return left + right;
}

}  // namespace

void spline_smooth(PowerSpectrum& spectrum, std::size_t knot_count) {
    if (knot_count < 4) throw Error("spline_smooth: knot_count must be >= 4");
    const std::size_t n = spectrum.omega.size();
    if (n < 4) throw Error("spline_smooth: degenerate grid");
    const double lo = spectrum.omega.front();
    const double hi = spectrum.omega.back();
    if (!(hi > lo)) throw Error("spline_smooth: degenerate grid");

    knot_count = std::min(knot_count, n);

    // Fit log S on log omega over log-spaced interior knots.
    const double llo = std::log(lo);
    const double lhi = std::log(hi);
    std::vector<double> knots;
    for (int r = 0; r < 4; ++r) knots.push_back(llo);
    for (std::size_t i = 1; i + 1 < knot_count; ++i)
        knots.push_back(llo + (lhi - llo) * static_cast<double>(i) /
                                  static_cast<double>(knot_count - 1));
    for (int r = 0; r < 4; ++r) knots.push_back(lhi + 1e-12 * std::max(1.0, std::abs(lhi)));
    const std::size_t nbasis = knots.size() - 4;

    const double floor_val = 1e-300;
    Eigen::MatrixXd basis(n, static_cast<Eigen::Index>(nbasis));
    Eigen::VectorXd target(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double x = std::log(spectrum.omega[m]);
        for (std::size_t j = 0; j < nbasis; ++j)
            basis(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) =
                bspline_basis(knots, j, 3, x);
        target(static_cast<Eigen::Index>(m)) = std::log(std::max(spectrum.s_raw[m], floor_val));
    }
    const Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(target);
    const Eigen::VectorXd fitted = basis * coef;
    spectrum.s_smooth.resize(n);
    for (std::size_t m = 0; m < n; ++m)
        spectrum.s_smooth[m] = std::exp(fitted(static_cast<Eigen::Index>(m)));
}

double low_freq_rise(const PowerSpectrum& spectrum, double drive_omega,
                     double low_edge, double band_lo, double band_hi) {
    const auto& s = spectrum.s_smooth.empty() ? spectrum.s_raw : spectrum.s_smooth;
    // The grid must reach into the reference band; the exact band_hi edge may
    // fall just past the last bin (odd-length series stop short of Nyquist).
    if (spectrum.omega.empty() || spectrum.omega.back() < band_lo * drive_omega - 1e-12)
        throw Error("low_freq_rise: spectrum does not cover the reference band");
    double low_sum = 0.0, high_sum = 0.0;
    std::size_t low_n = 0, high_n = 0;
    for (std::size_t k = 0; k < spectrum.omega.size(); ++k) {
        const double w = spectrum.omega[k];
        const double lv = std::log(std::max(s[k], 1e-300));
        if (w <= low_edge * drive_omega) {
            low_sum += lv;
            ++low_n;
        } else if (w >= band_lo * drive_omega && w <= band_hi * drive_omega) {
            high_sum += lv;
            ++high_n;
        }
    }
    if (low_n < 2 || high_n < 2)
        throw Error("low_freq_rise: insufficient low-frequency resolution "
                    "(need a series of at least ~200 periods)");
    return low_sum / static_cast<double>(low_n) - high_sum / static_cast<double>(high_n);
}

EventList interwell_events_series(const std::vector<double>& t, const std::vector<double>& s,
                                  const std::vector<double>& energy,
                                  double threshold_fraction) {
    if (t.size() != s.size() || t.size() != energy.size())
        throw Error("interwell_events: mismatched series lengths");
    const double h = threshold_fraction;
    EventList out;
    int armed = 0;  // side last committed to: +1, -1, or 0 before first commitment
    std::size_t armed_idx = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const int side = s[i] > h ? +1 : (s[i] < -h ? -1 : 0);
        if (side == 0) continue;
        if (armed != 0 && side != armed) {
            // Crossing happened between armed_idx and i; interpolate the
            // zero crossing of s within the bracketing sample pair.
            std::size_t j = armed_idx;
            for (std::size_t m = armed_idx; m + 1 <= i && m + 1 < s.size(); ++m) {
                if ((s[m] > 0.0) != (s[m + 1] > 0.0)) {
                    j = m;
                    break;
                }
                j = m;
            }
            const double s0 = s[j];
            const double s1 = s[std::min(j + 1, s.size() - 1)];
            double frac = 0.0;
            if (s1 != s0) frac = std::clamp(s0 / (s0 - s1), 0.0, 1.0);
            const double tc = t[j] + frac * (t[std::min(j + 1, s.size() - 1)] - t[j]);
            const double ec =
                energy[j] + frac * (energy[std::min(j + 1, s.size() - 1)] - energy[j]);
            out.events.push_back({tc, side, ec, ec < 0.0});
        }
        armed = side;
        armed_idx = i;
    }
    return out;
}

EventList interwell_events(const TrajectoryRecord& record, double threshold_fraction) {
    std::vector<double> t, s, e;
    t.reserve(record.fine.size());
    for (const auto& f : record.fine) {
        t.push_back(f.t);
        s.push_back(record.params.beta * f.q_exp);
        e.push_back(f.energy);
    }
    return interwell_events_series(t, s, e, threshold_fraction);
}

EventList tunneling_events(const EventList& events) {
    EventList out;
    for (const auto& e : events.events)
        if (e.below_barrier) out.events.push_back(e);
    return out;
}

std::string to_string(TransitionVerdict v) {
    switch (v) {
        case TransitionVerdict::MonotoneDecreasing: return "MONOTONE_DECREASING";
        case TransitionVerdict::NonMonotone: return "NON_MONOTONE";
        case TransitionVerdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

TransitionReport transition_report(std::vector<BetaSummary> per_beta, double rise_threshold) {
    if (per_beta.size() < 2) throw Error("transition_report: need at least 2 beta values");
    std::sort(per_beta.begin(), per_beta.end(),
              [](const BetaSummary& a, const BetaSummary& b) { return a.beta < b.beta; });
    TransitionReport rep;
    rep.rows = per_beta;

    const double r_first = per_beta.front().rise;
    const double r_last = per_beta.back().rise;
    double interior_max = -1e300;
    for (std::size_t i = 1; i + 1 < per_beta.size(); ++i)
        interior_max = std::max(interior_max, per_beta[i].rise);

    const bool has_interior = per_beta.size() > 2;
    if (has_interior && interior_max > std::max(r_first, r_last) + rise_threshold) {
        rep.verdict = TransitionVerdict::NonMonotone;
    } else if (r_first - r_last > rise_threshold &&
               (!has_interior || interior_max <= r_first + rise_threshold)) {
        rep.verdict = TransitionVerdict::MonotoneDecreasing;
    } else {
        rep.verdict = TransitionVerdict::Inconclusive;
    }
    return rep;
}

}  // namespace qduff
