#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qtraj/errors.hpp"
#include "qtraj/pilot.hpp"
#include "qtraj/trajectory.hpp"
#include "qtraj/wavefield.hpp"

namespace qtraj {

// ---------------------------------------------------------------------------
// histograms
// ---------------------------------------------------------------------------

struct Histogram {
  double lo = 0.0, width = 1.0;
  std::vector<double> counts;
  double total = 0.0;

  std::optional<std::size_t> bin_of(double x) const {
    if (width <= 0.0 || x < lo) return std::nullopt;
    const auto b = static_cast<std::size_t>((x - lo) / width);
    if (b >= counts.size()) return std::nullopt;
    return b;
  }

  void add(double x, double w = 1.0) {
    if (auto b = bin_of(x)) {
      counts[*b] += w;
      total += w;
    }
  }

  double center(std::size_t b) const { return lo + (static_cast<double>(b) + 0.5) * width; }
};

// Freedman-Diaconis bin width, 2 IQR n^(-1/3)
inline double freedman_diaconis_width(std::vector<double> samples) {
  if (samples.size() < 4) throw ConfigError("freedman_diaconis_width: too few samples");
  std::sort(samples.begin(), samples.end());
  const auto q = [&](double f) {
    const double pos = f * static_cast<double>(samples.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double t = pos - static_cast<double>(i);
    return (i + 1 < samples.size()) ? (1.0 - t) * samples[i] + t * samples[i + 1] : samples[i];
  };
  const double iqr = q(0.75) - q(0.25);
  if (!(iqr > 0.0)) throw ConfigError("freedman_diaconis_width: degenerate sample spread");
  return 2.0 * iqr / std::cbrt(static_cast<double>(samples.size()));
}

inline Histogram make_histogram(std::span<const double> xs, double width) {
  Histogram h;
  h.width = width;
  const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  h.lo = *mn;
  const std::size_t nbins = static_cast<std::size_t>((*mx - *mn) / width) + 1;
  h.counts.assign(nbins, 0.0);
  for (double x : xs) h.add(x);
  return h;
}

// density |psi|^2 marginalised onto one axis (sums to 1 when multiplied by h)
inline std::vector<double> density_marginal(const WaveField& f, std::size_t axis) {
  const Grid& g = *f.grid;
  std::vector<double> out(g.dim(axis), 0.0);
  std::array<std::size_t, 4> idx{};
  double vol_other = g.cell_volume() / g.step(axis);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    g.unflatten(flat, std::span<std::size_t>(idx.data(), g.ndim()));
    out[idx[axis]] += std::norm(f.values[flat]) * vol_other;
  }
  return out;
}

// L1 distance between a sample histogram (as probabilities) and the marginal
// integrated over each bin (piecewise-linear density between nodes). Density
// mass outside the histogram range counts toward the distance as well.
inline double l1_histogram_vs_marginal(const Histogram& h, const Grid& g, std::size_t axis,
                                       std::span<const double> marginal) {
  const auto& xs = g.axis_coords(axis);
  const std::size_t n = xs.size();
  // cumulative trapezoid integral of the marginal at the nodes
  std::vector<double> cum(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    cum[i] = cum[i - 1] + 0.5 * (marginal[i - 1] + marginal[i]) * (xs[i] - xs[i - 1]);
  const double total_mass = cum[n - 1];
  auto cum_at = [&](double x) {
    if (x <= xs.front()) return 0.0;
    if (x >= xs.back()) return total_mass;
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(std::distance(xs.begin(), it));
    const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    const double rho = (1.0 - t) * marginal[i - 1] + t * marginal[i];
    return cum[i - 1] + 0.5 * (marginal[i - 1] + rho) * (x - xs[i - 1]);
  };
  double l1 = 0.0, inside = 0.0;
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    const double e0 = h.lo + static_cast<double>(b) * h.width;
    const double p = cum_at(e0 + h.width) - cum_at(e0);
    inside += p;
    l1 += std::abs(p - (h.total > 0 ? h.counts[b] / h.total : 0.0));
  }
  l1 += total_mass - inside;  // density mass the histogram cannot see
  return l1;
}

// ---------------------------------------------------------------------------
// detector plane
// ---------------------------------------------------------------------------

// Accumulated screen-crossing record on a plane normal to the beam axis.
// Both signals are kept: trajectory first crossings and the time-integrated
// probability flux through the plane.
struct DetectorRecord {
  std::size_t beam_axis = 0;
  std::size_t transverse_axis = 1;
  double plane = 0.0;         // detector position along beam axis
  double slit_plane = 0.0;    // scattering plane the angles are measured from
  double pattern_center = 0.0;
  double lo = 0.0, width = 1.0;
  std::vector<double> crossings;
  std::vector<double> flux;
  std::size_t crossing_count = 0;

  std::size_t nbins() const { return crossings.size(); }
  double center(std::size_t b) const { return lo + (static_cast<double>(b) + 0.5) * width; }
  bool empty() const { return crossing_count == 0; }

  double angle_deg(double transverse) const {
    const double L = std::abs(plane - slit_plane);
    return std::atan2(std::abs(transverse - pattern_center), L) * 180.0 / std::numbers::pi;
  }
};

inline DetectorRecord make_detector(const Grid& g, std::size_t beam_axis,
                                    std::size_t transverse_axis, double plane,
                                    std::size_t nbins, double slit_plane,
                                    double pattern_center = 0.0) {
  if (beam_axis >= g.ndim() || transverse_axis >= g.ndim() || beam_axis == transverse_axis)
    throw ConfigError("detector: bad axes");
  if (!(plane >= g.origin(beam_axis) &&
        plane <= g.origin(beam_axis) + g.length(beam_axis)))
    throw ConfigError("detector: plane outside box");
  if (nbins < 4) throw ConfigError("detector: need at least 4 bins");
  DetectorRecord r;
  r.beam_axis = beam_axis;
  r.transverse_axis = transverse_axis;
  r.plane = plane;
  r.slit_plane = slit_plane;
  r.pattern_center = pattern_center;
  r.lo = g.origin(transverse_axis);
  r.width = g.length(transverse_axis) / static_cast<double>(nbins);
  r.crossings.assign(nbins, 0.0);
  r.flux.assign(nbins, 0.0);
  return r;
}

// Bins the first plane crossing of every trajectory (linear interpolation of
// the transverse coordinate between the bracketing steps).
inline void accumulate_crossings(DetectorRecord& r, const TrajectoryBundle& b) {
  std::vector<double> qa(b.ndim), qb(b.ndim);
  for (std::size_t t = 0; t < b.count(); ++t) {
    const std::size_t last =
        std::min(b.terminated_at[t] == kNever ? b.steps() - 1 : b.terminated_at[t],
                 b.steps() - 1);
    for (std::size_t s = 0; s + 1 <= last; ++s) {
      b.position_at(t, s, qa);
      b.position_at(t, s + 1, qb);
      const double da = qa[r.beam_axis] - r.plane;
      const double db = qb[r.beam_axis] - r.plane;
      if (da == 0.0 || (da < 0.0) != (db < 0.0)) {
        const double f = (da == db) ? 0.0 : da / (da - db);
        const double y =
            qa[r.transverse_axis] + f * (qb[r.transverse_axis] - qa[r.transverse_axis]);
        const auto bin = static_cast<long long>(std::floor((y - r.lo) / r.width));
        if (bin >= 0 && bin < static_cast<long long>(r.nbins())) {
          r.crossings[static_cast<std::size_t>(bin)] += 1.0;
          ++r.crossing_count;
        }
        break;
      }
    }
  }
}

// Adds one step's worth of probability flux through the plane,
// j = A^2 v_beam interpolated onto the plane, signed toward `beam_sign`.
inline void accumulate_flux(DetectorRecord& r, const PilotField& p, double dt,
                            double beam_sign) {
  const Grid& g = *p.grid;
  std::array<double, 4> q{};
  for (std::size_t a = 0; a < g.ndim(); ++a) q[a] = g.axis_coords(a).front();
  q[r.beam_axis] = r.plane;
  const auto& ys = g.axis_coords(r.transverse_axis);
  for (std::size_t j = 0; j < ys.size(); ++j) {
    q[r.transverse_axis] = ys[j];
    const std::span<const double> pt(q.data(), g.ndim());
    const double amp = sample_grid<double>(g, p.amplitude, pt);
    const double v = sample_grid<double>(g, p.velocity[r.beam_axis], pt);
    const double jflux = amp * amp * v * beam_sign;
    const auto bin = static_cast<long long>(std::floor((ys[j] - r.lo) / r.width));
    if (bin >= 0 && bin < static_cast<long long>(r.nbins()))
      r.flux[static_cast<std::size_t>(bin)] += jflux * dt * g.step(r.transverse_axis);
  }
}

// ---------------------------------------------------------------------------
// fringe analysis
// ---------------------------------------------------------------------------

struct FringePeak {
  double position = 0.0;   // transverse coordinate of the maximum bin
  double angle_deg = 0.0;  // geometric angle from the slit plane
  double height = 0.0;
  double mass = 0.0;  // signal integrated over the lobe
  bool central = false;
};

struct FringeReport {
  std::vector<FringePeak> peaks;
  double band_lo_deg = 0.0, band_hi_deg = 0.0;
  double first_peak_angle_deg = std::nan("");
  bool first_peak_in_band = false;
  bool first_peak_within_5deg_of_30 = false;
  double central_mass = 0.0, first_order_mass = 0.0;
  std::string notes;
};

// Local-maximum peak extraction above a prominence threshold (fraction of the
// global maximum), lobe masses delimited by the minima between peaks.
inline FringeReport fringe_analysis(const DetectorRecord& r, double lambda,
                                    std::span<const double> d_candidates,
                                    bool use_flux = false, double prominence = 0.05) {
  const std::vector<double>& s = use_flux ? r.flux : r.crossings;
  FringeReport rep;
  double smax = 0.0;
  for (double v : s) smax = std::max(smax, v);
  if (smax <= 0.0) {
    rep.notes = "empty detector record: no signal to analyse";
    return rep;
  }
  if (!d_candidates.empty()) {
    double dmin = d_candidates[0], dmax = d_candidates[0];
    for (double d : d_candidates) {
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    const auto arcsin_deg = [](double x) {
      return std::asin(std::clamp(x, -1.0, 1.0)) * 180.0 / std::numbers::pi;
    };
    rep.band_lo_deg = arcsin_deg(lambda / dmax);
    rep.band_hi_deg = arcsin_deg(lambda / dmin);
  }
  const std::size_t n = s.size();
  std::vector<std::size_t> maxima;
  for (std::size_t i = 0; i < n; ++i) {
    const double left = (i > 0) ? s[i - 1] : -1.0;
    const double right = (i + 1 < n) ? s[i + 1] : -1.0;
    if (s[i] >= prominence * smax && s[i] > left && s[i] >= right) maxima.push_back(i);
  }
  if (maxima.empty()) {
    rep.notes = "no peaks above prominence threshold";
    return rep;
  }
  // lobe boundaries: minima between consecutive maxima
  std::vector<std::size_t> bounds{0};
  for (std::size_t m = 0; m + 1 < maxima.size(); ++m) {
    std::size_t lo = maxima[m], hi = maxima[m + 1], arg = lo;
    double best = s[lo];
    for (std::size_t i = lo; i <= hi; ++i)
      if (s[i] < best) {
        best = s[i];
        arg = i;
      }
    bounds.push_back(arg);
  }
  bounds.push_back(n);

  // the central lobe is the one whose peak sits closest to the pattern centre
  std::size_t central_idx = 0;
  double central_dist = std::numeric_limits<double>::max();
  for (std::size_t m = 0; m < maxima.size(); ++m) {
    const double d = std::abs(r.center(maxima[m]) - r.pattern_center);
    if (d < central_dist) {
      central_dist = d;
      central_idx = m;
    }
  }
  for (std::size_t m = 0; m < maxima.size(); ++m) {
    FringePeak p;
    p.position = r.center(maxima[m]);
    p.angle_deg = r.angle_deg(p.position);
    p.height = s[maxima[m]];
    for (std::size_t i = bounds[m]; i < bounds[m + 1]; ++i) p.mass += s[i];
    p.central = (m == central_idx);
    rep.peaks.push_back(p);
  }
  rep.central_mass = rep.peaks[central_idx].mass;

  // first-order peak: nearest non-central maximum
  double best = std::numeric_limits<double>::max();
  for (std::size_t m = 0; m < maxima.size(); ++m) {
    if (m == central_idx) continue;
    const double d = std::abs(rep.peaks[m].position - r.pattern_center);
    if (d < best) {
      best = d;
      rep.first_peak_angle_deg = rep.peaks[m].angle_deg;
      rep.first_order_mass = rep.peaks[m].mass;
    }
  }
  if (std::isfinite(rep.first_peak_angle_deg)) {
    rep.first_peak_in_band = rep.first_peak_angle_deg >= rep.band_lo_deg &&
                             rep.first_peak_angle_deg <= rep.band_hi_deg;
    rep.first_peak_within_5deg_of_30 = std::abs(rep.first_peak_angle_deg - 30.0) <= 5.0;
  } else {
    rep.notes = "single central peak only; no first-order maximum found";
  }
  return rep;
}

}  // namespace qtraj
