#include "hnm/exact_solver.hpp"

#include <algorithm>
#include <cmath>

namespace hnm {

namespace {

/// integral_0^len exp(kappa y) y^m dy as a series with no cancellation for Re(kappa) >= 0.
cplx exp_moment(cplx kappa, double len, std::size_t m) {
  const cplx z = kappa * len;
  cplx sum{0.0, 0.0};
  cplx power{1.0, 0.0}; // z^n / n!
  for (std::size_t n = 0; n < 2000; ++n) {
    const cplx term = power / static_cast<double>(n + m + 1);
    sum += term;
    if (static_cast<double>(n) > std::abs(z) && std::abs(term) <= 1e-18 * std::abs(sum)) break;
    power *= z / static_cast<double>(n + 1);
  }
  return std::pow(len, static_cast<double>(m + 1)) * sum;
}

/// Coefficients r_m of r(y) = p(base - y).
std::vector<cplx> reflect_shift(const std::vector<cplx>& p, double base) {
  std::vector<cplx> r(p.size(), cplx{0.0, 0.0});
  for (std::size_t k = 0; k < p.size(); ++k) {
    double binom = 1.0; // C(k, m)
    for (std::size_t m = 0; m <= k; ++m) {
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      r[m] += p[k] * binom * std::pow(base, static_cast<double>(k - m)) * sign;
      binom = binom * static_cast<double>(k - m) / static_cast<double>(m + 1);
    }
  }
  return r;
}

cplx arc_value(const PiecewiseAmplitude& amp, const PhotonArc& arc, double x) {
  if (x < arc.lo || x > arc.hi) return {0.0, 0.0};
  return arc.weight * amp(std::clamp(arc.anchor - x, 0.0, amp.t_max()));
}

cplx arc_overlap(const PiecewiseAmplitude& fa, const PhotonArc& f, const PiecewiseAmplitude& ga, const PhotonArc& g) {
  const double lo = std::max(f.lo, g.lo), hi = std::min(f.hi, g.hi);
  if (!(hi > lo)) return {0.0, 0.0};

  std::vector<double> cuts{lo, hi};
  for (const auto& s : fa.segments())
    for (double tau : {s.start, s.end})
      if (const double x = f.anchor - tau; x > lo && x < hi) cuts.push_back(x);
  for (const auto& s : ga.segments())
    for (double tau : {s.start, s.end})
      if (const double x = g.anchor - tau; x > lo && x < hi) cuts.push_back(x);
  std::sort(cuts.begin(), cuts.end());

  const cplx kappa = -(std::conj(fa.rate()) + ga.rate());
  // keep exp(Re(kappa) * len) representable
  const double max_chunk = kappa.real() > 0.0 ? 50.0 / kappa.real() : hi - lo;

  cplx total{0.0, 0.0};
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double x_begin = cuts[c], x_end = cuts[c + 1];
    if (!(x_end > x_begin)) continue;
    const double mid = 0.5 * (x_begin + x_end);
    const auto& sf = fa.segments()[fa.segment_index(f.anchor - mid)];
    const auto& sg = ga.segments()[ga.segment_index(g.anchor - mid)];

    const auto n_chunks = static_cast<std::size_t>(std::ceil((x_end - x_begin) / max_chunk));
    const double step = (x_end - x_begin) / static_cast<double>(std::max<std::size_t>(n_chunks, 1));
    for (std::size_t q = 0; q < std::max<std::size_t>(n_chunks, 1); ++q) {
      const double x0 = x_begin + static_cast<double>(q) * step;
      const double len = (q + 1 == std::max<std::size_t>(n_chunks, 1)) ? x_end - x0 : step;
      // arc(x0 + y) = w exp(rate (B - y)) P(B - y)
      const double bf = f.anchor - x0 - sf.start;
      const double bg = g.anchor - x0 - sg.start;
      const auto rf = reflect_shift(sf.poly, bf);
      const auto rg = reflect_shift(sg.poly, bg);
      const cplx prefactor =
          std::conj(f.weight) * g.weight * std::exp(std::conj(fa.rate()) * bf + ga.rate() * bg);
      cplx integral{0.0, 0.0};
      for (std::size_t i = 0; i < rf.size(); ++i)
        for (std::size_t j = 0; j < rg.size(); ++j)
          integral += std::conj(rf[i]) * rg[j] * exp_moment(kappa, len, i + j);
      total += prefactor * integral;
    }
  }
  return total;
}

} // namespace

PhotonWavefunction::PhotonWavefunction(std::shared_ptr<const PiecewiseAmplitude> amp, std::vector<PhotonArc> arcs)
    : repr_(Representation::Analytic), amp_(std::move(amp)), arcs_(std::move(arcs)) {
  if (!amp_) throw DomainError("analytic photon wavefunction needs an amplitude");
}

PhotonWavefunction::PhotonWavefunction(std::vector<double> x, std::vector<cplx> samples, double dx)
    : repr_(Representation::Grid), x_(std::move(x)), samples_(std::move(samples)), dx_(dx) {
  if (x_.size() != samples_.size()) throw DimensionError("grid positions and samples differ in length");
  if (!(dx_ > 0.0)) throw DomainError("grid spacing must be positive");
}

cplx PhotonWavefunction::operator()(double x) const {
  if (repr_ == Representation::Analytic) {
    cplx v{0.0, 0.0};
    for (const auto& arc : arcs_) v += arc_value(*amp_, arc, x);
    return v;
  }
  if (x_.empty()) return {0.0, 0.0};
  const double idx = std::round((x - x_.front()) / dx_);
  if (idx < 0.0 || idx >= static_cast<double>(x_.size())) return {0.0, 0.0};
  const auto i = static_cast<std::size_t>(idx);
  return std::abs(x_[i] - x) <= 0.5 * dx_ ? samples_[i] : cplx{0.0, 0.0};
}

double PhotonWavefunction::norm_squared() const {
  if (repr_ == Representation::Grid) {
    double s = 0.0;
    for (const auto& v : samples_) s += std::norm(v);
    return s * dx_;
  }
  return inner_product(*this, *this).real();
}

PhotonWavefunction PhotonWavefunction::translated(double shift) const {
  if (repr_ == Representation::Grid) {
    auto x = x_;
    for (auto& v : x) v += shift;
    return PhotonWavefunction(std::move(x), samples_, dx_);
  }
  auto arcs = arcs_;
  for (auto& a : arcs) {
    a.anchor += shift;
    a.lo += shift;
    a.hi += shift;
  }
  return PhotonWavefunction(amp_, std::move(arcs));
}

PhotonWavefunction PhotonWavefunction::sampled(double x0, double dx, std::size_t n) const {
  std::vector<double> xs(n);
  std::vector<cplx> vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x0 + (static_cast<double>(i) + 0.5) * dx;
    vals[i] = (*this)(xs[i]);
  }
  return PhotonWavefunction(std::move(xs), std::move(vals), dx);
}

cplx inner_product(const PhotonWavefunction& f, const PhotonWavefunction& g) {
  using R = PhotonWavefunction::Representation;
  if (f.representation() == R::Analytic && g.representation() == R::Analytic) {
    cplx total{0.0, 0.0};
    for (const auto& a : f.arcs())
      for (const auto& b : g.arcs()) total += arc_overlap(*f.amplitude(), a, *g.amplitude(), b);
    return total;
  }
  const PhotonWavefunction& grid = f.representation() == R::Grid ? f : g;
  cplx total{0.0, 0.0};
  for (std::size_t i = 0; i < grid.grid().size(); ++i) {
    const double x = grid.grid()[i];
    total += std::conj(f(x)) * g(x);
  }
  return total * grid.spacing();
}

PhotonWavefunction photon_wavefunction(const ModelParams& params, const FormFactor& ff,
                                       std::shared_ptr<const PiecewiseAmplitude> amp, double t) {
  if (!(t >= 0.0)) throw DomainError("photon wavefunction requires t >= 0");
  const FormFactor canonical = validate_form_factor(ff, params);
  const cplx prefactor = cplx{0.0, -1.0} * std::sqrt(params.gamma);
  std::vector<PhotonArc> arcs;
  if (t > 0.0)
    for (const auto& p : canonical.points())
      arcs.push_back({t + p.position, p.position, p.position + t, prefactor * p.weight});
  return PhotonWavefunction(std::move(amp), std::move(arcs));
}

PhotonWavefunction photon_wavefunction(const ModelParams& params, const FormFactor& ff, double t) {
  if (!(t >= 0.0)) throw DomainError("photon wavefunction requires t >= 0");
  auto amp = std::make_shared<const PiecewiseAmplitude>(amplitude_segments(params, ff, t));
  return photon_wavefunction(params, ff, std::move(amp), t);
}

cplx photon_wavefunction(const ModelParams& params, const FormFactor& ff, double t, double x) {
  return photon_wavefunction(params, ff, t)(x);
}

std::vector<cplx> photon_wavefunction(const ModelParams& params, const FormFactor& ff, double t,
                                      std::span<const double> xs) {
  const auto xi = photon_wavefunction(params, ff, t);
  std::vector<cplx> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(xi(x));
  return out;
}

} // namespace hnm
