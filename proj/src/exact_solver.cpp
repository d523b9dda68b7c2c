#include "hnm/exact_solver.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hnm {

namespace {

constexpr double kBreakTol = 1e-12;

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

/// Coefficients of q(h) = p(h + shift).
std::vector<cplx> taylor_shift(const std::vector<cplx>& p, double shift) {
  std::vector<cplx> q(p.size(), cplx{0.0, 0.0});
  for (std::size_t k = 0; k < p.size(); ++k) {
    double pow = 1.0;
    for (std::size_t m = k + 1; m-- > 0;) {
      // contribution of p_k * C(k, m) * shift^(k - m) to q_m, m = k..0
      q[m] += p[k] * binomial(k, m) * pow;
      pow *= shift;
    }
  }
  return q;
}

std::vector<double> breakpoints(const std::vector<DelayTerm>& terms, double t_max) {
  std::set<double> found{0.0};
  std::vector<double> frontier{0.0};
  auto known = [&](double v) {
    auto it = found.lower_bound(v - kBreakTol);
    return it != found.end() && *it <= v + kBreakTol;
  };
  while (!frontier.empty()) {
    std::vector<double> next;
    for (double b : frontier)
      for (const auto& term : terms) {
        const double nb = b + term.delay;
        if (nb >= t_max - kBreakTol || known(nb)) continue;
        found.insert(nb);
        next.push_back(nb);
      }
    frontier = std::move(next);
  }
  return {found.begin(), found.end()};
}

} // namespace

std::vector<DelayTerm> delay_terms(const ModelParams& params, const FormFactor& ff) {
  const auto& pts = ff.points();
  std::vector<DelayTerm> terms;
  for (std::size_t n = 0; n < pts.size(); ++n)
    for (std::size_t m = 0; m < n; ++m) {
      const double d = pts[n].position - pts[m].position;
      const cplx w = params.gamma * std::conj(pts[n].weight) * pts[m].weight;
      auto it = std::find_if(terms.begin(), terms.end(),
                             [&](const DelayTerm& t) { return std::abs(t.delay - d) <= kBreakTol; });
      if (it == terms.end())
        terms.push_back({d, w});
      else
        it->weight += w;
    }
  std::sort(terms.begin(), terms.end(), [](const DelayTerm& a, const DelayTerm& b) { return a.delay < b.delay; });
  return terms;
}

cplx AmplitudeSegment::evaluate(double t, cplx rate) const {
  const double h = t - start;
  cplx acc{0.0, 0.0};
  for (std::size_t k = poly.size(); k-- > 0;) acc = acc * h + poly[k];
  return std::exp(rate * h) * acc;
}

PiecewiseAmplitude::PiecewiseAmplitude(cplx rate, std::vector<AmplitudeSegment> segments)
    : rate_(rate), segments_(std::move(segments)) {
  if (segments_.empty()) throw DomainError("piecewise amplitude needs at least one segment");
}

std::size_t PiecewiseAmplitude::segment_index(double t) const {
  if (t < -kBreakTol) throw DomainError("amplitude requested at negative time");
  if (t > t_max() + kBreakTol * std::max(1.0, t_max()))
    throw DomainError("amplitude requested beyond the constructed range");
  auto it = std::lower_bound(segments_.begin(), segments_.end(), t,
                             [](const AmplitudeSegment& s, double v) { return s.end < v; });
  if (it == segments_.end()) --it;
  return static_cast<std::size_t>(it - segments_.begin());
}

cplx PiecewiseAmplitude::operator()(double t) const {
  return segments_[segment_index(t)].evaluate(std::max(t, 0.0), rate_);
}

PiecewiseAmplitude amplitude_segments(const ModelParams& params, const FormFactor& raw_ff, double t_max) {
  params.validate();
  if (!(t_max >= 0.0)) throw DomainError("t_max must be non-negative");
  const FormFactor ff = validate_form_factor(raw_ff, params);
  const cplx rate{-0.5 * params.gamma, -params.epsilon0};
  const auto terms = delay_terms(params, ff);

  std::vector<double> bounds = breakpoints(terms, t_max);
  bounds.push_back(t_max);

  std::vector<AmplitudeSegment> segs;
  if (t_max == 0.0) {
    segs.push_back({0.0, 0.0, {cplx{1.0, 0.0}}});
    return PiecewiseAmplitude(rate, std::move(segs));
  }

  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double start = bounds[i], end = bounds[i + 1];
    const cplx initial = segs.empty() ? cplx{1.0, 0.0} : segs.back().evaluate(start, rate);

    // Q'(h) = -sum_j w_j exp(rate delta_j) P_src(h + delta_j), Q(0) = a(start)
    std::vector<cplx> deriv;
    for (const auto& term : terms) {
      if (start < term.delay - kBreakTol) continue;
      const double src_mid = 0.5 * (start + end) - term.delay;
      const auto src = std::lower_bound(segs.begin(), segs.end(), src_mid,
                                        [](const AmplitudeSegment& s, double v) { return s.end < v; });
      const double delta = start - term.delay - src->start;
      const auto shifted = taylor_shift(src->poly, delta);
      const cplx factor = -term.weight * std::exp(rate * delta);
      if (deriv.size() < shifted.size()) deriv.resize(shifted.size(), cplx{0.0, 0.0});
      for (std::size_t m = 0; m < shifted.size(); ++m) deriv[m] += factor * shifted[m];
    }

    std::vector<cplx> poly(deriv.size() + 1, cplx{0.0, 0.0});
    poly[0] = initial;
    for (std::size_t m = 0; m < deriv.size(); ++m) poly[m + 1] = deriv[m] / static_cast<double>(m + 1);
    segs.push_back({start, end, std::move(poly)});
  }
  return PiecewiseAmplitude(rate, std::move(segs));
}

cplx amplitude(const ModelParams& params, const FormFactor& ff, double t) {
  if (!(t >= 0.0)) throw DomainError("amplitude requires t >= 0");
  return amplitude_segments(params, ff, t)(t);
}

double survival_probability(const ModelParams& params, const FormFactor& ff, double t) {
  return std::norm(amplitude(params, ff, t));
}

KrausSet reduced_channel(const ModelParams& params, const FormFactor& ff, double t) {
  if (!(t >= 0.0)) throw DomainError("reduced channel requires t >= 0");
  const auto amp = std::make_shared<const PiecewiseAmplitude>(amplitude_segments(params, ff, t));
  const double photon_norm = photon_wavefunction(params, ff, amp, t).norm_squared();

  Mat2 k0 = Mat2::Zero(), k1 = Mat2::Zero();
  k0(kExcited, kExcited) = (*amp)(t);
  k0(kGround, kGround) = 1.0;
  k1(kGround, kExcited) = std::sqrt(std::max(photon_norm, 0.0));
  return {"reduced", {k0, k1}};
}

} // namespace hnm
