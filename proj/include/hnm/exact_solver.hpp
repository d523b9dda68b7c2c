#pragma once

// Closed-form single-excitation dynamics of the emitter for delta-comb
// couplings. Substituting the formal photon solution into the emitter
// equation gives the delay differential equation
//
//   a'(t) = rate * a(t) - sum_j w_j a(t - d_j) Theta(t - d_j),
//   rate  = -(i eps0 + gamma / 2),
//   d_j   = x_n - x_m (m < n),  w_j = gamma * conj(c_n) * c_m,
//
// which is integrated exactly, one delay interval at a time, into
// exponential-times-polynomial segments.

#include "hnm/model.hpp"

#include <memory>
#include <span>
#include <vector>

namespace hnm {

struct DelayTerm {
  double delay = 0.0;
  cplx weight{0.0, 0.0};
};

/// Delayed feedback terms of the comb; coincident delays are merged.
std::vector<DelayTerm> delay_terms(const ModelParams& params, const FormFactor& ff);

/// a(t) = exp(rate (t - start)) * sum_k poly[k] (t - start)^k on [start, end].
struct AmplitudeSegment {
  double start = 0.0;
  double end = 0.0;
  std::vector<cplx> poly;

  std::size_t degree() const { return poly.empty() ? 0 : poly.size() - 1; }
  cplx evaluate(double t, cplx rate) const;
};

class PiecewiseAmplitude {
public:
  PiecewiseAmplitude(cplx rate, std::vector<AmplitudeSegment> segments);

  cplx rate() const { return rate_; }
  const std::vector<AmplitudeSegment>& segments() const { return segments_; }
  double t_max() const { return segments_.back().end; }

  /// Evaluates a(t); at a breakpoint the left segment is used.
  cplx operator()(double t) const;
  /// Index of the segment used for t.
  std::size_t segment_index(double t) const;

private:
  cplx rate_;
  std::vector<AmplitudeSegment> segments_;
};

/// Method-of-steps solution on [0, t_max]. Breakpoints are the sums of
/// non-negative integer multiples of the comb delays.
PiecewiseAmplitude amplitude_segments(const ModelParams& params, const FormFactor& ff, double t_max);

/// Emitter amplitude a(t) of exp(-itH)|0, vac>.
cplx amplitude(const ModelParams& params, const FormFactor& ff, double t);

/// |a(t)|^2
double survival_probability(const ModelParams& params, const FormFactor& ff, double t);

/// One translated exponential arc of a photon wavefunction:
/// value(x) = weight * a(anchor - x) for x in [lo, hi].
struct PhotonArc {
  double anchor = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  cplx weight{0.0, 0.0};
};

/// Single-boson wavefunction, either a sum of analytic arcs referencing a
/// shared piecewise amplitude, or samples on a uniform grid.
class PhotonWavefunction {
public:
  enum class Representation { Analytic, Grid };

  PhotonWavefunction(std::shared_ptr<const PiecewiseAmplitude> amp, std::vector<PhotonArc> arcs);
  PhotonWavefunction(std::vector<double> x, std::vector<cplx> samples, double dx);

  Representation representation() const { return repr_; }
  const std::vector<PhotonArc>& arcs() const { return arcs_; }
  const std::shared_ptr<const PiecewiseAmplitude>& amplitude() const { return amp_; }
  const std::vector<double>& grid() const { return x_; }
  const std::vector<cplx>& samples() const { return samples_; }
  double spacing() const { return dx_; }

  /// Value at x (analytic form), or the nearest grid sample (grid form).
  cplx operator()(double x) const;

  /// ||xi||^2: closed-form integration for arcs, Riemann sum on a grid.
  double norm_squared() const;

  /// Rigid translation x -> x + shift (free propagation for a time `shift`).
  PhotonWavefunction translated(double shift) const;

  /// Samples the analytic form at x0 + (i + 1/2) dx, i = 0..n-1.
  PhotonWavefunction sampled(double x0, double dx, std::size_t n) const;

private:
  Representation repr_;
  std::shared_ptr<const PiecewiseAmplitude> amp_;
  std::vector<PhotonArc> arcs_;
  std::vector<double> x_;
  std::vector<cplx> samples_;
  double dx_ = 0.0;
};

/// <f|g> = integral conj(f(x)) g(x) dx, exact for analytic arcs.
cplx inner_product(const PhotonWavefunction& f, const PhotonWavefunction& g);

/// xi_t(x) = -i sqrt(gamma) sum_n c_n a(t - (x - x_n)) 1_[x_n, x_n + t](x).
PhotonWavefunction photon_wavefunction(const ModelParams& params, const FormFactor& ff, double t);
/// Same wavefunction built on an existing amplitude (t <= amp.t_max()).
PhotonWavefunction photon_wavefunction(const ModelParams& params, const FormFactor& ff,
                                       std::shared_ptr<const PiecewiseAmplitude> amp, double t);
cplx photon_wavefunction(const ModelParams& params, const FormFactor& ff, double t, double x);
std::vector<cplx> photon_wavefunction(const ModelParams& params, const FormFactor& ff, double t,
                                      std::span<const double> xs);

/// Reduced qubit channel rho -> tr_B[U (rho (x) |vac><vac|) U^dagger] at time t
/// (lab frame), as Kraus pair diag(a(t), 1) and ||xi_t|| |1><0|.
KrausSet reduced_channel(const ModelParams& params, const FormFactor& ff, double t);

} // namespace hnm
