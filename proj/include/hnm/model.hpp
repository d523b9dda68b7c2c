#pragma once

#include "hnm/errors.hpp"
#include "hnm/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hnm {

// Qubit convention: basis index 0 is the excited level |0>, index 1 the
// ground level |1>. sigma_plus = |0><1| raises the excitation.
inline constexpr int kExcited = 0;
inline constexpr int kGround = 1;

/// Physical parameters. Units: field velocity 1, hbar 1.
struct ModelParams {
  double gamma = 1.0;    // decay rate
  double omega0 = 1.0;   // bare excitation energy
  double epsilon0 = 1.0; // dressed excitation energy, drives the dynamics
  double delay = 1.0;    // loop length T

  /// epsilon0 defaults to omega0.
  static ModelParams make(double gamma, double omega0, double delay,
                          std::optional<double> epsilon0 = std::nullopt);

  /// Throws DomainError unless gamma > 0, delay > 0 and all values finite.
  void validate() const;
};

struct CouplingPoint {
  double position = 0.0;
  cplx weight{1.0, 0.0};

  bool operator==(const CouplingPoint&) const = default;
};

/// Delta-comb coupling profile g(x) = sqrt(gamma) * sum_n c_n delta(x - x_n).
class FormFactor {
public:
  FormFactor() = default;
  explicit FormFactor(std::vector<CouplingPoint> points) : points_(std::move(points)) {}

  static FormFactor one_point();
  static FormFactor two_point(double delay);
  /// n equally weighted points spaced by `spacing`.
  static FormFactor uniform_comb(std::size_t n, double spacing);

  const std::vector<CouplingPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  /// Smallest gap between consecutive points; +inf for a single point.
  double min_gap() const;
  /// Distance from the first to the last point.
  double extent() const;

  bool operator==(const FormFactor&) const = default;

private:
  std::vector<CouplingPoint> points_;
};

/// Checks normalization (sum |c_n|^2 = 1 within 1e-9) and spacing
/// (gaps >= T - 1e-12), then shifts positions so the first point is at 0.
FormFactor validate_form_factor(const FormFactor& ff, const ModelParams& params);

/// Qubit density matrix; construction validates Hermiticity, unit trace and
/// positivity.
class QubitState {
public:
  explicit QubitState(const Mat2& rho);

  static QubitState excited();
  static QubitState ground();
  static QubitState pure(const Vec2& psi);

  const Mat2& matrix() const { return rho_; }
  double population(int level) const { return rho_(level, level).real(); }

private:
  Mat2 rho_;
};

/// One outcome of an instrument: a CP trace-non-increasing map in Kraus form.
struct KrausSet {
  std::string label;
  std::vector<Mat2> ops;

  /// sum_i K_i^dagger K_i
  Mat2 effect() const;
  bool is_trace_non_increasing(double tol = 1e-12) const;
};

/// A complete instrument: the outcome maps sum to a trace-preserving map.
struct Instrument {
  std::string name;
  std::vector<KrausSet> outcomes;

  bool is_complete(double tol = 1e-12) const;
  const KrausSet& outcome(const std::string& label) const;
};

namespace ops {
Mat2 identity();
Mat2 sigma_x();
Mat2 sigma_y();
Mat2 sigma_z();
Mat2 sigma_plus();
Mat2 sigma_minus();
Mat2 projector(int level);
} // namespace ops

/// Standard catalogue: identity, the three Pauli unitaries, z-basis
/// measurement and trash-and-prepare |+>.
std::vector<Instrument> pauli_interventions();
const Instrument& find_intervention(const std::string& name);

} // namespace hnm
