#include "hnm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hnm {

ModelParams ModelParams::make(double gamma, double omega0, double delay, std::optional<double> epsilon0) {
  ModelParams p;
  p.gamma = gamma;
  p.omega0 = omega0;
  p.epsilon0 = epsilon0.value_or(omega0);
  p.delay = delay;
  p.validate();
  return p;
}

void ModelParams::validate() const {
  if (!std::isfinite(gamma) || gamma <= 0.0) throw DomainError("gamma must be positive and finite");
  if (!std::isfinite(delay) || delay <= 0.0) throw DomainError("delay T must be positive and finite");
  if (!std::isfinite(omega0)) throw DomainError("omega0 must be finite");
  if (!std::isfinite(epsilon0)) throw DomainError("epsilon0 must be finite");
}

FormFactor FormFactor::one_point() { return FormFactor({{0.0, cplx{1.0, 0.0}}}); }

FormFactor FormFactor::two_point(double delay) { return uniform_comb(2, delay); }

FormFactor FormFactor::uniform_comb(std::size_t n, double spacing) {
  std::vector<CouplingPoint> pts;
  const double w = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) pts.push_back({static_cast<double>(i) * spacing, cplx{w, 0.0}});
  return FormFactor(std::move(pts));
}

double FormFactor::min_gap() const {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < points_.size(); ++i)
    gap = std::min(gap, points_[i].position - points_[i - 1].position);
  return gap;
}

double FormFactor::extent() const {
  if (points_.empty()) return 0.0;
  return points_.back().position - points_.front().position;
}

FormFactor validate_form_factor(const FormFactor& ff, const ModelParams& params) {
  if (ff.empty()) throw EmptyError("form factor has no points");
  double norm = 0.0;
  for (const auto& p : ff.points()) {
    if (!std::isfinite(p.position) || !std::isfinite(p.weight.real()) || !std::isfinite(p.weight.imag()))
      throw DomainError("form factor entries must be finite");
    norm += std::norm(p.weight);
  }
  if (std::abs(norm - 1.0) > 1e-9)
    throw NormalizationError("sum |c_n|^2 = " + std::to_string(norm) + ", expected 1");

  const auto& pts = ff.points();
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double gap = pts[i].position - pts[i - 1].position;
    if (gap < params.delay - 1e-12)
      throw SpacingError("gap " + std::to_string(gap) + " between points " + std::to_string(i - 1) + " and " +
                         std::to_string(i) + " is below T = " + std::to_string(params.delay));
  }

  std::vector<CouplingPoint> shifted = pts;
  const double origin = pts.front().position;
  for (auto& p : shifted) p.position -= origin;
  return FormFactor(std::move(shifted));
}

// --- qubit states --------------------------------------------------------

QubitState::QubitState(const Mat2& rho) : rho_(rho) {
  if (!is_hermitian(rho_, 1e-12)) throw DomainError("density matrix is not Hermitian");
  if (std::abs(rho_.trace() - cplx{1.0, 0.0}) > 1e-12) throw DomainError("density matrix trace is not 1");
  if (min_eigenvalue(rho_) < -1e-12) throw DomainError("density matrix is not positive semidefinite");
}

QubitState QubitState::excited() { return QubitState(ops::projector(kExcited)); }
QubitState QubitState::ground() { return QubitState(ops::projector(kGround)); }

QubitState QubitState::pure(const Vec2& psi) {
  const Vec2 v = psi.normalized();
  return QubitState(v * v.adjoint());
}

// --- Kraus sets and instruments ------------------------------------------

Mat2 KrausSet::effect() const {
  Mat2 e = Mat2::Zero();
  for (const auto& k : ops) e += k.adjoint() * k;
  return e;
}

bool KrausSet::is_trace_non_increasing(double tol) const {
  return min_eigenvalue(Mat2(Mat2::Identity() - effect())) >= -tol;
}

bool Instrument::is_complete(double tol) const {
  Mat2 total = Mat2::Zero();
  for (const auto& o : outcomes) {
    if (!o.is_trace_non_increasing(tol)) return false;
    total += o.effect();
  }
  return (total - Mat2::Identity()).cwiseAbs().maxCoeff() <= tol;
}

const KrausSet& Instrument::outcome(const std::string& label) const {
  for (const auto& o : outcomes)
    if (o.label == label) return o;
  throw ConfigError("instrument '" + name + "' has no outcome '" + label + "'");
}

namespace ops {
Mat2 identity() { return Mat2::Identity(); }

Mat2 sigma_x() {
  Mat2 m;
  m << 0, 1, 1, 0;
  return m;
}

Mat2 sigma_y() {
  Mat2 m;
  m << 0, cplx{0, -1}, cplx{0, 1}, 0;
  return m;
}

Mat2 sigma_z() {
  Mat2 m;
  m << 1, 0, 0, -1;
  return m;
}

Mat2 sigma_plus() {
  Mat2 m = Mat2::Zero();
  m(kExcited, kGround) = 1.0;
  return m;
}

Mat2 sigma_minus() { return sigma_plus().adjoint(); }

Mat2 projector(int level) {
  Mat2 m = Mat2::Zero();
  m(level, level) = 1.0;
  return m;
}
} // namespace ops

std::vector<Instrument> pauli_interventions() {
  std::vector<Instrument> out;
  out.push_back({"identity", {{"id", {ops::identity()}}}});
  out.push_back({"x", {{"x", {ops::sigma_x()}}}});
  out.push_back({"y", {{"y", {ops::sigma_y()}}}});
  out.push_back({"z", {{"z", {ops::sigma_z()}}}});
  out.push_back({"measure-z",
                 {{"excited", {ops::projector(kExcited)}}, {"ground", {ops::projector(kGround)}}}});

  // trash the input and prepare |+>
  Vec2 plus;
  plus << 1.0, 1.0;
  plus /= std::sqrt(2.0);
  Vec2 e0 = Vec2::Zero(), e1 = Vec2::Zero();
  e0(kExcited) = 1.0;
  e1(kGround) = 1.0;
  out.push_back({"trash-prepare-plus", {{"prepare", {Mat2(plus * e0.adjoint()), Mat2(plus * e1.adjoint())}}}});
  return out;
}

const Instrument& find_intervention(const std::string& name) {
  static const std::vector<Instrument> catalogue = pauli_interventions();
  for (const auto& inst : catalogue)
    if (inst.name == name) return inst;
  throw ConfigError("unknown intervention '" + name + "'");
}

} // namespace hnm
