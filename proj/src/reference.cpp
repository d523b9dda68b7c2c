#include "hnm/reference.hpp"

#include <cmath>

namespace hnm {

namespace {

void check_args(double gamma, std::span<const double> times) {
  if (!std::isfinite(gamma) || gamma < 0.0) throw DomainError("gamma must be finite and non-negative");
  for (double t : times)
    if (!std::isfinite(t) || t < 0.0) throw DomainError("durations must be finite and non-negative");
}

// 4x4 pattern shared by the one-step matrix and every two-step block:
// [[p, 0, 0, c], [0, q, 0, 0], [0, 0, 0, 0], [c, 0, 0, r]]
Mat4 pattern(double p, double q, double r, double c) {
  Mat4 m = Mat4::Zero();
  m(0, 0) = p;
  m(1, 1) = q;
  m(3, 3) = r;
  m(0, 3) = c;
  m(3, 0) = c;
  return m;
}

MatX one_step(double gamma, double t0, ChoiVariant variant) {
  const double e = std::exp(-gamma * t0);
  const double off = variant == ChoiVariant::Derived ? std::exp(-0.5 * gamma * t0) : e;
  return pattern(e, 1.0 - e, 1.0, off);
}

MatX two_step(double gamma, double t0, double t1) {
  const double e0 = std::exp(-gamma * t0), e1 = std::exp(-gamma * t1);
  const double h0 = std::exp(-0.5 * gamma * t0), h1 = std::exp(-0.5 * gamma * t1);

  // outer blocks indexed by the (S_1, S'_1) pair
  const Mat4 b0000 = pattern(std::exp(-gamma * (t0 + t1)), e1 * (1.0 - e0), e1, std::exp(-gamma * (t1 + 0.5 * t0)));
  const Mat4 b0011 =
      pattern(std::exp(-gamma * (t0 + 0.5 * t1)), h1 * (1.0 - e0), h1, std::exp(-0.5 * gamma * (t0 + t1)));
  const Mat4 b0101 = pattern(e0 * (1.0 - e1), (1.0 - e0) * (1.0 - e1), 1.0 - e1, h0 * (1.0 - e1));
  const Mat4 b1100 = b0011;
  const Mat4 b1111 = pattern(e0, 1.0 - e0, 1.0, h0);

  MatX m = MatX::Zero(16, 16);
  m.block<4, 4>(0, 0) = b0000;
  m.block<4, 4>(0, 12) = b0011;
  m.block<4, 4>(4, 4) = b0101;
  m.block<4, 4>(12, 0) = b1100;
  m.block<4, 4>(12, 12) = b1111;
  return m;
}

} // namespace

KrausSet amplitude_damping_channel(double gamma, double t, double epsilon0) {
  const double times[1] = {t};
  check_args(gamma, times);
  if (!std::isfinite(epsilon0)) throw DomainError("epsilon0 must be finite");
  Mat2 k0 = Mat2::Zero(), k1 = Mat2::Zero();
  k0(kExcited, kExcited) = std::exp(cplx{-0.5 * gamma * t, -epsilon0 * t});
  k0(kGround, kGround) = 1.0;
  k1(kGround, kExcited) = std::sqrt(-std::expm1(-gamma * t));
  return {"amplitude-damping", {k0, k1}};
}

KrausSet compose(const KrausSet& after, const KrausSet& before) {
  KrausSet out{after.label + "*" + before.label, {}};
  for (const auto& b : after.ops)
    for (const auto& a : before.ops) out.ops.push_back(b * a);
  return out;
}

ProcessChoi GoldenChoi::evaluate(double gamma, std::span<const double> durations) const {
  if (durations.size() != steps_)
    throw DimensionError("golden Choi expects " + std::to_string(steps_) + " durations");
  check_args(gamma, durations);
  return ProcessChoi(formula_(gamma, durations), {durations.begin(), durations.end()});
}

GoldenChoi golden_choi_1step(ChoiVariant variant) {
  return GoldenChoi(1, [variant](double gamma, std::span<const double> d) { return one_step(gamma, d[0], variant); });
}

GoldenChoi golden_choi_2step(ChoiVariant) {
  // every printed two-step block already carries the derived off-diagonals
  return GoldenChoi(2, [](double gamma, std::span<const double> d) { return two_step(gamma, d[0], d[1]); });
}

ProcessChoi markovian_choi_1step(double gamma, double t0, ChoiVariant variant) {
  const double d[1] = {t0};
  return golden_choi_1step(variant).evaluate(gamma, d);
}

ProcessChoi markovian_choi_2step(double gamma, double t0, double t1, ChoiVariant variant) {
  const double d[2] = {t0, t1};
  return golden_choi_2step(variant).evaluate(gamma, d);
}

} // namespace hnm
