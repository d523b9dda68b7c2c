#pragma once

// Test-only oracle: classical RK4 for the emitter delay equation on a uniform
// grid of step h. Delays must be multiples of h; the delayed value at a
// half step comes from cubic Hermite interpolation of the stored history.
// A delayed term is switched on for the whole step once the step start has
// reached the delay, so no stage straddles a kink.

#include "hnm/model.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {

using hnm::cplx;

class DdeRk4 {
public:
  DdeRk4(const hnm::ModelParams& p, const hnm::FormFactor& ff, double h, double t_end) : h_(h) {
    rate_ = cplx{-0.5 * p.gamma, -p.epsilon0};
    const auto& pts = ff.points();
    for (std::size_t n = 0; n < pts.size(); ++n)
      for (std::size_t m = 0; m < n; ++m) {
        const double d = pts[n].position - pts[m].position;
        const double steps = std::round(d / h);
        if (std::abs(steps * h - d) > 1e-9 * d) throw std::invalid_argument("delay is not a multiple of h");
        lag_.push_back(static_cast<long>(steps));
        weight_.push_back(p.gamma * std::conj(pts[n].weight) * pts[m].weight);
      }
    const auto n_steps = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
    a_.reserve(n_steps + 1);
    a_.push_back(1.0);
    da_left_.push_back(rhs(0, 0.0, a_[0]));
    da_right_.push_back(da_left_[0]);
    for (std::size_t i = 0; i < n_steps; ++i) step(i);
  }

  double h() const { return h_; }
  std::size_t size() const { return a_.size(); }
  cplx at_step(std::size_t i) const { return a_.at(i); }

  /// Cubic Hermite value at arbitrary t inside the grid.
  cplx operator()(double t) const {
    if (t <= 0.0) return a_.front();
    const double s = t / h_;
    auto i = static_cast<std::size_t>(std::floor(s));
    if (i + 1 >= a_.size()) {
      if (std::abs(s - static_cast<double>(a_.size() - 1)) < 1e-9) return a_.back();
      throw std::out_of_range("oracle evaluated beyond its grid");
    }
    return hermite(i, s - static_cast<double>(i));
  }

private:
  cplx hermite(std::size_t i, double u) const {
    const double h00 = 2 * u * u * u - 3 * u * u + 1, h10 = u * u * u - 2 * u * u + u;
    const double h01 = -2 * u * u * u + 3 * u * u, h11 = u * u * u - u * u;
    return h00 * a_[i] + h10 * h_ * da_right_[i] + h01 * a_[i + 1] + h11 * h_ * da_left_[i + 1];
  }

  // history value at grid index i plus a fraction u of a step
  cplx history(long i, double u) const {
    if (u == 0.0) return a_[static_cast<std::size_t>(i)];
    return hermite(static_cast<std::size_t>(i), u);
  }

  // right-hand side at t = (i + u) h for the terms active in step i
  cplx rhs(std::size_t i, double u, cplx a) const {
    cplx out = rate_ * a;
    for (std::size_t j = 0; j < lag_.size(); ++j) {
      const long src = static_cast<long>(i) - lag_[j];
      if (src < 0) continue;
      out -= weight_[j] * history(src, u);
    }
    return out;
  }

  void step(std::size_t i) {
    const cplx y = a_[i];
    const cplx k1 = rhs(i, 0.0, y);
    const cplx k2 = rhs(i, 0.5, y + 0.5 * h_ * k1);
    const cplx k3 = rhs(i, 0.5, y + 0.5 * h_ * k2);
    const cplx k4 = rhs(i, 1.0, y + h_ * k3);
    a_.push_back(y + h_ / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    // one-sided slopes: a' jumps where a delayed term switches on
    da_left_.push_back(rhs(i, 1.0, a_.back()));
    da_right_.push_back(rhs(i + 1, 0.0, a_.back()));
  }

  double h_;
  cplx rate_;
  std::vector<long> lag_;
  std::vector<cplx> weight_;
  std::vector<cplx> a_, da_left_, da_right_;
};

} // namespace oracle
