#pragma once

// Closed forms of the one-point (memoryless) model: amplitude damping and the
// Choi matrices of its one- and two-step process tensors.

#include "hnm/model.hpp"
#include "hnm/process_tensor.hpp"

#include <functional>
#include <span>

namespace hnm {

/// K0 = diag(e^{-i eps0 t} e^{-gamma t/2}, 1), K1 = sqrt(1 - e^{-gamma t}) |1><0|.
/// epsilon0 = 0 gives the rotating-frame channel.
KrausSet amplitude_damping_channel(double gamma, double t, double epsilon0 = 0.0);

/// Kraus set of B after A (B o A).
KrausSet compose(const KrausSet& after, const KrausSet& before);

/// Derived: the matrix obtained from the ancilla construction, off-diagonal
/// e^{-gamma t/2}. Printed: the standalone one-step matrix with off-diagonal
/// e^{-gamma t}. The two agree on every two-step block.
enum class ChoiVariant { Derived, Printed };

/// Golden Choi as a closure over (gamma, durations).
class GoldenChoi {
public:
  using Formula = std::function<MatX(double gamma, std::span<const double> durations)>;

  GoldenChoi(std::size_t steps, Formula formula) : steps_(steps), formula_(std::move(formula)) {}

  std::size_t steps() const { return steps_; }
  ProcessChoi evaluate(double gamma, std::span<const double> durations) const;

private:
  std::size_t steps_;
  Formula formula_;
};

GoldenChoi golden_choi_1step(ChoiVariant variant = ChoiVariant::Derived);
GoldenChoi golden_choi_2step(ChoiVariant variant = ChoiVariant::Derived);

ProcessChoi markovian_choi_1step(double gamma, double t0, ChoiVariant variant = ChoiVariant::Derived);
ProcessChoi markovian_choi_2step(double gamma, double t0, double t1, ChoiVariant variant = ChoiVariant::Derived);

} // namespace hnm
