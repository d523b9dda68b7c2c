#pragma once

// k-step process tensors as Choi matrices.
//
// Basis: step j contributes the pair (S_j, S'_j), the input and output of the
// qubit over the j-th interval. The pair index is 2 * s_j + o_j and the full
// index is sum_j (2 s_j + o_j) 4^j, so the latest pair is the outermost
// (most significant) factor.
//
// Entries are expressed in the frame rotating at epsilon0; this is also the
// frame in which interventions are specified.

#include "hnm/model.hpp"
#include "hnm/timebin.hpp"

#include <span>
#include <string>
#include <vector>

namespace hnm {

inline constexpr const char* kChoiOrdering = "pair(S_j,S'_j)=2*s+o;latest-outermost;rotating-frame";
inline constexpr std::size_t kMaxSteps = 3;

class ProcessChoi {
public:
  ProcessChoi(MatX matrix, std::vector<double> durations, std::string ordering = kChoiOrdering);

  const MatX& matrix() const { return matrix_; }
  std::size_t steps() const { return durations_.size(); }
  const std::vector<double>& durations() const { return durations_; }
  /// Cumulative end time of every step.
  std::vector<double> times() const;
  const std::string& ordering() const { return ordering_; }

  /// Hermitian (herm_tol), positive (min eigenvalue >= -psd_tol) and trace 2^k.
  bool is_valid(double herm_tol = 1e-10, double psd_tol = 1e-9, double trace_tol = 1e-9) const;

private:
  MatX matrix_;
  std::vector<double> durations_;
  std::string ordering_;
};

/// Exact single-excitation construction, valid while the total duration
/// stays below the smallest point gap (WindowError otherwise).
ProcessChoi build_choi_analytic(const ModelParams& params, const FormFactor& ff, std::span<const double> durations);
ProcessChoi build_choi_analytic(const ModelParams& params, const FormFactor& ff, double t0, double t1);

/// Time-bin construction, valid for any durations on the grid.
ProcessChoi build_choi_simulated(const ModelParams& params, const FormFactor& ff, std::span<const double> durations,
                                 const SimOptions& opts);

/// Multiplies entry ((s,o),(s',o')) of a lab-frame Choi by phi(s,o) conj(phi(s',o')).
MatX to_rotating_frame(const MatX& lab, std::span<const double> durations, double epsilon0);

/// Trace-2 normalized marginal of step j (partial trace over all other pairs).
MatX step_marginal(const ProcessChoi& choi, std::size_t step);

/// Frobenius distance between the Choi and the product of its step marginals.
double markov_factorization_distance(const ProcessChoi& choi);

/// Choi matrix sum_ab |a><b| (x) A(|a><b|) of a qubit CP map, index 2 * in + out.
Mat4 map_choi(const KrausSet& kraus);

struct ScheduledIntervention {
  double time = 0.0;
  KrausSet kraus;
};
using Schedule = std::vector<ScheduledIntervention>;

struct Probability {
  double value = 0.0; // clamped to [0, 1]
  double raw = 0.0;
};

/// tr[Upsilon A^T] for one outcome per step; the last one is the final
/// intervention after step k-1, the others act between steps.
Probability multitime_probability_detail(const ProcessChoi& choi, std::span<const KrausSet> instruments,
                                         const QubitState& initial = QubitState::excited());
double multitime_probability(const ProcessChoi& choi, std::span<const KrausSet> instruments,
                             const QubitState& initial = QubitState::excited());
/// Same, checking that the schedule times equal the Choi's step end times.
double multitime_probability(const ProcessChoi& choi, const Schedule& schedule,
                             const QubitState& initial = QubitState::excited());

/// Direct path: evolve, apply the branch, repeat; returns the final weight.
double simulate_intervention_sequence(const ModelParams& params, const FormFactor& ff, const Schedule& schedule,
                                      const SimOptions& opts, const QubitState& initial = QubitState::excited());

} // namespace hnm
