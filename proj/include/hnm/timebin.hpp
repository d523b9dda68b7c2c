#pragma once

// Collision-model discretization of the chiral field. The field is cut into
// bins of width dt that move one slot downstream per step; during step k the
// qubit interacts with the bins sitting just upstream of each coupling point.
//
// Bins are addressed by a static label l: bin l sits at slot l + k after k
// steps and covers the interval ((l + k - 1) dt, (l + k) dt]. The qubit meets
// label m_n - k at coupling point n during step k, so no data moves when the
// field propagates.
//
// State layout: amplitude(r, q, f) with r a spectator register (earlier
// process-tensor outputs or Kraus records), q the active qubit level and f a
// truncated symmetric Fock configuration of the bins.

#include "hnm/exact_solver.hpp"
#include "hnm/model.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace hnm {

struct SimOptions {
  double dt = 0.01;
  int e_max = 2;                 // cap on (active qubit excitation + photons)
  double leakage_bound = 1e-6;   // cumulative truncation loss before TruncationOverflow
  std::size_t max_amplitudes = std::size_t{1} << 27;
};

/// Ranks multisets of bin labels (occupation lists) with at most `max_photons`
/// entries: index = offset(n) + sum_i C(l_i + i - 1, i) over the sorted labels.
class FockIndex {
public:
  FockIndex() = default;
  FockIndex(std::size_t n_labels, int max_photons);

  std::size_t size() const { return offsets_.back(); }
  std::size_t n_labels() const { return n_labels_; }
  int max_photons() const { return max_photons_; }

  std::size_t index(std::span<const std::size_t> sorted_labels) const;
  std::vector<std::size_t> decode(std::size_t f) const;
  int photon_count(std::size_t f) const;
  std::size_t offset(int n) const { return offsets_[static_cast<std::size_t>(n)]; }

private:
  std::uint64_t choose(std::size_t n, std::size_t k) const;

  std::size_t n_labels_ = 0;
  int max_photons_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::vector<std::uint64_t>> binom_; // binom_[k][n] = C(n, k)
};

/// Basis state of the local qubit + coupling-bin subsystem.
struct LocalConfig {
  int qubit = kGround;
  std::vector<int> occupation; // photons in the bin at each coupling point
};

/// Fixed local-excitation block of the per-step interaction unitary.
struct LocalSector {
  int excitations = 0;
  std::vector<LocalConfig> basis;
  MatX unitary;
};

class SimConfig {
public:
  /// Discretizes the model. Throws GridMismatch unless dt divides T and every
  /// coupling position, CutoffError if e_max < 1.
  static SimConfig build(const ModelParams& params, const FormFactor& ff, const SimOptions& opts, double t_max,
                         double pad_left = 0.0, double pad_right = 0.0);

  const ModelParams& params() const { return params_; }
  const SimOptions& options() const { return opts_; }
  double dt() const { return opts_.dt; }
  int e_max() const { return opts_.e_max; }
  std::size_t capacity_steps() const { return capacity_; }
  std::size_t n_bins() const { return fock_.n_labels(); }
  const std::vector<long>& coupling_slots() const { return slots_; }
  const std::vector<cplx>& weights() const { return weights_; }
  const FockIndex& fock() const { return fock_; }
  const std::vector<LocalSector>& sectors() const { return sectors_; }
  long label_min() const { return label_min_; }

  /// Number of steps representing duration t; GridMismatch if t is off-grid.
  std::size_t steps_for(double t) const;
  /// Position index of the bin with storage index `bin` after `step` steps.
  long slot_of(std::size_t bin, std::size_t step) const { return static_cast<long>(bin) + label_min_ + static_cast<long>(step); }
  /// Storage index of the bin at slot `slot` after `step` steps, or -1.
  long bin_at(long slot, std::size_t step) const;

private:
  ModelParams params_;
  SimOptions opts_;
  std::size_t capacity_ = 0;
  std::vector<long> slots_;
  std::vector<cplx> weights_;
  long label_min_ = 0;
  FockIndex fock_;
  std::vector<LocalSector> sectors_;
};

SimConfig build_sim(const ModelParams& params, const FormFactor& ff, const SimOptions& opts, double t_max);

struct FieldSample {
  double x = 0.0;
  double value = 0.0;
};

class TimeBinSim {
public:
  /// |qubit> (x) |vac>
  TimeBinSim(std::shared_ptr<const SimConfig> cfg, const Vec2& qubit);

  const SimConfig& config() const { return *cfg_; }
  std::size_t steps() const { return steps_; }
  double time() const { return static_cast<double>(steps_) * cfg_->dt(); }
  std::size_t register_dim() const { return register_dim_; }
  std::size_t field_dim() const { return cfg_->fock().size(); }
  const VecX& amplitudes() const { return psi_; }
  std::size_t index(std::size_t r, int q, std::size_t f) const {
    return (r * 2 + static_cast<std::size_t>(q)) * field_dim() + f;
  }

  /// Replaces the field by a single photon with the given per-bin amplitudes
  /// (storage order) and sets the qubit level; the register is reset.
  void set_single_photon(int qubit_level, std::span<const cplx> bin_amplitudes);

  /// Shift-and-interact steps.
  void evolve(std::size_t n_steps);

  /// Applies an intervention given in the frame rotating at epsilon0 (the
  /// frame used for process tensors) at the current time. Multi-element Kraus
  /// sets append a record factor to the register. Returns the branch weight
  /// relative to the incoming norm.
  double apply_intervention(const KrausSet& kraus);
  /// Same, with operators already in the lab frame.
  double apply_lab_kraus(const std::vector<Mat2>& ops);
  /// Branch weight tr[E rho_q] / tr[rho_q] of a rotating-frame outcome without
  /// applying it; needs no room above e_max.
  double outcome_weight(const KrausSet& kraus) const;

  /// Moves the active qubit into the register (least significant digit) and
  /// starts a fresh active qubit in state `fresh`.
  void push_active(const Vec2& fresh);

  Mat2 reduced_qubit_matrix() const;
  QubitState reduced_qubit() const;

  /// |xi(x)|^2 of the single-photon, ground-qubit component, per bin / dt.
  std::vector<FieldSample> field_density() const;
  /// Single-photon amplitudes xi(x) ~ psi / sqrt(dt) (register 0, qubit ground).
  std::vector<cplx> photon_amplitudes() const;
  double bin_center(std::size_t bin) const;

  double norm_squared() const { return psi_.squaredNorm(); }
  double excitation_number() const;
  double leakage() const { return leakage_; }

private:
  void truncate_after_raise(double reference_norm);
  void check_memory(std::size_t register_dim) const;

  std::shared_ptr<const SimConfig> cfg_;
  VecX psi_;
  std::size_t register_dim_ = 1;
  std::size_t steps_ = 0;
  double leakage_ = 0.0;
  std::vector<int> photon_count_; // cached per field index
};

/// Evolves the single photon eta (sampled at the bin centres at time 0) with
/// the qubit in its ground level for duration t and returns the fidelity with
/// the rigidly translated packet. SupportError if eta touches a bin that
/// reaches a coupling point within t.
double free_propagation_check(std::shared_ptr<const SimConfig> cfg, const std::function<cplx(double)>& eta,
                              double t);
/// Same with per-bin amplitudes given directly (storage order at time 0).
double free_propagation_check(std::shared_ptr<const SimConfig> cfg, std::span<const cplx> bin_amplitudes, double t);

} // namespace hnm
