#include "hnm/process_tensor.hpp"

#include "hnm/exact_solver.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hnm {

namespace {

int bit_s(std::size_t index, std::size_t j) { return static_cast<int>((index >> (2 * j + 1)) & 1U); }
int bit_o(std::size_t index, std::size_t j) { return static_cast<int>((index >> (2 * j)) & 1U); }

std::size_t pow4(std::size_t k) { return std::size_t{1} << (2 * k); }

void check_durations(std::span<const double> durations) {
  if (durations.empty()) throw DimensionError("process tensor needs at least one step");
  if (durations.size() > kMaxSteps)
    throw ResourceError("k = " + std::to_string(durations.size()) + " exceeds the step cap " + std::to_string(kMaxSteps));
  for (double t : durations)
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("step durations must be finite and non-negative");
}

cplx permanent(const MatX& m) {
  const auto n = static_cast<std::size_t>(m.rows());
  if (n == 0) return {1.0, 0.0};
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  cplx total{0.0, 0.0};
  do {
    cplx prod{1.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) prod *= m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i]));
    total += prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

Vec2 basis(int level) {
  Vec2 v = Vec2::Zero();
  v(level) = 1.0;
  return v;
}

} // namespace

ProcessChoi::ProcessChoi(MatX matrix, std::vector<double> durations, std::string ordering)
    : matrix_(std::move(matrix)), durations_(std::move(durations)), ordering_(std::move(ordering)) {
  const auto dim = static_cast<Eigen::Index>(pow4(durations_.size()));
  if (matrix_.rows() != dim || matrix_.cols() != dim)
    throw DimensionError("Choi matrix of " + std::to_string(durations_.size()) + " steps must be " +
                         std::to_string(dim) + "x" + std::to_string(dim));
}

std::vector<double> ProcessChoi::times() const {
  std::vector<double> out(durations_.size());
  std::partial_sum(durations_.begin(), durations_.end(), out.begin());
  return out;
}

bool ProcessChoi::is_valid(double herm_tol, double psd_tol, double trace_tol) const {
  if (!is_hermitian(matrix_, herm_tol)) return false;
  if (min_eigenvalue(matrix_) < -psd_tol) return false;
  const double expected = std::ldexp(1.0, static_cast<int>(steps()));
  return std::abs(matrix_.trace() - cplx{expected, 0.0}) <= trace_tol * expected;
}

MatX to_rotating_frame(const MatX& lab, std::span<const double> durations, double epsilon0) {
  const std::size_t k = durations.size();
  const std::size_t dim = pow4(k);
  if (static_cast<std::size_t>(lab.rows()) != dim) throw DimensionError("Choi size does not match the step count");
  std::vector<double> tau(k + 1, 0.0); // tau[j + 1] = end of step j
  for (std::size_t j = 0; j < k; ++j) tau[j + 1] = tau[j] + durations[j];

  std::vector<cplx> phi(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    double phase = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (bit_s(i, j) == kExcited) phase -= epsilon0 * tau[j];
      if (bit_o(i, j) == kExcited) phase += epsilon0 * tau[j + 1];
    }
    phi[i] = std::exp(cplx{0.0, phase});
  }
  MatX out = lab;
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b)
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) *= phi[a] * std::conj(phi[b]);
  return out;
}

// --- analytic construction ----------------------------------------------------

ProcessChoi build_choi_analytic(const ModelParams& params, const FormFactor& raw_ff, std::span<const double> durations) {
  params.validate();
  check_durations(durations);
  const FormFactor ff = validate_form_factor(raw_ff, params);
  const std::size_t k = durations.size();
  const double total = std::accumulate(durations.begin(), durations.end(), 0.0);
  if (total >= ff.min_gap())
    throw WindowError("total duration " + std::to_string(total) + " reaches the smallest point gap " +
                      std::to_string(ff.min_gap()));

  const double t_longest = *std::max_element(durations.begin(), durations.end());
  const auto amp = std::make_shared<const PiecewiseAmplitude>(amplitude_segments(params, ff, t_longest));

  // photon emitted in step j, propagated to the final time
  std::vector<PhotonWavefunction> photons;
  std::vector<cplx> stay;
  double remaining = total;
  for (std::size_t j = 0; j < k; ++j) {
    remaining -= durations[j];
    photons.push_back(photon_wavefunction(params, ff, amp, durations[j]).translated(remaining));
    stay.push_back((*amp)(durations[j]));
  }
  MatX gram(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = inner_product(photons[i], photons[j]);

  const std::size_t dim = pow4(k);
  std::vector<cplx> coeff(dim, cplx{0.0, 0.0});
  std::vector<std::vector<std::size_t>> emitted(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    cplx c{1.0, 0.0};
    for (std::size_t j = 0; j < k && c != cplx{0.0, 0.0}; ++j) {
      const int s = bit_s(i, j), o = bit_o(i, j);
      if (s == kGround && o == kExcited) c = 0.0;
      else if (s == kExcited && o == kExcited) c *= stay[j];
      else if (s == kExcited && o == kGround) emitted[i].push_back(j);
    }
    coeff[i] = c;
  }

  MatX lab = MatX::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t a = 0; a < dim; ++a) {
    if (coeff[a] == cplx{0.0, 0.0}) continue;
    for (std::size_t b = 0; b < dim; ++b) {
      if (coeff[b] == cplx{0.0, 0.0} || emitted[a].size() != emitted[b].size()) continue;
      // <F(e_b)|F(e_a)>
      const std::size_t n = emitted[a].size();
      MatX m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q)
          m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) =
              gram(static_cast<Eigen::Index>(emitted[b][p]), static_cast<Eigen::Index>(emitted[a][q]));
      lab(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = coeff[a] * std::conj(coeff[b]) * permanent(m);
    }
  }
  MatX rot = to_rotating_frame(lab, durations, params.epsilon0);
  rot = 0.5 * (rot + rot.adjoint().eval());
  return ProcessChoi(std::move(rot), {durations.begin(), durations.end()});
}

ProcessChoi build_choi_analytic(const ModelParams& params, const FormFactor& ff, double t0, double t1) {
  const double d[2] = {t0, t1};
  return build_choi_analytic(params, ff, std::span<const double>(d, 2));
}

// --- simulated construction ---------------------------------------------------

ProcessChoi build_choi_simulated(const ModelParams& params, const FormFactor& ff, std::span<const double> durations,
                                 const SimOptions& opts) {
  check_durations(durations);
  const std::size_t k = durations.size();
  if (opts.e_max < static_cast<int>(k))
    throw CutoffError("e_max = " + std::to_string(opts.e_max) + " is below the step count " + std::to_string(k));
  const double total = std::accumulate(durations.begin(), durations.end(), 0.0);
  const auto cfg = std::make_shared<const SimConfig>(build_sim(params, ff, opts, total));
  std::vector<std::size_t> steps;
  for (double t : durations) steps.push_back(cfg->steps_for(t));

  const std::size_t f_dim = cfg->fock().size();
  const std::size_t dim = pow4(k);
  if (dim * f_dim > opts.max_amplitudes)
    throw ResourceError("simulated Choi needs " + std::to_string(dim * f_dim) + " amplitudes, bound is " +
                        std::to_string(opts.max_amplitudes));

  // W(f, (s,o)) = <o, f| evolution |s>, one simulation per input string s
  MatX w = MatX::Zero(static_cast<Eigen::Index>(f_dim), static_cast<Eigen::Index>(dim));
  const std::size_t n_inputs = std::size_t{1} << k;
  for (std::size_t sbits = 0; sbits < n_inputs; ++sbits) {
    auto s_of = [&](std::size_t j) { return static_cast<int>((sbits >> j) & 1U); };
    TimeBinSim sim(cfg, basis(s_of(0)));
    sim.evolve(steps[0]);
    for (std::size_t j = 1; j < k; ++j) {
      sim.push_active(basis(s_of(j)));
      sim.evolve(steps[j]);
    }
    // output index O = sum_j o_j 2^(k-1-j), register digits first
    for (std::size_t obits = 0; obits < n_inputs; ++obits) {
      std::size_t out_index = 0, choi_index = 0;
      for (std::size_t j = 0; j < k; ++j) {
        const std::size_t o = (obits >> j) & 1U;
        out_index |= o << (k - 1 - j);
        choi_index += (2 * static_cast<std::size_t>(s_of(j)) + o) * pow4(j);
      }
      w.col(static_cast<Eigen::Index>(choi_index)) =
          sim.amplitudes().segment(static_cast<Eigen::Index>(out_index * f_dim), static_cast<Eigen::Index>(f_dim));
    }
  }
  const MatX lab = (w.adjoint() * w).transpose();
  MatX rot = to_rotating_frame(lab, durations, params.epsilon0);
  rot = 0.5 * (rot + rot.adjoint().eval());
  return ProcessChoi(std::move(rot), {durations.begin(), durations.end()});
}

// --- Markov test ----------------------------------------------------------------

MatX step_marginal(const ProcessChoi& choi, std::size_t step) {
  const std::size_t k = choi.steps();
  if (step >= k) throw DimensionError("step index out of range");
  std::vector<std::size_t> dims(k, 4), traced;
  for (std::size_t j = 0; j < k; ++j)
    if (j != step) traced.push_back(k - 1 - j); // factor 0 is the latest pair
  MatX m = partial_trace(choi.matrix(), dims, traced);
  const cplx tr = m.trace();
  if (std::abs(tr) <= 0.0) throw DomainError("step marginal has zero trace");
  return m * (2.0 / tr);
}

double markov_factorization_distance(const ProcessChoi& choi) {
  const std::size_t k = choi.steps();
  if (k < 2) throw DimensionError("factorization needs at least two steps");
  std::vector<MatX> factors;
  for (std::size_t j = k; j-- > 0;) factors.push_back(step_marginal(choi, j));
  return frobenius_distance(choi.matrix(), kron_all(factors));
}

// --- probabilities --------------------------------------------------------------

Mat4 map_choi(const KrausSet& kraus) {
  Mat4 c = Mat4::Zero();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Mat2 in = Mat2::Zero();
      in(a, b) = 1.0;
      Mat2 out = Mat2::Zero();
      for (const auto& k : kraus.ops) out += k * in * k.adjoint();
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) c(2 * a + x, 2 * b + y) = out(x, y);
    }
  return c;
}

Probability multitime_probability_detail(const ProcessChoi& choi, std::span<const KrausSet> instruments,
                                         const QubitState& initial) {
  const std::size_t k = choi.steps();
  if (instruments.size() != k)
    throw DimensionError("expected " + std::to_string(k) + " instruments, got " + std::to_string(instruments.size()));
  if (choi.ordering() != kChoiOrdering) throw OrderingError("unsupported Choi basis ordering '" + choi.ordering() + "'");
  for (const auto& inst : instruments)
    if (inst.ops.empty()) throw DimensionError("instrument outcome without Kraus operators");

  std::vector<Mat4> maps;
  for (std::size_t j = 0; j + 1 < k; ++j) maps.push_back(map_choi(instruments[j]));
  const Mat2 effect = instruments[k - 1].effect();
  const Mat2& rho = initial.matrix();

  // A((s,o),(s',o')) = rho(s_0,s'_0) prod_j C_j((o_j,s_{j+1}),(o'_j,s'_{j+1})) E(o'_last, o_last)
  const std::size_t dim = pow4(k);
  cplx total{0.0, 0.0};
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b) {
      const cplx u = choi.matrix()(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (u == cplx{0.0, 0.0}) continue;
      cplx weight = rho(bit_s(a, 0), bit_s(b, 0));
      for (std::size_t j = 0; j + 1 < k && weight != cplx{0.0, 0.0}; ++j)
        weight *= maps[j](2 * bit_o(a, j) + bit_s(a, j + 1), 2 * bit_o(b, j) + bit_s(b, j + 1));
      weight *= effect(bit_o(b, k - 1), bit_o(a, k - 1));
      total += u * weight;
    }
  const double raw = total.real();
  return {std::clamp(raw, 0.0, 1.0), raw};
}

double multitime_probability(const ProcessChoi& choi, std::span<const KrausSet> instruments, const QubitState& initial) {
  return multitime_probability_detail(choi, instruments, initial).value;
}

double multitime_probability(const ProcessChoi& choi, const Schedule& schedule, const QubitState& initial) {
  const auto times = choi.times();
  if (schedule.size() != times.size())
    throw DimensionError("schedule has " + std::to_string(schedule.size()) + " entries for a " +
                         std::to_string(times.size()) + "-step Choi");
  std::vector<KrausSet> kraus;
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (std::abs(schedule[j].time - times[j]) > 1e-9 * std::max(1.0, times[j]))
      throw OrderingError("schedule time " + std::to_string(schedule[j].time) + " does not match step end " +
                          std::to_string(times[j]));
    kraus.push_back(schedule[j].kraus);
  }
  return multitime_probability(choi, kraus, initial);
}

double simulate_intervention_sequence(const ModelParams& params, const FormFactor& ff, const Schedule& schedule,
                                      const SimOptions& opts, const QubitState& initial) {
  if (schedule.empty()) return 1.0;
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    if (!(schedule[j].time >= 0.0)) throw DomainError("intervention times must be non-negative");
    if (j > 0 && schedule[j].time < schedule[j - 1].time) throw OrderingError("intervention times must not decrease");
  }
  const auto cfg = std::make_shared<const SimConfig>(build_sim(params, ff, opts, schedule.back().time));
  std::vector<std::size_t> at;
  for (const auto& s : schedule) at.push_back(cfg->steps_for(s.time));

  Eigen::SelfAdjointEigenSolver<Mat2> es(initial.matrix());
  double probability = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double p = es.eigenvalues()(i);
    if (p <= 1e-15) continue;
    TimeBinSim sim(cfg, es.eigenvectors().col(i));
    for (std::size_t j = 0; j + 1 < schedule.size(); ++j) {
      sim.evolve(at[j] - sim.steps());
      sim.apply_intervention(schedule[j].kraus);
    }
    // the last outcome only enters through its effect on the qubit
    sim.evolve(at.back() - sim.steps());
    probability += p * sim.norm_squared() * sim.outcome_weight(schedule.back().kraus);
  }
  return probability;
}

} // namespace hnm
