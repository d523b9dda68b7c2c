#include "hnm/timebin.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>

namespace hnm {

namespace {

constexpr double kGridTol = 1e-9;

long grid_multiple(double value, double dt, const char* what) {
  const double ratio = value / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > kGridTol * std::max(1.0, std::abs(ratio)))
    throw GridMismatch(std::string(what) + " = " + std::to_string(value) + " is not a multiple of dt = " +
                       std::to_string(dt));
  return static_cast<long>(rounded);
}

void occupations(std::size_t n_points, int total, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (cur.size() + 1 == n_points) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = total; k >= 0; --k) {
    cur.push_back(k);
    occupations(n_points, total - k, cur, out);
    cur.pop_back();
  }
}

LocalSector make_sector(int n_loc, const std::vector<cplx>& weights, const ModelParams& params, double dt) {
  LocalSector sector;
  sector.excitations = n_loc;
  const std::size_t n_points = weights.size();
  std::vector<std::vector<int>> occ;
  std::vector<int> cur;
  occupations(n_points, n_loc - 1, cur, occ);
  for (auto& o : occ) sector.basis.push_back({kExcited, o});
  occ.clear();
  occupations(n_points, n_loc, cur, occ);
  for (auto& o : occ) sector.basis.push_back({kGround, o});

  const auto dim = static_cast<Eigen::Index>(sector.basis.size());
  MatX h = MatX::Zero(dim, dim);
  const double g = std::sqrt(params.gamma / dt);
  for (Eigen::Index e = 0; e < dim; ++e) {
    const auto& ce = sector.basis[static_cast<std::size_t>(e)];
    if (ce.qubit != kExcited) continue;
    h(e, e) = params.epsilon0;
    for (std::size_t n = 0; n < n_points; ++n) {
      auto target = ce.occupation;
      ++target[n];
      for (Eigen::Index gi = 0; gi < dim; ++gi) {
        const auto& cg = sector.basis[static_cast<std::size_t>(gi)];
        if (cg.qubit != kGround || cg.occupation != target) continue;
        // <g, o + e_n| sigma_- b_n^dagger c_n |e, o>
        const cplx v = g * weights[n] * std::sqrt(static_cast<double>(target[n]));
        h(gi, e) += v;
        h(e, gi) += std::conj(v);
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<MatX> es(h);
  const Eigen::VectorXcd phases =
      (es.eigenvalues().cast<cplx>() * cplx{0.0, -dt}).array().exp().matrix();
  sector.unitary = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  return sector;
}

// Calls fn(labels) for every sorted multiset of `size` storage indices in
// [0, n) avoiding `excluded`.
template <typename Fn>
void for_each_multiset(std::size_t n, std::size_t size, const std::vector<std::size_t>& excluded, Fn&& fn) {
  std::vector<std::size_t> allowed;
  allowed.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (std::find(excluded.begin(), excluded.end(), i) == excluded.end()) allowed.push_back(i);
  if (size == 0) {
    fn(std::vector<std::size_t>{});
    return;
  }
  if (allowed.empty()) return;
  std::vector<std::size_t> pos(size, 0);
  std::vector<std::size_t> labels(size);
  while (true) {
    for (std::size_t i = 0; i < size; ++i) labels[i] = allowed[pos[i]];
    fn(labels);
    std::size_t i = size;
    while (i-- > 0) {
      if (pos[i] + 1 < allowed.size()) break;
    }
    if (i == static_cast<std::size_t>(-1)) return;
    ++pos[i];
    for (std::size_t j = i + 1; j < size; ++j) pos[j] = pos[i];
  }
}

Mat2 lab_frame(const Mat2& k, double eps0, double tau) {
  Mat2 d = Mat2::Identity();
  d(kExcited, kExcited) = std::exp(cplx{0.0, -eps0 * tau});
  return d * k * d.adjoint();
}

} // namespace

// --- configuration ---------------------------------------------------------

SimConfig SimConfig::build(const ModelParams& params, const FormFactor& raw_ff, const SimOptions& opts, double t_max,
                           double pad_left, double pad_right) {
  params.validate();
  if (opts.e_max < 1) throw CutoffError("e_max must be at least 1");
  if (!(opts.dt > 0.0) || !std::isfinite(opts.dt)) throw DomainError("dt must be positive");
  if (!(t_max >= 0.0)) throw DomainError("t_max must be non-negative");
  if (pad_left < 0.0 || pad_right < 0.0) throw DomainError("padding must be non-negative");
  const FormFactor ff = validate_form_factor(raw_ff, params);

  SimConfig cfg;
  cfg.params_ = params;
  cfg.opts_ = opts;
  grid_multiple(params.delay, opts.dt, "T");
  for (const auto& p : ff.points()) {
    cfg.slots_.push_back(grid_multiple(p.position, opts.dt, "coupling position"));
    cfg.weights_.push_back(p.weight);
  }
  cfg.capacity_ = static_cast<std::size_t>(std::ceil(t_max / opts.dt - kGridTol * std::max(1.0, t_max / opts.dt)));

  const auto left = static_cast<long>(std::ceil(pad_left / opts.dt - kGridTol));
  const auto right = static_cast<long>(std::ceil(pad_right / opts.dt - kGridTol));
  const long first = *std::min_element(cfg.slots_.begin(), cfg.slots_.end());
  const long last = *std::max_element(cfg.slots_.begin(), cfg.slots_.end());
  cfg.label_min_ = first - std::max<long>(static_cast<long>(cfg.capacity_) - 1, 0) - left;
  const long label_max = last + right;
  const auto n_labels = static_cast<std::size_t>(label_max - cfg.label_min_ + 1);

  cfg.fock_ = FockIndex(n_labels, opts.e_max);
  for (int n = 1; n <= opts.e_max; ++n) cfg.sectors_.push_back(make_sector(n, cfg.weights_, params, opts.dt));
  return cfg;
}

std::size_t SimConfig::steps_for(double t) const {
  if (!(t >= 0.0)) throw DomainError("duration must be non-negative");
  return static_cast<std::size_t>(grid_multiple(t, opts_.dt, "duration"));
}

long SimConfig::bin_at(long slot, std::size_t step) const {
  const long b = slot - label_min_ - static_cast<long>(step);
  if (b < 0 || b >= static_cast<long>(n_bins())) return -1;
  return b;
}

SimConfig build_sim(const ModelParams& params, const FormFactor& ff, const SimOptions& opts, double t_max) {
  return SimConfig::build(params, ff, opts, t_max);
}

// --- state -----------------------------------------------------------------

TimeBinSim::TimeBinSim(std::shared_ptr<const SimConfig> cfg, const Vec2& qubit) : cfg_(std::move(cfg)) {
  if (!cfg_) throw DomainError("simulator needs a configuration");
  check_memory(1);
  const std::size_t f_dim = field_dim();
  photon_count_.resize(f_dim);
  for (int n = 0; n <= cfg_->e_max(); ++n)
    for (std::size_t f = cfg_->fock().offset(n); f < cfg_->fock().offset(n + 1); ++f) photon_count_[f] = n;
  psi_ = VecX::Zero(static_cast<Eigen::Index>(2 * f_dim));
  psi_(static_cast<Eigen::Index>(index(0, kExcited, 0))) = qubit(kExcited);
  psi_(static_cast<Eigen::Index>(index(0, kGround, 0))) = qubit(kGround);
}

void TimeBinSim::check_memory(std::size_t register_dim) const {
  const std::size_t need = register_dim * 2 * field_dim();
  if (need > cfg_->options().max_amplitudes)
    throw ResourceError("state needs " + std::to_string(need) + " amplitudes, bound is " +
                        std::to_string(cfg_->options().max_amplitudes));
}

void TimeBinSim::set_single_photon(int qubit_level, std::span<const cplx> bins) {
  if (bins.size() != cfg_->n_bins()) throw DimensionError("bin amplitudes do not match the window");
  if (qubit_level != kExcited && qubit_level != kGround) throw DimensionError("qubit level must be 0 or 1");
  if (qubit_level == kExcited && cfg_->e_max() < 2) throw CutoffError("photon plus excited qubit needs e_max >= 2");
  register_dim_ = 1;
  psi_ = VecX::Zero(static_cast<Eigen::Index>(2 * field_dim()));
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const std::array<std::size_t, 1> lab{b};
    psi_(static_cast<Eigen::Index>(index(0, qubit_level, cfg_->fock().index(lab)))) = bins[b];
  }
}

void TimeBinSim::evolve(std::size_t n_steps) {
  const auto& fock = cfg_->fock();
  const std::size_t n_points = cfg_->coupling_slots().size();
  const int e_max = cfg_->e_max();

  std::vector<std::size_t> merged;
  std::vector<std::size_t> f_of;
  VecX local, rotated;

  for (std::size_t s = 0; s < n_steps; ++s) {
    if (steps_ >= cfg_->capacity_steps())
      throw DomainError("evolution beyond the configured window of " + std::to_string(cfg_->capacity_steps()) +
                        " steps");
    std::vector<std::size_t> coupled(n_points);
    for (std::size_t n = 0; n < n_points; ++n)
      coupled[n] = static_cast<std::size_t>(cfg_->coupling_slots()[n] - static_cast<long>(steps_) - cfg_->label_min());

    for (int r = 0; r < e_max; ++r) {
      for_each_multiset(fock.n_labels(), static_cast<std::size_t>(r), coupled, [&](const std::vector<std::size_t>& rep) {
        for (const auto& sector : cfg_->sectors()) {
          if (sector.excitations + r > e_max) break;
          const std::size_t dim = sector.basis.size();
          f_of.resize(dim);
          for (std::size_t i = 0; i < dim; ++i) {
            merged = rep;
            for (std::size_t n = 0; n < n_points; ++n)
              for (int c = 0; c < sector.basis[i].occupation[n]; ++c) merged.push_back(coupled[n]);
            std::sort(merged.begin(), merged.end());
            f_of[i] = fock.index(merged);
          }
          local.resize(static_cast<Eigen::Index>(dim));
          for (std::size_t reg = 0; reg < register_dim_; ++reg) {
            bool any = false;
            for (std::size_t i = 0; i < dim; ++i) {
              const cplx v = psi_(static_cast<Eigen::Index>(index(reg, sector.basis[i].qubit, f_of[i])));
              local(static_cast<Eigen::Index>(i)) = v;
              any = any || v != cplx{0.0, 0.0};
            }
            if (!any) continue;
            rotated.noalias() = sector.unitary * local;
            for (std::size_t i = 0; i < dim; ++i)
              psi_(static_cast<Eigen::Index>(index(reg, sector.basis[i].qubit, f_of[i]))) =
                  rotated(static_cast<Eigen::Index>(i));
          }
        }
      });
    }
    ++steps_;
  }
}

void TimeBinSim::truncate_after_raise(double reference_norm) {
  const int e_max = cfg_->e_max();
  const std::size_t lo = cfg_->fock().offset(e_max), hi = cfg_->fock().offset(e_max + 1);
  double lost = 0.0;
  for (std::size_t reg = 0; reg < register_dim_; ++reg)
    for (std::size_t f = lo; f < hi; ++f) {
      auto& v = psi_(static_cast<Eigen::Index>(index(reg, kExcited, f)));
      lost += std::norm(v);
      v = 0.0;
    }
  if (lost > 0.0 && reference_norm > 0.0) leakage_ += lost / reference_norm;
  if (leakage_ > cfg_->options().leakage_bound)
    throw TruncationOverflow("truncation leakage " + std::to_string(leakage_) + " exceeds bound " +
                             std::to_string(cfg_->options().leakage_bound));
}

double TimeBinSim::apply_lab_kraus(const std::vector<Mat2>& ops) {
  if (ops.empty()) throw DimensionError("empty Kraus set");
  const double before = norm_squared();
  const std::size_t f_dim = field_dim();
  const std::size_t m = ops.size();
  const std::size_t new_reg = register_dim_ * m;
  if (m > 1) check_memory(new_reg);

  VecX out = VecX::Zero(static_cast<Eigen::Index>(new_reg * 2 * f_dim));
  for (std::size_t reg = 0; reg < register_dim_; ++reg)
    for (std::size_t i = 0; i < m; ++i) {
      const Mat2& k = ops[i];
      const std::size_t target = reg * m + i;
      for (int qo = 0; qo < 2; ++qo)
        for (int qi = 0; qi < 2; ++qi) {
          const cplx c = k(qo, qi);
          if (c == cplx{0.0, 0.0}) continue;
          out.segment(static_cast<Eigen::Index>((target * 2 + static_cast<std::size_t>(qo)) * f_dim),
                      static_cast<Eigen::Index>(f_dim)) +=
              c * psi_.segment(static_cast<Eigen::Index>((reg * 2 + static_cast<std::size_t>(qi)) * f_dim),
                               static_cast<Eigen::Index>(f_dim));
        }
    }
  psi_ = std::move(out);
  register_dim_ = new_reg;
  truncate_after_raise(before);
  return before > 0.0 ? norm_squared() / before : 0.0;
}

double TimeBinSim::apply_intervention(const KrausSet& kraus) {
  std::vector<Mat2> lab;
  lab.reserve(kraus.ops.size());
  for (const auto& k : kraus.ops) lab.push_back(lab_frame(k, cfg_->params().epsilon0, time()));
  return apply_lab_kraus(lab);
}

double TimeBinSim::outcome_weight(const KrausSet& kraus) const {
  if (kraus.ops.empty()) throw DimensionError("empty Kraus set");
  const Mat2 rho = reduced_qubit_matrix();
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) return 0.0;
  Mat2 effect = Mat2::Zero();
  for (const auto& k : kraus.ops) {
    const Mat2 lab = lab_frame(k, cfg_->params().epsilon0, time());
    effect += lab.adjoint() * lab;
  }
  return (effect * rho).trace().real() / tr;
}

void TimeBinSim::push_active(const Vec2& fresh) {
  const double before = norm_squared();
  const std::size_t new_reg = register_dim_ * 2;
  check_memory(new_reg);
  const std::size_t f_dim = field_dim();
  VecX out = VecX::Zero(static_cast<Eigen::Index>(new_reg * 2 * f_dim));
  for (std::size_t reg = 0; reg < register_dim_; ++reg)
    for (std::size_t q_old = 0; q_old < 2; ++q_old) {
      const auto src = psi_.segment(static_cast<Eigen::Index>((reg * 2 + q_old) * f_dim), static_cast<Eigen::Index>(f_dim));
      const std::size_t target = reg * 2 + q_old;
      for (std::size_t q_new = 0; q_new < 2; ++q_new) {
        const cplx c = fresh(static_cast<Eigen::Index>(q_new));
        if (c == cplx{0.0, 0.0}) continue;
        out.segment(static_cast<Eigen::Index>((target * 2 + q_new) * f_dim), static_cast<Eigen::Index>(f_dim)) = c * src;
      }
    }
  psi_ = std::move(out);
  register_dim_ = new_reg;
  truncate_after_raise(before);
}

Mat2 TimeBinSim::reduced_qubit_matrix() const {
  const std::size_t f_dim = field_dim();
  Mat2 rho = Mat2::Zero();
  for (std::size_t reg = 0; reg < register_dim_; ++reg)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const auto va = psi_.segment(static_cast<Eigen::Index>(index(reg, a, 0)), static_cast<Eigen::Index>(f_dim));
        const auto vb = psi_.segment(static_cast<Eigen::Index>(index(reg, b, 0)), static_cast<Eigen::Index>(f_dim));
        rho(a, b) += vb.dot(va); // sum_f va conj(vb)
      }
  return rho;
}

QubitState TimeBinSim::reduced_qubit() const {
  Mat2 rho = reduced_qubit_matrix();
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) throw DomainError("state has zero norm");
  rho /= tr;
  rho = 0.5 * (rho + rho.adjoint().eval());
  return QubitState(rho);
}

double TimeBinSim::bin_center(std::size_t bin) const {
  return (static_cast<double>(cfg_->slot_of(bin, steps_)) - 0.5) * cfg_->dt();
}

std::vector<cplx> TimeBinSim::photon_amplitudes() const {
  const std::size_t n = cfg_->n_bins();
  std::vector<cplx> out(n);
  const double scale = 1.0 / std::sqrt(cfg_->dt());
  for (std::size_t b = 0; b < n; ++b) {
    const std::array<std::size_t, 1> lab{b};
    out[b] = psi_(static_cast<Eigen::Index>(index(0, kGround, cfg_->fock().index(lab)))) * scale;
  }
  return out;
}

std::vector<FieldSample> TimeBinSim::field_density() const {
  const std::size_t n = cfg_->n_bins();
  std::vector<FieldSample> out(n);
  for (std::size_t b = 0; b < n; ++b) {
    const std::array<std::size_t, 1> lab{b};
    const std::size_t f = cfg_->fock().index(lab);
    double d = 0.0;
    for (std::size_t reg = 0; reg < register_dim_; ++reg) d += std::norm(psi_(static_cast<Eigen::Index>(index(reg, kGround, f))));
    out[b] = {bin_center(b), d / cfg_->dt()};
  }
  return out;
}

double TimeBinSim::excitation_number() const {
  const std::size_t f_dim = field_dim();
  double total = 0.0, norm = 0.0;
  for (std::size_t reg = 0; reg < register_dim_; ++reg)
    for (int q = 0; q < 2; ++q)
      for (std::size_t f = 0; f < f_dim; ++f) {
        const double p = std::norm(psi_(static_cast<Eigen::Index>(index(reg, q, f))));
        norm += p;
        total += p * (photon_count_[f] + (q == kExcited ? 1 : 0));
      }
  return norm > 0.0 ? total / norm : 0.0;
}

// --- free propagation --------------------------------------------------------

double free_propagation_check(std::shared_ptr<const SimConfig> cfg, std::span<const cplx> bins, double t) {
  if (!cfg) throw DomainError("free propagation needs a configuration");
  const std::size_t n_steps = cfg->steps_for(t);
  if (bins.size() != cfg->n_bins()) throw DimensionError("bin amplitudes do not match the window");

  double scale = 0.0;
  for (const auto& v : bins) scale = std::max(scale, std::abs(v));
  if (!(scale > 0.0)) throw DomainError("wavepacket is zero");
  // labels that meet a coupling point during the first n_steps steps
  for (long slot : cfg->coupling_slots())
    for (std::size_t k = 0; k < n_steps; ++k) {
      const long b = cfg->bin_at(slot - static_cast<long>(k), 0);
      if (b >= 0 && std::abs(bins[static_cast<std::size_t>(b)]) > 1e-14 * scale)
        throw SupportError("wavepacket overlaps a coupling point within t = " + std::to_string(t));
    }

  TimeBinSim sim(cfg, Vec2::UnitY());
  sim.set_single_photon(kGround, bins);
  const VecX target = sim.amplitudes();
  sim.evolve(n_steps);
  const double nt = target.squaredNorm(), ns = sim.norm_squared();
  return std::norm(target.dot(sim.amplitudes())) / (nt * ns);
}

double free_propagation_check(std::shared_ptr<const SimConfig> cfg, const std::function<cplx(double)>& eta,
                              double t) {
  if (!cfg) throw DomainError("free propagation needs a configuration");
  std::vector<cplx> bins(cfg->n_bins());
  for (std::size_t b = 0; b < bins.size(); ++b)
    bins[b] = eta((static_cast<double>(cfg->slot_of(b, 0)) - 0.5) * cfg->dt()) * std::sqrt(cfg->dt());
  return free_propagation_check(std::move(cfg), std::span<const cplx>(bins), t);
}

} // namespace hnm
