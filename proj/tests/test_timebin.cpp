#include "doctest.h"

#include "hnm/exact_solver.hpp"
#include "hnm/timebin.hpp"
#include "oracles/dense_collision.hpp"

#include <cmath>
#include <memory>

using namespace hnm;

namespace {

ModelParams unit() { return ModelParams::make(1.0, 1.0, 2.0); }

Vec2 basis(int level) {
  Vec2 v = Vec2::Zero();
  v(level) = 1.0;
  return v;
}

std::shared_ptr<const SimConfig> make_cfg(const FormFactor& ff, double dt, int e_max, double t_max,
                                          double pad_left = 0.0, double pad_right = 0.0) {
  SimOptions o;
  o.dt = dt;
  o.e_max = e_max;
  return std::make_shared<const SimConfig>(SimConfig::build(unit(), ff, o, t_max, pad_left, pad_right));
}

} // namespace

TEST_CASE("Fock index ranks multisets bijectively") {
  const FockIndex fock(5, 3);
  CHECK(fock.size() == 56); // C(5 + 3, 3)
  CHECK(fock.offset(0) == 0);
  CHECK(fock.offset(1) == 1);
  CHECK(fock.offset(2) == 6);
  for (std::size_t f = 0; f < fock.size(); ++f) {
    const auto labels = fock.decode(f);
    CHECK(static_cast<int>(labels.size()) == fock.photon_count(f));
    CHECK(std::is_sorted(labels.begin(), labels.end()));
    CHECK(fock.index(labels) == f);
  }
  const std::vector<std::size_t> two{1, 1};
  CHECK(fock.photon_count(fock.index(two)) == 2);
}

TEST_CASE("build_sim") {
  SimOptions o;
  o.dt = 0.01;
  const auto cfg = build_sim(unit(), FormFactor::two_point(2.0), o, 4.0);
  REQUIRE(cfg.coupling_slots().size() == 2);
  CHECK(cfg.coupling_slots()[1] - cfg.coupling_slots()[0] == 200);
  CHECK(cfg.capacity_steps() == 400);
  CHECK(cfg.steps_for(1.5) == 150);
  CHECK_THROWS_AS(cfg.steps_for(0.005), GridMismatch);
  CHECK(cfg.bin_at(cfg.slot_of(7, 3), 3) == 7);

  o.dt = 0.0013;
  CHECK_THROWS_AS(build_sim(unit(), FormFactor::two_point(2.0), o, 4.0), GridMismatch);
  o.dt = 0.01;
  o.e_max = 0;
  CHECK_THROWS_AS(build_sim(unit(), FormFactor::two_point(2.0), o, 4.0), CutoffError);
  o.e_max = 2;
  CHECK_THROWS_AS(build_sim(unit(), FormFactor({{0.0, 0.6}, {1.0, 0.8}}), o, 4.0), SpacingError);
}

TEST_CASE("ground state with empty field is stationary") {
  const auto cfg = make_cfg(FormFactor::two_point(2.0), 0.05, 2, 6.0);
  TimeBinSim sim(cfg, basis(kGround));
  const VecX before = sim.amplitudes();
  sim.evolve(0);
  CHECK(sim.steps() == 0);
  CHECK(sim.amplitudes() == before);
  sim.evolve(120);
  CHECK(max_abs_deviation(sim.amplitudes(), before) == 0.0);
  CHECK(sim.time() == doctest::Approx(6.0));
  CHECK_THROWS_AS(sim.evolve(1), DomainError);
}

TEST_CASE("one-point decay converges at first order") {
  auto error_at = [](double dt) {
    const auto cfg = make_cfg(FormFactor::one_point(), dt, 1, 2.0);
    TimeBinSim sim(cfg, basis(kExcited));
    double worst = 0.0;
    for (std::size_t k = 0; k < cfg->capacity_steps(); ++k) {
      sim.evolve(1);
      worst = std::max(worst, std::abs(sim.reduced_qubit_matrix()(kExcited, kExcited).real() - std::exp(-sim.time())));
    }
    return worst;
  };
  const double e1 = error_at(0.02), e2 = error_at(0.01);
  CHECK(e1 < 0.02);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("single excitation is conserved and the field matches the exact arcs") {
  const auto p = unit();
  const auto ff = FormFactor::two_point(2.0);
  const double dt = 0.005;
  const auto cfg = make_cfg(ff, dt, 2, 3.0);
  TimeBinSim sim(cfg, basis(kExcited));
  sim.evolve(cfg->steps_for(3.0));
  CHECK(sim.excitation_number() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sim.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sim.leakage() == 0.0);

  const double pop = sim.reduced_qubit().population(kExcited);
  CHECK(std::abs(pop - survival_probability(p, ff, 3.0)) < 0.01);

  double total = 0.0, worst = 0.0;
  for (const auto& s : sim.field_density()) {
    total += s.value * dt;
    // stay clear of the arc edges where the discrete field is smeared by a bin
    const bool edge = std::abs(s.x) < 0.05 || std::abs(s.x - 2.0) < 0.05 || std::abs(s.x - 3.0) < 0.05 ||
                      std::abs(s.x - 1.0) < 0.05 || std::abs(s.x - 5.0) < 0.05;
    if (!edge) worst = std::max(worst, std::abs(s.value - std::norm(photon_wavefunction(p, ff, 3.0, s.x))));
  }
  CHECK(total + pop == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(worst < 0.02);

  const auto xi = sim.photon_amplitudes();
  REQUIRE(xi.size() == cfg->n_bins());
}

TEST_CASE("sparse simulator reproduces the dense collision model") {
  // dt = T/3 keeps the dense oracle small: 9 bins with up to 2 photons each
  const auto p = unit();
  const auto ff = FormFactor::two_point(2.0);
  const double dt = 2.0 / 3.0;
  const auto cfg = make_cfg(ff, dt, 2, 4.0);
  Vec2 q0;
  q0 << std::sqrt(0.7), cplx{0.0, std::sqrt(0.3)};
  TimeBinSim sim(cfg, q0);
  oracle::DenseCollision dense(p, ff, dt, cfg->label_min(), cfg->n_bins(), 3, q0);

  auto compare = [&] {
    CHECK(max_abs_deviation(sim.reduced_qubit_matrix(), dense.reduced_qubit()) < 1e-12);
    for (std::size_t b = 0; b < cfg->n_bins(); ++b) {
      const std::array<std::size_t, 1> lab{b};
      const cplx mine = sim.amplitudes()(static_cast<Eigen::Index>(sim.index(0, kGround, cfg->fock().index(lab))));
      CHECK(std::abs(mine - dense.photon(cfg->label_min() + static_cast<long>(b))) < 1e-12);
    }
  };
  for (int k = 0; k < 3; ++k) {
    sim.evolve(1);
    dense.step();
    compare();
  }
  sim.apply_lab_kraus({ops::sigma_x()});
  dense.apply(ops::sigma_x());
  compare();
  for (int k = 0; k < 3; ++k) {
    sim.evolve(1);
    dense.step();
    compare();
  }
  CHECK(sim.norm_squared() == doctest::Approx(dense.norm_squared()).epsilon(1e-12));
  CHECK(sim.leakage() == 0.0);
}

TEST_CASE("interventions") {
  const auto cfg = make_cfg(FormFactor::two_point(2.0), 0.01, 2, 4.0);

  SUBCASE("measurement weight is the outcome probability") {
    TimeBinSim sim(cfg, basis(kExcited));
    sim.evolve(50);
    const double pe = sim.reduced_qubit().population(kExcited);
    CHECK(sim.outcome_weight(find_intervention("measure-z").outcome("excited")) == doctest::Approx(pe).epsilon(1e-13));
    const double w = sim.apply_intervention(find_intervention("measure-z").outcome("excited"));
    CHECK(w == doctest::Approx(pe).epsilon(1e-13));
    CHECK(sim.reduced_qubit().population(kExcited) == doctest::Approx(1.0));
    CHECK(sim.outcome_weight(find_intervention("measure-z").outcome("ground")) == 0.0);
  }
  SUBCASE("multi-Kraus sets grow the register and keep the trace") {
    TimeBinSim sim(cfg, basis(kExcited));
    sim.evolve(30);
    const Mat2 rho = sim.reduced_qubit_matrix();
    KrausSet dephase{"dephase", {Mat2(std::sqrt(0.5) * ops::identity()), Mat2(std::sqrt(0.5) * ops::sigma_z())}};
    CHECK(sim.apply_intervention(dephase) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(sim.register_dim() == 2);
    const Mat2 after = sim.reduced_qubit_matrix();
    CHECK(std::abs(after(0, 1)) < 1e-14);
    CHECK(std::abs(after(0, 0) - rho(0, 0)) < 1e-14);
  }
  SUBCASE("rotating-frame Kraus operators are dressed by the free phase") {
    // |+> prepared at time tau in the rotating frame equals diag(e^{-i eps0 tau}, 1)|+> in the lab
    TimeBinSim sim(cfg, basis(kGround));
    sim.evolve(70);
    sim.apply_intervention(find_intervention("trash-prepare-plus").outcomes[0]);
    const Mat2 rho = sim.reduced_qubit_matrix();
    CHECK(std::abs(rho(0, 1) - 0.5 * std::exp(cplx{0.0, -0.7})) < 1e-13);
  }
  SUBCASE("push_active parks the qubit in the register") {
    TimeBinSim sim(cfg, basis(kExcited));
    sim.evolve(10);
    const double pe = sim.reduced_qubit().population(kExcited);
    sim.push_active(basis(kGround));
    CHECK(sim.register_dim() == 2);
    CHECK(sim.reduced_qubit().population(kGround) == doctest::Approx(1.0));
    CHECK(sim.excitation_number() == doctest::Approx(1.0 - pe).epsilon(1e-12));
  }
}

TEST_CASE("truncation and resource limits") {
  SUBCASE("re-exciting an emitted photon overflows e_max = 1") {
    const auto cfg = make_cfg(FormFactor::one_point(), 0.01, 1, 2.0);
    TimeBinSim sim(cfg, basis(kExcited));
    sim.evolve(50);
    CHECK_THROWS_AS(sim.apply_lab_kraus({ops::sigma_x()}), TruncationOverflow);
  }
  SUBCASE("the same flip is exact with e_max = 2") {
    const auto cfg = make_cfg(FormFactor::one_point(), 0.01, 2, 2.0);
    TimeBinSim sim(cfg, basis(kExcited));
    sim.evolve(50);
    sim.apply_lab_kraus({ops::sigma_x()});
    CHECK(sim.leakage() == 0.0);
    CHECK(sim.norm_squared() == doctest::Approx(1.0));
  }
  SUBCASE("amplitude budget") {
    SimOptions o;
    o.dt = 0.01;
    o.max_amplitudes = 5000;
    auto cfg = std::make_shared<const SimConfig>(build_sim(unit(), FormFactor::two_point(2.0), o, 2.0));
    auto run = [&] {
      TimeBinSim sim(cfg, basis(kExcited));
      for (int i = 0; i < 8; ++i) sim.push_active(basis(kGround));
    };
    CHECK_THROWS_AS(run(), ResourceError);
  }
}

TEST_CASE("free propagation") {
  const auto ff = FormFactor::two_point(2.0);
  const double dt = 0.01;
  const auto cfg = make_cfg(ff, dt, 2, 1.0, 4.0, 1.0);
  auto packet = [](double centre) {
    return [centre](double x) { return std::polar(std::exp(-std::pow((x - centre) / 0.15, 2)), 0.2 * x); };
  };
  // clear of both points for the whole run
  CHECK(free_propagation_check(cfg, packet(-2.5), 1.0) == doctest::Approx(1.0).epsilon(1e-13));
  auto between = [](double x) { return x > 0.2 && x < 0.8 ? cplx{std::sin(M_PI * (x - 0.2) / 0.6), 0.0} : cplx{}; };
  CHECK(free_propagation_check(cfg, between, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
  // reaches x = 0 before t = 1
  CHECK_THROWS_AS(free_propagation_check(cfg, packet(-0.5), 1.0), SupportError);
}
