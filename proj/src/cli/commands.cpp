#include "hnm/cli.hpp"
#include "hnm/exact_solver.hpp"
#include "hnm/process_tensor.hpp"
#include "hnm/reference.hpp"
#include "hnm/timebin.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace hnm::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const MatX& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json null_if_nan(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

// Runs fn(i) for i < n on up to `jobs` threads; results land in caller-owned
// slots so output order never depends on scheduling.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Common {
  std::optional<std::string> config;
  Overrides ov;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON model config");
  sub->add_option("--gamma", c.ov.gamma, "decay rate");
  sub->add_option("--omega0", c.ov.omega0, "bare excitation energy");
  sub->add_option("--epsilon0", c.ov.epsilon0, "dressed excitation energy (defaults to omega0)");
  sub->add_option("--T", c.ov.delay, "loop length / point spacing");
  sub->add_option("--dt", c.ov.dt, "time-bin width");
  sub->add_option("--emax", c.ov.e_max, "excitation cutoff of the time-bin simulator");
  sub->add_option("--t-max", c.ov.t_max, "end of the time range");
  sub->add_option("--dx", c.ov.dx, "spatial sampling step");
  sub->add_option("--form-factor", c.ov.form_factor, "one-point, two-point or comb:N");
  sub->add_option("--out", c.ov.out, "output file (default stdout)");
  sub->add_option("--jobs", c.ov.jobs, "worker threads for sweeps");
  sub->add_flag("--no-timestamp", c.ov.no_timestamp, "omit the timestamp comment");
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

std::string describe(const RunConfig& cfg) {
  std::ostringstream ss;
  ss << "gamma=" << g17(cfg.params.gamma) << " omega0=" << g17(cfg.params.omega0)
     << " epsilon0=" << g17(cfg.params.epsilon0) << " T=" << g17(cfg.params.delay)
     << " form_factor=" << cfg.form_factor_source << " points=" << cfg.form_factor.size();
  return ss.str();
}

void csv_preamble(std::ostream& os, const RunConfig& cfg, const std::string& command) {
  if (cfg.timestamp) os << "# generated " << timestamp() << "\n";
  os << "# hnm " << command << " " << describe(cfg) << "\n";
}

json json_preamble(const RunConfig& cfg, const std::string& command) {
  json j;
  j["command"] = command;
  if (cfg.timestamp) j["generated"] = timestamp();
  j["gamma"] = cfg.params.gamma;
  j["omega0"] = cfg.params.omega0;
  j["epsilon0"] = cfg.params.epsilon0;
  j["T"] = cfg.params.delay;
  json pts = json::array();
  for (const auto& p : cfg.form_factor.points()) pts.push_back({p.position, p.weight.real(), p.weight.imag()});
  j["form_factor"] = pts;
  return j;
}

// Writes to --out when given, otherwise to the command's stream.
void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.out);
  if (!f) throw ConfigError("cannot write '" + cfg.out + "'");
  f << text;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse number '" + item + "'");
    }
  }
  return out;
}

std::shared_ptr<const SimConfig> sim_config(const RunConfig& cfg, double t_end, int e_max) {
  SimOptions opts;
  opts.dt = cfg.dt;
  opts.e_max = e_max;
  return std::make_shared<const SimConfig>(build_sim(cfg.params, cfg.form_factor, opts, t_end));
}

// --- survival -----------------------------------------------------------------

std::string cmd_survival(const RunConfig& cfg, int samples) {
  if (samples < 1) throw ConfigError("samples must be at least 1");
  const auto amp = amplitude_segments(cfg.params, cfg.form_factor, cfg.t_max);
  const std::size_t n = cfg.t_max == 0.0 ? 1 : static_cast<std::size_t>(std::max(samples, 2));
  std::ostringstream os;
  csv_preamble(os, cfg, "survival");
  os << "t,re_a,im_a,abs2_a,abs2_exp_reference\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : cfg.t_max * static_cast<double>(i) / static_cast<double>(n - 1);
    const cplx a = amp(t);
    os << g17(t) << "," << g17(a.real()) << "," << g17(a.imag()) << "," << g17(std::norm(a)) << ","
       << g17(std::exp(-cfg.params.gamma * t)) << "\n";
  }
  return os.str();
}

// --- field ----------------------------------------------------------------------

std::string cmd_field(const RunConfig& cfg, double t, const std::string& mode, std::optional<double> x_min,
                      std::optional<double> x_max) {
  if (!(t >= 0.0)) throw DomainError("t must be non-negative");
  const double pad = 0.25 * cfg.params.delay;
  const double lo = x_min.value_or(-pad);
  const double hi = x_max.value_or(cfg.form_factor.extent() + t + pad);
  if (!(hi > lo)) throw ConfigError("empty x range");

  std::ostringstream os;
  csv_preamble(os, cfg, "field");
  if (mode == "analytic") {
    const auto amp = std::make_shared<const PiecewiseAmplitude>(amplitude_segments(cfg.params, cfg.form_factor, t));
    const auto xi = photon_wavefunction(cfg.params, cfg.form_factor, amp, t);
    const double pop = std::norm((*amp)(t));
    const double norm = xi.norm_squared();
    os << "# path=analytic t=" << g17(t) << " dx=" << g17(cfg.dx) << "\n";
    os << "x,re_xi,im_xi,abs2_xi\n";
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / cfg.dx - 1e-9));
    double grid_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = lo + (static_cast<double>(i) + 0.5) * cfg.dx;
      const cplx v = xi(x);
      grid_sum += std::norm(v) * cfg.dx;
      os << g17(x) << "," << g17(v.real()) << "," << g17(v.imag()) << "," << g17(std::norm(v)) << "\n";
    }
    const double dev = std::abs(pop + norm - 1.0);
    os << "# balance |a|^2+||xi||^2=" << g17(pop + norm) << " deviation=" << g17(dev) << " "
       << (dev <= 1e-8 ? "PASS" : "FAIL") << " (tol 1e-8, exact arc integrals)\n";
    os << "# grid_sum sum(abs2_xi*dx)+|a|^2=" << g17(grid_sum + pop) << " (midpoint rule, informational)\n";
  } else if (mode == "timebin") {
    const auto sc = sim_config(cfg, t, cfg.e_max);
    TimeBinSim sim(sc, Vec2::UnitX());
    sim.evolve(sc->steps_for(t));
    const auto amps = sim.photon_amplitudes();
    const double pop = sim.reduced_qubit_matrix()(kExcited, kExcited).real();
    os << "# path=timebin t=" << g17(t) << " dt=" << g17(cfg.dt) << " emax=" << cfg.e_max << "\n";
    os << "x,re_xi,im_xi,abs2_xi\n";
    double total = 0.0;
    for (std::size_t b = 0; b < amps.size(); ++b) {
      total += std::norm(amps[b]) * cfg.dt;
      const double x = sim.bin_center(b);
      if (x < lo || x > hi) continue;
      os << g17(x) << "," << g17(amps[b].real()) << "," << g17(amps[b].imag()) << "," << g17(std::norm(amps[b]))
         << "\n";
    }
    const double dev = std::abs(pop + total - 1.0);
    os << "# balance sum(abs2_xi*dt)+P_excited=" << g17(pop + total) << " deviation=" << g17(dev) << " "
       << (dev <= 1e-8 ? "PASS" : "FAIL") << " (tol 1e-8)\n";
  } else {
    throw ConfigError("mode must be analytic or timebin");
  }
  return os.str();
}

// --- choi -------------------------------------------------------------------------

ProcessChoi make_choi(const RunConfig& cfg, const std::vector<double>& durations, const std::string& mode) {
  if (mode == "analytic") return build_choi_analytic(cfg.params, cfg.form_factor, durations);
  if (mode == "timebin") {
    SimOptions opts;
    opts.dt = cfg.dt;
    opts.e_max = std::max<int>(cfg.e_max, static_cast<int>(durations.size()));
    return build_choi_simulated(cfg.params, cfg.form_factor, durations, opts);
  }
  throw ConfigError("mode must be analytic or timebin");
}

std::string cmd_choi(const RunConfig& cfg, const std::vector<double>& durations, const std::string& mode) {
  const ProcessChoi choi = make_choi(cfg, durations, mode);
  json j = json_preamble(cfg, "choi");
  j["mode"] = mode;
  j["dt"] = mode == "timebin" ? json(cfg.dt) : json(nullptr);
  j["durations"] = choi.durations();
  j["times"] = choi.times();
  j["ordering"] = choi.ordering();
  j["dimension"] = choi.matrix().rows();
  j["trace"] = choi.matrix().trace().real();
  j["valid"] = choi.is_valid();
  j["factorization_distance"] = choi.steps() >= 2 ? json(markov_factorization_distance(choi)) : json(nullptr);
  if (choi.steps() <= 2) {
    const ProcessChoi golden = choi.steps() == 1
                                   ? markovian_choi_1step(cfg.params.gamma, durations[0])
                                   : markovian_choi_2step(cfg.params.gamma, durations[0], durations[1]);
    j["golden_variant"] = "derived";
    j["max_abs_dev"] = max_abs_deviation(choi.matrix(), golden.matrix());
  } else {
    j["golden_variant"] = nullptr;
    j["max_abs_dev"] = nullptr;
  }
  j["matrix"] = matrix_json(choi.matrix());
  return j.dump(2) + "\n";
}

// --- markov-test --------------------------------------------------------------------

struct MarkovRow {
  double t0 = 0.0, t1 = 0.0;
  bool inside = false;
  double analytic = kNaN;
  double distance = 0.0, distance_half = 0.0, floor = 0.0;
  bool non_markovian = false;
};

std::vector<std::pair<double, double>> parse_pairs(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto v = parse_list(item);
    if (v.size() != 2) throw ConfigError("pair '" + item + "' must be t0,t1");
    out.emplace_back(v[0], v[1]);
  }
  return out;
}

std::string cmd_markov_test(const RunConfig& cfg, const std::optional<std::string>& pairs_text, bool json_stdout,
                            std::ostream& out) {
  const double T = cfg.params.delay;
  std::vector<std::pair<double, double>> pairs =
      pairs_text ? parse_pairs(*pairs_text)
                 : std::vector<std::pair<double, double>>{{0.2 * T, 0.3 * T}, {0.3 * T, 0.5 * T}, {0.6 * T, 0.8 * T}};
  if (pairs.size() > 64) throw ResourceError("at most 64 pairs per sweep");

  std::vector<MarkovRow> rows(pairs.size());
  parallel_for(pairs.size(), cfg.jobs, [&](std::size_t i) {
    MarkovRow r;
    r.t0 = pairs[i].first;
    r.t1 = pairs[i].second;
    const std::vector<double> d{r.t0, r.t1};
    r.inside = r.t0 + r.t1 < cfg.form_factor.min_gap();
    if (r.inside) r.analytic = markov_factorization_distance(build_choi_analytic(cfg.params, cfg.form_factor, d));
    SimOptions opts;
    opts.e_max = std::max(cfg.e_max, 2);
    opts.dt = cfg.dt;
    r.distance = markov_factorization_distance(build_choi_simulated(cfg.params, cfg.form_factor, d, opts));
    opts.dt = 0.5 * cfg.dt;
    r.distance_half = markov_factorization_distance(build_choi_simulated(cfg.params, cfg.form_factor, d, opts));
    r.floor = std::abs(r.distance - r.distance_half);
    r.non_markovian = r.distance > 10.0 * r.floor && r.distance > 1e-9;
    rows[i] = r;
  });

  json j = json_preamble(cfg, "markov-test");
  j["dt"] = cfg.dt;
  j["rule"] = "non-markovian iff distance > 10*floor and distance > 1e-9; floor = |D(dt) - D(dt/2)|";
  j["pairs"] = json::array();
  for (const auto& r : rows)
    j["pairs"].push_back({{"t0", r.t0},
                          {"t1", r.t1},
                          {"inside_window", r.inside},
                          {"analytic_distance", null_if_nan(r.analytic)},
                          {"distance", r.distance},
                          {"distance_half_dt", r.distance_half},
                          {"error_floor", r.floor},
                          {"verdict", r.non_markovian ? "non-markovian" : "markovian"}});
  const std::string report = j.dump(2) + "\n";

  std::ostringstream table;
  if (cfg.timestamp) table << "# generated " << timestamp() << "\n";
  table << "# hnm markov-test " << describe(cfg) << " dt=" << g17(cfg.dt) << "\n";
  table << std::left << std::setw(12) << "t0" << std::setw(12) << "t1" << std::setw(8) << "window" << std::setw(14)
        << "analytic" << std::setw(14) << "distance" << std::setw(14) << "floor"
        << "verdict\n";
  for (const auto& r : rows) {
    char line[256];
    std::snprintf(line, sizeof line, "%-12.6g%-12.6g%-8s%-14.4e%-14.4e%-14.4e%s\n", r.t0, r.t1, r.inside ? "in" : "out",
                  std::isnan(r.analytic) ? 0.0 : r.analytic, r.distance, r.floor,
                  r.non_markovian ? "non-markovian" : "markovian");
    table << line;
  }

  if (!cfg.out.empty()) {
    emit(cfg, out, report);
    return table.str();
  }
  return json_stdout ? report : table.str();
}

// --- prob ---------------------------------------------------------------------------

struct Step {
  KrausSet kraus;
  double time = 0.0;
  std::string text;
};

std::vector<Step> parse_schedule(const std::string& text) {
  std::vector<Step> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto at = item.find('@');
    if (at == std::string::npos) throw ConfigError("schedule entry '" + item + "' must be name[:outcome]@time");
    std::string name = item.substr(0, at);
    name.erase(0, name.find_first_not_of(" \t"));
    const auto times = parse_list(item.substr(at + 1));
    if (times.size() != 1) throw ConfigError("bad time in '" + item + "'");
    std::string outcome;
    if (const auto colon = name.find(':'); colon != std::string::npos) {
      outcome = name.substr(colon + 1);
      name = name.substr(0, colon);
    }
    const Instrument& inst = find_intervention(name);
    if (outcome.empty()) {
      if (inst.outcomes.size() != 1) throw ConfigError("instrument '" + name + "' needs an outcome");
      out.push_back({inst.outcomes.front(), times[0], item});
    } else {
      out.push_back({inst.outcome(outcome), times[0], item});
    }
  }
  return out;
}

QubitState initial_state(const std::string& name) {
  if (name == "excited") return QubitState::excited();
  if (name == "ground") return QubitState::ground();
  if (name == "plus") {
    Vec2 v;
    v << 1.0, 1.0;
    return QubitState::pure(v);
  }
  throw ConfigError("initial state must be excited, ground or plus");
}

std::string cmd_prob(const RunConfig& cfg, const std::string& schedule_text, const std::string& mode,
                     const std::string& initial_name) {
  const auto steps = parse_schedule(schedule_text);
  const QubitState initial = initial_state(initial_name);
  json j = json_preamble(cfg, "prob");
  j["schedule"] = json::array();
  for (const auto& s : steps) j["schedule"].push_back(s.text);
  j["initial"] = initial_name;
  if (steps.empty()) {
    j["choi_probability"] = 1.0;
    j["direct_probability"] = 1.0;
    return j.dump(2) + "\n";
  }
  Schedule schedule;
  std::vector<double> durations;
  double prev = 0.0;
  for (const auto& s : steps) {
    if (s.time < prev) throw OrderingError("schedule times must not decrease");
    durations.push_back(s.time - prev);
    prev = s.time;
    schedule.push_back({s.time, s.kraus});
  }
  std::string path = mode;
  if (mode == "auto") path = prev < cfg.form_factor.min_gap() ? "analytic" : "timebin";
  const ProcessChoi choi = make_choi(cfg, durations, path);
  std::vector<KrausSet> kraus;
  for (const auto& s : schedule) kraus.push_back(s.kraus);
  const Probability p = multitime_probability_detail(choi, kraus, initial);

  SimOptions opts;
  opts.dt = cfg.dt;
  opts.e_max = std::max<int>(cfg.e_max, static_cast<int>(steps.size()));
  const double direct = simulate_intervention_sequence(cfg.params, cfg.form_factor, schedule, opts, initial);

  j["choi_path"] = path;
  j["dt"] = cfg.dt;
  j["choi_probability"] = p.value;
  j["choi_probability_raw"] = p.raw;
  j["direct_probability"] = direct;
  j["abs_difference"] = std::abs(p.value - direct);
  return j.dump(2) + "\n";
}

// --- converge -------------------------------------------------------------------------

std::string cmd_converge(const RunConfig& cfg, int rungs, std::optional<double> dt0, std::optional<double> t_end) {
  if (rungs < 2) throw ConfigError("the ladder needs at least two rungs");
  const double T = cfg.params.delay;
  const double first = dt0.value_or(T / 50.0);
  const double end = t_end.value_or(T);
  if (!(end > 0.0)) throw ConfigError("t-end must be positive");

  const auto amp = amplitude_segments(cfg.params, cfg.form_factor, end);
  std::vector<double> dts(static_cast<std::size_t>(rungs)), errs(dts.size());
  for (std::size_t i = 0; i < dts.size(); ++i) dts[i] = first / std::ldexp(1.0, static_cast<int>(i));

  parallel_for(dts.size(), cfg.jobs, [&](std::size_t i) {
    SimOptions opts;
    opts.dt = dts[i];
    opts.e_max = 1;
    const auto sc = std::make_shared<const SimConfig>(build_sim(cfg.params, cfg.form_factor, opts, end));
    const std::size_t n = sc->steps_for(end);
    TimeBinSim sim(sc, Vec2::UnitX());
    double worst = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      sim.evolve(1);
      const double p = sim.reduced_qubit_matrix()(kExcited, kExcited).real();
      worst = std::max(worst, std::abs(p - std::norm(amp(static_cast<double>(k) * dts[i]))));
    }
    errs[i] = worst;
  });

  std::ostringstream os;
  csv_preamble(os, cfg, "converge");
  os << "# population error max_k |P_timebin(k dt) - |a(k dt)|^2| on (0, " << g17(end) << "], emax=1\n";
  os << "dt,max_abs_err_population,fitted_order\n";
  os << "0,0,nan\n"; // exact path against itself
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double local = i == 0 ? kNaN : std::log(errs[i - 1] / errs[i]) / std::log(dts[i - 1] / dts[i]);
    os << g17(dts[i]) << "," << g17(errs[i]) << "," << (std::isnan(local) ? "nan" : g17(local)) << "\n";
  }
  // least-squares slope of log(err) against log(dt)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(dts.size());
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double x = std::log(dts[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  os << "# fitted_order_lsq=" << g17(order) << " band=[0.8,1.3] " << (order >= 0.8 && order <= 1.3 ? "PASS" : "FAIL")
     << "\n";
  return os.str();
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"hnm: delayed-feedback waveguide model and process-tensor toolkit"};
  app.require_subcommand(1);

  Common c_surv, c_field, c_choi, c_markov, c_prob, c_conv;

  auto* survival = app.add_subcommand("survival", "emitter amplitude a(t) on [0, t_max] (CSV)");
  add_common(survival, c_surv);
  int samples = 401;
  survival->add_option("--samples", samples, "number of time samples");

  auto* field = app.add_subcommand("field", "photon wavefunction at time t (CSV)");
  add_common(field, c_field);
  double field_t = 1.5;
  std::string field_mode = "analytic";
  std::optional<double> x_min, x_max;
  field->add_option("--t", field_t, "time");
  field->add_option("--mode", field_mode, "analytic or timebin");
  field->add_option("--x-min", x_min, "left end of the x range");
  field->add_option("--x-max", x_max, "right end of the x range");

  auto* choi = app.add_subcommand("choi", "process-tensor Choi matrix (JSON)");
  add_common(choi, c_choi);
  std::optional<double> t0, t1;
  std::optional<std::string> times_text;
  std::string choi_mode = "analytic";
  choi->add_option("--t0", t0, "first step duration");
  choi->add_option("--t1", t1, "second step duration");
  choi->add_option("--durations", times_text, "comma-separated step durations (overrides --t0/--t1)");
  choi->add_option("--mode", choi_mode, "analytic or timebin");

  auto* markov = app.add_subcommand("markov-test", "factorization distance sweep over (t0, t1) pairs");
  add_common(markov, c_markov);
  std::optional<std::string> pairs_text;
  bool json_stdout = false;
  markov->add_option("--pairs", pairs_text, "pairs 't0,t1;t0,t1;...' (default 0.2T,0.3T;0.3T,0.5T;0.6T,0.8T)");
  markov->add_flag("--json", json_stdout, "print the JSON report instead of the table");

  auto* prob = app.add_subcommand("prob", "multitime probability via the Choi and by direct simulation (JSON)");
  add_common(prob, c_prob);
  std::string schedule_text;
  std::string prob_mode = "auto";
  std::string initial = "excited";
  prob->add_option("--schedule", schedule_text, "interventions 'name[:outcome]@time,...'")->required();
  prob->add_option("--mode", prob_mode, "auto, analytic or timebin");
  prob->add_option("--initial", initial, "excited, ground or plus");

  auto* converge = app.add_subcommand("converge", "time-bin population error over a dt ladder (CSV)");
  add_common(converge, c_conv);
  int rungs = 4;
  std::optional<double> dt0, t_end;
  converge->add_option("--rungs", rungs, "ladder length (dt halves each rung)");
  converge->add_option("--dt0", dt0, "coarsest dt (default T/50)");
  converge->add_option("--t-end", t_end, "end of the error window (default T)");

  std::vector<std::string> argv_store{"hnm"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (survival->parsed()) {
      const auto cfg = load_config(c_surv.config, c_surv.ov);
      emit(cfg, out, cmd_survival(cfg, samples));
    } else if (field->parsed()) {
      const auto cfg = load_config(c_field.config, c_field.ov);
      emit(cfg, out, cmd_field(cfg, field_t, field_mode, x_min, x_max));
    } else if (choi->parsed()) {
      const auto cfg = load_config(c_choi.config, c_choi.ov);
      std::vector<double> durations;
      if (times_text)
        durations = parse_list(*times_text);
      else
        durations = {t0.value_or(0.2 * cfg.params.delay), t1.value_or(0.3 * cfg.params.delay)};
      emit(cfg, out, cmd_choi(cfg, durations, choi_mode));
    } else if (markov->parsed()) {
      const auto cfg = load_config(c_markov.config, c_markov.ov);
      out << cmd_markov_test(cfg, pairs_text, json_stdout, out);
    } else if (prob->parsed()) {
      const auto cfg = load_config(c_prob.config, c_prob.ov);
      emit(cfg, out, cmd_prob(cfg, schedule_text, prob_mode, initial));
    } else if (converge->parsed()) {
      const auto cfg = load_config(c_conv.config, c_conv.ov);
      emit(cfg, out, cmd_converge(cfg, rungs, dt0, t_end));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}

} // namespace hnm::cli
