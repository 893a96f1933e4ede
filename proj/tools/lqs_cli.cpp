// lqs: command-line front end for the linear quantum systems library.
// Exit codes: 0 success, 2 validation, 3 I/O, 4 numerical failure.

#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lqs/doubled.hpp"
#include "lqs/gaussian.hpp"
#include "lqs/io.hpp"
#include "lqs/kalman_filter.hpp"
#include "lqs/network.hpp"
#include "lqs/photon.hpp"
#include "lqs/structure.hpp"
#include "lqs/system.hpp"
#include "lqs/version.hpp"

namespace {

using namespace lqs;
using io::Json;

struct Options {
  std::string verb;
  std::vector<std::string> inputs;
  std::string out;
  std::string report;
  double tol = kDefaultTol;
  double rank_tol = kRankTol;
  double dt = 1e-3;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t path = 0;
  std::string grid;
  std::string form = "normalized";
  int fock = 60;
  int padding = kDefaultPadding;
};

std::vector<double> parse_grid(const std::string& spec, const std::string& fallback) {
  const std::string s = spec.empty() ? fallback : spec;
  const auto a = s.find(':'), b = s.rfind(':');
  if (a == std::string::npos || a == b) throw ParameterError("grid", 0.0, "--grid must look like start:stop:count");
  double lo = 0, hi = 0;
  long n = 0;
  try {
    lo = std::stod(s.substr(0, a));
    hi = std::stod(s.substr(a + 1, b - a - 1));
    n = std::stol(s.substr(b + 1));
  } catch (const std::exception&) {
    throw ParameterError("grid", 0.0, "--grid must look like start:stop:count");
  }
  if (n < 1 || n > 10000000) throw ParameterError("grid", static_cast<double>(n), "--grid count out of range");
  std::vector<double> g(n);
  for (long k = 0; k < n; ++k) g[k] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return g;
}

Json header(const Options& o) {
  Json j;
  j["tool"] = "lqs";
  j["version"] = kVersion;
  j["command"] = o.verb;
  j["inputs"] = o.inputs;
  j["tolerances"] = {{"tol", o.tol}, {"rank_tol", o.rank_tol}};
  return j;
}

const std::string& input(const Options& o, size_t i, const char* what) {
  if (o.inputs.size() <= i) throw ValidationError(std::string("missing input: ") + what);
  return o.inputs[i];
}

// JSON verbs: report goes to --out when given, always to stdout.
void emit_report(const Options& o, const Json& report, io::OutputSet& outs) {
  const std::string text = report.dump(2) + "\n";
  if (!o.out.empty()) outs.write(o.out, text);
  std::cout << text;
}

// CSV verbs: table goes to --out (or stdout), report to --report and to stdout when --out is set.
void emit_table(const Options& o, const io::CsvTable& t, const Json& report, io::OutputSet& outs) {
  const std::string csv = t.to_string();
  const std::string text = report.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << csv;
  } else {
    outs.write(o.out, csv);
    std::cout << text;
  }
  if (!o.report.empty()) outs.write(o.report, text);
}

std::vector<std::string> kalman_names(const KalmanDims& d) {
  std::vector<std::string> n;
  for (int i = 1; i <= d.n_h; ++i) n.push_back("qh" + std::to_string(i));
  for (int i = 1; i <= d.n_h; ++i) n.push_back("ph" + std::to_string(i));
  for (int i = 1; i <= d.n_co; ++i) n.push_back("qco" + std::to_string(i));
  for (int i = 1; i <= d.n_co; ++i) n.push_back("pco" + std::to_string(i));
  for (int i = 1; i <= d.n_cbar_obar; ++i) n.push_back("qd" + std::to_string(i));
  for (int i = 1; i <= d.n_cbar_obar; ++i) n.push_back("pd" + std::to_string(i));
  return n;
}

Json pick(const std::vector<std::string>& names, const std::vector<int>& idx) {
  Json a = Json::array();
  for (int i : idx) a.push_back(names.at(i));
  return a;
}

void cmd_realizability(const Options& o, io::OutputSet& outs) {
  const PhysicalParams p = io::parse_system_file(input(o, 0, "system file"));
  const StateSpace ss = build_state_space(p, o.tol);
  Json r = header(o);
  r["n"] = p.n;
  r["m"] = p.m;
  r["l"] = p.l;
  r["passive"] = is_passive(p, o.tol);
  r["realizability"] = io::realizability_to_json(check_realizability(ss, o.tol));
  const HurwitzResult h = is_hurwitz(to_quadrature(ss), o.tol);
  r["hurwitz"] = {{"stable", h.stable}, {"abscissa", h.abscissa}};
  emit_report(o, r, outs);
}

void cmd_quadrature(const Options& o, io::OutputSet& outs) {
  const PhysicalParams p = io::parse_system_file(input(o, 0, "system file"));
  const QuadratureSystem qs = to_quadrature(build_state_space(p, o.tol));
  Json r = header(o);
  r["system"] = io::quadrature_to_json(qs);
  r["realizability"] = io::realizability_to_json(check_realizability(qs, o.tol));
  emit_report(o, r, outs);
}

void cmd_transfer(const Options& o, io::OutputSet& outs) {
  const PhysicalParams p = io::parse_system_file(input(o, 0, "system file"));
  const StateSpace ss = build_state_space(p, o.tol);
  const auto w = parse_grid(o.grid, "-10:10:201");
  const auto Xi = transfer_grid(ss, w);
  io::CsvTable t;
  t.header = {"omega", "unitarity_residual"};
  double worst = 0.0;
  const CMat I = CMat::Identity(2 * p.m, 2 * p.m);
  for (size_t k = 0; k < w.size(); ++k) {
    const double res = opnorm(CMat(flat_adjoint(Xi[k]) * Xi[k] - I));
    worst = std::max(worst, res);
    t.rows.push_back({w[k], res});
  }
  Json r = header(o);
  r["points"] = w.size();
  r["max_unitarity_residual"] = worst;
  r["passes"] = worst <= o.tol;
  emit_table(o, t, r, outs);
}

void cmd_decompose(const Options& o, io::OutputSet& outs) {
  const PhysicalParams p = io::parse_system_file(input(o, 0, "system file"));
  const QuadratureSystem qs = to_quadrature(build_state_space(p, o.tol));
  const KalmanDecomposition kd = kalman_decompose(qs, o.rank_tol);
  const DecomposedDynamics dd = decomposed_dynamics(kd);
  const auto names = kalman_names(kd.dims);
  Json r = header(o);
  r["dims"] = {{"n_h", kd.dims.n_h}, {"n_co", kd.dims.n_co}, {"n_cbar_obar", kd.dims.n_cbar_obar}};
  r["coordinates"] = names;
  r["T"] = io::to_json(kd.T);
  r["A_bar"] = io::to_json(kd.A_bar);
  r["B_bar"] = io::to_json(kd.B_bar);
  r["C_bar"] = io::to_json(kd.C_bar);
  r["H_bar"] = io::to_json(kd.H_bar);
  r["labels"] = {{"qnd", pick(names, kd.qnd_indices)},
                 {"qmfs", pick(names, kd.qmfs_indices)},
                 {"dfs", pick(names, kd.dfs_indices)}};
  r["residuals"] = {{"pattern", kd.pattern_residual},
                    {"orthogonality", kd.orthogonality_residual},
                    {"symplectic", kd.symplectic_residual}};
  r["scattering_normalized"] = kd.scattering_normalized;
  r["dynamics"] = dd.to_text();
  r["warnings"] = kd.warnings;
  emit_report(o, r, outs);
}

void cmd_bae(const Options& o, io::OutputSet& outs) {
  const PhysicalParams p = io::parse_system_file(input(o, 0, "system file"));
  const QuadratureSystem qs = to_quadrature(build_state_space(p, o.tol));
  const KalmanDecomposition kd = kalman_decompose(qs, o.rank_tol);
  Json r = header(o);
  auto one = [&](BaeDirection d) {
    const BaeResult b = check_bae(kd, d, default_bae_samples(), o.tol);
    return Json{{"holds", b.holds},
                {"max_residual", b.max_residual},
                {"direct_residual", b.direct_residual},
                {"consistent", b.consistent},
                {"points_used", b.points_used},
                {"notes", b.notes}};
  };
  r["dims"] = {{"n_h", kd.dims.n_h}, {"n_co", kd.dims.n_co}, {"n_cbar_obar", kd.dims.n_cbar_obar}};
  r["p_in_to_q_out"] = one(BaeDirection::p_in_to_q_out);
  r["q_in_to_p_out"] = one(BaeDirection::q_in_to_p_out);
  emit_report(o, r, outs);
}

void cmd_gaussian(const Options& o, io::OutputSet& outs) {
  const GaussianState s = io::parse_state_file(input(o, 0, "state file"));
  Json r = header(o);
  const ValidityResult v = is_valid(s, o.tol);
  r["n"] = s.n();
  r["valid"] = v.valid;
  r["min_eig"] = v.min_eig();
  r["pure"] = is_pure(s, o.tol);
  r["symplectic_eigenvalues"] = symplectic_eigenvalues(s.cov);
  io::CsvTable t;
  if (s.n() == 1) {
    r["heisenberg_product"] = std::sqrt(s.cov(0, 0) * s.cov(1, 1));
    if (v.valid) {
      const UncertaintyReport u = uncertainty_report(s, o.fock);
      r["uncertainty"] = {{"U_q", u.U_q},     {"U_p", u.U_p}, {"luo_product", u.luo_lhs},
                          {"luo_bound", u.luo_rhs}, {"I_q", u.I_q}, {"I_p", u.I_p},
                          {"V_q", u.V_q},     {"V_p", u.V_p}, {"fock_dim", u.N},
                          {"moment_residual", u.moment_residual}, {"warnings", u.warnings}};
    }
    const auto g = parse_grid(o.grid, "-4:4:81");
    t.header = {"w1", "w2", "W"};
    RVec w(2);
    for (double a : g)
      for (double b : g) {
        w << a, b;
        t.rows.push_back({a, b, wigner(s, w)});
      }
  } else {
    t.header = {"w1", "w2", "W"};
  }
  if (o.out.empty()) {
    emit_report(o, r, outs);
  } else {
    if (s.n() != 1) throw ValidationError("gaussian: the Wigner grid export needs a single-mode state");
    emit_table(o, t, r, outs);
  }
}

void cmd_filter(const Options& o, io::OutputSet& outs) {
  const PhysicalParams p = io::parse_system_file(input(o, 0, "system file"));
  const QuadratureSystem qs = to_quadrature(build_state_space(p, o.tol));
  const GaussianState s0 = o.inputs.size() > 1 ? io::parse_state_file(o.inputs[1]) : GaussianState::vacuum(p.n);
  if (s0.n() != p.n) throw DimensionError("filter-sim: initial state has the wrong number of modes");
  FilterForm form;
  if (o.form == "normalized")
    form = FilterForm::normalized;
  else if (o.form == "as_published")
    form = FilterForm::as_published;
  else
    throw ParameterError("form", 0.0, "--form must be normalized or as_published");
  const FilterConfig cfg = make_filter_config(qs, o.dt, o.horizon, o.seed, s0.mean, s0.cov, form);
  const FilterTrajectory tr = simulate_filter(cfg, o.path);
  const int N = 2 * p.n, m = static_cast<int>(cfg.C1.rows());
  io::CsvTable t;
  t.header = {"t"};
  for (int i = 1; i <= N; ++i) t.header.push_back("pi_" + std::to_string(i));
  for (int i = 1; i <= N; ++i)
    for (int k = i; k <= N; ++k) t.header.push_back("V_" + std::to_string(i) + std::to_string(k));
  for (int i = 1; i <= m; ++i) t.header.push_back("dnu_" + std::to_string(i));
  double min_eig = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < tr.times.size(); ++k) {
    std::vector<double> row{tr.times[k]};
    for (int i = 0; i < N; ++i) row.push_back(tr.mean[k](i));
    for (int i = 0; i < N; ++i)
      for (int c = i; c < N; ++c) row.push_back(tr.cov[k](i, c));
    // innovation over the step ending at t_k; zero on the first row
    for (int i = 0; i < m; ++i) row.push_back(k == 0 ? 0.0 : tr.innovation[k - 1](i));
    t.rows.push_back(std::move(row));
  }
  for (const auto& V : tr.cov) min_eig = std::min(min_eig, is_valid(GaussianState{RVec::Zero(N), V}, o.tol).min_eig());
  Json r = header(o);
  r["dt"] = o.dt;
  r["horizon"] = o.horizon;
  r["seed"] = o.seed;
  r["path"] = o.path;
  r["form"] = o.form;
  r["steps"] = cfg.steps();
  r["min_validity_eig"] = min_eig;
  emit_table(o, t, r, outs);
}

void cmd_pulse(const Options& o, io::OutputSet& outs) {
  const PhysicalParams p = io::parse_system_file(input(o, 0, "system file"));
  const PulseShape mu = io::parse_pulse_file(input(o, 1, "pulse file"));
  // the pulse enters channel 1, the other channels carry vacuum
  std::vector<PulseShape> in(p.m, mu);
  for (int i = 1; i < p.m; ++i) in[i].samples.setZero();
  const PulseResponse pr = output_pulse_passive(p, in, o.padding);
  io::CsvTable t;
  t.header = {"t", "re_in", "im_in"};
  for (int i = 0; i < p.m; ++i) {
    const std::string suf = p.m == 1 ? "" : "_" + std::to_string(i + 1);
    t.header.push_back("re_out" + suf);
    t.header.push_back("im_out" + suf);
  }
  double out_norm2 = 0.0;
  for (const auto& q : pr.pulses) out_norm2 += q.norm() * q.norm();
  for (Eigen::Index k = 0; k < mu.samples.size(); ++k) {
    std::vector<double> row{mu.time(k), mu.samples(k).real(), mu.samples(k).imag()};
    for (const auto& q : pr.pulses) {
      row.push_back(q.samples(k).real());
      row.push_back(q.samples(k).imag());
    }
    t.rows.push_back(std::move(row));
  }
  Json r = header(o);
  r["norm_in"] = mu.norm();
  r["norm_out"] = std::sqrt(out_norm2);
  r["nyquist_deviation"] = pr.nyquist_deviation;
  r["padding"] = o.padding;
  r["warnings"] = pr.warnings;
  emit_table(o, t, r, outs);
}

void cmd_network(const Options& o, io::OutputSet& outs) {
  const io::NetworkDescription d = io::parse_network_file(input(o, 0, "network file"));
  Json r = header(o);
  if (d.cascade) {
    Json c;
    c["node"] = io::node_to_json(*d.cascade);
    Json st = Json::array();
    for (const auto& s : d.stages)
      st.push_back({{"stage", s.description},
                    {"modes", s.modes},
                    {"H_interaction", io::to_json(s.H_interaction)},
                    {"h_interaction", io::to_json(s.h_interaction)}});
    c["stages"] = st;
    const NodeQuadrature nq = node_quadrature(*d.cascade);
    c["quadrature"] = io::quadrature_to_json(nq.qs);
    c["drift"] = io::to_json(nq.drift);
    c["output_offset"] = io::to_json(nq.output_offset);
    c["realizability"] = io::realizability_to_json(check_realizability(nq.qs, o.tol));
    r["cascade"] = c;
  }
  if (d.plant) {
    const ClosedLoopSystem cl = closed_loop(*d.plant, *d.controller, d.coupling ? &*d.coupling : nullptr);
    Json c = io::closed_loop_to_json(cl);
    c["realizability"] = io::realizability_to_json(check_realizability(cl.as_system(), o.tol));
    r["closed_loop"] = c;
  }
  emit_report(o, r, outs);
}

int run(const Options& o) {
  io::OutputSet outs;
  try {
    if (o.verb == "realizability") cmd_realizability(o, outs);
    else if (o.verb == "quadrature") cmd_quadrature(o, outs);
    else if (o.verb == "transfer") cmd_transfer(o, outs);
    else if (o.verb == "decompose") cmd_decompose(o, outs);
    else if (o.verb == "bae") cmd_bae(o, outs);
    else if (o.verb == "gaussian") cmd_gaussian(o, outs);
    else if (o.verb == "filter-sim") cmd_filter(o, outs);
    else if (o.verb == "pulse") cmd_pulse(o, outs);
    else if (o.verb == "network") cmd_network(o, outs);
    return 0;
  } catch (const ValidationError& e) {
    outs.rollback();
    std::cerr << "lqs: validation error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    outs.rollback();
    std::cerr << "lqs: I/O error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    outs.rollback();
    std::cerr << "lqs: numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    outs.rollback();
    std::cerr << "lqs: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear quantum systems toolkit"};
  app.set_version_flag("--version", std::string(lqs::kVersion));
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--tol", o.tol, "Residual tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Output file");
  };
  struct Verb {
    const char* name;
    const char* help;
    std::vector<const char*> inputs;
  };
  const std::vector<Verb> verbs = {
      {"realizability", "Check physical realizability of a system file", {"system"}},
      {"quadrature", "Print the real quadrature matrices", {"system"}},
      {"transfer", "Unitarity residual of the transfer function on a frequency grid (CSV)", {"system"}},
      {"decompose", "Quantum Kalman decomposition report", {"system"}},
      {"bae", "Back-action evasion check in both quadrature directions", {"system"}},
      {"gaussian", "Validity, purity and uncertainty report of a Gaussian state", {"state"}},
      {"filter-sim", "Simulate the quantum Kalman filter (CSV trajectory)", {"system", "state?"}},
      {"pulse", "Single-photon output pulse of a passive system (CSV)", {"system", "pulse"}},
      {"network", "Assemble a cascade or closed-loop network", {"network"}},
  };
  for (const auto& v : verbs) {
    CLI::App* sub = app.add_subcommand(v.name, v.help);
    common(sub);
    std::string what = "Input files:";
    for (const char* i : v.inputs) what += std::string(" ") + i;
    sub->add_option("inputs", o.inputs, what)->required()->check(CLI::ExistingFile);
    const std::string name = v.name;
    if (name == "decompose" || name == "bae")
      sub->add_option("--rank-tol", o.rank_tol, "Rank tolerance for subspace computations")
          ->check(CLI::PositiveNumber);
    if (name == "transfer" || name == "gaussian") sub->add_option("--grid", o.grid, "start:stop:count");
    if (name == "transfer" || name == "filter-sim" || name == "pulse" || name == "gaussian")
      sub->add_option("--report", o.report, "Also write the JSON report here");
    if (name == "gaussian") sub->add_option("--fock", o.fock, "Fock truncation")->check(CLI::Range(2, 512));
    if (name == "pulse") sub->add_option("--padding", o.padding, "Zero-padding factor")->check(CLI::Range(1, 64));
    if (name == "filter-sim") {
      sub->add_option("--dt", o.dt, "Time step")->check(CLI::PositiveNumber);
      sub->add_option("--horizon", o.horizon, "Simulated time")->check(CLI::NonNegativeNumber);
      sub->add_option("--seed", o.seed, "Random seed");
      sub->add_option("--path", o.path, "Path index within the seed's stream");
      sub->add_option("--form", o.form, "normalized or as_published")
          ->check(CLI::IsMember({"normalized", "as_published"}));
    }
    sub->callback([&o, name] { o.verb = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    // usage problems are validation failures; missing files are I/O
    if (rc == 0) return 0;
    if (std::string(e.what()).find("does not exist") != std::string::npos) return 3;
    return 2;
  }
  return run(o);
}
