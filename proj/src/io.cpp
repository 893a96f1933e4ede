#include "lqs/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace lqs::io {

namespace {

std::string idx(const std::string& path, Eigen::Index i) { return path + "[" + std::to_string(i) + "]"; }

const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path + "." + key + ": missing field");
  return *it;
}

int get_int(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_number_integer()) throw SchemaError(path + "." + key + ": expected an integer");
  return v.get<int>();
}

double get_double(const Json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path + ": expected a number");
  return v.get<double>();
}

double get_double(const Json& j, const std::string& key, const std::string& path) {
  return get_double(require(j, key, path), path + "." + key);
}

cplx get_cplx(const Json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw SchemaError(path + ": expected a number or an [re, im] pair");
}

Json cplx_json(cplx z) { return Json::array({z.real(), z.imag()}); }

std::vector<std::string> string_list(const Json& v, const std::string& path) {
  if (!v.is_array()) throw SchemaError(path + ": expected an array of strings");
  std::vector<std::string> out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) throw SchemaError(idx(path, i) + ": expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

std::vector<int> int_list(const Json& v, const std::string& path) {
  if (!v.is_array()) throw SchemaError(path + ": expected an array of integers");
  std::vector<int> out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer()) throw SchemaError(idx(path, i) + ": expected an integer");
    out.push_back(v[i].get<int>());
  }
  return out;
}

}  // namespace

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json to_json(const CMat& X) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index k = 0; k < X.cols(); ++k) r.push_back(cplx_json(X(i, k)));
    rows.push_back(std::move(r));
  }
  return rows;
}

Json to_json(const RMat& X) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index k = 0; k < X.cols(); ++k) r.push_back(X(i, k));
    rows.push_back(std::move(r));
  }
  return rows;
}

Json to_json(const RVec& x) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(x(i));
  return a;
}

Json to_json(const CVec& x) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(cplx_json(x(i)));
  return a;
}

CMat cmat_from_json(const Json& j, const std::string& path, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array()) throw SchemaError(path + ": expected an array of rows");
  // an empty matrix may be written as []
  if (j.empty() && (rows == 0 || cols == 0)) return CMat::Zero(rows, cols);
  if (static_cast<Eigen::Index>(j.size()) != rows)
    throw SchemaError(path + ": expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
  CMat X(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& r = j[i];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols)
      throw SchemaError(idx(path, i) + ": expected a row of " + std::to_string(cols) + " entries");
    for (Eigen::Index k = 0; k < cols; ++k) X(i, k) = get_cplx(r[k], idx(idx(path, i), k));
  }
  return X;
}

RMat rmat_from_json(const Json& j, const std::string& path, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array()) throw SchemaError(path + ": expected an array of rows");
  if (j.empty() && (rows == 0 || cols == 0)) return RMat::Zero(rows, cols);
  if (static_cast<Eigen::Index>(j.size()) != rows)
    throw SchemaError(path + ": expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
  RMat X(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& r = j[i];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols)
      throw SchemaError(idx(path, i) + ": expected a row of " + std::to_string(cols) + " entries");
    for (Eigen::Index k = 0; k < cols; ++k) X(i, k) = get_double(r[k], idx(idx(path, i), k));
  }
  return X;
}

CVec cvec_from_json(const Json& j, const std::string& path, Eigen::Index size) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size)
    throw SchemaError(path + ": expected an array of " + std::to_string(size) + " entries");
  CVec x(size);
  for (Eigen::Index i = 0; i < size; ++i) x(i) = get_cplx(j[i], idx(path, i));
  return x;
}

RVec rvec_from_json(const Json& j, const std::string& path, Eigen::Index size) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size)
    throw SchemaError(path + ": expected an array of " + std::to_string(size) + " entries");
  RVec x(size);
  for (Eigen::Index i = 0; i < size; ++i) x(i) = get_double(j[i], idx(path, i));
  return x;
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  try {
    return Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw SchemaError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

void check_header(const Json& j, const std::string& kind) {
  if (!j.is_object()) throw SchemaError("top level: expected an object");
  const auto it = j.find("schema_version");
  if (it == j.end()) throw SchemaError("schema_version: missing field");
  if (!it->is_number_integer() || it->get<int>() != kSchemaVersion)
    throw SchemaError("schema_version: unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
  if (!kind.empty()) {
    const auto k = j.find("kind");
    if (k != j.end() && (!k->is_string() || k->get<std::string>() != kind))
      throw SchemaError("kind: expected \"" + kind + "\"");
  }
}

Json params_to_json(const PhysicalParams& p) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "system";
  j["n"] = p.n;
  j["m"] = p.m;
  j["l"] = p.l;
  j["S"] = to_json(p.S);
  j["C_minus"] = to_json(p.C_minus);
  j["C_plus"] = to_json(p.C_plus);
  j["Omega_minus"] = to_json(p.Omega_minus);
  j["Omega_plus"] = to_json(p.Omega_plus);
  j["K"] = to_json(p.K);
  return j;
}

PhysicalParams params_from_json(const Json& j) {
  check_header(j, "system");
  const std::string s = "system";
  const int n = get_int(j, "n", s), m = get_int(j, "m", s);
  const int l = j.contains("l") ? get_int(j, "l", s) : 0;
  if (n < 0 || m < 0 || l < 0) throw SchemaError("system: n, m, l must be non-negative");
  PhysicalParams p = make_params(n, m, l);
  p.S = cmat_from_json(require(j, "S", s), "system.S", m, m);
  p.C_minus = cmat_from_json(require(j, "C_minus", s), "system.C_minus", m, n);
  p.C_plus = j.contains("C_plus") ? cmat_from_json(j["C_plus"], "system.C_plus", m, n) : CMat::Zero(m, n);
  p.Omega_minus = cmat_from_json(require(j, "Omega_minus", s), "system.Omega_minus", n, n);
  p.Omega_plus =
      j.contains("Omega_plus") ? cmat_from_json(j["Omega_plus"], "system.Omega_plus", n, n) : CMat::Zero(n, n);
  p.K = j.contains("K") ? cmat_from_json(j["K"], "system.K", 2 * n, 2 * l) : CMat::Zero(2 * n, 2 * l);
  p.validate();
  return p;
}

PhysicalParams parse_system_file(const fs::path& path) { return params_from_json(read_json(path)); }

Json state_to_json(const GaussianState& s) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "state";
  j["mean"] = to_json(s.mean);
  j["cov"] = to_json(s.cov);
  return j;
}

GaussianState state_from_json(const Json& j) {
  check_header(j, "state");
  const Json& mean = require(j, "mean", "state");
  if (!mean.is_array() || mean.size() % 2) throw SchemaError("state.mean: expected an array of even length");
  const auto N = static_cast<Eigen::Index>(mean.size());
  GaussianState s;
  s.mean = rvec_from_json(mean, "state.mean", N);
  s.cov = rmat_from_json(require(j, "cov", "state"), "state.cov", N, N);
  validate_state(s);
  return s;
}

GaussianState parse_state_file(const fs::path& path) { return state_from_json(read_json(path)); }

Json pulse_to_json(const PulseShape& p) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "pulse";
  j["t0"] = p.t0;
  j["dt"] = p.dt;
  j["samples"] = to_json(p.samples);
  return j;
}

PulseShape pulse_from_json(const Json& j) {
  check_header(j, "pulse");
  PulseShape p;
  p.t0 = get_double(j, "t0", "pulse");
  p.dt = get_double(j, "dt", "pulse");
  if (j.contains("samples")) {
    const Json& a = j["samples"];
    if (!a.is_array()) throw SchemaError("pulse.samples: expected an array");
    p.samples = cvec_from_json(a, "pulse.samples", static_cast<Eigen::Index>(a.size()));
  } else {
    const Json& shape = require(j, "shape", "pulse");
    if (!shape.is_string() || shape.get<std::string>() != "gaussian")
      throw SchemaError("pulse.shape: only \"gaussian\" is supported");
    const double c = get_double(j, "center", "pulse");
    const double w = get_double(j, "width", "pulse");
    const int L = get_int(j, "L", "pulse");
    if (!(w > 0.0)) throw SchemaError("pulse.width: must be positive");
    if (L <= 0) throw SchemaError("pulse.L: must be positive");
    // unit-norm amplitude with |xi|^2 a normal density of standard deviation w
    const double amp = std::pow(2.0 * M_PI * w * w, -0.25);
    p.samples.resize(L);
    for (int k = 0; k < L; ++k) {
      const double t = p.time(k) - c;
      p.samples(k) = amp * std::exp(-t * t / (4.0 * w * w));
    }
  }
  p.validate();
  return p;
}

PulseShape parse_pulse_file(const fs::path& path) { return pulse_from_json(read_json(path)); }

namespace {

SLHNode node_from_entry(const Json& e, const std::string& path, const fs::path& base) {
  SLHNode g;
  const std::string label = require(e, "label", path).get<std::string>();
  if (e.contains("system")) {
    const Json& sys = e["system"];
    PhysicalParams p;
    if (sys.is_string()) {
      fs::path f = sys.get<std::string>();
      if (f.is_relative()) f = base / f;
      p = parse_system_file(f);
    } else {
      p = params_from_json(sys);
    }
    std::vector<std::string> modes;
    if (e.contains("modes")) {
      modes = string_list(e["modes"], path + ".modes");
    } else {
      for (int i = 0; i < p.n; ++i) modes.push_back(label + "_" + std::to_string(i + 1));
    }
    g = node_from_params(p, modes, label);
  } else {
    g.label = label;
    g.modes = string_list(require(e, "modes", path), path + ".modes");
    const int m = get_int(e, "m", path);
    const auto n = static_cast<Eigen::Index>(g.modes.size());
    g.S = e.contains("S") ? cmat_from_json(e["S"], path + ".S", m, m) : CMat::Identity(m, m);
    g.Lambda = cmat_from_json(require(e, "Lambda", path), path + ".Lambda", m, 2 * n);
    g.H = e.contains("H") ? rmat_from_json(e["H"], path + ".H", 2 * n, 2 * n) : RMat::Zero(2 * n, 2 * n);
    g.lambda0 = CVec::Zero(m);
    g.h = RVec::Zero(2 * n);
  }
  if (e.contains("offset")) g.lambda0 = cvec_from_json(e["offset"], path + ".offset", g.m());
  if (e.contains("h")) g.h = rvec_from_json(e["h"], path + ".h", 2 * g.n());
  g.validate();
  return g;
}

SLHNode cascade_element(const Json& e, const std::string& path, const std::map<std::string, SLHNode>& nodes) {
  auto lookup = [&](const std::string& name) {
    const auto it = nodes.find(name);
    if (it == nodes.end()) throw SchemaError(path + ": unknown node \"" + name + "\"");
    return it->second;
  };
  if (e.is_string()) return lookup(e.get<std::string>());
  if (!e.is_object() || e.size() != 1) throw SchemaError(path + ": expected a node name or a one-key object");
  const auto& [key, v] = *e.items().begin();
  if (key == "node") return lookup(v.get<std::string>());
  if (key == "phase") return static_node(phase_shifter(get_double(v, path + ".phase")).unitary, "phase");
  if (key == "beamsplitter") {
    const double th = get_double(v, "theta", path + ".beamsplitter");
    const double ph = v.contains("phase") ? get_double(v, "phase", path + ".beamsplitter") : 0.0;
    return static_node(beamsplitter(th, ph).unitary, "bs");
  }
  if (key == "unitary") {
    if (!v.is_array()) throw SchemaError(path + ".unitary: expected a matrix");
    const auto m = static_cast<Eigen::Index>(v.size());
    return static_node(cmat_from_json(v, path + ".unitary", m, m), "unitary");
  }
  if (key == "identity") {
    const Json& k = v;
    if (!k.is_number_integer() || k.get<int>() < 0) throw SchemaError(path + ".identity: expected a channel count");
    return identity_channels(k.get<int>());
  }
  if (key == "concat") {
    if (!v.is_array() || v.empty()) throw SchemaError(path + ".concat: expected a non-empty array");
    SLHNode acc = cascade_element(v[0], idx(path + ".concat", 0), nodes);
    for (size_t i = 1; i < v.size(); ++i)
      acc = concatenation(acc, cascade_element(v[i], idx(path + ".concat", i), nodes));
    return acc;
  }
  throw SchemaError(path + ": unknown element \"" + key + "\"");
}

PartitionedSystem partition_entry(const Json& e, const std::string& path, const std::map<std::string, SLHNode>& nodes,
                                  const fs::path& base) {
  PartitionedSystem ps;
  if (e.contains("node")) {
    const std::string name = e["node"].get<std::string>();
    const auto it = nodes.find(name);
    if (it == nodes.end()) throw SchemaError(path + ".node: unknown node \"" + name + "\"");
    ps.qs = node_quadrature(it->second).qs;
  } else {
    const Json& sys = require(e, "system", path);
    fs::path f;
    PhysicalParams p;
    if (sys.is_string()) {
      f = sys.get<std::string>();
      if (f.is_relative()) f = base / f;
      p = parse_system_file(f);
    } else {
      p = params_from_json(sys);
    }
    ps.qs = to_quadrature(build_state_space(p));
  }
  const int m = ps.qs.m();
  // unlabeled channels default to the signal-plus-vacuum group
  ps.input_group = e.contains("inputs") ? int_list(e["inputs"], path + ".inputs") : std::vector<int>(m, 1);
  ps.output_group = e.contains("outputs") ? int_list(e["outputs"], path + ".outputs") : std::vector<int>(m, 1);
  ps.validate();
  return ps;
}

}  // namespace

NetworkDescription network_from_json(const Json& j, const fs::path& base) {
  check_header(j, "network");
  NetworkDescription d;
  if (j.contains("nodes")) {
    const Json& ns = j["nodes"];
    if (!ns.is_array()) throw SchemaError("network.nodes: expected an array");
    for (size_t i = 0; i < ns.size(); ++i) {
      SLHNode g = node_from_entry(ns[i], idx("network.nodes", i), base);
      if (d.nodes.count(g.label)) throw SchemaError(idx("network.nodes", i) + ": duplicate label \"" + g.label + "\"");
      d.nodes.emplace(g.label, std::move(g));
    }
  }
  if (j.contains("cascade")) {
    const Json& c = j["cascade"];
    if (!c.is_array() || c.empty()) throw SchemaError("network.cascade: expected a non-empty array");
    SLHNode acc = cascade_element(c[0], "network.cascade[0]", d.nodes);
    for (size_t i = 1; i < c.size(); ++i) {
      const SLHNode next = cascade_element(c[i], idx("network.cascade", i), d.nodes);
      SeriesResult r = series_detailed(next, acc);
      d.stages.push_back({next.label + " after " + acc.label, r.H_interaction, r.h_interaction, r.node.modes});
      acc = std::move(r.node);
    }
    d.cascade = std::move(acc);
  }
  if (j.contains("loop")) {
    const Json& l = j["loop"];
    d.plant = partition_entry(require(l, "plant", "network.loop"), "network.loop.plant", d.nodes, base);
    d.controller = partition_entry(require(l, "controller", "network.loop"), "network.loop.controller", d.nodes, base);
    if (l.contains("coupling")) {
      const Json& c = l["coupling"];
      const int np = d.plant->qs.n(), nk = d.controller->qs.n();
      d.coupling = direct_coupling(cmat_from_json(require(c, "K_minus", "network.loop.coupling"),
                                                  "network.loop.coupling.K_minus", nk, np),
                                   cmat_from_json(require(c, "K_plus", "network.loop.coupling"),
                                                  "network.loop.coupling.K_plus", nk, np));
    }
  }
  if (!d.cascade && !d.plant) throw SchemaError("network: needs a \"cascade\" or a \"loop\" section");
  return d;
}

NetworkDescription parse_network_file(const fs::path& path) {
  return network_from_json(read_json(path), path.parent_path());
}

Json node_to_json(const SLHNode& g) {
  Json j;
  j["label"] = g.label;
  j["modes"] = g.modes;
  j["S"] = to_json(g.S);
  j["Lambda"] = to_json(g.Lambda);
  j["offset"] = to_json(g.lambda0);
  j["H"] = to_json(g.H);
  j["h"] = to_json(g.h);
  return j;
}

Json quadrature_to_json(const QuadratureSystem& qs) {
  Json j;
  j["A"] = to_json(qs.A);
  j["B"] = to_json(qs.B);
  j["C"] = to_json(qs.C);
  j["D"] = to_json(qs.D);
  j["E"] = to_json(qs.E);
  return j;
}

Json realizability_to_json(const RealizabilityReport& r) {
  Json j;
  j["passes"] = r.passes;
  j["residual_A"] = r.residual_A;
  j["residual_B"] = r.residual_B;
  j["passive_variant_used"] = r.passive_variant_used;
  if (r.passive_variant_used) {
    j["passive_residual_A"] = r.passive_residual_A;
    j["passive_residual_B"] = r.passive_residual_B;
  }
  j["tol"] = r.tol;
  return j;
}

Json closed_loop_to_json(const ClosedLoopSystem& cl) {
  Json j;
  j["n_p"] = cl.n_p;
  j["n_k"] = cl.n_k;
  j["A_cl"] = to_json(cl.A_cl);
  j["B_cl"] = to_json(cl.B_cl);
  j["E_cl"] = to_json(cl.E_cl);
  j["G_cl"] = to_json(cl.G_cl);
  j["C_cl"] = to_json(cl.C_cl);
  j["D_cl"] = to_json(cl.D_cl);
  j["C_out"] = to_json(cl.C_out);
  j["D_out"] = to_json(cl.D_out);
  j["noise_blocks"] = cl.noise_blocks;
  return j;
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("error writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place: " + path.string());
  }
}

std::string CsvTable::to_string() const {
  std::string s;
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) s += ',';
    s += header[i];
  }
  s += '\n';
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw DimensionError("csv: row width does not match header");
    for (size_t i = 0; i < r.size(); ++i) {
      if (i) s += ',';
      s += fmt17(r[i]);
    }
    s += '\n';
  }
  return s;
}

void write_csv(const fs::path& path, const CsvTable& table) { write_text_atomic(path, table.to_string()); }

void OutputSet::write(const fs::path& path, const std::string& content) {
  write_text_atomic(path, content);
  written_.push_back(path);
}

void OutputSet::rollback() noexcept {
  for (const auto& p : written_) {
    std::error_code ec;
    fs::remove(p, ec);
  }
  written_.clear();
}

}  // namespace lqs::io
