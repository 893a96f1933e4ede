#include "lqs/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lqs/doubled.hpp"

namespace lqs {

namespace {

// Embeds mode-indexed objects into a larger mode set; map[i] = new index of old mode i.
CMat embed_cols(const CMat& X, const std::vector<int>& map, int n_new) {
  const int n_old = static_cast<int>(map.size());
  CMat Y = CMat::Zero(X.rows(), 2 * n_new);
  for (int i = 0; i < n_old; ++i) {
    Y.col(map[i]) = X.col(i);
    Y.col(n_new + map[i]) = X.col(n_old + i);
  }
  return Y;
}

RMat embed_sym(const RMat& H, const std::vector<int>& map, int n_new) {
  const int n_old = static_cast<int>(map.size());
  RMat Y = RMat::Zero(2 * n_new, 2 * n_new);
  auto pos = [&](int k) { return k < n_old ? map[k] : n_new + map[k - n_old]; };
  for (int a = 0; a < 2 * n_old; ++a)
    for (int b = 0; b < 2 * n_old; ++b) Y(pos(a), pos(b)) = H(a, b);
  return Y;
}

RVec embed_vec(const RVec& h, const std::vector<int>& map, int n_new) {
  const int n_old = static_cast<int>(map.size());
  RVec y = RVec::Zero(2 * n_new);
  for (int i = 0; i < n_old; ++i) {
    y(map[i]) = h(i);
    y(n_new + map[i]) = h(n_old + i);
  }
  return y;
}

SLHNode embed(const SLHNode& g, const std::vector<std::string>& modes) {
  std::vector<int> map;
  for (const auto& md : g.modes) {
    const auto it = std::find(modes.begin(), modes.end(), md);
    map.push_back(static_cast<int>(it - modes.begin()));
  }
  const int n = static_cast<int>(modes.size());
  SLHNode out = g;
  out.modes = modes;
  out.Lambda = embed_cols(g.Lambda, map, n);
  out.H = embed_sym(g.H, map, n);
  out.h = embed_vec(g.h, map, n);
  return out;
}

std::vector<int> channels_in(const std::vector<int>& group, int g) {
  std::vector<int> c;
  for (size_t i = 0; i < group.size(); ++i)
    if (group[i] == g) c.push_back(static_cast<int>(i));
  return c;
}

// quadrature indices of a channel subset: q parts then p parts
std::vector<int> quad_idx(const std::vector<int>& ch, int m) {
  std::vector<int> idx;
  for (int c : ch) idx.push_back(c);
  for (int c : ch) idx.push_back(m + c);
  return idx;
}

RMat take_rows(const RMat& X, const std::vector<int>& r) {
  RMat Y(r.size(), X.cols());
  for (size_t i = 0; i < r.size(); ++i) Y.row(i) = X.row(r[i]);
  return Y;
}

RMat take_cols(const RMat& X, const std::vector<int>& c) {
  RMat Y(X.rows(), c.size());
  for (size_t i = 0; i < c.size(); ++i) Y.col(i) = X.col(c[i]);
  return Y;
}

RMat take(const RMat& X, const std::vector<int>& r, const std::vector<int>& c) { return take_cols(take_rows(X, r), c); }

RMat hcat(std::initializer_list<RMat> parts) {
  Eigen::Index rows = -1, cols = 0;
  for (const auto& p : parts) {
    if (rows < 0) rows = p.rows();
    cols += p.cols();
  }
  RMat Y(std::max<Eigen::Index>(rows, 0), cols);
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    Y.middleCols(c, p.cols()) = p;
    c += p.cols();
  }
  return Y;
}

RMat vcat(std::initializer_list<RMat> parts) {
  Eigen::Index cols = -1, rows = 0;
  for (const auto& p : parts) {
    if (cols < 0) cols = p.cols();
    rows += p.rows();
  }
  RMat Y(rows, std::max<Eigen::Index>(cols, 0));
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    Y.middleRows(r, p.rows()) = p;
    r += p.rows();
  }
  return Y;
}

// column order that lists the q parts of every block before the p parts
std::vector<int> qp_order(const std::vector<int>& blocks) {
  std::vector<int> q, p;
  int off = 0;
  for (int s : blocks) {
    for (int i = 0; i < s / 2; ++i) q.push_back(off + i);
    for (int i = 0; i < s / 2; ++i) p.push_back(off + s / 2 + i);
    off += s;
  }
  q.insert(q.end(), p.begin(), p.end());
  return q;
}

}  // namespace

int SLHNode::mode_index(const std::string& mode) const {
  const auto it = std::find(modes.begin(), modes.end(), mode);
  return it == modes.end() ? -1 : static_cast<int>(it - modes.begin());
}

void SLHNode::validate(double tol) const {
  const int nn = n(), mm = m();
  if (S.cols() != mm) throw DimensionError("node " + label + ": S must be square");
  if (Lambda.rows() != mm || Lambda.cols() != 2 * nn) throw DimensionError("node " + label + ": Lambda must be m x 2n");
  if (lambda0.size() != mm) throw DimensionError("node " + label + ": offset must have length m");
  if (H.rows() != 2 * nn || H.cols() != 2 * nn) throw DimensionError("node " + label + ": H must be 2n x 2n");
  if (h.size() != 2 * nn) throw DimensionError("node " + label + ": h must have length 2n");
  const double u = mm ? opnorm(CMat(S * S.adjoint() - CMat::Identity(mm, mm))) : 0.0;
  if (u > tol) throw ParameterError("S", u, "node " + label + ": S is not unitary");
  const double a = nn ? (H - H.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (a > tol) throw ParameterError("H", a, "node " + label + ": H is not symmetric");
  std::vector<std::string> sorted = modes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw CompositionError("node " + label + ": duplicate mode labels");
}

SLHNode node_from_params(const PhysicalParams& p, const std::vector<std::string>& modes, const std::string& label) {
  p.validate();
  if (static_cast<int>(modes.size()) != p.n) throw DimensionError("node_from_params: need one label per mode");
  SLHNode g;
  g.label = label;
  g.modes = modes;
  g.S = p.S;
  g.Lambda = coupling_lambda(p);
  g.lambda0 = CVec::Zero(p.m);
  g.H = hamiltonian_quadrature(p);
  g.h = RVec::Zero(2 * p.n);
  g.validate();
  return g;
}

PhysicalParams node_params(const SLHNode& g) {
  g.validate();
  const int n = g.n(), m = g.m();
  PhysicalParams p = make_params(n, m, 0);
  p.S = g.S;
  if (n > 0) {
    const CMat CC = g.Lambda * Vk(n);
    p.C_minus = CC.leftCols(n);
    p.C_plus = CC.rightCols(n);
    const CMat Om = Vk(n).adjoint() * g.H.cast<cplx>() * Vk(n);
    p.Omega_minus = 0.5 * (Om.topLeftCorner(n, n) + Om.topLeftCorner(n, n).adjoint());
    p.Omega_plus = 0.5 * (Om.topRightCorner(n, n) + Om.topRightCorner(n, n).transpose());
  }
  return p;
}

SLHNode static_node(const CMat& U, const std::string& label) {
  SLHNode g;
  g.label = label;
  g.S = U;
  g.Lambda = CMat::Zero(U.rows(), 0);
  g.lambda0 = CVec::Zero(U.rows());
  g.H = RMat::Zero(0, 0);
  g.h = RVec::Zero(0);
  g.validate();
  return g;
}

SLHNode identity_channels(int m) { return static_node(CMat::Identity(m, m), "id"); }

StaticComponent phase_shifter(double phi) {
  StaticComponent c;
  c.unitary = CMat::Constant(1, 1, std::polar(1.0, phi));
  return c;
}

StaticComponent beamsplitter(double theta, double phase) {
  StaticComponent c;
  c.unitary.resize(2, 2);
  const cplx e = std::polar(1.0, phase);
  c.unitary << std::cos(theta), -std::conj(e) * std::sin(theta), e * std::sin(theta), std::cos(theta);
  return c;
}

SLHNode apply_static(const StaticComponent& c, const SLHNode& g) { return series(static_node(c.unitary), g); }

SLHNode concatenation(const SLHNode& g1, const SLHNode& g2) {
  g1.validate();
  g2.validate();
  for (const auto& md : g2.modes)
    if (g1.mode_index(md) >= 0)
      throw CompositionError("concatenation: mode label '" + md + "' appears in both systems");
  std::vector<std::string> modes = g1.modes;
  modes.insert(modes.end(), g2.modes.begin(), g2.modes.end());
  const SLHNode a = embed(g1, modes), b = embed(g2, modes);
  const int m1 = g1.m(), m2 = g2.m();
  SLHNode out;
  out.label = g1.label + "+" + g2.label;
  out.modes = modes;
  out.S = CMat::Zero(m1 + m2, m1 + m2);
  out.S.topLeftCorner(m1, m1) = g1.S;
  out.S.bottomRightCorner(m2, m2) = g2.S;
  out.Lambda.resize(m1 + m2, a.Lambda.cols());
  out.Lambda << a.Lambda, b.Lambda;
  out.lambda0.resize(m1 + m2);
  out.lambda0 << g1.lambda0, g2.lambda0;
  out.H = a.H + b.H;
  out.h = a.h + b.h;
  return out;
}

SeriesResult series_detailed(const SLHNode& g2, const SLHNode& g1) {
  g1.validate();
  g2.validate();
  if (g1.m() != g2.m())
    throw DimensionError("series: channel counts differ (" + std::to_string(g2.m()) + " vs " + std::to_string(g1.m()) + ")");
  std::vector<std::string> modes = g1.modes;
  for (const auto& md : g2.modes)
    if (g1.mode_index(md) < 0) modes.push_back(md);
  const SLHNode a = embed(g1, modes), b = embed(g2, modes);
  SeriesResult r;
  SLHNode& out = r.node;
  out.label = g2.label + "<" + g1.label;
  out.modes = modes;
  out.S = g2.S * g1.S;
  out.Lambda = b.Lambda + g2.S * a.Lambda;
  out.lambda0 = g2.lambda0 + g2.S * g1.lambda0;
  // (1/2i)(L2^dag S2 L1 - L1^dag S2^dag L2); the antisymmetric part of the
  // quadratic coefficient only contributes a constant
  const CMat M = (b.Lambda.adjoint() * g2.S * a.Lambda - a.Lambda.adjoint() * g2.S.adjoint() * b.Lambda) / cplx(0.0, 2.0);
  r.H_interaction = M.real() + M.real().transpose();
  const CVec w = b.Lambda.adjoint() * (g2.S * g1.lambda0) + a.Lambda.transpose() * (g2.S.transpose() * g2.lambda0.conjugate());
  r.h_interaction = w.imag();
  out.H = a.H + b.H + r.H_interaction;
  out.h = a.h + b.h + r.h_interaction;
  return r;
}

SLHNode series(const SLHNode& g2, const SLHNode& g1) { return series_detailed(g2, g1).node; }

SLHNode reorder_modes(const SLHNode& g, const std::vector<std::string>& order) {
  if (order.size() != g.modes.size()) throw DimensionError("reorder_modes: order must list every mode once");
  for (const auto& md : order)
    if (g.mode_index(md) < 0) throw DimensionError("reorder_modes: unknown mode '" + md + "'");
  std::vector<std::string> s = order;
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw DimensionError("reorder_modes: repeated mode");
  return embed(g, order);
}

NodeQuadrature node_quadrature(const SLHNode& g) {
  const PhysicalParams p = node_params(g);
  NodeQuadrature q;
  q.qs = to_quadrature(build_state_space(p));
  const int n = g.n(), m = g.m();
  RVec heff = g.h;
  if (n > 0 && m > 0) heff += (g.Lambda.adjoint() * g.lambda0).imag();
  q.drift = n ? RVec(JJ(n) * heff) : RVec::Zero(0);
  q.output_offset.resize(2 * m);
  q.output_offset << std::sqrt(2.0) * g.lambda0.real(), std::sqrt(2.0) * g.lambda0.imag();
  return q;
}

DirectCoupling direct_coupling(const CMat& Km, const CMat& Kp) {
  if (Km.rows() != Kp.rows() || Km.cols() != Kp.cols())
    throw DimensionError("direct_coupling: K- and K+ must have equal shapes");
  DirectCoupling d;
  const CMat Dk = Delta(Km, Kp);  // 2 n_k x 2 n_p
  d.B21 = Dk;
  d.B12 = -flat_adjoint(Dk);
  return d;
}

void PartitionedSystem::validate() const {
  const int m = qs.m();
  if (static_cast<int>(input_group.size()) != m || static_cast<int>(output_group.size()) != m)
    throw DimensionError("partitioned system: need a group label for every channel");
  for (int gidx : input_group)
    if (gidx < 0 || gidx > 2) throw DimensionError("partitioned system: input group must be 0, 1 or 2");
  for (int gidx : output_group)
    if (gidx < 0 || gidx > 2) throw DimensionError("partitioned system: output group must be 0, 1 or 2");
}

QuadratureSystem ClosedLoopSystem::as_system() const {
  QuadratureSystem s;
  // [x_p; x_k] -> (q_p, q_k, p_p, p_k)
  const std::vector<int> st = qp_order({2 * n_p, 2 * n_k});
  s.A = take(A_cl, st, st);
  s.B = take(G_cl, st, qp_order(noise_blocks));
  s.C = take_cols(C_out, st);
  s.D = D_out;
  s.E = take(E_cl, st, qp_order({static_cast<int>(E_cl.cols() - e_k_cols), e_k_cols}));
  return s;
}

ClosedLoopSystem closed_loop(const PartitionedSystem& P, const PartitionedSystem& K, const DirectCoupling* cpl,
                             const Performance* perf) {
  P.validate();
  K.validate();
  const int mp = P.qs.m(), mk = K.qs.m();
  const int np = P.qs.n(), nk = K.qs.n();
  // plant inputs p1,p2,p3 ; outputs f,m,k ; controller inputs k1,k2,k3 ; outputs p,f,m
  const auto pin1 = quad_idx(channels_in(P.input_group, 0), mp), pin2 = quad_idx(channels_in(P.input_group, 1), mp),
             pin3 = quad_idx(channels_in(P.input_group, 2), mp);
  const auto pof = quad_idx(channels_in(P.output_group, 0), mp), pom = quad_idx(channels_in(P.output_group, 1), mp),
             pok = quad_idx(channels_in(P.output_group, 2), mp);
  const auto kin1 = quad_idx(channels_in(K.input_group, 0), mk), kin2 = quad_idx(channels_in(K.input_group, 1), mk),
             kin3 = quad_idx(channels_in(K.input_group, 2), mk);
  const auto kop = quad_idx(channels_in(K.output_group, 0), mk), kof = quad_idx(channels_in(K.output_group, 1), mk),
             kom = quad_idx(channels_in(K.output_group, 2), mk);
  if (pin3.size() != kop.size()) {
    std::ostringstream os;
    os << "closed_loop: plant feedback input has " << pin3.size() / 2 << " channels but controller sends "
       << kop.size() / 2;
    throw CompositionError(os.str());
  }
  if (pok.size() != kin1.size()) {
    std::ostringstream os;
    os << "closed_loop: plant sends " << pok.size() / 2 << " channels but controller input k1 has " << kin1.size() / 2;
    throw CompositionError(os.str());
  }
  const RMat D_kp1 = take(K.qs.D, kop, kin1);
  if (D_kp1.size() && D_kp1.cwiseAbs().maxCoeff() > 1e-12)
    throw CausalityError("closed_loop: controller output to the plant depends on its input from the plant");

  const RMat& Ap = P.qs.A;
  const RMat& Ak = K.qs.A;
  const RMat Bp1 = take_cols(P.qs.B, pin1), Bp2 = take_cols(P.qs.B, pin2), Bp3 = take_cols(P.qs.B, pin3);
  const RMat Bk1 = take_cols(K.qs.B, kin1), Bk2 = take_cols(K.qs.B, kin2), Bk3 = take_cols(K.qs.B, kin3);
  const RMat Cpk = take_rows(P.qs.C, pok), Ckp = take_rows(K.qs.C, kop);
  const RMat Dpk1 = take(P.qs.D, pok, pin1), Dpk2 = take(P.qs.D, pok, pin2), Dpk3 = take(P.qs.D, pok, pin3);
  const RMat Dkp2 = take(K.qs.D, kop, kin2), Dkp3 = take(K.qs.D, kop, kin3);

  RMat B12 = RMat::Zero(2 * np, 2 * nk), B21 = RMat::Zero(2 * nk, 2 * np);
  if (cpl) {
    if (cpl->B12.rows() != 2 * np || cpl->B12.cols() != 2 * nk || cpl->B21.rows() != 2 * nk || cpl->B21.cols() != 2 * np)
      throw DimensionError("closed_loop: direct coupling blocks do not match the plant/controller sizes");
    const CMat q12 = Vk(np) * cpl->B12 * Vk(nk).adjoint();
    const CMat q21 = Vk(nk) * cpl->B21 * Vk(np).adjoint();
    if (std::max(q12.imag().cwiseAbs().maxCoeff(), q21.imag().cwiseAbs().maxCoeff()) > 1e-9)
      throw StructureError("closed_loop: direct coupling is not doubled-up");
    B12 = q12.real();
    B21 = q21.real();
  }

  ClosedLoopSystem cl;
  cl.n_p = np;
  cl.n_k = nk;
  cl.A_cl = vcat({hcat({Ap, RMat(Bp3 * Ckp + B12)}), hcat({RMat(Bk1 * Cpk + B21), RMat(Ak + Bk1 * Dpk3 * Ckp)})});
  cl.B_cl = vcat({hcat({Bp2, RMat(Bp3 * Dkp3)}), hcat({RMat(Bk1 * Dpk2), RMat(Bk3 + Bk1 * Dpk3 * Dkp3)})});
  cl.E_cl = RMat::Zero(2 * (np + nk), P.qs.E.cols() + K.qs.E.cols());
  cl.E_cl.topLeftCorner(2 * np, P.qs.E.cols()) = P.qs.E;
  cl.E_cl.bottomRightCorner(2 * nk, K.qs.E.cols()) = K.qs.E;
  cl.e_k_cols = static_cast<int>(K.qs.E.cols());
  cl.G_cl = vcat({hcat({Bp1, Bp2, RMat(Bp3 * Dkp2), RMat(Bp3 * Dkp3)}),
                  hcat({RMat(Bk1 * Dpk1), RMat(Bk1 * Dpk2), RMat(Bk2 + Bk1 * Dpk3 * Dkp2), RMat(Bk3 + Bk1 * Dpk3 * Dkp3)})});
  cl.noise_blocks = {static_cast<int>(pin1.size()), static_cast<int>(pin2.size()), static_cast<int>(kin2.size()),
                     static_cast<int>(kin3.size())};

  // free outputs, with the in-loop fields eliminated
  const int w1 = cl.noise_blocks[0], w2 = cl.noise_blocks[1], w3 = cl.noise_blocks[2], w4 = cl.noise_blocks[3];
  auto zr = [](Eigen::Index r, Eigen::Index c) { return RMat(RMat::Zero(r, c)); };
  const Eigen::Index r3 = pin3.size(), r1 = kin1.size();
  // dU_p3 = Cx3 x + Dw3 w
  const RMat Cx3 = hcat({zr(r3, 2 * np), Ckp});
  const RMat Dw3 = hcat({zr(r3, w1 + w2), Dkp2, Dkp3});
  // dU_k1 = Cx1 x + Dw1 w
  const RMat Cx1 = hcat({Cpk, zr(r1, 2 * nk)}) + Dpk3 * Cx3;
  const RMat Dw1 = hcat({Dpk1, Dpk2, zr(r1, w3 + w4)}) + Dpk3 * Dw3;
  auto plant_out = [&](const std::vector<int>& rows, RMat& C, RMat& D) {
    const Eigen::Index r = rows.size();
    C = hcat({take_rows(P.qs.C, rows), zr(r, 2 * nk)}) + take(P.qs.D, rows, pin3) * Cx3;
    D = hcat({take(P.qs.D, rows, pin1), take(P.qs.D, rows, pin2), zr(r, w3 + w4)}) + take(P.qs.D, rows, pin3) * Dw3;
  };
  auto ctrl_out = [&](const std::vector<int>& rows, RMat& C, RMat& D) {
    const Eigen::Index r = rows.size();
    C = hcat({zr(r, 2 * np), take_rows(K.qs.C, rows)}) + take(K.qs.D, rows, kin1) * Cx1;
    D = hcat({zr(r, w1 + w2), take(K.qs.D, rows, kin2), take(K.qs.D, rows, kin3)}) + take(K.qs.D, rows, kin1) * Dw1;
  };
  RMat C1, D1, C2, D2, C3, D3, C4, D4;
  plant_out(pof, C1, D1);
  plant_out(pom, C2, D2);
  ctrl_out(kof, C3, D3);
  ctrl_out(kom, C4, D4);
  // q quadratures of all groups first, then p
  const RMat Cs = vcat({C1, C2, C3, C4}), Ds = vcat({D1, D2, D3, D4});
  const std::vector<int> rows = qp_order({static_cast<int>(C1.rows()), static_cast<int>(C2.rows()),
                                          static_cast<int>(C3.rows()), static_cast<int>(C4.rows())});
  cl.C_out = take_rows(Cs, rows);
  cl.D_out = take(Ds, rows, qp_order(cl.noise_blocks));

  if (perf) {
    if (perf->C_p.cols() != 2 * np || perf->C_k.cols() != 2 * nk || perf->C_p.rows() != perf->C_k.rows())
      throw DimensionError("closed_loop: performance matrices do not match the state sizes");
    cl.C_cl = hcat({perf->C_p, perf->C_k});
    cl.D_cl = perf->D_z;
  } else {
    cl.C_cl = RMat::Zero(0, 2 * (np + nk));
    cl.D_cl = RMat::Zero(0, cl.B_cl.cols());
  }
  return cl;
}

}  // namespace lqs
