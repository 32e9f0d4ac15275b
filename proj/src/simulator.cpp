#include "tmera/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tmera/kernels.hpp"

namespace tmera::simulator {

using network::info;
using Op = Instr::Op;

namespace {

// All orders of the map's tensors that keep tensors sharing a qubit in
// their original relative order.
void tensor_orders(const TransitionMap& m, std::vector<int>& cur, std::vector<bool>& used,
                   std::vector<std::vector<int>>& out) {
  const int nt = static_cast<int>(m.tensors.size());
  if (static_cast<int>(cur.size()) == nt) {
    out.push_back(cur);
    return;
  }
  auto touches = [&](int t) {
    std::vector<int> qs;
    for (int o : m.tensors[t].ops) qs.insert(qs.end(), m.ops[o].qubits.begin(), m.ops[o].qubits.end());
    std::sort(qs.begin(), qs.end());
    return qs;
  };
  for (int t = 0; t < nt; ++t) {
    if (used[t]) continue;
    bool ok = true;
    const auto qt = touches(t);
    for (int e = 0; e < t && ok; ++e) {
      if (used[e]) continue;
      const auto qe = touches(e);
      std::vector<int> common;
      std::set_intersection(qt.begin(), qt.end(), qe.begin(), qe.end(), std::back_inserter(common));
      if (!common.empty()) ok = false;
    }
    if (!ok) continue;
    used[t] = true;
    cur.push_back(t);
    tensor_orders(m, cur, used, out);
    cur.pop_back();
    used[t] = false;
  }
}

int live_index(const std::vector<int>& live, int pos) {
  const auto it = std::find(live.begin(), live.end(), pos);
  if (it == live.end()) throw NumericalError("simulator: register position not live");
  return static_cast<int>(it - live.begin());
}

void finish(Program& p, const TransitionMap& m, std::vector<int>& live) {
  // fresh qubits that no gate touched but that survive
  std::vector<int> late;
  for (int pos : m.keep)
    if (std::find(live.begin(), live.end(), pos) == live.end()) late.push_back(pos);
  if (!late.empty()) {
    p.code.push_back({Op::Fresh, -1, -1, static_cast<int>(late.size()), {}});
    live.insert(live.end(), late.begin(), late.end());
  }
  std::vector<int> drop;
  for (int k = 0; k < static_cast<int>(live.size()); ++k)
    if (std::find(m.keep.begin(), m.keep.end(), live[k]) == m.keep.end()) drop.push_back(k);
  if (!drop.empty()) {
    p.code.push_back({Op::Trace, -1, -1, 0, drop});
    std::vector<int> rest;
    for (int k = 0; k < static_cast<int>(live.size()); ++k)
      if (std::find(drop.begin(), drop.end(), k) == drop.end()) rest.push_back(live[k]);
    live = rest;
  }
  std::vector<int> order;
  for (int pos : m.keep) order.push_back(live_index(live, pos));
  bool ident = true;
  for (int k = 0; k < static_cast<int>(order.size()); ++k) ident = ident && order[k] == k;
  if (!ident) p.code.push_back({Op::Permute, -1, -1, 0, order});
  p.n_out = static_cast<int>(m.keep.size());
}

Program header(const TransitionMap& m, int index) {
  Program p;
  p.layer = m.layer;
  p.map = index;
  p.label = m.label;
  p.source_class = m.source_class;
  p.target_class = m.target_class;
  p.weight = m.weight;
  p.n_in = m.active_qubits;
  return p;
}

Program schedule(const TransitionMap& m, const std::vector<int>& order) {
  Program p = header(m, 0);
  std::vector<int> seq;
  for (int t : order) seq.insert(seq.end(), m.tensors[t].ops.begin(), m.tensors[t].ops.end());
  const int R = m.register_qubits();
  std::vector<int> last(R, -1);
  for (int k = 0; k < static_cast<int>(seq.size()); ++k)
    for (int x : m.ops[seq[k]].qubits) last[x] = k;
  std::vector<bool> is_exit(R, false);
  for (int x : m.exit) is_exit[x] = true;

  std::vector<int> live(m.active_qubits);
  std::iota(live.begin(), live.end(), 0);
  auto trace = [&](std::vector<int> pos) {
    if (pos.empty()) return;
    std::vector<int> idx;
    for (int x : pos) idx.push_back(live_index(live, x));
    std::sort(idx.begin(), idx.end());
    p.code.push_back({Op::Trace, -1, -1, 0, idx});
    for (int x : pos) live.erase(std::find(live.begin(), live.end(), x));
  };
  std::vector<int> idle;
  for (int x = 0; x < m.active_qubits; ++x)
    if (is_exit[x] && last[x] < 0) idle.push_back(x);
  trace(idle);
  p.peak = static_cast<int>(live.size());
  for (int k = 0; k < static_cast<int>(seq.size()); ++k) {
    const network::MapOp& op = m.ops[seq[k]];
    int added = 0;
    for (int x : op.qubits)
      if (std::find(live.begin(), live.end(), x) == live.end()) {
        live.push_back(x);
        ++added;
      }
    if (added) p.code.push_back({Op::Fresh, -1, -1, added, {}});
    p.peak = std::max(p.peak, static_cast<int>(live.size()));
    Instr g{Op::Gate, op.gate, seq[k], 0, {}};
    for (int x : op.qubits) g.qubits.push_back(live_index(live, x));
    p.code.push_back(std::move(g));
    p.cost += std::pow(4.0, static_cast<double>(live.size()));
    std::vector<int> done;
    for (int x : op.qubits)
      if (is_exit[x] && last[x] == k) done.push_back(x);
    trace(done);
  }
  finish(p, m, live);
  return p;
}

CMatrix gate_for(const Instr& in, const Program& p, const std::vector<CMatrix>& mats, const Overrides* ov) {
  if (ov)
    for (const auto& o : *ov)
      if (o.layer == p.layer && o.map == p.map && o.occurrence == in.occurrence) return o.matrix;
  return mats.at(in.gate);
}

double trace_product(const CMatrix& a, const CMatrix& b) { return (a.cwiseProduct(b.transpose())).sum().real(); }

}  // namespace

Program compile_map(const TransitionMap& m) {
  std::vector<std::vector<int>> orders;
  std::vector<int> cur;
  std::vector<bool> used(m.tensors.size(), false);
  tensor_orders(m, cur, used, orders);
  Program best;
  bool have = false;
  for (const auto& o : orders) {
    Program p = schedule(m, o);
    if (!have || p.peak < best.peak || (p.peak == best.peak && p.cost < best.cost)) {
      best = std::move(p);
      have = true;
    }
  }
  return best;
}

Program naive_program(const TransitionMap& m) {
  Program p = header(m, 0);
  std::vector<int> live(m.register_qubits());
  std::iota(live.begin(), live.end(), 0);
  if (m.fresh_qubits) p.code.push_back({Op::Fresh, -1, -1, m.fresh_qubits, {}});
  p.peak = m.register_qubits();
  for (int k = 0; k < static_cast<int>(m.ops.size()); ++k) {
    p.code.push_back({Op::Gate, m.ops[k].gate, k, 0, m.ops[k].qubits});
    p.cost += std::pow(4.0, p.peak);
  }
  finish(p, m, live);
  return p;
}

int CompiledNetwork::peak_qubits() const {
  int peak = top.peak;
  for (const auto& l : layers)
    for (const auto& p : l) peak = std::max(peak, p.peak);
  return peak;
}

CompiledNetwork compile(const MeraState& s, bool naive) {
  const auto& I = info(s.kind);
  if (!I.simulable) throw network::UnsupportedForSimulation("compile: not a 1D kind");
  CompiledNetwork c;
  c.kind = s.kind;
  c.T = s.T;
  c.q = s.q;
  c.A = I.A;
  c.classes = I.classes;

  c.top.layer = s.T + 1;
  c.top.label = "top";
  c.top.n_out = I.A * s.q;
  int occ = 0;
  for (int site = 0; site < I.A; ++site) {
    c.top.code.push_back({Op::Fresh, -1, -1, s.q, {}});
    for (const auto& op : s.top.ops) {
      Instr g{Op::Gate, op.gate, occ++, 0, {}};
      for (int x : op.qubits) g.qubits.push_back(site * s.q + x);
      c.top.code.push_back(std::move(g));
      c.top.cost += std::pow(4.0, (site + 1) * s.q);
    }
  }
  c.top.peak = I.A * s.q;

  for (int tau = 1; tau <= s.T; ++tau) {
    const auto maps = network::transition_maps(s, tau);
    std::vector<Program> progs;
    for (int k = 0; k < static_cast<int>(maps.size()); ++k) {
      Program p = naive ? naive_program(maps[k]) : compile_map(maps[k]);
      p.map = k;
      progs.push_back(std::move(p));
    }
    c.layers.push_back(std::move(progs));
  }
  constexpr int dm_cap = 13;
  if (c.peak_qubits() > dm_cap)
    throw network::ResourceError("density register of " + std::to_string(c.peak_qubits()) + " qubits exceeds the cap");
  return c;
}

CMatrix run_program(const Program& p, CMatrix rho, const std::vector<CMatrix>& mats, const Overrides* ov) {
  int n = qcore::log2_dim(rho.rows());
  for (const auto& in : p.code) {
    switch (in.op) {
      case Op::Fresh:
        rho = kernels::append_zero(rho, n, in.count);
        n += in.count;
        break;
      case Op::Gate: kernels::apply_dm(rho, n, gate_for(in, p, mats, ov), in.qubits); break;
      case Op::Trace:
        rho = kernels::trace_out(rho, n, in.qubits);
        n -= static_cast<int>(in.qubits.size());
        break;
      case Op::Permute: rho = kernels::permute(rho, n, in.qubits); break;
    }
  }
  return rho;
}

InterfaceState top_state(const CompiledNetwork& c, const std::vector<CMatrix>& mats, const Overrides* ov) {
  CMatrix one = CMatrix::Ones(1, 1);
  const CMatrix rho = run_program(c.top, one, mats, ov);
  InterfaceState st;
  st.layer = c.T;
  st.rho.assign(c.classes, rho);
  return st;
}

InterfaceState apply_transition_channel(const InterfaceState& in, const std::vector<Program>& maps,
                                        const std::vector<CMatrix>& mats, const Overrides* ov) {
  if (maps.empty()) throw InputError("apply_transition_channel: no maps");
  InterfaceState out;
  out.layer = maps.front().layer - 1;
  const Eigen::Index dim = in.rho.at(0).rows();
  out.rho.assign(in.rho.size(), CMatrix::Zero(dim, dim));
  for (const auto& p : maps) {
    if (p.layer != maps.front().layer) throw InputError("apply_transition_channel: maps from different layers");
    if (p.source_class >= static_cast<int>(in.rho.size()) || p.target_class >= static_cast<int>(out.rho.size()))
      throw network::TopologyError("apply_transition_channel: bond class mismatch");
    out.rho[p.target_class] += p.weight * run_program(p, in.rho[p.source_class], mats, ov);
  }
  return out;
}

InterfaceState averaged_density(const MeraState& s, int tau) {
  if (tau < 0 || tau > s.T) throw InputError("averaged_density: layer out of range");
  const CompiledNetwork c = compile(s);
  const auto mats = s.matrices();
  InterfaceState st = top_state(c, mats);
  for (int l = s.T; l > tau; --l) st = apply_transition_channel(st, c.layers[l - 1], mats);
  return st;
}

CMatrix register_term(const CMatrix& h, int A, int q) {
  if (h.rows() != (Eigen::Index{1} << (2 * q))) throw models::EmbeddingError("local term does not match 2q qubits");
  if (A == 2) return h;
  return qcore::kron(h, CMatrix::Identity(Eigen::Index{1} << ((A - 2) * q), Eigen::Index{1} << ((A - 2) * q)));
}

Evaluator::Evaluator(const MeraState& s, const models::LocalModel& model) : s_(s), c_(compile(s)) {
  if (model.q != s.q) throw models::EmbeddingError("model q differs from network q");
  h_ = register_term(model.h, c_.A, s.q);
  occ_.resize(s.gates.size());
  for (const auto& in : c_.top.code)
    if (in.op == Op::Gate) occ_[in.gate].push_back({c_.top.layer, 0, in.occurrence});
  for (const auto& layer : c_.layers)
    for (const auto& p : layer)
      for (const auto& in : p.code)
        if (in.op == Op::Gate) occ_[in.gate].push_back({p.layer, p.map, in.occurrence});
  for (auto& v : occ_)
    std::sort(v.begin(), v.end(), [](const Occurrence& a, const Occurrence& b) {
      return std::tie(a.layer, a.map, a.occurrence) < std::tie(b.layer, b.map, b.occurrence);
    });
}

InterfaceState Evaluator::density(const std::vector<CMatrix>& mats, int tau, const Overrides* ov) const {
  InterfaceState st = top_state(c_, mats, ov);
  for (int l = c_.T; l > tau; --l) st = apply_transition_channel(st, c_.layers[l - 1], mats, ov);
  return st;
}

double Evaluator::energy(const std::vector<CMatrix>& mats, const Overrides* ov) const {
  const InterfaceState st = density(mats, 0, ov);
  double e = 0;
  for (const auto& r : st.rho) e += trace_product(r, h_);
  return e / static_cast<double>(st.rho.size());
}

namespace {

// Backward pass through one program: b is the operator on the output
// register, x the forward input. Accumulates weight * d into grad and
// returns the Heisenberg-evolved operator on the input register.
CMatrix backprop(const Program& p, const CMatrix& x_in, CMatrix b, double weight, const std::vector<CMatrix>& mats,
                 std::vector<CMatrix>& grad) {
  // forward, keeping the input of every non-gate instruction
  std::vector<CMatrix> checkpoints;
  std::vector<int> widths;
  CMatrix x = x_in;
  int n = qcore::log2_dim(x.rows());
  for (const auto& in : p.code) {
    if (in.op != Op::Gate) {
      checkpoints.push_back(x);
      widths.push_back(n);
    }
    switch (in.op) {
      case Op::Fresh:
        x = kernels::append_zero(x, n, in.count);
        n += in.count;
        break;
      case Op::Gate: kernels::apply_dm(x, n, mats[in.gate], in.qubits); break;
      case Op::Trace:
        x = kernels::trace_out(x, n, in.qubits);
        n -= static_cast<int>(in.qubits.size());
        break;
      case Op::Permute: x = kernels::permute(x, n, in.qubits); break;
    }
  }
  for (auto it = p.code.rbegin(); it != p.code.rend(); ++it) {
    const Instr& in = *it;
    if (in.op == Op::Gate) {
      const CMatrix& g = mats[in.gate];
      const CMatrix gd = g.adjoint();
      CMatrix y = x;  // x_after * g
      kernels::apply_right_adjoint(y, n, gd, in.qubits);
      grad[in.gate] += (2.0 * weight) * kernels::env_trace(b, y, n, in.qubits);
      kernels::apply_dm(x, n, gd, in.qubits);
      kernels::apply_dm(b, n, gd, in.qubits);
      continue;
    }
    const int n_before = widths.back();
    switch (in.op) {
      case Op::Fresh: b = kernels::project_zero(b, n, in.count); break;
      case Op::Trace: b = kernels::insert_identity(b, n_before, in.qubits); break;
      case Op::Permute: {
        std::vector<int> inv(in.qubits.size());
        for (int k = 0; k < static_cast<int>(in.qubits.size()); ++k) inv[in.qubits[k]] = k;
        b = kernels::permute(b, n, inv);
        break;
      }
      case Op::Gate: break;
    }
    x = std::move(checkpoints.back());
    checkpoints.pop_back();
    widths.pop_back();
    n = n_before;
  }
  return b;
}

}  // namespace

double Evaluator::energy_and_gradient(const std::vector<CMatrix>& mats, std::vector<CMatrix>& grad) const {
  grad.assign(mats.size(), CMatrix());
  for (size_t k = 0; k < mats.size(); ++k) grad[k] = CMatrix::Zero(mats[k].rows(), mats[k].cols());
  std::vector<InterfaceState> states(c_.T + 1);
  states[c_.T] = top_state(c_, mats);
  for (int l = c_.T; l >= 1; --l) states[l - 1] = apply_transition_channel(states[l], c_.layers[l - 1], mats);
  const int ncl = c_.classes;
  double e = 0;
  for (const auto& r : states[0].rho) e += trace_product(r, h_);
  e /= ncl;

  std::vector<CMatrix> b(ncl, h_ / static_cast<double>(ncl));
  for (int l = 1; l <= c_.T; ++l) {
    const Eigen::Index dim = b[0].rows();
    std::vector<CMatrix> up(ncl, CMatrix::Zero(dim, dim));
    for (const auto& p : c_.layers[l - 1])
      up[p.source_class] +=
          p.weight * backprop(p, states[l].rho[p.source_class], b[p.target_class], p.weight, mats, grad);
    b = std::move(up);
  }
  CMatrix btop = b[0];
  for (int k = 1; k < ncl; ++k) btop += b[k];
  backprop(c_.top, CMatrix::Ones(1, 1), btop, 1.0, mats, grad);
  return e;
}

std::vector<Occurrence> Evaluator::occurrences(int gate) const { return occ_.at(gate); }

double energy_density(const MeraState& s, const models::LocalModel& model) {
  return Evaluator(s, model).energy(s.matrices());
}

double oracle_energy(const MeraState& s, const models::LocalModel& model, int top_sites, bool every_site) {
  const CVector psi = network::full_state_oracle(s, top_sites);
  const int q = s.q;
  const int n = qcore::log2_dim(psi.size());
  const int N = n / q;
  const int P = every_site ? N : network::translation_period(s.kind, s.T, top_sites);
  double e = 0;
  for (int i = 0; i < P; ++i) {
    std::vector<int> keep;
    for (int x = 0; x < q; ++x) keep.push_back(i * q + x);
    for (int x = 0; x < q; ++x) keep.push_back(((i + 1) % N) * q + x);
    e += kernels::expectation_sv(psi, n, model.h, keep);
  }
  return e / P;
}

CMatrix flag_state(const InterfaceState& st) {
  if (st.rho.size() != 2) throw network::TopologyError("flag_state: needs the parity pair");
  const Eigen::Index d = st.rho[0].rows();
  CMatrix out = CMatrix::Zero(2 * d, 2 * d);
  out.topLeftCorner(d, d) = 0.5 * st.rho[1];      // flag 0: e
  out.bottomRightCorner(d, d) = 0.5 * st.rho[0];  // flag 1: o
  return out;
}

InterfaceState unflag(const CMatrix& flagged, int layer) {
  const Eigen::Index d = flagged.rows() / 2;
  const double off = flagged.topRightCorner(d, d).cwiseAbs().maxCoeff();
  if (off > 1e-10) throw NumericalError("unflag: flag coherence " + std::to_string(off));
  InterfaceState st;
  st.layer = layer;
  st.rho = {2.0 * flagged.bottomRightCorner(d, d), 2.0 * flagged.topLeftCorner(d, d)};
  return st;
}

CMatrix flag_channel(const CMatrix& flagged, const std::vector<TransitionMap>& maps, const std::vector<CMatrix>& mats,
                     int q) {
  const int n = qcore::log2_dim(flagged.rows());
  CMatrix out = CMatrix::Zero(flagged.rows(), flagged.cols());
  for (const auto& m : maps) {
    const int R = m.register_qubits();
    CMatrix f = CMatrix::Zero(2, 2);  // |t><s| on the flag, class 1 (e) <-> flag 0
    f(1 - m.target_class, 1 - m.source_class) = 1;
    const CMatrix L = qcore::kron(f, network::composed_unitary(m, mats, q));
    CMatrix rho = kernels::append_zero(flagged, n, R + 1 - n);
    rho = L * rho * L.adjoint();
    std::vector<int> keep{0};
    for (int x : m.keep) keep.push_back(x + 1);
    out += m.weight * kernels::reduce(rho, R + 1, keep);
  }
  return out;
}

ShotEstimate sample_energy(const MeraState& s, const models::LocalModel& model, long long shots, std::uint64_t seed) {
  if (shots < 1) throw InputError("sample_energy: need at least one shot");
  const InterfaceState st = Evaluator(s, model).density(s.matrices());
  const int q = s.q;
  const int A = info(s.kind).A;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(model.h);
  const CMatrix& V = es.eigenvectors();
  std::vector<std::discrete_distribution<int>> dists;
  for (const auto& r : st.rho) {
    std::vector<int> keep(2 * q);
    std::iota(keep.begin(), keep.end(), 0);
    const CMatrix r2 = A == 2 ? r : kernels::reduce(r, A * q, keep);
    std::vector<double> p(V.cols());
    for (Eigen::Index k = 0; k < V.cols(); ++k)
      p[k] = std::max(0.0, (V.col(k).adjoint() * r2 * V.col(k))(0, 0).real());
    dists.emplace_back(p.begin(), p.end());
  }
  Rng rng(seed);
  double sum = 0, sum2 = 0;
  for (long long k = 0; k < shots; ++k) {
    const double v = es.eigenvalues()(dists[k % dists.size()](rng));
    sum += v;
    sum2 += v * v;
  }
  ShotEstimate out;
  out.shots = shots;
  out.mean = sum / shots;
  if (shots >= 2) {
    const double var = std::max(0.0, (sum2 - shots * out.mean * out.mean) / (shots - 1));
    out.std_error = std::sqrt(var / shots);
  }
  return out;
}

}  // namespace tmera::simulator
