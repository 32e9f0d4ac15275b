#include "oracles.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "tmera/gates.hpp"
#include "tmera/simulator.hpp"

namespace oracle {

using tmera::cplx;
using tmera::network::MeraState;
using tmera::network::NetworkKind;

void apply_gate(CVector& psi, int n, const CMatrix& g, const std::vector<int>& targets) {
  const int k = static_cast<int>(targets.size());
  const Eigen::Index dim = Eigen::Index{1} << n, sub = Eigen::Index{1} << k;
  std::vector<Eigen::Index> masks(k);
  Eigen::Index all = 0;
  for (int a = 0; a < k; ++a) {
    masks[a] = Eigen::Index{1} << (n - 1 - targets[a]);
    all |= masks[a];
  }
  std::vector<Eigen::Index> idx(sub);
  CVector in(sub), out(sub);
  for (Eigen::Index base = 0; base < dim; ++base) {
    if (base & all) continue;
    for (Eigen::Index j = 0; j < sub; ++j) {
      Eigen::Index x = base;
      for (int a = 0; a < k; ++a)
        if (j & (Eigen::Index{1} << (k - 1 - a))) x |= masks[a];
      idx[j] = x;
      in(j) = psi(x);
    }
    out = g * in;
    for (Eigen::Index j = 0; j < sub; ++j) psi(idx[j]) = out(j);
  }
}

CMatrix embed(const CMatrix& g, int n, const std::vector<int>& targets) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMatrix m(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    CVector e = CVector::Zero(dim);
    e(c) = 1;
    apply_gate(e, n, g, targets);
    m.col(c) = e;
  }
  return m;
}

CMatrix partial_trace(const CMatrix& rho, int n, const std::vector<int>& keep) {
  const int k = static_cast<int>(keep.size());
  std::vector<int> rest;
  for (int x = 0; x < n; ++x)
    if (std::find(keep.begin(), keep.end(), x) == keep.end()) rest.push_back(x);
  auto compose = [&](Eigen::Index kept, Eigen::Index traced) {
    Eigen::Index x = 0;
    for (int a = 0; a < k; ++a)
      if (kept & (Eigen::Index{1} << (k - 1 - a))) x |= Eigen::Index{1} << (n - 1 - keep[a]);
    const int r = static_cast<int>(rest.size());
    for (int a = 0; a < r; ++a)
      if (traced & (Eigen::Index{1} << (r - 1 - a))) x |= Eigen::Index{1} << (n - 1 - rest[a]);
    return x;
  };
  const Eigen::Index dk = Eigen::Index{1} << k, dr = Eigen::Index{1} << rest.size();
  CMatrix out = CMatrix::Zero(dk, dk);
  for (Eigen::Index i = 0; i < dk; ++i)
    for (Eigen::Index j = 0; j < dk; ++j)
      for (Eigen::Index t = 0; t < dr; ++t) out(i, j) += rho(compose(i, t), compose(j, t));
  return out;
}

namespace {

// G rho G^dagger for Hermitian rho, one gate at a time.
void conjugate(CMatrix& rho, int n, const CMatrix& g, const std::vector<int>& targets) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
      CVector v = rho.col(c);
      apply_gate(v, n, g, targets);
      rho.col(c) = v;
    }
    rho.adjointInPlace();
  }
}

int cross_section(NetworkKind k) { return k == NetworkKind::Binary1D ? 3 : 2; }

}  // namespace

CMatrix top_block(const MeraState& s) {
  CVector t = CVector::Zero(Eigen::Index{1} << s.q);
  t(0) = 1;
  for (const auto& op : s.top.ops) apply_gate(t, s.q, s.gates[op.gate].gate.matrix, op.qubits);
  const CMatrix one = t * t.adjoint();
  CMatrix block = one;
  for (int a = 1; a < cross_section(s.kind); ++a) {
    CMatrix next(block.rows() * one.rows(), block.cols() * one.cols());
    for (Eigen::Index i = 0; i < block.rows(); ++i)
      for (Eigen::Index j = 0; j < block.cols(); ++j)
        next.block(i * one.rows(), j * one.cols(), one.rows(), one.cols()) = block(i, j) * one;
    block = std::move(next);
  }
  return block;
}

CMatrix apply_map_dense(const tmera::network::TransitionMap& m, const CMatrix& rho, const std::vector<CMatrix>& mats) {
  const int n = m.register_qubits();
  const Eigen::Index dim = Eigen::Index{1} << n, fresh = Eigen::Index{1} << m.fresh_qubits;
  // fresh qubits follow the block, so |0...0> on them is every fresh-th index
  CMatrix full = CMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < rho.rows(); ++i)
    for (Eigen::Index j = 0; j < rho.cols(); ++j) full(i * fresh, j * fresh) = rho(i, j);
  for (const auto& op : m.ops) conjugate(full, n, mats[op.gate], op.qubits);
  return partial_trace(full, n, m.keep);
}

CMatrix branch_average(const MeraState& s) {
  const auto mats = s.matrices();
  std::vector<std::vector<tmera::network::TransitionMap>> maps(s.T + 1);
  for (int tau = 1; tau <= s.T; ++tau) maps[tau] = tmera::network::transition_maps(s, tau);
  CMatrix sum;
  long long leaves = 0;
  std::function<void(int, const CMatrix&)> walk = [&](int tau, const CMatrix& rho) {
    if (tau == 0) {
      sum = leaves++ ? CMatrix(sum + rho) : rho;
      return;
    }
    for (const auto& m : maps[tau]) walk(tau - 1, apply_map_dense(m, rho, mats));
  };
  walk(s.T, top_block(s));
  return sum / static_cast<double>(leaves);
}

namespace {

struct Placement {
  int b, iso_shift, dis_period, dis_offset;
};

Placement placement(NetworkKind k) {
  switch (k) {
    case NetworkKind::Binary1D: return {2, -1, 2, 0};
    case NetworkKind::Ternary1D: return {3, -1, 3, 1};
    case NetworkKind::ModBinary1D: return {2, 0, 4, 3};
    default: throw tmera::InputError("light cone oracle: 1D kinds only");
  }
}

struct LatticeGate {
  int gate;
  std::vector<int> wires;
};

struct Lattice {
  int wires = 0;
  std::vector<LatticeGate> gates;
  std::vector<std::vector<int>> physical;  // site -> its q wires
};

long long mod(long long a, long long n) { return ((a % n) + n) % n; }

Lattice build_lattice(const MeraState& s, int top_sites) {
  const Placement P = placement(s.kind);
  const int q = s.q;
  Lattice L;
  auto fresh_site = [&]() {
    std::vector<int> w(q);
    for (auto& x : w) x = L.wires++;
    return w;
  };
  std::vector<std::vector<int>> sites(top_sites);
  for (auto& site : sites) {
    site = fresh_site();
    for (const auto& op : s.top.ops) {
      LatticeGate g{op.gate, {}};
      for (int x : op.qubits) g.wires.push_back(site[x]);
      L.gates.push_back(std::move(g));
    }
  }
  for (int tau = s.T; tau >= 1; --tau) {
    const long long nc = static_cast<long long>(sites.size()), nf = nc * P.b;
    std::vector<std::vector<int>> fine(nf);
    const auto& iso = s.isometries[tau - 1];
    for (long long j = 0; j < nc; ++j) {
      std::vector<std::vector<int>> slots(P.b);
      slots[0] = sites[j];
      for (int a = 1; a < P.b; ++a) slots[a] = fresh_site();
      for (const auto& op : iso.ops) {
        LatticeGate g{op.gate, {}};
        for (int x : op.qubits) g.wires.push_back(slots[x / q][x % q]);
        L.gates.push_back(std::move(g));
      }
      for (int a = 0; a < P.b; ++a) fine[mod(P.b * j + P.iso_shift + a, nf)] = slots[a];
    }
    const auto& dis = s.disentanglers[tau - 1];
    for (long long k = 0; k < nf / P.dis_period; ++k) {
      const long long f0 = mod(P.dis_period * k + P.dis_offset, nf), f1 = mod(f0 + 1, nf);
      for (const auto& op : dis.ops) {
        LatticeGate g{op.gate, {}};
        for (int x : op.qubits) g.wires.push_back((x / q == 0 ? fine[f0] : fine[f1])[x % q]);
        L.gates.push_back(std::move(g));
      }
    }
    sites = std::move(fine);
  }
  L.physical = std::move(sites);
  return L;
}

double bond_expectation(const MeraState& s, const Lattice& L, const CMatrix& h, long long i, LightConeStats* stats) {
  const long long N = static_cast<long long>(L.physical.size());
  std::vector<int> measured = L.physical[mod(i, N)];
  for (int w : L.physical[mod(i + 1, N)]) measured.push_back(w);
  std::vector<char> relevant(L.wires, 0);
  for (int w : measured) relevant[w] = 1;
  std::vector<int> cone;
  for (int k = static_cast<int>(L.gates.size()) - 1; k >= 0; --k) {
    bool hit = false;
    for (int w : L.gates[k].wires) hit |= relevant[w] != 0;
    if (!hit) continue;
    cone.push_back(k);
    for (int w : L.gates[k].wires) relevant[w] = 1;
  }
  std::map<int, int> local;
  for (int w = 0; w < L.wires; ++w)
    if (relevant[w]) local.emplace(w, static_cast<int>(local.size()));
  const int n = static_cast<int>(local.size());
  if (stats) {
    stats->max_wires = std::max(stats->max_wires, n);
    stats->max_gates = std::max(stats->max_gates, static_cast<int>(cone.size()));
  }
  CVector psi = CVector::Zero(Eigen::Index{1} << n);
  psi(0) = 1;
  const auto mats = s.matrices();
  for (auto it = cone.rbegin(); it != cone.rend(); ++it) {
    std::vector<int> t;
    for (int w : L.gates[*it].wires) t.push_back(local.at(w));
    apply_gate(psi, n, mats[L.gates[*it].gate], t);
  }
  std::vector<int> t;
  for (int w : measured) t.push_back(local.at(w));
  CVector hpsi = psi;
  apply_gate(hpsi, n, h, t);
  return psi.dot(hpsi).real();
}

}  // namespace

double light_cone_bond(const MeraState& s, const CMatrix& h, int top_sites, long long i, LightConeStats* stats) {
  const Lattice L = build_lattice(s, top_sites);
  return bond_expectation(s, L, h, i, stats);
}

double light_cone_energy(const MeraState& s, const CMatrix& h, int top_sites, LightConeStats* stats) {
  const Lattice L = build_lattice(s, top_sites);
  const long long N = static_cast<long long>(L.physical.size());
  double sum = 0;
  for (long long i = 0; i < N; ++i) sum += bond_expectation(s, L, h, i, stats);
  return sum / static_cast<double>(N);
}

double central_diff(const std::function<double(double)>& f, double h) { return (f(h) - f(-h)) / (2 * h); }

CMatrix fd_euclidean(const MeraState& s, const tmera::models::LocalModel& m, int gate, double h) {
  const tmera::simulator::Evaluator ev(s, m);
  const auto base = s.matrices();
  const CMatrix& u = base[gate];
  CMatrix d(u.rows(), u.cols());
  for (Eigen::Index c = 0; c < u.cols(); ++c)
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      double part[2];
      for (int im = 0; im < 2; ++im) {
        const cplx step = im ? cplx(0, h) : cplx(h, 0);
        auto mats = base;
        mats[gate](r, c) = u(r, c) + step;
        const double ep = ev.energy(mats);
        mats[gate](r, c) = u(r, c) - step;
        part[im] = (ep - ev.energy(mats)) / (2 * h);
      }
      d(r, c) = cplx(part[0], part[1]);
    }
  return d;
}

Eigen::VectorXd fd_gradient(const MeraState& s, const tmera::models::LocalModel& m, double h) {
  const tmera::simulator::Evaluator ev(s, m);
  const auto base = s.matrices();
  std::vector<double> out;
  for (const auto& ref : s.registry()) {
    const auto& g = s.gates[ref.gate].gate;
    if (ref.slot >= 0) {
      auto a = g.angles;
      auto mats = base;
      a[ref.slot] += h;
      mats[ref.gate] = tmera::gates::gate_matrix(g.form, a);
      const double ep = ev.energy(mats);
      a[ref.slot] -= 2 * h;
      mats[ref.gate] = tmera::gates::gate_matrix(g.form, a);
      out.push_back((ep - ev.energy(mats)) / (2 * h));
      continue;
    }
    const CMatrix& u = g.matrix;
    const CMatrix d = fd_euclidean(s, m, ref.gate, h);
    const CMatrix t = 0.5 * (d - u * d.adjoint() * u);
    for (Eigen::Index c = 0; c < t.cols(); ++c)
      for (Eigen::Index r = 0; r < t.rows(); ++r) {
        out.push_back(t(r, c).real());
        out.push_back(t(r, c).imag());
      }
  }
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

Eigen::MatrixXd dense_inverse_hessian(const tmera::optimizer::Snapshot& snap) {
  const Eigen::Index n = snap.g.size();
  Eigen::MatrixXd H = snap.gamma * Eigen::MatrixXd::Identity(n, n);
  for (size_t i = 0; i < snap.s.size(); ++i) {
    const Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n) - snap.rho[i] * snap.y[i] * snap.s[i].transpose();
    H = V.transpose() * H * V + snap.rho[i] * snap.s[i] * snap.s[i].transpose();
  }
  return H;
}

double tfim_trapezoid(double g, int m) {
  double sum = 0;
  for (int k = 0; k < m; ++k) {
    const double x = 2 * std::numbers::pi * k / m;
    sum += std::sqrt(1 + g * g - 2 * g * std::cos(x));
  }
  return -sum / m;
}

}  // namespace oracle
