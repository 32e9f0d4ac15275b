#include "tmera/network.hpp"

#include <algorithm>
#include <map>
#include <numbers>
#include <numeric>
#include <set>

#include "tmera/kernels.hpp"

namespace tmera::network {
namespace {

constexpr double pi = std::numbers::pi;

const KindInfo kInfo[] = {
    {"binary", 2, 3, 4, 1, 9, 8, true, -1, 2, 0, 1},
    {"mod-binary", 2, 2, 3, 2, 7, 8, true, 0, 4, 3, 2},
    {"ternary", 3, 2, 4, 2, 8, 8, true, -1, 3, 1, 1},
    {"square2x2", 4, 9, 14, 2, 28, 16, false, 0, 0, 0, 1},
    {"square3x3", 9, 4, 15, 4, 16, 20, false, 0, 0, 0, 1},
};

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

long long pos_mod(long long a, long long b) { return ((a % b) + b) % b; }

// Builds gates for one network form and init mode, in id order.
class GateFactory {
 public:
  GateFactory(NetworkForm form, const InitSpec& init) : form_(form), init_(init), rng_(init.seed) {}

  TrotterGate two_qubit() {
    switch (form_) {
      case NetworkForm::Free: return free_gate(4);
      case NetworkForm::Can: return angle_gate(GateForm::Can, std::vector<double>(15, 0.0));
      case NetworkForm::Cnot: return angle_gate(GateForm::Cnot, cnot_identity());
      case NetworkForm::XxBlock: return angle_gate(GateForm::Xx, {0.0});
    }
    throw InputError("unknown network form");
  }

  TrotterGate one_qubit() {
    if (form_ == NetworkForm::Free) return free_gate(2);
    return angle_gate(GateForm::SingleQubit, {0.0, 0.0, 0.0});
  }

 private:
  static const std::vector<double>& cnot_identity() {
    static const std::vector<double> a = gates::cnot_form_angles(CMatrix::Identity(4, 4));
    return a;
  }

  TrotterGate free_gate(int dim) {
    if (init_.mode != InitMode::Random) return gates::free_gate(CMatrix::Identity(dim, dim));
    if (init_.scale <= 0) return gates::free_gate(qcore::haar_unitary(dim, rng_).matrix());
    std::normal_distribution<double> nd(0.0, 1.0);
    CMatrix h(dim, dim);
    for (int c = 0; c < dim; ++c)
      for (int r = 0; r < dim; ++r) h(r, c) = cplx(nd(rng_), nd(rng_));
    h = 0.5 * (h + h.adjoint()).eval();
    return gates::free_gate(qcore::project_to_unitary(qcore::expm(cplx(0, init_.scale) * h)).matrix());
  }

  TrotterGate angle_gate(GateForm f, std::vector<double> a) {
    if (init_.mode == InitMode::Random) {
      if (init_.scale <= 0) {
        std::uniform_real_distribution<double> ud(-pi, pi);
        for (auto& x : a) x = ud(rng_);
      } else {
        std::normal_distribution<double> nd(0.0, init_.scale);
        for (auto& x : a) x += nd(rng_);
      }
    }
    return gates::make_gate(f, std::move(a));
  }

  NetworkForm form_;
  InitSpec init_;
  Rng rng_;
};

class Builder {
 public:
  Builder(MeraState& s, GateFactory& f) : s_(s), f_(f) {}

  void add(TensorCircuit& tc, std::vector<int> qubits, bool two) {
    GateSlot g;
    g.id = static_cast<int>(s_.gates.size());
    g.layer = tc.layer;
    g.role = tc.role;
    g.qubits = qubits;
    g.gate = two ? f_.two_qubit() : f_.one_qubit();
    tc.ops.push_back({g.id, std::move(qubits)});
    s_.gates.push_back(std::move(g));
  }

  void single_layer(TensorCircuit& tc, int nq) {
    for (int x = 0; x < nq; ++x) add(tc, {x}, false);
  }

  // t steps of odd bonds then even bonds; XX-block interleaves single-qubit layers
  void circuit(TensorCircuit& tc, int nq, int t) {
    if (nq == 1) {
      add(tc, {0}, false);
      return;
    }
    const bool xx = s_.form == NetworkForm::XxBlock;
    for (int step = 0; step < t; ++step) {
      for (int parity = 0; parity < 2; ++parity) {
        if (parity == 1 && nq < 3) continue;
        if (xx) single_layer(tc, nq);
        for (int x = parity; x + 1 < nq; x += 2) add(tc, {x, x + 1}, true);
      }
    }
    if (xx) single_layer(tc, nq);
  }

 private:
  MeraState& s_;
  GateFactory& f_;
};

void apply_product(MeraState& s, const InitSpec& init) {
  const CMatrix v = gates::single_qubit(init.product).matrix();
  const TensorCircuit& iso = s.isometries.at(0);
  for (int site = 0; site < iso.out_sites; ++site) {
    const int x = site * s.q;
    int last = -1;
    for (int k = 0; k < static_cast<int>(iso.ops.size()); ++k) {
      const auto& qs = iso.ops[k].qubits;
      if (std::find(qs.begin(), qs.end(), x) != qs.end()) last = k;
    }
    if (last < 0) throw TopologyError("product init: designated qubit untouched by the isometry");
    GateSlot& slot = s.gates[iso.ops[last].gate];
    const auto& qs = slot.qubits;
    CMatrix m;
    if (qs.size() == 1)
      m = v * slot.gate.matrix;
    else
      m = (qs[0] == x ? qcore::kron(v, CMatrix::Identity(2, 2)) : qcore::kron(CMatrix::Identity(2, 2), v)) *
          slot.gate.matrix;
    switch (slot.gate.form) {
      case GateForm::Free: slot.gate = gates::free_gate(m); break;
      case GateForm::Can: slot.gate = gates::make_gate(GateForm::Can, gates::can_form_angles(m)); break;
      case GateForm::Cnot: slot.gate = gates::make_gate(GateForm::Cnot, gates::cnot_form_angles(m)); break;
      case GateForm::SingleQubit: {
        auto e = gates::euler_angles(m);
        slot.gate = gates::make_gate(GateForm::SingleQubit, {e[0], e[1], e[2]});
        break;
      }
      case GateForm::Xx: throw TopologyError("product init cannot absorb into an XX gate");
    }
  }
}

}  // namespace

const KindInfo& info(NetworkKind k) { return kInfo[static_cast<int>(k)]; }

std::string to_string(NetworkKind k) { return info(k).name; }

NetworkKind kind_from_string(const std::string& s) {
  for (int k = 0; k < 5; ++k)
    if (s == kInfo[k].name) return static_cast<NetworkKind>(k);
  if (s == "Binary1D") return NetworkKind::Binary1D;
  if (s == "ModBinary1D") return NetworkKind::ModBinary1D;
  if (s == "Ternary1D") return NetworkKind::Ternary1D;
  if (s == "Square2x2") return NetworkKind::Square2x2;
  if (s == "Square3x3") return NetworkKind::Square3x3;
  throw InputError("unknown network kind: " + s);
}

std::string to_string(NetworkForm f) {
  switch (f) {
    case NetworkForm::Free: return "FREE";
    case NetworkForm::Can: return "CAN";
    case NetworkForm::Cnot: return "CNOT";
    case NetworkForm::XxBlock: return "XX";
  }
  return "?";
}

NetworkForm network_form_from_string(const std::string& s) {
  if (s == "FREE") return NetworkForm::Free;
  if (s == "CAN") return NetworkForm::Can;
  if (s == "CNOT") return NetworkForm::Cnot;
  if (s == "XX" || s == "XX-block") return NetworkForm::XxBlock;
  throw InputError("unknown network form: " + s);
}

std::string to_string(Role r) {
  switch (r) {
    case Role::Disentangler: return "disentangler";
    case Role::Isometry: return "isometry";
    case Role::Top: return "top";
  }
  return "?";
}

Role role_from_string(const std::string& s) {
  if (s == "disentangler") return Role::Disentangler;
  if (s == "isometry") return Role::Isometry;
  if (s == "top") return Role::Top;
  throw InputError("unknown role: " + s);
}

std::vector<CMatrix> MeraState::matrices() const {
  std::vector<CMatrix> m;
  m.reserve(gates.size());
  for (const auto& g : gates) m.push_back(g.gate.matrix);
  return m;
}

std::vector<ParamRef> MeraState::registry() const {
  std::vector<ParamRef> r;
  for (const auto& g : gates) {
    if (g.frozen) continue;
    if (g.gate.form == GateForm::Free)
      r.push_back({g.id, -1});
    else
      for (int a = 0; a < static_cast<int>(g.gate.angles.size()); ++a) r.push_back({g.id, a});
  }
  return r;
}

void MeraState::set_gate(int id, TrotterGate g) {
  GateSlot& slot = gates.at(id);
  if (g.matrix.rows() != slot.gate.matrix.rows()) throw gates::ArityError("set_gate: gate size mismatch");
  slot.gate = std::move(g);
}

int MeraState::count_two_qubit_gates() const {
  int n = 0;
  for (const auto& g : gates) n += g.qubits.size() == 2;
  return n;
}

InitSpec product_init_fig2() {
  InitSpec s;
  s.mode = InitMode::Product;
  s.product = {pi / 4, pi / 4, 0};
  return s;
}

InitSpec product_init_alternative() {
  InitSpec s;
  s.mode = InitMode::Product;
  s.product = {pi / 4, pi / 4, pi / 4};
  return s;
}

MeraState build_network(NetworkKind kind, int T, int q, int t, NetworkForm form, const InitSpec& init) {
  const KindInfo& I = info(kind);
  if (!I.simulable) throw UnsupportedForSimulation(std::string(I.name) + " networks are for resource estimation only");
  if (T < 1 || q < 1 || t < 1) throw InputError("build_network: T, q, t must be >= 1");
  MeraState s;
  s.kind = kind;
  s.T = T;
  s.q = q;
  s.t = t;
  s.form = form;
  GateFactory factory(form, init);
  Builder b(s, factory);
  for (int tau = 1; tau <= T; ++tau) {
    TensorCircuit dis;
    dis.role = Role::Disentangler;
    dis.layer = tau;
    dis.in_sites = dis.out_sites = 2;
    dis.q = q;
    dis.t = t;
    b.circuit(dis, 2 * q, t);
    s.disentanglers.push_back(std::move(dis));

    TensorCircuit iso;
    iso.role = Role::Isometry;
    iso.layer = tau;
    iso.in_sites = 1;
    iso.out_sites = I.b;
    iso.q = q;
    iso.t = t;
    for (int slot = 1; slot < I.b; ++slot) iso.fresh_slots.push_back(slot);
    b.circuit(iso, I.b * q, t);
    s.isometries.push_back(std::move(iso));
  }
  s.top.role = Role::Top;
  s.top.layer = T + 1;
  s.top.in_sites = 0;
  s.top.out_sites = 1;
  s.top.q = q;
  s.top.t = t;
  if (q == 2 && form != NetworkForm::XxBlock)
    b.add(s.top, {0, 1}, true);
  else
    b.circuit(s.top, q, t);
  if (init.mode == InitMode::Product) apply_product(s, init);
  return s;
}

void set_disentanglers_frozen(MeraState& s, bool frozen) {
  for (auto& g : s.gates)
    if (g.role == Role::Disentangler) g.frozen = frozen;
}

std::string class_name(NetworkKind k, int cls) {
  if (info(k).classes == 2) return cls == 1 ? "e" : "o";
  return "-";
}

std::vector<TransitionMap> transition_maps(const MeraState& s, int tau) {
  if (tau < 1 || tau > s.T) throw InputError("transition_maps: layer out of range");
  const KindInfo& I = info(s.kind);
  const int b = I.b, A = I.A, q = s.q;
  const int Pf = std::lcm(b, I.dis_period);
  const int nclass = I.classes;
  const TensorCircuit& iso = s.isometries[tau - 1];
  const TensorCircuit& dis = s.disentanglers[tau - 1];

  std::vector<TransitionMap> maps;
  for (int r = 0; r < Pf; ++r) {
    const long long i = 16LL * Pf + r;
    std::set<long long> sprime;
    for (int u = 0; u < A; ++u) sprime.insert(i + u);
    std::vector<long long> dis_hit;
    for (long long k = floor_div(i, I.dis_period) - 2; k <= floor_div(i + A, I.dis_period) + 2; ++k) {
      const long long f0 = I.dis_period * k + I.dis_offset;
      if ((f0 >= i && f0 < i + A) || (f0 + 1 >= i && f0 + 1 < i + A)) {
        dis_hit.push_back(k);
        sprime.insert(f0);
        sprime.insert(f0 + 1);
      }
    }
    std::set<long long> cset;
    for (long long f : sprime) cset.insert(floor_div(f - I.iso_shift, b));
    const long long j0 = *cset.begin();
    if (*cset.rbegin() - j0 >= A) throw TopologyError("causal cone wider than the register");

    TransitionMap m;
    m.layer = tau;
    m.residue = r;
    m.offset = static_cast<int>(i - b * j0);
    m.source_class = static_cast<int>(pos_mod(j0, nclass));
    m.target_class = static_cast<int>(pos_mod(i, nclass));
    m.active_qubits = A * q;

    std::map<long long, int> base;  // fine site -> register position of its qubit 0
    for (long long j : cset) base[b * j + I.iso_shift] = static_cast<int>(j - j0) * q;
    int next = A * q;
    for (long long j : cset)
      for (int slot = 1; slot < b; ++slot) {
        base[b * j + I.iso_shift + slot] = next;
        for (int x = 0; x < q; ++x) m.fresh_positions.push_back(next + x);
        next += q;
      }
    m.fresh_qubits = next - A * q;

    auto add_tensor = [&](const TensorCircuit& tc, Role role, int site, long long first_fine) {
      MapTensor mt{role, site, {}};
      const int tensor = static_cast<int>(m.tensors.size());
      for (const auto& op : tc.ops) {
        MapOp mo;
        mo.gate = op.gate;
        mo.tensor = tensor;
        for (int x : op.qubits) mo.qubits.push_back(base.at(first_fine + x / q) + x % q);
        mt.ops.push_back(static_cast<int>(m.ops.size()));
        m.ops.push_back(std::move(mo));
      }
      m.tensors.push_back(std::move(mt));
    };
    for (long long j : cset) add_tensor(iso, Role::Isometry, static_cast<int>(j - j0), b * j + I.iso_shift);
    for (long long k : dis_hit)
      add_tensor(dis, Role::Disentangler, static_cast<int>(k), I.dis_period * k + I.dis_offset);

    std::vector<bool> kept(next, false);
    for (int u = 0; u < A; ++u)
      for (int x = 0; x < q; ++x) {
        const int p = base.at(i + u) + x;
        m.keep.push_back(p);
        kept[p] = true;
      }
    for (int p = 0; p < next; ++p)
      if (!kept[p]) m.exit.push_back(p);
    maps.push_back(std::move(m));
  }

  std::vector<int> per_class(nclass, 0);
  for (const auto& m : maps) ++per_class[m.target_class];
  for (auto& m : maps) m.weight = 1.0 / per_class[m.target_class];
  std::stable_sort(maps.begin(), maps.end(), [](const TransitionMap& a, const TransitionMap& b) {
    if (a.source_class != b.source_class) return a.source_class > b.source_class;
    return a.offset < b.offset;
  });
  static const char* binary[] = {"L", "R"};
  static const char* ternary[] = {"L", "C", "R"};
  static const char* modbin[] = {"L", "C", "R", "o"};
  for (size_t k = 0; k < maps.size(); ++k) {
    switch (s.kind) {
      case NetworkKind::Binary1D: maps[k].label = binary[k]; break;
      case NetworkKind::Ternary1D: maps[k].label = ternary[k]; break;
      case NetworkKind::ModBinary1D: maps[k].label = modbin[k]; break;
      default: break;
    }
  }
  return maps;
}

CMatrix composed_unitary(const TransitionMap& m, const std::vector<CMatrix>& mats, int /*q*/) {
  const int n = m.register_qubits();
  CMatrix u = CMatrix::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n);
  for (const auto& op : m.ops) kernels::apply_left(u, n, mats.at(op.gate), op.qubits);
  return u;
}

std::vector<std::string> branch_sequence(NetworkKind kind, long long i, int T) {
  if (kind == NetworkKind::ModBinary1D)
    throw UseParityMachine("mod-binary cones follow the parity recursion, not digit sequences");
  if (!info(kind).simulable) throw UnsupportedForSimulation("branch sequences exist for 1D kinds only");
  if (i < 0 || T < 0) throw InputError("branch_sequence: negative site index");
  static const char* binary[] = {"L", "R"};
  static const char* ternary[] = {"L", "C", "R"};
  const int b = info(kind).b;
  std::vector<std::string> out;
  for (int k = 0; k < T; ++k) {
    const int d = static_cast<int>(i % b);
    out.push_back(b == 2 ? binary[d] : ternary[d]);
    i /= b;
  }
  return out;
}

std::vector<int> cone_path(const MeraState& s, long long i) {
  const KindInfo& I = info(s.kind);
  const int Pf = std::lcm(I.b, I.dis_period);
  std::vector<int> path;
  for (int tau = 1; tau <= s.T; ++tau) {
    const auto maps = transition_maps(s, tau);
    const int r = static_cast<int>(pos_mod(i, Pf));
    int hit = -1;
    for (int k = 0; k < static_cast<int>(maps.size()); ++k)
      if (maps[k].residue == r) hit = k;
    path.push_back(hit);
    i = floor_div(i - maps[hit].offset, I.b);
  }
  return path;
}

long long cone_start(NetworkKind kind, const std::vector<int>& digits) {
  if (kind == NetworkKind::ModBinary1D) throw UseParityMachine("mod-binary cones are not digit-addressed");
  const int b = info(kind).b;
  long long i = 0, p = 1;
  for (int d : digits) {
    if (d < 0 || d >= b) throw InputError("cone_start: digit out of range");
    i += d * p;
    p *= b;
  }
  return i;
}

int oracle_top_sites(NetworkKind kind) { return info(kind).A < 2 ? 2 : info(kind).A; }

}  // namespace tmera::network
