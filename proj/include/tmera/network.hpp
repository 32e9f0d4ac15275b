#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tmera/gates.hpp"

namespace tmera::network {

using gates::GateForm;
using gates::TrotterGate;

enum class NetworkKind { Binary1D, ModBinary1D, Ternary1D, Square2x2, Square3x3 };

struct KindInfo {
  const char* name;
  int b;               // branching ratio
  int A;               // causal-cone cross-section in sites
  int register_coef;   // register qubits = register_coef * q
  int aux;             // auxiliary qubits per layer
  int classical_exp;   // classical fMERA cost 2^{r q}
  int fquantum_exp;    // f-quantum cost 2^{f q}
  bool simulable;
  // 1D layer placement: isometry j -> fine sites b*j + iso_shift + s,
  // disentangler k -> fine sites dis_period*k + dis_offset + {0,1}
  int iso_shift;
  int dis_period;
  int dis_offset;
  int classes;  // bond classes per interface (2 for the parity pair)
};

const KindInfo& info(NetworkKind k);
std::string to_string(NetworkKind k);
NetworkKind kind_from_string(const std::string& s);

struct UnsupportedForSimulation : InputError {
  using InputError::InputError;
};
struct TopologyError : InputError {
  using InputError::InputError;
};
struct ResourceError : InputError {
  using InputError::InputError;
};

// Network-wide gate parametrization.
enum class NetworkForm { Free, Can, Cnot, XxBlock };
std::string to_string(NetworkForm f);
NetworkForm network_form_from_string(const std::string& s);

enum class Role { Disentangler, Isometry, Top };
std::string to_string(Role r);
Role role_from_string(const std::string& s);

struct GateOp {
  int gate = -1;
  std::vector<int> qubits;  // tensor-local
};

struct TensorCircuit {
  Role role = Role::Disentangler;
  int layer = 0;  // 1..T, T+1 for the top
  int in_sites = 0;
  int out_sites = 0;
  int q = 1;
  int t = 1;
  std::vector<GateOp> ops;
  std::vector<int> fresh_slots;  // output slots fed by |0> qubits
  int num_qubits() const { return out_sites * q; }
};

struct GateSlot {
  int id = -1;
  int layer = 0;
  Role role = Role::Disentangler;
  std::vector<int> qubits;  // tensor-local
  TrotterGate gate;
  bool frozen = false;
};

// flat parameter index -> (gate, angle slot); slot -1 addresses a whole gate
struct ParamRef {
  int gate = -1;
  int slot = -1;
};

struct MeraState {
  NetworkKind kind = NetworkKind::ModBinary1D;
  int T = 1, q = 1, t = 1;
  NetworkForm form = NetworkForm::Free;
  std::vector<GateSlot> gates;
  std::vector<TensorCircuit> disentanglers;  // index tau-1
  std::vector<TensorCircuit> isometries;     // index tau-1
  TensorCircuit top;

  std::vector<CMatrix> matrices() const;
  // Riemannian registry for FREE networks, angle registry otherwise.
  std::vector<ParamRef> registry() const;
  void set_gate(int id, TrotterGate g);
  int count_two_qubit_gates() const;
};

enum class InitMode { Identity, Product, Random };

struct InitSpec {
  InitMode mode = InitMode::Identity;
  std::uint64_t seed = 0;
  // product state R_z(a) R_y(b) R_z(c)|0> on each site's designated qubit
  std::array<double, 3> product{0, 0, 0};
  // Random: 0 draws Haar gates / uniform angles; > 0 perturbs identity by this size
  double scale = 0;
};

InitSpec product_init_fig2();         // e^{-i pi/8 Z} e^{-i pi/8 Y}|0>
InitSpec product_init_alternative();  // R_z(pi/4) R_y(pi/4) R_z(pi/4)|0>

MeraState build_network(NetworkKind kind, int T, int q, int t, NetworkForm form, const InitSpec& init = {});

// Freeze or release all disentanglers (TTN phase).
void set_disentanglers_frozen(MeraState& s, bool frozen);

struct MapOp {
  int gate = -1;
  std::vector<int> qubits;  // register positions
  int tensor = -1;          // index into TransitionMap::tensors
};

struct MapTensor {
  Role role;
  int site;  // coarse site (isometry) or disentangler index
  std::vector<int> ops;  // indices into TransitionMap::ops
};

// One causal-cone layer transition. The register holds the A*q coarse block
// qubits followed by the fresh qubits of every isometry in the cone.
struct TransitionMap {
  std::string label;
  int layer = 0;
  int residue = 0;        // fine block start mod the structural period
  int offset = 0;         // fine block start - b * coarse block start
  int source_class = 0;   // bond class of the coarse block (parity for ModBinary)
  int target_class = 0;
  double weight = 0;
  int active_qubits = 0;  // A*q
  int fresh_qubits = 0;
  std::vector<int> fresh_positions;  // register positions of fresh qubits
  std::vector<MapOp> ops;            // tensor order: isometries then disentanglers
  std::vector<MapTensor> tensors;
  std::vector<int> keep;             // register positions of the target block, ordered
  std::vector<int> exit;             // traced-out register positions

  int register_qubits() const { return active_qubits + fresh_qubits; }
};

std::vector<TransitionMap> transition_maps(const MeraState& s, int tau);
std::string class_name(NetworkKind k, int cls);

// Product of the map's gates on the enlarged register.
CMatrix composed_unitary(const TransitionMap& m, const std::vector<CMatrix>& mats, int q);

struct UseParityMachine : InputError {
  using InputError::InputError;
};
std::vector<std::string> branch_sequence(NetworkKind kind, long long i, int T);
// Map index per layer (layer 1 first) preparing the fine block starting at i.
std::vector<int> cone_path(const MeraState& s, long long i);
// Fine block start reached by a branch digit sequence (least significant first).
long long cone_start(NetworkKind kind, const std::vector<int>& digits);

// Top site count of the smallest periodic lattice whose causal cones do not wrap.
int oracle_top_sites(NetworkKind kind);
inline constexpr int oracle_qubit_cap = 24;
// Full wavefunction on N_T * b^T sites (q qubits each), periodic.
CVector full_state_oracle(const MeraState& s, int top_sites);
// Smallest shift of the physical lattice that maps the periodic network onto
// itself; site averages over one period equal averages over the lattice.
int translation_period(NetworkKind kind, int T, int top_sites);

// JSON state document
std::string serialize(const MeraState& s);
MeraState deserialize(const std::string& text);

}  // namespace tmera::network
