#pragma once

#include <cstdint>
#include <vector>

#include "tmera/models.hpp"
#include "tmera/network.hpp"

namespace tmera::simulator {

using network::MeraState;
using network::TransitionMap;

// One step of a compiled register program. The live register is an ordered
// list of map-register positions; instruction qubits index the live list.
struct Instr {
  enum class Op { Fresh, Gate, Trace, Permute };
  Op op = Op::Gate;
  int gate = -1;            // gate id (Gate)
  int occurrence = -1;      // op index inside the transition map (Gate)
  int count = 0;            // fresh qubits appended at the end (Fresh)
  std::vector<int> qubits;  // Gate targets, Trace drops, Permute order
};

struct Program {
  int layer = 0;  // T+1 for the top program
  int map = 0;
  std::string label;
  int source_class = 0;
  int target_class = 0;
  double weight = 1;
  int n_in = 0;
  int n_out = 0;
  int peak = 0;   // largest live register
  double cost = 0;  // sum over gates of 4^live
  std::vector<Instr> code;
};

// Lazy fresh insertion, eager trace-out, best tensor order.
Program compile_map(const TransitionMap& m);
// Reference schedule: every fresh qubit up front, trace at the end.
Program naive_program(const TransitionMap& m);

struct CompiledNetwork {
  network::NetworkKind kind{};
  int T = 0, q = 0, A = 0, classes = 1;
  Program top;                              // 0 -> A*q qubits, same state for every class
  std::vector<std::vector<Program>> layers;  // [tau-1]
  int peak_qubits() const;
};

CompiledNetwork compile(const MeraState& s, bool naive = false);

// Replace the matrix of one gate occurrence (layer, map, occurrence).
struct GateOverride {
  int layer = 0;
  int map = 0;
  int occurrence = 0;
  CMatrix matrix;
};
using Overrides = std::vector<GateOverride>;

// Every place a gate is applied during one energy evaluation.
struct Occurrence {
  int layer = 0;
  int map = 0;
  int occurrence = 0;
};

CMatrix run_program(const Program& p, CMatrix rho, const std::vector<CMatrix>& mats, const Overrides* ov = nullptr);

// Density matrices on A*q qubits, one per bond class.
struct InterfaceState {
  int layer = 0;
  std::vector<CMatrix> rho;
};

InterfaceState top_state(const CompiledNetwork& c, const std::vector<CMatrix>& mats, const Overrides* ov = nullptr);
// Exact weighted sum over the layer's maps. Throws TopologyError when a
// map's source class has no density in `in`.
InterfaceState apply_transition_channel(const InterfaceState& in, const std::vector<Program>& maps,
                                        const std::vector<CMatrix>& mats, const Overrides* ov = nullptr);
InterfaceState averaged_density(const MeraState& s, int tau);

// Two-site term on the first two sites of the A*q register.
CMatrix register_term(const CMatrix& h, int A, int q);

// Cached structure for repeated evaluations of one network layout.
class Evaluator {
 public:
  Evaluator(const MeraState& s, const models::LocalModel& model);

  const CompiledNetwork& compiled() const { return c_; }
  const MeraState& layout() const { return s_; }

  InterfaceState density(const std::vector<CMatrix>& mats, int tau = 0, const Overrides* ov = nullptr) const;
  double energy(const std::vector<CMatrix>& mats, const Overrides* ov = nullptr) const;
  // Energy plus d_g = 2 dE/d(conj g) for every gate id (Euclidean gradient
  // in the embedding space), by a backward Heisenberg pass.
  double energy_and_gradient(const std::vector<CMatrix>& mats, std::vector<CMatrix>& grad) const;
  std::vector<Occurrence> occurrences(int gate) const;

 private:
  MeraState s_;
  CompiledNetwork c_;
  CMatrix h_;
  std::vector<std::vector<Occurrence>> occ_;
};

double energy_density(const MeraState& s, const models::LocalModel& model);

// Pure-state reference: average of <h_i> over the periodic oracle lattice,
// one translation period unless every_site is set.
double oracle_energy(const MeraState& s, const models::LocalModel& model, int top_sites, bool every_site = false);

// ModBinary flag-qubit form: 1/2 (|0><0| (x) rho_e + |1><1| (x) rho_o), flag first.
CMatrix flag_state(const InterfaceState& st);
// One layer of the four-operator channel on the flag register, built from
// the maps' composed unitaries; returns the flag-form density.
CMatrix flag_channel(const CMatrix& flagged, const std::vector<TransitionMap>& maps, const std::vector<CMatrix>& mats,
                     int q);
InterfaceState unflag(const CMatrix& flagged, int layer);

struct ShotEstimate {
  double mean = 0;
  long long shots = 0;
  double std_error = 0;
};

// Projective measurements of h in its eigenbasis on the averaged bond
// densities; ModBinary alternates the bond class shot by shot.
ShotEstimate sample_energy(const MeraState& s, const models::LocalModel& model, long long shots, std::uint64_t seed);

}  // namespace tmera::simulator
