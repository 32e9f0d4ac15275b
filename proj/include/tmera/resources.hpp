#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "tmera/network.hpp"

namespace tmera::resources {

// Qubit counts and cost scalings of one network kind.
struct ResourceReport {
  network::NetworkKind kind{};
  int b = 0;
  std::string A;  // causal-cone cross-section, "3x3" style in 2D
  int A_sites = 0;
  int q = 0, t = 0, T = 0;
  std::optional<long long> N;
  std::optional<double> eps;

  int register_qubits = 0;
  int aux_qubits_per_layer = 0;
  long long no_reset_qubits = 0;  // (b-1) A q T

  int r = 0;            // classical exponent: 2^{r q}
  int f = 0;            // f-quantum exponent: 2^{f q}
  std::string classical;        // homogeneous
  std::string quantum;
  std::string fquantum;
  std::string classical_heterogeneous;
  std::string quantum_heterogeneous;
  std::string qae;      // empty without eps

  double log2_classical = 0;   // r q + log2 T
  double quantum_value = 0;    // q (tT)^2
  double log2_fquantum = 0;    // f q + 2 log2 T
  std::optional<double> classical_heterogeneous_log2;
  std::optional<double> quantum_heterogeneous_value;
  std::optional<double> qae_value;  // T^2 t^2 q log(1/eps) / eps
};

ResourceReport estimate_resources(network::NetworkKind kind, int q, int t, int T, std::optional<long long> N = {},
                                  std::optional<double> eps = {});
nlohmann::json to_json(const ResourceReport& r);
std::string to_text(const ResourceReport& r);

}  // namespace tmera::resources
