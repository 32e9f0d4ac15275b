#include "tmera/resources.hpp"

#include <cmath>
#include <sstream>

namespace tmera::resources {

ResourceReport estimate_resources(network::NetworkKind kind, int q, int t, int T, std::optional<long long> N,
                                  std::optional<double> eps) {
  if (q < 1 || t < 1 || T < 1) throw InputError("estimate: q, t, layers must be >= 1");
  if (N && *N < 1) throw InputError("estimate: sites must be >= 1");
  if (eps && !(*eps > 0 && *eps < 1)) throw InputError("estimate: eps must lie in (0, 1)");
  const auto& I = network::info(kind);
  ResourceReport r;
  r.kind = kind;
  r.b = I.b;
  r.A_sites = I.A;
  switch (kind) {
    case network::NetworkKind::Square2x2: r.A = "3x3"; break;
    case network::NetworkKind::Square3x3: r.A = "2x2"; break;
    default: r.A = std::to_string(I.A);
  }
  r.q = q, r.t = t, r.T = T, r.N = N, r.eps = eps;
  r.register_qubits = I.register_coef * q;
  r.aux_qubits_per_layer = I.aux;
  r.no_reset_qubits = static_cast<long long>(I.b - 1) * I.A * q * T;
  r.r = I.classical_exp;
  r.f = I.fquantum_exp;
  const std::string rs = std::to_string(r.r), fs = std::to_string(r.f);
  r.classical = "O(2^{" + rs + "q}T)";
  r.quantum = "O(q(tT)^2)";
  r.fquantum = "O(2^{" + fs + "q}T^2)";
  r.classical_heterogeneous = "O(2^{" + rs + "q}N)";
  r.quantum_heterogeneous = "O(q(tT)^2N)";
  r.log2_classical = r.r * q + std::log2(T);
  r.quantum_value = q * std::pow(double(t) * T, 2);
  r.log2_fquantum = r.f * q + 2 * std::log2(T);
  if (N) {
    r.classical_heterogeneous_log2 = r.r * q + std::log2(double(*N));
    r.quantum_heterogeneous_value = r.quantum_value * double(*N);
  }
  if (eps) {
    r.qae = "O(T^2 t^2 q log(1/eps)/eps)";
    r.qae_value = double(T) * T * t * t * q * std::log(1 / *eps) / *eps;
  }
  return r;
}

nlohmann::json to_json(const ResourceReport& r) {
  nlohmann::json j{{"kind", network::to_string(r.kind)},
                   {"b", r.b},
                   {"A", r.A},
                   {"q", r.q},
                   {"t", r.t},
                   {"T", r.T},
                   {"register_qubits", r.register_qubits},
                   {"aux_qubits_per_layer", r.aux_qubits_per_layer},
                   {"no_reset_qubits", r.no_reset_qubits},
                   {"classical_exponent_r", r.r},
                   {"fquantum_exponent", r.f},
                   {"classical", r.classical},
                   {"quantum", r.quantum},
                   {"fquantum", r.fquantum},
                   {"classical_heterogeneous", r.classical_heterogeneous},
                   {"quantum_heterogeneous", r.quantum_heterogeneous},
                   {"log2_classical", r.log2_classical},
                   {"quantum_value", r.quantum_value},
                   {"log2_fquantum", r.log2_fquantum}};
  if (r.N) {
    j["N"] = *r.N;
    j["log2_classical_heterogeneous"] = *r.classical_heterogeneous_log2;
    j["quantum_heterogeneous_value"] = *r.quantum_heterogeneous_value;
  }
  if (r.eps) {
    j["eps"] = *r.eps;
    j["qae"] = r.qae;
    j["qae_value"] = *r.qae_value;
  }
  return j;
}

std::string to_text(const ResourceReport& r) {
  std::ostringstream o;
  o << "kind " << network::to_string(r.kind) << "  b " << r.b << "  A " << r.A << "\n"
    << "register qubits " << r.register_qubits << "  auxiliary per layer " << r.aux_qubits_per_layer
    << "  without resets " << r.no_reset_qubits << "\n"
    << "classical " << r.classical << "  quantum " << r.quantum << "  f-quantum " << r.fquantum << "\n"
    << "heterogeneous: classical " << r.classical_heterogeneous << "  quantum " << r.quantum_heterogeneous << "\n";
  if (r.eps) o << "QAE " << r.qae << " = " << *r.qae_value << "\n";
  return o.str();
}

}  // namespace tmera::resources
