#include <json.hpp>

#include "tmera/network.hpp"

namespace tmera::network {
namespace {

using nlohmann::json;
constexpr int kFormatVersion = 1;

json gate_to_json(const GateSlot& g) {
  json j;
  j["id"] = g.id;
  j["layer"] = g.layer;
  j["role"] = to_string(g.role);
  j["qubit_pair"] = g.qubits;
  j["gate_form"] = gates::to_string(g.gate.form);
  json m = json::array();
  for (Eigen::Index r = 0; r < g.gate.matrix.rows(); ++r)
    for (Eigen::Index c = 0; c < g.gate.matrix.cols(); ++c)
      m.push_back({g.gate.matrix(r, c).real(), g.gate.matrix(r, c).imag()});
  j["matrix"] = m;
  if (!g.gate.angles.empty()) j["angles"] = g.gate.angles;
  if (g.frozen) j["frozen"] = true;
  return j;
}

void gate_from_json(MeraState& s, const json& j) {
  const int id = j.at("id").get<int>();
  if (id < 0 || id >= static_cast<int>(s.gates.size())) throw InputError("state file: gate id out of range");
  GateSlot& slot = s.gates[id];
  if (j.at("layer").get<int>() != slot.layer || role_from_string(j.at("role").get<std::string>()) != slot.role ||
      j.at("qubit_pair").get<std::vector<int>>() != slot.qubits)
    throw InputError("state file: gate " + std::to_string(id) + " does not match the network layout");
  const GateForm form = gates::gate_form_from_string(j.at("gate_form").get<std::string>());
  if (form != slot.gate.form) throw InputError("state file: gate form mismatch");
  const auto& m = j.at("matrix");
  const Eigen::Index d = slot.gate.matrix.rows();
  if (static_cast<Eigen::Index>(m.size()) != d * d) throw InputError("state file: matrix size mismatch");
  CMatrix u(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) {
      const auto& e = m.at(r * d + c);
      u(r, c) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
    }
  if (!qcore::is_unitary(u, 1e-9)) throw InputError("state file: gate matrix is not unitary");
  TrotterGate g;
  g.form = form;
  g.matrix = u;
  if (j.contains("angles")) {
    g.angles = j.at("angles").get<std::vector<double>>();
    if (static_cast<int>(g.angles.size()) != gates::num_angles(form)) throw InputError("state file: angle count");
    if ((gates::gate_matrix(form, g.angles) - u).cwiseAbs().maxCoeff() > 1e-9)
      throw InputError("state file: angles disagree with the stored matrix");
  } else if (form != GateForm::Free) {
    throw InputError("state file: angle-form gate without angles");
  }
  slot.gate = std::move(g);
  slot.frozen = j.value("frozen", false);
}

}  // namespace

std::string serialize(const MeraState& s) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = to_string(s.kind);
  j["T"] = s.T;
  j["q"] = s.q;
  j["t"] = s.t;
  j["form"] = to_string(s.form);
  json gl = json::array(), top = json::array();
  for (const auto& g : s.gates) (g.role == Role::Top ? top : gl).push_back(gate_to_json(g));
  j["gates"] = gl;
  j["top"] = {{"q", s.q}, {"gates", top}};
  return j.dump(1);
}

MeraState deserialize(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("state file: ") + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != kFormatVersion) throw InputError("state file: unsupported format_version");
    MeraState s = build_network(kind_from_string(j.at("kind").get<std::string>()), j.at("T").get<int>(),
                                j.at("q").get<int>(), j.at("t").get<int>(),
                                network_form_from_string(j.at("form").get<std::string>()));
    size_t seen = 0;
    for (const auto& g : j.at("gates")) gate_from_json(s, g), ++seen;
    for (const auto& g : j.at("top").at("gates")) gate_from_json(s, g), ++seen;
    if (seen != s.gates.size()) throw InputError("state file: gate count mismatch");
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("state file: ") + e.what());
  }
}

}  // namespace tmera::network
