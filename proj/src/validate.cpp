#include "tmera/validate.hpp"

#include "tmera/gradients.hpp"

namespace tmera::validate {

using network::InitMode;
using network::InitSpec;
using network::NetworkForm;
using network::NetworkKind;

namespace {

InitSpec random_init(std::uint64_t seed) {
  InitSpec s;
  s.mode = InitMode::Random;
  s.seed = seed;
  return s;
}

Check make(std::string name, double value, double tol, std::string detail = {}) {
  return {std::move(name), value <= tol, value, tol, std::move(detail)};
}

double density_defect(const simulator::InterfaceState& st) {
  double m = 0;
  for (const auto& r : st.rho) {
    m = std::max(m, std::abs(r.trace() - cplx(1, 0)));
    m = std::max(m, (r - r.adjoint()).cwiseAbs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (r + r.adjoint()));
    m = std::max(m, -es.eigenvalues().minCoeff());
  }
  return m;
}

}  // namespace

std::vector<Check> run_suite(const std::string& suite) {
  if (suite != "small" && suite != "full") throw InputError("validate: suite must be small or full");
  const bool full = suite == "full";
  const int seeds = full ? 3 : 1;
  std::vector<Check> out;
  const auto tfim = models::tfim_term(1.1, 1);

  struct Case {
    NetworkKind kind;
    int T;
  };
  std::vector<Case> cases{{NetworkKind::Binary1D, 2}, {NetworkKind::ModBinary1D, 3}, {NetworkKind::Ternary1D, 2}};
  if (full) cases.push_back({NetworkKind::Binary1D, 3});
  for (const auto& c : cases)
    for (int seed = 1; seed <= seeds; ++seed) {
      const auto s = network::build_network(c.kind, c.T, 1, 2, NetworkForm::Free, random_init(seed));
      const double e = simulator::energy_density(s, tfim);
      const double eo = simulator::oracle_energy(s, tfim, network::oracle_top_sites(c.kind));
      const std::string tag = network::to_string(c.kind) + " T=" + std::to_string(c.T) + " seed " + std::to_string(seed);
      out.push_back(make("oracle equivalence " + tag, std::abs(e - eo), 1e-10));
      const simulator::Evaluator ev(s, tfim);
      double dd = 0;
      for (int tau = 0; tau <= c.T; ++tau) dd = std::max(dd, density_defect(ev.density(s.matrices(), tau)));
      out.push_back(make("density matrices valid " + tag, dd, 1e-10));
    }

  for (int seed = 1; seed <= seeds; ++seed) {
    const auto s = network::build_network(NetworkKind::ModBinary1D, 2, 1, 1, NetworkForm::Free, random_init(seed));
    const simulator::Evaluator ev(s, tfim);
    const auto mats = s.matrices();
    const auto top = ev.density(mats, 2);
    const auto flagged = simulator::flag_channel(simulator::flag_state(top), network::transition_maps(s, 2), mats, 1);
    const auto un = simulator::unflag(flagged, 1);
    const auto ref = ev.density(mats, 1);
    double diff = 0;
    for (int k = 0; k < 2; ++k) diff = std::max(diff, (un.rho[k] - ref.rho[k]).cwiseAbs().maxCoeff());
    out.push_back(make("flag dilation seed " + std::to_string(seed), diff, 1e-10));
  }

  for (int seed = 1; seed <= seeds; ++seed) {
    {
      const auto s = network::build_network(NetworkKind::ModBinary1D, 2, 1, 1, NetworkForm::Can, random_init(seed));
      const simulator::Evaluator ev(s, tfim);
      const auto a = gradients::full_gradient(ev, s);
      const auto m = gradients::measurement_gradient(ev, s);
      out.push_back(make("adjoint vs shift rule seed " + std::to_string(seed),
                         (a.flat - m.flat).cwiseAbs().maxCoeff(), 1e-9));
    }
    {
      const auto s = network::build_network(NetworkKind::ModBinary1D, 2, 1, 1, NetworkForm::Free, random_init(seed));
      const simulator::Evaluator ev(s, tfim);
      const auto a = gradients::full_gradient(ev, s);
      const auto m = gradients::measurement_gradient(ev, s);
      out.push_back(make("adjoint vs Pauli expansion seed " + std::to_string(seed),
                         (a.flat - m.flat).cwiseAbs().maxCoeff(), 1e-9));
      double tangent = 0;
      Eigen::Index off = 0;
      for (const auto& r : s.registry()) {
        const CMatrix& u = s.gates[r.gate].gate.matrix;
        tangent = std::max(tangent, gradients::tangent_defect(u, gradients::unpack_block(a.flat.data() + off, u.rows())));
        off += 2 * u.size();
      }
      out.push_back(make("tangent invariant seed " + std::to_string(seed), tangent, 1e-9));
    }
  }
  return out;
}

}  // namespace tmera::validate
