#include <map>
#include <numeric>

#include "tmera/kernels.hpp"
#include "tmera/network.hpp"

namespace tmera::network {

// Contracts the whole periodic network into a wavefunction. Shares only the
// layer placement rules and tensor circuits with the causal-cone machinery.
CVector full_state_oracle(const MeraState& s, int top_sites) {
  const KindInfo& I = info(s.kind);
  if (!I.simulable) throw UnsupportedForSimulation("oracle needs a 1D kind");
  const int q = s.q, b = I.b;
  long long sites = top_sites;
  for (int k = 0; k < s.T; ++k) sites *= b;
  if (top_sites < 1 || sites * q > oracle_qubit_cap)
    throw ResourceError("full_state_oracle: " + std::to_string(sites * q) + " qubits exceeds the cap");
  if ((top_sites * b) % I.dis_period != 0) throw TopologyError("full_state_oracle: top size incompatible with layout");

  const auto mats = s.matrices();
  // Each tensor's circuit is multiplied out once and applied as one dense gate.
  auto fused = [&](const TensorCircuit& tc) {
    const int nq = tc.num_qubits();
    CMatrix u = CMatrix::Identity(Eigen::Index{1} << nq, Eigen::Index{1} << nq);
    for (const auto& op : tc.ops) kernels::apply_left(u, nq, mats[op.gate], op.qubits);
    return u;
  };
  auto apply_tensor = [&](CVector& psi, int n, const CMatrix& u, const std::vector<int>& block_of_slot) {
    std::vector<int> qs;
    for (int blk : block_of_slot)
      for (int x = 0; x < q; ++x) qs.push_back(blk * q + x);
    kernels::apply_sv(psi, n, u, qs);
  };

  int n = top_sites * q;
  CVector psi = CVector::Zero(Eigen::Index{1} << n);
  psi(0) = 1;
  const CMatrix top = fused(s.top);
  for (int site = 0; site < top_sites; ++site) apply_tensor(psi, n, top, {site});

  long long nc = top_sites;
  for (int tau = s.T; tau >= 1; --tau) {
    const long long nf = nc * b;
    const CMatrix iso = fused(s.isometries[tau - 1]), dis = fused(s.disentanglers[tau - 1]);
    auto fine = [&](long long f) { return static_cast<int>(((f % nf) + nf) % nf); };
    std::vector<int> site_of_block(nc);
    std::map<int, int> block_of_site;
    for (long long j = 0; j < nc; ++j) {
      site_of_block[j] = fine(b * j + I.iso_shift);
      block_of_site[site_of_block[j]] = static_cast<int>(j);
    }
    for (long long j = 0; j < nc; ++j) {
      const int extra = (b - 1) * q;
      const CVector old = psi;
      psi = CVector::Zero(old.size() << extra);
      for (Eigen::Index x = 0; x < old.size(); ++x) psi(x << extra) = old(x);
      n += extra;
      std::vector<int> slots{block_of_site.at(fine(b * j + I.iso_shift))};
      for (int slot = 1; slot < b; ++slot) {
        const int blk = static_cast<int>(site_of_block.size());
        site_of_block.push_back(fine(b * j + I.iso_shift + slot));
        block_of_site[site_of_block.back()] = blk;
        slots.push_back(blk);
      }
      apply_tensor(psi, n, iso, slots);
    }
    std::vector<int> order;
    for (int f = 0; f < nf; ++f)
      for (int x = 0; x < q; ++x) order.push_back(block_of_site.at(f) * q + x);
    psi = kernels::permute_state(psi, n, order);
    for (long long k = 0; k < nf / I.dis_period; ++k) {
      const int f0 = fine(I.dis_period * k + I.dis_offset);
      apply_tensor(psi, n, dis, {f0, fine(f0 + 1)});
    }
    nc = nf;
  }
  return psi;
}

int translation_period(NetworkKind kind, int T, int top_sites) {
  const KindInfo& I = info(kind);
  const long long cell = std::lcm(I.b, I.dis_period);
  long long p = 1, scale = 1, n = top_sites;
  for (int k = 0; k < T; ++k) n *= I.b;
  // layer tau shifts by p / b^(tau-1), which must respect both placements
  for (int tau = 1; tau <= T; ++tau) {
    p = std::lcm(p, scale * cell);
    scale *= I.b;
  }
  p = std::lcm(p, scale);
  if (n % p != 0) p = n;
  return static_cast<int>(p);
}

}  // namespace tmera::network
