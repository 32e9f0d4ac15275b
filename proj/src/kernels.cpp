#include "tmera/kernels.hpp"

#include <algorithm>
#include <array>

#include <omp.h>

namespace tmera::kernels {
namespace {

using Index = Eigen::Index;

struct Layout {
  int k = 0;
  std::vector<Index> off;  // local basis index -> register offset
  std::vector<int> pos;    // bit positions, ascending
  Index nbase = 0;
};

Layout make_layout(int n, std::span<const int> qubits) {
  Layout L;
  L.k = static_cast<int>(qubits.size());
  std::vector<bool> used(n, false);
  for (int a : qubits) {
    if (a < 0 || a >= n) throw InputError("kernel: qubit index out of range");
    if (used[a]) throw InputError("kernel: repeated qubit index");
    used[a] = true;
    L.pos.push_back(n - 1 - a);
  }
  std::sort(L.pos.begin(), L.pos.end());
  L.off.assign(Index{1} << L.k, 0);
  for (Index l = 0; l < static_cast<Index>(L.off.size()); ++l) {
    Index o = 0;
    for (int j = 0; j < L.k; ++j)
      if ((l >> (L.k - 1 - j)) & 1) o |= Index{1} << (n - 1 - qubits[j]);
    L.off[l] = o;
  }
  L.nbase = Index{1} << (n - L.k);
  return L;
}

inline Index base_index(Index i, const std::vector<int>& pos) {
  for (int p : pos) {
    const Index low = i & ((Index{1} << p) - 1);
    i = ((i >> p) << (p + 1)) | low;
  }
  return i;
}

void check_gate(const CMatrix& g, const Layout& L) {
  if (g.rows() != (Index{1} << L.k) || g.cols() != g.rows())
    throw InputError("kernel: gate dimension does not match qubit count");
}

template <int D>
void left_fixed(cplx* data, Index dim, Index cols, const CMatrix& g, const Layout& L) {
  std::array<cplx, D * D> G;
  for (int r = 0; r < D; ++r)
    for (int c = 0; c < D; ++c) G[r * D + c] = g(r, c);
  std::array<Index, D> off;
  for (int l = 0; l < D; ++l) off[l] = L.off[l];
#pragma omp parallel for schedule(static) if (dim * cols >= 16384)
  for (Index c = 0; c < cols; ++c) {
    cplx* col = data + c * dim;
    for (Index b = 0; b < L.nbase; ++b) {
      const Index base = base_index(b, L.pos);
      std::array<cplx, D> v;
      for (int l = 0; l < D; ++l) v[l] = col[base + off[l]];
      for (int r = 0; r < D; ++r) {
        cplx s = 0;
        for (int l = 0; l < D; ++l) s += G[r * D + l] * v[l];
        col[base + off[r]] = s;
      }
    }
  }
}

void left_dynamic(cplx* data, Index dim, Index cols, const CMatrix& g, const Layout& L) {
  const Index D = g.rows();
#pragma omp parallel for schedule(static) if (dim * cols >= 16384)
  for (Index c = 0; c < cols; ++c) {
    cplx* col = data + c * dim;
    CVector v(D), w(D);
    for (Index b = 0; b < L.nbase; ++b) {
      const Index base = base_index(b, L.pos);
      for (Index l = 0; l < D; ++l) v(l) = col[base + L.off[l]];
      w.noalias() = g * v;
      for (Index l = 0; l < D; ++l) col[base + L.off[l]] = w(l);
    }
  }
}

template <int D>
void right_adj_fixed(cplx* data, Index dim, const CMatrix& g, const Layout& L) {
  std::array<cplx, D * D> Gc;
  for (int r = 0; r < D; ++r)
    for (int c = 0; c < D; ++c) Gc[r * D + c] = std::conj(g(r, c));
#pragma omp parallel for schedule(static) if (dim * dim >= 16384)
  for (Index b = 0; b < L.nbase; ++b) {
    const Index base = base_index(b, L.pos);
    std::array<cplx*, D> col;
    for (int l = 0; l < D; ++l) col[l] = data + (base + L.off[l]) * dim;
    for (Index r = 0; r < dim; ++r) {
      std::array<cplx, D> v;
      for (int l = 0; l < D; ++l) v[l] = col[l][r];
      for (int k = 0; k < D; ++k) {
        cplx s = 0;
        for (int l = 0; l < D; ++l) s += Gc[k * D + l] * v[l];
        col[k][r] = s;
      }
    }
  }
}

void right_adj_dynamic(cplx* data, Index dim, const CMatrix& g, const Layout& L) {
  const Index D = g.rows();
  const CMatrix gc = g.conjugate();
#pragma omp parallel for schedule(static) if (dim * dim >= 16384)
  for (Index b = 0; b < L.nbase; ++b) {
    const Index base = base_index(b, L.pos);
    CVector v(D), w(D);
    for (Index r = 0; r < dim; ++r) {
      for (Index l = 0; l < D; ++l) v(l) = data[(base + L.off[l]) * dim + r];
      w.noalias() = gc * v;
      for (Index l = 0; l < D; ++l) data[(base + L.off[l]) * dim + r] = w(l);
    }
  }
}

void check_square(const CMatrix& m, int n) {
  if (m.rows() != (Index{1} << n) || m.cols() != m.rows())
    throw InputError("kernel: matrix dimension does not match qubit count");
}

}  // namespace

CMatrix embed(const CMatrix& g, int n, std::span<const int> qubits) {
  Layout L = make_layout(n, qubits);
  check_gate(g, L);
  const Index dim = Index{1} << n;
  CMatrix e = CMatrix::Zero(dim, dim);
  for (Index b = 0; b < L.nbase; ++b) {
    const Index base = base_index(b, L.pos);
    for (Index r = 0; r < g.rows(); ++r)
      for (Index c = 0; c < g.cols(); ++c) e(base + L.off[r], base + L.off[c]) = g(r, c);
  }
  return e;
}

void apply_left(CMatrix& m, int n, const CMatrix& g, std::span<const int> qubits) {
  Layout L = make_layout(n, qubits);
  check_gate(g, L);
  if (m.rows() != (Index{1} << n)) throw InputError("apply_left: row dimension mismatch");
  switch (L.k) {
    case 1: left_fixed<2>(m.data(), m.rows(), m.cols(), g, L); break;
    case 2: left_fixed<4>(m.data(), m.rows(), m.cols(), g, L); break;
    default: left_dynamic(m.data(), m.rows(), m.cols(), g, L);
  }
}

void apply_right_adjoint(CMatrix& m, int n, const CMatrix& g, std::span<const int> qubits) {
  Layout L = make_layout(n, qubits);
  check_gate(g, L);
  check_square(m, n);
  switch (L.k) {
    case 1: right_adj_fixed<2>(m.data(), m.rows(), g, L); break;
    case 2: right_adj_fixed<4>(m.data(), m.rows(), g, L); break;
    default: right_adj_dynamic(m.data(), m.rows(), g, L);
  }
}

void apply_dm(CMatrix& rho, int n, const CMatrix& g, std::span<const int> qubits) {
  check_square(rho, n);
  apply_left(rho, n, g, qubits);
  apply_right_adjoint(rho, n, g, qubits);
}

void apply_dm_serial(CMatrix& rho, int n, const CMatrix& g, std::span<const int> qubits) {
  check_square(rho, n);
  const CMatrix e = embed(g, n, qubits);
  rho = (e * rho * e.adjoint()).eval();
}

void apply_sv(CVector& psi, int n, const CMatrix& g, std::span<const int> qubits) {
  Layout L = make_layout(n, qubits);
  check_gate(g, L);
  if (psi.size() != (Index{1} << n)) throw InputError("apply_sv: state dimension mismatch");
  const Index dim = psi.size();
  cplx* data = psi.data();
  if (L.k == 2) {
    std::array<cplx, 16> G;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) G[r * 4 + c] = g(r, c);
    const Index o1 = L.off[1], o2 = L.off[2], o3 = L.off[3];
#pragma omp parallel for schedule(static) if (dim >= 16384)
    for (Index b = 0; b < L.nbase; ++b) {
      const Index base = base_index(b, L.pos);
      const cplx v0 = data[base], v1 = data[base + o1], v2 = data[base + o2], v3 = data[base + o3];
      data[base] = G[0] * v0 + G[1] * v1 + G[2] * v2 + G[3] * v3;
      data[base + o1] = G[4] * v0 + G[5] * v1 + G[6] * v2 + G[7] * v3;
      data[base + o2] = G[8] * v0 + G[9] * v1 + G[10] * v2 + G[11] * v3;
      data[base + o3] = G[12] * v0 + G[13] * v1 + G[14] * v2 + G[15] * v3;
    }
    return;
  }
  if (L.k == 1)
    left_fixed<2>(data, dim, 1, g, L);
  else
    left_dynamic(data, dim, 1, g, L);
}

void apply_sv_serial(CVector& psi, int n, const CMatrix& g, std::span<const int> qubits) {
  const CMatrix e = embed(g, n, qubits);
  psi = (e * psi).eval();
}

CMatrix reduce(const CMatrix& rho, int n, std::span<const int> keep) {
  check_square(rho, n);
  Layout L = make_layout(n, keep);
  const Index d = Index{1} << L.k;
  CMatrix out = CMatrix::Zero(d, d);
  for (Index b = 0; b < L.nbase; ++b) {
    const Index base = base_index(b, L.pos);
    for (Index c = 0; c < d; ++c) {
      const cplx* col = rho.data() + (base + L.off[c]) * rho.rows();
      for (Index r = 0; r < d; ++r) out(r, c) += col[base + L.off[r]];
    }
  }
  return out;
}

CMatrix reduce_serial(const CMatrix& rho, int n, std::span<const int> keep) {
  std::vector<int> order(keep.begin(), keep.end());
  for (int a = 0; a < n; ++a)
    if (std::find(keep.begin(), keep.end(), a) == keep.end()) order.push_back(a);
  const CMatrix p = permute(rho, n, order);
  const Index d = Index{1} << keep.size();
  const Index rest = p.rows() / d;
  CMatrix out = CMatrix::Zero(d, d);
  for (Index r = 0; r < d; ++r)
    for (Index c = 0; c < d; ++c)
      for (Index s = 0; s < rest; ++s) out(r, c) += p(r * rest + s, c * rest + s);
  return out;
}

CMatrix trace_out(const CMatrix& rho, int n, std::span<const int> drop) {
  std::vector<int> keep;
  for (int a = 0; a < n; ++a)
    if (std::find(drop.begin(), drop.end(), a) == drop.end()) keep.push_back(a);
  return reduce(rho, n, keep);
}

CMatrix reduce_state(const CVector& psi, int n, std::span<const int> keep) {
  if (psi.size() != (Index{1} << n)) throw InputError("reduce_state: state dimension mismatch");
  Layout L = make_layout(n, keep);
  const Index d = Index{1} << L.k;
  CMatrix out = CMatrix::Zero(d, d);
#pragma omp parallel
  {
    CMatrix local = CMatrix::Zero(d, d);
    CVector v(d);
#pragma omp for schedule(static)
    for (Index b = 0; b < L.nbase; ++b) {
      const Index base = base_index(b, L.pos);
      for (Index l = 0; l < d; ++l) v(l) = psi(base + L.off[l]);
      local.noalias() += v * v.adjoint();
    }
#pragma omp critical
    out += local;
  }
  return out;
}

CMatrix append_zero(const CMatrix& rho, int n, int k) {
  check_square(rho, n);
  const Index s = Index{1} << k;
  const Index dim = rho.rows();
  CMatrix out = CMatrix::Zero(dim * s, dim * s);
  for (Index c = 0; c < dim; ++c)
    for (Index r = 0; r < dim; ++r) out(r * s, c * s) = rho(r, c);
  return out;
}

CMatrix project_zero(const CMatrix& h, int n, int k) {
  check_square(h, n);
  const Index s = Index{1} << k;
  const Index dim = h.rows() / s;
  CMatrix out(dim, dim);
  for (Index c = 0; c < dim; ++c)
    for (Index r = 0; r < dim; ++r) out(r, c) = h(r * s, c * s);
  return out;
}

CMatrix insert_identity(const CMatrix& h, int n_out, std::span<const int> positions) {
  Layout L = make_layout(n_out, positions);
  check_square(h, n_out - L.k);
  const Index dim = Index{1} << n_out;
  const Index d = Index{1} << L.k;
  std::vector<Index> base(L.nbase);
  for (Index b = 0; b < L.nbase; ++b) base[b] = base_index(b, L.pos);
  CMatrix out = CMatrix::Zero(dim, dim);
  for (Index j = 0; j < L.nbase; ++j)
    for (Index i = 0; i < L.nbase; ++i) {
      const cplx v = h(i, j);
      for (Index l = 0; l < d; ++l) out(base[i] + L.off[l], base[j] + L.off[l]) = v;
    }
  return out;
}

namespace {
std::vector<Index> permutation_map(int n, std::span<const int> order) {
  if (static_cast<int>(order.size()) != n) throw InputError("permute: order has wrong length");
  std::vector<bool> seen(n, false);
  for (int a : order) {
    if (a < 0 || a >= n || seen[a]) throw InputError("permute: order is not a permutation");
    seen[a] = true;
  }
  const Index dim = Index{1} << n;
  std::vector<Index> map(dim);
  for (Index x = 0; x < dim; ++x) {
    Index y = 0;
    for (int k = 0; k < n; ++k)
      if ((x >> (n - 1 - k)) & 1) y |= Index{1} << (n - 1 - order[k]);
    map[x] = y;
  }
  return map;
}
}  // namespace

CMatrix permute(const CMatrix& rho, int n, std::span<const int> order) {
  check_square(rho, n);
  const auto map = permutation_map(n, order);
  const Index dim = rho.rows();
  CMatrix out(dim, dim);
  for (Index c = 0; c < dim; ++c)
    for (Index r = 0; r < dim; ++r) out(r, c) = rho(map[r], map[c]);
  return out;
}

CVector permute_state(const CVector& psi, int n, std::span<const int> order) {
  if (psi.size() != (Index{1} << n)) throw InputError("permute_state: state dimension mismatch");
  std::vector<bool> seen(n, false);
  for (int a : order) {
    if (a < 0 || a >= n || seen[a]) throw InputError("permute_state: order is not a permutation");
    seen[a] = true;
  }
  // index map split into a high and a low half, each tabulated
  const int lo_bits = n / 2, hi_bits = n - lo_bits;
  std::vector<Index> lo(Index{1} << lo_bits, 0), hi(Index{1} << hi_bits, 0);
  for (int k = 0; k < n; ++k) {
    const int src = n - 1 - k;  // bit position of new qubit k
    const Index bit = Index{1} << (n - 1 - order[k]);
    if (src < lo_bits) {
      for (Index x = 0; x < static_cast<Index>(lo.size()); ++x)
        if ((x >> src) & 1) lo[x] |= bit;
    } else {
      for (Index x = 0; x < static_cast<Index>(hi.size()); ++x)
        if ((x >> (src - lo_bits)) & 1) hi[x] |= bit;
    }
  }
  const Index dim = psi.size();
  const Index mask = (Index{1} << lo_bits) - 1;
  CVector out(dim);
#pragma omp parallel for schedule(static) if (dim >= 16384)
  for (Index x = 0; x < dim; ++x) out(x) = psi(hi[x >> lo_bits] | lo[x & mask]);
  return out;
}

double expectation_sv(const CVector& psi, int n, const CMatrix& op, std::span<const int> qubits) {
  if (psi.size() != (Index{1} << n)) throw InputError("expectation_sv: state dimension mismatch");
  Layout L = make_layout(n, qubits);
  check_gate(op, L);
  const Index d = Index{1} << L.k;
  std::vector<cplx> O(d * d);
  for (Index r = 0; r < d; ++r)
    for (Index c = 0; c < d; ++c) O[r * d + c] = op(r, c);
  const cplx* data = psi.data();
  double total = 0;
  if (d == 4) {
    const Index o1 = L.off[1], o2 = L.off[2], o3 = L.off[3];
#pragma omp parallel for reduction(+ : total) schedule(static)
    for (Index b = 0; b < L.nbase; ++b) {
      const Index base = base_index(b, L.pos);
      const cplx v[4] = {data[base], data[base + o1], data[base + o2], data[base + o3]};
      double acc = 0;
      for (int r = 0; r < 4; ++r) {
        const cplx s = O[r * 4] * v[0] + O[r * 4 + 1] * v[1] + O[r * 4 + 2] * v[2] + O[r * 4 + 3] * v[3];
        acc += v[r].real() * s.real() + v[r].imag() * s.imag();
      }
      total += acc;
    }
    return total;
  }
#pragma omp parallel reduction(+ : total)
  {
    std::vector<cplx> v(d);
#pragma omp for schedule(static)
    for (Index b = 0; b < L.nbase; ++b) {
      const Index base = base_index(b, L.pos);
      for (Index l = 0; l < d; ++l) v[l] = data[base + L.off[l]];
      cplx acc = 0;
      for (Index r = 0; r < d; ++r) {
        cplx s = 0;
        for (Index c = 0; c < d; ++c) s += O[r * d + c] * v[c];
        acc += std::conj(v[r]) * s;
      }
      total += acc.real();
    }
  }
  return total;
}

CMatrix env_trace(const CMatrix& b, const CMatrix& y, int n, std::span<const int> qubits) {
  check_square(b, n);
  check_square(y, n);
  Layout L = make_layout(n, qubits);
  const Index d = Index{1} << L.k;
  const CMatrix bt = b.transpose();
  CMatrix out = CMatrix::Zero(d, d);
  for (Index r = 0; r < L.nbase; ++r) {
    const Index base = base_index(r, L.pos);
    for (Index a = 0; a < d; ++a)
      for (Index c = 0; c < d; ++c)
        out(a, c) += (bt.col(base + L.off[a]).array() * y.col(base + L.off[c]).array()).sum();
  }
  return out;
}

}  // namespace tmera::kernels
