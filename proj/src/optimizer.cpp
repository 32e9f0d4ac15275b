#include "tmera/optimizer.hpp"

#include <chrono>
#include <cmath>

#include "tmera/qcore.hpp"

namespace tmera::optimizer {

void LbfgsConfig::validate() const {
  if (!(0 < c1 && c1 < 0.5 && 0.5 < c2 && c2 < 1)) throw InputError("lbfgs: need 0 < c1 < 1/2 < c2 < 1");
  if (memory < 1) throw InputError("lbfgs: memory must be >= 1");
  if (eps < 0) throw InputError("lbfgs: eps must be >= 0");
  if (max_iter < 0) throw InputError("lbfgs: max_iter must be >= 0");
  if (max_trials < 1) throw InputError("lbfgs: max_trials must be >= 1");
  if (reproject_every < 1) throw InputError("lbfgs: reproject_every must be >= 1");
}

CMatrix retraction(const CMatrix& u, const CMatrix& p, double tau, bool project) {
  if (tau == 0) return u;  // r(0) = u exactly, without re-projection round-off
  const CMatrix r = qcore::expm(tau * (p * u.adjoint())) * u;
  return project ? qcore::project_to_unitary(r).matrix() : r;
}

CMatrix vector_transport(const CMatrix& u, const CMatrix& p, double tau, const CMatrix& w) {
  return qcore::expm(tau * (p * u.adjoint())) * w;
}

UnitaryProblem::UnitaryProblem(std::vector<CMatrix> u0, Fn fn, int reproject_every)
    : base_(u0), u_(std::move(u0)), fn_(std::move(fn)), reproject_every_(reproject_every) {
  for (const auto& u : base_) {
    offset_.push_back(size_);
    size_ += 2 * u.size();
  }
}

std::vector<CMatrix> UnitaryProblem::exps(const Eigen::VectorXd& p, double tau) const {
  std::vector<CMatrix> e(base_.size());
  for (size_t k = 0; k < base_.size(); ++k) {
    const CMatrix pk = gradients::unpack_block(p.data() + offset_[k], base_[k].rows());
    e[k] = qcore::expm(tau * (pk * base_[k].adjoint()));
  }
  return e;
}

void UnitaryProblem::set_trial(const Eigen::VectorXd& p, double tau) {
  const auto e = exps(p, tau);
  const bool project = since_projection_ + 1 >= reproject_every_;
  for (size_t k = 0; k < base_.size(); ++k) {
    u_[k] = e[k] * base_[k];
    if (project) u_[k] = qcore::project_to_unitary(u_[k]).matrix();
  }
}

void UnitaryProblem::commit() {
  base_ = u_;
  since_projection_ = since_projection_ + 1 >= reproject_every_ ? 0 : since_projection_ + 1;
}

void UnitaryProblem::transport(const Eigen::VectorXd& p, double tau, std::vector<Eigen::VectorXd*> vs) const {
  const auto e = exps(p, tau);
  for (auto* v : vs)
    for (size_t k = 0; k < base_.size(); ++k) {
      const Eigen::Index d = base_[k].rows();
      const CMatrix w = e[k] * gradients::unpack_block(v->data() + offset_[k], d);
      gradients::pack_block(w, v->data() + offset_[k]);
    }
}

double UnitaryProblem::unitarity_defect() const {
  double m = 0;
  for (const auto& u : u_)
    m = std::max(m, (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff());
  return m;
}

namespace {

struct Trial {
  double tau = 0, e = 0, slope = 0;
  Eigen::VectorXd g;
};

// Minimizer of the cubic matching values and slopes at a and b, safeguarded
// to the interior of the interval.
double cubic_step(const Trial& a, const Trial& b) {
  const double lo = std::min(a.tau, b.tau), hi = std::max(a.tau, b.tau);
  const double d1 = a.slope + b.slope - 3 * (a.e - b.e) / (a.tau - b.tau);
  const double disc = d1 * d1 - a.slope * b.slope;
  double t = 0.5 * (lo + hi);
  if (disc >= 0) {
    const double d2 = std::copysign(std::sqrt(disc), b.tau - a.tau);
    const double den = b.slope - a.slope + 2 * d2;
    if (den != 0) t = b.tau - (b.tau - a.tau) * (b.slope + d2 - d1) / den;
  }
  const double margin = 0.1 * (hi - lo);
  if (!std::isfinite(t) || t < lo + margin || t > hi - margin) t = 0.5 * (lo + hi);
  return t;
}

}  // namespace

LineSearchResult wolfe_line_search(Problem& pr, const Eigen::VectorXd& p, double e0, double slope0,
                                   const LbfgsConfig& cfg) {
  if (!(slope0 < 0)) throw LineSearchFailure("line search: not a descent direction");
  int trials = 0;
  auto eval = [&](double tau) {
    if (++trials > cfg.max_trials) throw LineSearchFailure("line search: trial budget exhausted");
    Trial t;
    t.tau = tau;
    pr.set_trial(p, tau);
    t.g.resize(pr.size());
    t.e = pr.evaluate(t.g);
    Eigen::VectorXd tp = p;
    pr.transport(p, tau, {&tp});
    t.slope = t.g.dot(tp);
    if (!std::isfinite(t.e) || !std::isfinite(t.slope)) throw LineSearchFailure("line search: non-finite energy");
    return t;
  };
  auto armijo = [&](const Trial& t) { return t.e <= e0 + cfg.c1 * t.tau * slope0; };
  auto curvature = [&](const Trial& t) { return std::abs(t.slope) <= -cfg.c2 * slope0; };
  // the accepted trial is always the latest evaluation, so the problem already sits there
  auto done = [&](Trial t) {
    return LineSearchResult{t.tau, t.e, t.slope, std::move(t.g), trials};
  };
  auto zoom = [&](Trial lo, Trial hi) {
    for (;;) {
      Trial t = eval(cubic_step(lo, hi));
      if (!armijo(t) || t.e >= lo.e) {
        hi = std::move(t);
      } else {
        if (curvature(t)) return done(std::move(t));
        if (t.slope * (hi.tau - lo.tau) >= 0) hi = lo;
        lo = std::move(t);
      }
      if (std::abs(hi.tau - lo.tau) < 1e-14 * std::max(1.0, lo.tau))
        throw LineSearchFailure("line search: bracket collapsed");
    }
  };
  Trial prev;
  prev.tau = 0;
  prev.e = e0;
  prev.slope = slope0;
  double tau = 1;
  for (int i = 1;; ++i) {
    Trial t = eval(tau);
    if (!armijo(t) || (i > 1 && t.e >= prev.e)) return zoom(std::move(prev), std::move(t));
    if (curvature(t)) return done(std::move(t));
    if (t.slope >= 0) return zoom(std::move(t), std::move(prev));
    prev = std::move(t);
    tau *= 2;
  }
}

Eigen::VectorXd two_loop(const Eigen::VectorXd& g, const std::deque<Eigen::VectorXd>& s,
                         const std::deque<Eigen::VectorXd>& y, const std::deque<double>& rho, double gamma) {
  const int m = static_cast<int>(s.size());
  std::vector<double> xi(m);
  Eigen::VectorXd p = -g;
  for (int i = m - 1; i >= 0; --i) {
    xi[i] = rho[i] * s[i].dot(p);
    p -= xi[i] * y[i];
  }
  p *= gamma;
  for (int i = 0; i < m; ++i) p += s[i] * (xi[i] - rho[i] * y[i].dot(p));
  return p;
}

RunRecord lbfgs_minimize(Problem& pr, const LbfgsConfig& cfg, const Observer& observer,
                         const std::function<void(const IterationRecord&)>& on_iter) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  RunRecord rec;
  std::deque<Eigen::VectorXd> S, Y;
  std::deque<double> R;
  double gamma = 1;
  Eigen::VectorXd g(pr.size());
  auto t0 = clock::now();
  double e = pr.evaluate(g);
  auto emit = [&](IterationRecord r) {
    r.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    rec.iterations.push_back(r);
    if (on_iter) on_iter(r);
  };
  emit({0, e, g.norm(), 0, 0, 0});
  bool failed_once = false;
  for (int k = 0; k < cfg.max_iter; ++k) {
    if (g.norm() <= cfg.eps) break;
    Eigen::VectorXd p = two_loop(g, S, Y, R, gamma);
    double slope = g.dot(p);
    if (!(slope < 0)) {
      rec.events.push_back("iter " + std::to_string(k + 1) + ": not a descent direction, memory reset");
      S.clear(), Y.clear(), R.clear(), gamma = 1;
      p = -g;
      slope = g.dot(p);
    }
    Snapshot snap;
    if (observer) {
      snap.iter = k + 1;
      snap.g = g;
      snap.p = p;
      snap.gamma = gamma;
      snap.s.assign(S.begin(), S.end());
      snap.y.assign(Y.begin(), Y.end());
      snap.rho.assign(R.begin(), R.end());
    }
    LineSearchResult ls;
    try {
      ls = wolfe_line_search(pr, p, e, slope, cfg);
      failed_once = false;
    } catch (const LineSearchFailure& ex) {
      rec.events.push_back("iter " + std::to_string(k + 1) + ": " + ex.what());
      pr.set_trial(p, 0);
      if (failed_once || S.empty()) {
        rec.events.push_back("stopping: line search failed after memory reset");
        break;
      }
      failed_once = true;
      S.clear(), Y.clear(), R.clear(), gamma = 1;
      --k;  // retry with steepest descent
      continue;
    }
    if (observer) {
      snap.wolfe_lhs = ls.energy;
      snap.wolfe_rhs = e + cfg.c1 * ls.tau * slope;
      snap.curv_lhs = ls.slope;
      snap.curv_rhs = cfg.c2 * slope;
      observer(snap);
    }
    // s = T tau p, y = g_new - T g, and the stored pairs move along
    Eigen::VectorXd s = ls.tau * p, Tg = g;
    std::vector<Eigen::VectorXd*> vs{&s, &Tg};
    for (auto& v : S) vs.push_back(&v);
    for (auto& v : Y) vs.push_back(&v);
    pr.transport(p, ls.tau, vs);
    pr.commit();
    rec.max_unitarity_defect = std::max(rec.max_unitarity_defect, pr.unitarity_defect());
    Eigen::VectorXd y = ls.grad - Tg;
    const double sy = s.dot(y);
    if (sy > 0) {
      S.push_back(std::move(s));
      Y.push_back(y);
      R.push_back(1 / sy);
      gamma = sy / y.squaredNorm();
      if (static_cast<int>(S.size()) > cfg.memory) S.pop_front(), Y.pop_front(), R.pop_front();
    } else {
      rec.events.push_back("iter " + std::to_string(k + 1) + ": curvature pair skipped");
    }
    e = ls.energy;
    g = std::move(ls.grad);
    emit({k + 1, e, g.norm(), ls.tau, ls.trials, 0});
  }
  rec.converged = g.norm() <= cfg.eps;
  rec.final_energy = e;
  return rec;
}

}  // namespace tmera::optimizer
