#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tmera/gradients.hpp"

namespace tmera::optimizer {

struct LbfgsConfig {
  int memory = 9;
  double c1 = 0.1;
  double c2 = 0.9;
  double eps = 1e-12;
  int max_iter = 1000;
  int max_trials = 25;
  int reproject_every = 1;  // retractions between unitary re-projections
  void validate() const;
};

struct LineSearchFailure : NumericalError {
  using NumericalError::NumericalError;
};

// Point on a (product) manifold with tangent vectors flattened to real
// vectors. The base point is fixed between commits; trial points lie on the
// retraction curve from the base.
class Problem {
 public:
  virtual ~Problem() = default;
  virtual Eigen::Index size() const = 0;
  // Energy and gradient at the current point.
  virtual double evaluate(Eigen::VectorXd& grad) = 0;
  virtual void set_trial(const Eigen::VectorXd& p, double tau) = 0;
  virtual void commit() = 0;
  // Transport tangent vectors at the base along r_{base,p}(tau).
  virtual void transport(const Eigen::VectorXd& p, double tau, std::vector<Eigen::VectorXd*> vs) const = 0;
  virtual double unitarity_defect() const { return 0; }
};

// Flat space: r(tau) = x + tau p, identity transport.
class EuclideanProblem : public Problem {
 public:
  using Fn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;
  EuclideanProblem(Eigen::VectorXd x0, Fn fn) : base_(x0), x_(std::move(x0)), fn_(std::move(fn)) {}
  Eigen::Index size() const override { return x_.size(); }
  double evaluate(Eigen::VectorXd& grad) override { return fn_(x_, grad); }
  void set_trial(const Eigen::VectorXd& p, double tau) override { x_ = base_ + tau * p; }
  void commit() override { base_ = x_; }
  void transport(const Eigen::VectorXd&, double, std::vector<Eigen::VectorXd*>) const override {}
  const Eigen::VectorXd& point() const { return x_; }

 private:
  Eigen::VectorXd base_, x_;
  Fn fn_;
};

// Product of unitary groups, one block per gate.
class UnitaryProblem : public Problem {
 public:
  using Fn = std::function<double(const std::vector<CMatrix>&, Eigen::VectorXd&)>;
  UnitaryProblem(std::vector<CMatrix> u0, Fn fn, int reproject_every = 1);
  Eigen::Index size() const override { return size_; }
  double evaluate(Eigen::VectorXd& grad) override { return fn_(u_, grad); }
  void set_trial(const Eigen::VectorXd& p, double tau) override;
  void commit() override;
  void transport(const Eigen::VectorXd& p, double tau, std::vector<Eigen::VectorXd*> vs) const override;
  double unitarity_defect() const override;
  const std::vector<CMatrix>& point() const { return u_; }

 private:
  std::vector<CMatrix> exps(const Eigen::VectorXd& p, double tau) const;
  std::vector<CMatrix> base_, u_;
  std::vector<Eigen::Index> offset_;
  Eigen::Index size_ = 0;
  Fn fn_;
  int reproject_every_;
  int since_projection_ = 0;
};

// e^{tau p u^dagger} u, re-projected onto the unitary group.
CMatrix retraction(const CMatrix& u, const CMatrix& p, double tau, bool project = true);
CMatrix vector_transport(const CMatrix& u, const CMatrix& p, double tau, const CMatrix& w);

struct LineSearchResult {
  double tau = 0;
  double energy = 0;
  double slope = 0;  // d/dtau E at tau
  Eigen::VectorXd grad;
  int trials = 0;
};

// Bracketing and cubic-interpolation zoom; the problem is left at the accepted point.
LineSearchResult wolfe_line_search(Problem& pr, const Eigen::VectorXd& p, double e0, double slope0,
                                   const LbfgsConfig& cfg);

struct IterationRecord {
  int iter = 0;
  double energy = 0;
  double grad_norm = 0;
  double step = 0;
  int wolfe_trials = 0;
  double wall_ms = 0;
};

struct RunRecord {
  std::vector<IterationRecord> iterations;
  std::vector<std::string> events;
  bool converged = false;
  double final_energy = 0;
  double max_unitarity_defect = 0;  // over accepted points
};

// Memory contents seen by the two-loop recursion, for conformance checks.
struct Snapshot {
  int iter = 0;
  Eigen::VectorXd g, p;
  double gamma = 1;
  std::vector<Eigen::VectorXd> s, y;
  std::vector<double> rho;
  double wolfe_lhs = 0, wolfe_rhs = 0, curv_lhs = 0, curv_rhs = 0;
};
using Observer = std::function<void(const Snapshot&)>;

// Two-loop recursion; returns -H g.
Eigen::VectorXd two_loop(const Eigen::VectorXd& g, const std::deque<Eigen::VectorXd>& s,
                         const std::deque<Eigen::VectorXd>& y, const std::deque<double>& rho, double gamma);

RunRecord lbfgs_minimize(Problem& pr, const LbfgsConfig& cfg, const Observer& observer = {},
                         const std::function<void(const IterationRecord&)>& on_iter = {});

}  // namespace tmera::optimizer
