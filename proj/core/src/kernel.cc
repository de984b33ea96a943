#include "chargechain/kernel.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>

#include "chargechain/errors.h"

namespace chargechain {
namespace {

void RequireFinite(const TransitionKernel& kernel, const char* op) {
  if (!kernel.is_finite()) {
    throw StructureError(std::string(op) +
                         " needs a finite kernel; iterate ApplyA instead");
  }
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void CheckWeight(double w, const std::string& where) {
  if (!std::isfinite(w) || w < 0.0) {
    throw ValidationError(where + ": weight " + FormatDouble(w) +
                          " is not a finite nonnegative number");
  }
}

void CheckSum(double sum, const std::string& where) {
  if (std::abs(sum - 1.0) > kRowSumTolerance) {
    throw ValidationError(where + ": sums to " + FormatDouble(sum) +
                          " (expected 1 within 1e-9)");
  }
}

template <typename Map>
void Scale(Map& map, double factor) {
  for (auto& entry : map) entry.second *= factor;
}

void AddTo(SparseRow& row, State y, double w) {
  if (w != 0.0) row[y] += w;
}

}  // namespace

TransitionKernel TransitionKernel::Finite(Eigen::MatrixXd matrix,
                                          std::vector<std::string> labels) {
  if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) {
    throw ValidationError("transition matrix must be square and nonempty");
  }
  StateSpace space = StateSpace::Finite(matrix.rows(), std::move(labels));
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    const std::string where = "matrix row " + std::to_string(i);
    double sum = 0.0;
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      CheckWeight(matrix(i, j), where);
      sum += matrix(i, j);
    }
    CheckSum(sum, where);
    matrix.row(i) /= sum;
  }
  TransitionKernel kernel(std::move(space));
  kernel.matrix_ = std::move(matrix);
  return kernel;
}

TransitionKernel TransitionKernel::Countable(
    StateSpace space, std::map<State, SparseRow> exceptions,
    std::map<std::string, TailRow> tails) {
  if (space.is_finite()) {
    throw ValidationError("countable kernel needs a countable state space");
  }
  if (!exceptions.empty()) {
    const State lo = exceptions.begin()->first;
    const State hi = exceptions.rbegin()->first;
    if (static_cast<std::size_t>(hi - lo + 1) != exceptions.size()) {
      throw ValidationError("exception rows must cover a contiguous range");
    }
    if (space.support() == Support::kHalfLine && lo != 0) {
      throw ValidationError("half-line exception rows must start at state 0");
    }
  }
  for (auto& [x, row] : exceptions) {
    const std::string where = "exception row " + std::to_string(x);
    if (!space.Contains(x)) {
      throw ValidationError(where + ": state outside the space");
    }
    double sum = 0.0;
    for (const auto& [y, w] : row) {
      CheckWeight(w, where);
      if (!space.Contains(y)) {
        throw ValidationError(where + ": target " + std::to_string(y) +
                              " outside the space");
      }
      sum += w;
    }
    CheckSum(sum, where);
    Scale(row, 1.0 / sum);
    std::erase_if(row, [](const auto& e) { return e.second == 0.0; });
  }
  if (tails.size() != space.ends().size()) {
    throw ValidationError("need exactly one tail row per end");
  }
  for (auto& [id, tail] : tails) {
    const std::string where = "tail row '" + id + "'";
    if (space.FindEnd(id) == nullptr) {
      throw ValidationError(where + ": unknown end id");
    }
    double sum = 0.0;
    for (const auto& [d, w] : tail.relative) {
      CheckWeight(w, where);
      if (std::abs(d) > kMaxTailOffset) {
        throw ValidationError(where + ": offset " + std::to_string(d) +
                              " exceeds the supported bound");
      }
      sum += w;
    }
    for (const auto& [s, w] : tail.to_finite) {
      CheckWeight(w, where);
      if (!space.Contains(s)) {
        throw ValidationError(where + ": to_finite target " +
                              std::to_string(s) + " outside the space");
      }
      sum += w;
    }
    for (const auto& [other, w] : tail.to_other_end) {
      CheckWeight(w, where);
      if (space.FindEnd(other) == nullptr || other == id) {
        throw ValidationError(where + ": to_other_end names '" + other +
                              "', which is not another end");
      }
      sum += w;
    }
    CheckSum(sum, where);
    Scale(tail.relative, 1.0 / sum);
    Scale(tail.to_finite, 1.0 / sum);
    Scale(tail.to_other_end, 1.0 / sum);
    std::erase_if(tail.relative, [](const auto& e) { return e.second == 0.0; });
    std::erase_if(tail.to_finite, [](const auto& e) { return e.second == 0.0; });
    std::erase_if(tail.to_other_end,
                  [](const auto& e) { return e.second == 0.0; });
  }
  TransitionKernel kernel(std::move(space));
  kernel.exceptions_ = std::move(exceptions);
  kernel.tails_ = std::move(tails);
  if (kernel.space_.support() == Support::kHalfLine) {
    const State first = kernel.exceptions_.empty() ? 0 : kernel.ExceptionHigh() + 1;
    const TailRow& tail = kernel.tails_.begin()->second;
    if (!tail.relative.empty() && first + tail.relative.begin()->first < 0) {
      throw ValidationError("tail row '" + kernel.tails_.begin()->first +
                            "': offset leaves the half-line at state " +
                            std::to_string(first));
    }
  }
  return kernel;
}

const Eigen::MatrixXd& TransitionKernel::matrix() const {
  if (!is_finite()) throw StructureError("countable kernels have no matrix");
  return matrix_;
}

const TailRow& TransitionKernel::TailFor(std::string_view end) const {
  auto it = tails_.find(std::string(end));
  if (it == tails_.end()) {
    throw StructureError("kernel has no tail row for end '" +
                         std::string(end) + "'");
  }
  return it->second;
}

State TransitionKernel::ExceptionLow() const {
  return exceptions_.empty() ? 0 : exceptions_.begin()->first;
}

State TransitionKernel::ExceptionHigh() const {
  return exceptions_.empty() ? -1 : exceptions_.rbegin()->first;
}

const End* TransitionKernel::TailEndOf(State x) const {
  if (is_finite() || exceptions_.count(x) > 0) return nullptr;
  if (x > ExceptionHigh()) return space_.EndInDirection(Direction::kPlus);
  if (x < ExceptionLow()) return space_.EndInDirection(Direction::kMinus);
  return nullptr;
}

std::int64_t TransitionKernel::MaxOffset() const {
  std::int64_t r = 0;
  for (const auto& [id, tail] : tails_) {
    for (const auto& [d, w] : tail.relative) r = std::max(r, std::abs(d));
  }
  return r;
}

SparseRow TransitionKernel::Row(State x) const {
  if (!space_.Contains(x)) {
    throw DomainError("state " + std::to_string(x) +
                      " is outside the state space");
  }
  SparseRow row;
  if (is_finite()) {
    for (Eigen::Index y = 0; y < matrix_.cols(); ++y) {
      AddTo(row, y, matrix_(x, y));
    }
    return row;
  }
  if (auto it = exceptions_.find(x); it != exceptions_.end()) return it->second;
  const TailRow& tail = TailFor(TailEndOf(x)->id);
  for (const auto& [d, w] : tail.relative) AddTo(row, x + d, w);
  for (const auto& [s, w] : tail.to_finite) AddTo(row, s, w);
  for (const auto& [other, w] : tail.to_other_end) AddTo(row, -x, w);
  return row;
}

double TransitionKernel::Probability(State x, const MeasurableSet& set) const {
  double p = 0.0;
  for (const auto& [y, w] : Row(x)) {
    if (set.Contains(space_, y)) p += w;
  }
  return p;
}

EndAction ComputeEndAction(const TransitionKernel& kernel,
                           std::string_view end) {
  if (kernel.is_finite()) {
    throw StructureError("finite kernels have no ends");
  }
  const End& e = kernel.space().GetEnd(end);
  const TailRow& tail = kernel.TailFor(end);
  EndAction action;
  action.end = e;
  for (const auto& [d, w] : tail.relative) action.preserved_mass += w;
  action.leak_atoms = tail.to_finite;
  action.leak_ends = tail.to_other_end;
  return action;
}

BoundedFunction ApplyT(const TransitionKernel& kernel,
                       const BoundedFunction& f) {
  const StateSpace& space = kernel.space();
  if (!(space == f.space())) {
    throw DomainError("function and kernel live on different spaces");
  }
  std::map<State, double> window;
  if (space.is_finite()) {
    const Eigen::MatrixXd& p = kernel.matrix();
    for (State x = 0; x < space.size(); ++x) {
      double v = 0.0;
      for (State y = 0; y < space.size(); ++y) v += p(x, y) * f(y);
      window.emplace_hint(window.end(), x, v);
    }
    return BoundedFunction(space, std::move(window), 0.0);
  }

  EndWeights limits;
  for (const End& end : space.ends()) {
    auto limit = f.EndLimit(end.id);
    if (!limit) {
      throw DomainError("ApplyT needs a declared limit at end '" + end.id + "'");
    }
  }
  for (const End& end : space.ends()) {
    const TailRow& tail = kernel.TailFor(end.id);
    double v = 0.0;
    for (const auto& [d, w] : tail.relative) v += w * *f.EndLimit(end.id);
    for (const auto& [s, w] : tail.to_finite) v += w * f(s);
    for (const auto& [other, w] : tail.to_other_end) {
      v += w * *f.EndLimit(other);
    }
    limits.emplace(end.id, v);
  }

  // Outside [-bound, bound] every transition lands where f equals a limit.
  State bound = std::max(std::abs(kernel.ExceptionLow()),
                         std::abs(kernel.ExceptionHigh()));
  if (!f.window().empty()) {
    bound = std::max({bound, std::abs(f.window().begin()->first),
                      std::abs(f.window().rbegin()->first)});
  }
  for (const auto& [id, tail] : kernel.tails()) {
    for (const auto& [s, w] : tail.to_finite) bound = std::max(bound, std::abs(s));
  }
  bound += kernel.MaxOffset() + 1;
  const State lo = space.support() == Support::kHalfLine ? 0 : -bound;
  for (State x = lo; x <= bound; ++x) {
    double v = 0.0;
    for (const auto& [y, w] : kernel.Row(x)) v += w * f(y);
    window.emplace_hint(window.end(), x, v);
  }
  return BoundedFunction(space, std::move(window), 0.0, std::move(limits));
}

FAMeasure ApplyA(const TransitionKernel& kernel, const FAMeasure& mu) {
  const StateSpace& space = kernel.space();
  if (!(space == mu.space())) {
    throw DomainError("measure and kernel live on different spaces");
  }
  if (space.is_finite()) {
    const Eigen::MatrixXd& p = kernel.matrix();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(space.size());
    for (const auto& [x, w] : mu.atoms()) out += w * p.row(x).transpose();
    AtomWeights atoms;
    for (State y = 0; y < space.size(); ++y) {
      if (out(y) != 0.0) atoms.emplace_hint(atoms.end(), y, out(y));
    }
    return FAMeasure(space, std::move(atoms));
  }

  SparseRow atoms;
  EndWeights ends;
  for (const auto& [x, w] : mu.atoms()) {
    for (const auto& [y, p] : kernel.Row(x)) atoms[y] += w * p;
  }
  for (const auto& [id, w] : mu.ends()) {
    const EndAction action = ComputeEndAction(kernel, id);
    if (action.preserved_mass != 0.0) ends[id] += w * action.preserved_mass;
    for (const auto& [s, p] : action.leak_atoms) atoms[s] += w * p;
    for (const auto& [other, p] : action.leak_ends) ends[other] += w * p;
  }
  return FAMeasure(space, std::move(atoms), std::move(ends));
}

TransitionKernel KernelPower(const TransitionKernel& kernel, int k) {
  RequireFinite(kernel, "KernelPower");
  if (k < 1) throw PreconditionError("kernel power needs k >= 1");
  Eigen::MatrixXd power = kernel.matrix();
  for (int i = 1; i < k; ++i) power = power * kernel.matrix();
  return TransitionKernel::Finite(std::move(power), kernel.space().labels());
}

TransitionKernel CesaroKernel(const TransitionKernel& kernel, int m) {
  RequireFinite(kernel, "CesaroKernel");
  if (m < 1) throw PreconditionError("Cesaro kernel needs m >= 1");
  Eigen::MatrixXd power = kernel.matrix();
  Eigen::MatrixXd sum = power;
  for (int i = 1; i < m; ++i) {
    power = power * kernel.matrix();
    sum += power;
  }
  sum /= static_cast<double>(m);
  return TransitionKernel::Finite(std::move(sum), kernel.space().labels());
}

double DualityResidual(const TransitionKernel& kernel,
                       const BoundedFunction& f, const FAMeasure& mu) {
  return std::abs(Pair(ApplyA(kernel, mu), f) - Pair(mu, ApplyT(kernel, f)));
}

double InvarianceResidual(const TransitionKernel& kernel,
                          const FAMeasure& mu) {
  return (ApplyA(kernel, mu) - mu).TotalVariation();
}

}  // namespace chargechain
