#ifndef CHARGECHAIN_KERNEL_H_
#define CHARGECHAIN_KERNEL_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "chargechain/measure.h"
#include "chargechain/state_space.h"

namespace chargechain {

using SparseRow = std::map<State, double>;

inline constexpr double kRowSumTolerance = 1e-9;
inline constexpr std::int64_t kMaxTailOffset = 1024;

// Transition law shared by every state beyond the last exception toward an
// end. From such a state x:
//   relative[d]       -> x + d
//   to_finite[s]      -> the fixed state s
//   to_other_end[e']  -> the mirror state -x, deep toward e'
struct TailRow {
  std::map<std::int64_t, double> relative;
  SparseRow to_finite;
  EndWeights to_other_end;

  bool operator==(const TailRow&) const = default;
};

// Coarse image of a unit charge at `end` under A.
struct EndAction {
  End end;
  double preserved_mass = 0.0;
  SparseRow leak_atoms;
  EndWeights leak_ends;
};

// Countably additive transition function p(x, .). Finite kernels hold a
// dense row-stochastic matrix. Countable kernels hold a contiguous block of
// exception rows plus one TailRow per end.
//
// Tail regions: with exceptions on [lo, hi], the +inf tail row applies to
// x > hi and the -inf tail row to x < lo. Without exceptions the +inf row
// applies to x >= 0 and the -inf row to x < 0.
class TransitionKernel {
 public:
  // Validates shape, nonnegativity and row sums within 1e-9, then divides
  // each row by its sum.
  static TransitionKernel Finite(Eigen::MatrixXd matrix,
                                 std::vector<std::string> labels = {});
  static TransitionKernel Countable(StateSpace space,
                                    std::map<State, SparseRow> exceptions,
                                    std::map<std::string, TailRow> tails);

  const StateSpace& space() const { return space_; }
  bool is_finite() const { return space_.is_finite(); }
  std::int64_t size() const { return space_.size(); }

  // Finite kernels only.
  const Eigen::MatrixXd& matrix() const;

  const std::map<State, SparseRow>& exceptions() const { return exceptions_; }
  const std::map<std::string, TailRow>& tails() const { return tails_; }
  // Throws StructureError when the kernel has no tail row for `end`.
  const TailRow& TailFor(std::string_view end) const;

  // The end whose tail row governs x, nullptr for exception states and for
  // finite kernels.
  const End* TailEndOf(State x) const;

  // p(x, .) as a sparse distribution.
  SparseRow Row(State x) const;
  // p(x, E).
  double Probability(State x, const MeasurableSet& set) const;

  // Largest |offset| over tail rows, 0 for finite kernels.
  std::int64_t MaxOffset() const;
  // Smallest and largest state with an exception row (0, -1 when none).
  State ExceptionLow() const;
  State ExceptionHigh() const;

 private:
  TransitionKernel(StateSpace space) : space_(std::move(space)) {}

  StateSpace space_;
  Eigen::MatrixXd matrix_;
  std::map<State, SparseRow> exceptions_;
  std::map<std::string, TailRow> tails_;
};

// (Tf)(x) = sum_y p(x, y) f(y). For countable kernels the result is exact on
// a window wide enough that every state outside it sees f only through its
// end limits; the end limits of Tf come from the end actions. Every end
// limit of f must be declared on countable spaces (DomainError otherwise).
BoundedFunction ApplyT(const TransitionKernel& kernel,
                       const BoundedFunction& f);

// (A mu)(E) = integral of p(x, E) mu(dx). Atoms push forward through rows;
// end weights follow the end actions.
FAMeasure ApplyA(const TransitionKernel& kernel, const FAMeasure& mu);

// Exact k-step kernel. Finite kernels only (StructureError otherwise).
TransitionKernel KernelPower(const TransitionKernel& kernel, int k);
// q_m = (1/m) sum_{k=1..m} p^k. Finite kernels only.
TransitionKernel CesaroKernel(const TransitionKernel& kernel, int m);

EndAction ComputeEndAction(const TransitionKernel& kernel,
                           std::string_view end);

// |<A mu, f> - <mu, T f>|.
double DualityResidual(const TransitionKernel& kernel,
                       const BoundedFunction& f, const FAMeasure& mu);

// TV(A mu - mu).
double InvarianceResidual(const TransitionKernel& kernel, const FAMeasure& mu);

}  // namespace chargechain

#endif  // CHARGECHAIN_KERNEL_H_
