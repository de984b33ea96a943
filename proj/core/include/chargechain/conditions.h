#ifndef CHARGECHAIN_CONDITIONS_H_
#define CHARGECHAIN_CONDITIONS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chargechain/invariant.h"
#include "chargechain/kernel.h"
#include "chargechain/measure.h"

namespace chargechain {

inline constexpr int kDoeblinMaxStates = 22;
inline constexpr double kDoeblinTolerance = 1e-12;

// (D) admits sets with phi(E) <= eps; the Cesaro variant admits
// phi(E) < eps.
enum class Admission { kNonStrict, kStrict };

enum class DoeblinVariant {
  kPower,   // p^k, non-strict admission
  kCesaro,  // q_m, strict admission
};

struct DoeblinWitness {
  FAMeasure phi;
  double epsilon = 0.0;
  int k = 1;  // k for (D), m for the Cesaro variant
  bool vacuous = false;
  DoeblinVariant variant = DoeblinVariant::kPower;
};

// A maximizing pair: p(x, E) is the largest transition probability into an
// admissible set, over all x.
struct DoeblinExtremum {
  MeasurableSet set;
  State x = 0;
  double probability = 0.0;
};

struct DoeblinCheck {
  bool holds = false;
  // No nonempty set is admissible; the condition holds trivially.
  bool vacuous = false;
  DoeblinExtremum extremum;
};

// Exact maximization of p^k(x, E) over {E : phi(E) <= eps}. Finite kernels
// with at most 22 states (CapacityError beyond); phi must be atoms only and
// nonnegative (PreconditionError otherwise).
DoeblinCheck CheckDoeblin(const TransitionKernel& kernel, const FAMeasure& phi,
                          double epsilon, int k);
// Same against q_m with strict admission phi(E) < eps.
DoeblinCheck CheckDoeblinTilde(const TransitionKernel& kernel,
                               const FAMeasure& phi, double epsilon, int m);

// Maximization against an explicit row-stochastic matrix; the building
// block of both checkers. Only the row supports are enumerated, so large
// sparse matrices are fine as long as every row has at most 22 charged
// states in its support.
DoeblinCheck CheckDoeblinMatrix(const StateSpace& space,
                                const Eigen::MatrixXd& transition,
                                const FAMeasure& phi, double epsilon,
                                Admission admission);

struct DoeblinSearchResult {
  std::optional<DoeblinWitness> witness;
  // First non-vacuous candidate that failed, in preference order, with the
  // maximizing counterexample.
  std::optional<DoeblinWitness> rejected;
  std::optional<DoeblinExtremum> rejected_counterexample;
  int candidates_checked = 0;
};

std::vector<double> DefaultEpsilonGrid();

// Tries phi = sum of the basis measures, then the uniform probability, then
// the counting measure; scans k = 1..k_max and eps over the grid. Prefers
// non-vacuous witnesses, then larger eps, then smaller k, then candidate
// order. Finite kernels only.
DoeblinSearchResult SearchDoeblin(const TransitionKernel& kernel, int k_max,
                                  std::span<const double> epsilon_grid,
                                  const InvariantBasis& basis,
                                  DoeblinVariant variant = DoeblinVariant::kPower);

// Re-runs the matching checker on a witness.
bool VerifyDoeblinWitness(const TransitionKernel& kernel,
                          const DoeblinWitness& witness);

struct StarVerdict {
  bool holds = false;
  bool within_representable_class = false;
  // Invariant end charges contradicting the condition.
  std::vector<FAMeasure> evidence;
};

// (*): every invariant measure countably additive. Always true on finite
// spaces; on countable ones true iff no invariant end charge exists.
StarVerdict CheckStar(const TransitionKernel& kernel,
                      const InvariantBasis& basis);
// (~*): no invariant purely finitely additive measure.
StarVerdict CheckStarTilde(const TransitionKernel& kernel,
                           const InvariantBasis& basis);

struct DoubleStarVerdict {
  bool holds = false;
  int dimension = 0;
  int ca_count = 0;
  int pfa_count = 0;
  bool within_representable_class = false;
};
DoubleStarVerdict CheckDoubleStar(const InvariantBasis& basis);

// Greatest stochastically closed subset K of K_mu (delete states with
// p(x, K) < 1 until stable); returned when mu(K) = 1. Finite kernels;
// PreconditionError unless mu is nonnegative and invariant. A K_mu that
// misses part of mu simply yields nullopt.
std::optional<MeasurableSet> CheckAlpha(const TransitionKernel& kernel,
                                        const FAMeasure& mu,
                                        const MeasurableSet& k_mu);

// p(x, K) = 1 for every x in K.
bool IsStochasticallyClosed(const TransitionKernel& kernel,
                            const MeasurableSet& set);

struct BetaVerdict {
  bool holds = false;
  std::vector<SingularityCertificate> witnesses;
};
BetaVerdict CheckBeta(const InvariantBasis& basis);
// mu_i(first) = mu_i(X), mu_j(second) = mu_j(X), sets disjoint.
bool VerifySingularityCertificate(const InvariantBasis& basis,
                                  const SingularityCertificate& certificate);

struct DiracBoundResult {
  double sup_dirac = 0.0;   // max_x p^m(x, G)
  State argmax = 0;
  double max_mixture = 0.0; // max over trials of (A^m eta)(G)
  // |(A^m delta_argmax)(G) - sup_dirac|, via repeated ApplyA.
  double dirac_gap = 0.0;
};

DiracBoundResult DiracBoundResidual(const TransitionKernel& kernel,
                              const MeasurableSet& g, int m,
                              std::span<const FAMeasure> trials);

struct SurrogatePoint {
  State window = 0;
  DoeblinCheck check;
};

struct SurrogateTrend {
  std::vector<SurrogatePoint> points;
  double epsilon = 0.0;
  int k = 1;
  bool nondecreasing = false;
  // Nondecreasing and the largest window already violates p <= 1 - eps.
  bool fails_in_limit = false;
};

// Doeblin surrogate on reflected truncations [0, m] or [-m, m] of a
// countable kernel, with phi the sum of the truncated chain's extreme
// stationary distributions.
SurrogateTrend TruncatedDoeblinSurrogate(const TransitionKernel& kernel,
                                         std::span<const State> windows,
                                         double epsilon = 0.05, int k = 1);

// Reflected truncation used by the surrogate: targets clamped into the
// window. Exposed so tests can inspect it.
TransitionKernel ReflectedTruncation(const TransitionKernel& kernel,
                                     State window);

enum class QuasicompactDiagnostic { kConsistent, kInconsistent, kNotDecidable };

std::string ToString(QuasicompactDiagnostic diagnostic);

struct ConditionOptions {
  int k_max = 6;
  std::vector<double> epsilon_grid = DefaultEpsilonGrid();
  std::vector<State> surrogate_windows = {8, 16, 32, 64};
  double surrogate_epsilon = 0.05;
};

struct AlphaEntry {
  std::size_t measure = 0;
  MeasurableSet k_mu;
  std::optional<MeasurableSet> k;
};

struct ConditionReport {
  StarVerdict star;
  StarVerdict star_tilde;
  DoubleStarVerdict double_star;
  BetaVerdict beta;
  std::vector<AlphaEntry> alpha;            // finite chains
  std::optional<DoeblinSearchResult> doeblin;        // finite chains
  std::optional<DoeblinSearchResult> doeblin_tilde;  // finite chains
  std::optional<SurrogateTrend> surrogate;           // countable chains
  QuasicompactDiagnostic quasicompact = QuasicompactDiagnostic::kNotDecidable;
  std::string quasicompact_reason;
};

ConditionReport BuildConditionReport(const TransitionKernel& kernel,
                                     const InvariantBasis& basis,
                                     const ConditionOptions& options = {});

}  // namespace chargechain

#endif  // CHARGECHAIN_CONDITIONS_H_
