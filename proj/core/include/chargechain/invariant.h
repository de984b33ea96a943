#ifndef CHARGECHAIN_INVARIANT_H_
#define CHARGECHAIN_INVARIANT_H_

#include <cstddef>
#include <string>
#include <vector>

#include "chargechain/kernel.h"
#include "chargechain/measure.h"
#include "chargechain/state_space.h"

namespace chargechain {

inline constexpr double kInvarianceTolerance = 1e-10;

struct RecurrentClass {
  std::vector<State> states;
  int period = 1;
};

struct ChainStructure {
  std::vector<RecurrentClass> classes;  // ordered by smallest state
  std::vector<State> transient;
};

// Closed communicating classes of a finite chain with their periods.
ChainStructure RecurrentClasses(const TransitionKernel& kernel);

enum class InvariantKind { kCountablyAdditive, kPurelyFinitelyAdditive };

struct SingularityCertificate {
  std::size_t first = 0;
  std::size_t second = 0;
  MeasurableSet first_set;
  MeasurableSet second_set;
};

// Extreme invariant probability measures, pairwise disjoint, each either
// purely atomic or purely end supported.
struct InvariantBasis {
  std::vector<FAMeasure> measures;
  std::vector<InvariantKind> kinds;
  // Period of the recurrent class behind each ca measure; 1 for end charges
  // and for countable chains.
  std::vector<int> periods;
  std::vector<SingularityCertificate> pairwise;
  // Countable chains: results hold within the finite/co-tail representation
  // (true dimension over the full power set may be larger).
  bool within_representable_class = false;
  // False when a countable truncation class neither concentrated nor
  // clearly escaped before the window cap.
  bool conclusive = true;

  int dimension() const { return static_cast<int>(measures.size()); }
  int ca_count() const;
  int pfa_count() const;
};

InvariantBasis InvariantBasisFinite(const TransitionKernel& kernel);

// Unit invariant charges on closed sets of ends that leak nothing back to
// atoms; one per closed communicating set of ends.
std::vector<FAMeasure> DetectPfaEnds(const TransitionKernel& kernel);

struct CountableSolveOptions {
  State initial_window = 64;
  State max_window = 16384;
  // Mass allowed in the outer half of a truncation window for a candidate
  // countably additive invariant measure.
  double tightness = 1e-12;
};

// Countably additive part from reflected truncations grown geometrically;
// purely finitely additive part from DetectPfaEnds.
InvariantBasis InvariantBasisCountable(const TransitionKernel& kernel,
                                       const CountableSolveOptions& options = {});

// Dispatches on the kernel's space.
InvariantBasis ComputeInvariantBasis(const TransitionKernel& kernel);

// Certificates for every pair of basis measures; nullopt entries are
// omitted, so a complete basis has n(n-1)/2 certificates.
std::vector<SingularityCertificate> PairwiseCertificates(
    const std::vector<FAMeasure>& measures);

// lambda_n = (1/n) sum_{k=1..n} A^k mu0 for n = 1..count. Countable chains
// keep atoms on a window of half-width `window` (states [0, window] on the
// half-line, [-window, window] on Z); mass leaving it is moved into the
// adjacent end bucket for good and then follows the end actions.
std::vector<FAMeasure> CesaroSequence(const TransitionKernel& kernel,
                                      const FAMeasure& mu0, int count,
                                      State window = 256);

struct EscapeWindow {
  State size = 0;                // K_m = [0, m] or [-m, m]
  std::vector<double> masses;    // lambda_n(K_m), n = 1..n_max
};

struct EscapeProfile {
  std::vector<EscapeWindow> windows;  // ascending sizes
  double pfa_mass_estimate = 0.0;     // 1 - lambda_{n_max}(K_largest)
  EndWeights per_end_mass;            // end buckets of lambda_{n_max}
  EndWeights per_end_split;           // the same, normalized to sum one
};

EscapeProfile ComputeEscapeProfile(const TransitionKernel& kernel,
                                   const FAMeasure& mu0, int n_max,
                                   std::vector<State> window_sizes);

struct InvariantClassification {
  bool composite = false;
  int period = 1;
};

// Composite with period d >= 2 when the recurrent classes charged by mu have
// a period (lcm over classes) above one; simple otherwise.
InvariantClassification ClassifyInvariant(const TransitionKernel& kernel,
                                          const FAMeasure& mu);

}  // namespace chargechain

#endif  // CHARGECHAIN_INVARIANT_H_
