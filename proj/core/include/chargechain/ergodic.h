#ifndef CHARGECHAIN_ERGODIC_H_
#define CHARGECHAIN_ERGODIC_H_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "chargechain/kernel.h"
#include "chargechain/measure.h"

namespace chargechain {

inline constexpr double kRateNoiseFloor = 1e-12;
inline constexpr int kRateMinPositive = 8;

// Limit of the Cesaro averages: row x is the limit distribution started at x.
struct Projector {
  std::vector<FAMeasure> rows;
  Eigen::MatrixXd matrix;
  int rank = 0;
};

// row(x) = sum_c a_c(x) pi_c with a_c the absorption probabilities into the
// recurrent class c. Finite kernels only.
Projector ProjectorFinite(const TransitionKernel& kernel);

struct ProjectorResiduals {
  double idempotence = 0.0;  // max row TV of Pi^2 - Pi
  double left = 0.0;         // Pi P - Pi (A applied to every row)
  double right = 0.0;        // P Pi - Pi
};
ProjectorResiduals CheckProjector(const TransitionKernel& kernel,
                                  const Projector& projector);

// Max over rows of the L1 distance between two row-stochastic matrices.
double MaxRowDistance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// max_x ||q_n(x, .) - Pi(x, .)||_1.
double CesaroOperatorDistance(const TransitionKernel& kernel, int n);
// max_x ||p^n(x, .) - Pi(x, .)||_1.
double RawOperatorDistance(const TransitionKernel& kernel, int n);

struct DistanceSeries {
  std::vector<double> cesaro;  // entry i is n = i + 1
  std::vector<double> raw;
};
DistanceSeries ComputeDistanceSeries(const TransitionKernel& kernel,
                                     const Projector& projector, int n_max);

enum class RateKind { kGeometric, kSubgeometric, kFiniteExact };
std::string ToString(RateKind kind);

struct RateFit {
  RateKind kind = RateKind::kSubgeometric;
  double rho = 1.0;          // exp(slope) of the log-linear fit
  double rho_low = 1.0;
  double rho_high = 1.0;
  int first_zero = 0;        // n0 for finite_exact
  int fitted_from = 0;       // n range of the fit
  int fitted_to = 0;
  double rss_log_linear = 0.0;
  double rss_log_log = 0.0;
};

// Fits distances d_n, n = 1..N. Values at or below the noise floor count as
// zero. The fit uses the tail half of the positive prefix, smoothed by the
// monotone envelope max_{m >= n} d_m.
RateFit FitRate(std::span<const double> distances);

struct EnvelopeCheck {
  double constant = 0.0;  // max_n n d_n
  bool holds = false;     // second half does not outgrow the first half
};
EnvelopeCheck CheckCesaroEnvelope(std::span<const double> cesaro);

enum class ErgodicMode { kCesaro, kRaw };

struct ErgodicRunResult {
  ErgodicMode mode = ErgodicMode::kCesaro;
  std::vector<double> distances;
  RateFit rate;
  bool uniform = true;  // max over starting states
};

struct ErgodicReport {
  Projector projector;
  ProjectorResiduals residuals;
  ErgodicRunResult cesaro;
  ErgodicRunResult raw;
  EnvelopeCheck envelope;
};

ErgodicReport RunErgodic(const TransitionKernel& kernel, int n_max);

}  // namespace chargechain

#endif  // CHARGECHAIN_ERGODIC_H_
