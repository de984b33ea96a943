#include "chargechain/ergodic.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "chain_graph.h"
#include "chargechain/errors.h"
#include "chargechain/invariant.h"

namespace chargechain {
namespace {

constexpr double kZ = 1.96;

void RequireFinite(const TransitionKernel& kernel, const char* op) {
  if (!kernel.is_finite()) {
    throw StructureError(std::string(op) + " needs a finite kernel");
  }
}

void RequireHorizon(int n) {
  if (n < 1) throw PreconditionError("horizon must be at least 1");
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rss = 0.0;
  double slope_stderr = 0.0;
};

LineFit FitLine(const std::vector<double>& x, const std::vector<double>& y) {
  const double m = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    fit.rss += r * r;
  }
  fit.slope_stderr = x.size() > 2 ? std::sqrt(fit.rss / (m - 2.0) / sxx) : 0.0;
  return fit;
}

}  // namespace

Projector ProjectorFinite(const TransitionKernel& kernel) {
  RequireFinite(kernel, "projector");
  const Eigen::MatrixXd& p = kernel.matrix();
  const Eigen::Index n = p.rows();
  const ChainStructure structure = RecurrentClasses(kernel);

  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(n, n);
  std::vector<Eigen::VectorXd> stationary;
  for (const RecurrentClass& c : structure.classes) {
    const auto size = static_cast<Eigen::Index>(c.states.size());
    Eigen::MatrixXd sub(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
      for (Eigen::Index j = 0; j < size; ++j) sub(i, j) = p(c.states[i], c.states[j]);
    }
    stationary.push_back(internal::StationaryDense(sub));
    const Eigen::VectorXd& s = stationary.back();
    for (State x : c.states) {
      for (Eigen::Index j = 0; j < size; ++j) pi(x, c.states[j]) = s(j);
    }
  }

  const auto& transient = structure.transient;
  if (!transient.empty()) {
    const auto t = static_cast<Eigen::Index>(transient.size());
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(t, t);
    for (Eigen::Index i = 0; i < t; ++i) {
      for (Eigen::Index j = 0; j < t; ++j) system(i, j) -= p(transient[i], transient[j]);
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    for (std::size_t c = 0; c < structure.classes.size(); ++c) {
      const auto& members = structure.classes[c].states;
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(t);
      for (Eigen::Index i = 0; i < t; ++i) {
        for (State y : members) rhs(i) += p(transient[i], y);
      }
      const Eigen::VectorXd absorb = lu.solve(rhs);
      for (Eigen::Index i = 0; i < t; ++i) {
        const double a = std::clamp(absorb(i), 0.0, 1.0);
        for (std::size_t j = 0; j < members.size(); ++j) {
          pi(transient[i], members[j]) += a * stationary[c](static_cast<Eigen::Index>(j));
        }
      }
    }
  }

  Projector projector;
  projector.matrix = pi;
  projector.rank = static_cast<int>(structure.classes.size());
  for (Eigen::Index x = 0; x < n; ++x) {
    AtomWeights row;
    for (Eigen::Index y = 0; y < n; ++y) {
      if (pi(x, y) != 0.0) row[y] = pi(x, y);
    }
    projector.rows.emplace_back(kernel.space(), std::move(row));
  }
  return projector;
}

double MaxRowDistance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).rowwise().lpNorm<1>().maxCoeff();
}

ProjectorResiduals CheckProjector(const TransitionKernel& kernel,
                                  const Projector& projector) {
  RequireFinite(kernel, "projector check");
  const Eigen::MatrixXd& p = kernel.matrix();
  const Eigen::MatrixXd& pi = projector.matrix;
  ProjectorResiduals r;
  r.idempotence = MaxRowDistance(pi * pi, pi);
  r.left = MaxRowDistance(pi * p, pi);
  r.right = MaxRowDistance(p * pi, pi);
  return r;
}

double CesaroOperatorDistance(const TransitionKernel& kernel, int n) {
  RequireHorizon(n);
  const Projector projector = ProjectorFinite(kernel);
  return MaxRowDistance(CesaroKernel(kernel, n).matrix(), projector.matrix);
}

double RawOperatorDistance(const TransitionKernel& kernel, int n) {
  RequireHorizon(n);
  const Projector projector = ProjectorFinite(kernel);
  return MaxRowDistance(KernelPower(kernel, n).matrix(), projector.matrix);
}

DistanceSeries ComputeDistanceSeries(const TransitionKernel& kernel,
                                     const Projector& projector, int n_max) {
  RequireFinite(kernel, "distance series");
  RequireHorizon(n_max);
  const Eigen::MatrixXd& p = kernel.matrix();
  DistanceSeries series;
  series.cesaro.reserve(static_cast<std::size_t>(n_max));
  series.raw.reserve(static_cast<std::size_t>(n_max));
  Eigen::MatrixXd power = p;
  Eigen::MatrixXd sum = p;
  for (int n = 1; n <= n_max; ++n) {
    if (n > 1) {
      power = power * p;
      sum += power;
    }
    series.raw.push_back(MaxRowDistance(power, projector.matrix));
    series.cesaro.push_back(
        MaxRowDistance(sum / static_cast<double>(n), projector.matrix));
  }
  return series;
}

std::string ToString(RateKind kind) {
  switch (kind) {
    case RateKind::kGeometric:
      return "geometric";
    case RateKind::kSubgeometric:
      return "subgeometric";
    case RateKind::kFiniteExact:
      return "finite_exact";
  }
  return "subgeometric";
}

RateFit FitRate(std::span<const double> distances) {
  if (distances.empty()) throw PreconditionError("rate fit needs distances");
  RateFit fit;
  int last = -1;
  int positive = 0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (!(distances[i] >= 0.0)) {
      throw PreconditionError("distances must be nonnegative numbers");
    }
    if (distances[i] > kRateNoiseFloor) {
      last = static_cast<int>(i);
      ++positive;
    }
  }
  const int size = static_cast<int>(distances.size());
  if (last < 0) {
    fit.kind = RateKind::kFiniteExact;
    fit.first_zero = 1;
    return fit;
  }
  if (positive < kRateMinPositive) {
    if (last < size - 1) {
      fit.kind = RateKind::kFiniteExact;
      fit.first_zero = last + 2;
      return fit;
    }
    throw PreconditionError("rate fit needs at least " +
                            std::to_string(kRateMinPositive) +
                            " positive distances");
  }

  std::vector<double> envelope(static_cast<std::size_t>(last + 1));
  double running = 0.0;
  for (int i = last; i >= 0; --i) {
    running = std::max(running, distances[i]);
    envelope[i] = running;
  }
  const int start = last / 2;
  std::vector<double> n;
  std::vector<double> log_n;
  std::vector<double> log_d;
  for (int i = start; i <= last; ++i) {
    n.push_back(i + 1.0);
    log_n.push_back(std::log(i + 1.0));
    log_d.push_back(std::log(envelope[i]));
  }
  const LineFit linear = FitLine(n, log_d);
  const LineFit loglog = FitLine(log_n, log_d);
  fit.fitted_from = start + 1;
  fit.fitted_to = last + 1;
  fit.rho = std::exp(linear.slope);
  fit.rho_low = std::exp(linear.slope - kZ * linear.slope_stderr);
  fit.rho_high = std::exp(linear.slope + kZ * linear.slope_stderr);
  fit.rss_log_linear = linear.rss;
  fit.rss_log_log = loglog.rss;
  const bool decays = linear.slope + kZ * linear.slope_stderr < 0.0;
  fit.kind = decays && linear.rss <= loglog.rss ? RateKind::kGeometric
                                                : RateKind::kSubgeometric;
  return fit;
}

EnvelopeCheck CheckCesaroEnvelope(std::span<const double> cesaro) {
  EnvelopeCheck check;
  const std::size_t half = cesaro.size() / 2;
  double first = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < cesaro.size(); ++i) {
    const double scaled = static_cast<double>(i + 1) * cesaro[i];
    (i < half ? first : second) = std::max(i < half ? first : second, scaled);
  }
  check.constant = std::max(first, second);
  check.holds = half == 0 || second <= 1.01 * first + 1e-9;
  return check;
}

ErgodicReport RunErgodic(const TransitionKernel& kernel, int n_max) {
  RequireFinite(kernel, "ergodic run");
  ErgodicReport report;
  report.projector = ProjectorFinite(kernel);
  report.residuals = CheckProjector(kernel, report.projector);
  DistanceSeries series = ComputeDistanceSeries(kernel, report.projector, n_max);
  report.envelope = CheckCesaroEnvelope(series.cesaro);
  report.cesaro.mode = ErgodicMode::kCesaro;
  report.cesaro.distances = std::move(series.cesaro);
  report.raw.mode = ErgodicMode::kRaw;
  report.raw.distances = std::move(series.raw);
  for (ErgodicRunResult* run : {&report.cesaro, &report.raw}) {
    const int positive = static_cast<int>(
        std::count_if(run->distances.begin(), run->distances.end(),
                      [](double d) { return d > kRateNoiseFloor; }));
    const bool trailing_zero = run->distances.back() <= kRateNoiseFloor;
    if (positive >= kRateMinPositive || trailing_zero || positive == 0) {
      run->rate = FitRate(run->distances);
    } else {
      // Too short to fit; report the flat default.
      run->rate = RateFit{};
    }
  }
  return report;
}

}  // namespace chargechain
