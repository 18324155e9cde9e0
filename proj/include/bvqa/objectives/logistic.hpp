#pragma once

#include <span>
#include <stdexcept>

namespace bvqa::quality {

/// f(x) = (b1 - b2) / (1 + exp(-(x - b3) / |b4|)) + b2
struct Logistic4 {
  double b1 = 1.0;  // upper asymptote
  double b2 = 0.0;  // lower asymptote
  double b3 = 0.0;  // center
  double b4 = 1.0;  // scale, used as |b4|

  double operator()(double x) const;
};

struct LogisticFit {
  Logistic4 curve;
  double mapped_plcc = 0.0;  // Pearson(f(pred), mos)
  double sse = 0.0;
  int iterations = 0;
};

struct LogisticFitOptions {
  int max_iterations = 2000;
  double relative_tolerance = 1e-13;
};

/// The solver stopped without meeting its convergence test. Carries the best
/// iterate found.
class LogisticFitError : public std::runtime_error {
 public:
  LogisticFitError(const std::string& what, LogisticFit best)
      : std::runtime_error(what), best_(best) {}
  const LogisticFit& best() const { return best_; }

 private:
  LogisticFit best_;
};

/// Least-squares fit of the 4-parameter logistic mapping pred -> mos with a
/// damped Gauss-Newton (Levenberg-Marquardt) solver, started from
/// b1 = max(mos), b2 = min(mos), b3 = mean(pred), b4 = std(pred).
/// Requires at least 5 points and non-constant pred and mos.
LogisticFit fit_logistic4(std::span<const double> pred, std::span<const double> mos,
                          const LogisticFitOptions& options = {});

}  // namespace bvqa::quality
