#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace shadowlab {

/// Self-map of [0,1], exactly evaluable; strictly increasing variants carry
/// an exact inverse.
class IntervalMap {
 public:
  virtual ~IntervalMap() = default;
  virtual double apply(double x) const = 0;
  virtual double apply_inverse(double y) const;
  virtual bool invertible() const { return false; }
  virtual std::string describe() const = 0;
  /// Fixed points in [0,1], sorted.
  virtual std::vector<double> fixed_points() const = 0;
};

using IntervalMapPtr = std::shared_ptr<const IntervalMap>;

/// x -> x^2. Fixed points {0,1}; 0 attracts, 1 repels.
IntervalMapPtr square_map();

/// Strictly increasing with fixed point set exactly {0, 1/2, 1}:
/// 2x^2 on [0,1/2] (below the identity), mirror image 1-2(1-x)^2 on [1/2,1]
/// (above the identity). {0,1} attracts, 1/2 repels.
IntervalMapPtr three_fixed_map();

IntervalMapPtr identity_interval_map();

/// Increasing piecewise-linear interpolation through (x_i, y_i) with
/// x_0 = y_0 = 0 and x_last = y_last = 1.
IntervalMapPtr piecewise_linear_map(std::vector<double> xs,
                                    std::vector<double> ys);

/// Tent x -> 1 - |2x - 1|; continuous, not injective (monotonicity
/// counterexample in tests).
IntervalMapPtr tent_map();

}  // namespace shadowlab
