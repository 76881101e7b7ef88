#include "shadowlab/interval_map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shadowlab {

double IntervalMap::apply_inverse(double) const {
  throw std::logic_error("interval map: no inverse");
}

namespace {

class SquareMap final : public IntervalMap {
 public:
  double apply(double x) const override { return x * x; }
  double apply_inverse(double y) const override { return std::sqrt(y); }
  bool invertible() const override { return true; }
  std::string describe() const override { return "square"; }
  std::vector<double> fixed_points() const override { return {0.0, 1.0}; }
};

class ThreeFixedMap final : public IntervalMap {
 public:
  double apply(double x) const override {
    if (x <= 0.5) return 2.0 * x * x;
    const double u = 1.0 - x;
    return 1.0 - 2.0 * u * u;
  }
  double apply_inverse(double y) const override {
    if (y <= 0.5) return std::sqrt(0.5 * y);
    return 1.0 - std::sqrt(0.5 * (1.0 - y));
  }
  bool invertible() const override { return true; }
  std::string describe() const override { return "three-fixed"; }
  std::vector<double> fixed_points() const override { return {0.0, 0.5, 1.0}; }
};

class IdentityMap final : public IntervalMap {
 public:
  double apply(double x) const override { return x; }
  double apply_inverse(double y) const override { return y; }
  bool invertible() const override { return true; }
  std::string describe() const override { return "identity"; }
  std::vector<double> fixed_points() const override { return {}; }
};

class PiecewiseLinearMap final : public IntervalMap {
 public:
  PiecewiseLinearMap(std::vector<double> xs, std::vector<double> ys)
      : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() != ys_.size() || xs_.size() < 2)
      throw std::domain_error("piecewise linear: bad breakpoints");
    if (xs_.front() != 0.0 || xs_.back() != 1.0 || ys_.front() != 0.0 ||
        ys_.back() != 1.0)
      throw std::domain_error("piecewise linear: must fix 0 and 1");
    for (size_t i = 1; i < xs_.size(); ++i)
      if (!(xs_[i] > xs_[i - 1]) || !(ys_[i] > ys_[i - 1]))
        throw std::domain_error("piecewise linear: not increasing");
  }
  double apply(double x) const override { return eval(xs_, ys_, x); }
  double apply_inverse(double y) const override { return eval(ys_, xs_, y); }
  bool invertible() const override { return true; }
  std::string describe() const override { return "piecewise-linear"; }
  std::vector<double> fixed_points() const override {
    std::vector<double> out{0.0};
    for (size_t i = 1; i < xs_.size(); ++i) {
      // fixed point inside segment i-1 -> i where the chord crosses y = x
      double x0 = xs_[i - 1], x1 = xs_[i], y0 = ys_[i - 1], y1 = ys_[i];
      double d0 = y0 - x0, d1 = y1 - x1;
      if (d0 == 0.0 && x0 != 0.0) out.push_back(x0);
      if (d0 * d1 < 0.0) out.push_back(x0 + (x1 - x0) * d0 / (d0 - d1));
    }
    if (out.back() != 1.0) out.push_back(1.0);
    return out;
  }

 private:
  static double eval(const std::vector<double>& xs,
                     const std::vector<double>& ys, double x) {
    x = std::clamp(x, 0.0, 1.0);
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    size_t i = std::min(xs.size() - 1,
                        static_cast<size_t>(std::max<std::ptrdiff_t>(
                            1, it - xs.begin())));
    double u = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + u * (ys[i] - ys[i - 1]);
  }
  std::vector<double> xs_, ys_;
};

class TentMap final : public IntervalMap {
 public:
  double apply(double x) const override { return 1.0 - std::abs(2.0 * x - 1.0); }
  std::string describe() const override { return "tent"; }
  std::vector<double> fixed_points() const override { return {0.0, 2.0 / 3.0}; }
};

}  // namespace

IntervalMapPtr square_map() { return std::make_shared<SquareMap>(); }
IntervalMapPtr three_fixed_map() { return std::make_shared<ThreeFixedMap>(); }
IntervalMapPtr identity_interval_map() {
  return std::make_shared<IdentityMap>();
}
IntervalMapPtr piecewise_linear_map(std::vector<double> xs,
                                    std::vector<double> ys) {
  return std::make_shared<PiecewiseLinearMap>(std::move(xs), std::move(ys));
}
IntervalMapPtr tent_map() { return std::make_shared<TentMap>(); }

}  // namespace shadowlab
