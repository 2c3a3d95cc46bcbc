#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tecd/interface.hpp"

namespace tecd {

// --------------------------------------------------------------------------
// Closed-form constants of the tangential energy recursion, parameterized by
// the background stretches h = F11+, a = F22, b = F33 and the normal-stretch
// jump x = [F11]. Squared versions stay inside the rationals, so the product
// identity can be checked exactly.
// --------------------------------------------------------------------------

template <typename S>
S max_of(const S& u, const S& v) {
  return u < v ? v : u;
}

template <typename S>
S cbar0(const S& h, const S& a, const S& x) {
  return max_of(S(1), (h * h) / (a * a)) * x / h;
}

template <typename S>
S cbar1_sq(const S& h, const S& a, const S& b, const S& x) {
  const S m = max_of(S(1), (a * a) / (h * h));
  const S q = (h * x) / (a * b);
  return (S(1) + (b * b) / (a * a)) * m * m * q * q;
}

template <typename S>
S cbar2_sq(const S& h, const S& a, const S& b, const S& x) {
  const S m = max_of(S(1), (b * b) / (h * h));
  const S q = (h * x) / (a * b);
  return (S(1) + (b * b) / (a * a)) * m * m * q * q;
}

template <typename S>
S cbar3_sq(const S& h, const S& a, const S& b, const S& x) {
  const S m = max_of(S(1), (b * b) / (h * h));
  const S q = (h * x) / (a * b);
  return (S(1) + (a * a) / (b * b)) * m * m * q * q;
}

template <typename S>
S cbar4_sq(const S& h, const S& a, const S& b, const S& x) {
  const S m = max_of(S(1), (a * a) / (h * h));
  const S q = (h * x) / (a * b);
  return (S(1) + (a * a) / (b * b)) * m * m * q * q;
}

// cbar for d = 3: the reciprocal of the admissible jump ratio.
inline double cbar3d(double h, double a, double b) {
  return std::sqrt(1.0 + a * a / (b * b)) *
         (std::max(1.0, h * h / (a * a)) + std::max(1.0, h * h / (b * b)) * b / a);
}

struct StabilityVerdict {
  int d = 2;
  double lhs = 0.0;       // [F11]/F11+
  double rhs = 0.0;       // admissible strict bound on lhs
  double margin = 0.0;    // rhs - lhs
  bool satisfied = false; // strict inequality
  bool boundary = false;  // margin exactly zero
  double cbar = 0.0;      // d = 3 only
  double c0 = 0.0;        // d = 2 only
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;  // d = 3 only
  bool alt_criterion = false;  // d = 3: c1,c3 < 1 and c2 c4 < (1-c1)(1-c3)
};

inline StabilityVerdict evaluate_condition(const BackgroundState& bg) {
  StabilityVerdict v;
  v.d = bg.params.d;
  const double h = bg.stretch_plus(0);
  const double a = bg.stretch_plus(1);
  const double x = bg.stretch_plus(0) - bg.stretch_minus(0);
  v.lhs = x / h;
  if (v.d == 2) {
    v.rhs = a * a / (h * h);
    v.c0 = cbar0(h, a, x);
  } else {
    const double b = bg.stretch_plus(2);
    v.cbar = cbar3d(h, a, b);
    v.rhs = 1.0 / v.cbar;
    v.c1 = std::sqrt(cbar1_sq(h, a, b, x));
    v.c2 = std::sqrt(cbar2_sq(h, a, b, x));
    v.c3 = std::sqrt(cbar3_sq(h, a, b, x));
    v.c4 = std::sqrt(cbar4_sq(h, a, b, x));
    v.alt_criterion =
        v.c1 < 1.0 && v.c3 < 1.0 && v.c2 * v.c4 < (1.0 - v.c1) * (1.0 - v.c3);
  }
  v.margin = v.rhs - v.lhs;
  v.boundary = v.margin == 0.0;
  v.satisfied = v.margin > 0.0;
  return v;
}

// --------------------------------------------------------------------------
// Parameter sweep over stretch ratios, lexicographic row order.
// --------------------------------------------------------------------------

struct SweepSpec {
  int d = 2;
  double gamma = 1.4;
  double f11p = 1.0;
  std::vector<double> ratio_f11m;  // F11-/F11+ in (0,1)
  std::vector<double> ratio_f22;   // F22/F11+
  std::vector<double> ratio_f33;   // F33/F11+ (d = 3)
};

struct SweepRow {
  double f11m_ratio, f22_ratio, f33_ratio;
  StabilityVerdict verdict;
};

inline std::vector<SweepRow> sweep(const SweepSpec& spec) {
  std::vector<SweepRow> rows;
  const MaterialParams mp = MaterialParams::make(spec.d, spec.gamma);
  std::vector<double> r33 = spec.d == 3 ? spec.ratio_f33 : std::vector<double>{1.0};
  for (double rm : spec.ratio_f11m)
    for (double r2 : spec.ratio_f22)
      for (double r3 : r33) {
        Eigen::VectorXd stretch(spec.d);
        stretch(0) = spec.f11p;
        stretch(1) = r2 * spec.f11p;
        if (spec.d == 3) stretch(2) = r3 * spec.f11p;
        // the verdict does not need an admissible thermal branch, but keep
        // the construction honest: fall back to a pure-stretch evaluation
        // when the pressure jump is not realizable for this gamma
        StabilityVerdict verdict;
        try {
          verdict = evaluate_condition(
              build_background(stretch, rm * spec.f11p, 0.0, mp));
        } catch (const NegativeTargetPressure&) {
          BackgroundState bg;
          bg.params = mp;
          bg.stretch_plus = stretch;
          bg.stretch_minus = stretch;
          bg.stretch_minus(0) = rm * spec.f11p;
          verdict = evaluate_condition(bg);
        }
        rows.push_back({rm, r2, r3, verdict});
      }
  return rows;
}

}  // namespace tecd
