#include "tecd/norms.hpp"

#include <cmath>

namespace tecd {

void dft(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0) return;
  const double sgn = inverse ? 1.0 : -1.0;
  if ((n & (n - 1)) == 0) {
    // iterative radix-2
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const double ang = sgn * 2.0 * M_PI / static_cast<double>(len);
      const std::complex<double> wl(std::cos(ang), std::sin(ang));
      for (std::size_t i = 0; i < n; i += len) {
        std::complex<double> w(1.0, 0.0);
        for (std::size_t j = 0; j < len / 2; ++j) {
          const std::complex<double> u = a[i + j];
          const std::complex<double> v = a[i + j + len / 2] * w;
          a[i + j] = u + v;
          a[i + j + len / 2] = u - v;
          w *= wl;
        }
      }
    }
  } else {
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> s(0.0, 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        const double ang = sgn * 2.0 * M_PI * static_cast<double>(j * k % n) /
                           static_cast<double>(n);
        s += a[j] * std::complex<double>(std::cos(ang), std::sin(ang));
      }
      out[k] = s;
    }
    a = std::move(out);
  }
  if (inverse)
    for (auto& v : a) v /= static_cast<double>(n);
}

namespace {

int freq_of(int idx, int n) { return idx <= n / 2 ? idx : idx - n; }

}  // namespace

double torus_multiplier_sum(const Grid& g, const Eigen::ArrayXd& w, double order) {
  const int n = g.ntan;
  if (g.d == 2) {
    std::vector<std::complex<double>> a(n);
    for (int i = 0; i < n; ++i) a[i] = w(i);
    dft(a, false);
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      const double kk = freq_of(k, n);
      const double coeff = std::norm(a[k] / static_cast<double>(n));
      s += std::pow(1.0 + 4.0 * M_PI * M_PI * kk * kk, order) * coeff;
    }
    return s;
  }
  // 2-d torus: row transforms then column transforms
  std::vector<std::vector<std::complex<double>>> a(n, std::vector<std::complex<double>>(n));
  for (int i2 = 0; i2 < n; ++i2)
    for (int i3 = 0; i3 < n; ++i3) a[i2][i3] = w(i2 * n + i3);
  for (int i2 = 0; i2 < n; ++i2) dft(a[i2], false);
  std::vector<std::complex<double>> col(n);
  for (int i3 = 0; i3 < n; ++i3) {
    for (int i2 = 0; i2 < n; ++i2) col[i2] = a[i2][i3];
    dft(col, false);
    for (int i2 = 0; i2 < n; ++i2) a[i2][i3] = col[i2];
  }
  double s = 0.0;
  const double scale = 1.0 / (static_cast<double>(n) * n);
  for (int k2 = 0; k2 < n; ++k2)
    for (int k3 = 0; k3 < n; ++k3) {
      const double f2 = freq_of(k2, n), f3 = freq_of(k3, n);
      const double coeff = std::norm(a[k2][k3] * scale);
      s += std::pow(1.0 + 4.0 * M_PI * M_PI * (f2 * f2 + f3 * f3), order) * coeff;
    }
  return s;
}

double fractional_trace_norm(const Grid& g, const std::vector<Eigen::ArrayXd>& series,
                             double dt, double order) {
  const std::size_t nt = series.size();
  if (nt < 2) return 0.0;
  const double T = dt * static_cast<double>(nt);
  const int ns = g.ntt();

  // transform in time first
  std::vector<std::vector<std::complex<double>>> hat(
      ns, std::vector<std::complex<double>>(nt));
  std::vector<std::complex<double>> tmp(nt);
  for (int q = 0; q < ns; ++q) {
    for (std::size_t k = 0; k < nt; ++k) tmp[k] = series[k](q);
    dft(tmp, false);
    for (std::size_t k = 0; k < nt; ++k)
      hat[q][k] = tmp[k] / static_cast<double>(nt);
  }

  double total = 0.0;
  Eigen::ArrayXd slice_re(ns), slice_im(ns);
  for (std::size_t k = 0; k < nt; ++k) {
    const double nu = freq_of(static_cast<int>(k), static_cast<int>(nt)) / T;
    // spatial transform of the k-th time mode, reusing the torus helper on
    // real and imaginary parts with an adjusted multiplier
    const int n = g.ntan;
    if (g.d == 2) {
      std::vector<std::complex<double>> a(n);
      for (int i = 0; i < n; ++i) a[i] = hat[i][k];
      dft(a, false);
      for (int kk = 0; kk < n; ++kk) {
        const double f = freq_of(kk, n);
        total += std::pow(1.0 + 4.0 * M_PI * M_PI * (nu * nu + f * f), order) *
                 std::norm(a[kk] / static_cast<double>(n));
      }
    } else {
      std::vector<std::vector<std::complex<double>>> a(
          n, std::vector<std::complex<double>>(n));
      for (int i2 = 0; i2 < n; ++i2)
        for (int i3 = 0; i3 < n; ++i3) a[i2][i3] = hat[i2 * n + i3][k];
      for (int i2 = 0; i2 < n; ++i2) dft(a[i2], false);
      std::vector<std::complex<double>> col(n);
      for (int i3 = 0; i3 < n; ++i3) {
        for (int i2 = 0; i2 < n; ++i2) col[i2] = a[i2][i3];
        dft(col, false);
        for (int i2 = 0; i2 < n; ++i2) a[i2][i3] = col[i2];
      }
      const double scale = 1.0 / (static_cast<double>(n) * n);
      for (int k2 = 0; k2 < n; ++k2)
        for (int k3 = 0; k3 < n; ++k3) {
          const double f2 = freq_of(k2, n), f3 = freq_of(k3, n);
          total += std::pow(1.0 + 4.0 * M_PI * M_PI * (nu * nu + f2 * f2 + f3 * f3),
                            order) *
                   std::norm(a[k2][k3] * scale);
        }
    }
  }
  return std::sqrt(T * total);
}

// --------------------------------------------------------------------------
// instantaneous norms
// --------------------------------------------------------------------------

Field time_derivative(const FieldHistory& h, int order) {
  const int n = h.available();
  const double dt = h.dt;
  auto at = [&](int back) -> const Field& { return h.snaps[n - 1 - back]; };
  if (order == 0) return h.newest();
  Field out = h.newest();
  if (order == 1) {
    if (n >= 3)
      out.m = (3.0 * at(0).m - 4.0 * at(1).m + at(2).m) / (2.0 * dt);
    else if (n >= 2)
      out.m = (at(0).m - at(1).m) / dt;
    else
      throw InsufficientHistory("need 2 stored steps for a time derivative");
    return out;
  }
  if (order == 2) {
    if (n >= 4)
      out.m = (2.0 * at(0).m - 5.0 * at(1).m + 4.0 * at(2).m - at(3).m) / (dt * dt);
    else if (n >= 3)
      out.m = (at(0).m - 2.0 * at(1).m + at(2).m) / (dt * dt);
    else
      throw InsufficientHistory("need 3 stored steps for a second time derivative");
    return out;
  }
  if (order == 3) {
    if (n >= 4)
      out.m = (at(0).m - 3.0 * at(1).m + 3.0 * at(2).m - at(3).m) / (dt * dt * dt);
    else
      throw InsufficientHistory("need 4 stored steps for a third time derivative");
    return out;
  }
  throw InsufficientHistory("time-derivative order beyond the stored ring");
}

namespace {

void spatial_orders(const Grid& g, const Field& base, int total,
                    std::vector<Field>& out, bool tangential_only) {
  // all spatial multi-indices with |alpha| == total, derivatives applied
  // one direction at a time (each application is second-order accurate)
  struct Item {
    Field f;
    int remaining;
    int min_dir;
  };
  std::vector<Item> stack;
  stack.push_back({base, total, tangential_only ? 2 : 1});
  while (!stack.empty()) {
    Item it = std::move(stack.back());
    stack.pop_back();
    if (it.remaining == 0) {
      out.push_back(std::move(it.f));
      continue;
    }
    for (int dir = it.min_dir; dir <= g.d; ++dir) {
      Field df = dir == 1 ? deriv_x1(g, it.f) : deriv_tan(g, it.f, dir);
      stack.push_back({std::move(df), it.remaining - 1, dir});
    }
  }
}

}  // namespace

double instant_norm(const Grid& g, const FieldHistory& h, int m, NormKind kind) {
  double sum = 0.0;
  for (int a0 = 0; a0 <= m; ++a0) {
    const Field dt = time_derivative(h, a0);
    for (int rest = 0; rest <= m - a0; ++rest) {
      std::vector<Field> derivs;
      spatial_orders(g, dt, rest, derivs, kind == NormKind::Tangential);
      for (const Field& f : derivs) {
        const double nrm = l2_norm(g, f);
        sum += nrm * nrm;
      }
    }
  }
  return std::sqrt(sum);
}

Field dtan_beta_field(const Grid& g, const FieldHistory& h,
                      const Eigen::VectorXi& beta) {
  Field f = time_derivative(h, beta(0));
  for (int dir = 2; dir <= g.d; ++dir)
    for (int rep = 0; rep < beta(dir - 1); ++rep) f = deriv_tan(g, f, dir);
  return f;
}

std::vector<Eigen::VectorXi> tangential_multiindices(int d, int m) {
  std::vector<Eigen::VectorXi> out;
  for (int a0 = 0; a0 <= m; ++a0)
    for (int a2 = 0; a2 + a0 <= m; ++a2) {
      if (d == 2) {
        Eigen::VectorXi b(2);
        b << a0, a2;
        out.push_back(b);
      } else {
        for (int a3 = 0; a0 + a2 + a3 <= m; ++a3) {
          Eigen::VectorXi b(3);
          b << a0, a2, a3;
          out.push_back(b);
        }
      }
    }
  return out;
}

// --------------------------------------------------------------------------
// trace probes
// --------------------------------------------------------------------------

namespace {

struct ProbeRng {
  std::uint64_t state;
  explicit ProbeRng(std::uint64_t seed) : state(seed ^ 0x9e3779b97f4a7c15ull) {
    next();
  }
  std::uint64_t next() {
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return state * 0x2545f4914f6cdd1dull;
  }
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(next() >> 11) * 0x1.0p-53);
  }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

// band-limited sample with closed-form derivatives
struct ProbeSample {
  struct Mode {
    double c;
    int k2, k3;
    int phase2, phase3;  // 0 = cos, 1 = sin
    double a, b, sigma;  // envelope (a + b x1) exp(-(x1/sigma)^2)
  };
  std::vector<Mode> modes;
  int d;

  double envelope(const Mode& m, double x1) const {
    return (m.a + m.b * x1) * std::exp(-(x1 / m.sigma) * (x1 / m.sigma));
  }
  double envelope_d(const Mode& m, double x1) const {
    const double e = std::exp(-(x1 / m.sigma) * (x1 / m.sigma));
    return (m.b - 2.0 * x1 / (m.sigma * m.sigma) * (m.a + m.b * x1)) * e;
  }
  static double trig(int phase, double t) {
    return phase == 0 ? std::cos(t) : std::sin(t);
  }
  static double trig_d(int phase, double t) {
    return phase == 0 ? -std::sin(t) : std::cos(t);
  }

  double value(double x1, double x2, double x3) const {
    double s = 0.0;
    for (const auto& m : modes) {
      double t = trig(m.phase2, 2.0 * M_PI * m.k2 * x2);
      if (d == 3) t *= trig(m.phase3, 2.0 * M_PI * m.k3 * x3);
      s += m.c * envelope(m, x1) * t;
    }
    return s;
  }
  double d1(double x1, double x2, double x3) const {
    double s = 0.0;
    for (const auto& m : modes) {
      double t = trig(m.phase2, 2.0 * M_PI * m.k2 * x2);
      if (d == 3) t *= trig(m.phase3, 2.0 * M_PI * m.k3 * x3);
      s += m.c * envelope_d(m, x1) * t;
    }
    return s;
  }
  double dtan(int dir, double x1, double x2, double x3) const {
    double s = 0.0;
    for (const auto& m : modes) {
      double t;
      if (dir == 2) {
        t = 2.0 * M_PI * m.k2 * trig_d(m.phase2, 2.0 * M_PI * m.k2 * x2);
        if (d == 3) t *= trig(m.phase3, 2.0 * M_PI * m.k3 * x3);
      } else {
        t = trig(m.phase2, 2.0 * M_PI * m.k2 * x2) * 2.0 * M_PI * m.k3 *
            trig_d(m.phase3, 2.0 * M_PI * m.k3 * x3);
      }
      s += m.c * envelope(m, x1) * t;
    }
    return s;
  }

  static ProbeSample random(ProbeRng& rng, const Grid& g) {
    ProbeSample ps;
    ps.d = g.d;
    const int kmax = std::min(5, g.ntan / 4);
    const int nmodes = rng.integer(2, 5);
    for (int i = 0; i < nmodes; ++i) {
      Mode m;
      m.c = rng.uniform(-1.0, 1.0);
      m.k2 = rng.integer(0, kmax);
      m.k3 = g.d == 3 ? rng.integer(0, kmax) : 0;
      m.phase2 = rng.integer(0, 1);
      m.phase3 = rng.integer(0, 1);
      m.a = rng.uniform(0.3, 1.0);
      m.b = rng.uniform(-0.5, 0.5);
      m.sigma = rng.uniform(0.8, 1.5);
      ps.modes.push_back(m);
    }
    return ps;
  }
};

double h1_norm_sq(const Grid& g, const ProbeSample& u) {
  double s = 0.0;
  for (int i1 = 0; i1 <= g.n1; ++i1) {
    const double w = g.quad_weight(i1);
    const double x1 = g.x1(i1);
    for (int it = 0; it < g.ntt(); ++it) {
      const double x2 = g.x2(it), x3 = g.x3(it);
      double val = u.value(x1, x2, x3);
      double acc = val * val;
      double dv = u.d1(x1, x2, x3);
      acc += dv * dv;
      for (int dir = 2; dir <= g.d; ++dir) {
        dv = u.dtan(dir, x1, x2, x3);
        acc += dv * dv;
      }
      s += w * acc;
    }
  }
  return s;
}

}  // namespace

TraceProbeResult trace_inequality_probe(const Grid& g, int samples,
                                        std::uint64_t seed) {
  TraceProbeResult res;
  res.samples = samples;
  ProbeRng rng(seed);
  const double slack = 1.0 + 10.0 * g.h1();

  for (int s = 0; s < samples; ++s) {
    const ProbeSample u1 = ProbeSample::random(rng, g);
    const ProbeSample u2 = ProbeSample::random(rng, g);

    Eigen::ArrayXd w(g.ntt());
    for (int it = 0; it < g.ntt(); ++it) w(it) = u1.value(0.0, g.x2(it), g.x3(it));
    const double lhs_a = torus_multiplier_sum(g, w, 0.5);
    const double rhs_a = h1_norm_sq(g, u1);
    res.max_ratio_a = std::max(res.max_ratio_a, lhs_a / rhs_a);
    if (lhs_a > rhs_a * slack) ++res.violations_a;

    const int dir = g.d == 3 && (s % 2 == 1) ? 3 : 2;
    double pairing = 0.0;
    for (int it = 0; it < g.ntt(); ++it)
      pairing += u1.value(0.0, g.x2(it), g.x3(it)) *
                 u2.dtan(dir, 0.0, g.x2(it), g.x3(it));
    pairing *= std::pow(g.htan(), g.d - 1);
    const double rhs_b = std::sqrt(h1_norm_sq(g, u1) * h1_norm_sq(g, u2));
    res.max_ratio_b = std::max(res.max_ratio_b, std::abs(pairing) / rhs_b);
    if (std::abs(pairing) > rhs_b * slack) ++res.violations_b;
  }
  return res;
}

}  // namespace tecd
