#pragma once

#include <complex>
#include <deque>
#include <vector>

#include "tecd/grid.hpp"

namespace tecd {

// In-place complex DFT, radix-2 when the length allows it and the direct
// transform otherwise. Desk-scale sizes only; deterministic everywhere.
void dft(std::vector<std::complex<double>>& a, bool inverse);

// --------------------------------------------------------------------------
// Fractional Sobolev norms via Fourier multipliers
// --------------------------------------------------------------------------

// Sum over torus frequencies of (1 + 4 pi^2 |k|^2)^order |w_hat(k)|^2 for a
// trace sampled on the tangential torus. order = 1/2 gives the left side of
// the trace inequality.
double torus_multiplier_sum(const Grid& g, const Eigen::ArrayXd& w, double order);

// H^order norm of a boundary trace history on the window [0, T) x torus,
// via the space-time DFT with physical frequencies (j/T, k).
double fractional_trace_norm(const Grid& g, const std::vector<Eigen::ArrayXd>& series,
                             double dt, double order);

// --------------------------------------------------------------------------
// Instantaneous norms with time derivatives from stored history
// --------------------------------------------------------------------------

// Ring of recent snapshots, newest last.
struct FieldHistory {
  double dt = 0.0;
  int depth = 4;
  std::deque<Field> snaps;

  void push(const Field& f) {
    snaps.push_back(f);
    while (static_cast<int>(snaps.size()) > depth) snaps.pop_front();
  }
  int available() const { return static_cast<int>(snaps.size()); }
  const Field& newest() const { return snaps.back(); }
};

// Backward time derivative of the given order at the newest snapshot,
// second-order accurate where the history allows it.
Field time_derivative(const FieldHistory& h, int order);

enum class NormKind { Full, Tangential };

// ||| u(t) |||_m with mixed time/space derivatives up to total order m.
// Throws InsufficientHistory when the ring cannot support the requested
// time orders.
double instant_norm(const Grid& g, const FieldHistory& h, int m, NormKind kind);

// D_tan^beta of the newest snapshot, beta = (beta_t, beta_2[, beta_3]).
Field dtan_beta_field(const Grid& g, const FieldHistory& h, const Eigen::VectorXi& beta);

// all tangential multi-indices with |beta| <= m
std::vector<Eigen::VectorXi> tangential_multiindices(int d, int m);

// --------------------------------------------------------------------------
// Trace inequality probes
// --------------------------------------------------------------------------

struct TraceProbeResult {
  int samples = 0;
  int violations_a = 0;   // trace-norm inequality
  int violations_b = 0;   // surface-pairing inequality
  double max_ratio_a = 0.0;
  double max_ratio_b = 0.0;
};

// Band-limited random fields on the truncated half-space with analytic
// derivatives; both sides of the two trace estimates are evaluated
// discretely, with quadrature slack (1 + 10 h1).
TraceProbeResult trace_inequality_probe(const Grid& g, int samples,
                                        std::uint64_t seed);

}  // namespace tecd
