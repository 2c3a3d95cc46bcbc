#pragma once

#include <Eigen/Dense>

namespace tecd {

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Mat = MatX<double>;
using Vec = VecX<double>;

// Ordering of the primary unknown vector U = (p, v_1..v_d, F col-major, S).
// F columns are stored contiguously: F_{.1}, F_{.2}, ..., F_{.d}.
// All index arguments are 1-based to match the usual component names.
struct Layout {
  int d;

  explicit constexpr Layout(int dim) : d(dim) {}

  constexpr int n() const { return d * d + d + 2; }
  constexpr int p() const { return 0; }
  constexpr int v(int i) const { return i; }                       // i = 1..d
  constexpr int F(int i, int j) const { return d + (j - 1) * d + i; }  // i,j = 1..d
  constexpr int S() const { return d * d + d + 1; }
};

// Ordering of the transformed unknowns W used near the boundary.
//   W_1       = p
//   W_2       = v . N
//   W_{j+1}   = v_j                      (j = 2..d)
//   W_{d+2}   = p - rho F_1N F_11
//   W_{d+j+1} = dj(Phi) F_11 + F_j1      (j = 2..d)
//   W_{jd+i+1}= F_ij                     (i = 1..d, j = 2..d)
//   W_{n}     = S
// The noncharacteristic block is W_2..W_{2d+1}.
struct WLayout {
  int d;

  explicit constexpr WLayout(int dim) : d(dim) {}

  constexpr int n() const { return d * d + d + 2; }
  constexpr int w1() const { return 0; }
  constexpr int w2() const { return 1; }
  constexpr int wv(int j) const { return j; }           // v_j, j = 2..d
  constexpr int wd2() const { return d + 1; }
  constexpr int wdj(int j) const { return d + j; }      // j = 2..d
  constexpr int wF(int i, int j) const { return j * d + i; }  // j = 2..d
  constexpr int wS() const { return d * d + d + 1; }
  constexpr int nc_begin() const { return 1; }
  constexpr int nc_end() const { return 2 * d + 1; }    // half-open
};

inline bool valid_dim(int d) { return d == 2 || d == 3; }

}  // namespace tecd
