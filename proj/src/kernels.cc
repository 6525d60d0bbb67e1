// Copyright 2026 The locpriv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "locpriv/kernels.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace locpriv::kernels {
namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr long kParallelWork = 1L << 15;
constexpr int kSmallBatch = 4;

double LogOrNegInf(double v) {
  return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
}

// C (m x n, row stride ldc) += A B where A(i, k) = a[i * a_rs + k * a_cs]
// and B is row-major k x n with row stride ldb. Register-blocked 4 x 16 so
// the inner loop vectorizes over n; the OpenMP loop splits row blocks.
void GemmAccumulate(int m, int n, int k, const double* a, long a_rs, long a_cs,
                    const double* b, long ldb, double* c, long ldc) {
  constexpr int kRows = 4;
  constexpr int kCols = 16;
  const int row_blocks = (m + kRows - 1) / kRows;
  const long work = static_cast<long>(m) * n * k;
#pragma omp parallel for schedule(static) if (work > kParallelWork && row_blocks > 1)
  for (int rb = 0; rb < row_blocks; ++rb) {
    const int i0 = rb * kRows;
    const int rows = std::min(kRows, m - i0);
    int j0 = 0;
    if (rows == kRows) {
      for (; j0 + kCols <= n; j0 += kCols) {
        double acc[kRows][kCols] = {};
        for (int p = 0; p < k; ++p) {
          const double* brow = b + p * ldb + j0;
          for (int r = 0; r < kRows; ++r) {
            const double av = a[(i0 + r) * a_rs + p * a_cs];
#pragma omp simd
            for (int j = 0; j < kCols; ++j) acc[r][j] += av * brow[j];
          }
        }
        for (int r = 0; r < kRows; ++r) {
          double* crow = c + (i0 + r) * ldc + j0;
#pragma omp simd
          for (int j = 0; j < kCols; ++j) crow[j] += acc[r][j];
        }
      }
    }
    // Edges: leftover columns, or a short final row block.
    for (int r = 0; r < rows; ++r) {
      double* crow = c + (i0 + r) * ldc;
      for (int p = 0; p < k; ++p) {
        const double av = a[(i0 + r) * a_rs + p * a_cs];
        if (av == 0.0) continue;
        const double* brow = b + p * ldb;
#pragma omp simd
        for (int j = j0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  }
}

}  // namespace

void DenseForward(std::span<const double> in, std::span<const double> w,
                  std::span<const double> bias, std::span<double> out,
                  int batch, int in_dim, int out_dim) {
  if (batch <= kSmallBatch) {
    // One dot product per output; transposing w would cost more than it saves.
#pragma omp parallel for schedule(static) if (out_dim * in_dim >= kParallelWork)
    for (int o = 0; o < out_dim; ++o) {
      const double* row = w.data() + static_cast<size_t>(o) * in_dim;
      for (int b = 0; b < batch; ++b) {
        const double* x = in.data() + static_cast<size_t>(b) * in_dim;
        double s = bias[o];
        for (int i = 0; i < in_dim; ++i) s += row[i] * x[i];
        out[static_cast<size_t>(b) * out_dim + o] = s;
      }
    }
    return;
  }
  static thread_local std::vector<double> wt;
  wt.resize(static_cast<size_t>(in_dim) * out_dim);
  for (int o = 0; o < out_dim; ++o) {
    for (int i = 0; i < in_dim; ++i) {
      wt[static_cast<size_t>(i) * out_dim + o] = w[static_cast<size_t>(o) * in_dim + i];
    }
  }
  for (int b = 0; b < batch; ++b) {
    std::copy(bias.begin(), bias.end(), out.begin() + static_cast<long>(b) * out_dim);
  }
  GemmAccumulate(batch, out_dim, in_dim, in.data(), in_dim, 1, wt.data(),
                 out_dim, out.data(), out_dim);
}

void DenseBackward(std::span<const double> in, std::span<const double> w,
                   std::span<const double> grad_out, std::span<double> gw,
                   std::span<double> gb, std::span<double> grad_in, int batch,
                   int in_dim, int out_dim) {
  // gw (out x in) += grad_out^T in
  GemmAccumulate(out_dim, in_dim, batch, grad_out.data(), 1, out_dim, in.data(),
                 in_dim, gw.data(), in_dim);
  for (int b = 0; b < batch; ++b) {
    const double* g = grad_out.data() + static_cast<long>(b) * out_dim;
    for (int o = 0; o < out_dim; ++o) gb[o] += g[o];
  }
  if (grad_in.empty()) return;
  std::fill(grad_in.begin(), grad_in.end(), 0.0);
  // grad_in (batch x in) = grad_out w
  GemmAccumulate(batch, in_dim, out_dim, grad_out.data(), out_dim, 1, w.data(),
                 in_dim, grad_in.data(), in_dim);
}

LeakageDistortion KernelMoments(std::span<const double> belief,
                                std::span<const double> kernel,
                                std::span<const double> transition,
                                std::span<const double> dist, int n) {
  // Per-x partial marginals of Y, combined serially in x order.
  std::vector<double> partial(static_cast<size_t>(n) * n, 0.0);
  std::vector<double> leak_x(n, 0.0), dist_x(n, 0.0);
  const long n2 = static_cast<long>(n) * n;
#pragma omp parallel for schedule(static) if (n2 * n > kParallelWork)
  for (int x = 0; x < n; ++x) {
    double* px = partial.data() + static_cast<long>(x) * n;
    double dsum = 0.0;
    for (int xp = 0; xp < n; ++xp) {
      const double joint = belief[xp] * transition[static_cast<long>(xp) * n + x];
      if (joint == 0.0) continue;
      const double* row = kernel.data() + x * n2 + static_cast<long>(xp) * n;
      for (int y = 0; y < n; ++y) {
        px[y] += joint * row[y];
        dsum += joint * row[y] * dist[static_cast<long>(x) * n + y];
      }
    }
    dist_x[x] = dsum;
  }
  std::vector<double> marginal(n, 0.0);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) marginal[y] += partial[static_cast<long>(x) * n + y];
  }
#pragma omp parallel for schedule(static) if (n2 * n > kParallelWork)
  for (int x = 0; x < n; ++x) {
    double lsum = 0.0;
    for (int xp = 0; xp < n; ++xp) {
      const double joint = belief[xp] * transition[static_cast<long>(xp) * n + x];
      if (joint == 0.0) continue;
      const double* row = kernel.data() + x * n2 + static_cast<long>(xp) * n;
      for (int y = 0; y < n; ++y) {
        const double w = joint * row[y];
        if (w > 0.0) lsum += w * std::log(row[y] / marginal[y]);
      }
    }
    leak_x[x] = lsum;
  }
  LeakageDistortion r;
  for (int x = 0; x < n; ++x) {
    r.leakage_bits += leak_x[x];
    r.distortion += dist_x[x];
  }
  r.leakage_bits /= std::log(2.0);
  return r;
}

void PosteriorWeights(std::span<const double> belief,
                      std::span<const double> kernel,
                      std::span<const double> transition, int y, int n,
                      std::span<double> out) {
  const long n2 = static_cast<long>(n) * n;
#pragma omp parallel for schedule(static) if (n2 > kParallelWork)
  for (int x = 0; x < n; ++x) {
    double s = 0.0;
    for (int xp = 0; xp < n; ++xp) {
      s += transition[static_cast<long>(xp) * n + x] *
           kernel[x * n2 + static_cast<long>(xp) * n + y] * belief[xp];
    }
    out[x] = s;
  }
}

void TiltKernel(std::span<const double> marginal, std::span<const double> dist,
                double beta, int conditions, int n, std::span<double> kernel) {
  const long rows = static_cast<long>(conditions) * n;
#pragma omp parallel for schedule(static) if (rows * n > kParallelWork)
  for (long r = 0; r < rows; ++r) {
    const int c = static_cast<int>(r / n);
    const int x = static_cast<int>(r % n);
    const double* m = marginal.data() + static_cast<long>(c) * n;
    double* k = kernel.data() + r * n;
    double best = -std::numeric_limits<double>::infinity();
    for (int y = 0; y < n; ++y) {
      k[y] = LogOrNegInf(m[y]) - beta * dist[static_cast<long>(x) * n + y];
      if (k[y] > best) best = k[y];
    }
    if (!std::isfinite(best)) {
      for (int y = 0; y < n; ++y) k[y] = y == x ? 1.0 : 0.0;
      continue;
    }
    double z = 0.0;
    for (int y = 0; y < n; ++y) {
      k[y] = std::exp(k[y] - best);
      z += k[y];
    }
    for (int y = 0; y < n; ++y) k[y] /= z;
  }
}

namespace reference {

void DenseForward(std::span<const double> in, std::span<const double> w,
                  std::span<const double> bias, std::span<double> out,
                  int batch, int in_dim, int out_dim) {
  for (int b = 0; b < batch; ++b) {
    for (int o = 0; o < out_dim; ++o) {
      double s = bias[o];
      for (int i = 0; i < in_dim; ++i) {
        s += w[static_cast<size_t>(o) * in_dim + i] *
             in[static_cast<size_t>(b) * in_dim + i];
      }
      out[static_cast<size_t>(b) * out_dim + o] = s;
    }
  }
}

void DenseBackward(std::span<const double> in, std::span<const double> w,
                   std::span<const double> grad_out, std::span<double> gw,
                   std::span<double> gb, std::span<double> grad_in, int batch,
                   int in_dim, int out_dim) {
  for (int b = 0; b < batch; ++b) {
    for (int o = 0; o < out_dim; ++o) {
      const double go = grad_out[static_cast<size_t>(b) * out_dim + o];
      gb[o] += go;
      for (int i = 0; i < in_dim; ++i) {
        gw[static_cast<size_t>(o) * in_dim + i] +=
            go * in[static_cast<size_t>(b) * in_dim + i];
      }
    }
  }
  if (grad_in.empty()) return;
  for (int b = 0; b < batch; ++b) {
    for (int i = 0; i < in_dim; ++i) {
      double s = 0.0;
      for (int o = 0; o < out_dim; ++o) {
        s += grad_out[static_cast<size_t>(b) * out_dim + o] *
             w[static_cast<size_t>(o) * in_dim + i];
      }
      grad_in[static_cast<size_t>(b) * in_dim + i] = s;
    }
  }
}

LeakageDistortion KernelMoments(std::span<const double> belief,
                                std::span<const double> kernel,
                                std::span<const double> transition,
                                std::span<const double> dist, int n) {
  auto a = [&](int x, int xp, int y) {
    return kernel[(static_cast<size_t>(x) * n + xp) * n + y];
  };
  auto q = [&](int from, int to) {
    return transition[static_cast<size_t>(from) * n + to];
  };
  std::vector<double> marginal(n, 0.0);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      for (int xp = 0; xp < n; ++xp) {
        marginal[y] += belief[xp] * a(x, xp, y) * q(xp, x);
      }
    }
  }
  LeakageDistortion r;
  for (int x = 0; x < n; ++x) {
    for (int xp = 0; xp < n; ++xp) {
      for (int y = 0; y < n; ++y) {
        const double w = belief[xp] * a(x, xp, y) * q(xp, x);
        if (w <= 0.0) continue;
        r.leakage_bits += w * std::log2(a(x, xp, y) / marginal[y]);
        r.distortion += w * dist[static_cast<size_t>(x) * n + y];
      }
    }
  }
  return r;
}

void PosteriorWeights(std::span<const double> belief,
                      std::span<const double> kernel,
                      std::span<const double> transition, int y, int n,
                      std::span<double> out) {
  for (int x = 0; x < n; ++x) {
    out[x] = 0.0;
    for (int xp = 0; xp < n; ++xp) {
      out[x] += transition[static_cast<size_t>(xp) * n + x] *
                kernel[(static_cast<size_t>(x) * n + xp) * n + y] * belief[xp];
    }
  }
}

void TiltKernel(std::span<const double> marginal, std::span<const double> dist,
                double beta, int conditions, int n, std::span<double> kernel) {
  for (int c = 0; c < conditions; ++c) {
    for (int x = 0; x < n; ++x) {
      double* k = kernel.data() + (static_cast<size_t>(c) * n + x) * n;
      // Shift exponents by the smallest distance to a supported output so the
      // leading term cannot underflow.
      double shift = std::numeric_limits<double>::infinity();
      for (int y = 0; y < n; ++y) {
        if (marginal[static_cast<size_t>(c) * n + y] > 0.0) {
          shift = std::min(shift, beta * dist[static_cast<size_t>(x) * n + y]);
        }
      }
      double z = 0.0;
      for (int y = 0; y < n; ++y) {
        const double m = marginal[static_cast<size_t>(c) * n + y];
        k[y] = m > 0.0
                   ? m * std::exp(shift - beta * dist[static_cast<size_t>(x) * n + y])
                   : 0.0;
        z += k[y];
      }
      if (z > 0.0) {
        for (int y = 0; y < n; ++y) k[y] /= z;
      } else {
        for (int y = 0; y < n; ++y) k[y] = y == x ? 1.0 : 0.0;
      }
    }
  }
}

}  // namespace reference
}  // namespace locpriv::kernels
