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

// Data-parallel inner loops. Each kernel has an OpenMP version (namespace
// locpriv::kernels) and a plain serial version (locpriv::kernels::reference)
// kept as the test oracle and benchmark baseline. The OpenMP versions split
// work so that every output element is produced by exactly one thread and
// reductions are combined in a fixed order, so results do not depend on the
// thread count.

#ifndef LOCPRIV_KERNELS_H_
#define LOCPRIV_KERNELS_H_

#include <span>

namespace locpriv::kernels {

struct LeakageDistortion {
  double leakage_bits = 0.0;
  double distortion = 0.0;
};

// out[b][o] = bias[o] + sum_i in[b][i] * w[o][i]. Row-major, w is
// out_dim x in_dim.
void DenseForward(std::span<const double> in, std::span<const double> w,
                  std::span<const double> bias, std::span<double> out,
                  int batch, int in_dim, int out_dim);

// Accumulates gw += grad_out^T in and gb += column sums of grad_out; writes
// grad_in = grad_out w when grad_in is non-empty.
void DenseBackward(std::span<const double> in, std::span<const double> w,
                   std::span<const double> grad_out, std::span<double> gw,
                   std::span<double> gb, std::span<double> grad_in, int batch,
                   int in_dim, int out_dim);

// Expected leakage (bits) and distortion of a release kernel
// a[x][x'][y] (n^3, row-major) when the previous cell has law `belief`,
// moves by `transition` (n x n, row = from) and distortion is `dist` (n x n).
LeakageDistortion KernelMoments(std::span<const double> belief,
                                std::span<const double> kernel,
                                std::span<const double> transition,
                                std::span<const double> dist, int n);

// Unnormalized posterior weights w(x) = sum_x' q(x|x') a[x][x'][y] b(x').
void PosteriorWeights(std::span<const double> belief,
                      std::span<const double> kernel,
                      std::span<const double> transition, int y, int n,
                      std::span<double> out);

// One Blahut-Arimoto tilt for every conditioning row c:
// kernel[c][x][y] proportional to marginal[c][y] * exp(-beta * dist[x][y]).
// Rows whose tilt vanishes everywhere fall back to the identity row.
void TiltKernel(std::span<const double> marginal, std::span<const double> dist,
                double beta, int conditions, int n, std::span<double> kernel);

namespace reference {

void DenseForward(std::span<const double> in, std::span<const double> w,
                  std::span<const double> bias, std::span<double> out,
                  int batch, int in_dim, int out_dim);
void DenseBackward(std::span<const double> in, std::span<const double> w,
                   std::span<const double> grad_out, std::span<double> gw,
                   std::span<double> gb, std::span<double> grad_in, int batch,
                   int in_dim, int out_dim);
LeakageDistortion KernelMoments(std::span<const double> belief,
                                std::span<const double> kernel,
                                std::span<const double> transition,
                                std::span<const double> dist, int n);
void PosteriorWeights(std::span<const double> belief,
                      std::span<const double> kernel,
                      std::span<const double> transition, int y, int n,
                      std::span<double> out);
void TiltKernel(std::span<const double> marginal, std::span<const double> dist,
                double beta, int conditions, int n, std::span<double> kernel);

}  // namespace reference
}  // namespace locpriv::kernels

#endif  // LOCPRIV_KERNELS_H_
