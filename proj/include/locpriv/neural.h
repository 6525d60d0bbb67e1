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

#ifndef LOCPRIV_NEURAL_H_
#define LOCPRIV_NEURAL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "locpriv/rng.h"

namespace locpriv {

inline constexpr double kLeakySlope = 0.01;

struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;     // out
};

// Fully connected network in -> h1 -> h2 -> out with leaky-ReLU on the hidden
// layers and a linear output. The same type holds gradients and Adam moments.
struct MlpParams {
  std::vector<DenseLayer> layers;
  // Bumped by every in-place update; forward caches remember it.
  uint64_t version = 0;

  // He-uniform weights for leaky-ReLU, zero biases. The output layer's
  // weights are additionally multiplied by `output_scale`.
  static MlpParams Create(std::span<const int> dims, Rng& rng,
                          double output_scale = 1.0);
  static MlpParams ZerosLike(const MlpParams& p);

  int input_dim() const { return layers.front().in; }
  int output_dim() const { return layers.back().out; }
  size_t ParameterCount() const;
  // Visits every scalar parameter in a fixed order.
  template <typename F>
  void ForEach(F&& f) {
    for (auto& l : layers) {
      for (double& w : l.weights) f(w);
      for (double& b : l.bias) f(b);
    }
  }
  template <typename F>
  void ForEach(F&& f) const {
    for (const auto& l : layers) {
      for (double w : l.weights) f(w);
      for (double b : l.bias) f(b);
    }
  }
};

// Activations kept by a forward pass for the matching backward pass.
struct MlpCache {
  int batch = 0;
  uint64_t version = 0;
  std::vector<int> dims;
  // inputs[l] is the input of layer l (batch x layers[l].in).
  std::vector<std::vector<double>> inputs;
  // pre[l] is the pre-activation of hidden layer l.
  std::vector<std::vector<double>> pre;
  std::vector<double> output;  // batch x out
};

// Forward pass on `batch` row-major input rows.
MlpCache MlpForward(const MlpParams& p, std::span<const double> input,
                    int batch = 1);
// Same, reusing the storage of `cache`.
void MlpForward(const MlpParams& p, std::span<const double> input, int batch,
                MlpCache& cache);

// Parameter gradients of sum_b <output_gradient[b], output[b]>.
MlpParams MlpBackward(const MlpParams& p, const MlpCache& cache,
                      std::span<const double> output_gradient);
// Same, overwriting `grad` and reusing its storage.
void MlpBackward(const MlpParams& p, const MlpCache& cache,
                 std::span<const double> output_gradient, MlpParams& grad);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  MlpParams m;
  MlpParams v;
  int64_t step = 0;

  static AdamState For(const MlpParams& p, const AdamConfig& config);
};

// One bias-corrected Adam step, in place. Throws NumericError (leaving
// everything untouched) when a gradient is not finite.
void AdamUpdate(MlpParams& p, const MlpParams& grad, AdamState& state);

// ln Gamma(x) for x > 0; Lanczos (g = 7, 9 terms) with the recurrence below
// 1/2. Absolute error below 1e-13 on [1e-3, 1e3].
double LogGamma(double x);
// psi(x) = d/dx ln Gamma(x), x > 0.
double Digamma(double x);

double Softplus(double z);
// d softplus / dz, the logistic function.
double Sigmoid(double z);

struct DirichletParams {
  std::vector<double> xi;  // all > 0 and finite

  explicit DirichletParams(std::vector<double> concentrations);
  double Total() const;
};

// log of a Gamma(shape, 1) variate (Marsaglia-Tsang; shapes below 1 use
// Gamma(shape + 1) * U^(1/shape)). Log scale keeps tiny shapes representable.
double LogGammaVariate(double shape, Rng& rng);

// Point of the simplex drawn from Dirichlet(xi).
std::vector<double> DirichletSample(const DirichletParams& d, Rng& rng);

struct DirichletLogDensityResult {
  double log_density = 0.0;
  std::vector<double> grad_xi;  // d log p / d xi_i
};

// log p(x | xi) and its gradient in xi. x must lie strictly inside the
// simplex.
DirichletLogDensityResult DirichletLogDensity(std::span<const double> x,
                                              const DirichletParams& d);

// Checkpoint JSON, version "locpriv-ckpt-1".
std::string MlpToJson(const MlpParams& p);
MlpParams MlpFromJson(const std::string& text);

}  // namespace locpriv

#endif  // LOCPRIV_NEURAL_H_
