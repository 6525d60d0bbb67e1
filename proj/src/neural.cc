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

#include "locpriv/neural.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "json.hpp"
#include "locpriv/errors.h"
#include "locpriv/kernels.h"

namespace locpriv {
namespace {

constexpr char kCheckpointVersion[] = "locpriv-ckpt-1";

double LeakyRelu(double z) { return z > 0.0 ? z : kLeakySlope * z; }
double LeakyReluGrad(double z) { return z > 0.0 ? 1.0 : kLeakySlope; }

// Uniform on the open interval (0, 1).
double UniformOpen01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

MlpParams MlpParams::Create(std::span<const int> dims, Rng& rng,
                            double output_scale) {
  if (dims.size() < 2) throw ShapeError("network needs at least two sizes");
  MlpParams p;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    if (dims[l] < 1 || dims[l + 1] < 1) throw ShapeError("layer size < 1");
    DenseLayer layer;
    layer.in = dims[l];
    layer.out = dims[l + 1];
    const double bound =
        std::sqrt(6.0 / ((1.0 + kLeakySlope * kLeakySlope) * layer.in));
    const double scale = l + 2 == dims.size() ? output_scale : 1.0;
    std::uniform_real_distribution<double> u(-bound, bound);
    layer.weights.resize(static_cast<size_t>(layer.in) * layer.out);
    for (double& w : layer.weights) w = scale * u(rng);
    layer.bias.assign(layer.out, 0.0);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

MlpParams MlpParams::ZerosLike(const MlpParams& p) {
  MlpParams z;
  for (const auto& l : p.layers) {
    DenseLayer layer;
    layer.in = l.in;
    layer.out = l.out;
    layer.weights.assign(l.weights.size(), 0.0);
    layer.bias.assign(l.bias.size(), 0.0);
    z.layers.push_back(std::move(layer));
  }
  return z;
}

size_t MlpParams::ParameterCount() const {
  size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

void MlpForward(const MlpParams& p, std::span<const double> input, int batch,
                MlpCache& c) {
  if (p.layers.empty()) throw ShapeError("empty network");
  if (batch < 1 ||
      input.size() != static_cast<size_t>(batch) * p.input_dim()) {
    throw ShapeError("input has " + std::to_string(input.size()) +
                     " values, expected " +
                     std::to_string(static_cast<size_t>(batch) * p.input_dim()));
  }
  c.batch = batch;
  c.version = p.version;
  c.dims.assign(1, p.input_dim());
  for (const auto& l : p.layers) c.dims.push_back(l.out);

  const size_t depth = p.layers.size();
  c.inputs.resize(depth);
  c.pre.resize(depth - 1);
  c.inputs[0].assign(input.begin(), input.end());
  for (size_t l = 0; l < depth; ++l) {
    const auto& layer = p.layers[l];
    std::vector<double>& z = l + 1 == depth ? c.output : c.pre[l];
    z.resize(static_cast<size_t>(batch) * layer.out);
    kernels::DenseForward(c.inputs[l], layer.weights, layer.bias, z, batch,
                          layer.in, layer.out);
    if (l + 1 < depth) {
      std::vector<double>& act = c.inputs[l + 1];
      act.resize(z.size());
      std::transform(z.begin(), z.end(), act.begin(), LeakyRelu);
    }
  }
}

MlpCache MlpForward(const MlpParams& p, std::span<const double> input,
                    int batch) {
  MlpCache c;
  MlpForward(p, input, batch, c);
  return c;
}

void MlpBackward(const MlpParams& p, const MlpCache& cache,
                 std::span<const double> output_gradient, MlpParams& g) {
  std::vector<int> dims{p.input_dim()};
  for (const auto& l : p.layers) dims.push_back(l.out);
  if (cache.version != p.version || cache.dims != dims) {
    throw UsageError("forward cache does not belong to these parameters");
  }
  if (output_gradient.size() != static_cast<size_t>(cache.batch) * p.output_dim()) {
    throw ShapeError("output gradient has the wrong size");
  }
  g.layers.resize(p.layers.size());
  for (size_t l = 0; l < p.layers.size(); ++l) {
    g.layers[l].in = p.layers[l].in;
    g.layers[l].out = p.layers[l].out;
    g.layers[l].weights.assign(p.layers[l].weights.size(), 0.0);
    g.layers[l].bias.assign(p.layers[l].bias.size(), 0.0);
  }
  thread_local std::vector<double> grad, grad_in;
  grad.assign(output_gradient.begin(), output_gradient.end());
  for (size_t l = p.layers.size(); l-- > 0;) {
    const auto& layer = p.layers[l];
    if (l > 0) grad_in.assign(static_cast<size_t>(cache.batch) * layer.in, 0.0);
    kernels::DenseBackward(cache.inputs[l], layer.weights, grad,
                           g.layers[l].weights, g.layers[l].bias,
                           l > 0 ? std::span<double>(grad_in) : std::span<double>(),
                           cache.batch, layer.in, layer.out);
    if (l > 0) {
      const auto& z = cache.pre[l - 1];
      for (size_t i = 0; i < grad_in.size(); ++i) grad_in[i] *= LeakyReluGrad(z[i]);
      grad.swap(grad_in);
    }
  }
}

MlpParams MlpBackward(const MlpParams& p, const MlpCache& cache,
                      std::span<const double> output_gradient) {
  MlpParams g;
  MlpBackward(p, cache, output_gradient, g);
  return g;
}

AdamState AdamState::For(const MlpParams& p, const AdamConfig& config) {
  AdamState s;
  s.config = config;
  s.m = MlpParams::ZerosLike(p);
  s.v = MlpParams::ZerosLike(p);
  return s;
}

void AdamUpdate(MlpParams& p, const MlpParams& grad, AdamState& state) {
  if (grad.layers.size() != p.layers.size() ||
      state.m.layers.size() != p.layers.size()) {
    throw ShapeError("gradient or optimizer state does not match parameters");
  }
  for (size_t l = 0; l < p.layers.size(); ++l) {
    if (grad.layers[l].weights.size() != p.layers[l].weights.size() ||
        grad.layers[l].bias.size() != p.layers[l].bias.size() ||
        state.m.layers[l].weights.size() != p.layers[l].weights.size()) {
      throw ShapeError("gradient or optimizer state does not match parameters");
    }
  }
  bool finite = true;
  grad.ForEach([&](double g) { finite = finite && std::isfinite(g); });
  if (!finite) throw NumericError("non-finite gradient rejected by Adam");

  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  auto update = [&](std::vector<double>& w, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    for (size_t i = 0; i < w.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  };
  for (size_t l = 0; l < p.layers.size(); ++l) {
    update(p.layers[l].weights, grad.layers[l].weights,
           state.m.layers[l].weights, state.v.layers[l].weights);
    update(p.layers[l].bias, grad.layers[l].bias, state.m.layers[l].bias,
           state.v.layers[l].bias);
  }
  ++p.version;
}

double LogGamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log-gamma needs a positive finite argument");
  }
  if (x < 0.5) return LogGamma(x + 1.0) - std::log(x);
  static constexpr double kCoef[] = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double kG = 7.0;
  const double z = x - 1.0;
  double a = kCoef[0];
  for (int i = 1; i < 9; ++i) a += kCoef[i] / (z + i);
  const double t = z + kG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t +
         std::log(a);
}

double Digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("digamma needs a positive finite argument");
  }
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 - inv2 * (1.0 / 132)))));
  return acc + std::log(x) - 0.5 * inv - series;
}

double Softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

DirichletParams::DirichletParams(std::vector<double> concentrations)
    : xi(std::move(concentrations)) {
  if (xi.empty()) throw ShapeError("empty Dirichlet concentration vector");
  for (double v : xi) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError("Dirichlet concentrations must be positive and finite");
    }
  }
}

double DirichletParams::Total() const {
  double s = 0.0;
  for (double v : xi) s += v;
  return s;
}

double LogGammaVariate(double shape, Rng& rng) {
  if (!(shape > 0.0)) throw DomainError("gamma shape must be positive");
  if (shape < 1.0) {
    return LogGammaVariate(shape + 1.0, rng) + std::log(UniformOpen01(rng)) / shape;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  std::normal_distribution<double> normal;
  for (;;) {
    const double x = normal(rng);
    const double v0 = 1.0 + c * x;
    if (v0 <= 0.0) continue;
    const double v = v0 * v0 * v0;
    const double u = UniformOpen01(rng);
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
      return std::log(d) + std::log(v);
    }
  }
}

std::vector<double> DirichletSample(const DirichletParams& d, Rng& rng) {
  const size_t k = d.xi.size();
  std::vector<double> out(k);
  double top = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < k; ++i) {
    out[i] = LogGammaVariate(d.xi[i], rng);
    top = std::max(top, out[i]);
  }
  double z = 0.0;
  for (double& v : out) {
    v = std::exp(v - top);
    z += v;
  }
  for (double& v : out) v /= z;
  return out;
}

DirichletLogDensityResult DirichletLogDensity(std::span<const double> x,
                                              const DirichletParams& d) {
  if (x.size() != d.xi.size()) throw ShapeError("point and concentrations differ in size");
  double sum = 0.0;
  for (double v : x) {
    if (!(v > 0.0) || !(v < 1.0 + 1e-12)) {
      throw DomainError("Dirichlet density needs a point strictly inside the simplex");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DomainError("point is not on the simplex");
  const double total = d.Total();
  const double psi_total = Digamma(total);
  DirichletLogDensityResult r;
  r.log_density = LogGamma(total);
  r.grad_xi.resize(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    r.log_density += (d.xi[i] - 1.0) * lx - LogGamma(d.xi[i]);
    r.grad_xi[i] = psi_total - Digamma(d.xi[i]) + lx;
  }
  return r;
}

std::string MlpToJson(const MlpParams& p) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : p.layers) {
    layers.push_back({{"in", l.in}, {"out", l.out}, {"weights", l.weights},
                      {"bias", l.bias}});
  }
  nlohmann::json doc = {{"version", kCheckpointVersion}, {"layers", layers}};
  return doc.dump();
}

MlpParams MlpFromJson(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint JSON: ") + e.what());
  }
  if (doc.value("version", "") != kCheckpointVersion) {
    throw ConfigError("unsupported checkpoint version");
  }
  MlpParams p;
  for (const auto& jl : doc.at("layers")) {
    DenseLayer l;
    l.in = jl.at("in").get<int>();
    l.out = jl.at("out").get<int>();
    l.weights = jl.at("weights").get<std::vector<double>>();
    l.bias = jl.at("bias").get<std::vector<double>>();
    if (l.weights.size() != static_cast<size_t>(l.in) * l.out ||
        l.bias.size() != static_cast<size_t>(l.out)) {
      throw ShapeError("checkpoint layer arrays do not match their dimensions");
    }
    if (!p.layers.empty() && p.layers.back().out != l.in) {
      throw ShapeError("checkpoint layers do not chain");
    }
    p.layers.push_back(std::move(l));
  }
  if (p.layers.empty()) throw ShapeError("checkpoint has no layers");
  return p;
}

}  // namespace locpriv
