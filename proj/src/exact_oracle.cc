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

#include "locpriv/exact_oracle.h"

#include <algorithm>
#include <cmath>
#include <functional>

#include "json.hpp"
#include "locpriv/errors.h"

namespace locpriv {
namespace {

int64_t IntPow(int base, int exp) {
  int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

int64_t Pack(std::span<const int> digits, int base) {
  int64_t s = 0;
  for (int d : digits) s = s * base + d;
  return s;
}

void Unpack(int64_t seq, int base, std::span<int> out) {
  for (int i = static_cast<int>(out.size()) - 1; i >= 0; --i) {
    out[i] = static_cast<int>(seq % base);
    seq /= base;
  }
}

std::vector<double> DirichletOnes(int k, Rng& rng) {
  std::vector<double> v(k);
  double z = 0.0;
  for (double& x : v) {
    x = -std::log(1.0 - Uniform01(rng));
    z += x;
  }
  for (double& x : v) x /= z;
  return v;
}

// I(A; B | C) in bits for p laid out [a][c][b].
double ConditionalMi(const std::vector<double>& p, int64_t na, int64_t nc,
                     int64_t nb) {
  std::vector<double> pc(nc, 0.0), pac(na * nc, 0.0), pcb(nc * nb, 0.0);
  for (int64_t a = 0; a < na; ++a) {
    for (int64_t c = 0; c < nc; ++c) {
      for (int64_t b = 0; b < nb; ++b) {
        const double v = p[(a * nc + c) * nb + b];
        pc[c] += v;
        pac[a * nc + c] += v;
        pcb[c * nb + b] += v;
      }
    }
  }
  double mi = 0.0;
  for (int64_t a = 0; a < na; ++a) {
    for (int64_t c = 0; c < nc; ++c) {
      for (int64_t b = 0; b < nb; ++b) {
        const double v = p[(a * nc + c) * nb + b];
        if (v <= 0.0) continue;
        mi += v * std::log2(v * pc[c] / (pac[a * nc + c] * pcb[c * nb + b]));
      }
    }
  }
  return mi;
}

}  // namespace

ExplicitPolicy::ExplicitPolicy(Form form, int cells, int horizon,
                               std::vector<std::vector<double>> tables)
    : form_(form), cells_(cells), horizon_(horizon), tables_(std::move(tables)) {
  if (cells < 1 || horizon < 1) {
    throw ShapeError("policy needs at least one cell and one step");
  }
  if (static_cast<int>(tables_.size()) != horizon) {
    throw ShapeError("policy needs one table per step");
  }
  for (int t = 1; t <= horizon; ++t) {
    const auto& tab = tables_[t - 1];
    const int64_t conditions = ConditionCount(t);
    if (static_cast<int64_t>(tab.size()) != conditions * cells) {
      throw ShapeError("policy table " + std::to_string(t) + " has the wrong size");
    }
    for (int64_t c = 0; c < conditions; ++c) {
      double sum = 0.0;
      for (int y = 0; y < cells; ++y) {
        const double v = tab[c * cells + y];
        if (!(v >= 0.0) || !std::isfinite(v)) {
          throw DomainError("policy entry is negative or non-finite");
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        throw DomainError("policy slice does not sum to 1");
      }
    }
  }
}

int64_t ExplicitPolicy::ConditionCount(int t) const {
  const int64_t ys = IntPow(cells_, t - 1);
  return form_ == Form::kHistory ? IntPow(cells_, t) * ys
                                 : static_cast<int64_t>(cells_) * cells_ * ys;
}

namespace {

ExplicitPolicy RandomPolicy(ExplicitPolicy::Form form, int cells, int horizon,
                            Rng& rng) {
  std::vector<std::vector<double>> tables(horizon);
  for (int t = 1; t <= horizon; ++t) {
    const int64_t ys = IntPow(cells, t - 1);
    const int64_t conditions =
        form == ExplicitPolicy::Form::kHistory
            ? IntPow(cells, t) * ys
            : static_cast<int64_t>(cells) * cells * ys;
    auto& tab = tables[t - 1];
    tab.reserve(conditions * cells);
    for (int64_t c = 0; c < conditions; ++c) {
      auto row = DirichletOnes(cells, rng);
      FloorSimplex(row);
      tab.insert(tab.end(), row.begin(), row.end());
    }
  }
  return ExplicitPolicy(form, cells, horizon, std::move(tables));
}

ExplicitPolicy FromRow(int cells, int horizon,
                       const std::function<void(int, std::span<double>)>& fill) {
  // Simplified tables where the slice depends only on x_t.
  std::vector<std::vector<double>> tables(horizon);
  for (int t = 1; t <= horizon; ++t) {
    const int64_t ys = IntPow(cells, t - 1);
    auto& tab = tables[t - 1];
    tab.assign(static_cast<size_t>(cells) * cells * ys * cells, 0.0);
    for (int x = 0; x < cells; ++x) {
      for (int64_t rest = 0; rest < cells * ys; ++rest) {
        const int64_t c = x * cells * ys + rest;
        fill(x, std::span(tab.data() + c * cells, static_cast<size_t>(cells)));
      }
    }
  }
  return ExplicitPolicy(ExplicitPolicy::Form::kSimplified, cells, horizon,
                        std::move(tables));
}

}  // namespace

ExplicitPolicy ExplicitPolicy::RandomHistory(int cells, int horizon, Rng& rng) {
  return RandomPolicy(Form::kHistory, cells, horizon, rng);
}

ExplicitPolicy ExplicitPolicy::RandomSimplified(int cells, int horizon, Rng& rng) {
  return RandomPolicy(Form::kSimplified, cells, horizon, rng);
}

ExplicitPolicy ExplicitPolicy::Identity(int cells, int horizon) {
  return FromRow(cells, horizon, [](int x, std::span<double> row) { row[x] = 1.0; });
}

ExplicitPolicy ExplicitPolicy::Constant(std::span<const double> row, int horizon) {
  return FromRow(static_cast<int>(row.size()), horizon,
                 [row](int, std::span<double> out) {
                   std::copy(row.begin(), row.end(), out.begin());
                 });
}

double ExplicitPolicy::Prob(int t, std::span<const int> xs,
                            std::span<const int> ys, int y) const {
  if (t < 1 || t > horizon_ || static_cast<int>(xs.size()) != t ||
      static_cast<int>(ys.size()) != t - 1) {
    throw ShapeError("policy lookup with mismatched history lengths");
  }
  const int64_t y_index = Pack(ys, cells_);
  const int64_t y_count = IntPow(cells_, t - 1);
  int64_t c;
  if (form_ == Form::kHistory) {
    c = Pack(xs, cells_) * y_count + y_index;
  } else {
    const int x = xs[t - 1];
    const int x_prev = t == 1 ? xs[0] : xs[t - 2];
    c = (static_cast<int64_t>(x) * cells_ + x_prev) * y_count + y_index;
  }
  return tables_[t - 1][c * cells_ + y];
}

ReleaseKernel ExplicitPolicy::StepKernel(int t, std::span<const int> ys) const {
  if (form_ != Form::kSimplified) {
    throw UsageError("only simplified policies have a per-step kernel");
  }
  if (t < 1 || t > horizon_ || static_cast<int>(ys.size()) != t - 1) {
    throw ShapeError("step kernel lookup with mismatched history length");
  }
  const int n = cells_;
  std::vector<double> data(static_cast<size_t>(n) * n * n);
  std::vector<int> xs(t);
  for (int x = 0; x < n; ++x) {
    for (int xp = 0; xp < n; ++xp) {
      // Only the last two entries are read. At t = 1 the previous cell is the
      // current one, so rows with xp != x repeat the diagonal and are never
      // weighted by a belief update.
      std::fill(xs.begin(), xs.end(), x);
      if (t >= 2) xs[t - 2] = xp;
      for (int y = 0; y < n; ++y) {
        data[(static_cast<size_t>(x) * n + xp) * n + y] = Prob(t, xs, ys, y);
      }
    }
  }
  return ReleaseKernel(n, std::move(data));
}

JointLaw::JointLaw(int cells, int horizon, std::vector<double> p)
    : cells_(cells), horizon_(horizon), seq_(IntPow(cells, horizon)),
      p_(std::move(p)) {
  if (static_cast<int64_t>(p_.size()) != seq_ * seq_) {
    throw ShapeError("joint table has the wrong size");
  }
  double sum = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0)) throw DomainError("joint entry is negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw DomainError("joint does not sum to 1");
}

int JointLaw::Digit(int64_t seq, int t) const {
  return static_cast<int>((seq / IntPow(cells_, horizon_ - t)) % cells_);
}

JointLaw EnumerateJoint(const ExplicitPolicy& policy, const TransitionMatrix& q,
                        const InitialDistribution& p1) {
  const int k = policy.cells();
  const int n = policy.horizon();
  if (q.cell_count() != k || p1.cell_count() != k) {
    throw ShapeError("policy, chain and initial law disagree on the alphabet");
  }
  // Compare in floating point so huge alphabets cannot overflow the check.
  if (std::pow(static_cast<double>(k), 2.0 * n) >
      static_cast<double>(kMaxJointEntries)) {
    throw DomainError("joint table would exceed " +
                      std::to_string(kMaxJointEntries) + " entries");
  }
  const int64_t seq = IntPow(k, n);
  std::vector<double> p(static_cast<size_t>(seq * seq), 0.0);
  std::vector<int> xs(n), ys(n);
  for (int64_t xi = 0; xi < seq; ++xi) {
    Unpack(xi, k, xs);
    double px = p1[xs[0]];
    for (int t = 1; t < n && px > 0.0; ++t) px *= q(xs[t - 1], xs[t]);
    if (px <= 0.0) continue;
    for (int64_t yi = 0; yi < seq; ++yi) {
      Unpack(yi, k, ys);
      double v = px;
      for (int t = 1; t <= n && v > 0.0; ++t) {
        v *= policy.Prob(t, std::span<const int>(xs.data(), t),
                         std::span<const int>(ys.data(), t - 1), ys[t - 1]);
      }
      p[xi * seq + yi] = v;
    }
  }
  return JointLaw(k, n, std::move(p));
}

double MutualInformationFull(const JointLaw& j) {
  const int64_t s = j.sequence_count();
  std::vector<double> px(s, 0.0), py(s, 0.0);
  for (int64_t xi = 0; xi < s; ++xi) {
    for (int64_t yi = 0; yi < s; ++yi) {
      px[xi] += j(xi, yi);
      py[yi] += j(xi, yi);
    }
  }
  double mi = 0.0;
  for (int64_t xi = 0; xi < s; ++xi) {
    for (int64_t yi = 0; yi < s; ++yi) {
      const double v = j(xi, yi);
      if (v > 0.0) mi += v * std::log2(v / (px[xi] * py[yi]));
    }
  }
  return mi;
}

std::vector<double> StepMarginal(const JointLaw& j, int t) {
  const int k = j.cells();
  const int n = j.horizon();
  if (t < 1 || t > n) throw DomainError("step out of range");
  const int64_t s = j.sequence_count();
  const int64_t tail = IntPow(k, n - t);
  const int64_t prefixes = IntPow(k, t);
  std::vector<double> m(static_cast<size_t>(k) * k * prefixes, 0.0);
  for (int64_t xi = 0; xi < s; ++xi) {
    const int x = j.Digit(xi, t);
    const int xp = t == 1 ? x : j.Digit(xi, t - 1);
    double* slot = m.data() + (static_cast<int64_t>(x) * k + xp) * prefixes;
    for (int64_t yi = 0; yi < s; ++yi) slot[yi / tail] += j(xi, yi);
  }
  return m;
}

std::vector<double> DecomposedLeakageTerms(const JointLaw& j) {
  const int k = j.cells();
  std::vector<double> terms;
  for (int t = 1; t <= j.horizon(); ++t) {
    terms.push_back(ConditionalMi(StepMarginal(j, t),
                                  static_cast<int64_t>(k) * k,
                                  IntPow(k, t - 1), k));
  }
  return terms;
}

double DecomposedLeakage(const JointLaw& j) {
  double sum = 0.0;
  for (double v : DecomposedLeakageTerms(j)) sum += v;
  return sum;
}

double ChainRuleLeakage(const JointLaw& j) {
  const int k = j.cells();
  const int n = j.horizon();
  const int64_t s = j.sequence_count();
  double sum = 0.0;
  for (int t = 1; t <= n; ++t) {
    const int64_t tail = IntPow(k, n - t);
    const int64_t prefixes = IntPow(k, t);
    std::vector<double> m(static_cast<size_t>(prefixes * prefixes), 0.0);
    for (int64_t xi = 0; xi < s; ++xi) {
      for (int64_t yi = 0; yi < s; ++yi) {
        m[(xi / tail) * prefixes + yi / tail] += j(xi, yi);
      }
    }
    sum += ConditionalMi(m, prefixes, prefixes / k, k);
  }
  return sum;
}

std::vector<double> Posterior(const JointLaw& j, std::span<const int> y_prefix) {
  const int k = j.cells();
  const int n = j.horizon();
  const int t = static_cast<int>(y_prefix.size());
  if (t < 1 || t > n) throw DomainError("prefix length out of range");
  for (int y : y_prefix) {
    if (y < 0 || y >= k) throw DomainError("prefix entry out of range");
  }
  const int64_t tail = IntPow(k, n - t);
  const int64_t want = Pack(y_prefix, k);
  const int64_t s = j.sequence_count();
  std::vector<double> post(k, 0.0);
  double total = 0.0;
  for (int64_t xi = 0; xi < s; ++xi) {
    const int x = j.Digit(xi, t);
    for (int64_t yi = want * tail; yi < (want + 1) * tail; ++yi) {
      post[x] += j(xi, yi);
      total += j(xi, yi);
    }
  }
  if (!(total > 0.0)) throw DomainError("observation prefix has probability 0");
  for (double& v : post) v /= total;
  return post;
}

ExplicitPolicy SimplifiedFromJoint(const JointLaw& j) {
  const int k = j.cells();
  std::vector<std::vector<double>> tables;
  for (int t = 1; t <= j.horizon(); ++t) {
    // [x_t][x_{t-1}][y^{t-1}][y_t] is already the simplified table layout.
    std::vector<double> m = StepMarginal(j, t);
    for (size_t c = 0; c < m.size() / k; ++c) {
      double z = 0.0;
      for (int y = 0; y < k; ++y) z += m[c * k + y];
      for (int y = 0; y < k; ++y) {
        m[c * k + y] = z > 0.0 ? m[c * k + y] / z : 1.0 / k;
      }
    }
    tables.push_back(std::move(m));
  }
  return ExplicitPolicy(ExplicitPolicy::Form::kSimplified, k, j.horizon(),
                        std::move(tables));
}

TransitionMatrix RandomTransition(int cells, Rng& rng) {
  std::vector<double> p;
  p.reserve(static_cast<size_t>(cells) * cells);
  for (int i = 0; i < cells; ++i) {
    const auto row = DirichletOnes(cells, rng);
    p.insert(p.end(), row.begin(), row.end());
  }
  return TransitionMatrix(cells, std::move(p));
}

InitialDistribution RandomInitial(int cells, Rng& rng) {
  return InitialDistribution(DirichletOnes(cells, rng));
}

std::string JointToJson(const JointLaw& j) {
  const int n = j.horizon();
  nlohmann::json entries = nlohmann::json::array();
  for (int64_t xi = 0; xi < j.sequence_count(); ++xi) {
    for (int64_t yi = 0; yi < j.sequence_count(); ++yi) {
      if (j(xi, yi) <= 0.0) continue;
      std::vector<int> xs(n), ys(n);
      for (int t = 1; t <= n; ++t) {
        xs[t - 1] = j.Digit(xi, t) + 1;
        ys[t - 1] = j.Digit(yi, t) + 1;
      }
      entries.push_back({{"x", xs}, {"y", ys}, {"p", j(xi, yi)}});
    }
  }
  nlohmann::json doc = {{"cells", j.cells()}, {"horizon", n}, {"entries", entries}};
  return doc.dump();
}

}  // namespace locpriv
