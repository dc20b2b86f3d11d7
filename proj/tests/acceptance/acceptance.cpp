// Copyright 2026 The abcboost Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Acceptance gate: one PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "abcboost/boosting.hpp"
#include "abcboost/cli.hpp"
#include "abcboost/derivatives.hpp"
#include "abcboost/metrics.hpp"

namespace {

using namespace abcboost;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  const char* tag = o.skipped ? "SKIP" : o.pass ? "PASS" : "FAIL";
  if (!o.skipped && !o.pass) ++failures;
  std::printf("[%s] %2d %s: %s\n", tag, id, name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

std::string data_file(const std::string& name) { return std::string(ABCBOOST_DATA_DIR) + "/" + name; }

// Every abc-family run in this binary reports rows through here.
struct NormalizationAudit {
  std::size_t rounds = 0;
  double worst_score_sum = 0.0;
  double worst_prob_sum = 0.0;

  void observe(const TrainState& s) {
    ++rounds;
    for (std::size_t i = 0; i < s.scores.rows(); ++i) {
      double fs = 0.0, ps = 0.0;
      for (double f : s.scores.row(i)) fs += f;
      for (double p : s.probs.row(i)) ps += p;
      worst_score_sum = std::max(worst_score_sum, std::abs(fs));
      worst_prob_sum = std::max(worst_prob_sum, std::abs(ps - 1.0));
    }
  }
} audit;

RoundCallback audited(const TrainConfig& c, RoundCallback inner = {}) {
  const bool base_family = c.variant.uses_base();
  return [base_family, inner](const RoundRecord& r, const TrainState& s) {
    if (base_family && r.round > 0) audit.observe(s);
    if (inner) inner(r, s);
  };
}

TrainConfig make_config(Variant v, int J, double nu, int M, std::uint64_t seed = 0) {
  TrainConfig c;
  c.variant = v;
  c.leaves = J;
  c.shrinkage = nu;
  c.rounds = M;
  c.seed = seed;
  return c;
}

TrainResult run(const Dataset& train_set, const TrainConfig& c, const Dataset* test = nullptr) {
  return train(train_set, c, test, audited(c));
}

std::size_t best_errors(const TrainResult& r) { return cli::best_test_errors(r.history)->errors; }

// ---- 1: finite-difference oracle --------------------------------------------

using Ext = long double;

// -log softmax(F)_y with F_b pinned to minus the sum of the free scores.
Ext constrained_loss(std::vector<Ext> F, int b, int y) {
  Ext sum = 0;
  for (std::size_t k = 0; k < F.size(); ++k) {
    if (static_cast<int>(k) != b) sum += F[k];
  }
  F[static_cast<std::size_t>(b)] = -sum;
  Ext mx = F[0];
  for (Ext f : F) mx = std::max(mx, f);
  Ext z = 0;
  for (Ext f : F) z += std::exp(f - mx);
  return -(F[static_cast<std::size_t>(y)] - mx - std::log(z));
}

Outcome derivative_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20260101);
  std::normal_distribution<double> g(0.0, 1.5);
  double worst_first = 0.0, worst_second = 0.0;
  std::size_t checks = 0;
  for (int K : {3, 5, 10}) {
    const auto kk = static_cast<std::size_t>(K);
    Dataset d;
    d.features = RealMatrix(100, 1, 0.0);
    d.num_classes = K;
    for (int k = 0; k < K; ++k) d.class_names.push_back(std::to_string(k));
    RealMatrix F(100, kk), P(100, kk);
    std::uniform_int_distribution<int> label(0, K - 1);
    for (std::size_t i = 0; i < 100; ++i) {
      d.labels.push_back(label(rng));
      double sum = 0;
      for (std::size_t k = 0; k < kk; ++k) sum += (F(i, k) = g(rng));
      for (std::size_t k = 0; k < kk; ++k) F(i, k) -= sum / K;
      softmax_row(F.row(i), P.row(i));
    }
    IndicatorMatrix r(d);
    const Ext h1 = 1e-5L, h2 = 1e-4L;
    for (int b = 0; b < K; ++b) {
      for (int k = 0; k < K; ++k) {
        if (k == b) continue;
        const auto first = abc_pseudo_response(r, P, k, b);
        const auto second = abc_second_derivative(P, k, b);
        for (std::size_t i = 0; i < 100; ++i) {
          std::vector<Ext> row(F.row(i).begin(), F.row(i).end());
          auto at = [&](Ext delta) {
            auto G = row;
            G[static_cast<std::size_t>(k)] += delta;
            return constrained_loss(G, b, d.labels[i]);
          };
          const double fd1 = static_cast<double>(-(at(h1) - at(-h1)) / (2 * h1));
          const double fd2 = static_cast<double>((at(h2) - 2 * at(0) + at(-h2)) / (h2 * h2));
          worst_first = std::max(worst_first, std::abs(first[i] - fd1) / std::abs(fd1));
          worst_second = std::max(worst_second, std::abs(second[i] - fd2) / std::abs(fd2));
          ++checks;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst_first <= 1e-5 && worst_second <= 1e-4 && secs < 10.0;
  o.detail = fmt("%zu (state, b, k) checks over K in {3,5,10}; max rel err first %.2e (<= 1e-5), second %.2e "
                 "(<= 1e-4); %.2f s (< 10 s)",
                 checks, worst_first, worst_second, secs);
  return o;
}

// ---- 2: averaging identities -------------------------------------------------

Outcome averaging_identities() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick_k(3, 12);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  double worst_first = 0.0, worst_second = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    const int K = pick_k(rng);
    const auto kk = static_cast<std::size_t>(K);
    Dataset d;
    d.features = RealMatrix(1, 1, 0.0);
    d.num_classes = K;
    for (int k = 0; k < K; ++k) d.class_names.push_back(std::to_string(k));
    d.labels = {std::uniform_int_distribution<int>(0, K - 1)(rng)};
    RealMatrix P(1, kk);
    double total = 0;
    for (std::size_t k = 0; k < kk; ++k) total += (P(0, k) = gamma(rng));
    for (std::size_t k = 0; k < kk; ++k) P(0, k) /= total;
    IndicatorMatrix r(d);
    for (int k = 0; k < K; ++k) {
      double first = 0, second = 0, others = 0, others_sq = 0;
      for (int b = 0; b < K; ++b) {
        if (b == k) continue;
        first += abc_pseudo_response(r, P, k, b)[0];
        second += abc_second_derivative(P, k, b)[0];
        const double pb = P(0, static_cast<std::size_t>(b));
        others += pb;
        others_sq += pb * pb;
      }
      const double pk = P(0, static_cast<std::size_t>(k));
      worst_first = std::max(worst_first, std::abs(first - K * mart_pseudo_response(r, P, k)[0]));
      worst_second = std::max(worst_second, std::abs(second - ((K + 1) * (1 - pk) * pk + others - others_sq)));
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst_first <= 1e-12 && worst_second <= 1e-12 && secs < 5.0;
  o.detail = fmt("1000 draws; max |sum_b response - K(r_k - p_k)| = %.2e, max second-derivative residual %.2e "
                 "(both <= 1e-12); %.2f s (< 5 s)",
                 worst_first, worst_second, secs);
  return o;
}

// ---- 3: binary recovery ------------------------------------------------------

Outcome binary_recovery(const Dataset& pendigits) {
  const auto t0 = Clock::now();
  Dataset binary = select_classes(pendigits, {0, 1});
  std::vector<RealMatrix> mart_probs, abc_probs;
  TrainConfig mc = make_config(Variant::mart(), 6, 0.1, 200);
  TrainConfig ac = make_config(Variant::abc(), 6, 0.1, 200);
  TrainResult m = train(binary, mc, nullptr, audited(mc, [&](const RoundRecord&, const TrainState& s) {
                          mart_probs.push_back(s.probs);
                        }));
  TrainResult a = train(binary, ac, nullptr, audited(ac, [&](const RoundRecord&, const TrainState& s) {
                          abc_probs.push_back(s.probs);
                        }));
  double worst = 0.0;
  const std::size_t rounds = std::min(mart_probs.size(), abc_probs.size());
  for (std::size_t t = 1; t < rounds; ++t) {
    for (std::size_t i = 0; i < binary.size(); ++i) {
      worst = std::max(worst, std::abs(mart_probs[t](i, 0) - abc_probs[t](i, 0)));
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = m.model.round_count() == 200 && a.model.round_count() == 200 && worst <= 1e-8 && secs < 60.0;
  o.detail = fmt("digits {0,1}, N=%zu, J=6, nu=0.1, rounds mart/abc %zu/%zu (need 200); max |p_mart - p_abc| %.2e "
                 "(<= 1e-8); %.1f s (< 60 s)",
                 binary.size(), m.model.round_count(), a.model.round_count(), worst, secs);
  return o;
}

// ---- 5: significance statistics ------------------------------------------------

Outcome significance() {
  const auto t0 = Clock::now();
  const double p1 = binomial_pvalue(11133, 10203, 290506);
  const double p2 = binomial_pvalue(135, 111, 4000);
  const double r = relative_improvement(11133, 10203);
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = std::abs(p1 - 4.4e-11) <= 0.2e-11 && std::abs(p2 - 0.060) <= 0.002 && std::abs(r - 8.4) <= 0.1 &&
           secs < 1.0;
  o.detail = fmt("p(11133,10203,290506) = %.3e (4.4e-11 +- 0.2e-11), p(135,111,4000) = %.4f (0.060 +- 0.002), "
                 "R_err(11133,10203) = %.3f (8.4 +- 0.1); %.3f s (< 1 s)",
                 p1, p2, r, secs);
  return o;
}

// ---- 6, 7, 11: desk-scale reproductions ---------------------------------------

struct Pair {
  TrainResult mart;
  TrainResult abc;
  double seconds = 0.0;
};

Pair train_pair(const Dataset& tr, const Dataset& te, int J, double nu, int M, std::uint64_t seed) {
  const auto t0 = Clock::now();
  Pair p;
  p.mart = run(tr, make_config(Variant::mart(), J, nu, M, seed), &te);
  p.abc = run(tr, make_config(Variant::abc(), J, nu, M, seed), &te);
  p.seconds = seconds_since(t0);
  return p;
}

Outcome band_check(const Pair& p, std::size_t mart_lo, std::size_t mart_hi, std::size_t abc_lo, std::size_t abc_hi,
                   double min_rerr, double limit_s) {
  const std::size_t em = best_errors(p.mart), ea = best_errors(p.abc);
  const double rerr = relative_improvement(em, ea);
  Outcome o;
  o.pass = em >= mart_lo && em <= mart_hi && ea >= abc_lo && ea <= abc_hi && ea < em && rerr >= min_rerr &&
           p.seconds < limit_s;
  o.detail = fmt("best test errors MART %zu in [%zu, %zu]: %s, ABC %zu in [%zu, %zu]: %s, ABC < MART: %s, "
                 "R_err %.1f%%%s; rounds run %zu/%zu; %.0f s (< %.0f s)",
                 em, mart_lo, mart_hi, em >= mart_lo && em <= mart_hi ? "yes" : "no", ea, abc_lo, abc_hi,
                 ea >= abc_lo && ea <= abc_hi ? "yes" : "no", ea < em ? "yes" : "no", rerr,
                 min_rerr > 0 ? fmt(" (>= %.0f%%)", min_rerr).c_str() : "", p.mart.model.round_count(),
                 p.abc.model.round_count(), p.seconds, limit_s);
  return o;
}

bool same_run(const TrainResult& a, const TrainResult& b) {
  if (model_to_json(a.model).dump() != model_to_json(b.model).dump() || !(a.model == b.model)) return false;
  if (a.history.size() != b.history.size()) return false;
  for (std::size_t m = 0; m < a.history.size(); ++m) {
    const auto& x = a.history[m];
    const auto& y = b.history[m];
    if (std::memcmp(&x.train_loss, &y.train_loss, sizeof(double)) != 0 || x.base != y.base ||
        x.test_errors != y.test_errors || x.class_losses != y.class_losses) {
      return false;
    }
  }
  return true;
}

// ---- 8: ablation ---------------------------------------------------------------

Outcome ablation(const Dataset& tr, const Dataset& te) {
  const auto t0 = Clock::now();
  std::vector<std::pair<std::string, std::size_t>> best;
  for (Variant v : {Variant::abc(), Variant::mb(), Variant::fixed(1), Variant::fixed(7)}) {
    best.emplace_back(v.name(), best_errors(run(tr, make_config(v, 10, 0.1, 1000), &te)));
  }
  const double secs = seconds_since(t0);
  const std::size_t abc = best[0].second;
  Outcome o;
  o.pass = secs < 1800.0;
  std::string parts;
  for (std::size_t i = 1; i < best.size(); ++i) {
    o.pass = o.pass && abc <= best[i].second + 5;
    parts += fmt(", %s %zu", best[i].first.c_str(), best[i].second);
  }
  o.detail = fmt("J=10, nu=0.1, M=1000 best test errors: abc %zu%s; need abc <= each + 5; %.0f s (< 1800 s)", abc,
                 parts.c_str(), secs);
  return o;
}

// ---- 9: monotone early training --------------------------------------------------

Outcome monotone_start(const Pair& p) {
  Outcome o;
  o.pass = true;
  std::string where;
  for (const auto* r : {&p.mart, &p.abc}) {
    if (r->history.size() < 51) {
      o.pass = false;
      where += fmt(" %s ran only %zu rounds;", r->model.variant.name().c_str(), r->history.size() - 1);
      continue;
    }
    for (std::size_t m = 1; m <= 50; ++m) {
      if (!(r->history[m].train_loss < r->history[m - 1].train_loss)) {
        o.pass = false;
        where += fmt(" %s round %zu;", r->model.variant.name().c_str(), m);
      }
    }
  }
  o.detail = fmt("Pendigits J=10, nu=0.1: train loss %s over rounds 1..50 for mart (%.1f -> %.1f) and abc "
                 "(%.1f -> %.1f)%s",
                 o.pass ? "strictly decreasing" : "NOT strictly decreasing", p.mart.history[0].train_loss,
                 p.mart.history[std::min<std::size_t>(50, p.mart.history.size() - 1)].train_loss,
                 p.abc.history[0].train_loss,
                 p.abc.history[std::min<std::size_t>(50, p.abc.history.size() - 1)].train_loss, where.c_str());
  return o;
}

// ---- 10: covertype (optional) -----------------------------------------------------

Outcome covertype(const std::string& path, int label_col, std::uint64_t seed) {
  const auto t0 = Clock::now();
  Dataset all = load_dataset(path, DataFormat::kCsv, label_col);
  const double keep = 100000.0 / static_cast<double>(all.size());
  Dataset sample = train_test_split(all, keep, seed).first;
  auto [tr, te] = train_test_split(sample, 0.5, seed + 1);
  TrainResult m = run(tr, make_config(Variant::mart(), 20, 0.1, 1000), &te);
  TrainResult a = run(tr, make_config(Variant::abc(), 20, 0.1, 1000), &te);
  const std::size_t em = *m.history.back().test_errors, ea = *a.history.back().test_errors;
  Outcome o;
  o.pass = ea < em;
  o.detail = fmt("%zu/%zu split, J=20, nu=0.1, M=1000 test errors MART %zu, ABC %zu (need ABC < MART); %.0f s",
                 tr.size(), te.size(), em, ea, seconds_since(t0));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string covertype_path;
  int covertype_label = 54;
  std::uint64_t seed = 0;
  app.add_option("--covertype", covertype_path, "Covertype csv (runs the optional criterion 10)");
  app.add_option("--covertype-label-col", covertype_label, "Label column of the covertype csv");
  app.add_option("--seed", seed, "Seed for criteria 6 and 11");
  CLI11_PARSE(app, argc, argv);

  report(1, "derivative oracle", derivative_oracle());
  report(2, "averaging identities", averaging_identities());
  report(5, "significance statistics", significance());

  const bool have_pendigits = std::filesystem::exists(data_file("pendigits.train.csv")) &&
                              std::filesystem::exists(data_file("pendigits.test.csv"));
  const bool have_optdigits = std::filesystem::exists(data_file("optdigits.train.csv")) &&
                              std::filesystem::exists(data_file("optdigits.test.csv"));
  const Outcome missing{false, false, "dataset files missing; run tools/fetch_datasets.py"};

  std::optional<Pair> pendigits_pair;
  if (have_pendigits) {
    Dataset tr = load_dataset(data_file("pendigits.train.csv"));
    LabelMapping mapping = tr.mapping();
    LoadOptions opts;
    opts.mapping = &mapping;
    opts.dims = tr.dims();
    Dataset te = load_dataset(data_file("pendigits.test.csv"), opts);

    report(3, "binary recovery", binary_recovery(tr));
    pendigits_pair = train_pair(tr, te, 10, 0.1, 3000, seed);
    report(6, "pendigits desk reproduction", band_check(*pendigits_pair, 110, 160, 90, 135, 0.0, 900.0));
    report(8, "ablation dominance", ablation(tr, te));
    report(9, "monotone early training", monotone_start(*pendigits_pair));
    Pair again = train_pair(tr, te, 10, 0.1, 3000, seed);
    Outcome det;
    det.pass = same_run(pendigits_pair->mart, again.mart) && same_run(pendigits_pair->abc, again.abc);
    det.detail = fmt("two seeded runs of criterion 6: models and histories %s (mart %zu rounds, abc %zu rounds)",
                     det.pass ? "bit-identical" : "DIFFER", again.mart.model.round_count(),
                     again.abc.model.round_count());
    report(11, "determinism", det);
  } else {
    for (auto [id, name] : {std::pair{3, "binary recovery"}, {6, "pendigits desk reproduction"},
                            {8, "ablation dominance"}, {9, "monotone early training"}, {11, "determinism"}}) {
      report(id, name, missing);
    }
  }

  if (have_optdigits) {
    Dataset tr = load_dataset(data_file("optdigits.train.csv"));
    LabelMapping mapping = tr.mapping();
    LoadOptions opts;
    opts.mapping = &mapping;
    opts.dims = tr.dims();
    Dataset te = load_dataset(data_file("optdigits.test.csv"), opts);
    report(7, "optdigits desk reproduction", band_check(train_pair(tr, te, 4, 0.1, 3000, seed), 48, 75, 35, 60, 10.0,
                                                        600.0));
  } else {
    report(7, "optdigits desk reproduction", missing);
  }

  if (!covertype_path.empty()) {
    report(10, "covertype directional check", covertype(covertype_path, covertype_label, seed));
  } else {
    report(10, "covertype directional check",
           {false, true, "optional long-running criterion; pass --covertype <csv> to run"});
  }

  Outcome norm;
  norm.pass = audit.rounds > 0 && audit.worst_score_sum <= 1e-9 && audit.worst_prob_sum <= 1e-12;
  norm.detail = fmt("%zu abc-family rounds audited; max |row sum F| %.2e (<= 1e-9), max |row sum P - 1| %.2e "
                    "(<= 1e-12)",
                    audit.rounds, audit.worst_score_sum, audit.worst_prob_sum);
  report(4, "sum-to-zero and normalization", norm);

  std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
