//
// Copyright 2026 The mahadp Authors
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
//
#include "mahadp/privstats.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "json.hpp"
#include "mahadp/error.h"
#include "mahadp/parallel.h"
#include "mahadp/rng.h"

namespace mahadp {
namespace {

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Keeps the first occurrence of each value.
std::vector<double> Dedupe(const std::vector<double>& values, std::string_view name,
                           std::vector<std::string>* warnings) {
  std::vector<double> out;
  for (double v : values) {
    if (std::find(out.begin(), out.end(), v) != out.end()) {
      if (warnings != nullptr) {
        warnings->push_back("duplicate " + std::string(name) + " grid value " + Num(v) +
                            " collapsed");
      }
      continue;
    }
    out.push_back(v);
  }
  return out;
}

nlohmann::ordered_json SummaryJson(const StatSummary& s) {
  return {{"mean", s.mean}, {"std", s.std},   {"ci_low", s.ci_low}, {"ci_high", s.ci_high},
          {"p5", s.p5},     {"p50", s.p50}, {"p95", s.p95}};
}

StatSummary SummaryFromJson(const nlohmann::json& j) {
  StatSummary s;
  s.mean = j.at("mean").get<double>();
  s.std = j.at("std").get<double>();
  s.ci_low = j.at("ci_low").get<double>();
  s.ci_high = j.at("ci_high").get<double>();
  s.p5 = j.at("p5").get<double>();
  s.p50 = j.at("p50").get<double>();
  s.p95 = j.at("p95").get<double>();
  return s;
}

}  // namespace

double Percentile(std::vector<double> values, double q) {
  if (values.empty()) throw UsageError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

StatSummary Summarize(const std::vector<int>& values, int repetitions) {
  StatSummary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (int v : values) sum += v;
  s.mean = sum / n;
  double ss = 0.0;
  for (int v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const double half = 1.96 * s.std / std::sqrt(static_cast<double>(repetitions));
  s.ci_low = s.mean - half;
  s.ci_high = s.mean + half;
  const std::vector<double> as_double(values.begin(), values.end());
  s.p5 = Percentile(as_double, 5.0);
  s.p50 = Percentile(as_double, 50.0);
  s.p95 = Percentile(as_double, 95.0);
  return s;
}

const PrivacyCell* PrivacyStatsReport::Find(double epsilon, double lambda) const {
  for (const PrivacyCell& cell : cells) {
    if (cell.epsilon == epsilon && cell.lambda == lambda) return &cell;
  }
  return nullptr;
}

void CheckCountIdentities(const PrivacyCell& cell, int repetitions,
                          const std::vector<std::string>& words) {
  for (size_t i = 0; i < cell.n_w.size(); ++i) {
    const int n = cell.n_w[i];
    const int s = cell.s_w[i];
    const bool ok = n >= 0 && n <= repetitions && s >= 1 && s <= repetitions &&
                    (n != repetitions || s == 1) && s <= repetitions - n + 1;
    if (!ok) {
      throw DataError("count identity violated for word '" +
                      (i < words.size() ? words[i] : std::to_string(i)) +
                      "': n_w=" + std::to_string(n) + " s_w=" + std::to_string(s) +
                      " R=" + std::to_string(repetitions));
    }
  }
}

PrivacyStatsReport RunPrivacyExperiment(const MechanismFactory& factory,
                                        const std::vector<std::string>& words,
                                        const std::vector<double>& epsilons,
                                        const std::vector<double>& lambdas,
                                        int repetitions, uint64_t seed,
                                        const ExperimentOptions& options) {
  if (words.empty()) throw UsageError("privacy experiment needs at least one word");
  if (repetitions < 1) throw UsageError("repetitions must be >= 1");

  PrivacyStatsReport report;
  report.epsilons = Dedupe(epsilons, "epsilon", options.warnings);
  report.lambdas = Dedupe(lambdas, "lambda", options.warnings);
  report.repetitions = repetitions;
  report.seed = seed;
  report.words = words;

  const auto reps = static_cast<size_t>(repetitions);
  for (size_t ei = 0; ei < report.epsilons.size(); ++ei) {
    for (size_t li = 0; li < report.lambdas.size(); ++li) {
      const Mechanism mech = factory(report.epsilons[ei], report.lambdas[li]);
      std::vector<size_t> ids(words.size());
      for (size_t w = 0; w < words.size(); ++w) {
        const auto id = mech.store().Find(words[w]);
        if (!id) throw UsageError("word '" + words[w] + "' is not in the vocabulary");
        ids[w] = *id;
      }

      PrivacyCell cell;
      cell.epsilon = report.epsilons[ei];
      cell.lambda = report.lambdas[li];
      cell.n_w.assign(words.size(), 0);
      cell.s_w.assign(words.size(), 0);
      ParallelFor(words.size(), options.threads, [&](size_t w) {
        std::vector<uint64_t> streams(reps);
        for (size_t r = 0; r < reps; ++r) {
          streams[r] = DeriveStreamKey({seed, ei, li, ids[w], r});
        }
        std::vector<size_t> outputs(reps);
        mech.PerturbIdBatch(ids[w], streams, outputs);
        cell.n_w[w] = static_cast<int>(std::count(outputs.begin(), outputs.end(), ids[w]));
        std::sort(outputs.begin(), outputs.end());
        cell.s_w[w] = static_cast<int>(
            std::unique(outputs.begin(), outputs.end()) - outputs.begin());
      });
      CheckCountIdentities(cell, repetitions, words);
      cell.n_summary = Summarize(cell.n_w, repetitions);
      cell.s_summary = Summarize(cell.s_w, repetitions);
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

std::string_view ToString(Verdict verdict) {
  switch (verdict) {
    case Verdict::kALower:
      return "a_lower";
    case Verdict::kBLower:
      return "b_lower";
    case Verdict::kOverlapping:
      return "overlapping";
  }
  return "unknown";
}

Verdict CompareIntervals(const StatSummary& a, const StatSummary& b) {
  if (a.ci_high < b.ci_low) return Verdict::kALower;
  if (b.ci_high < a.ci_low) return Verdict::kBLower;
  return Verdict::kOverlapping;
}

MechanismComparison CompareMechanisms(const PrivacyStatsReport& report,
                                      double epsilon, double lambda_a,
                                      double lambda_b) {
  const PrivacyCell* a = report.Find(epsilon, lambda_a);
  const PrivacyCell* b = report.Find(epsilon, lambda_b);
  if (a == nullptr || b == nullptr) {
    throw UsageError("report has no cell for epsilon=" + Num(epsilon) + " lambda=" +
                     Num(a == nullptr ? lambda_a : lambda_b));
  }
  MechanismComparison c;
  c.epsilon = epsilon;
  c.lambda_a = lambda_a;
  c.lambda_b = lambda_b;
  c.n_w = CompareIntervals(a->n_summary, b->n_summary);
  c.s_w = CompareIntervals(a->s_summary, b->s_summary);
  return c;
}

void WriteSummaryCsv(const PrivacyStatsReport& report, std::ostream& out) {
  out << "epsilon,lambda,stat,mean,std,ci_low,ci_high,p5,p50,p95\n";
  for (const PrivacyCell& cell : report.cells) {
    for (const auto& [name, s] :
         {std::pair<const char*, const StatSummary&>{"N_w", cell.n_summary},
          std::pair<const char*, const StatSummary&>{"S_w", cell.s_summary}}) {
      out << Num(cell.epsilon) << ',' << Num(cell.lambda) << ',' << name << ','
          << Num(s.mean) << ',' << Num(s.std) << ',' << Num(s.ci_low) << ','
          << Num(s.ci_high) << ',' << Num(s.p5) << ',' << Num(s.p50) << ','
          << Num(s.p95) << '\n';
    }
  }
}

void WriteRawCountsCsv(const PrivacyStatsReport& report, std::ostream& out) {
  out << "epsilon,lambda,word,n_w,s_w\n";
  for (const PrivacyCell& cell : report.cells) {
    for (size_t w = 0; w < report.words.size(); ++w) {
      out << Num(cell.epsilon) << ',' << Num(cell.lambda) << ',' << report.words[w]
          << ',' << cell.n_w[w] << ',' << cell.s_w[w] << '\n';
    }
  }
}

void WriteComparisonsCsv(const PrivacyStatsReport& report, double baseline_lambda,
                         std::ostream& out) {
  out << "epsilon,lambda_baseline,lambda,stat,verdict\n";
  for (double eps : report.epsilons) {
    if (report.Find(eps, baseline_lambda) == nullptr) continue;
    for (double lam : report.lambdas) {
      if (lam == baseline_lambda) continue;
      const MechanismComparison c = CompareMechanisms(report, eps, baseline_lambda, lam);
      out << Num(eps) << ',' << Num(baseline_lambda) << ',' << Num(lam) << ",N_w,"
          << ToString(c.n_w) << '\n';
      out << Num(eps) << ',' << Num(baseline_lambda) << ',' << Num(lam) << ",S_w,"
          << ToString(c.s_w) << '\n';
    }
  }
}

std::string ReportToJson(const PrivacyStatsReport& report) {
  nlohmann::ordered_json j;
  j["schema"] = std::string(kPrivacyReportSchema);
  j["s_w_definition"] = "distinct outputs over R repetitions";
  j["epsilons"] = report.epsilons;
  j["lambdas"] = report.lambdas;
  j["repetitions"] = report.repetitions;
  j["seed"] = report.seed;
  j["words"] = report.words;
  auto cells = nlohmann::ordered_json::array();
  for (const PrivacyCell& cell : report.cells) {
    nlohmann::ordered_json c;
    c["epsilon"] = cell.epsilon;
    c["lambda"] = cell.lambda;
    c["N_w"] = SummaryJson(cell.n_summary);
    c["S_w"] = SummaryJson(cell.s_summary);
    c["n_w"] = cell.n_w;
    c["s_w"] = cell.s_w;
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  return j.dump(1);
}

PrivacyStatsReport ReportFromJson(std::string_view json) {
  try {
    const auto j = nlohmann::json::parse(json);
    if (j.at("schema").get<std::string>() != kPrivacyReportSchema) {
      throw DataError("unsupported privacy report schema");
    }
    PrivacyStatsReport r;
    r.epsilons = j.at("epsilons").get<std::vector<double>>();
    r.lambdas = j.at("lambdas").get<std::vector<double>>();
    r.repetitions = j.at("repetitions").get<int>();
    r.seed = j.at("seed").get<uint64_t>();
    r.words = j.at("words").get<std::vector<std::string>>();
    for (const auto& c : j.at("cells")) {
      PrivacyCell cell;
      cell.epsilon = c.at("epsilon").get<double>();
      cell.lambda = c.at("lambda").get<double>();
      cell.n_summary = SummaryFromJson(c.at("N_w"));
      cell.s_summary = SummaryFromJson(c.at("S_w"));
      cell.n_w = c.at("n_w").get<std::vector<int>>();
      cell.s_w = c.at("s_w").get<std::vector<int>>();
      r.cells.push_back(std::move(cell));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed privacy report: " + std::string(e.what()));
  }
}

std::string AuditReport::ToJson() const {
  auto finite_or_null = [](double v) -> nlohmann::json {
    if (!std::isfinite(v)) return nullptr;
    return v;
  };
  nlohmann::ordered_json j;
  j["epsilon"] = epsilon;
  j["lambda"] = lambda;
  j["trials"] = trials;
  j["cells_tested"] = cells_tested;
  j["cells_excluded"] = cells_excluded;
  j["max_excess"] = finite_or_null(max_excess);
  j["max_z"] = finite_or_null(max_z);
  j["passed"] = passed();
  auto v = nlohmann::ordered_json::array();
  for (const AuditViolation& a : violations) {
    v.push_back({{"word", a.word},
                 {"other", a.other},
                 {"output", a.output},
                 {"log_ratio", a.log_ratio},
                 {"bound", a.bound},
                 {"std_error", a.std_error},
                 {"excess", a.excess}});
  }
  j["violations"] = std::move(v);
  return j.dump(2);
}

AuditReport AuditDpRatio(const Mechanism& mech, uint64_t trials,
                         const AuditOptions& options) {
  const EmbeddingStore& store = mech.store();
  if (store.size() > kAuditMaxVocab) {
    throw UsageError("audit vocabulary too large: " + std::to_string(store.size()) +
                     " > " + std::to_string(kAuditMaxVocab));
  }
  if (store.dim() > kAuditMaxDim) {
    throw UsageError("audit dimension too large: " + std::to_string(store.dim()) +
                     " > " + std::to_string(kAuditMaxDim));
  }
  if (trials < kAuditMinTrials) {
    throw UsageError("audit needs at least " + std::to_string(kAuditMinTrials) +
                     " trials per word");
  }

  const size_t n = store.size();
  AuditReport report;
  report.epsilon = mech.config().epsilon;
  report.lambda = mech.config().lambda;
  report.trials = trials;
  report.counts.assign(n, std::vector<uint64_t>(n, 0));

  constexpr uint64_t kChunk = 8192;
  ParallelFor(n, options.threads, [&](size_t w) {
    std::vector<uint64_t> streams;
    std::vector<size_t> outputs;
    for (uint64_t t0 = 0; t0 < trials; t0 += kChunk) {
      const uint64_t len = std::min(kChunk, trials - t0);
      streams.resize(len);
      outputs.resize(len);
      for (uint64_t t = 0; t < len; ++t) {
        streams[t] = DeriveStreamKey({options.seed, w, t0 + t});
      }
      mech.PerturbIdBatch(w, streams, outputs);
      for (size_t o : outputs) ++report.counts[w][o];
    }
  });

  const double total = static_cast<double>(trials);
  report.max_excess = -std::numeric_limits<double>::infinity();
  report.max_z = -std::numeric_limits<double>::infinity();
  for (size_t w = 0; w < n; ++w) {
    for (size_t v = 0; v < n; ++v) {
      if (v == w) continue;
      const Eigen::VectorXd diff = (store.row(w) - store.row(v)).transpose();
      const double bound = report.epsilon * mech.metric().Norm(diff);
      for (size_t o = 0; o < n; ++o) {
        const uint64_t hw = report.counts[w][o];
        const uint64_t hv = report.counts[v][o];
        if (hw < options.min_hits || hv < options.min_hits) {
          ++report.cells_excluded;
          continue;
        }
        ++report.cells_tested;
        const double a = static_cast<double>(hw);
        const double b = static_cast<double>(hv);
        const double log_ratio = std::log(a / b);
        const double se = std::sqrt(std::max(0.0, 1.0 / a - 1.0 / total) +
                                     std::max(0.0, 1.0 / b - 1.0 / total));
        const double excess = log_ratio - bound;
        report.max_excess = std::max(report.max_excess, excess);
        if (se > 0.0) report.max_z = std::max(report.max_z, excess / se);
        if (excess > options.se_threshold * se) {
          report.violations.push_back({w, v, o, log_ratio, bound, se, excess});
        }
      }
    }
  }
  return report;
}

}  // namespace mahadp
