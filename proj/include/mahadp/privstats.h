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
#ifndef MAHADP_PRIVSTATS_H_
#define MAHADP_PRIVSTATS_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mahadp/mechanism.h"

namespace mahadp {

inline constexpr std::string_view kPrivacyReportSchema = "mahadp-privstats v1";

// Builds the mechanism for one (epsilon, lambda) grid cell.
using MechanismFactory = std::function<Mechanism(double epsilon, double lambda)>;

// Mean, sample standard deviation, the 95% interval mean +- 1.96 std / sqrt(R)
// and linearly interpolated percentiles of one statistic over the word set.
struct StatSummary {
  double mean = 0.0;
  double std = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p5 = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;

  bool operator==(const StatSummary&) const = default;
};

StatSummary Summarize(const std::vector<int>& values, int repetitions);

// Linear interpolation between closest ranks on sorted data, q in [0, 100].
double Percentile(std::vector<double> values, double q);

struct PrivacyCell {
  double epsilon = 0.0;
  double lambda = 0.0;
  std::vector<int> n_w;  // times the word came back unchanged, 0..R
  std::vector<int> s_w;  // distinct outputs, 1..R
  StatSummary n_summary;
  StatSummary s_summary;

  bool operator==(const PrivacyCell&) const = default;
};

struct PrivacyStatsReport {
  std::vector<double> epsilons;
  std::vector<double> lambdas;
  int repetitions = 0;
  uint64_t seed = 0;
  std::vector<std::string> words;
  std::vector<PrivacyCell> cells;  // epsilon-major, lambda-minor

  const PrivacyCell* Find(double epsilon, double lambda) const;
  bool operator==(const PrivacyStatsReport&) const = default;
};

struct ExperimentOptions {
  int threads = 1;
  std::vector<std::string>* warnings = nullptr;
};

// For every (epsilon, lambda, word) runs the mechanism R times, repetition r
// on stream DeriveStreamKey({seed, epsilon_index, lambda_index, word_id, r}),
// and tallies N_w and S_w. Duplicate grid values are collapsed (with a
// warning). Throws UsageError on an empty word set, R < 1 or an unknown word;
// DataError if a count identity fails.
PrivacyStatsReport RunPrivacyExperiment(const MechanismFactory& factory,
                                        const std::vector<std::string>& words,
                                        const std::vector<double>& epsilons,
                                        const std::vector<double>& lambdas,
                                        int repetitions, uint64_t seed,
                                        const ExperimentOptions& options = {});

// 0 <= n_w <= R, 1 <= s_w <= R, n_w == R implies s_w == 1 and
// s_w <= R - n_w + 1. Throws DataError naming the first offending word.
void CheckCountIdentities(const PrivacyCell& cell, int repetitions,
                          const std::vector<std::string>& words);

enum class Verdict { kALower, kBLower, kOverlapping };
std::string_view ToString(Verdict verdict);

// Disjointness of the two 95% intervals.
Verdict CompareIntervals(const StatSummary& a, const StatSummary& b);

struct MechanismComparison {
  double epsilon = 0.0;
  double lambda_a = 0.0;
  double lambda_b = 0.0;
  Verdict n_w = Verdict::kOverlapping;
  Verdict s_w = Verdict::kOverlapping;
};

// Throws UsageError if either cell is missing.
MechanismComparison CompareMechanisms(const PrivacyStatsReport& report,
                                      double epsilon, double lambda_a,
                                      double lambda_b);

// Summary CSV: epsilon,lambda,stat,mean,std,ci_low,ci_high,p5,p50,p95
// (stat is N_w or S_w; two rows per cell).
void WriteSummaryCsv(const PrivacyStatsReport& report, std::ostream& out);
// Raw CSV: epsilon,lambda,word,n_w,s_w
void WriteRawCountsCsv(const PrivacyStatsReport& report, std::ostream& out);
// Every lambda != baseline compared against the baseline at every epsilon:
// epsilon,lambda_baseline,lambda,stat,verdict
void WriteComparisonsCsv(const PrivacyStatsReport& report, double baseline_lambda,
                         std::ostream& out);

std::string ReportToJson(const PrivacyStatsReport& report);
PrivacyStatsReport ReportFromJson(std::string_view json);

// Empirical check of the metric-DP ratio bound on a small vocabulary.
struct AuditViolation {
  size_t word = 0;
  size_t other = 0;
  size_t output = 0;
  double log_ratio = 0.0;
  double bound = 0.0;     // epsilon * ‖phi(word) - phi(other)‖_{M,lambda}
  double std_error = 0.0;
  double excess = 0.0;    // log_ratio - bound
};

struct AuditOptions {
  uint64_t min_hits = 500;
  double se_threshold = 3.0;
  int threads = 1;
  uint64_t seed = 0;
};

struct AuditReport {
  double epsilon = 0.0;
  double lambda = 0.0;
  uint64_t trials = 0;
  std::vector<std::vector<uint64_t>> counts;  // counts[w][output]
  uint64_t cells_tested = 0;
  uint64_t cells_excluded = 0;  // (w, w', output) with fewer than min_hits
  double max_excess = 0.0;      // largest log_ratio - bound over tested cells
  double max_z = 0.0;           // largest excess / std_error
  std::vector<AuditViolation> violations;

  bool passed() const { return violations.empty(); }
  std::string ToJson() const;
};

inline constexpr size_t kAuditMaxVocab = 50;
inline constexpr int kAuditMaxDim = 4;
inline constexpr uint64_t kAuditMinTrials = 100000;

// Runs `trials` perturbations of every vocabulary word (trial t of word w on
// stream DeriveStreamKey({seed, w, t})) and compares
// log(P^(w -> o) / P^(w' -> o)) with epsilon ‖phi(w) - phi(w')‖_{M,lambda}
// for every ordered pair and output where both counts reach min_hits. The
// log-ratio standard error is the delta-method
//   sqrt((1 - p) / (n p) + (1 - p') / (n p')).
// A cell is flagged when its excess exceeds se_threshold standard errors.
// Throws UsageError when |V| > 50, m > 4 or trials < 1e5.
AuditReport AuditDpRatio(const Mechanism& mech, uint64_t trials,
                         const AuditOptions& options = {});

}  // namespace mahadp

#endif  // MAHADP_PRIVSTATS_H_
