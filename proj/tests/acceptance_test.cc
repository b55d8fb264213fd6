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
// Acceptance gate. Runs every acceptance criterion and prints one line per
// criterion; exits non-zero if any criterion fails.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli_runner.h"
#include "mahadp/error.h"
#include "mahadp/geometry.h"
#include "mahadp/mechanism.h"
#include "mahadp/noise.h"
#include "mahadp/parallel.h"
#include "mahadp/privstats.h"
#include "mahadp/rng.h"
#include "mahadp/synthetic.h"
#include "oracles.h"
#include "test_util.h"

namespace mahadp {
namespace {

namespace fs = std::filesystem;

enum class Outcome { kPass, kFail, kSkip };

struct Result {
  Outcome outcome = Outcome::kFail;
  std::string detail;
};

Result Pass(std::string detail) { return {Outcome::kPass, std::move(detail)}; }
Result Fail(std::string detail) { return {Outcome::kFail, std::move(detail)}; }

std::string Fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

Eigen::MatrixXd RandomSigma(int m, Rng& rng) {
  Eigen::MatrixXd b(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) b(i, j) = rng.StandardNormal();
  }
  Eigen::MatrixXd s = b * b.transpose() / m + 0.05 * Eigen::MatrixXd::Identity(m, m);
  return s * (m / s.trace());
}

std::shared_ptr<const ScaledCovariance> Share(ScaledCovariance cov) {
  return std::make_shared<const ScaledCovariance>(std::move(cov));
}

// 1. Per-sample radius identity at m = 300.
Result RadiusIdentity() {
  Rng gen(101);
  const auto cov = Share(ScaledCovariance::FromScaledMatrix(RandomSigma(300, gen)));
  double worst = 0.0;
  long checked = 0;
  for (double lambda : {0.0, 0.5, 1.0}) {
    NoiseSampler sampler(std::make_shared<const RegularizedMetric>(cov, lambda), 10.0,
                         static_cast<uint64_t>(lambda * 10) + 1);
    for (int i = 0; i < 100000; ++i) {
      const NoiseSample s = sampler.Sample();
      worst = std::max(worst, std::abs(sampler.metric().Norm(s.z) - s.radius) / s.radius);
      ++checked;
    }
  }
  const std::string detail = Fmt("%ld samples, max relative error %.3g", checked, worst);
  return worst <= 1e-9 ? Pass(detail) : Fail(detail);
}

// 2. Log-density slope against the regularized norm at m = 2.
Result DensityShape() {
  const auto cov = Share(ScaledCovariance::FromScaledMatrix(
      Eigen::Vector2d(1.6, 0.4).asDiagonal().toDenseMatrix()));
  std::string detail;
  bool ok = true;
  for (double eps : {1.0, 2.0}) {
    for (double lambda : {0.0, 0.5, 1.0}) {
      auto metric = std::make_shared<const RegularizedMetric>(cov, lambda);
      NoiseSampler sampler(metric, eps, static_cast<uint64_t>(eps * 100 + lambda * 10));
      std::vector<Eigen::Vector2d> zs;
      zs.reserve(100000);
      for (int i = 0; i < 100000; ++i) {
        const NoiseSample s = sampler.Sample();
        zs.emplace_back(s.z[0], s.z[1]);
      }
      const double slope = testing::LogDensitySlope(
          zs, [&](const Eigen::Vector2d& z) { return metric->Norm(z); }, 0.2 / eps);
      ok &= std::abs(slope + eps) <= 0.05 * eps;
      detail += Fmt("eps=%g lambda=%g slope=%.4f; ", eps, lambda, slope);
    }
  }
  return ok ? Pass(detail) : Fail(detail);
}

// 3. Square-root factor round trip.
Result SquareRootRoundTrip() {
  Rng rng(303);
  double worst = 0.0;
  int largest = 0;
  for (int i = 0; i < 100; ++i) {
    const int m = i == 99 ? 300 : 2 + 3 * i;
    const double lambda = rng.UniformOpen();
    const Eigen::MatrixXd sigma = RandomSigma(m, rng);
    const RegularizedMetric metric(Share(ScaledCovariance::FromScaledMatrix(sigma)), lambda);
    const Eigen::MatrixXd a = lambda * sigma + (1 - lambda) * Eigen::MatrixXd::Identity(m, m);
    const Eigen::MatrixXd& r = metric.sqrt_factor();
    worst = std::max(worst, (r * r - a).norm() / a.norm());
    largest = std::max(largest, m);
  }
  const std::string detail = Fmt("100 matrices up to m=%d, max relative error %.3g", largest, worst);
  return worst < 1e-8 ? Pass(detail) : Fail(detail);
}

// 4. Eigenvalue sandwich on random triples.
Result Sandwich() {
  Rng rng(404);
  int violations = 0;
  for (int t = 0; t < 10000; ++t) {
    const int m = 2 + static_cast<int>(rng.NextU64() % 15);
    const Eigen::MatrixXd sigma = RandomSigma(m, rng);
    const double lambda = rng.UniformOpen();
    const RegularizedMetric metric(Share(ScaledCovariance::FromScaledMatrix(sigma)), lambda);
    Eigen::VectorXd x(m);
    for (int k = 0; k < m; ++k) x[k] = rng.StandardNormal();
    const double c = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sigma).eigenvalues().minCoeff();
    const double value = std::sqrt(x.dot((lambda * sigma + (1 - lambda) *
                                          Eigen::MatrixXd::Identity(m, m)).ldlt().solve(x)));
    const double lower = x.norm() / std::sqrt(lambda * m + 1 - lambda);
    const double upper = x.norm() / std::sqrt(lambda * c + 1 - lambda);
    const double lib = metric.Norm(x);
    if (lib < lower * (1 - 1e-9) || lib > upper * (1 + 1e-9) ||
        value < lower * (1 - 1e-9) || value > upper * (1 + 1e-9)) {
      ++violations;
    }
  }
  const std::string detail = Fmt("10000 triples, %d violations", violations);
  return violations == 0 ? Pass(detail) : Fail(detail);
}

// 5. Empirical ratio audit on a desk-scale vocabulary.
Result Audit() {
  auto store = std::make_shared<const EmbeddingStore>(MakeAuditVocabulary(20, 2, 1, 3.0, 2.0));
  auto index = std::make_shared<const NearestNeighborIndex>(store);
  auto cov = Share(ScaledCovariance::FromEmbeddings(*store));
  AuditOptions options;
  options.threads = DefaultThreadCount();
  options.seed = 5;
  std::string detail;
  bool ok = true;
  for (double lambda : {0.0, 0.5, 1.0}) {
    PerturbationConfig pc;
    pc.epsilon = 2.0;
    pc.lambda = lambda;
    pc.seed = 5;
    const AuditReport r = AuditDpRatio(Mechanism::Create(index, cov, pc), 1000000, options);
    ok &= r.passed();
    detail += Fmt("lambda=%g tested=%llu violations=%zu max_z=%.2f; ", lambda,
                  static_cast<unsigned long long>(r.cells_tested), r.violations.size(), r.max_z);
  }
  PerturbationConfig fault;
  fault.epsilon = 2.0;
  fault.lambda = 0.5;
  fault.seed = 5;
  fault.fault_noise_scale = 0.5;
  const AuditReport broken = AuditDpRatio(Mechanism::Create(index, cov, fault), 1000000, options);
  ok &= !broken.passed();
  detail += Fmt("halved noise: violations=%zu", broken.violations.size());
  return ok ? Pass(detail) : Fail(detail);
}

// 6. lambda = 0 equals the spherical reference, bit for bit.
Result LaplaceReduction() {
  const int m = 50;
  const double eps = 5.0;
  const auto cov = Share(ScaledCovariance::FromScaledMatrix(Eigen::MatrixXd::Identity(m, m)));
  NoiseSampler sampler(std::make_shared<const RegularizedMetric>(cov, 0.0), eps, Rng(606));
  Rng ref(606);
  int mismatches = 0;
  const int n = 100000;
  double s1 = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd z = sampler.Sample().z;
    if (z != testing::ReferenceLaplaceNoise(ref, m, eps)) ++mismatches;
    const double r = z.norm();
    s1 += r;
    s2 += r * r;
  }

  // Mechanism level: an anisotropic covariance must not matter at lambda = 0.
  Rng gen(607);
  AnisotropicSpec spec;
  spec.vocab_size = 300;
  spec.dim = 8;
  spec.seed = 608;
  auto store = std::make_shared<const EmbeddingStore>(MakeAnisotropicEmbeddings(spec));
  auto index = std::make_shared<const NearestNeighborIndex>(store);
  PerturbationConfig pc;
  pc.epsilon = 3.0;
  pc.lambda = 0.0;
  pc.seed = 609;
  const Mechanism mech =
      Mechanism::Create(index, Share(ScaledCovariance::FromEmbeddings(*store)), pc);
  int mech_mismatches = 0;
  for (uint64_t stream = 0; stream < 20000; ++stream) {
    const size_t w = stream % store->size();
    Rng r = Rng::ForStream(pc.seed, stream);
    const Eigen::VectorXd q = store->row(w).transpose() + testing::ReferenceLaplaceNoise(r, 8, 3.0);
    if (mech.PerturbId(w, stream) != testing::BruteForceNearest(store->matrix(), q).first) {
      ++mech_mismatches;
    }
  }

  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  const double mean_err = std::abs(mean / (m / eps) - 1);
  const double var_err = std::abs(var / (m / (eps * eps)) - 1);
  const bool ok = mismatches == 0 && mech_mismatches == 0 && mean_err <= 0.02 && var_err <= 0.05;
  const std::string detail =
      Fmt("noise mismatches=%d mechanism mismatches=%d, |Z| mean err=%.4f var err=%.4f",
          mismatches, mech_mismatches, mean_err, var_err);
  return ok ? Pass(detail) : Fail(detail);
}

std::pair<int, long> CountIdentityViolations(const PrivacyStatsReport& report) {
  int bad = 0;
  long checked = 0;
  const int r = report.repetitions;
  for (const PrivacyCell& cell : report.cells) {
    for (size_t i = 0; i < cell.n_w.size(); ++i) {
      const int n = cell.n_w[i], s = cell.s_w[i];
      ++checked;
      if (n < 0 || n > r || s < 1 || s > r || (n == r && s != 1) || s > r - n + 1) ++bad;
    }
  }
  return {bad, checked};
}

MechanismFactory FactoryFor(std::shared_ptr<const NearestNeighborIndex> index,
                            std::shared_ptr<const ScaledCovariance> cov, uint64_t seed) {
  return [index, cov, seed](double eps, double lambda) {
    PerturbationConfig pc;
    pc.epsilon = eps;
    pc.lambda = lambda;
    pc.seed = seed;
    return Mechanism::Create(index, cov, pc);
  };
}

// 7. Count identities over full-grid runs.
Result CountIdentities(const PrivacyStatsReport& benchmark) {
  AnisotropicSpec spec;
  spec.vocab_size = 400;
  spec.dim = 10;
  spec.scale = 0.6;
  spec.seed = 707;
  auto store = std::make_shared<const EmbeddingStore>(MakeAnisotropicEmbeddings(spec));
  auto index = std::make_shared<const NearestNeighborIndex>(store);
  auto cov = Share(ScaledCovariance::FromEmbeddings(*store));
  ExperimentOptions options;
  options.threads = DefaultThreadCount();
  int bad = 0;
  long checked = 0;
  for (int reps : {1, 7, 100}) {
    const auto report =
        RunPrivacyExperiment(FactoryFor(index, cov, 708), store->words(), {1, 5, 10, 20, 40, 1e6},
                             {0, 0.25, 0.5, 0.75, 1}, reps, 709, options);
    const auto [b, c] = CountIdentityViolations(report);
    bad += b;
    checked += c;
  }
  const auto [b, c] = CountIdentityViolations(benchmark);
  bad += b;
  checked += c;
  const std::string detail = Fmt("%ld (cell, word) counts checked, %d violations", checked, bad);
  return bad == 0 ? Pass(detail) : Fail(detail);
}

// 8. Direction of the lambda effect on an anisotropic benchmark.
PrivacyStatsReport RunBenchmark() {
  AnisotropicSpec spec;
  spec.vocab_size = 2000;
  spec.dim = 50;
  spec.decay = 0.9;
  spec.scale = 0.5;
  spec.seed = 7;
  auto store = std::make_shared<const EmbeddingStore>(MakeAnisotropicEmbeddings(spec));
  auto index = std::make_shared<const NearestNeighborIndex>(store);
  auto cov = Share(ScaledCovariance::FromEmbeddings(*store));
  ExperimentOptions options;
  options.threads = DefaultThreadCount();
  return RunPrivacyExperiment(FactoryFor(index, cov, 1), store->words(), {5, 10, 20}, {0, 1}, 100,
                              3, options);
}

Result LambdaEffect(const PrivacyStatsReport& report) {
  std::string detail;
  bool ok = true;
  for (double eps : report.epsilons) {
    const PrivacyCell* base = report.Find(eps, 0.0);
    const PrivacyCell* full = report.Find(eps, 1.0);
    const bool n_lower = CompareIntervals(full->n_summary, base->n_summary) == Verdict::kALower;
    const bool s_higher = CompareIntervals(base->s_summary, full->s_summary) == Verdict::kALower;
    ok &= n_lower && s_higher;
    detail += Fmt("eps=%g N %.2f->%.2f S %.2f->%.2f; ", eps, base->n_summary.mean,
                  full->n_summary.mean, base->s_summary.mean, full->s_summary.mean);
  }
  return ok ? Pass(detail) : Fail(detail);
}

// 9. Real embeddings, only when provided.
Result RealEmbeddings() {
  const char* vec = std::getenv("MAHADP_FASTTEXT_VEC");
  if (vec == nullptr || *vec == '\0') {
    return {Outcome::kSkip, "set MAHADP_FASTTEXT_VEC (and optionally MAHADP_VOCAB_CORPORA) to run"};
  }
  testing::TempDir dir;
  std::vector<std::string> args = {"stats", "--embeddings", vec, "--format", "word2vec-text",
                                   "--epsilon", "5,10,20", "--lambda", "0,0.25,0.5,0.75,1",
                                   "--output-dir", (dir.path() / "out").string()};
  if (const char* fmt = std::getenv("MAHADP_EMBEDDING_FORMAT")) {
    args[4] = fmt;
  }
  if (const char* corpora = std::getenv("MAHADP_VOCAB_CORPORA")) {
    std::stringstream list(corpora);
    std::string path;
    args.push_back("--vocab");
    while (std::getline(list, path, ':')) {
      if (!path.empty()) args.push_back(path);
    }
  }
  if (const char* sample = std::getenv("MAHADP_WORD_SAMPLE")) {
    args.insert(args.end(), {"--word-sample", sample});
  }
  const auto run = testing::RunMahadp(args);
  if (run.code != 0) return Fail("stats run failed: " + run.err);
  const auto report = ReportFromJson(testing::ReadFile(dir.path() / "out" / "report.json"));
  bool ordered = true;
  const std::vector<double> lambdas = {0, 0.25, 0.5, 0.75, 1};
  for (size_t i = 1; i < lambdas.size(); ++i) {
    ordered &= report.Find(10, lambdas[i - 1])->n_summary.mean >
               report.Find(10, lambdas[i])->n_summary.mean;
  }
  bool signs = true;
  for (double eps : {5.0, 10.0, 20.0}) {
    signs &= report.Find(eps, 0)->n_summary.mean > report.Find(eps, 1)->n_summary.mean;
    signs &= report.Find(eps, 0)->s_summary.mean < report.Find(eps, 1)->s_summary.mean;
  }
  const std::string detail = Fmt("%zu words, N_w ordering at eps=10 %s, gap signs %s",
                                 report.words.size(), ordered ? "holds" : "broken",
                                 signs ? "match" : "differ");
  return ordered && signs ? Pass(detail) : Fail(detail);
}

std::map<std::string, std::string> Snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      files[fs::relative(entry.path(), dir).string()] = testing::ReadFile(entry.path());
    }
  }
  return files;
}

// 10. Every subcommand is byte-identical across reruns and thread counts.
Result CliDeterminism() {
  testing::TempDir dir;
  const std::string root = dir.path().string();
  const std::string emb = root + "/in/emb.txt";
  fs::create_directories(dir.path() / "in");
  {
    std::string corpus;
    Rng rng(1001);
    for (int i = 0; i < 3000; ++i) {
      corpus += "label" + std::to_string(i % 4) + "\t";
      const int n = 1 + static_cast<int>(rng.NextU64() % 15);
      for (int k = 0; k < n; ++k) {
        corpus += (k ? " " : "") + std::string("w") + std::to_string(rng.NextU64() % 420);
      }
      corpus += '\n';
    }
    testing::WriteFile(dir.path() / "in" / "corpus.tsv", corpus);
  }
  using Args = std::vector<std::string>;
  const std::vector<std::pair<std::string, Args>> commands = {
      {"synth", {"synth", "--vocab-size", "400", "--dim", "12", "--output", "OUT/emb.txt"}},
      {"cov", {"cov", "--embeddings", emb}},
      {"profile", {"profile", "--embeddings", emb}},
      {"perturb", {"perturb", "--embeddings", emb, "--epsilon", "3", "--lambda", "0.5", "--tsv",
                   "--input", root + "/in/corpus.tsv", "--output", "OUT/perturbed.tsv"}},
      {"stats", {"stats", "--embeddings", emb, "--epsilon", "2,10", "--lambda", "0,0.5,1",
                 "--repetitions", "30"}},
      {"audit", {"audit", "--vocab-size", "10", "--trials", "100000", "--epsilon", "2",
                 "--lambda", "0,1"}},
      {"sample", {"sample", "--embeddings", emb, "--epsilon", "2", "--lambda", "0.7", "--count",
                  "5000", "--output", "OUT/samples.csv"}},
  };
  std::string detail;
  bool ok = true;
  for (const auto& [name, base] : commands) {
    const fs::path out = dir.path() / ("out_" + name);
    std::vector<std::map<std::string, std::string>> snapshots;
    std::vector<testing::CliResult> results;
    for (const char* threads : {"1", "3", "1"}) {
      fs::remove_all(out);
      Args args = base;
      for (auto& a : args) {
        if (a.rfind("OUT/", 0) == 0) a = (out / a.substr(4)).string();
      }
      args.insert(args.end(), {"--seed", "77", "--threads", threads, "--output-dir", out.string()});
      results.push_back(testing::RunMahadp(args));
      snapshots.push_back(Snapshot(out));
    }
    bool same = true;
    for (size_t i = 1; i < results.size(); ++i) {
      same &= results[i].code == 0 && results[i].out == results[0].out &&
              snapshots[i] == snapshots[0];
    }
    same &= results[0].code == 0 && !snapshots[0].empty();
    if (!same) detail += name + " differs (exit " + std::to_string(results[0].code) + " " +
                         results[0].err + "); ";
    ok &= same;
    if (name == "synth") fs::copy_file(out / "emb.txt", emb, fs::copy_options::overwrite_existing);
  }
  if (ok) detail = Fmt("%zu subcommands identical over threads 1, 3, 1", commands.size());
  return ok ? Pass(detail) : Fail(detail);
}

int RunAll() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Result()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    Result r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = Fail(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = r.outcome == Outcome::kPass ? "PASS" : r.outcome == Outcome::kSkip ? "SKIP" : "FAIL";
    if (r.outcome == Outcome::kFail) ++failures;
    std::printf("[%s] criterion %2d  %-28s %6.1fs  %s\n", tag, id, name, secs, r.detail.c_str());
    std::fflush(stdout);
  };
  PrivacyStatsReport benchmark;
  report(1, "sampler radius identity", RadiusIdentity);
  report(2, "density shape", DensityShape);
  report(3, "square-root round trip", SquareRootRoundTrip);
  report(4, "norm sandwich", Sandwich);
  report(5, "metric-DP ratio audit", Audit);
  report(6, "Laplace reduction", LaplaceReduction);
  // Criterion 7 also checks the criterion 8 benchmark run, so it runs it.
  report(7, "count identities", [&] {
    benchmark = RunBenchmark();
    return CountIdentities(benchmark);
  });
  report(8, "lambda effect direction", [&] { return LambdaEffect(benchmark); });
  report(9, "real embeddings (optional)", RealEmbeddings);
  report(10, "CLI determinism", CliDeterminism);
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace mahadp

int main() { return mahadp::RunAll(); }
