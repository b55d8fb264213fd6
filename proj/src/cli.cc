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
#include "mahadp/cli.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mahadp/config.h"
#include "mahadp/covariance_io.h"
#include "mahadp/embeddings.h"
#include "mahadp/error.h"
#include "mahadp/geometry.h"
#include "mahadp/mechanism.h"
#include "mahadp/noise.h"
#include "mahadp/parallel.h"
#include "mahadp/privstats.h"
#include "mahadp/rng.h"
#include "mahadp/synthetic.h"

namespace mahadp {
namespace {

namespace fs = std::filesystem;

std::string VersionString() {
  std::ostringstream s;
  s << "mahadp " << kVersion << "\n"
    << "rng: " << kRngVersion << "\n"
    << "covariance sidecar: " << kCovarianceFormatVersion << "\n"
    << "privacy report: " << kPrivacyReportSchema;
  return s.str();
}

// Flags shared by every subcommand. Values given on the command line win
// over the --config file, which wins over built-in defaults.
struct CommonFlags {
  std::string config_path;
  std::string embeddings;
  std::string format;
  std::vector<std::string> vocab;
  std::string covariance;
  std::vector<double> epsilons;
  std::vector<double> lambdas;
  int repetitions = 0;
  uint64_t seed = 0;
  std::string oov;
  bool lowercase = false;
  double floor = 0.0;
  std::string output_dir;
  int threads = DefaultThreadCount();
};

void AddCommonFlags(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config_path, "key = value run configuration file");
  sub->add_option("--embeddings", f.embeddings, "embedding file");
  sub->add_option("--format", f.format, "glove-text | word2vec-text");
  sub->add_option("--vocab", f.vocab, "corpus file(s) whose tokens restrict the vocabulary");
  sub->add_option("--covariance", f.covariance, "covariance sidecar descriptor (.json)");
  sub->add_option("--epsilon", f.epsilons, "epsilon value(s), comma-separated")
      ->delimiter(',');
  sub->add_option("--lambda", f.lambdas, "lambda value(s) in [0,1], comma-separated")
      ->delimiter(',');
  sub->add_option("--repetitions", f.repetitions, "repetitions per word (R)");
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--oov-policy", f.oov, "pass-through | drop | error");
  sub->add_flag("--lowercase,!--no-lowercase", f.lowercase, "fold ASCII tokens to lower case");
  sub->add_option("--eigenvalue-floor", f.floor, "clamp covariance eigenvalues below this");
  sub->add_option("--output-dir", f.output_dir, "directory for reports and provenance");
  sub->add_option("--threads", f.threads, "worker threads (default: logical cores)")
      ->check(CLI::PositiveNumber);
}

RunConfig EffectiveConfig(const CLI::App& sub, const CommonFlags& f) {
  RunConfig c = f.config_path.empty() ? RunConfig{} : LoadRunConfig(f.config_path);
  if (sub.count("--embeddings") > 0) c.embedding_path = f.embeddings;
  if (sub.count("--format") > 0) c.embedding_format = ParseEmbeddingFormat(f.format);
  if (sub.count("--vocab") > 0) c.vocab_paths = f.vocab;
  if (sub.count("--covariance") > 0) c.covariance_path = f.covariance;
  if (sub.count("--epsilon") > 0) c.epsilon_grid = f.epsilons;
  if (sub.count("--lambda") > 0) c.lambda_grid = f.lambdas;
  if (sub.count("--repetitions") > 0) c.repetitions = f.repetitions;
  if (sub.count("--seed") > 0) c.seed = f.seed;
  if (sub.count("--oov-policy") > 0) c.oov_policy = ParseOovPolicy(f.oov);
  if (sub.count("--lowercase") > 0 || sub.count("--no-lowercase") > 0) {
    c.lowercase = f.lowercase;
  }
  if (sub.count("--eigenvalue-floor") > 0) c.eigenvalue_floor = f.floor;
  if (sub.count("--output-dir") > 0) c.output_dir = f.output_dir;
  c.Validate();
  return c;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

fs::path PrepareOutputDir(const RunConfig& c) {
  const fs::path dir(c.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string());
  WriteText(dir / "effective_config.txt", SerializeRunConfig(c));
  return dir;
}

std::unordered_set<std::string> VocabularyFromCorpora(const RunConfig& c) {
  std::unordered_set<std::string> vocab;
  for (const std::string& path : c.vocab_paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open vocabulary corpus " + path);
    std::string line;
    while (std::getline(in, line)) {
      std::string_view text = line;
      // "label<TAB>text" records contribute only their text.
      const size_t tab = text.find('\t');
      if (tab != std::string_view::npos) text = text.substr(tab + 1);
      for (std::string& token : Tokenize(text, c.lowercase)) vocab.insert(std::move(token));
    }
  }
  return vocab;
}

std::shared_ptr<const EmbeddingStore> LoadStore(const RunConfig& c, std::ostream& err) {
  if (c.embedding_path.empty()) throw UsageError("--embeddings is required");
  std::optional<std::unordered_set<std::string>> filter;
  if (!c.vocab_paths.empty()) filter = VocabularyFromCorpora(c);
  LoadDiagnostics diag;
  auto store = std::make_shared<const EmbeddingStore>(EmbeddingStore::Load(
      c.embedding_path, c.embedding_format, filter ? &*filter : nullptr, &diag));
  for (const std::string& w : diag.warnings) err << "warning: " << w << '\n';
  return store;
}

std::shared_ptr<const ScaledCovariance> LoadOrComputeCovariance(
    const RunConfig& c, const EmbeddingStore* store, std::ostream& err) {
  std::shared_ptr<const ScaledCovariance> cov;
  if (!c.covariance_path.empty()) {
    cov = std::make_shared<const ScaledCovariance>(ReadCovarianceSidecar(c.covariance_path));
  } else if (store != nullptr) {
    cov = std::make_shared<const ScaledCovariance>(
        ScaledCovariance::FromEmbeddings(*store, c.eigenvalue_floor));
  } else {
    throw UsageError("need --covariance or --embeddings");
  }
  if (store != nullptr && cov->dim() != store->dim()) {
    throw DataError("covariance dimension " + std::to_string(cov->dim()) +
                    " does not match embedding dimension " + std::to_string(store->dim()));
  }
  if (cov->clamped_count() > 0) {
    err << "warning: " << cov->clamped_count()
        << " covariance eigenvalue(s) clamped to the floor " << FormatDouble(cov->eigenvalue_floor())
        << '\n';
  }
  return cov;
}

double Single(const std::vector<double>& grid, const char* name) {
  if (grid.size() != 1) {
    throw UsageError(std::string("this command needs exactly one ") + name + " (--" + name +
                     ")");
  }
  return grid.front();
}

std::string Fixed(double v, int digits = 12) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

// --- cov ------------------------------------------------------------------

int CmdCov(const RunConfig& c, std::ostream& out, std::ostream& err) {
  auto store = LoadStore(c, err);
  const fs::path dir = PrepareOutputDir(c);
  RunConfig compute = c;
  compute.covariance_path.clear();
  auto cov = LoadOrComputeCovariance(compute, store.get(), err);
  const fs::path descriptor = WriteCovarianceSidecar(*cov, dir / "covariance");
  out << "dim: " << cov->dim() << '\n';
  out << "vocab_size: " << store->size() << '\n';
  out << "trace: " << Fixed(cov->trace()) << '\n';
  out << "min_eigenvalue: " << Fixed(cov->min_eigenvalue()) << '\n';
  out << "clamped_eigenvalues: " << cov->clamped_count() << '\n';
  out << "top_eigenvalues:";
  for (int i = 0; i < std::min(5, cov->dim()); ++i) out << ' ' << Fixed(cov->eigenvalues()[i]);
  out << '\n';
  out << "sidecar: " << descriptor.string() << '\n';
  return kExitOk;
}

// --- perturb --------------------------------------------------------------

struct PerturbFlags {
  std::string input;
  std::string output;
  bool tsv = false;
  bool strict = false;
};

int CmdPerturb(const RunConfig& c, const PerturbFlags& p, int threads, std::ostream& out,
               std::ostream& err) {
  PerturbationConfig pc;
  pc.epsilon = Single(c.epsilon_grid, "epsilon");
  pc.lambda = Single(c.lambda_grid, "lambda");
  pc.seed = c.seed;
  pc.oov_policy = c.oov_policy;
  pc.lowercase = c.lowercase;
  auto store = LoadStore(c, err);
  auto cov = LoadOrComputeCovariance(c, store.get(), err);
  const fs::path dir = PrepareOutputDir(c);
  auto index = std::make_shared<const NearestNeighborIndex>(store);
  const Mechanism mech = Mechanism::Create(index, cov, pc);

  std::ifstream in_file;
  std::istream* in = &std::cin;
  if (p.input != "-") {
    in_file.open(p.input, std::ios::binary);
    if (!in_file) throw DataError("cannot open input corpus " + p.input);
    in = &in_file;
  }
  std::ofstream out_file;
  std::ostream* sink = &out;
  if (p.output != "-") {
    out_file.open(p.output, std::ios::binary | std::ios::trunc);
    if (!out_file) throw DataError("cannot open output " + p.output);
    sink = &out_file;
  }
  CorpusOptions options;
  options.tsv = p.tsv;
  options.strict = p.strict;
  options.threads = threads;
  const CorpusSummary summary = PerturbCorpus(mech, *in, *sink, options);
  sink->flush();
  if (!*sink) throw DataError("write failed for " + p.output);
  WriteText(dir / "perturb_summary.json", summary.ToJson() + "\n");
  err << summary.ToJson() << '\n';
  return kExitOk;
}

// --- stats ----------------------------------------------------------------

struct StatsFlags {
  size_t word_sample = 0;
};

int CmdStats(const RunConfig& c, const StatsFlags& s, int threads, std::ostream& out,
             std::ostream& err) {
  auto store = LoadStore(c, err);
  auto cov = LoadOrComputeCovariance(c, store.get(), err);
  const fs::path dir = PrepareOutputDir(c);
  auto index = std::make_shared<const NearestNeighborIndex>(store);

  std::vector<size_t> ids(store->size());
  std::iota(ids.begin(), ids.end(), 0);
  if (s.word_sample > 0 && s.word_sample < ids.size()) {
    Rng rng(DeriveStreamKey({c.seed, 0x5355'4253ULL}));
    for (size_t i = ids.size() - 1; i > 0; --i) {
      const size_t j = static_cast<size_t>(rng.NextU64() % (i + 1));
      std::swap(ids[i], ids[j]);
    }
    ids.resize(s.word_sample);
    std::sort(ids.begin(), ids.end());
  }
  std::vector<std::string> words;
  words.reserve(ids.size());
  for (size_t id : ids) words.push_back(store->word(id));

  const MechanismFactory factory = [&](double eps, double lambda) {
    PerturbationConfig pc;
    pc.epsilon = eps;
    pc.lambda = lambda;
    pc.seed = c.seed;
    pc.oov_policy = c.oov_policy;
    pc.lowercase = c.lowercase;
    return Mechanism::Create(index, cov, pc);
  };
  std::vector<std::string> warnings;
  ExperimentOptions options;
  options.threads = threads;
  options.warnings = &warnings;
  const PrivacyStatsReport report = RunPrivacyExperiment(
      factory, words, c.epsilon_grid, c.lambda_grid, c.repetitions, c.seed, options);
  for (const std::string& w : warnings) err << "warning: " << w << '\n';

  {
    std::ofstream f(dir / "summary.csv", std::ios::binary | std::ios::trunc);
    WriteSummaryCsv(report, f);
  }
  {
    std::ofstream f(dir / "raw_counts.csv", std::ios::binary | std::ios::trunc);
    WriteRawCountsCsv(report, f);
  }
  const double baseline =
      std::find(report.lambdas.begin(), report.lambdas.end(), 0.0) != report.lambdas.end()
          ? 0.0
          : report.lambdas.front();
  {
    std::ofstream f(dir / "comparisons.csv", std::ios::binary | std::ios::trunc);
    WriteComparisonsCsv(report, baseline, f);
  }
  WriteText(dir / "report.json", ReportToJson(report) + "\n");

  out << "words: " << words.size() << "  repetitions: " << report.repetitions << '\n';
  out << "epsilon  lambda   mean N_w (std)        mean S_w (std)\n";
  for (const PrivacyCell& cell : report.cells) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-8s %-8s %8.2f (%6.2f)     %8.2f (%6.2f)\n",
                  Fixed(cell.epsilon, 6).c_str(), Fixed(cell.lambda, 6).c_str(),
                  cell.n_summary.mean, cell.n_summary.std, cell.s_summary.mean,
                  cell.s_summary.std);
    out << line;
  }
  for (double eps : report.epsilons) {
    for (double lam : report.lambdas) {
      if (lam == baseline) continue;
      const MechanismComparison cmp = CompareMechanisms(report, eps, baseline, lam);
      out << "epsilon=" << Fixed(eps, 6) << " lambda " << Fixed(baseline, 6) << " vs "
          << Fixed(lam, 6) << ": N_w " << ToString(cmp.n_w) << ", S_w " << ToString(cmp.s_w)
          << '\n';
    }
  }
  return kExitOk;
}

// --- audit ----------------------------------------------------------------

struct AuditFlags {
  size_t vocab_size = 20;
  int dim = 2;
  uint64_t trials = 1000000;
  double side = 3.0;
  bool fault_halve_noise = false;
};

int CmdAudit(const RunConfig& c, const AuditFlags& a, int threads, std::ostream& out,
             std::ostream& err) {
  if (a.vocab_size > kAuditMaxVocab || a.vocab_size < 2) {
    throw UsageError("audit vocabulary size must lie in [2, " +
                     std::to_string(kAuditMaxVocab) + "]");
  }
  if (a.dim < 1 || a.dim > kAuditMaxDim) {
    throw UsageError("audit dimension must lie in [1, " + std::to_string(kAuditMaxDim) + "]");
  }
  if (a.trials < kAuditMinTrials) {
    throw UsageError("audit needs at least " + std::to_string(kAuditMinTrials) + " trials");
  }
  const fs::path dir = PrepareOutputDir(c);
  auto store = std::make_shared<const EmbeddingStore>(
      MakeAuditVocabulary(a.vocab_size, a.dim, c.seed, a.side));
  auto index = std::make_shared<const NearestNeighborIndex>(store);
  RunConfig cov_config = c;
  cov_config.covariance_path.clear();
  auto cov = LoadOrComputeCovariance(cov_config, store.get(), err);

  nlohmann::ordered_json all = nlohmann::ordered_json::array();
  size_t flagged = 0;
  for (double eps : c.epsilon_grid) {
    for (double lam : c.lambda_grid) {
      PerturbationConfig pc;
      pc.epsilon = eps;
      pc.lambda = lam;
      pc.seed = c.seed;
      if (a.fault_halve_noise) pc.fault_noise_scale = 0.5;
      const Mechanism mech = Mechanism::Create(index, cov, pc);
      AuditOptions options;
      options.threads = threads;
      options.seed = c.seed;
      const AuditReport r = AuditDpRatio(mech, a.trials, options);
      flagged += r.violations.size();
      out << "epsilon=" << Fixed(eps, 6) << " lambda=" << Fixed(lam, 6)
          << " tested=" << r.cells_tested << " excluded=" << r.cells_excluded
          << " max_excess=" << Fixed(r.max_excess, 6) << " max_z=" << Fixed(r.max_z, 4)
          << " violations=" << r.violations.size() << (r.passed() ? " PASS" : " FAIL") << '\n';
      all.push_back(nlohmann::ordered_json::parse(r.ToJson()));
    }
  }
  nlohmann::ordered_json doc;
  doc["fault_halve_noise"] = a.fault_halve_noise;
  doc["vocab_size"] = a.vocab_size;
  doc["dim"] = a.dim;
  doc["audits"] = std::move(all);
  WriteText(dir / "audit.json", doc.dump(2) + "\n");
  return flagged == 0 ? kExitOk : kExitRuntimeError;
}

// --- sample ---------------------------------------------------------------

struct SampleFlags {
  int64_t count = 0;
  int dim = 0;
  std::string output = "-";
};

int CmdSample(const RunConfig& c, const SampleFlags& s, std::ostream& out, std::ostream& err) {
  if (s.count < 1) throw UsageError("--count must be >= 1");
  const double eps = Single(c.epsilon_grid, "epsilon");
  const double lambda = Single(c.lambda_grid, "lambda");
  std::shared_ptr<const ScaledCovariance> cov;
  if (c.covariance_path.empty() && c.embedding_path.empty()) {
    if (s.dim < 1) throw UsageError("need --covariance, --embeddings or --dim");
    cov = std::make_shared<const ScaledCovariance>(
        ScaledCovariance::FromScaledMatrix(Eigen::MatrixXd::Identity(s.dim, s.dim)));
  } else {
    std::shared_ptr<const EmbeddingStore> store;
    if (c.covariance_path.empty()) store = LoadStore(c, err);
    cov = LoadOrComputeCovariance(c, store.get(), err);
  }
  PrepareOutputDir(c);
  NoiseSampler sampler(std::make_shared<const RegularizedMetric>(cov, lambda), eps, c.seed);

  std::ofstream out_file;
  std::ostream* sink = &out;
  if (s.output != "-") {
    out_file.open(s.output, std::ios::binary | std::ios::trunc);
    if (!out_file) throw DataError("cannot open output " + s.output);
    sink = &out_file;
  }
  const int m = cov->dim();
  for (int k = 1; k <= m; ++k) *sink << "z_" << k << ',';
  *sink << "radius\n";
  char buf[40];
  for (int64_t i = 0; i < s.count; ++i) {
    const NoiseSample sample = sampler.Sample();
    for (int k = 0; k < m; ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g,", sample.z[k]);
      *sink << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g\n", sample.radius);
    *sink << buf;
  }
  sink->flush();
  if (!*sink) throw DataError("write failed");
  return kExitOk;
}

// --- profile / synth ------------------------------------------------------

int CmdProfile(const RunConfig& c, std::ostream& out, std::ostream& err) {
  auto store = LoadStore(c, err);
  const fs::path dir = PrepareOutputDir(c);
  const NearestNeighborIndex index(store);
  const std::string json = CorpusProfileJson(ComputeCorpusProfile(index));
  WriteText(dir / "profile.json", json + "\n");
  out << json << '\n';
  return kExitOk;
}

struct SynthFlags {
  AnisotropicSpec spec;
  std::string output;
};

int CmdSynth(const RunConfig& c, SynthFlags s, std::ostream& out) {
  s.spec.seed = c.seed;
  PrepareOutputDir(c);
  const EmbeddingStore store = MakeAnisotropicEmbeddings(s.spec);
  WriteGloveText(store, s.output);
  out << "wrote " << store.size() << " x " << store.dim() << " embeddings to " << s.output
      << '\n';
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mahalanobis-mechanism text perturbation and privacy statistics", "mahadp"};
  app.set_version_flag("--version", VersionString());
  app.require_subcommand(1);

  CommonFlags common;

  CLI::App* cov = app.add_subcommand("cov", "compute and persist the scaled covariance");
  AddCommonFlags(cov, common);

  PerturbFlags perturb_flags;
  CLI::App* perturb = app.add_subcommand("perturb", "perturb a corpus, one record per line");
  AddCommonFlags(perturb, common);
  perturb->add_option("--input", perturb_flags.input, "input corpus ('-' for stdin)")->required();
  perturb->add_option("--output", perturb_flags.output, "output corpus ('-' for stdout)")
      ->required();
  perturb->add_flag("--tsv", perturb_flags.tsv, "records are label<TAB>text");
  perturb->add_flag("--strict", perturb_flags.strict, "fail on unparseable records");

  StatsFlags stats_flags;
  CLI::App* stats = app.add_subcommand("stats", "N_w / S_w privacy statistics over a grid");
  AddCommonFlags(stats, common);
  stats->add_option("--word-sample", stats_flags.word_sample,
                    "evaluate a seeded random subset of this many words (0 = all)");

  AuditFlags audit_flags;
  CLI::App* audit = app.add_subcommand("audit", "empirical metric-DP ratio audit");
  AddCommonFlags(audit, common);
  audit->add_option("--vocab-size", audit_flags.vocab_size, "synthetic vocabulary size");
  audit->add_option("--dim", audit_flags.dim, "synthetic embedding dimension");
  audit->add_option("--trials", audit_flags.trials, "perturbations per word");
  audit->add_option("--vocab-side", audit_flags.side, "extent of the synthetic vocabulary");
  audit->add_flag("--fault-halve-noise", audit_flags.fault_halve_noise,
                  "test hook: halve every noise draw (must be flagged)");

  SampleFlags sample_flags;
  CLI::App* sample = app.add_subcommand("sample", "draw noise vectors as CSV");
  AddCommonFlags(sample, common);
  sample->add_option("--count", sample_flags.count, "number of samples")->required();
  sample->add_option("--dim", sample_flags.dim, "identity covariance of this dimension");
  sample->add_option("--output", sample_flags.output, "CSV path ('-' for stdout)");

  CLI::App* profile = app.add_subcommand("profile", "nearest-neighbor density profile");
  AddCommonFlags(profile, common);

  SynthFlags synth_flags;
  CLI::App* synth = app.add_subcommand("synth", "write a synthetic anisotropic embedding file");
  AddCommonFlags(synth, common);
  synth->add_option("--vocab-size", synth_flags.spec.vocab_size, "number of words");
  synth->add_option("--dim", synth_flags.spec.dim, "embedding dimension");
  synth->add_option("--decay", synth_flags.spec.decay, "eigenvalue decay ratio");
  synth->add_option("--scale", synth_flags.spec.scale, "overall standard deviation");
  synth->add_option("--output", synth_flags.output, "output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsageError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const RunConfig config = EffectiveConfig(*sub, common);
    if (sub == cov) return CmdCov(config, out, err);
    if (sub == perturb) return CmdPerturb(config, perturb_flags, common.threads, out, err);
    if (sub == stats) return CmdStats(config, stats_flags, common.threads, out, err);
    if (sub == audit) return CmdAudit(config, audit_flags, common.threads, out, err);
    if (sub == sample) return CmdSample(config, sample_flags, out, err);
    if (sub == profile) return CmdProfile(config, out, err);
    if (sub == synth) return CmdSynth(config, synth_flags, out);
    return kExitUsageError;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}

}  // namespace mahadp
