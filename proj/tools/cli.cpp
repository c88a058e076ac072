// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "sclora/adapter.hpp"
#include "sclora/covariance.hpp"
#include "sclora/errors.hpp"
#include "sclora/io.hpp"
#include "sclora/matrix_io.hpp"
#include "sclora/subspace.hpp"
#include "sclora/trainer.hpp"

namespace sclora::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kBetaAdvisoryThreshold = 0.95;

struct GlobalOptions {
  std::uint64_t seed = 0;
  bool quiet = false;
  std::size_t threads = 1;
};

class Session {
 public:
  Session(std::ostream& out, std::ostream& err, const GlobalOptions& globals)
      : out_(out), err_(err), globals_(globals) {}

  std::ostream& out() { return out_; }
  bool quiet() const { return globals_.quiet; }
  const GlobalOptions& globals() const { return globals_; }

  void warn(Warning w) {
    err_ << "WARN " << w.code << ": " << w.message << '\n';
    outcome_.warnings.push_back(std::move(w));
  }
  void warn_all(const std::vector<Warning>& ws) {
    for (const auto& w : ws) warn(w);
  }
  void fail(int code) { outcome_.exit_code = code; }
  CommandOutcome& outcome() { return outcome_; }

 private:
  std::ostream& out_;
  std::ostream& err_;
  const GlobalOptions& globals_;
  CommandOutcome outcome_;
};

void require_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw InvalidArgument("--beta must lie in [0, 1], got " + format_number(beta));
  }
}

// Rank diagnostic on the preserved-task covariance plus the β advisory.
std::vector<Warning> rank_warnings(const CovarianceMatrix& cov_neg, std::size_t rank,
                                   double beta) {
  std::vector<Warning> out;
  if (cov_neg.sample_count == 0) return out;  // bare matrix: counts unknown
  const RankDiagnostic diag = rank_deficiency_check(cov_neg, rank);
  if (!diag.warn()) return out;
  out.push_back({kWarnRankDeficient, "negative-task covariance: " + diag.message()});
  if (beta > kBetaAdvisoryThreshold) {
    out.push_back({kWarnBetaAdvisory,
                   "beta " + format_number(beta) +
                       " with a rank-deficient negative covariance; keep 1-beta positive "
                       "(e.g. beta 0.8 or 0.9) so the positive-task term pins the subspace"});
  }
  return out;
}

SubspaceSelection select_from_files(Session& session, const fs::path& pos_path,
                                    const fs::path& neg_path, double beta, std::size_t rank) {
  require_beta(beta);
  const CovarianceMatrix cov_pos = load_covariance(pos_path);
  const CovarianceMatrix cov_neg = load_covariance(neg_path);
  SubspaceSelection sel = select_subspace(delta_cov(cov_pos, cov_neg, beta), rank);
  for (auto& w : rank_warnings(cov_neg, rank, beta)) sel.warnings.push_back(std::move(w));
  session.warn_all(sel.warnings);
  return sel;
}

// ---------------------------------------------------------------- covariance

struct CovarianceArgs {
  std::string activations;
  std::string out;
  std::optional<std::size_t> clip;
};

void run_covariance(Session& session, const CovarianceArgs& args) {
  std::ifstream in(args.activations, std::ios::binary);
  if (!in) throw FormatError(args.activations, 0, "cannot open file for reading");
  MatrixRecordReader reader(in, args.activations);

  std::optional<CovAccumulator> acc;
  std::size_t index = 0;
  for (;;) {
    const std::uint64_t offset = reader.offset();
    auto tokens = reader.next();
    if (!tokens) break;
    if (!acc) acc.emplace(tokens->rows());
    ActivationSample sample{args.clip ? clip_tokens(*tokens, *args.clip) : std::move(*tokens),
                            args.activations + " record " + std::to_string(index)};
    try {
      acc->add(sample);
    } catch (const InvalidArgument& e) {
      throw FormatError(args.activations, offset, e.what());
    }
    ++index;
  }
  if (!acc) throw FormatError(args.activations, 0, "no activation records");

  const CovarianceMatrix cov = finalize(*acc);
  save_covariance(args.out, cov);
  if (!session.quiet()) {
    session.out() << "covariance dim=" << cov.dim() << " samples=" << cov.sample_count
                  << " tokens=" << cov.token_length << " -> " << args.out << '\n';
  }
}

// ------------------------------------------------------------------ subspace

struct SubspaceArgs {
  std::string cov_pos;
  std::string cov_neg;
  double beta = 0.0;
  std::size_t rank = 0;
  std::string out;
};

void run_subspace(Session& session, const SubspaceArgs& args) {
  const SubspaceSelection sel =
      select_from_files(session, args.cov_pos, args.cov_neg, args.beta, args.rank);
  save_matrix(args.out, sel.basis.columns());
  if (!session.quiet()) {
    session.out() << "subspace dim=" << sel.basis.dim() << " rank=" << sel.basis.rank()
                  << " reward=" << format_number(sel.reward)
                  << " gap=" << format_number(sel.gap) << " -> " << args.out << '\n';
  }
}

// ---------------------------------------------------------------------- init

struct InitArgs {
  std::string w0;
  std::string scheme;
  std::optional<std::string> basis;
  std::optional<std::string> cov_pos;
  std::optional<std::string> cov_neg;
  std::optional<double> beta;
  std::size_t rank = 0;
  std::string out;
};

void run_init(Session& session, const InitArgs& args) {
  const Scheme scheme = parse_scheme(args.scheme);
  const Matrix w0 = load_matrix(args.w0);
  const bool has_covs = args.cov_pos || args.cov_neg || args.beta;

  AdapterMeta meta;
  meta.seed = session.globals().seed;
  AdapterPair pair;

  if (scheme == Scheme::kScLora) {
    if (args.basis && has_covs) {
      throw InvalidArgument("init: give either --basis or --cov-pos/--cov-neg/--beta, not both");
    }
    if (args.basis) {
      const Matrix q = load_matrix(*args.basis);
      if (q.cols() != args.rank) {
        throw InvalidArgument("init: basis has " + std::to_string(q.cols()) +
                              " columns but --rank is " + std::to_string(args.rank));
      }
      pair = init_sc_lora(w0, OrthonormalBasis::from_columns(q));
    } else {
      if (!args.cov_pos || !args.cov_neg || !args.beta) {
        throw InvalidArgument("init: sc-lora needs --basis or all of --cov-pos, --cov-neg, --beta");
      }
      SubspaceSelection sel =
          select_from_files(session, *args.cov_pos, *args.cov_neg, *args.beta, args.rank);
      meta.beta = *args.beta;
      meta.warnings = std::move(sel.warnings);
      pair = init_sc_lora(w0, sel.basis);
    }
  } else {
    if (args.basis || has_covs) {
      throw InvalidArgument("init: --basis/--cov-pos/--cov-neg/--beta only apply to sc-lora");
    }
    pair = scheme == Scheme::kVanilla ? init_vanilla(w0, args.rank, session.globals().seed)
                                      : init_pissa(w0, args.rank);
  }

  save_adapter(args.out, pair, meta);
  if (!session.quiet()) {
    session.out() << "adapter scheme=" << to_string(pair.scheme) << " r=" << pair.rank
                  << " d_in=" << pair.d_in() << " d_out=" << pair.d_out() << " -> " << args.out
                  << '\n';
  }
}

// -------------------------------------------------------------------- verify

struct VerifyArgs {
  std::string adapter;
  std::string w0;
};

void run_verify(Session& session, const VerifyArgs& args) {
  const AdapterFile file = load_adapter(args.adapter);
  const Matrix w0 = load_matrix(args.w0);
  const auto checks = verify_adapter(file.pair, w0, session.globals().seed);
  bool ok = true;
  for (const auto& c : checks) {
    ok = ok && c.passed;
    if (!session.quiet() || !c.passed) {
      session.out() << (c.passed ? "PASS " : "FAIL ") << c.name
                    << " measured=" << format_number(c.measured)
                    << " tolerance=" << format_number(c.tolerance) << '\n';
    }
  }
  if (!ok) session.fail(kInvariantViolation);
}

// --------------------------------------------------------------------- sweep

struct SweepArgs {
  std::string config;
  std::string out;
};

SweepConfig parse_sweep_config(const std::string& path, std::size_t threads) {
  std::ifstream in(path);
  if (!in) throw FormatError(path, 0, "cannot open file for reading");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path, e.byte, e.what());
  }
  if (!j.is_object()) throw FormatError(path, 0, "config must be a JSON object");

  static const std::set<std::string> known = {
      "d_in",  "d_out", "rank",          "r_plus",     "r_minus", "n_plus",
      "n_minus", "init_samples", "betas", "seeds", "steps", "learning_rate",
      "batch_size", "overlap_cosine", "threads"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw FormatError(path, 0, "unknown config key '" + key + "'");
  }

  SweepConfig cfg;
  try {
    cfg.gen.d_in = j.value("d_in", cfg.gen.d_in);
    cfg.gen.d_out = j.value("d_out", cfg.gen.d_out);
    cfg.gen.r_plus = j.value("r_plus", cfg.gen.r_plus);
    cfg.gen.r_minus = j.value("r_minus", cfg.gen.r_minus);
    cfg.gen.n_plus = j.value("n_plus", cfg.gen.n_plus);
    cfg.gen.n_minus = j.value("n_minus", cfg.gen.n_minus);
    cfg.gen.overlap_cosine = j.value("overlap_cosine", cfg.gen.overlap_cosine);
    cfg.rank = j.value("rank", cfg.rank);
    cfg.init_samples = j.value("init_samples", cfg.init_samples);
    cfg.betas = j.value("betas", cfg.betas);
    cfg.seeds = j.value("seeds", cfg.seeds);
    cfg.steps = j.value("steps", cfg.steps);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.threads = j.value("threads", threads);
  } catch (const json::exception& e) {
    throw FormatError(path, 0, std::string("bad config value: ") + e.what());
  }
  if (threads > 1) cfg.threads = threads;
  if (cfg.betas.empty() || cfg.seeds.empty()) {
    throw FormatError(path, 0, "betas and seeds must be non-empty");
  }
  return cfg;
}

void run_sweep(Session& session, const SweepArgs& args) {
  const SweepConfig cfg = parse_sweep_config(args.config, session.globals().threads);
  const SweepReport report = beta_sweep(cfg);
  write_sweep_report(args.out, report);

  std::set<std::string> seen;
  for (const auto& rec : report.records) {
    for (const auto& w : rec.warnings) {
      if (seen.insert(w.code).second) {
        session.warn({w.code, "beta " + format_number(rec.beta) + " seed " +
                                  std::to_string(rec.seed) + ": " + w.message});
      }
    }
  }
  if (!session.quiet()) {
    auto& o = session.out();
    o << "beta      plus_loss      drift          containment\n";
    for (const auto& s : report.summary) {
      o << std::left << std::setw(10) << format_number(s.beta) << std::setw(15)
        << s.mean_plus_loss << std::setw(15) << s.mean_preservation_drift
        << s.mean_containment_drift << '\n';
    }
    o << "report -> " << args.out << '\n';
  }
}

// ------------------------------------------------------------------- fixture

struct FixtureArgs {
  std::string out_dir;
  std::size_t d_in = 48;
  std::size_t d_out = 32;
  std::size_t samples = 64;
  std::size_t tokens = 4;
};

// Pretrained weight plus token-level activation dumps for both tasks, drawn
// from the synthetic two-task generator.
void run_fixture(Session& session, const FixtureArgs& args) {
  if (args.d_in < 2 || args.samples < 1 || args.tokens < 1) {
    throw InvalidArgument("fixture: need d_in >= 2, samples >= 1, tokens >= 1");
  }
  GenConfig gen;
  gen.d_in = args.d_in;
  gen.d_out = args.d_out;
  gen.r_plus = gen.r_minus = std::min<std::size_t>(8, args.d_in / 2);
  gen.n_plus = gen.n_minus = 1;
  gen.seed = session.globals().seed;
  const GeneratedProblem problem = gen_two_task_data(gen);

  const fs::path dir(args.out_dir);
  fs::create_directories(dir);
  save_matrix(dir / "w0.bin", problem.w0);

  Rng rng = make_rng(gen.seed, 0xf1);
  auto dump = [&](const Matrix& u, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
    for (std::size_t s = 0; s < args.samples; ++s) {
      const Matrix x = draw_task_inputs(u, args.tokens, rng);  // tokens × d_in
      write_matrix(out, mat_mul(problem.w0, transpose(x)));    // d_out × tokens
    }
  };
  dump(problem.u_plus, dir / "act_pos.bin");
  dump(problem.u_minus, dir / "act_neg.bin");
  if (!session.quiet()) {
    session.out() << "fixture -> " << dir.string() << " (w0.bin, act_pos.bin, act_neg.bin)\n";
  }
}

}  // namespace

CommandOutcome run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Subspace-constrained low-rank adapter initialization toolkit", "sclora"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions globals;
  app.add_option("--seed", globals.seed, "Seed for every random draw")->capture_default_str();
  app.add_flag("--quiet", globals.quiet, "Suppress informational output");
  app.add_option("--threads", globals.threads, "Worker threads (sweep only)")
      ->check(CLI::PositiveNumber);

  CovarianceArgs cov_args;
  auto* cov_cmd = app.add_subcommand("covariance", "Accumulate an activation dump into a covariance");
  cov_cmd->add_option("--activations", cov_args.activations, "Activation dump (matrix records)")
      ->required();
  cov_cmd->add_option("--out", cov_args.out, "Output covariance file")->required();
  cov_cmd->add_option("--clip", cov_args.clip, "Keep only the first L tokens of each sample")
      ->check(CLI::PositiveNumber);

  SubspaceArgs sub_args;
  auto* sub_cmd = app.add_subcommand("subspace", "Select the reward-maximizing subspace");
  sub_cmd->add_option("--cov-pos", sub_args.cov_pos, "Fine-tune task covariance")->required();
  sub_cmd->add_option("--cov-neg", sub_args.cov_neg, "Preserved task covariance")->required();
  sub_cmd->add_option("--beta", sub_args.beta, "Preservation weight in [0, 1]")->required();
  sub_cmd->add_option("--rank", sub_args.rank, "Subspace rank")->required();
  sub_cmd->add_option("--out", sub_args.out, "Output basis (d_out x r matrix)")->required();

  InitArgs init_args;
  auto* init_cmd = app.add_subcommand("init", "Initialize an adapter pair");
  init_cmd->add_option("--w0", init_args.w0, "Pretrained weight matrix")->required();
  init_cmd->add_option("--scheme", init_args.scheme, "sc-lora | vanilla | pissa")
      ->required()
      ->check(CLI::IsMember({"sc-lora", "vanilla", "pissa"}));
  init_cmd->add_option("--basis", init_args.basis, "Precomputed basis (sc-lora)");
  init_cmd->add_option("--cov-pos", init_args.cov_pos, "Fine-tune task covariance (sc-lora)");
  init_cmd->add_option("--cov-neg", init_args.cov_neg, "Preserved task covariance (sc-lora)");
  init_cmd->add_option("--beta", init_args.beta, "Preservation weight in [0, 1] (sc-lora)");
  init_cmd->add_option("--rank", init_args.rank, "Adapter rank")->required();
  init_cmd->add_option("--out", init_args.out, "Output adapter file")->required();

  VerifyArgs verify_args;
  auto* verify_cmd = app.add_subcommand("verify", "Check adapter invariants against W0");
  verify_cmd->add_option("--adapter", verify_args.adapter, "Adapter file")->required();
  verify_cmd->add_option("--w0", verify_args.w0, "Pretrained weight matrix")->required();

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run the synthetic two-task beta sweep");
  sweep_cmd->add_option("--config", sweep_args.config, "Sweep config (JSON)")->required();
  sweep_cmd->add_option("--out", sweep_args.out, "Report directory")->required();

  FixtureArgs fixture_args;
  auto* fixture_cmd =
      app.add_subcommand("fixture", "Write a synthetic W0 and activation dumps for both tasks");
  fixture_cmd->add_option("--out-dir", fixture_args.out_dir, "Output directory")->required();
  fixture_cmd->add_option("--d-in", fixture_args.d_in, "Input dimension of W0")->capture_default_str();
  fixture_cmd->add_option("--d-out", fixture_args.d_out, "Output dimension of W0")->capture_default_str();
  fixture_cmd->add_option("--samples", fixture_args.samples, "Samples per task")->capture_default_str();
  fixture_cmd->add_option("--tokens", fixture_args.tokens, "Tokens per sample")->capture_default_str();

  std::vector<std::string> argv_storage{"sclora"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return {};
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return {};
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return CommandOutcome{kUsageError, {}};
  }

  Session session(out, err, globals);
  try {
    if (*cov_cmd) run_covariance(session, cov_args);
    if (*sub_cmd) run_subspace(session, sub_args);
    if (*init_cmd) run_init(session, init_args);
    if (*verify_cmd) run_verify(session, verify_args);
    if (*sweep_cmd) run_sweep(session, sweep_args);
    if (*fixture_cmd) run_fixture(session, fixture_args);
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    session.fail(kUsageError);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    session.fail(kUsageError);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    session.fail(kNumericalFailure);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    session.fail(kUsageError);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    session.fail(kNumericalFailure);
  }
  return session.outcome();
}

}  // namespace sclora::cli
