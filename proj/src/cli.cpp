#include "cohaudit/cli.hpp"

#include "cohaudit/matrix_io.hpp"
#include "cohaudit/parallel.hpp"
#include "cohaudit/report.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

namespace cohaudit {

namespace {

#ifndef COHAUDIT_VERSION
#define COHAUDIT_VERSION "0.0.0"
#endif

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MatrixArgs {
  std::string matrix;
  std::string matrix_format;  // "", "csv", "binary"
  std::string ensemble;
  Index rows = 0;
  Index cols = 0;
  std::uint64_t seed = 0;
};

struct CommonArgs {
  MatrixArgs source;
  std::string out;
  std::string format = "json";
  unsigned threads = 0;
};

void add_matrix_options(CLI::App* cmd, MatrixArgs& m) {
  cmd->add_option("--matrix", m.matrix, "Matrix file (CSV or CAMX binary)");
  cmd->add_option("--matrix-format", m.matrix_format, "Force the matrix file format")
      ->check(CLI::IsMember({"csv", "binary"}));
  cmd->add_option("--ensemble", m.ensemble, "Generate from an ensemble")
      ->check(CLI::IsMember({"gaussian", "bernoulli", "partial_fourier", "partial-fourier"}));
  cmd->add_option("--rows", m.rows, "Rows n of the generated matrix");
  cmd->add_option("--cols", m.cols, "Columns N of the generated matrix");
}

void add_common_options(CLI::App* cmd, CommonArgs& c) {
  add_matrix_options(cmd, c.source);
  cmd->add_option("--seed", c.source.seed, "Seed for every random stream");
  cmd->add_option("--out", c.out, "Output file (stdout when omitted)");
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
}

MeasurementMatrix load_source(const MatrixArgs& m) {
  const bool from_file = !m.matrix.empty();
  const bool from_ensemble = !m.ensemble.empty();
  if (from_file == from_ensemble) {
    throw UsageError("give exactly one of --matrix or --ensemble/--rows/--cols/--seed");
  }
  if (from_file) {
    const MatrixFormat fmt = m.matrix_format.empty() ? format_from_path(m.matrix)
                             : m.matrix_format == "csv" ? MatrixFormat::csv
                                                        : MatrixFormat::binary;
    return normalize_columns(load_matrix(m.matrix, fmt));
  }
  if (m.rows < 1 || m.cols < 1) throw UsageError("--ensemble needs positive --rows and --cols");
  return generate({ensemble_from_string(m.ensemble), m.rows, m.cols, m.seed});
}

Json matrix_meta(const MeasurementMatrix& m, const MatrixArgs& args) {
  Json meta{{"rows", m.rows()},
            {"cols", m.cols()},
            {"ensemble", std::string(to_string(m.ensemble()))},
            {"source", args.matrix.empty() ? std::string("generated") : args.matrix}};
  meta["seed"] = m.seed() ? Json(*m.seed()) : Json(nullptr);
  return meta;
}

Json header(const std::string& command) {
  return {{"schema_version", kReportSchemaVersion},
          {"tool_version", COHAUDIT_VERSION},
          {"command", command}};
}

void emit(const CommonArgs& c, const std::string& text, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
  } else {
    write_text(c.out, text);
  }
}

std::vector<double> parse_double_list(const std::string& text, const char* flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": bad number '" + item + "'");
    }
  }
  if (values.empty()) throw UsageError(std::string(flag) + " must not be empty");
  return values;
}

// Coherence profile, fit and bounds for one matrix. Bounds are "degenerate"
// when the measured μ or σ̂ is zero.
struct Audit {
  CoherenceProfile profile;
  Json normality;
  Json bounds;
  std::optional<BoundReport<double>> report;
};

Audit audit_matrix(const MeasurementMatrix& m, Index bins) {
  Audit a;
  if (m.cols() < 2) throw InsufficientDataError("audit needs at least two columns");
  if (m.cols() > kDefaultStreamThreshold) {
    a.profile = profile_streaming(m.data(), bins);
    a.normality = "not_computed_streaming";
  } else {
    const auto sample = coherence_sample(m);
    a.profile = profile(sample, bins);
    if (sample.count() >= 100) {
      a.normality = to_json(normality_check(sample));
    } else {
      a.normality = "insufficient_data";
    }
  }
  const double mu = std::min(a.profile.mutual_coherence, 1.0);
  if (mu > 0.0 && a.profile.std > 0.0) {
    a.report = sparsity_bounds(mu, a.profile.std);
    a.bounds = to_json(*a.report);
  } else {
    a.bounds = "degenerate";
  }
  return a;
}

// ---------------------------------------------------------------------------

int cmd_audit(const CommonArgs& c, Index bins, std::ostream& out) {
  const MeasurementMatrix m = load_source(c.source);
  const Audit a = audit_matrix(m, bins);
  if (c.format == "csv") {
    emit(c, histogram_csv(a.profile), out);
    return kExitSuccess;
  }
  Json report = header("audit");
  report["matrix"] = matrix_meta(m, c.source);
  report["profile"] = to_json(a.profile);
  report["normality"] = a.normality;
  report["bounds"] = a.bounds;
  report["config"] = {{"bins", bins}};
  emit(c, canonical_json(report), out);
  if (!c.out.empty()) {
    out << "audit " << m.rows() << "x" << m.cols() << ": mu=" << format_number(a.profile.mutual_coherence)
        << " mean=" << format_number(a.profile.mean) << " sigma=" << format_number(a.profile.std);
    if (a.report) {
      out << " k<=" << a.report->worst_case_floor << " (worst case), " << a.report->heuristic_floor
          << " (heuristic), " << a.report->bernstein_floor << " (bernstein), "
          << a.report->operator_floor << " (operator), " << a.report->bpdn_stable_floor
          << " (bpdn)";
    } else {
      out << " bounds=degenerate";
    }
    out << "\n";
  }
  return kExitSuccess;
}

struct VerifyArgs {
  Index k = 0;
  Index trials = 0;
  std::string t_grid = "0.5,1,2";
  std::string coeff_model = "gaussian";
  std::string ratios_csv;
  std::string spectral_csv;
};

int cmd_verify(const CommonArgs& c, const VerifyArgs& v, std::ostream& out) {
  if (v.k < 1) throw UsageError("--k must be >= 1");
  if (v.trials < 1) throw UsageError("--trials must be >= 1");
  const std::vector<double> multipliers = parse_double_list(v.t_grid, "--t-grid");
  for (double t : multipliers) {
    if (!(t > 0.0)) throw UsageError("--t-grid multipliers must be positive");
  }
  const CoefficientModel model = coefficient_model_from_string(v.coeff_model);
  const MeasurementMatrix m = load_source(c.source);
  if (v.k > m.cols()) throw UsageError("--k exceeds the number of columns");
  const Audit a = audit_matrix(m, 0);
  const double sigma = a.profile.std;
  const unsigned threads = resolve_threads(c.threads);

  RatioSample ratios = sample_ratios(m, v.k, v.trials, c.source.seed, model, threads);
  const SpectralSample spectral = sample_spectral(m, v.k, v.trials, c.source.seed, threads);

  const double g_ratio = rip_width(v.k, sigma, RipVariant::bernstein).g;
  const double g_spec = rip_width(v.k, sigma, RipVariant::operator_bernstein).g;
  Json ratio_json{{"g", g_ratio}, {"band_frequency", band_frequency(ratios, g_ratio)}};
  Json spectral_json{{"g", g_spec}};
  double spec_mean = 0.0;
  double spec_max = 0.0;
  for (double s : spectral.values) {
    spec_mean += s;
    spec_max = std::max(spec_max, s);
  }
  spectral_json["mean"] = spec_mean / static_cast<double>(spectral.values.size());
  spectral_json["max"] = spec_max;

  bool all_ok = true;
  if (v.k >= 2 && sigma > 0.0) {
    std::vector<double> grid_r;
    std::vector<double> grid_s;
    for (double f : multipliers) {
      grid_r.push_back(f * g_ratio);
      grid_s.push_back(f * g_spec);
    }
    const Index k = v.k;
    const auto ratio_rows = tail_check(ratios, grid_r, [=](double t) {
      return quadratic_form_tail_bound(t, k, sigma, 1.0);
    });
    const auto spec_rows = tail_check(spectral, grid_s, [=](double t) {
      return operator_tail_bound(t, k, sigma);
    });
    Json rr = Json::array();
    Json sr = Json::array();
    for (const auto& row : ratio_rows) {
      rr.push_back(to_json(row));
      all_ok = all_ok && row.ok;
    }
    for (const auto& row : spec_rows) {
      sr.push_back(to_json(row));
      all_ok = all_ok && row.ok;
    }
    ratio_json["tail_check"] = rr;
    spectral_json["tail_check"] = sr;
  } else {
    ratio_json["tail_check"] = "skipped";
    spectral_json["tail_check"] = "skipped";
  }

  if (!v.ratios_csv.empty()) write_text(v.ratios_csv, values_csv("ratio", ratios.values));
  if (!v.spectral_csv.empty()) write_text(v.spectral_csv, values_csv("deviation", spectral.values));

  Json report = header("verify");
  report["matrix"] = matrix_meta(m, c.source);
  report["config"] = {{"k", v.k},
                      {"trials", v.trials},
                      {"t_grid", multipliers},
                      {"coefficient_model", v.coeff_model}};
  report["profile"] = {{"mutual_coherence", a.profile.mutual_coherence},
                       {"mean", a.profile.mean},
                       {"std", sigma}};
  report["ratio"] = ratio_json;
  report["spectral"] = spectral_json;
  report["pass"] = all_ok;
  emit(c, canonical_json(report), out);
  if (!c.out.empty()) {
    out << "verify k=" << v.k << " trials=" << v.trials << ": band_frequency="
        << format_number(ratio_json["band_frequency"].get<double>())
        << (all_ok ? " tail checks ok" : " TAIL CHECK VIOLATIONS") << "\n";
  }
  return all_ok ? kExitSuccess : kExitVerifyFailed;
}

struct PhaseArgs {
  std::string k_list;
  std::string solver;
  Index trials = -1;
  double noise = 0.0;
  bool fresh_matrix = false;
  std::string csv_out;
};

int cmd_phase(const CommonArgs& c, const PhaseArgs& p, std::ostream& out) {
  if (p.trials < 1) throw UsageError("--trials must be >= 1");
  if (p.noise < 0.0) throw UsageError("--noise must be non-negative");
  SolverKind kind;
  try {
    kind = solver_from_string(p.solver);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  std::vector<Index> ks;
  for (double v : parse_double_list(p.k_list, "--k-list")) {
    if (v < 0 || v != std::floor(v)) throw UsageError("--k-list entries must be non-negative integers");
    ks.push_back(static_cast<Index>(v));
  }
  if (!std::is_sorted(ks.begin(), ks.end())) throw UsageError("--k-list must be ascending");

  const MeasurementMatrix m = load_source(c.source);
  SolverSpec solver;
  solver.kind = kind;
  MatrixSource source = m;
  if (p.fresh_matrix) {
    if (c.source.ensemble.empty()) throw UsageError("--fresh-matrix needs --ensemble");
    source = EnsembleSpec{ensemble_from_string(c.source.ensemble), c.source.rows, c.source.cols,
                          c.source.seed};
  }
  const auto curve =
      phase_curve(source, ks, solver, p.trials, p.noise, c.source.seed, resolve_threads(c.threads));
  const std::string csv = phase_csv(curve);
  if (!p.csv_out.empty()) write_text(p.csv_out, csv);
  if (c.format == "csv") {
    emit(c, csv, out);
    return kExitSuccess;
  }
  Json points = Json::array();
  for (const auto& pt : curve) points.push_back(to_json(pt));
  const Audit a = audit_matrix(m, 0);
  Json report = header("phase");
  report["matrix"] = matrix_meta(m, c.source);
  report["config"] = {{"solver", p.solver},
                      {"k_list", ks},
                      {"trials", p.trials},
                      {"noise", p.noise},
                      {"fresh_matrix", p.fresh_matrix}};
  report["curve"] = points;
  report["profile"] = {{"mutual_coherence", a.profile.mutual_coherence},
                       {"mean", a.profile.mean},
                       {"std", a.profile.std}};
  report["bounds"] = a.bounds;
  emit(c, canonical_json(report), out);
  if (!c.out.empty()) {
    for (const auto& pt : curve) {
      out << "k=" << pt.k << " rate=" << format_number(pt.rate) << " ["
          << format_number(pt.ci_low) << ", " << format_number(pt.ci_high) << "]\n";
    }
  }
  return kExitSuccess;
}

struct SeparateArgs {
  std::string preset;
  Index n = 128;
  std::string matrix_b;
  Index n_x = 0;
  Index n_e = 0;
  Index trials = 1;
  double noise = 0.0;
  Index rip_trials = 0;
  std::string features_csv;
  std::string csv_out;
};

int cmd_separate(const CommonArgs& c, const SeparateArgs& s, std::ostream& out) {
  if (s.trials < 1) throw UsageError("--trials must be >= 1");
  if (s.n_x < 1 || s.n_e < 1) throw UsageError("--nx and --ne must be >= 1");
  if (s.noise < 0.0) throw UsageError("--noise must be non-negative");
  std::optional<MeasurementMatrix> d;
  std::optional<MeasurementMatrix> b;
  Json source;
  if (!s.preset.empty()) {
    if (s.preset != "spikes-fourier") throw UsageError("unknown preset '" + s.preset + "'");
    if (!c.source.matrix.empty() || !c.source.ensemble.empty() || !s.matrix_b.empty()) {
      throw UsageError("--preset excludes --matrix/--ensemble/--matrix-b");
    }
    if (s.n < 1) throw UsageError("--n must be positive");
    auto [spikes, sines] = spikes_fourier_preset(s.n);
    d = std::move(spikes);
    b = std::move(sines);
    source = {{"preset", s.preset}, {"n", s.n}};
  } else {
    if (s.matrix_b.empty()) throw UsageError("give --preset or both --matrix and --matrix-b");
    d = load_source(c.source);
    b = normalize_columns(load_matrix(s.matrix_b, format_from_path(s.matrix_b)));
    source = {{"d", matrix_meta(*d, c.source)}, {"b", s.matrix_b}};
  }
  if (d->rows() != b->rows()) {
    throw DimensionError("D has " + std::to_string(d->rows()) + " rows but B has " +
                         std::to_string(b->rows()));
  }
  if (s.n_x > d->cols() || s.n_e > b->cols()) {
    throw UsageError("--nx/--ne exceed the dictionary sizes");
  }
  const SeparationStats stats = separation_statistics(*d, *b);
  const auto condition =
      separation_condition(stats.sigma_d, stats.sigma_b, stats.sigma_mu_m, s.n_x, s.n_e);

  std::vector<SeparationTrial> trials(static_cast<std::size_t>(s.trials));
  parallel_for(s.trials, resolve_threads(c.threads), [&](Index t) {
    trials[static_cast<std::size_t>(t)] =
        separation_trial(*d, *b, s.n_x, s.n_e, s.noise,
                         derive_seed(c.source.seed, "separate:trial", static_cast<std::uint64_t>(t)),
                         stats);
  });
  double mean_x = 0.0;
  double mean_e = 0.0;
  double max_x = 0.0;
  double max_e = 0.0;
  Index successes = 0;
  std::string csv = "trial,x_relative_error,e_relative_error,success\n";
  for (std::size_t t = 0; t < trials.size(); ++t) {
    const auto& tr = trials[t];
    mean_x += tr.x_relative_error;
    mean_e += tr.e_relative_error;
    max_x = std::max(max_x, tr.x_relative_error);
    max_e = std::max(max_e, tr.e_relative_error);
    successes += tr.success ? 1 : 0;
    csv += std::to_string(t) + "," + format_number(tr.x_relative_error) + "," +
           format_number(tr.e_relative_error) + "," + (tr.success ? "1" : "0") + "\n";
  }
  const double count = static_cast<double>(trials.size());
  mean_x /= count;
  mean_e /= count;
  if (!s.csv_out.empty()) write_text(s.csv_out, csv);
  if (!s.features_csv.empty()) {
    const auto& first = trials.front().result;
    std::string f = "feature_d,feature_b\n";
    for (Index i = 0; i < first.feature_d.size(); ++i) {
      f += format_number(first.feature_d(i)) + "," + format_number(first.feature_b(i)) + "\n";
    }
    write_text(s.features_csv, f);
  }
  if (c.format == "csv") {
    emit(c, csv, out);
    return kExitSuccess;
  }

  Json report = header("separate");
  report["source"] = source;
  report["config"] = {{"n_x", s.n_x}, {"n_e", s.n_e}, {"trials", s.trials}, {"noise", s.noise}};
  report["stats"] = to_json(stats);
  report["condition"] = to_json(condition);
  const WilsonInterval ci = wilson_interval(successes, s.trials);
  report["results"] = {{"mean_x_relative_error", mean_x},
                       {"mean_e_relative_error", mean_e},
                       {"max_x_relative_error", max_x},
                       {"max_e_relative_error", max_e},
                       {"successes", successes},
                       {"success_rate", static_cast<double>(successes) / count},
                       {"ci_low", ci.low},
                       {"ci_high", ci.high}};
  if (s.rip_trials > 0) {
    report["joint_rip"] = to_json(joint_rip_check(*d, *b, s.n_x, s.n_e, s.rip_trials,
                                                  c.source.seed, resolve_threads(c.threads)));
  }
  emit(c, canonical_json(report), out);
  if (!c.out.empty()) {
    out << "separate n_x=" << s.n_x << " n_e=" << s.n_e << ": mean x error "
        << format_number(mean_x) << ", mean e error " << format_number(mean_e) << ", margin "
        << format_number(condition.margin) << (condition.ok ? " (ok)" : " (not ok)") << "\n";
  }
  return kExitSuccess;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coherence audit for sparse-recovery measurement matrices", "cohaudit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", COHAUDIT_VERSION);

  CommonArgs common;
  Index bins = 0;
  VerifyArgs verify;
  PhaseArgs phase;
  SeparateArgs sep;

  auto* audit = app.add_subcommand("audit", "Coherence profile, normality fit and sparsity bounds");
  add_common_options(audit, common);
  audit->add_option("--bins", bins, "Histogram bins (0 = square-root rule)");

  auto* ver = app.add_subcommand("verify", "Monte Carlo check of the statistical RIP tail bounds");
  add_common_options(ver, common);
  ver->add_option("--k", verify.k, "Sparsity")->required();
  ver->add_option("--trials", verify.trials, "Random supports")->required();
  ver->add_option("--t-grid", verify.t_grid, "Comma list of multiples of the RIP width");
  ver->add_option("--coeff-model", verify.coeff_model, "gaussian or rademacher")
      ->check(CLI::IsMember({"gaussian", "rademacher"}));
  ver->add_option("--ratios-csv", verify.ratios_csv, "Export the ratio sample");
  ver->add_option("--spectral-csv", verify.spectral_csv, "Export the spectral sample");

  auto* ph = app.add_subcommand("phase", "Empirical recovery rate as a function of sparsity");
  add_common_options(ph, common);
  ph->add_option("--k-list", phase.k_list, "Ascending comma list of sparsities")->required();
  ph->add_option("--solver", phase.solver, "omp, iht, cosamp or bpdn")->required();
  ph->add_option("--trials", phase.trials, "Trials per sparsity")->required();
  ph->add_option("--noise", phase.noise, "Gaussian noise standard deviation");
  ph->add_flag("--fresh-matrix", phase.fresh_matrix, "Draw a new ensemble matrix per trial");
  ph->add_option("--csv-out", phase.csv_out, "Also write the curve as CSV");

  auto* sp = app.add_subcommand("separate", "Two-dictionary separation experiments");
  add_common_options(sp, common);
  sp->add_option("--preset", sep.preset, "Built-in dictionary pair (spikes-fourier)");
  sp->add_option("--n", sep.n, "Signal length for the preset");
  sp->add_option("--matrix-b", sep.matrix_b, "Second dictionary file");
  sp->add_option("--nx", sep.n_x, "Sparsity in D")->required();
  sp->add_option("--ne", sep.n_e, "Sparsity in B")->required();
  sp->add_option("--trials", sep.trials, "Number of random trials");
  sp->add_option("--noise", sep.noise, "Gaussian noise standard deviation");
  sp->add_option("--rip-trials", sep.rip_trials, "Also sample the joint RIP band");
  sp->add_option("--features-csv", sep.features_csv, "Features of the first trial as CSV");
  sp->add_option("--csv-out", sep.csv_out, "Per-trial errors as CSV");

  std::vector<const char*> argv{"cohaudit"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*audit) return cmd_audit(common, bins, out);
    if (*ver) return cmd_verify(common, verify, out);
    if (*ph) return cmd_phase(common, phase, out);
    if (*sp) return cmd_separate(common, sep, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace cohaudit
