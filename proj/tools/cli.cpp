#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rjbma/archive.hpp"
#include "rjbma/config.hpp"
#include "rjbma/csv.hpp"
#include "rjbma/errors.hpp"
#include "rjbma/plot_data.hpp"
#include "rjbma/posterior.hpp"
#include "rjbma/report.hpp"
#include "rjbma/sampler.hpp"
#include "rjbma/simulator.hpp"

namespace rjbma {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

struct SimulateArgs {
  SimConfig cfg;
  std::string out;
};

struct FitArgs {
  std::string data, outcome = "Y", factor = "trt", config, out_dir;
  CandidateSpec spec;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct SubspaceArgs {
  std::string dir, out;
  double alpha = 0.05;
  double grid = 0.01;
  double pip_cutoff = 0.1;
};

struct PlotArgs {
  std::string dir, out, sample = "fitted", plot = "cred", effect = "exposure_effect";
  std::vector<std::string> fixed;
  PlotDataRequest req;
};

std::map<std::string, double> parse_fixed(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("--fix expects NAME=VALUE, got '" + item + "'");
    const std::string value = item.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size())
      throw ValidationError("--fix " + item.substr(0, eq) + ": cannot parse '" + value + "'");
    out[item.substr(0, eq)] = v;
  }
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian model averaging with free-knot B-splines for exposure-effect heterogeneity",
               "rjbma"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate the synthetic benchmark dataset");
  simulate->add_option("--n", sim.cfg.n, "Number of rows")->capture_default_str();
  simulate->add_option("--seed", sim.cfg.seed, "Random seed")->capture_default_str();
  simulate->add_option("--noise-sd", sim.cfg.noise_sd, "Residual standard deviation")->capture_default_str();
  simulate->add_option("--out", sim.out, "Output CSV")->required();

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Run the sampler and save a fit directory");
  fit->add_option("--data", fa.data, "Input CSV")->required();
  fit->add_option("--outcome", fa.outcome, "Outcome column")->capture_default_str();
  fit->add_option("--factor", fa.factor, "Binary exposure column")->capture_default_str();
  fit->add_option("--splinevars", fa.spec.spline_vars, "Continuous candidates")->delimiter(',');
  fit->add_option("--binaryvars", fa.spec.binary_vars, "Binary candidates")->delimiter(',');
  fit->add_option("--inter", fa.spec.interaction_vars, "Candidates for interaction with the exposure")
      ->delimiter(',');
  fit->add_option("--config", fa.config, "key = value file of sampler settings and priors");
  fit->add_option("--seed", fa.seed, "Master seed")->capture_default_str();
  fit->add_option("--threads", fa.threads, "Worker threads (0: one per chain)")->capture_default_str();
  fit->add_option("--out-dir", fa.out_dir, "Fit directory to create")->required();

  std::string summary_dir;
  auto* summary = app.add_subcommand("summary", "Print the model summary of a fit");
  summary->add_option("fit-dir", summary_dir, "Fit directory")->required();

  SubspaceArgs sa;
  auto* subspace = app.add_subcommand("subspace", "Describe where the exposure effect is positive");
  subspace->add_option("fit-dir", sa.dir, "Fit directory")->required();
  subspace->add_option("--alpha", sa.alpha, "Quantile level")->capture_default_str();
  subspace->add_option("--grid", sa.grid, "Grid step on the rescaled axis")->capture_default_str();
  subspace->add_option("--pip-cutoff", sa.pip_cutoff, "Minimum PIP of selected variables")
      ->capture_default_str();
  subspace->add_option("--out", sa.out, "Per-row flags CSV (default <fit-dir>/subspace.csv)");

  std::string diagnose_dir;
  bool diagnose_all = false;
  auto* diagnose = app.add_subcommand("diagnose", "Print convergence diagnostics");
  diagnose->add_option("fit-dir", diagnose_dir, "Fit directory")->required();
  diagnose->add_flag("--all", diagnose_all, "List the R-hat of every row's exposure effect");

  PlotArgs pa;
  auto* plot = app.add_subcommand("plotdata", "Write the data behind a posterior plot as CSV");
  plot->add_option("fit-dir", pa.dir, "Fit directory")->required();
  plot->add_option("--sample-type", pa.sample, "estimand, fitted or predictive")->capture_default_str();
  plot->add_option("--plot-type", pa.plot, "hist, trace or cred")->capture_default_str();
  plot->add_option("--effect-type", pa.effect, "outcome or exposure_effect")->capture_default_str();
  plot->add_option("--variables", pa.req.variables, "Variables or parameters")->delimiter(',');
  plot->add_option("--facet-by", pa.req.facet_by, "Binary variables to stratify by")->delimiter(',');
  plot->add_option("--fix", pa.fixed, "Covariate value NAME=VALUE (repeatable)");
  plot->add_option("--pip-cutoff", pa.req.pip_cutoff, "PIP threshold for auto-selection")
      ->capture_default_str();
  plot->add_option("--level", pa.req.level, "Credible level")->capture_default_str();
  plot->add_option("--grid", pa.req.grid_resolution, "Grid step on the rescaled axis")
      ->capture_default_str();
  plot->add_option("--seed", pa.req.seed, "Seed for predictive noise")->capture_default_str();
  plot->add_option("--out", pa.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    err << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    err << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (e.get_exit_code() != 0) err << "run with --help for usage\n";
    return e.get_exit_code() == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) {
      validate(sim.cfg);
      write_csv(sim.out, rjbma::simulate(sim.cfg));
      err << "wrote " << sim.cfg.n << " rows to " << sim.out << '\n';
    } else if (*fit) {
      auto [mcmc, priors] = fa.config.empty() ? default_specs() : parse_config(fa.config);
      const Dataset data = load_csv(fa.data, fa.outcome, fa.factor, fa.spec);
      FitOptions options;
      options.max_threads = fa.threads;
      const FitResult result = run_rjmcmc(data, fa.spec, mcmc, priors, fa.seed, options);
      save_fit(result, fa.out_dir);
      err << "saved " << result.total_draws() << " draws from " << result.chains.size()
          << " chains to " << fa.out_dir << " (" << result.wall_time_seconds << " s)\n";
    } else if (*summary) {
      const FitResult result = load_fit(summary_dir);
      out << summary_text(result, (fs::path(summary_dir) / "data.csv").string());
    } else if (*subspace) {
      const FitResult result = load_fit(sa.dir);
      const SubspaceReport report = effective_subspace(result, sa.alpha, sa.grid, sa.pip_cutoff);
      out << subspace_text(report);
      const fs::path flags = sa.out.empty() ? fs::path(sa.dir) / "subspace.csv" : fs::path(sa.out);
      write_file(flags, subspace_flags_csv(report));
      err << "wrote per-row flags to " << flags.string() << '\n';
    } else if (*diagnose) {
      out << diagnose_text(load_fit(diagnose_dir), diagnose_all);
    } else if (*plot) {
      pa.req.sample_type = sample_type_from_string(pa.sample);
      pa.req.plot_type = plot_type_from_string(pa.plot);
      pa.req.effect_type = effect_type_from_string(pa.effect);
      pa.req.fixed = parse_fixed(pa.fixed);
      validate(pa.req);
      const FitResult result = load_fit(pa.dir);
      std::vector<std::string> notes;
      emit_plot_data(result, pa.req, pa.out, &notes);
      for (const auto& n : notes) err << n << '\n';
      err << "wrote " << pa.out << '\n';
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}

}  // namespace rjbma
