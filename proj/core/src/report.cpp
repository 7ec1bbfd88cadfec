#include "rjbma/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "rjbma/csv.hpp"
#include "rjbma/diagnostics.hpp"

namespace rjbma {

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v == 0.0 ? 0.0 : v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string optional3(const std::optional<double>& v) { return v ? fixed3(*v) : "NA"; }

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

// Right-aligned columns after a left-aligned name column.
std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t j = 0; j < header.size(); ++j) width[j] = header[j].size();
  for (const auto& r : rows)
    for (std::size_t j = 0; j < r.size(); ++j) width[j] = std::max(width[j], r[j].size());
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s = pad_right(cells[0], width[0]);
    for (std::size_t j = 1; j < cells.size(); ++j) s += " " + pad_left(cells[j], width[j]);
    s.erase(s.find_last_not_of(' ') + 1);
    os << s << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

std::vector<std::string> summary_cells(const SummaryRow& r) {
  return {r.name,        fixed3(r.estimate),     fixed3(r.est_error), fixed3(r.lower95),
          fixed3(r.upper95), optional3(r.eff_sample), optional3(r.rhat), fixed3(r.pip)};
}

const std::vector<std::string> kSummaryHeader{
    "", "Estimate", "Est.Error", "l-95% CI", "u-95% CI", "Eff.Sample", "Rhat", "PIP"};

}  // namespace

std::string model_formula(const FitResult& fit) {
  std::vector<std::string> main, inter;
  for (const auto& info : fit.catalog.terms()) {
    std::string label = info.kind == TermKind::spline ? "fbs(" + info.variable + ")" : info.variable;
    if (info.role == TermRole::prognostic)
      main.push_back(label);
    else
      inter.push_back(label + ":" + fit.data.exposure_name);
  }
  main.push_back(fit.data.exposure_name);
  std::string out = fit.data.outcome_name + " ~ ";
  for (std::size_t i = 0; i < main.size(); ++i) out += (i ? " + " : "") + main[i];
  if (!inter.empty()) {
    out += " + \n    ";
    for (std::size_t i = 0; i < inter.size(); ++i) out += (i ? " + " : "") + inter[i];
  }
  return out;
}

std::string summary_text(const FitResult& fit, const std::string& data_label) {
  const SummaryTable table = summary_table(fit);
  std::ostringstream os;
  os << "Model Information:\n"
     << "Formula:\n"
     << model_formula(fit) << '\n'
     << "Note: fbs() indicates a free-knot B-spline.\n"
     << "Data: " << data_label << '\n'
     << "Number of observations: " << fit.data.n() << "\n\n";

  os << "MCMC Sampler Arguments:\n"
     << "  - iter: " << fit.mcmc.iter << '\n'
     << "  - warmup: " << fit.mcmc.warmup << '\n'
     << "  - thin: " << fit.mcmc.thin << '\n'
     << "  - chains: " << fit.mcmc.chains << "\n\n";

  os << "Parameter Estimates:\n\n" << "Non-spline Parameters:\n";
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : table.rows) rows.push_back(summary_cells(r));
  os << render_table(kSummaryHeader, rows) << '\n'
     << "PIP = posterior inclusion probability\n\n"
     << "Gaussian Family Specific Parameters:\n"
     << render_table(kSummaryHeader, {summary_cells(table.sigma)});

  if (!table.spline_pips.empty()) {
    os << "\nPosterior Inclusion Probabilities for Splines:\n";
    std::string names, values;
    for (const auto& [name, p] : table.spline_pips) {
      const std::string v = fixed3(p);
      const std::size_t w = std::max(name.size(), v.size());
      names += pad_left(name, w) + " ";
      values += pad_left(v, w) + " ";
    }
    names.pop_back();
    values.pop_back();
    os << names << '\n' << values << '\n';
  }
  return os.str();
}

std::string subspace_text(const SubspaceReport& report) {
  return "Effective subspace descriptions:\n\n" + describe(report) + '\n';
}

std::string subspace_flags_csv(const SubspaceReport& report) {
  std::string out = "row,quantile,in_subspace\n";
  for (std::size_t i = 0; i < report.quantiles.size(); ++i)
    out += std::to_string(i + 1) + ',' + format_double(report.quantiles[i]) + ',' +
           (report.in_subspace[i] ? "1" : "0") + '\n';
  return out;
}

std::string diagnose_text(const FitResult& fit, bool all_rows) {
  const auto r = rhats(fit);
  std::ostringstream os;
  os << "Convergence diagnostics (" << fit.chains.size() << " chains, "
     << (fit.chains.empty() ? 0 : fit.chains.front().draws.size()) << " draws each):\n";

  std::vector<std::vector<std::string>> rows;
  for (const std::string& name : {std::string("intercept"), fit.data.exposure_name, std::string("sigma")}) {
    const ChainMatrix cm = scalar_chains(fit, name);
    const auto e = cm.draws() >= 4 ? ess(cm) : std::nullopt;
    rows.push_back({name, optional3(r.at(name)), optional3(e)});
  }
  os << render_table({"", "Rhat", "Eff.Sample"}, rows) << '\n';

  std::vector<double> gamma;
  std::vector<std::vector<std::string>> gamma_rows;
  for (std::size_t i = 0; i < fit.data.n(); ++i) {
    const std::string name = "gamma[" + std::to_string(i + 1) + "]";
    const auto& v = r.at(name);
    if (v) gamma.push_back(*v);
    if (all_rows) gamma_rows.push_back({name, optional3(v)});
  }
  os << "Individual exposure effects (" << fit.data.n() << " rows):\n";
  if (gamma.empty()) {
    os << "  Rhat undefined for every row\n";
  } else {
    std::sort(gamma.begin(), gamma.end());
    const auto above = std::count_if(gamma.begin(), gamma.end(), [](double v) { return v > 1.05; });
    os << "  median Rhat: " << fixed3(quantile_sorted(gamma, 0.5)) << '\n'
       << "  max Rhat: " << fixed3(gamma.back()) << '\n'
       << "  rows with Rhat > 1.05: " << above << '\n';
  }
  if (all_rows) os << render_table({"", "Rhat"}, gamma_rows);

  os << "\nAcceptance rates:\n";
  std::vector<std::vector<std::string>> acc;
  std::vector<std::string> header{""};
  for (std::size_t c = 0; c < fit.chains.size(); ++c) header.push_back("chain " + std::to_string(c + 1));
  for (std::size_t k = 0; k < kMoveKindCount; ++k) {
    const auto kind = static_cast<MoveKind>(k);
    std::vector<std::string> row{std::string(to_string(kind))};
    for (const auto& chain : fit.chains)
      row.push_back(chain.acceptance.attempted[k] ? fixed3(chain.acceptance.rate(kind)) : "NA");
    acc.push_back(std::move(row));
  }
  os << render_table(header, acc);
  return os.str();
}

}  // namespace rjbma
