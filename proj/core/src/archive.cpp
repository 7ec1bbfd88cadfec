#include "rjbma/archive.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rjbma/csv.hpp"
#include "rjbma/errors.hpp"

namespace rjbma {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

json parse_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string chain_file(std::size_t k) { return "chain_" + std::to_string(k + 1) + ".jsonl"; }
std::string scalar_file(std::size_t k) {
  return "chain_" + std::to_string(k + 1) + "_scalars.csv";
}

json draw_record(const ModelState& s, const TermCatalog& catalog, int chain, int iteration) {
  json included = json::array();
  json binary = json::object();
  json splines = json::object();
  for (std::size_t t = 0; t < catalog.size(); ++t) {
    included.push_back(s.included(t));
    if (!s.included(t)) continue;
    const auto& value = *s.terms[t];
    if (catalog[t].kind == TermKind::binary) {
      binary[catalog[t].name] = value.coefficients.at(0);
    } else {
      splines[catalog[t].name] = {{"knots", value.knots.interior},
                                  {"coefficients", value.coefficients}};
    }
  }
  return {{"chain", chain},
          {"iteration", iteration},
          {"intercept", s.intercept},
          {"exposure_effect", s.exposure_effect},
          {"sigma", s.sigma_eps},
          {"included", included},
          {"binary", binary},
          {"splines", splines}};
}

ModelState parse_record(const json& r, const TermCatalog& catalog, int degree) {
  ModelState s;
  s.intercept = r.at("intercept").get<double>();
  s.exposure_effect = r.at("exposure_effect").get<double>();
  s.sigma_eps = r.at("sigma").get<double>();
  const auto& included = r.at("included");
  if (included.size() != catalog.size()) throw IoError("inclusion flags do not match the candidates");
  s.terms.resize(catalog.size());
  for (std::size_t t = 0; t < catalog.size(); ++t) {
    if (!included.at(t).get<bool>()) continue;
    TermValue value;
    value.knots.degree = degree;
    if (catalog[t].kind == TermKind::binary) {
      value.coefficients = {r.at("binary").at(catalog[t].name).get<double>()};
    } else {
      const auto& sp = r.at("splines").at(catalog[t].name);
      value.knots.interior = sp.at("knots").get<std::vector<double>>();
      value.coefficients = sp.at("coefficients").get<std::vector<double>>();
    }
    s.terms[t] = std::move(value);
  }
  return s;
}

json to_json(const McmcSpecs& m) {
  return {{"iter", m.iter},       {"warmup", m.warmup},   {"thin", m.thin},
          {"chains", m.chains},   {"sigma_v", m.sigma_v}, {"bma", m.bma}};
}

json to_json(const PriorParams& p) {
  return {{"lambda_1", p.lambda_1}, {"lambda_2", p.lambda_2}, {"a_0", p.a_0},
          {"b_0", p.b_0},           {"degree", p.degree},     {"k_max", p.k_max},
          {"w", p.w},               {"sigma_B", p.sigma_B}};
}

McmcSpecs mcmc_from(const json& j) {
  McmcSpecs m;
  m.iter = j.at("iter").get<int>();
  m.warmup = j.at("warmup").get<int>();
  m.thin = j.at("thin").get<int>();
  m.chains = j.at("chains").get<int>();
  m.sigma_v = j.at("sigma_v").get<double>();
  m.bma = j.at("bma").get<bool>();
  return m;
}

PriorParams priors_from(const json& j) {
  PriorParams p;
  p.lambda_1 = j.at("lambda_1").get<double>();
  p.lambda_2 = j.at("lambda_2").get<double>();
  p.a_0 = j.at("a_0").get<double>();
  p.b_0 = j.at("b_0").get<double>();
  p.degree = j.at("degree").get<int>();
  p.k_max = j.at("k_max").get<int>();
  p.w = j.at("w").get<double>();
  p.sigma_B = j.at("sigma_B").get<double>();
  return p;
}

json counts_json(const std::array<std::uint64_t, kMoveKindCount>& counts) {
  json j = json::object();
  for (std::size_t k = 0; k < kMoveKindCount; ++k)
    j[std::string(to_string(static_cast<MoveKind>(k)))] = counts[k];
  return j;
}

std::array<std::uint64_t, kMoveKindCount> counts_from(const json& j) {
  std::array<std::uint64_t, kMoveKindCount> counts{};
  for (const auto& [name, value] : j.items())
    counts[static_cast<std::size_t>(move_kind_from_string(name))] = value.get<std::uint64_t>();
  return counts;
}

}  // namespace

std::vector<std::string> chain_file_names(int chains) {
  std::vector<std::string> out;
  for (int k = 0; k < chains; ++k) out.push_back(chain_file(static_cast<std::size_t>(k)));
  return out;
}

std::string scalar_csv(const FitResult& fit, std::size_t chain) {
  const ChainResult& c = fit.chains.at(chain);
  std::string out = "chain,iteration,intercept," + fit.data.exposure_name + ",sigma";
  for (const auto& info : fit.catalog.terms()) out += "," + info.name;
  out += '\n';
  for (std::size_t d = 0; d < c.draws.size(); ++d) {
    const ModelState& s = c.draws[d];
    out += std::to_string(c.chain_index + 1) + ',' + std::to_string(c.iterations[d]) + ',' +
           format_double(s.intercept) + ',' + format_double(s.exposure_effect) + ',' +
           format_double(s.sigma_eps);
    for (std::size_t t = 0; t < fit.catalog.size(); ++t) out += s.included(t) ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

void save_fit(const FitResult& fit, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

  json chains = json::array();
  json acceptance = json::array();
  for (std::size_t k = 0; k < fit.chains.size(); ++k) {
    const ChainResult& c = fit.chains[k];
    chains.push_back({{"index", c.chain_index}, {"seed", c.seed}, {"file", chain_file(k)},
                      {"draws", c.draws.size()}});
    acceptance.push_back({{"chain", c.chain_index + 1},
                          {"attempted", counts_json(c.acceptance.attempted)},
                          {"accepted", counts_json(c.acceptance.accepted)}});

    std::string lines;
    for (std::size_t d = 0; d < c.draws.size(); ++d)
      lines += draw_record(c.draws[d], fit.catalog, c.chain_index + 1, c.iterations[d]).dump() + '\n';
    write_text(dir / chain_file(k), lines);
    write_text(dir / scalar_file(k), scalar_csv(fit, k));
  }

  const json meta{{"version", kArchiveVersion},
                  {"outcome", fit.data.outcome_name},
                  {"exposure", fit.data.exposure_name},
                  {"candidates",
                   {{"spline", fit.candidates.spline_vars},
                    {"binary", fit.candidates.binary_vars},
                    {"interaction", fit.candidates.interaction_vars}}},
                  {"mcmc", to_json(fit.mcmc)},
                  {"priors", to_json(fit.priors)},
                  {"master_seed", fit.master_seed},
                  {"wall_time_seconds", fit.wall_time_seconds},
                  {"n", fit.data.n()},
                  {"chains", chains}};
  write_text(dir / "metadata.json", meta.dump(2) + '\n');
  write_text(dir / "acceptance.json", acceptance.dump(2) + '\n');
  write_csv(dir / "data.csv", to_table(fit.data));
}

FitResult load_fit(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a fit directory");
  const json meta = parse_json_file(dir / "metadata.json");
  FitResult fit;
  try {
    const int version = meta.at("version").get<int>();
    if (version != kArchiveVersion)
      throw IoError("archive version " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(kArchiveVersion) + ")");
    const auto& cand = meta.at("candidates");
    fit.candidates.spline_vars = cand.at("spline").get<std::vector<std::string>>();
    fit.candidates.binary_vars = cand.at("binary").get<std::vector<std::string>>();
    fit.candidates.interaction_vars = cand.at("interaction").get<std::vector<std::string>>();
    fit.mcmc = mcmc_from(meta.at("mcmc"));
    fit.priors = priors_from(meta.at("priors"));
    fit.master_seed = meta.at("master_seed").get<std::uint64_t>();
    fit.wall_time_seconds = meta.at("wall_time_seconds").get<double>();
    const std::string outcome = meta.at("outcome").get<std::string>();
    const std::string exposure = meta.at("exposure").get<std::string>();
    fit.data = validate_dataset(read_csv(dir / "data.csv"), outcome, exposure, fit.candidates);
    fit.catalog = TermCatalog(fit.candidates, exposure);
  } catch (const json::exception& e) {
    throw IoError((dir / "metadata.json").string() + ": " + e.what());
  }

  const auto& chains = meta.at("chains");
  std::vector<std::string> expected;
  for (const auto& c : chains) expected.push_back(c.at("file").get<std::string>());
  std::vector<std::string> missing;
  for (const auto& name : expected)
    if (!fs::exists(dir / name)) missing.push_back(name);
  if (!missing.empty()) {
    std::string list;
    for (const auto& name : expected) list += (list.empty() ? "" : ", ") + name;
    throw IoError("archive '" + dir.string() + "' is missing " + missing.front() +
                  "; expected chain files: " + list);
  }

  const json acceptance = parse_json_file(dir / "acceptance.json");
  for (std::size_t k = 0; k < chains.size(); ++k) {
    ChainResult c;
    c.chain_index = chains[k].at("index").get<int>();
    c.seed = chains[k].at("seed").get<std::uint64_t>();
    try {
      c.acceptance.attempted = counts_from(acceptance.at(k).at("attempted"));
      c.acceptance.accepted = counts_from(acceptance.at(k).at("accepted"));
    } catch (const std::exception& e) {
      throw IoError((dir / "acceptance.json").string() + ": " + e.what());
    }
    const fs::path path = dir / expected[k];
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        const json r = json::parse(line);
        c.iterations.push_back(r.at("iteration").get<int>());
        c.draws.push_back(parse_record(r, fit.catalog, fit.priors.degree));
      } catch (const std::exception& e) {
        throw IoError(path.string() + " line " + std::to_string(line_no) +
                      ": corrupted record (" + e.what() + ")");
      }
    }
    if (c.draws.size() != chains[k].at("draws").get<std::size_t>())
      throw IoError(path.string() + ": expected " + std::to_string(chains[k].at("draws").get<std::size_t>()) +
                    " draws, found " + std::to_string(c.draws.size()));
    fit.chains.push_back(std::move(c));
  }
  return fit;
}

}  // namespace rjbma
