#include "rjbma/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "rjbma/csv.hpp"
#include "rjbma/errors.hpp"

namespace rjbma {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_real(const std::string& key, const std::string& raw) {
  std::string s = raw;
  bool root = false;
  if (s.starts_with("sqrt(") && s.ends_with(")")) {
    s = trim(s.substr(5, s.size() - 6));
    root = true;
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ValidationError("config key '" + key + "': cannot parse '" + raw + "' as a number");
  if (root) {
    if (v < 0.0) throw ValidationError("config key '" + key + "': sqrt of a negative number");
    v = std::sqrt(v);
  }
  return v;
}

int to_int(const std::string& key, const std::string& raw) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (raw.empty() || ec != std::errc() || ptr != raw.data() + raw.size())
    throw ValidationError("config key '" + key + "': cannot parse '" + raw + "' as an integer");
  return v;
}

bool to_bool(const std::string& key, const std::string& raw) {
  static const std::map<std::string, bool> words{{"true", true},   {"TRUE", true}, {"1", true},
                                                 {"false", false}, {"FALSE", false}, {"0", false}};
  const auto it = words.find(raw);
  if (it == words.end())
    throw ValidationError("config key '" + key + "': expected true or false, got '" + raw + "'");
  return it->second;
}

}  // namespace

std::pair<McmcSpecs, PriorParams> parse_config_text(const std::string& text) {
  McmcSpecs mcmc;
  PriorParams priors;
  bool warmup_given = false;

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters{
      {"iter", [&](auto& k, auto& v) { mcmc.iter = to_int(k, v); }},
      {"warmup", [&](auto& k, auto& v) { mcmc.warmup = to_int(k, v); warmup_given = true; }},
      {"thin", [&](auto& k, auto& v) { mcmc.thin = to_int(k, v); }},
      {"chains", [&](auto& k, auto& v) { mcmc.chains = to_int(k, v); }},
      {"sigma_v", [&](auto& k, auto& v) { mcmc.sigma_v = to_real(k, v); }},
      {"bma", [&](auto& k, auto& v) { mcmc.bma = to_bool(k, v); }},
      {"lambda_1", [&](auto& k, auto& v) { priors.lambda_1 = to_real(k, v); }},
      {"lambda_2", [&](auto& k, auto& v) { priors.lambda_2 = to_real(k, v); }},
      {"a_0", [&](auto& k, auto& v) { priors.a_0 = to_real(k, v); }},
      {"b_0", [&](auto& k, auto& v) { priors.b_0 = to_real(k, v); }},
      {"degree", [&](auto& k, auto& v) { priors.degree = to_int(k, v); }},
      {"k_max", [&](auto& k, auto& v) { priors.k_max = to_int(k, v); }},
      {"w", [&](auto& k, auto& v) { priors.w = to_real(k, v); }},
      {"sigma_B", [&](auto& k, auto& v) { priors.sigma_B = to_real(k, v); }},
  };

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end())
      throw ValidationError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second)
      throw ValidationError("config line " + std::to_string(line_no) + ": key '" + key +
                            "' given twice");
    it->second(key, value);
  }
  if (!warmup_given) mcmc.warmup = mcmc.iter / 2;
  validate(mcmc);
  validate(priors);
  return {mcmc, priors};
}

std::pair<McmcSpecs, PriorParams> parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string format_config(const McmcSpecs& m, const PriorParams& p) {
  std::ostringstream out;
  out << "iter = " << m.iter << "\nwarmup = " << m.warmup << "\nthin = " << m.thin
      << "\nchains = " << m.chains << "\nsigma_v = " << format_double(m.sigma_v)
      << "\nbma = " << (m.bma ? "true" : "false") << "\nlambda_1 = " << format_double(p.lambda_1)
      << "\nlambda_2 = " << format_double(p.lambda_2) << "\na_0 = " << format_double(p.a_0)
      << "\nb_0 = " << format_double(p.b_0) << "\ndegree = " << p.degree
      << "\nk_max = " << p.k_max << "\nw = " << format_double(p.w)
      << "\nsigma_B = " << format_double(p.sigma_B) << '\n';
  return out.str();
}

}  // namespace rjbma
