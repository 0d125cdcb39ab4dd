#include "saddle_cli/config.hpp"

#include <cctype>
#include <charconv>
#include <functional>
#include <map>
#include <sstream>

namespace saddle::cli {

std::string_view to_string(BenchmarkKind kind) {
  switch (kind) {
    case BenchmarkKind::rosenbrock:
      return "rosenbrock";
    case BenchmarkKind::codesign:
      return "codesign";
    case BenchmarkKind::phasefield:
      return "phasefield";
    case BenchmarkKind::custom_file:
      return "custom-file";
  }
  return "unknown";
}

BenchmarkKind parse_benchmark(std::string_view name) {
  if (name == "rosenbrock") return BenchmarkKind::rosenbrock;
  if (name == "codesign") return BenchmarkKind::codesign;
  if (name == "phasefield") return BenchmarkKind::phasefield;
  if (name == "custom-file") return BenchmarkKind::custom_file;
  throw ConfigError("benchmark.name: unknown benchmark '" + std::string(name) +
                    "' (expected rosenbrock, codesign, phasefield or custom-file)");
}

namespace {

std::string default_case(BenchmarkKind kind, const std::string& command) {
  switch (kind) {
    case BenchmarkKind::rosenbrock:
      return "ii";
    case BenchmarkKind::codesign:
      return "i";
    case BenchmarkKind::phasefield:
      return command == "landscape" ? "iii" : "i";
    case BenchmarkKind::custom_file:
      return "";
  }
  return "";
}

}  // namespace

RunConfig default_config(BenchmarkKind kind, const std::string& case_name, const std::string& command) {
  RunConfig cfg;
  cfg.command = command;
  cfg.benchmark.kind = kind;
  cfg.benchmark.case_name = case_name.empty() ? default_case(kind, command) : case_name;
  const std::string& c = cfg.benchmark.case_name;

  SdParams& sd = cfg.sd;
  GpsdParams& gp = cfg.gpsd;
  LandscapeParams& ls = cfg.landscape;
  sd.max_steps = 20000;
  gp.tol_l = 0.05;
  gp.tol_u = 0.15;

  switch (kind) {
    case BenchmarkKind::rosenbrock: {
      cfg.benchmark.rosenbrock = systems::rosenbrock_case(c);
      cfg.benchmark.k = c == "i" ? 1 : c == "ii" ? 2 : c == "iii" ? 3 : 4;
      sd.tau = 0.01;
      sd.schedule = {DimerDecay::polynomial, 0.01};
      sd.tol_x = 1e-6;
      gp.n_sample = gp.n_new = 100;
      gp.initial_region.half_width = 0.025;
      ls.dedup_tol = 1e-3;
      ls.residual_bound = 10.0 * sd.tol_x / sd.tau;
      ls.perturb_eps = 0.1;
      break;
    }
    case BenchmarkKind::codesign: {
      if (c != "i" && c != "ii" && c != "iii") throw ConfigError("benchmark.case: codesign cases are i, ii, iii");
      cfg.benchmark.k = 1;
      sd.tau = 0.0025;
      sd.schedule = {DimerDecay::polynomial, 0.0025};
      sd.tol_x = 1e-6;
      gp.n_sample = gp.n_new = 300;
      gp.initial_region.half_width = 0.1;
      ls.dedup_tol = 1e-3;
      ls.residual_bound = 10.0 * sd.tol_x / sd.tau;
      ls.perturb_eps = 0.1;
      break;
    }
    case BenchmarkKind::phasefield: {
      if (c == "i") {
        cfg.benchmark.phasefield.inv_eta_sq = 30.0;
        cfg.benchmark.k = 1;
      } else if (c == "ii") {
        cfg.benchmark.phasefield.inv_eta_sq = 80.0;
        cfg.benchmark.k = 2;
      } else if (c == "iii") {
        cfg.benchmark.phasefield.inv_eta_sq = 120.0;
        cfg.benchmark.k = 3;
      } else {
        throw ConfigError("benchmark.case: phasefield cases are i, ii, iii");
      }
      const double tau = command == "landscape" ? 0.0005 : 0.00025;
      sd.tau = tau;
      sd.schedule = {DimerDecay::exponential, tau};
      sd.tol_x = 1e-5;
      gp.n_sample = gp.n_new = 120;
      gp.initial_region.half_width = 0.01;
      ls.dedup_tol = 1e-2;
      ls.residual_bound = 1e-4;
      ls.perturb_eps = 0.1;
      break;
    }
    case BenchmarkKind::custom_file: {
      cfg.benchmark.k = 1;
      sd.tau = 0.01;
      sd.schedule = {DimerDecay::polynomial, 0.01};
      sd.tol_x = 1e-6;
      gp.n_sample = gp.n_new = 100;
      gp.initial_region.half_width = 0.1;
      ls.dedup_tol = 1e-3;
      ls.residual_bound = 10.0 * sd.tol_x / sd.tau;
      ls.perturb_eps = 0.1;
      break;
    }
  }
  gp.sd = sd;
  ls.sd = sd;
  ls.gpsd = gp;
  return cfg;
}

namespace {

using nlohmann::json;
using Setter = std::function<void(const json&, const std::string&)>;

template <typename T>
T get_as(const json& v, const std::string& path) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + ": wrong value type");
  }
}

double positive(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  const double x = v.get<double>();
  if (!(x > 0.0)) throw ConfigError(path + ": must be positive");
  return x;
}

int positive_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
  const auto x = v.get<long long>();
  if (x < 1 || x > 1'000'000'000) throw ConfigError(path + ": must be a positive integer");
  return static_cast<int>(x);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

bool boolean(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
  return v.get<bool>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path + ": expected a string");
  return v.get<std::string>();
}

void apply_section(const json& section, const std::string& name, const std::map<std::string, Setter>& setters) {
  if (!section.is_object()) throw ConfigError(name + ": expected an object");
  for (const auto& [key, value] : section.items()) {
    const std::string path = name + "." + key;
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(path + ": unknown key");
    it->second(value, path);
  }
}

DimerDecay parse_decay(const json& v, const std::string& path) {
  const std::string s = text(v, path);
  if (s == "exponential") return DimerDecay::exponential;
  if (s == "polynomial") return DimerDecay::polynomial;
  throw ConfigError(path + ": expected 'exponential' or 'polynomial'");
}

std::map<std::string, Setter> sd_setters(SdParams& sd) {
  return {
      {"beta", [&](const json& v, const std::string& p) { sd.beta = positive(v, p); }},
      {"gamma", [&](const json& v, const std::string& p) { sd.gamma = positive(v, p); }},
      {"tau", [&](const json& v, const std::string& p) { sd.tau = positive(v, p); }},
      {"l0", [&](const json& v, const std::string& p) { sd.schedule.l0 = positive(v, p); }},
      {"l_min", [&](const json& v, const std::string& p) { sd.schedule.l_min = positive(v, p); }},
      {"decay", [&](const json& v, const std::string& p) { sd.schedule.kind = parse_decay(v, p); }},
      {"tol_x", [&](const json& v, const std::string& p) { sd.tol_x = positive(v, p); }},
      {"max_steps", [&](const json& v, const std::string& p) { sd.max_steps = positive_int(v, p); }},
      {"divergence_bound", [&](const json& v, const std::string& p) { sd.divergence_bound = positive(v, p); }},
  };
}

std::map<std::string, Setter> gpsd_setters(GpsdParams& gp) {
  return {
      {"tol_l", [&](const json& v, const std::string& p) { gp.tol_l = positive(v, p); }},
      {"tol_u", [&](const json& v, const std::string& p) { gp.tol_u = positive(v, p); }},
      {"n_sample", [&](const json& v, const std::string& p) { gp.n_sample = positive_int(v, p); }},
      {"n_new", [&](const json& v, const std::string& p) { gp.n_new = positive_int(v, p); }},
      {"delta", [&](const json& v, const std::string& p) { gp.initial_region.half_width = positive(v, p); }},
      {"delta_min", [&](const json& v, const std::string& p) { gp.delta_min = positive(v, p); }},
      {"delta_max", [&](const json& v, const std::string& p) { gp.delta_max = positive(v, p); }},
      {"shrink_streak_cap", [&](const json& v, const std::string& p) { gp.shrink_streak_cap = positive_int(v, p); }},
      {"length_grid", [&](const json& v, const std::string& p) { gp.fit.length_grid = positive_int(v, p); }},
      {"sigma_l_min", [&](const json& v, const std::string& p) { gp.fit.sigma_l_min = positive(v, p); }},
      {"sigma_l_max", [&](const json& v, const std::string& p) { gp.fit.sigma_l_max = positive(v, p); }},
      {"sigma_f_min", [&](const json& v, const std::string& p) { gp.fit.sigma_f_min = positive(v, p); }},
      {"sigma_f_max", [&](const json& v, const std::string& p) { gp.fit.sigma_f_max = positive(v, p); }},
      {"noise_floor", [&](const json& v, const std::string& p) { gp.fit.noise_floor = positive(v, p); }},
      {"noise_ceiling", [&](const json& v, const std::string& p) { gp.fit.noise_ceiling = positive(v, p); }},
  };
}

}  // namespace

std::optional<std::string> config_benchmark_name(const nlohmann::json& doc) {
  if (doc.is_object() && doc.contains("benchmark") && doc["benchmark"].is_object() && doc["benchmark"].contains("name")) {
    return text(doc["benchmark"]["name"], "benchmark.name");
  }
  return std::nullopt;
}

std::optional<std::string> config_case_name(const nlohmann::json& doc) {
  if (doc.is_object() && doc.contains("benchmark") && doc["benchmark"].is_object() && doc["benchmark"].contains("case")) {
    return text(doc["benchmark"]["case"], "benchmark.case");
  }
  return std::nullopt;
}

void apply_config(RunConfig& cfg, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("<root>: expected an object");
  BenchmarkConfig& b = cfg.benchmark;
  // Landscape runs carry their own copies; start them from the (possibly
  // overridden) top-level sections unless the landscape section says otherwise.
  const std::map<std::string, Setter> benchmark{
      {"name", [&](const json& v, const std::string& p) {
         if (parse_benchmark(text(v, p)) != b.kind) throw ConfigError(p + ": conflicts with the selected benchmark");
       }},
      {"case", [&](const json& v, const std::string& p) {
         if (text(v, p) != b.case_name) throw ConfigError(p + ": conflicts with the selected case");
       }},
      {"a", [&](const json& v, const std::string& p) { b.rosenbrock.a = number(v, p); }},
      {"b", [&](const json& v, const std::string& p) { b.rosenbrock.b = number(v, p); }},
      {"c", [&](const json& v, const std::string& p) { b.rosenbrock.c = number(v, p); }},
      {"d", [&](const json& v, const std::string& p) { b.rosenbrock.d = number(v, p); }},
      {"alpha", [&](const json& v, const std::string& p) {
         const double a = number(v, p);
         if (!(a > 0.0 && a < 2.0)) throw ConfigError(p + ": must lie in (0, 2)");
         b.phasefield.alpha = a;
       }},
      {"h", [&](const json& v, const std::string& p) { b.phasefield.h = positive(v, p); }},
      {"kappa", [&](const json& v, const std::string& p) { b.phasefield.kappa = positive(v, p); }},
      {"inv_eta_sq", [&](const json& v, const std::string& p) { b.phasefield.inv_eta_sq = positive(v, p); }},
      {"file", [&](const json& v, const std::string& p) { b.file = text(v, p); }},
      {"x0", [&](const json& v, const std::string& p) {
         b.x0 = get_as<std::vector<double>>(v, p);
         if (b.x0.empty()) throw ConfigError(p + ": must not be empty");
       }},
      {"k", [&](const json& v, const std::string& p) {
         if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(p + ": expected a non-negative integer");
         b.k = v.get<int>();
       }},
      {"fd_step", [&](const json& v, const std::string& p) { b.fd_step = positive(v, p); }},
  };
  const std::map<std::string, Setter> run{
      {"seed", [&](const json& v, const std::string& p) {
         if (!v.is_number_unsigned()) throw ConfigError(p + ": expected a non-negative integer");
         cfg.seed = v.get<std::uint64_t>();
       }},
      {"output_dir", [&](const json& v, const std::string& p) { cfg.output_dir = text(v, p); }},
      {"emit_trajectory", [&](const json& v, const std::string& p) { cfg.emit_trajectory = boolean(v, p); }},
  };

  for (const auto& [key, value] : doc.items()) {
    if (key == "benchmark") {
      apply_section(value, key, benchmark);
    } else if (key == "sd") {
      apply_section(value, key, sd_setters(cfg.sd));
      cfg.gpsd.sd = cfg.sd;
      cfg.landscape.sd = cfg.sd;
      cfg.landscape.gpsd.sd = cfg.sd;
    } else if (key == "gpsd") {
      SdParams keep = cfg.gpsd.sd;
      apply_section(value, key, gpsd_setters(cfg.gpsd));
      cfg.gpsd.sd = keep;
      cfg.landscape.gpsd = cfg.gpsd;
    } else if (key == "run") {
      apply_section(value, key, run);
    } else if (key != "landscape") {
      throw ConfigError(key + ": unknown section");
    }
  }
  // Landscape last so that it can override the copies made above.
  if (doc.contains("landscape")) {
    LandscapeParams& ls = cfg.landscape;
    std::map<std::string, Setter> landscape{
        {"engine", [&](const json& v, const std::string& p) {
           const std::string s = text(v, p);
           if (s == "sd") {
             ls.engine = SearchEngine::sd;
           } else if (s == "gpsd") {
             ls.engine = SearchEngine::gpsd;
           } else {
             throw ConfigError(p + ": expected 'sd' or 'gpsd'");
           }
         }},
        {"perturb_eps", [&](const json& v, const std::string& p) { ls.perturb_eps = positive(v, p); }},
        {"dedup_tol", [&](const json& v, const std::string& p) { ls.dedup_tol = positive(v, p); }},
        {"residual_bound", [&](const json& v, const std::string& p) { ls.residual_bound = positive(v, p); }},
        {"zero_tol", [&](const json& v, const std::string& p) { ls.zero_tol = positive(v, p); }},
        {"exhaustive", [&](const json& v, const std::string& p) { ls.exhaustive = boolean(v, p); }},
        {"jobs", [&](const json& v, const std::string& p) { ls.jobs = positive_int(v, p); }},
        {"max_nodes", [&](const json& v, const std::string& p) { ls.max_nodes = static_cast<std::size_t>(positive_int(v, p)); }},
    };
    apply_section(doc["landscape"], "landscape", landscape);
  }
}

std::uint64_t parse_seed(const std::string& text, const std::string& origin) {
  std::uint64_t value = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(origin + ": expected a non-negative integer seed, got '" + text + "'");
  }
  return value;
}

std::vector<double> parse_vector(const std::string& text, const std::string& origin) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(origin + ": not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(origin + ": empty vector");
  return out;
}

}  // namespace saddle::cli
