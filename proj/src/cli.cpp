#include "pshlab/cli.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace pshlab::cli {

namespace {

experiments::RunParams tuned(int dim, int base, int fiber, int big_n) {
  experiments::RunParams p;
  p.dim = dim;
  p.base_cells = base;
  p.fiber_cells = fiber;
  p.big_n = big_n;
  return p;
}

const std::array<RegistryEntry, 7>& entries() {
  static const std::array<RegistryEntry, 7> table{{
      {"ibp", "antisymmetry defect of the curvature pairing, with a grid-halving trend",
       tuned(2, 24, 96, 1)},
      {"wn-pushforward",
       "fiberwise Monge-Ampere mass of the lifted potential pushed to the base",
       tuned(1, 64, 128, 1)},
      {"beta", "closed-form fiber moment weights against adaptive quadrature",
       tuned(3, 24, 96, 20)},
      {"tv-convergence",
       "total-variation distance between averaged measures at growing order",
       tuned(1, 64, 96, 1)},
      {"iwn-leading",
       "one-sided derivative of the lifted-measure pairing at vanishing step",
       tuned(1, 32, 160, 1)},
      {"intres", "matches the one-sided derivative against the base curvature pairing",
       tuned(1, 48, 128, 1)},
      {"an-expansion",
       "quadratic smallness of the envelope shift difference in the step",
       tuned(1, 24, 96, 1)},
  }};
  return table;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view key, std::string_view value) {
  std::size_t used = 0;
  const std::string v(value);
  int out = 0;
  try {
    out = std::stoi(v, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (used != v.size())
    throw std::invalid_argument("config: bad integer for '" + std::string(key) + "': " + v);
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  std::size_t used = 0;
  const std::string v(value);
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (used != v.size())
    throw std::invalid_argument("config: bad number for '" + std::string(key) + "': " + v);
  return out;
}

std::vector<double> parse_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  std::string item;
  std::istringstream iss{std::string(value)};
  while (std::getline(iss, item, ',')) {
    const std::string_view t = trim(item);
    if (t.empty())
      throw std::invalid_argument("config: empty entry in '" + std::string(key) + "'");
    out.push_back(parse_double(key, t));
  }
  if (out.empty())
    throw std::invalid_argument("config: '" + std::string(key) + "' needs at least one value");
  return out;
}

void assign(RunConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "experiment") {
    cfg.experiment = std::string(value);
  } else if (key == "M") {
    cfg.base_cells = parse_int(key, value);
  } else if (key == "K") {
    cfg.fiber_cells = parse_int(key, value);
  } else if (key == "N") {
    cfg.big_n = parse_int(key, value);
  } else if (key == "n") {
    cfg.dim = parse_int(key, value);
  } else if (key == "eps") {
    cfg.eps = parse_double(key, value);
  } else if (key == "a0") {
    cfg.a0 = parse_double(key, value);
  } else if (key == "a-list") {
    cfg.a_list = parse_list(key, value);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(std::stoull(std::string(value)));
  } else if (key == "out") {
    cfg.out_dir = std::string(value);
  } else {
    throw std::invalid_argument("config: unknown key '" + std::string(key) + "'");
  }
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::span<const RegistryEntry> registry() { return entries(); }

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not key=value");
    assign(cfg, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  return cfg;
}

RunConfig merge(const RunConfig& lower, const RunConfig& higher) {
  RunConfig out = lower;
  if (!higher.experiment.empty()) out.experiment = higher.experiment;
  if (higher.base_cells) out.base_cells = higher.base_cells;
  if (higher.fiber_cells) out.fiber_cells = higher.fiber_cells;
  if (higher.big_n) out.big_n = higher.big_n;
  if (higher.dim) out.dim = higher.dim;
  if (higher.eps) out.eps = higher.eps;
  if (higher.a0) out.a0 = higher.a0;
  if (higher.a_list) out.a_list = higher.a_list;
  if (higher.seed) out.seed = higher.seed;
  if (higher.out_dir) out.out_dir = higher.out_dir;
  return out;
}

experiments::RunParams resolve(const RunConfig& cfg) {
  const RegistryEntry* hit = nullptr;
  for (const RegistryEntry& e : entries()) {
    if (e.name == cfg.experiment) {
      hit = &e;
      break;
    }
  }
  if (hit == nullptr)
    throw std::invalid_argument("unknown experiment '" + cfg.experiment + "'");
  experiments::RunParams p = hit->params;
  if (cfg.base_cells) p.base_cells = *cfg.base_cells;
  if (cfg.fiber_cells) p.fiber_cells = *cfg.fiber_cells;
  if (cfg.big_n) p.big_n = *cfg.big_n;
  if (cfg.dim) p.dim = *cfg.dim;
  if (cfg.eps) p.eps = *cfg.eps;
  if (cfg.a0) p.a0 = *cfg.a0;
  if (cfg.a_list) p.a_list = *cfg.a_list;
  if (cfg.seed) p.seed = *cfg.seed;
  return p;
}

report::ExperimentReport dispatch(const std::string& name, const experiments::RunParams& params) {
  if (name == "ibp") return experiments::run_ibp(params);
  if (name == "wn-pushforward") return experiments::run_wn_pushforward(params);
  if (name == "beta") return experiments::run_beta(params);
  if (name == "tv-convergence") return experiments::run_tv_convergence(params);
  if (name == "iwn-leading") return experiments::run_iwn_leading(params);
  if (name == "intres") return experiments::run_intres(params);
  if (name == "an-expansion") return experiments::run_an_expansion(params);
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

void list_experiments(std::ostream& os) {
  for (const RegistryEntry& e : entries()) {
    os << e.name << " (n=" << e.params.dim << " M=" << e.params.base_cells
       << " K=" << e.params.fiber_cells << " N=" << e.params.big_n << ")\n    "
       << e.summary << "\n";
  }
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  report::ExperimentReport rep;
  try {
    const experiments::RunParams params = resolve(cfg);
    rep = dispatch(cfg.experiment, params);
  } catch (const std::invalid_argument& ex) {
    err << "error: " << ex.what() << "\n\navailable experiments:\n";
    list_experiments(err);
    return 2;
  }

  out << rep.name << "\n";
  for (const auto& [key, value] : rep.inputs) out << "  " << key << " = " << value << "\n";
  for (const report::Expectation& row : rep.rows) {
    out << (row.pass() ? "  [ok]   " : "  [FAIL] ") << row.label << " = " << num(row.measured);
    if (row.provenance != "table")
      out << "  (want " << num(row.expected) << " +/- " << num(row.tolerance) << ", "
          << row.provenance << ")";
    out << "\n";
  }

  const std::filesystem::path dir = cfg.out_dir.value_or("reports");
  const std::array<report::ExperimentReport, 1> reps{rep};
  const std::filesystem::path csv = rep.write_csv(dir);
  const std::filesystem::path summary = report::write_summary(dir, reps);
  out << "report:  " << csv.string() << "\nsummary: " << summary.string() << "\n";
  out << "verdict: " << (rep.verdict() ? "pass" : "FAIL") << "\n";
  return rep.verdict() ? 0 : 1;
}

}  // namespace pshlab::cli
