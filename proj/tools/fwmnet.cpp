// fwmnet: simulate cascaded four-wave mixing, report squeezing eigenmodes, and
// synthesize cluster states from them.
//
// Exit codes: 0 success, 2 configuration error, 3 invariant or verification
// failure, 4 synthesis finished but some nullifier is at or above shot noise.

#include "fwmnet/fwmnet.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace fwmnet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitInfeasible = 4;

struct Options {
  std::string preset;
  std::string topology_file;
  std::string gain;
  std::string cluster;
  std::string out;
  std::string format = "json";
  std::string phase_range;
  double vacuum_tolerance = kDefaultVacuumTolerance;
  EsConfig es;
  std::string solution_file;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

double parse_double(const std::string& text, const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field + ": '" + text + "' is not a number");
  }
}

std::vector<Gain> parse_gains(const std::string& text, std::size_t cells) {
  std::vector<double> values;
  for (const auto& part : split(text, ',')) values.push_back(parse_double(part, "gain"));
  if (values.size() == 1) values.assign(cells, values.front());
  if (values.size() != cells) {
    throw ConfigError("gain: expected 1 or " + std::to_string(cells) + " values, got " + std::to_string(values.size()));
  }
  std::vector<Gain> gains;
  for (double v : values) {
    if (!(v >= 1.0)) throw ConfigError("gain: every gain must be >= 1, got " + format_number(v));
    gains.emplace_back(v);
  }
  return gains;
}

CascadeTopology resolve_topology(const Options& opt) {
  if (opt.preset.empty() == opt.topology_file.empty()) {
    throw ConfigError("topology: give exactly one of --preset or --topology");
  }
  if (!opt.preset.empty()) {
    const std::string g = opt.gain.empty() ? "1" : opt.gain;
    if (opt.preset == "chain2") {
      const auto gains = parse_gains(g, 2);
      return CascadeTopology::chain2(gains[0], gains[1]);
    }
    if (opt.preset == "tree3") {
      const auto gains = parse_gains(g, 3);
      return CascadeTopology::tree3(gains[0]).with_gains(gains);
    }
    throw ConfigError("preset: unknown topology preset '" + opt.preset + "' (valid: chain2, tree3)");
  }
  CascadeTopology t = [&] {
    try {
      return topology_from_json(io::read_json_file(opt.topology_file));
    } catch (const TopologyError& e) {
      throw ConfigError(opt.topology_file + ": " + e.what());
    }
  }();
  if (!opt.gain.empty()) t = t.with_gains(parse_gains(opt.gain, t.cells().size()));
  return t;
}

std::pair<AdjacencyMatrix, std::string> resolve_cluster(const Options& opt) {
  if (opt.cluster.empty()) throw ConfigError("cluster: --cluster is required for synthesize");
  for (const char* name : preset_graph_names()) {
    if (opt.cluster == name) return {preset_graph(opt.cluster), opt.cluster};
  }
  if (!fs::exists(opt.cluster)) {
    try {
      preset_graph(opt.cluster);
    } catch (const LookupError& e) {
      throw ConfigError(std::string("cluster: ") + e.what() + " and no such file exists");
    }
  }
  try {
    return {graph_from_json(io::read_json_file(opt.cluster)), opt.cluster};
  } catch (const ValidationError& e) {
    throw ConfigError(opt.cluster + ": " + e.what());
  }
}

std::optional<PhaseRange> resolve_phase_range(const Options& opt) {
  if (opt.phase_range.empty()) return std::nullopt;
  const auto parts = split(opt.phase_range, ',');
  if (parts.size() != 2) throw ConfigError("phase-range: expected MIN,MAX in radians");
  PhaseRange r{parse_double(parts[0], "phase-range"), parse_double(parts[1], "phase-range")};
  if (!(r.min < r.max)) throw ConfigError("phase-range: MIN must be below MAX");
  return r;
}

struct Formats {
  bool json = false;
  bool csv = false;
};

Formats resolve_formats(const Options& opt) {
  Formats f;
  for (const auto& part : split(opt.format, ',')) {
    if (part == "json") f.json = true;
    else if (part == "csv") f.csv = true;
    else throw ConfigError("format: unknown format '" + part + "' (valid: json, csv)");
  }
  return f;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("out: cannot write " + path.string());
  out << content;
}

class Output {
 public:
  Output(const Options& opt) : formats_(resolve_formats(opt)) {
    if (!opt.out.empty()) {
      dir_ = opt.out;
      std::error_code ec;
      fs::create_directories(*dir_, ec);
      if (ec) throw ConfigError("out: cannot create directory " + opt.out);
    }
  }

  void json(const std::string& name, const Json& doc) const {
    if (dir_ && formats_.json) write_file(*dir_ / name, doc.dump(2) + "\n");
  }
  void csv(const std::string& name, const std::string& text) const {
    if (dir_ && formats_.csv) write_file(*dir_ / name, text);
  }

 private:
  Formats formats_;
  std::optional<fs::path> dir_;
};

Json config_echo(const Options& opt, const CascadeTopology& t) {
  Json c = {{"topology", topology_to_json(t)}, {"vacuum_tolerance", opt.vacuum_tolerance}};
  if (!opt.preset.empty()) c["preset"] = opt.preset;
  return c;
}

void check_invariants(const QuadratureTransform<double>& t) {
  const double dev = symplectic_deviation(t);
  if (!(dev <= 1e-8)) {
    throw InconsistencyError("transform is not symplectic: |ux·upᵀ − I| = " + format_number(dev));
  }
}

void print_matrix(const std::string& title, const RealMatrix& m, const std::vector<std::string>& labels) {
  std::cout << title << '\n' << std::setw(8) << "";
  for (const auto& l : labels) std::cout << std::setw(14) << l;
  std::cout << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::cout << std::setw(8) << labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) std::cout << std::setw(14) << std::setprecision(8) << m(i, j);
    std::cout << '\n';
  }
}

int cmd_simulate(const Options& opt) {
  const CascadeTopology topology = resolve_topology(opt);
  Output out(opt);
  const auto transform = build_cascade<double>(topology);
  check_invariants(transform);
  const auto cov = covariance(transform);

  Json report = make_report("simulate", config_echo(opt, topology));
  report["covariance"] = covariance_to_json(cov);
  out.json("report.json", report);
  out.csv("covariance.csv", covariance_csv(cov));

  print_matrix("C_XX", cov.cxx, cov.labels);
  print_matrix("C_PP", cov.cpp, cov.labels);
  return kExitOk;
}

int cmd_modes(const Options& opt) {
  const CascadeTopology topology = resolve_topology(opt);
  Output out(opt);
  const auto transform = build_cascade<double>(topology);
  check_invariants(transform);
  const auto cov = covariance(transform);
  const auto basis = decompose(cov);
  const auto cls = classify_modes(basis, opt.vacuum_tolerance);

  Json report = make_report("modes", config_echo(opt, topology));
  report["covariance"] = covariance_to_json(cov);
  report["eigenmodes"] = eigenmodes_to_json(basis, cls);
  out.json("report.json", report);
  out.csv("covariance.csv", covariance_csv(cov));
  out.csv("modes.csv", modes_csv(basis, cls));

  std::cout << std::setw(10) << "eigenmode" << std::setw(16) << "eta" << std::setw(10) << "dB" << std::setw(14)
            << "tag";
  for (const auto& l : basis.labels) std::cout << std::setw(12) << l;
  std::cout << '\n';
  for (Eigen::Index k = 0; k < basis.eta.size(); ++k) {
    std::cout << std::setw(10) << k + 1 << std::setw(16) << std::setprecision(8) << basis.eta(k) << std::setw(10)
              << std::fixed << std::setprecision(3) << cls.squeezing_db[static_cast<std::size_t>(k)]
              << std::defaultfloat << std::setw(14) << to_string(cls.tags[static_cast<std::size_t>(k)]);
    for (Eigen::Index r = 0; r < basis.u0.rows(); ++r) {
      std::cout << std::setw(12) << std::fixed << std::setprecision(4) << basis.u0(r, k) << std::defaultfloat;
    }
    std::cout << '\n';
  }
  return kExitOk;
}

int cmd_synthesize(const Options& opt) {
  const CascadeTopology topology = resolve_topology(opt);
  const auto [graph, cluster_source] = resolve_cluster(opt);
  SynthesisConfig cfg;
  cfg.es = opt.es;
  cfg.es.validate();
  cfg.phase_range = resolve_phase_range(opt);
  if (static_cast<Eigen::Index>(topology.mode_count()) != graph.size()) {
    throw ConfigError("cluster: graph has " + std::to_string(graph.size()) + " nodes but the cascade has " +
                      std::to_string(topology.mode_count()) + " modes");
  }
  Output out(opt);
  const auto transform = build_cascade<double>(topology);
  check_invariants(transform);
  const auto cov = covariance(transform);
  const SynthesisRun run = synthesize(decompose(cov), graph, cfg);
  const auto cls = classify_modes(run.basis, opt.vacuum_tolerance);

  Json config = config_echo(opt, topology);
  config["cluster"] = {{"source", cluster_source}, {"graph", graph_to_json(graph)}};
  config["optimizer"] = {{"population", cfg.es.population},       {"parents", cfg.es.parents},
                         {"sigma_init", cfg.es.sigma_init},       {"sigma_decay", cfg.es.sigma_decay},
                         {"max_generations", cfg.es.max_generations}, {"restarts", cfg.es.restarts},
                         {"target", cfg.es.target},               {"seed", cfg.es.seed},
                         {"refine_generations", cfg.refine_generations}};
  if (cfg.phase_range) config["phase_range"] = {cfg.phase_range->min, cfg.phase_range->max};
  config["seed"] = cfg.es.seed;

  const Json solution = solution_to_json(run, graph);
  Json report = make_report("synthesize", config);
  report["covariance"] = covariance_to_json(cov);
  report["eigenmodes"] = eigenmodes_to_json(run.basis, cls);
  report["synthesis"] = solution;
  out.json("report.json", report);
  out.json("solution.json", solution);
  out.csv("modes.csv", modes_csv(run.basis, cls));
  out.csv("nullifiers.csv", nullifiers_csv(run.solution.nullifiers));
  out.csv("trace.csv", trace_csv(run.solution.optimizer_trace));

  const NullifierReport& n = run.solution.nullifiers;
  std::cout << "residual " << format_number(run.solution.residual) << '\n';
  std::cout << std::setw(10) << "nullifier" << std::setw(16) << "raw" << std::setw(10) << "sql" << std::setw(14)
            << "normalized" << '\n';
  for (Eigen::Index i = 0; i < n.normalized.size(); ++i) {
    std::cout << std::setw(10) << i + 1 << std::setw(16) << std::setprecision(6) << n.raw_variance(i)
              << std::setw(10) << n.sql(i) << std::setw(14) << std::fixed << std::setprecision(4) << n.normalized(i)
              << std::defaultfloat << (n.normalized(i) < 1.0 ? "  *" : "") << '\n';
  }
  std::cout << "(* below shot noise)\n";
  if (!run.solution.feasible()) {
    std::cout << "infeasible at this gain: max normalized nullifier " << std::setprecision(4) << n.max_normalized()
              << '\n';
    return kExitInfeasible;
  }
  return kExitOk;
}

int cmd_verify(const Options& opt) {
  const Json doc = io::read_json_file(opt.solution_file);
  const VerifyReport rep = verify_solution(doc);
  if (rep.ok()) {
    std::cout << "ok\n";
    return kExitOk;
  }
  for (const auto& f : rep.failures) std::cout << "FAIL " << f << '\n';
  return kExitInvariant;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::topology:
    case ErrorKind::lookup:
      return kExitConfig;
    default:
      return kExitInvariant;
  }
}

void add_topology_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--preset", opt.preset, "Topology preset: chain2 or tree3");
  cmd->add_option("--topology", opt.topology_file, "Topology JSON file");
  cmd->add_option("--gain", opt.gain, "Gain: a scalar for every cell, or a comma-separated list per cell");
  cmd->add_option("--out", opt.out, "Directory for report files");
  cmd->add_option("--format", opt.format, "Comma-separated output formats: json, csv")->capture_default_str();
  cmd->add_option("--vacuum-tolerance", opt.vacuum_tolerance, "|eta - 1| below which a mode counts as vacuum")
      ->capture_default_str();
}

}  // namespace


int main(int argc, char** argv) {
  CLI::App app{"Cascaded four-wave-mixing cluster-state synthesis"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options opt;

  auto* simulate = app.add_subcommand("simulate", "Output covariance matrix of a cascade");
  add_topology_options(simulate, opt);
  auto* modes = app.add_subcommand("modes", "Squeezing eigenmodes of a cascade");
  add_topology_options(modes, opt);
  auto* synth = app.add_subcommand("synthesize", "Homodyne phases and post-processing for a cluster state");
  add_topology_options(synth, opt);
  synth->add_option("--cluster", opt.cluster, "Cluster preset (linear3, linear4, square4, t4) or graph JSON file");
  synth->add_option("--seed", opt.es.seed, "Random seed")->capture_default_str();
  synth->add_option("--restarts", opt.es.restarts, "Restarts per search stage")->capture_default_str();
  synth->add_option("--population", opt.es.population, "Children per generation")->capture_default_str();
  synth->add_option("--parents", opt.es.parents, "Surviving parents per generation")->capture_default_str();
  synth->add_option("--sigma-init", opt.es.sigma_init, "Initial mutation step (radians)")->capture_default_str();
  synth->add_option("--sigma-decay", opt.es.sigma_decay, "Per-generation step decay")->capture_default_str();
  synth->add_option("--max-generations", opt.es.max_generations, "Generations per restart")->capture_default_str();
  synth->add_option("--target", opt.es.target, "Early-stop residual")->capture_default_str();
  synth->add_option("--phase-range", opt.phase_range, "Allowed homodyne phases MIN,MAX in radians");
  auto* verify = app.add_subcommand("verify", "Re-check a solution file");
  verify->add_option("solution", opt.solution_file, "solution.json or report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opt);
    if (modes->parsed()) return cmd_modes(opt);
    if (synth->parsed()) return cmd_synthesize(opt);
    if (verify->parsed()) return cmd_verify(opt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvariant;
  }
  return kExitConfig;
}
