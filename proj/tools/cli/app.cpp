#include "app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include "seqcp/core.hpp"
#include "seqcp/cost_models.hpp"
#include "seqcp/dp_search.hpp"
#include "seqcp/evalbench.hpp"
#include "seqcp/io.hpp"
#include "seqcp/simgen.hpp"

namespace seqcp::cli {

namespace {

using json = nlohmann::ordered_json;

// Options shared by `detect` and `bench`.
struct EngineFlags {
  std::string beta = "auto";
  std::string precond;  // empty: model default
  std::string precond_init = "block";
  double init_weight = 1.0;
  int init_blocks = 10;
  double mu = 1.0;
  double momentum = 0.0;
  double radius = 100.0;
  int epochs = 1;
  bool fast_cost = false;
  bool no_prune = false;
  bool no_post_process = false;
  Index min_boundary = 0;
  Index min_gap = 0;
  Index min_seg_len = 1;
  int threads = 1;
};

void add_engine_flags(CLI::App* sub, EngineFlags& f) {
  sub->add_option("--beta", f.beta, "Penalty per segment: 'auto' (BIC) or a number >= 0")
      ->capture_default_str();
  sub->add_option("--precond", f.precond, "SE preconditioner: scalar, dense or inverse");
  sub->add_option("--precond-init", f.precond_init, "Seeding of H for new candidates: block or point")
      ->capture_default_str();
  sub->add_option("--init-weight", f.init_weight, "Multiplier on the block curvature seed")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--init-blocks", f.init_blocks, "Blocks for preliminary estimates")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--mu", f.mu, "Scalar preconditioner constant")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--momentum", f.momentum, "Momentum coefficient")->capture_default_str();
  sub->add_option("--radius", f.radius, "Radius of the parameter ball")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--epochs", f.epochs, "Passes per segment")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_flag("--fast-cost", f.fast_cost, "Use the running-loss cost approximation");
  sub->add_flag("--no-prune", f.no_prune, "Disable candidate pruning in SE");
  sub->add_flag("--no-post-process", f.no_post_process, "Keep change-points near ends or each other");
  sub->add_option("--min-boundary", f.min_boundary, "Post-processing margin (0: automatic)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--min-gap", f.min_gap, "Post-processing minimum spacing (0: automatic)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--min-seg-len", f.min_seg_len, "Shortest admissible segment")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--threads", f.threads, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

PenaltySpec parse_beta(const std::string& s) {
  if (s == "auto") return PenaltySpec::automatic();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v) || v < 0.0) {
    throw Error(ErrorCode::InvalidPenalty, "--beta must be 'auto' or a finite number >= 0, got '" + s + "'");
  }
  return PenaltySpec::fixed(v);
}

SearchOptions make_search(const EngineFlags& f) {
  SearchOptions o;
  o.solver.radius = f.radius;
  o.min_segment_length = f.min_seg_len;
  o.threads = f.threads;
  return o;
}

SeOptions make_se(const EngineFlags& f, ModelKind kind) {
  SeOptions o = se_defaults(kind);
  if (!f.precond.empty()) o.engine.precond = parse_precond_mode(f.precond);
  o.engine.precond_init = parse_precond_init(f.precond_init);
  o.engine.init_weight = f.init_weight;
  o.engine.mu = f.mu;
  o.engine.momentum = f.momentum;
  o.engine.radius = f.radius;
  o.solver.radius = f.radius;
  o.epochs = f.epochs;
  o.init_blocks = f.init_blocks;
  o.fast_cost = f.fast_cost;
  o.prune = !f.no_prune;
  o.post_process = !f.no_post_process;
  o.min_boundary = f.min_boundary;
  o.min_gap = f.min_gap;
  o.min_segment_length = f.min_seg_len;
  o.threads = f.threads;
  return o;
}

json engine_json(const EngineFlags& f, const SeOptions& se, std::optional<double> beta) {
  json j;
  j["beta"] = f.beta;
  if (beta) j["beta_resolved"] = *beta;
  j["precond"] = to_string(se.engine.precond);
  j["precond_init"] = to_string(se.engine.precond_init);
  j["init_weight"] = se.engine.init_weight;
  j["init_blocks"] = se.init_blocks;
  j["mu"] = se.engine.mu;
  j["momentum"] = se.engine.momentum;
  j["radius"] = se.engine.radius;
  j["epochs"] = se.epochs;
  j["fast_cost"] = se.fast_cost;
  j["prune"] = se.prune;
  j["post_process"] = se.post_process;
  j["min_boundary"] = se.min_boundary;
  j["min_gap"] = se.min_gap;
  j["min_seg_len"] = se.min_segment_length;
  j["threads"] = f.threads;
  return j;
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json scenario_json(const Scenario& s) {
  json j;
  j["id"] = s.id();
  j["family"] = to_string(s.family);
  j["T"] = s.T;
  j["d"] = s.d;
  j["k"] = s.k;
  j["magnitude"] = to_string(s.magnitude);
  j["seed"] = s.seed;
  if (s.family == Family::LassoLinear) j["sparsity"] = s.sparsity;
  return j;
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::ParseError, "cannot write '" + path + "'");
  f << text;
}

// ---- detect ---------------------------------------------------------------

struct DetectArgs {
  std::string input;
  std::string output;
  std::string model;
  std::string method = "se";
  std::string sort_by;
  double sigma_hat = -1.0;
  EngineFlags eng;
};

void cmd_detect(const DetectArgs& a, std::ostream& out, std::ostream& err) {
  CsvReadOptions ro;
  if (!a.sort_by.empty()) ro.sort_by_column = a.sort_by;
  const CsvDataset ds = read_dataset_csv(std::filesystem::path(a.input), ro);
  const ModelKind kind = parse_model_kind(a.model);
  std::optional<double> sigma;
  if (kind == ModelKind::Lasso) {
    sigma = a.sigma_hat >= 0.0 ? a.sigma_hat : estimate_sigma_hat(ds.data).sigma_hat;
  }
  const auto model = make_model(kind, ds.data.dim(), sigma.value_or(0.0));
  model->check_data(ds.data);

  DetectOptions o;
  o.method = parse_method(a.method);
  o.penalty = parse_beta(a.eng.beta);
  o.search = make_search(a.eng);
  o.se = make_se(a.eng, kind);
  const DetectionResult res = detect(ds.data, *model, o);
  if (res.diagnostics.diverged_candidates > 0) {
    err << "warning: " << res.diagnostics.diverged_candidates
        << " candidate state(s) diverged and were dropped\n";
  }

  json j;
  j["version"] = std::string(library_version());
  j["command"] = "detect";
  j["method"] = to_string(res.method);
  j["model"] = to_string(kind);
  j["T"] = ds.data.length();
  j["d"] = ds.data.dim();
  j["beta"] = res.beta;
  json cps = json::array();
  for (Index c : res.segmentation.change_points) cps.push_back(c);
  j["change_points"] = cps;
  json segs = json::array();
  const auto ranges = res.segmentation.segments();
  for (std::size_t s = 0; s < ranges.size(); ++s) {
    json seg;
    seg["start"] = ranges[s].begin + 1;
    seg["end"] = ranges[s].end;
    seg["theta"] = s < res.segment_params.size() ? vec_json(res.segment_params[s]) : json::array();
    segs.push_back(seg);
  }
  j["segments"] = segs;
  j["objective"] = res.objective;
  j["elapsed_seconds"] = res.elapsed_seconds;
  json diag;
  diag["max_candidates"] = res.diagnostics.max_candidates;
  diag["diverged_candidates"] = res.diagnostics.diverged_candidates;
  diag["underdetermined_fits"] = res.diagnostics.underdetermined_fits;
  diag["unconverged_fits"] = res.diagnostics.unconverged_fits;
  diag["cost_evaluations"] = res.diagnostics.cost_evaluations;
  j["diagnostics"] = diag;
  json cfg;
  cfg["input"] = a.input;
  cfg["model"] = to_string(kind);
  cfg["method"] = to_string(o.method);
  cfg["covariates"] = ds.covariate_names;
  cfg["weighted"] = ds.has_weight;
  if (!a.sort_by.empty()) cfg["sort_by_column"] = a.sort_by;
  if (sigma) cfg["sigma_hat"] = *sigma;
  cfg.update(engine_json(a.eng, o.se, res.beta));
  j["config"] = cfg;
  write_text(a.output, j.dump(2) + "\n", out);
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string family = "logistic";
  std::string magnitude = "medium";
  Index T = 1500;
  Index d = 0;  // 0: 1 for the GLM families, 50 for lasso
  int k = 1;
  std::uint64_t seed = 1;
  int sparsity = 1;
  std::string output;
  std::string truth;
};

void cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  Scenario s;
  s.family = parse_family(a.family);
  s.magnitude = parse_magnitude(a.magnitude);
  s.T = a.T;
  s.d = a.d != 0 ? a.d : (s.family == Family::LassoLinear ? 50 : 1);
  s.k = a.k;
  s.seed = a.seed;
  s.sparsity = a.sparsity;
  const SimulatedData sim = simulate(s);

  std::ostringstream csv;
  write_dataset_csv(csv, sim.data);
  write_text(a.output, csv.str(), out);

  if (!a.truth.empty()) {
    json j;
    j["version"] = std::string(library_version());
    j["command"] = "simulate";
    j["scenario"] = scenario_json(s);
    j["seed"] = s.seed;
    json cps = json::array();
    for (Index c : sim.truth.change_points) cps.push_back(c);
    j["change_points"] = cps;
    json params = json::array();
    for (const auto& p : sim.segment_params) params.push_back(vec_json(p));
    j["segment_params"] = params;
    json design;
    design["prng"] = "xoshiro256** seeded by splitmix64";
    if (s.family == Family::LassoLinear) {
      design["covariance"] = "0.5 I";
      design["noise_variance"] = 0.5;
      design["change_variance"] = change_magnitude(s.family, s.magnitude);
      design["support_law"] = "uniform without replacement";
      json sup = json::array();
      for (Index c : sim.support) sup.push_back(c + 1);
      design["support"] = sup;
    } else {
      design["covariance"] = "ar1(0.9)";
      design["change_size"] = change_magnitude(s.family, s.magnitude);
      design["delta_direction"] = "equal components";
      design["delta"] = vec_json(sim.delta);
      if (s.family == Family::Poisson) design["eta_clamp"] = 20.0;
    }
    j["design"] = design;
    write_text(a.truth, j.dump(2) + "\n", out);
  }
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
  std::vector<std::string> families{"logistic"};
  std::vector<std::string> magnitudes{"large"};
  std::vector<Index> Ts{300};
  std::vector<Index> ds;  // empty: 3 for the GLM families, 50 for lasso
  std::vector<int> ks{1};
  std::vector<std::string> methods{"pelt", "se"};
  int sparsity = 1;
  int reps = 1;
  std::uint64_t seed = 1;
  double sigma_hat = -1.0;
  std::string output;
  EngineFlags eng;
};

std::string csv_double(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

void cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  if (a.reps < 1) throw Error(ErrorCode::InvalidScenario, "--reps must be at least 1");
  std::vector<Scenario> grid;
  for (const auto& f : a.families) {
    for (Index T : a.Ts) {
      const Family fam = parse_family(f);
      const std::vector<Index> ds =
          !a.ds.empty() ? a.ds : std::vector<Index>{fam == Family::LassoLinear ? 50 : 3};
      for (Index d : ds) {
        for (int k : a.ks) {
          for (const auto& m : a.magnitudes) {
            Scenario s;
            s.family = fam;
            s.T = T;
            s.d = d;
            s.k = k;
            s.magnitude = parse_magnitude(m);
            s.seed = a.seed;
            s.sparsity = a.sparsity;
            s.validate();
            grid.push_back(s);
          }
        }
      }
    }
  }
  std::vector<Method> methods;
  for (const auto& m : a.methods) methods.push_back(parse_method(m));

  BenchConfig cfg;
  cfg.penalty = parse_beta(a.eng.beta);
  cfg.search = make_search(a.eng);
  cfg.search.threads = 1;
  cfg.threads = a.eng.threads;
  if (a.sigma_hat >= 0.0) cfg.sigma_hat = a.sigma_hat;
  // One SE configuration per model family; flags override the family default.
  std::vector<BenchRecord> records;
  for (const Scenario& s : grid) {
    const ModelKind kind = s.family == Family::Logistic  ? ModelKind::Logistic
                           : s.family == Family::Poisson ? ModelKind::Poisson
                                                         : ModelKind::Lasso;
    cfg.se = make_se(a.eng, kind);
    cfg.se->threads = 1;
    auto part = run_benchmark(std::span<const Scenario>(&s, 1), methods, a.reps, cfg);
    records.insert(records.end(), part.begin(), part.end());
  }

  std::ostringstream csv;
  csv << "scenario,family,T,d,k,magnitude,seed,method,rand_index,k_detected,elapsed_s,objective,status\n";
  for (const auto& r : records) {
    csv << r.scenario.id() << ',' << to_string(r.scenario.family) << ',' << r.scenario.T << ','
        << r.scenario.d << ',' << r.scenario.k << ',' << to_string(r.scenario.magnitude) << ','
        << r.seed << ',' << to_string(r.method) << ',';
    if (r.failed) {
      csv << ",,,,failed\n";
    } else {
      csv << format_double(r.rand_index) << ',' << r.k_detected << ','
          << format_double(r.elapsed_seconds) << ',' << csv_double(r.objective) << ",ok\n";
    }
  }
  if (a.output.empty() || a.output == "-") {
    out << csv.str();
  } else {
    write_text(a.output, csv.str(), out);
    json meta;
    meta["version"] = std::string(library_version());
    meta["command"] = "bench";
    json scen = json::array();
    for (const auto& s : grid) scen.push_back(scenario_json(s));
    meta["scenarios"] = scen;
    meta["methods"] = a.methods;
    meta["reps"] = a.reps;
    meta["seed"] = a.seed;
    meta["seed_rule"] = "rep r uses seed + r";
    if (a.sigma_hat >= 0.0) meta["sigma_hat"] = a.sigma_hat;
    meta["engine"] = engine_json(a.eng, *cfg.se, std::nullopt);
    write_text(a.output + ".meta.json", meta.dump(2) + "\n", out);
  }

  std::ostream& summary = (a.output.empty() || a.output == "-") ? err : out;
  summary << "scenario method runs failed mean_rand_index(+-2se) mean_elapsed_s(+-2se) mean_k\n";
  for (const auto& s : summarize(records)) {
    summary << s.scenario << ' ' << to_string(s.method) << ' ' << s.runs << ' ' << s.failed << ' '
            << std::fixed << std::setprecision(4) << s.mean_rand_index << "(+-"
            << s.rand_index_half_width << ") " << std::setprecision(5) << s.mean_elapsed << "(+-"
            << s.elapsed_half_width << ") " << std::setprecision(2) << s.mean_k_detected << '\n'
            << std::defaultfloat;
  }
  for (const auto& r : records) {
    if (r.failed) summary << "failed: " << r.scenario.id() << " seed " << r.seed << ": " << r.error << '\n';
  }
}

// ---- converge -------------------------------------------------------------

struct ConvergeArgs {
  std::vector<Index> n_grid{100, 400, 1600};
  int seeds = 20;
  std::vector<std::string> mus{"auto"};
  std::string model = "logistic";
  std::uint64_t data_seed = 1;
  double radius = 100.0;
  std::string output;
};

void cmd_converge(const ConvergeArgs& a, std::ostream& out, std::ostream& err) {
  ConvergenceConfig cfg;
  cfg.n_grid = a.n_grid;
  cfg.seeds = a.seeds;
  cfg.model = parse_model_kind(a.model);
  cfg.data_seed = a.data_seed;
  cfg.radius = a.radius;
  cfg.mus.clear();
  for (const auto& m : a.mus) {
    if (m == "auto") {
      cfg.mus.emplace_back(std::nullopt);
      continue;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(m.data(), m.data() + m.size(), v);
    if (ec != std::errc{} || ptr != m.data() + m.size() || !(v > 0.0)) {
      throw Error(ErrorCode::InvalidPenalty, "--mu entries must be 'auto' or positive numbers, got '" + m + "'");
    }
    cfg.mus.emplace_back(v);
  }
  const ConvergenceResult res = convergence_experiment(cfg);

  std::ostringstream csv;
  csv << "n,seed,gap,mu\n";
  for (const auto& r : res.rows) {
    csv << r.n << ',' << r.seed << ',' << format_double(r.gap) << ',' << format_double(r.mu) << '\n';
  }
  const bool to_stdout = a.output.empty() || a.output == "-";
  if (to_stdout) {
    out << csv.str();
  } else {
    write_text(a.output, csv.str(), out);
    json meta;
    meta["version"] = std::string(library_version());
    meta["command"] = "converge";
    meta["n_grid"] = a.n_grid;
    meta["seeds"] = a.seeds;
    meta["mu"] = a.mus;
    meta["model"] = a.model;
    meta["data_seed"] = a.data_seed;
    meta["radius"] = a.radius;
    meta["theta0"] = vec_json(cfg.theta0);
    meta["covariates"] = "x = (1, u), u ~ U(-1, 1)";
    write_text(a.output + ".meta.json", meta.dump(2) + "\n", out);
  }
  std::ostream& summary = to_stdout ? err : out;
  for (std::size_t m = 0; m < res.curves.size(); ++m) {
    const auto& c = res.curves[m];
    summary << "mu=" << (c.mu_auto ? std::string("auto") : format_double(c.mu)) << " slope=" << c.slope;
    for (std::size_t i = 0; i < c.n.size(); ++i) summary << "  gap(" << c.n[i] << ")=" << c.mean_gap[i];
    summary << '\n';
  }
}

// ---- config files -----------------------------------------------------------

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool explicitly_given(const CLI::Option* opt, const std::vector<std::string>& args) {
  for (const auto& a : args) {
    if (a.size() < 2 || a[0] != '-') continue;
    const std::string name = a.substr(0, a.find('='));
    if (opt->check_name(name)) return true;
  }
  return false;
}

// Replaces `--config FILE` after the subcommand by the options the file sets.
// Options given explicitly on the command line take precedence.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
  std::size_t sub_pos = 0;
  const CLI::App* sub = nullptr;
  for (; sub_pos < args.size(); ++sub_pos) {
    sub = app.get_subcommand_no_throw(args[sub_pos]);
    if (sub) break;
  }
  if (!sub) return args;

  std::string path;
  for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw Error(ErrorCode::ParseError, "--config needs a file name");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open config file '" + path + "'");
  std::vector<std::string> injected;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = path + ":" + std::to_string(lineno);
    if (eq == std::string_view::npos) throw Error(ErrorCode::ParseError, where + ": expected 'key = value'");
    std::string key(trim(body.substr(0, eq)));
    std::string value(trim(body.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    std::replace(key.begin(), key.end(), '_', '-');
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt || key == "config") throw Error(ErrorCode::ParseError, where + ": unknown key '" + key + "'");
    if (explicitly_given(opt, args)) continue;
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1" || value == "yes") {
        injected.push_back("--" + key);
      } else if (!(value == "false" || value == "0" || value == "no")) {
        throw Error(ErrorCode::ParseError, where + ": '" + key + "' expects true or false");
      }
    } else {
      injected.push_back("--" + key);
      injected.push_back(value);
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, injected.begin(), injected.end());
  return args;
}

template <class T>
std::string joined(const std::vector<T>& values) {
  std::ostringstream os;
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << values[i];
  return os.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Penalized change-point detection with sequential cost updates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(library_version()));

  std::string config_file;  // consumed by expand_config() before parsing
  const std::string config_help = "Read options from a file of 'key = value' lines ('#' comments)";

  DetectArgs da;
  auto* detect_cmd = app.add_subcommand("detect", "Detect change-points in a dataset CSV");
  detect_cmd->add_option("--config", config_file, config_help);
  detect_cmd->add_option("-i,--input", da.input, "Dataset CSV")->required();
  detect_cmd->add_option("-o,--output", da.output, "Result JSON (default: standard output)");
  detect_cmd->add_option("-m,--model", da.model, "logistic, poisson, lasso or gaussian")->required();
  detect_cmd->add_option("--method", da.method, "dp, pelt or se")->capture_default_str();
  detect_cmd->add_option("--sort-by-column", da.sort_by,
                         "Sort rows by this column, descending, and drop it from the covariates");
  detect_cmd->add_option("--sigma-hat", da.sigma_hat, "Lasso noise scale (default: estimated)");
  add_engine_flags(detect_cmd, da.eng);

  SimulateArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a simulated dataset and its ground truth");
  sim_cmd->add_option("--config", config_file, config_help);
  sim_cmd->add_option("--family", sa.family, "logistic, poisson or lasso")->capture_default_str();
  sim_cmd->add_option("--magnitude", sa.magnitude, "small, medium or large")->capture_default_str();
  sim_cmd->add_option("-T,--length", sa.T, "Sequence length")->capture_default_str();
  sim_cmd->add_option("-d,--dim", sa.d, "Covariate dimension (default: 1, or 50 for lasso)");
  sim_cmd->add_option("-k,--changes", sa.k, "Number of change-points: 0, 1, 3 or 5")->capture_default_str();
  sim_cmd->add_option("--seed", sa.seed, "PRNG seed")->capture_default_str();
  sim_cmd->add_option("--sparsity", sa.sparsity, "Nonzero coefficients (lasso)")->capture_default_str();
  sim_cmd->add_option("-o,--output", sa.output, "Dataset CSV (default: standard output)");
  sim_cmd->add_option("--truth", sa.truth, "Ground-truth JSON");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Compare methods on simulated scenarios");
  bench_cmd->add_option("--config", config_file, config_help);
  bench_cmd->add_option("--family", ba.families, "Families (comma separated)")->delimiter(',')->default_str(joined(ba.families));
  bench_cmd->add_option("--magnitude", ba.magnitudes, "Magnitudes")->delimiter(',')->default_str(joined(ba.magnitudes));
  bench_cmd->add_option("-T,--length", ba.Ts, "Sequence lengths")->delimiter(',')->default_str(joined(ba.Ts));
  bench_cmd->add_option("-d,--dim", ba.ds, "Dimensions (default: 3, or 50 for lasso)")->delimiter(',');
  bench_cmd->add_option("-k,--changes", ba.ks, "Change-point counts")->delimiter(',')->default_str(joined(ba.ks));
  bench_cmd->add_option("--methods", ba.methods, "Methods")->delimiter(',')->default_str(joined(ba.methods));
  bench_cmd->add_option("--sparsity", ba.sparsity, "Nonzero coefficients (lasso)")->capture_default_str();
  bench_cmd->add_option("--reps", ba.reps, "Seeds per scenario")->capture_default_str();
  bench_cmd->add_option("--seed", ba.seed, "First seed")->capture_default_str();
  bench_cmd->add_option("--sigma-hat", ba.sigma_hat, "Lasso noise scale (default: estimated per dataset)");
  bench_cmd->add_option("-o,--output", ba.output, "Benchmark CSV (default: standard output)");
  add_engine_flags(bench_cmd, ba.eng);

  ConvergeArgs ca;
  auto* conv_cmd = app.add_subcommand("converge", "Averaged-iterate convergence experiment");
  conv_cmd->add_option("--config", config_file, config_help);
  conv_cmd->add_option("--n-grid", ca.n_grid, "Sample sizes")->delimiter(',')->default_str(joined(ca.n_grid));
  conv_cmd->add_option("--seeds", ca.seeds, "Permutation seeds per n")->capture_default_str();
  conv_cmd->add_option("--mu", ca.mus, "Scalar constants: numbers or 'auto'")->delimiter(',')->default_str(joined(ca.mus));
  conv_cmd->add_option("--model", ca.model, "logistic or poisson")->capture_default_str();
  conv_cmd->add_option("--data-seed", ca.data_seed, "Seed of the generated data")->capture_default_str();
  conv_cmd->add_option("--radius", ca.radius, "Radius of the parameter ball")->capture_default_str();
  conv_cmd->add_option("-o,--output", ca.output, "CSV (default: standard output)");

  std::vector<std::string> argv(args.begin() + (args.empty() ? 0 : 1), args.end());
  try {
    argv = expand_config(app, std::move(argv));
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    std::vector<std::string> rev(argv.rbegin(), argv.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (detect_cmd->parsed()) cmd_detect(da, out, err);
    if (sim_cmd->parsed()) cmd_simulate(sa, out);
    if (bench_cmd->parsed()) cmd_bench(ba, out, err);
    if (conv_cmd->parsed()) cmd_converge(ca, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.numerical() ? kNumerical : kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace seqcp::cli
