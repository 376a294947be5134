#include "mcache/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "mcache/analysis.hpp"
#include "mcache/optimizer.hpp"

namespace mcache {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

bool one_of(std::string_view s, const std::vector<std::string_view>& set) {
  return std::find(set.begin(), set.end(), s) != set.end();
}

const std::vector<std::string_view> kPolicies = {"file",      "algorithm3", "waterfill", "gradient",
                                                 "baseline1", "baseline2",  "baseline3"};

class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  const json* section(const json& doc, const char* key, bool required) {
    if (!doc.contains(key)) {
      if (required) errors_.push_back(std::string(key) + ": missing");
      return nullptr;
    }
    if (!doc[key].is_object()) {
      errors_.push_back(std::string(key) + ": expected an object");
      return nullptr;
    }
    return &doc[key];
  }

  template <class T>
  bool read(const json* obj, const std::string& path, const char* key, T& out, bool required) {
    if (obj == nullptr) return false;
    const std::string where = path + "." + key;
    if (!obj->contains(key)) {
      if (required) errors_.push_back(where + ": missing");
      return false;
    }
    try {
      out = (*obj)[key].get<T>();
      return true;
    } catch (const json::exception&) {
      errors_.push_back(where + ": wrong type");
      return false;
    }
  }

 private:
  std::vector<std::string>& errors_;
};

double parse_snr_db(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinite") return std::numeric_limits<double>::infinity();
    throw std::invalid_argument(s);
  }
  return v.get<double>();
}

}  // namespace

SpecError::SpecError(std::vector<std::string> violations)
    : ConfigError(join(violations)), violations_(std::move(violations)) {}

Popularity ExperimentSpec::popularity() const {
  if (!probabilities.empty()) return Popularity(probabilities);
  return zipf(network.num_files, zipf_gamma.value_or(0.0));
}

ExperimentSpec validate_config(std::string_view raw) {
  json doc;
  try {
    doc = json::parse(raw);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < raw.size(); ++i) {
      if (raw[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SpecError({"parse error at line " + std::to_string(line) + " column " +
                     std::to_string(col) + ": " + e.what()});
  }
  std::vector<std::string> errors;
  if (!doc.is_object()) throw SpecError({"document: expected a JSON object"});

  ExperimentSpec spec;
  Reader rd(errors);
  std::string mode;
  if (rd.read(&doc, "config", "mode", mode, true)) {
    static const std::vector<std::pair<std::string_view, Mode>> modes = {
        {"analyze", Mode::Analyze}, {"optimize", Mode::Optimize}, {"simulate", Mode::Simulate},
        {"sweep", Mode::Sweep},     {"reproduce", Mode::Reproduce}};
    auto it = std::find_if(modes.begin(), modes.end(), [&](auto& m) { return m.first == mode; });
    if (it == modes.end()) errors.push_back("config.mode: unknown mode '" + mode + "'");
    else spec.mode = it->second;
  }
  const bool reproduce = spec.mode == Mode::Reproduce;

  if (reproduce) {
    if (rd.read(&doc, "config", "target", spec.target, true) && !one_of(spec.target, kReproduceTargets)) {
      errors.push_back("config.target: unknown target '" + spec.target + "'");
    }
  }

  // Figure targets carry their own network parameters.
  const json* net = rd.section(doc, "network", !reproduce);
  if (net) {
    auto& n = spec.network;
    rd.read(net, "network", "bs_density", n.bs_density, true);
    rd.read(net, "network", "user_density", n.user_density, true);
    rd.read(net, "network", "path_loss_exponent", n.path_loss, true);
    rd.read(net, "network", "bandwidth_hz", n.bandwidth_hz, true);
    rd.read(net, "network", "target_rate_bps", n.target_rate, true);
    rd.read(net, "network", "num_files", n.num_files, true);
    rd.read(net, "network", "cache_size", n.cache_size, true);
    if (!net->contains("snr_db")) {
      errors.push_back("network.snr_db: missing");
    } else {
      try {
        n.snr = Snr::from_db(parse_snr_db((*net)["snr_db"]));
      } catch (const std::exception&) {
        errors.push_back("network.snr_db: expected a number or \"inf\"");
      }
    }
    for (const auto& v : n.violations()) errors.push_back("network: " + v);
  }

  const json* pop = rd.section(doc, "popularity", !reproduce);
  if (pop) {
    const bool has_gamma = pop->contains("zipf_gamma");
    const bool has_probs = pop->contains("probabilities");
    if (has_gamma == has_probs) {
      errors.push_back("popularity: give exactly one of zipf_gamma or probabilities");
    } else if (has_gamma) {
      double g = 0.0;
      if (rd.read(pop, "popularity", "zipf_gamma", g, true)) {
        if (!(g >= 0.0)) errors.push_back("popularity.zipf_gamma: must be non-negative");
        spec.zipf_gamma = g;
      }
    } else if (rd.read(pop, "popularity", "probabilities", spec.probabilities, true)) {
      if (spec.probabilities.size() != static_cast<std::size_t>(spec.network.num_files)) {
        errors.push_back("popularity.probabilities: length must equal network.num_files");
      } else {
        try {
          Popularity check(spec.probabilities);
        } catch (const std::exception& e) {
          errors.push_back(std::string("popularity.probabilities: ") + e.what());
        }
      }
    }
  }

  if (const json* pol = rd.section(doc, "policy", false)) {
    if (rd.read(pol, "policy", "kind", spec.policy, true) && !one_of(spec.policy, kPolicies)) {
      errors.push_back("policy.kind: unknown policy '" + spec.policy + "'");
    }
    if (spec.policy == "file") rd.read(pol, "policy", "path", spec.policy_path, true);
    rd.read(pol, "policy", "candidate_budget", spec.candidate_budget, false);
    rd.read(pol, "policy", "step_scale", spec.step_scale, false);
    rd.read(pol, "policy", "max_iters", spec.max_iters, false);
    rd.read(pol, "policy", "stop_tol", spec.stop_tol, false);
    rd.read(pol, "policy", "trace", spec.trace, false);
    if (!(spec.step_scale > 0.0)) errors.push_back("policy.step_scale: must be positive");
    if (spec.max_iters < 0) errors.push_back("policy.max_iters: must be non-negative");
    if (spec.candidate_budget < 1) errors.push_back("policy.candidate_budget: must be positive");
  }
  if (spec.mode == Mode::Optimize && !one_of(spec.policy, {"algorithm3", "waterfill", "gradient"})) {
    errors.push_back("policy.kind: optimize mode needs algorithm3, waterfill or gradient");
  }

  const json* sweep = rd.section(doc, "sweep", spec.mode == Mode::Sweep);
  if (sweep) {
    if (rd.read(sweep, "sweep", "axis", spec.sweep_axis, true) && !one_of(spec.sweep_axis, kSweepAxes)) {
      errors.push_back("sweep.axis: '" + spec.sweep_axis + "' is not a sweepable parameter");
    }
    if (rd.read(sweep, "sweep", "values", spec.sweep_values, true) && spec.sweep_values.empty()) {
      errors.push_back("sweep.values: must not be empty");
    }
  }

  spec.simulate = reproduce || spec.mode == Mode::Simulate;
  if (const json* sim = rd.section(doc, "sim", false)) {
    rd.read(sim, "sim", "enabled", spec.simulate, false);
    rd.read(sim, "sim", "window_side", spec.sim.window_side, false);
    rd.read(sim, "sim", "realizations", spec.sim.realizations, false);
    rd.read(sim, "sim", "seed", spec.sim.seed, false);
    rd.read(sim, "sim", "measure_unicast", spec.sim.measure_unicast, false);
    std::string boundary = "plain";
    if (rd.read(sim, "sim", "boundary", boundary, false)) {
      if (boundary == "toroidal") spec.sim.boundary = Boundary::Toroidal;
      else if (boundary != "plain") errors.push_back("sim.boundary: expected plain or toroidal");
    }
    if (!(spec.sim.window_side > 0.0)) errors.push_back("sim.window_side: must be positive");
    if (spec.sim.realizations < 1) errors.push_back("sim.realizations: must be at least 1");
  }

  std::string out;
  if (rd.read(&doc, "config", "output", out, false)) spec.output_dir = out;

  if (!errors.empty()) throw SpecError(std::move(errors));
  return spec;
}

void apply_profile(ExperimentSpec& spec, bool paper_fidelity) {
  spec.paper_fidelity = paper_fidelity;
  if (paper_fidelity) {
    spec.sim.realizations = 4000000;
    spec.sim.window_side = 260.0;
  }
}

std::string describe(const ExperimentSpec& spec) {
  static const char* mode_names[] = {"analyze", "optimize", "simulate", "sweep", "reproduce"};
  const auto& n = spec.network;
  json doc;
  doc["mode"] = mode_names[static_cast<int>(spec.mode)];
  if (spec.mode == Mode::Reproduce) doc["target"] = spec.target;
  doc["network"] = {{"bs_density", n.bs_density},
                    {"user_density", n.user_density},
                    {"path_loss_exponent", n.path_loss},
                    {"bandwidth_hz", n.bandwidth_hz},
                    {"target_rate_bps", n.target_rate},
                    {"snr_db", n.snr.is_infinite() ? json("inf") : json(n.snr.db())},
                    {"num_files", n.num_files},
                    {"cache_size", n.cache_size}};
  if (!spec.probabilities.empty()) doc["popularity"] = {{"probabilities", spec.probabilities}};
  else doc["popularity"] = {{"zipf_gamma", spec.zipf_gamma.value_or(0.0)}};
  doc["policy"] = {{"kind", spec.policy},
                   {"candidate_budget", spec.candidate_budget},
                   {"step_scale", spec.step_scale},
                   {"max_iters", spec.max_iters},
                   {"stop_tol", spec.stop_tol}};
  if (!spec.policy_path.empty()) doc["policy"]["path"] = spec.policy_path;
  if (!spec.sweep_axis.empty()) doc["sweep"] = {{"axis", spec.sweep_axis}, {"values", spec.sweep_values}};
  doc["sim"] = {{"enabled", spec.simulate},
                {"window_side", spec.sim.window_side},
                {"realizations", spec.sim.realizations},
                {"seed", spec.sim.seed},
                {"boundary", spec.sim.boundary == Boundary::Toroidal ? "toroidal" : "plain"},
                {"measure_unicast", spec.sim.measure_unicast}};
  doc["paper_fidelity"] = spec.paper_fidelity;
  return doc.dump();
}

namespace {

// ---------------------------------------------------------------------------
// Output helpers

class CsvFile {
 public:
  CsvFile(const ExperimentSpec& spec, std::string name, const std::string& title)
      : path_(spec.output_dir / std::move(name)) {
    buf_ << std::setprecision(10);
    buf_ << "# mcache " << title << '\n';
    buf_ << "# config: " << describe(spec) << '\n';
    buf_ << "# seed: " << spec.sim.seed << '\n';
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    buf_ << "# generated: " << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << '\n';
  }

  std::ostream& out() { return buf_; }

  /// Written to a temporary sibling, then renamed into place.
  const std::filesystem::path& commit() {
    std::filesystem::create_directories(path_.parent_path());
    const auto tmp = std::filesystem::path(path_.string() + ".tmp");
    {
      std::ofstream f(tmp, std::ios::binary);
      f << buf_.str();
      if (!f) throw std::runtime_error("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, path_);
    return path_;
  }

 private:
  std::filesystem::path path_;
  std::ostringstream buf_;
};

void write_cell(std::ostream& os, std::optional<double> v) {
  if (v) os << *v;
}

struct Row {
  double x = 0.0;
  std::vector<std::optional<double>> cells;
};

void write_rows(CsvFile& csv, const std::string& columns, const std::vector<Row>& rows) {
  auto& os = csv.out();
  os << columns << '\n';
  for (const auto& r : rows) {
    os << r.x;
    for (const auto& c : r.cells) {
      os << ',';
      write_cell(os, c);
    }
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Policies and evaluation

CachingPolicy resolve_policy(const ExperimentSpec& spec, const Popularity& a,
                             const NetworkConfig& cfg, std::ostream& log,
                             std::ostream* trace = nullptr) {
  const std::string& kind = spec.policy;
  if (kind == "file") {
    std::ifstream in(spec.policy_path);
    if (!in) throw std::runtime_error("cannot open policy file " + spec.policy_path);
    CachingDistribution p = read_distribution(in);
    if (p.num_files() != cfg.num_files || p.cache_size() != cfg.cache_size) {
      throw ConfigError("policy file shape differs from network.num_files/cache_size");
    }
    return CachingPolicy::from_distribution(std::move(p));
  }
  if (kind == "algorithm3") {
    Algorithm3Result r = algorithm3(a, cfg, spec.candidate_budget, spec.sim.seed);
    log << "algorithm3: " << r.pruned.fixed.size() << " fixed, " << r.pruned.free.size()
        << " free, " << r.candidates << (r.exhaustive ? " admissible" : " pooled")
        << " candidates\n";
    return CachingPolicy::from_distribution(std::move(r.distribution));
  }
  if (kind == "waterfill") {
    const WaterfillResult w = waterfill_T(a, cfg);
    return CachingPolicy::from_distribution(decompose_marginals(w.solution, cfg.cache_size));
  }
  if (kind == "gradient") {
    GradientOptions opts;
    opts.step_scale = spec.step_scale;
    opts.max_iters = spec.max_iters;
    opts.stop_tol = spec.stop_tol;
    opts.trace = trace;
    GradientResult r = gradient_projection(a, cfg, opts);
    log << "gradient projection: " << r.iterations << " iterations"
        << (r.converged ? "" : " (iteration limit reached)") << '\n';
    return CachingPolicy::from_distribution(std::move(r.distribution));
  }
  if (kind.rfind("baseline", 0) == 0) return baseline(a, cfg, kind.back() - '0');
  throw ConfigError("unknown policy " + kind);
}

std::optional<double> analytic_q(const CachingPolicy& policy, const Popularity& a,
                                 const NetworkConfig& cfg) {
  const auto report = evaluate_policy(policy, a, cfg);
  if (!report) return std::nullopt;
  return report->q;
}

struct McCells {
  std::optional<double> q, ci, q_uc, ci_uc;
};

McCells run_mc(const ExperimentSpec& spec, const CachingPolicy& policy, const Popularity& a,
               const NetworkConfig& cfg) {
  if (!spec.simulate) return {};
  const McResult r = monte_carlo(policy, a, cfg, spec.sim, spec.jobs);
  McCells c{r.multicast.q_hat, r.multicast.half_width_95, std::nullopt, std::nullopt};
  if (r.unicast) {
    c.q_uc = r.unicast->q_hat;
    c.ci_uc = r.unicast->half_width_95;
  }
  return c;
}

NetworkConfig figure_network(double bs, double users, double snr_db, double rate, int n, int k) {
  NetworkConfig cfg;
  cfg.bs_density = bs;
  cfg.user_density = users;
  cfg.path_loss = 4.0;
  cfg.bandwidth_hz = 1e7;
  cfg.target_rate = rate;
  cfg.snr = Snr::from_db(snr_db);
  cfg.num_files = n;
  cfg.cache_size = k;
  return cfg;
}

void apply_axis(const std::string& axis, double v, NetworkConfig& cfg, double& gamma) {
  if (axis == "bs_density") cfg.bs_density = v;
  else if (axis == "user_density") cfg.user_density = v;
  else if (axis == "path_loss_exponent") cfg.path_loss = v;
  else if (axis == "snr_db") cfg.snr = Snr::from_db(v);
  else if (axis == "cache_size") cfg.cache_size = static_cast<int>(std::lround(v));
  else if (axis == "num_files") cfg.num_files = static_cast<int>(std::lround(v));
  else if (axis == "zipf_gamma") gamma = v;
  else if (axis == "target_rate_bps") cfg.target_rate = v;
  else throw ConfigError("unknown sweep axis " + axis);
  cfg.validate();
}

// ---------------------------------------------------------------------------
// Figure and table targets

void reproduce_fig2(const ExperimentSpec& spec, std::ostream& log) {
  const Popularity a = zipf(5, 2.0);
  const auto p = CachingDistribution::from_file_probs(std::vector<double>{0.6811, 0.3189, 0, 0, 0});
  const auto policy = CachingPolicy::from_distribution(p);
  std::vector<Row> rows;
  for (double snr : {0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0}) {
    const NetworkConfig cfg = figure_network(0.01, 0.1, snr, 5e5, 5, 1);
    const McCells mc = run_mc(spec, policy, a, cfg);
    rows.push_back({snr, {q1(p, a, cfg).q, q1_inf(p, a, cfg), mc.q, mc.ci, mc.q_uc, mc.ci_uc}});
    log << "fig2 snr_db=" << snr << " done\n";
  }
  CsvFile csv(spec, "fig2.csv", "reproduce fig2");
  write_rows(csv, "snr_db,q_analytical,q_asymptotic,q_mc,ci,q_uc,ci_uc", rows);
  log << "wrote " << csv.commit().string() << '\n';
}

CachingDistribution fig3_distribution() {
  return CachingDistribution(5, 4, {{Combination{0, 1, 2, 3}, 0.6811},
                                    {Combination{0, 1, 2, 4}, 0.3189},
                                    {Combination{0, 1, 3, 4}, 0.0},
                                    {Combination{0, 2, 3, 4}, 0.0},
                                    {Combination{1, 2, 3, 4}, 0.0}});
}

void reproduce_fig3(const ExperimentSpec& spec, std::ostream& log) {
  const Popularity a = zipf(5, 2.0);
  const auto p = fig3_distribution();
  const auto policy = CachingPolicy::from_distribution(p);
  const std::string columns = ",q_analytical,q_mc,ci,q_uc,ci_uc";
  std::vector<Row> by_snr, by_users;
  for (double snr : {0.0, 10.0, 20.0, 30.0, 40.0, 50.0}) {
    const NetworkConfig cfg = figure_network(0.01, 0.1, snr, 5e5, 5, 4);
    const McCells mc = run_mc(spec, policy, a, cfg);
    by_snr.push_back({snr, {qK(p, a, cfg).q, mc.q, mc.ci, mc.q_uc, mc.ci_uc}});
    log << "fig3a snr_db=" << snr << " done\n";
  }
  for (double users : {0.02, 0.05, 0.1, 0.2, 0.5}) {
    const NetworkConfig cfg = figure_network(0.01, users, 30.0, 5e5, 5, 4);
    const McCells mc = run_mc(spec, policy, a, cfg);
    by_users.push_back({users, {qK(p, a, cfg).q, mc.q, mc.ci, mc.q_uc, mc.ci_uc}});
    log << "fig3b user_density=" << users << " done\n";
  }
  CsvFile a_csv(spec, "fig3a_snr.csv", "reproduce fig3 (snr)");
  write_rows(a_csv, "snr_db" + columns, by_snr);
  CsvFile b_csv(spec, "fig3b_user_density.csv", "reproduce fig3 (user density)");
  write_rows(b_csv, "user_density" + columns, by_users);
  log << "wrote " << a_csv.commit().string() << " and " << b_csv.commit().string() << '\n';
}

void reproduce_fig4(const ExperimentSpec& spec, std::ostream& log) {
  const Popularity a = zipf(8, 0.8);
  std::vector<Row> rows;
  using clock = std::chrono::steady_clock;
  for (double snr : {0.0, 10.0, 20.0, 30.0, 40.0}) {
    const NetworkConfig cfg = figure_network(0.01, 0.1, snr, 5e5, 8, 4);
    const auto t0 = clock::now();
    GradientOptions opts;
    opts.step_scale = spec.step_scale;
    opts.max_iters = spec.max_iters;
    opts.stop_tol = spec.stop_tol;
    const GradientResult local = gradient_projection(a, cfg, opts);
    const auto t1 = clock::now();
    const Algorithm3Result asym = algorithm3(a, cfg, spec.candidate_budget, spec.sim.seed);
    const auto t2 = clock::now();
    const double q_local = qK(local.distribution, a, cfg).q;
    const double q_asym = qK(asym.distribution, a, cfg).q;
    rows.push_back({snr,
                    {q_local, q_asym, std::chrono::duration<double>(t1 - t0).count(),
                     std::chrono::duration<double>(t2 - t1).count()}});
    log << "fig4 snr_db=" << snr << " local=" << q_local << " asymptotic=" << q_asym << '\n';
  }
  CsvFile csv(spec, "fig4.csv", "reproduce fig4");
  write_rows(csv, "snr_db,q_local_opt,q_asymp_opt,seconds_local,seconds_asymp", rows);
  log << "wrote " << csv.commit().string() << '\n';
}

struct SweepBase {
  NetworkConfig cfg;
  double gamma;
};

void policy_comparison(const ExperimentSpec& spec, const SweepBase& base, const std::string& axis,
                       const std::vector<double>& values, const std::string& file,
                       std::ostream& log) {
  std::vector<Row> rows;
  for (double v : values) {
    NetworkConfig cfg = base.cfg;
    double gamma = base.gamma;
    apply_axis(axis, v, cfg, gamma);
    const Popularity a = zipf(cfg.num_files, gamma);
    Row row{v, {}};
    const auto proposed =
        CachingPolicy::from_distribution(algorithm3(a, cfg, spec.candidate_budget, spec.sim.seed).distribution);
    for (const CachingPolicy& policy :
         {proposed, baseline(a, cfg, 1), baseline(a, cfg, 2), baseline(a, cfg, 3)}) {
      if (policy.kind() != CachingPolicy::Kind::IndependentDraws) {
        row.cells.push_back(analytic_q(policy, a, cfg));
      }
      const McCells mc = run_mc(spec, policy, a, cfg);
      row.cells.push_back(mc.q);
      row.cells.push_back(mc.ci);
    }
    rows.push_back(std::move(row));
    log << file << ' ' << axis << '=' << v << " done\n";
  }
  CsvFile csv(spec, file, "policy comparison over " + axis);
  write_rows(csv,
             axis + ",proposed,proposed_mc,proposed_ci,baseline1,baseline1_mc,baseline1_ci,"
                    "baseline2_mc,baseline2_ci,baseline3,baseline3_mc,baseline3_ci",
             rows);
  log << "wrote " << csv.commit().string() << '\n';
}

SweepBase large_scale_base(const ExperimentSpec& spec) {
  const int n = spec.paper_fidelity ? 1000 : 100;
  const int k = spec.paper_fidelity ? 30 : 10;
  return {figure_network(0.02, 0.1, 30.0, 1e5, n, k), 0.6};
}

void reproduce_fig5(const ExperimentSpec& spec, std::ostream& log) {
  const SweepBase base = large_scale_base(spec);
  policy_comparison(spec, base, "cache_size", {10, 20, 30, 40, 50, 60}, "fig5a_cache_size.csv", log);
  policy_comparison(spec, base, "zipf_gamma", {0.2, 0.4, 0.6, 0.8, 1.0, 1.2},
                    "fig5b_zipf_gamma.csv", log);
}

void reproduce_fig6(const ExperimentSpec& spec, std::ostream& log) {
  const SweepBase base = large_scale_base(spec);
  policy_comparison(spec, base, "bs_density", {0.005, 0.01, 0.02, 0.04, 0.08},
                    "fig6a_bs_density.csv", log);
  policy_comparison(spec, base, "user_density", {0.02, 0.05, 0.1, 0.2, 0.5},
                    "fig6b_user_density.csv", log);
}

void reproduce_table1(const ExperimentSpec& spec, std::ostream& log) {
  std::vector<int> sizes = {200, 400};
  if (spec.paper_fidelity) sizes.push_back(1000);
  std::vector<Row> rows;
  for (int n : sizes) {
    const NetworkConfig cfg = figure_network(0.01, 0.1, 30.0, 5e5, n, 20);
    const Popularity a = zipf(n, 1.2);
    const Algorithm3Result r = algorithm3(a, cfg, spec.candidate_budget, spec.sim.seed);
    const double q = qK(r.distribution, a, cfg).q;
    const McCells mc = run_mc(spec, CachingPolicy::from_distribution(r.distribution), a, cfg);
    std::optional<double> gap;
    if (mc.q) gap = q - *mc.q;
    rows.push_back({static_cast<double>(n),
                    {q, mc.q, mc.ci, gap, static_cast<double>(r.candidates),
                     r.exhaustive ? 1.0 : 0.0}});
    log << "table1 N=" << n << " analytical=" << q << '\n';
  }
  CsvFile csv(spec, "table1.csv", "reproduce table1");
  write_rows(csv, "num_files,q_analytical,q_mc,ci,gap,candidates,exhaustive", rows);
  log << "wrote " << csv.commit().string() << '\n';
}

// ---------------------------------------------------------------------------
// Generic modes

void run_analyze(const ExperimentSpec& spec, std::ostream& log) {
  const Popularity a = spec.popularity();
  const CachingPolicy policy = resolve_policy(spec, a, spec.network, log);
  const auto report = evaluate_policy(policy, a, spec.network);
  if (report) {
    CsvFile csv(spec, "analyze.csv", "analyze");
    write_report_csv(csv.out(), *report, a);
    log << "q = " << report->q << "; wrote " << csv.commit().string() << '\n';
  } else {
    log << "policy " << spec.policy << " has no analytical model; use simulate\n";
  }
  if (spec.simulate) {
    CsvFile csv(spec, "simulate.csv", "simulate");
    write_mc_csv(csv.out(), monte_carlo(policy, a, spec.network, spec.sim, spec.jobs));
    log << "wrote " << csv.commit().string() << '\n';
  }
}

void run_optimize(const ExperimentSpec& spec, std::ostream& log) {
  const Popularity a = spec.popularity();
  std::optional<CsvFile> trace;
  if (spec.trace && spec.policy == "gradient") trace.emplace(spec, "trace.csv", "gradient trace");
  const CachingPolicy policy =
      resolve_policy(spec, a, spec.network, log, trace ? &trace->out() : nullptr);
  if (trace) log << "wrote " << trace->commit().string() << '\n';

  const CachingDistribution& p = *policy.distribution();
  const auto dist_path = spec.output_dir / "distribution.txt";
  std::filesystem::create_directories(spec.output_dir);
  {
    std::ofstream f(dist_path);
    write_distribution(f, p);
    if (!f) throw std::runtime_error("cannot write " + dist_path.string());
  }
  const EvalReport report = qK(p, a, spec.network);
  CsvFile csv(spec, "optimize.csv", "optimize " + spec.policy);
  write_report_csv(csv.out(), report, a);
  log << "q = " << report.q << "; wrote " << dist_path.string() << " and "
      << csv.commit().string() << '\n';
}

void run_simulate(const ExperimentSpec& spec, std::ostream& log) {
  const Popularity a = spec.popularity();
  const CachingPolicy policy = resolve_policy(spec, a, spec.network, log);
  const McResult r = monte_carlo(policy, a, spec.network, spec.sim, spec.jobs);
  CsvFile csv(spec, "simulate.csv", "simulate");
  write_mc_csv(csv.out(), r);
  log << "q_mc = " << r.multicast.q_hat << " +- " << r.multicast.half_width_95 << "; wrote "
      << csv.commit().string() << '\n';
}

void run_sweep(const ExperimentSpec& spec, std::ostream& log) {
  std::vector<Row> rows;
  for (double v : spec.sweep_values) {
    NetworkConfig cfg = spec.network;
    double gamma = spec.zipf_gamma.value_or(0.0);
    apply_axis(spec.sweep_axis, v, cfg, gamma);
    Popularity a = spec.probabilities.empty() ? zipf(cfg.num_files, gamma) : spec.popularity();
    if (a.size() != static_cast<std::size_t>(cfg.num_files)) {
      throw ConfigError("sweep: explicit popularity cannot change num_files");
    }
    const CachingPolicy policy = resolve_policy(spec, a, cfg, log);
    const McCells mc = run_mc(spec, policy, a, cfg);
    rows.push_back({v, {analytic_q(policy, a, cfg), mc.q, mc.ci}});
    log << spec.sweep_axis << '=' << v << " done\n";
  }
  CsvFile csv(spec, "sweep_" + spec.sweep_axis + ".csv", "sweep " + spec.sweep_axis);
  write_rows(csv, spec.sweep_axis + ",q_analytical,q_mc,ci", rows);
  log << "wrote " << csv.commit().string() << '\n';
}

}  // namespace

int run(const ExperimentSpec& spec, std::ostream& log) {
  try {
    switch (spec.mode) {
      case Mode::Analyze:
        run_analyze(spec, log);
        break;
      case Mode::Optimize:
        run_optimize(spec, log);
        break;
      case Mode::Simulate:
        run_simulate(spec, log);
        break;
      case Mode::Sweep:
        run_sweep(spec, log);
        break;
      case Mode::Reproduce:
        if (spec.target == "fig2") reproduce_fig2(spec, log);
        else if (spec.target == "fig3") reproduce_fig3(spec, log);
        else if (spec.target == "fig4") reproduce_fig4(spec, log);
        else if (spec.target == "fig5") reproduce_fig5(spec, log);
        else if (spec.target == "fig6") reproduce_fig6(spec, log);
        else if (spec.target == "table1") reproduce_table1(spec, log);
        else throw ConfigError("unknown reproduce target " + spec.target);
        break;
    }
  } catch (const ConfigError& e) {
    log << "error: invalid configuration: " << e.what() << '\n';
    return 2;
  } catch (const InfeasibleError& e) {
    log << "error: infeasible: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace mcache
