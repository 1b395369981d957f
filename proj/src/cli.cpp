#include "clustersim/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "clustersim/analysis.hpp"
#include "clustersim/errors.hpp"
#include "clustersim/geometry.hpp"
#include "clustersim/montecarlo.hpp"
#include "clustersim/parallel.hpp"

namespace clustersim::cli {
namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kOptionNames = {
    "lambda-b", "ratio", "alpha",  "dnt",    "nt",     "snr-db", "t-db",   "mode",           "trials", "seed",
    "btot",  "policy", "max-n",  "over",   "values", "metric", "window-clusters", "b0-rule"};

Settings defaults() {
  return {{"lambda-b", "1"},       {"ratio", "3"},         {"alpha", "4"},      {"dnt", "7"},        {"snr-db", "10"},
          {"t-db", "-10:2:20"},   {"mode", "both"},    {"trials", "10000"}, {"seed", "1"},
          {"btot", "50"},         {"policy", "adaptive,equal-bias"},        {"max-n", "40"},
          {"metric", "rate"},     {"window-clusters", "100"},               {"b0-rule", "printed"}};
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError("invalid number for " + key + ": '" + text + "'");
  }
  return v;
}

long to_integer(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 9e15) throw ConfigError(key + " must be an integer");
  return static_cast<long>(v);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

std::string command_name(Command c) {
  switch (c) {
    case Command::Coverage: return "coverage";
    case Command::Rate: return "rate";
    case Command::RateLoss: return "rate-loss";
    case Command::PmfN: return "pmf-n";
    case Command::Sweep: return "sweep";
  }
  return "";
}

Command command_from(const std::string& s) {
  for (Command c : {Command::Coverage, Command::Rate, Command::RateLoss, Command::PmfN, Command::Sweep}) {
    if (command_name(c) == s) return c;
  }
  throw ConfigError("unknown command '" + s + "'");
}

enum class Metric { Coverage, Rate, RateLoss };

struct Cell {
  std::optional<double> mc_mean, mc_ci95, analytic_value, analytic_err;
};

struct Table {
  std::vector<std::string> series;
  std::vector<std::pair<double, std::vector<Cell>>> rows;
};

std::vector<montecarlo::Policy> parse_policies(const std::string& text) {
  std::vector<montecarlo::Policy> out;
  for (const auto& p : split(text, ',')) {
    if (p == "adaptive") out.push_back(montecarlo::Policy::Adaptive);
    else if (p == "equal-bias") out.push_back(montecarlo::Policy::EqualBias);
    else if (p == "equal-nobias") out.push_back(montecarlo::Policy::EqualNoBias);
    else throw ConfigError("unknown policy '" + p + "'");
  }
  if (out.empty()) throw ConfigError("policy list is empty");
  return out;
}

std::string policy_series(montecarlo::Policy p) {
  switch (p) {
    case montecarlo::Policy::Adaptive: return "adaptive";
    case montecarlo::Policy::EqualBias: return "equal_bias";
    case montecarlo::Policy::EqualNoBias: return "equal_nobias";
  }
  return "";
}

bool wants_mc(Mode m) { return m != Mode::Analytic; }
bool wants_analytic(Mode m) { return m != Mode::Mc; }

void set_param(SimConfig& cfg, const std::string& name, double v) {
  if (name == "ratio") {
    if (!(v >= 1.0)) throw ConfigError("ratio must be at least 1");
    cfg = cfg.with_ratio(v);
  } else if (name == "btot") {
    cfg.b_tot = static_cast<int>(to_integer(name, format_number(v)));
  } else if (name == "snr-db") {
    cfg.snr_db = v;
  } else if (name == "alpha") {
    cfg.alpha = v;
  } else if (name == "dnt") {
    cfg.antenna_mode = FollowN{static_cast<int>(to_integer(name, format_number(v)))};
  } else if (name == "nt") {
    cfg.antenna_mode = Fixed{static_cast<int>(to_integer(name, format_number(v)))};
  } else {
    throw ConfigError("cannot sweep over '" + name + "'");
  }
}

std::string grid_column(Command c, const std::string& over) {
  switch (c) {
    case Command::Coverage: return "t_db";
    case Command::Rate: return "ratio";
    case Command::RateLoss: return "btot";
    case Command::PmfN: return "n";
    case Command::Sweep: return over;
  }
  return "";
}

// ---- evaluation ----------------------------------------------------------------

analysis::BoundValue coverage_bound(const SimConfig& cfg, double t) {
  return cfg.follows_n() ? analysis::coverage_lb_ic(cfg, t) : analysis::coverage_lb_thresholded(cfg, t);
}

std::vector<std::vector<Cell>> eval_coverage(const SimConfig& cfg, Mode mode, const std::vector<double>& t_db) {
  std::vector<double> t(t_db.size());
  std::transform(t_db.begin(), t_db.end(), t.begin(), [](double x) { return std::pow(10.0, x / 10.0); });
  std::vector<std::vector<Cell>> rows(t.size(), std::vector<Cell>(2));
  if (wants_mc(mode)) {
    const auto trials = montecarlo::run_trials(cfg);
    const auto ic = montecarlo::estimate_coverage(trials, t, montecarlo::Strategy::Icin);
    const auto nic = montecarlo::estimate_coverage(trials, t, montecarlo::Strategy::NoCoordination);
    for (std::size_t i = 0; i < t.size(); ++i) {
      rows[i][0].mc_mean = ic[i].mean;
      rows[i][0].mc_ci95 = ic[i].ci95_halfwidth;
      rows[i][1].mc_mean = nic[i].mean;
      rows[i][1].mc_ci95 = nic[i].ci95_halfwidth;
    }
  }
  if (wants_analytic(mode)) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto b = coverage_bound(cfg, t[i]);
      rows[i][0].analytic_value = b.value;
      rows[i][0].analytic_err = b.quadrature_error;
    }
  }
  return rows;
}

std::vector<Cell> eval_rate(const SimConfig& cfg, Mode mode) {
  std::vector<Cell> row(2);
  if (wants_mc(mode)) {
    const auto trials = montecarlo::run_trials(cfg);
    const auto ic = montecarlo::estimate_rate(trials, montecarlo::Strategy::Icin);
    const auto nic = montecarlo::estimate_rate(trials, montecarlo::Strategy::NoCoordination);
    row[0].mc_mean = ic.mean;
    row[0].mc_ci95 = ic.ci95_halfwidth;
    row[1].mc_mean = nic.mean;
    row[1].mc_ci95 = nic.ci95_halfwidth;
  }
  if (wants_analytic(mode)) {
    const auto b = cfg.follows_n() ? analysis::rate_lb_ic(cfg) : analysis::rate_lb_thresholded(cfg);
    row[0].analytic_value = b.value;
    row[0].analytic_err = b.quadrature_error;
  }
  return row;
}

std::vector<Cell> eval_rate_loss(const SimConfig& cfg, Mode mode, const std::vector<montecarlo::Policy>& policies,
                                 feedback::B0Rule rule) {
  if (!cfg.follows_n()) throw ConfigError("rate-loss needs antennas that follow N (--dnt, not --nt)");
  std::vector<Cell> row(policies.size());
  if (wants_mc(mode)) {
    auto opt = montecarlo::default_trial_options(cfg, policies);
    opt.b0_rule = rule;
    const auto trials = montecarlo::run_trials(cfg, opt);
    for (std::size_t p = 0; p < policies.size(); ++p) {
      const auto e = montecarlo::estimate_rate_loss(trials, p);
      row[p].mc_mean = e.mean;
      row[p].mc_ci95 = e.ci95_halfwidth;
    }
  }
  if (wants_analytic(mode)) {
    for (std::size_t p = 0; p < policies.size(); ++p) {
      if (policies[p] == montecarlo::Policy::EqualBias) {
        row[p].analytic_value = analysis::rate_loss_ub_equal(cfg);
        row[p].analytic_err = 0.0;
      } else if (policies[p] == montecarlo::Policy::Adaptive) {
        const auto e = montecarlo::estimate_adaptive_loss_bound(cfg, rule);
        row[p].analytic_value = e.mean;
        row[p].analytic_err = e.ci95_halfwidth;
      }
    }
  }
  return row;
}

Table evaluate(const RunSpec& spec) {
  Table table;
  const Mode mode = spec.mode;
  const auto& s = spec.settings;
  const auto policies = parse_policies(s.at("policy"));
  const auto rule = s.at("b0-rule") == "stationary" ? feedback::B0Rule::Stationary : feedback::B0Rule::Printed;
  auto policy_names = [&] {
    std::vector<std::string> names;
    for (auto p : policies) names.push_back(policy_series(p));
    return names;
  };

  switch (spec.command) {
    case Command::Coverage: {
      table.series = {"ic", "nic"};
      auto rows = eval_coverage(spec.cfg, mode, spec.grid);
      for (std::size_t i = 0; i < spec.grid.size(); ++i) table.rows.emplace_back(spec.grid[i], std::move(rows[i]));
      break;
    }
    case Command::Rate:
      table.series = {"ic", "nic"};
      table.rows.emplace_back(spec.cfg.ratio(), eval_rate(spec.cfg, mode));
      break;
    case Command::RateLoss:
      table.series = policy_names();
      for (double b : spec.grid) {
        SimConfig cfg = spec.cfg;
        set_param(cfg, "btot", b);
        table.rows.emplace_back(b, eval_rate_loss(cfg, mode, policies, rule));
      }
      break;
    case Command::PmfN: {
      table.series = {"pmf"};
      std::vector<double> freq;
      if (wants_mc(mode)) {
        std::vector<int> counts(spec.cfg.trials);
        parallel_for(spec.cfg.trials, [&](std::size_t i) {
          Rng rng = substream(spec.cfg.seed, i);
          counts[i] = geometry::sample_typical_cluster(spec.cfg, rng).n();
        });
        freq.assign(spec.grid.size(), 0.0);
        for (int c : counts) {
          if (c >= 0 && static_cast<std::size_t>(c) < freq.size()) freq[static_cast<std::size_t>(c)] += 1.0;
        }
      }
      const double m = static_cast<double>(spec.cfg.trials);
      for (std::size_t i = 0; i < spec.grid.size(); ++i) {
        Cell c;
        if (wants_mc(mode)) {
          const double p = freq[i] / m;
          c.mc_mean = p;
          c.mc_ci95 = 1.96 * std::sqrt(p * (1.0 - p) / m);
        }
        if (wants_analytic(mode)) {
          c.analytic_value = analysis::pmf_n(static_cast<int>(spec.grid[i]), spec.cfg.ratio());
          c.analytic_err = 0.0;
        }
        table.rows.emplace_back(spec.grid[i], std::vector<Cell>{c});
      }
      break;
    }
    case Command::Sweep: {
      const auto over = s.at("over");
      const auto metric = s.at("metric");
      if (metric == "coverage") {
        const auto t = parse_grid(s.at("t-db"));
        if (t.size() != 1) throw ConfigError("sweep with metric=coverage needs a single --t-db value");
        table.series = {"ic", "nic"};
        for (double v : spec.grid) {
          SimConfig cfg = spec.cfg;
          set_param(cfg, over, v);
          table.rows.emplace_back(v, eval_coverage(cfg, mode, t).front());
        }
      } else if (metric == "rate") {
        table.series = {"ic", "nic"};
        for (double v : spec.grid) {
          SimConfig cfg = spec.cfg;
          set_param(cfg, over, v);
          table.rows.emplace_back(v, eval_rate(cfg, mode));
        }
      } else if (metric == "rate-loss") {
        table.series = policy_names();
        for (double v : spec.grid) {
          SimConfig cfg = spec.cfg;
          set_param(cfg, over, v);
          table.rows.emplace_back(v, eval_rate_loss(cfg, mode, policies, rule));
        }
      } else {
        throw ConfigError("unknown metric '" + metric + "'");
      }
      break;
    }
  }
  return table;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  const auto t = trim(text);
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw ConfigError("range must be start:step:stop, got '" + text + "'");
    const double a = to_double("range start", parts[0]);
    const double h = to_double("range step", parts[1]);
    const double b = to_double("range stop", parts[2]);
    if (!(h > 0) || b < a) throw ConfigError("range needs a positive step and stop >= start");
    const auto n = static_cast<long>(std::floor((b - a) / h + 1e-9));
    if (n > 1000000) throw ConfigError("range too long");
    for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * h);
  } else {
    for (const auto& p : split(t, ',')) out.push_back(to_double("grid value", p));
  }
  if (out.empty()) throw ConfigError("empty grid");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (!(out[i] > out[i - 1])) throw ConfigError("grid values must be strictly increasing");
  }
  return out;
}

Settings read_config_file(const std::string& path) {
  Settings s;
  std::istringstream in(read_file(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    const auto key = trim(line.substr(0, eq));
    if (std::find(kOptionNames.begin(), kOptionNames.end(), key) == kOptionNames.end()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    s[key] = trim(line.substr(eq + 1));
  }
  return s;
}

Settings read_replay_file(const std::string& path) {
  Settings s;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) != 0) break;
    if (line.rfind("# command=", 0) == 0) s["command"] = trim(line.substr(10));
    if (line.rfind("# cfg ", 0) == 0) {
      const auto body = line.substr(6);
      const auto eq = body.find('=');
      if (eq != std::string::npos) s[body.substr(0, eq)] = body.substr(eq + 1);
    }
  }
  if (!s.count("command")) throw ConfigError(path + ": no metadata block to replay");
  return s;
}

RunSpec make_run_spec(Command command, const Settings& given) {
  RunSpec spec;
  spec.command = command;
  spec.settings = defaults();
  for (const auto& [k, v] : given) spec.settings[k] = v;
  auto& s = spec.settings;

  const auto mode = s.at("mode");
  if (mode == "mc") spec.mode = Mode::Mc;
  else if (mode == "analytic") spec.mode = Mode::Analytic;
  else if (mode == "both") spec.mode = Mode::Both;
  else throw ConfigError("mode must be mc, analytic or both");

  SimConfig& cfg = spec.cfg;
  cfg.lambda_b = to_double("lambda-b", s.at("lambda-b"));
  if (!(cfg.lambda_b > 0)) throw ConfigError("lambda-b must be positive");
  cfg.alpha = to_double("alpha", s.at("alpha"));
  cfg.snr_db = to_double("snr-db", s.at("snr-db"));
  cfg.window_cluster_count = to_double("window-clusters", s.at("window-clusters"));
  const long trials = to_integer("trials", s.at("trials"));
  if (trials < 1) throw ConfigError("trials must be at least 1");
  cfg.trials = static_cast<std::size_t>(trials);
  const long seed = to_integer("seed", s.at("seed"));
  if (seed < 0) throw ConfigError("seed must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  set_param(cfg, "ratio", to_double("ratio", s.at("ratio")));
  set_param(cfg, "dnt", to_double("dnt", s.at("dnt")));
  if (s.count("nt")) set_param(cfg, "nt", to_double("nt", s.at("nt")));
  if (s.at("b0-rule") != "printed" && s.at("b0-rule") != "stationary") {
    throw ConfigError("b0-rule must be printed or stationary");
  }
  parse_policies(s.at("policy"));

  switch (command) {
    case Command::Coverage:
      spec.grid = parse_grid(s.at("t-db"));
      break;
    case Command::Rate:
      spec.grid = {cfg.ratio()};
      break;
    case Command::RateLoss:
      spec.grid = parse_grid(s.at("btot"));
      for (double b : spec.grid) set_param(cfg, "btot", b);
      break;
    case Command::PmfN: {
      const long m = to_integer("max-n", s.at("max-n"));
      if (m < 0) throw ConfigError("max-n must be non-negative");
      for (long n = 0; n <= m; ++n) spec.grid.push_back(static_cast<double>(n));
      break;
    }
    case Command::Sweep: {
      if (!s.count("over") || !s.count("values")) throw ConfigError("sweep needs --over and --values");
      spec.grid = parse_grid(s.at("values"));
      SimConfig probe = cfg;
      for (double v : spec.grid) set_param(probe, s.at("over"), v);
      break;
    }
  }
  if (command != Command::RateLoss && !(command == Command::Sweep && s.at("over") == "btot")) {
    const auto b = parse_grid(s.at("btot"));
    if (b.size() != 1) throw ConfigError("btot must be a single value for this command");
    set_param(cfg, "btot", b.front());
  }
  cfg.validate();
  spec.grid_param = grid_column(command, s.count("over") ? s.at("over") : "");
  return spec;
}

std::string render(const RunSpec& spec) {
  const Table table = evaluate(spec);
  std::string out;
  out += "# cluster_sim " + std::string(kVersion) + "\n";
  out += "# command=" + command_name(spec.command) + "\n";
  for (const auto& [k, v] : spec.settings) out += "# cfg " + k + "=" + v + "\n";
  out += "grid_param,value";
  for (const auto& s : table.series) {
    out += "," + s + "_mc_mean," + s + "_mc_ci95," + s + "_analytic_value," + s + "_analytic_err";
  }
  out += "\n";
  auto cell = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& [x, cells] : table.rows) {
    out += spec.grid_param + "," + format_number(x);
    for (const auto& c : cells) {
      out += "," + cell(c.mc_mean) + "," + cell(c.mc_ci95) + "," + cell(c.analytic_value) + "," + cell(c.analytic_err);
    }
    out += "\n";
  }
  return out;
}

int main(int argc, char** argv, std::ostream& err) {
  CLI::App app{"Clustered interference nulling: Monte Carlo and analytical bounds"};
  app.set_version_flag("--version", kVersion);
  std::string replay_path, output_path;
  app.add_option("--replay", replay_path, "Re-run the configuration stored in a CSV written by this tool");
  app.add_option("--output", output_path, "CSV destination (default: standard output)");

  struct Sub {
    Command command;
    CLI::App* app;
    Settings values;
    std::string config_path;
  };
  std::vector<Sub> subs;
  subs.reserve(5);
  const std::vector<std::pair<Command, std::string>> described = {
      {Command::Coverage, "Coverage probability versus SINR threshold"},
      {Command::Rate, "Average rate"},
      {Command::RateLoss, "Mean rate loss from limited feedback versus total bits"},
      {Command::PmfN, "Distribution of the number of intra-cluster interferers"},
      {Command::Sweep, "One metric versus a swept parameter"}};
  for (const auto& [c, text] : described) {
    subs.push_back({c, app.add_subcommand(command_name(c), text), {}, {}});
  }
  for (auto& sub : subs) {
    for (const auto& name : kOptionNames) sub.app->add_option("--" + name, sub.values[name]);
    sub.app->add_option("--config", sub.config_path, "Flat key=value settings file");
    sub.app->add_option("--output", output_path, "CSV destination (default: standard output)");
  }
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cout, err);
    return code == 0 ? 0 : 2;
  }

  try {
    RunSpec spec;
    if (!replay_path.empty()) {
      auto s = read_replay_file(replay_path);
      const auto command = command_from(s.at("command"));
      s.erase("command");
      spec = make_run_spec(command, s);
    } else {
      const Sub* chosen = nullptr;
      for (const auto& sub : subs) {
        if (sub.app->parsed()) chosen = &sub;
      }
      if (!chosen) {
        err << app.help();
        return 2;
      }
      Settings merged;
      if (!chosen->config_path.empty()) merged = read_config_file(chosen->config_path);
      for (const auto& name : kOptionNames) {
        if (chosen->app->get_option("--" + name)->count() > 0) merged[name] = chosen->values.at(name);
      }
      spec = make_run_spec(chosen->command, merged);
    }
    const std::string csv = render(spec);
    if (output_path.empty()) {
      std::cout << csv;
      std::cout.flush();
      if (!std::cout) throw IoError("cannot write to standard output");
    } else {
      std::ofstream out(output_path, std::ios::binary);
      if (!out) throw IoError("cannot open " + output_path + " for writing");
      out << csv;
      out.close();
      if (!out) throw IoError("failed writing " + output_path);
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const QuadratureError& e) {
    err << "quadrature failure: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace clustersim::cli
