#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mscan/csv_io.hpp"
#include "mscan/errors.hpp"
#include "mscan/models.hpp"
#include "mscan/montecarlo.hpp"
#include "mscan/scan.hpp"

namespace mscan::cli {

namespace {

using Json = nlohmann::ordered_json;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

std::vector<double> parse_reals(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split(text, ',')) out.push_back(parse_real(s));
  if (out.empty()) throw InvalidInput("expected a comma-separated list of numbers");
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& s : split(text, ',')) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw InvalidInput("not a sample size: '" + s + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw InvalidInput("expected a comma-separated list of sample sizes");
  return out;
}

ModelKind parse_model(const std::string& text) {
  if (text == "interval") return ModelKind::interval;
  if (text == "missing") return ModelKind::missing;
  throw InvalidInput("unknown model '" + text + "' (interval, missing)");
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string threshold_scale(const CriticalValue& cv) { return cv.root_n_scale() ? "sqrt(n)*S" : "S"; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot write '" + path + "'");
  f << text;
  if (!f) throw InvalidInput("error writing '" + path + "'");
}

void emit_json(const Json& j, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_text(out_path, j.dump(2) + "\n");
  }
}

struct Common {
  std::string data;
  std::string model = "interval";
  std::string tn = "pow-scaled:1/3";
  std::string critval = "analytic";
  double alpha = 0.05;
  std::size_t B = kDefaultReplications;
  std::uint64_t seed = 1;
  std::string out;
  std::size_t max_edges = kDefaultMaxEdgesPerDim;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--model", c.model, "interval or missing")->capture_default_str();
  cmd->add_option("--tn", c.tn, "fixed:v, pow:d or pow-scaled:d")->capture_default_str();
  cmd->add_option("--critval", c.critval, "analytic, refined, simulated or lf")
      ->capture_default_str();
  cmd->add_option("--alpha", c.alpha, "nominal level")->capture_default_str();
  cmd->add_option("--B", c.B, "replications for simulated critical values")
      ->capture_default_str();
  cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
  cmd->add_option("--max-edges", c.max_edges, "per-coordinate edge cap for d_X >= 2")
      ->capture_default_str();
}

Dataset load(const Common& c) {
  Dataset data = read_dataset(std::filesystem::path(c.data));
  data.validate();
  if (data.size() < 2) throw InvalidInput("data file needs at least two observations");
  return data;
}

Json hull_volume(const Dataset& data) {
  if (data.dimension() > 2) return nullptr;
  return build_hull(data.x).volume;
}

Json critval_json(const CriticalValue& cv, std::size_t n) {
  Json j;
  j["method"] = to_string(cv.method);
  j["alpha"] = cv.level;
  j["threshold"] = cv.threshold;
  j["threshold_scale"] = threshold_scale(cv);
  j["statistic_threshold"] = cv.statistic_threshold(n);
  if (cv.simulation) j["replications"] = cv.simulation->replications;
  return j;
}

int cmd_test(const Common& c, const std::string& theta_text, std::ostream& out) {
  const Dataset data = load(c);
  const ModelKind model = parse_model(c.model);
  const Theta theta{parse_reals(theta_text)};
  const TruncationRule rule = parse_truncation(c.tn);
  const ScanConfig config{c.max_edges};
  const CritvalSpec spec{parse_method(c.critval), c.B, {}};

  const double t_n = truncation(rule, data.size(), data.x);
  const auto moments = evaluate_moments(model, data, theta);
  const Scanner scanner(data.x, t_n, config);
  const ScanResult result = scanner(moments.values);
  const CriticalValue cv = dataset_critical_value(data, model, t_n, spec, c.alpha, c.seed, rule, config);

  Json j;
  j["theta"] = theta.values;
  j["T"] = result.T;
  j["S"] = result.S;
  j["method"] = to_string(cv.method);
  j["threshold"] = cv.threshold;
  j["threshold_scale"] = threshold_scale(cv);
  j["reject"] = cv.rejects(result.S, data.size());
  j["n"] = data.size();
  j["d_X"] = data.dimension();
  j["d_Y"] = moments.moments();
  j["t_n"] = t_n;
  j["vol_hull"] = hull_volume(data);
  j["cells_evaluated"] = result.cells_evaluated;
  j["cells_skipped"] = result.cells_skipped;
  j["seed"] = c.seed;
  j["alpha"] = c.alpha;
  j["tn_rule"] = rule.label();
  j["exact"] = scanner.exact();
  emit_json(j, c.out, out);
  return 0;
}

int cmd_region(const Common& c, const std::string& grid_text, std::ostream& out) {
  if (c.out.empty()) throw InvalidInput("region needs --out for the region CSV");
  const Dataset data = load(c);
  const ModelKind model = parse_model(c.model);
  const ThetaGrid grid = parse_grid(grid_text);
  const TruncationRule rule = parse_truncation(c.tn);
  const CritvalSpec spec{parse_method(c.critval), c.B, {}};
  const ConfidenceRegion region =
      invert_test(data, model, grid, rule, spec, c.alpha, c.seed, ScanConfig{c.max_edges});
  write_text(c.out, region_csv(region));

  Json j;
  j["level"] = region.level;
  j["alpha"] = c.alpha;
  j["method"] = to_string(region.critical_value.method);
  j["threshold"] = region.critical_value.threshold;
  j["threshold_scale"] = threshold_scale(region.critical_value);
  j["n"] = region.n;
  j["t_n"] = region.t_n;
  j["grid_points"] = grid.size();
  j["accepted"] = region.accepted_count();
  Json proj = Json::array();
  for (const auto& iv : region.projections) proj.push_back({{"lower", iv.lower}, {"upper", iv.upper}});
  j["projections"] = proj;
  j["csv"] = c.out;
  j["seed"] = c.seed;
  out << j.dump(2) << '\n';
  return 0;
}

struct CritvalOptions {
  std::optional<std::size_t> n;
  std::optional<double> c_hat;
  std::size_t d_x = 1;
  std::size_t d_y = 1;
};

int cmd_critval(const Common& c, const CritvalOptions& o, std::ostream& out) {
  const CritvalMethod method = parse_method(c.critval);
  const TruncationRule rule = parse_truncation(c.tn);
  Json j;
  CriticalValue cv;
  std::size_t n = 0;

  if (!c.data.empty()) {
    const Dataset data = load(c);
    const ModelKind model = parse_model(c.model);
    n = data.size();
    const double t_n = truncation(rule, n, data.x);
    cv = dataset_critical_value(data, model, t_n, CritvalSpec{method, c.B, {}}, c.alpha, c.seed,
                                rule, ScanConfig{c.max_edges});
    j["n"] = n;
    j["d_X"] = data.dimension();
    j["d_Y"] = moment_count(model);
    j["t_n"] = t_n;
    j["vol_hull"] = hull_volume(data);
    if (data.dimension() <= 2) {
      const double c_hat = build_hull(data.x).volume / std::pow(t_n, static_cast<double>(data.dimension()));
      j["c_hat"] = number_or_null(c_hat);
    }
  } else {
    if (!o.n) throw InvalidInput("critval needs --data or --n");
    n = *o.n;
    j["n"] = n;
    if (method == CritvalMethod::least_favorable) {
      cv = least_favorable_critical_value(DesignSpec::design(1), n, rule, c.alpha, c.B, c.seed);
      j["tn_rule"] = rule.label();
    } else if (method == CritvalMethod::simulated) {
      throw InvalidInput("simulated critical values need --data");
    } else {
      if (!o.c_hat) throw InvalidInput("critval without --data needs --c-hat");
      // unit window, so the volume equals ĉ
      cv = method == CritvalMethod::analytic
               ? analytic_critical_value(n, o.d_x, o.d_y, *o.c_hat, 1.0, c.alpha)
               : refined_critical_value(n, o.d_x, o.d_y, *o.c_hat, 1.0, c.alpha);
      j["d_X"] = o.d_x;
      j["d_Y"] = o.d_y;
      j["c_hat"] = *o.c_hat;
    }
  }
  j.update(critval_json(cv, n));
  j["seed"] = c.seed;
  emit_json(j, c.out, out);
  return 0;
}

struct McOptions {
  std::string table;
  int design = 1;
  std::string n = "100,500,1000";
  std::string tn = "pow:1/5,pow:1/3,pow:1/2";
  std::string alpha;
  std::string offsets = "0,0.1,0.2,0.3,0.4,0.5";
  std::size_t reps = 2000;
  std::size_t B = 2000;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_mc(const McOptions& o, std::ostream& out) {
  const DesignSpec design = DesignSpec::design(o.design);
  std::vector<TruncationRule> rules;
  for (const auto& s : split(o.tn, ',')) rules.push_back(parse_truncation(s));
  for (const auto& r : rules) {
    if (r.kind == TruncationRule::Kind::fixed) {
      throw InvalidInput("Monte Carlo tables need a sample-size dependent --tn rule");
    }
  }

  McTable table;
  if (o.table == "size") {
    SizeTableConfig cfg;
    cfg.design = design;
    cfg.sample_sizes = parse_sizes(o.n);
    cfg.rules = rules;
    if (!o.alpha.empty()) cfg.alphas = parse_reals(o.alpha);
    cfg.replications = o.reps;
    cfg.seed = o.seed;
    table = size_table(cfg);
  } else if (o.table == "power") {
    PowerTableConfig cfg;
    cfg.design = design;
    cfg.sample_sizes = parse_sizes(o.n);
    cfg.rules = rules;
    cfg.offsets = parse_reals(o.offsets);
    if (!o.alpha.empty()) {
      const auto a = parse_reals(o.alpha);
      if (a.size() != 1) throw InvalidInput("power tables take a single --alpha");
      cfg.alpha = a.front();
    }
    cfg.replications = o.reps;
    cfg.lf_replications = o.B;
    cfg.seed = o.seed;
    table = power_table(cfg);
  } else {
    throw InvalidInput("unknown table '" + o.table + "' (size, power)");
  }

  const std::string csv = table.to_csv();
  if (o.out.empty()) {
    out << csv;
  } else {
    write_text(o.out, csv);
  }
  return 0;
}

}  // namespace

double parse_real(const std::string& text) {
  const auto slash = text.find('/');
  auto parse = [&](std::string_view s) {
    double v = 0.0;
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw InvalidInput("not a number: '" + text + "'");
    }
    return v;
  };
  if (slash == std::string::npos) return parse(text);
  const std::string_view all = text;
  const double den = parse(all.substr(slash + 1));
  if (den == 0.0) throw InvalidInput("zero denominator in '" + text + "'");
  return parse(all.substr(0, slash)) / den;
}

TruncationRule parse_truncation(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw InvalidInput("--tn expects fixed:v, pow:d or pow-scaled:d, got '" + text + "'");
  }
  const std::string kind = text.substr(0, colon);
  const double v = parse_real(text.substr(colon + 1));
  if (kind == "fixed") return TruncationRule::fixed(v);
  if (kind == "pow") return TruncationRule::power(v);
  if (kind == "pow-scaled") return TruncationRule::power_scaled(v);
  throw InvalidInput("unknown truncation rule '" + kind + "' (fixed, pow, pow-scaled)");
}

CritvalMethod parse_method(const std::string& text) {
  if (text == "analytic") return CritvalMethod::analytic;
  if (text == "refined") return CritvalMethod::refined;
  if (text == "simulated") return CritvalMethod::simulated;
  if (text == "lf") return CritvalMethod::least_favorable;
  throw InvalidInput("unknown critical value method '" + text +
                     "' (analytic, refined, simulated, lf)");
}

ThetaGrid parse_grid(const std::string& text) {
  std::vector<GridAxis> axes;
  for (const auto& part : split(text, ',')) {
    const auto f = split(part, ':');
    if (f.size() != 4) throw InvalidGrid("grid axis '" + part + "' is not name:min:max:steps");
    std::size_t steps = 0;
    const auto [ptr, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), steps);
    if (ec != std::errc() || ptr != f[3].data() + f[3].size()) {
      throw InvalidGrid("grid axis '" + part + "' has a bad step count");
    }
    axes.push_back({parse_real(f[1]), parse_real(f[2]), steps});
  }
  return ThetaGrid(std::move(axes));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiscale scan test for conditional moment inequalities", "mscan"};
  app.require_subcommand(1);

  Common common;
  std::string theta;
  std::string grid;
  CritvalOptions cv_opts;
  McOptions mc;

  auto* test = app.add_subcommand("test", "test one parameter value");
  add_common(test, common);
  test->add_option("--data", common.data, "CSV data file")->required();
  test->add_option("--theta", theta, "intercept,slope,...")->required();
  test->add_option("--out", common.out, "write the JSON report here instead of stdout");

  auto* region = app.add_subcommand("region", "confidence region by test inversion");
  add_common(region, common);
  region->add_option("--data", common.data, "CSV data file")->required();
  region->add_option("--grid", grid, "t1:min:max:steps,t2:min:max:steps")->required();
  region->add_option("--out", common.out, "region CSV")->required();

  auto* critval = app.add_subcommand("critval", "critical value only");
  add_common(critval, common);
  critval->add_option("--data", common.data, "CSV data file");
  critval->add_option("--n", cv_opts.n, "sample size, when no data file is given");
  critval->add_option("--c-hat", cv_opts.c_hat, "vol / t_n^d_X, when no data file is given");
  critval->add_option("--dx", cv_opts.d_x, "covariate dimension")->capture_default_str();
  critval->add_option("--dy", cv_opts.d_y, "number of moments")->capture_default_str();
  critval->add_option("--out", common.out, "write the JSON report here instead of stdout");

  auto* mcc = app.add_subcommand("mc", "Monte Carlo size and power tables");
  mcc->add_option("--table", mc.table, "size or power")->required();
  mcc->add_option("--design", mc.design, "1, 2 or 3")->capture_default_str();
  mcc->add_option("--n", mc.n, "sample sizes")->capture_default_str();
  mcc->add_option("--tn", mc.tn, "truncation rules")->capture_default_str();
  mcc->add_option("--alpha", mc.alpha, "levels (size: list, default 0.1,0.05; power: 0.05)");
  mcc->add_option("--offsets", mc.offsets, "power offsets from the boundary")
      ->capture_default_str();
  mcc->add_option("--reps", mc.reps, "replications per cell")->capture_default_str();
  mcc->add_option("--B", mc.B, "least favorable replications")->capture_default_str();
  mcc->add_option("--seed", mc.seed, "random seed")->capture_default_str();
  mcc->add_option("--out", mc.out, "table CSV (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (test->parsed()) return cmd_test(common, theta, out);
    if (region->parsed()) return cmd_region(common, grid, out);
    if (critval->parsed()) return cmd_critval(common, cv_opts, out);
    if (mcc->parsed()) return cmd_mc(mc, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace mscan::cli
