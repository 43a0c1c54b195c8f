#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include "csv.hpp"
#include "gofstab/asymptotics.hpp"
#include "gofstab/errors.hpp"
#include "gofstab/fitpipeline.hpp"
#include "gofstab/pvalue.hpp"
#include "gofstab/scan.hpp"
#include "gofstab/simulation.hpp"
#include "gofstab/stabilizer.hpp"
#include "gofstab/statistics.hpp"
#include "gofstab/timing.hpp"
#include "gofstab/validation.hpp"
#include "json.hpp"

namespace gof::cli {
namespace {

using nlohmann::json;

struct Globals {
  std::optional<std::string> kind;
  std::optional<int> n;
  std::optional<int> p;
  std::optional<double> alpha;
  std::uint64_t seed = 1;
  std::optional<std::string> M;
  std::size_t grid_A = 1000;
  std::size_t directions = 0;
  std::string input;
  std::string output;
  std::string format = "csv";
  std::string angles = "radians";
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::string> asymptotic;
};

// "5..10,20,50" -> 5 6 7 8 9 10 20 50
std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  const auto to_int = [&](const std::string& s) {
    const double v = csv::to_number(csv::trim(s), 0);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("not an integer: '" + s + "'");
    return static_cast<int>(v);
  };
  try {
    while (std::getline(ss, item, ',')) {
      const auto dots = item.find("..");
      if (dots == std::string::npos) {
        out.push_back(to_int(item));
      } else {
        const int lo = to_int(item.substr(0, dots)), hi = to_int(item.substr(dots + 2));
        if (hi < lo) throw ConfigError("empty range '" + item + "'");
        for (int v = lo; v <= hi; ++v) out.push_back(v);
      }
    }
  } catch (const ParseError&) {
    throw ConfigError("bad integer list '" + text + "'");
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  try {
    while (std::getline(ss, item, ',')) out.push_back(csv::to_number(csv::trim(item), 0));
  } catch (const ParseError&) {
    throw ConfigError("bad number list '" + text + "'");
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<StatisticKind> parse_kind_list(const std::string& text) {
  std::vector<StatisticKind> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_kind(csv::trim(item)));
  if (out.empty()) throw ConfigError("empty kind list");
  return out;
}

// Replicate counts accept scientific notation ("1e5").
std::uint64_t parse_count(const std::string& text) {
  double v = 0.0;
  try {
    v = csv::to_number(csv::trim(text), 0);
  } catch (const ParseError&) {
    throw ConfigError("bad count '" + text + "'");
  }
  if (!(v >= 1) || v != std::floor(v) || v > 1e15) throw ConfigError("bad count '" + text + "'");
  return static_cast<std::uint64_t>(v);
}

StatisticKind kind_or(const Globals& g, StatisticKind fallback) {
  return g.kind ? parse_kind(*g.kind) : fallback;
}

std::ifstream open_input(const std::string& path) {
  if (path.empty()) throw ConfigError("--input is required");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

// Runs fn on the --output file when given, else on out.
void emit(const Globals& g, std::ostream& out, const std::function<void(std::ostream&)>& fn) {
  if (g.output.empty()) {
    fn(out);
    return;
  }
  std::ofstream file(g.output);
  if (!file) throw IoError("cannot write " + g.output);
  fn(file);
  file.flush();
  if (!file) throw IoError("write failed: " + g.output);
}

CriticalTable asymptotic_table(const Globals& g) {
  CriticalTable table = CriticalTable::published();
  for (const auto& path : g.asymptotic) table.merge(CriticalTable::read(path));
  return table;
}

double angle_scale(const Globals& g) {
  if (g.angles == "radians") return 1.0;
  if (g.angles == "degrees") return std::numbers::pi / 180.0;
  throw ConfigError("--angles must be radians or degrees");
}

// Classical kinds: one u = F0(x) per line. Directional kinds: one angle per
// line (p = 2) or one point per line as p comma- or space-separated coordinates.
struct Sample {
  std::optional<UnitSample> unit;
  std::optional<SphericalSample> sphere;
};

Sample read_sample(std::istream& in, StatisticKind kind, const Globals& g) {
  std::vector<double> values;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::skippable(line)) continue;
    std::replace(line.begin(), line.end(), '\t', ' ');
    std::vector<std::string> fields;
    if (line.find(',') != std::string::npos) {
      fields = csv::split(line, line_no);
    } else {
      std::stringstream ss(line);
      for (std::string f; ss >> f;) fields.push_back(f);
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) throw ParseError("expected " + std::to_string(width) + " fields", line_no);
    for (const auto& f : fields) {
      const double v = csv::to_number(f, line_no);
      if (!std::isfinite(v)) throw ParseError("non-finite value", line_no);
      values.push_back(v);
    }
  }
  if (values.empty()) throw DataError("empty sample");
  Sample s;
  if (is_classical(kind)) {
    if (width != 1) throw ParseError("classical statistics take one value per line", 0);
    s.unit.emplace(std::move(values));
  } else if (width == 1) {
    const double scale = angle_scale(g);
    for (auto& v : values) v *= scale;
    s.sphere.emplace(SphericalSample::from_angles(values));
  } else {
    s.sphere.emplace(SphericalSample::normalized(std::move(values), width));
  }
  return s;
}

StatisticValue compute_statistic(StatisticKind kind, const Sample& s, const Globals& g) {
  if (s.unit) return classical_statistic(kind, *s.unit);
  if (kind == StatisticKind::NBak) return bakshaev_statistic(*s.sphere);
  DirectionScheme scheme = DirectionScheme::pairwise();
  if (g.directions > 0) {
    scheme = s.sphere->dim() == 2 ? DirectionScheme::grid(g.directions)
                                  : DirectionScheme::montecarlo(g.directions, g.seed);
  }
  return projected_statistic(kind, *s.sphere, scheme);
}

json statistic_json(const StatisticValue& T) {
  json j{{"kind", kind_name(T.kind)}, {"n", T.n}, {"statistic", T.value}};
  j["p"] = T.p ? json(*T.p) : json(nullptr);
  if (T.estimation && T.estimation->std_error > 0) j["direction_std_error"] = T.estimation->std_error;
  return j;
}

void write_json(std::ostream& os, const json& j) { os << j.dump(2) << '\n'; }

StatisticValue load_statistic(const Globals& g, StatisticKind kind) {
  auto in = open_input(g.input);
  const auto sample = read_sample(in, kind, g);
  return compute_statistic(kind, sample, g);
}

int cmd_stat(const Globals& g, std::ostream& out) {
  const auto kind = kind_or(g, StatisticKind::W2);
  const auto T = load_statistic(g, kind);
  emit(g, out, [&](std::ostream& os) {
    if (g.format == "json") return write_json(os, statistic_json(T));
    os.precision(12);
    os << "kind,n,p,statistic\n"
       << kind_name(kind) << ',' << T.n << ',' << (T.p ? std::to_string(*T.p) : "") << ',' << T.value << '\n';
  });
  return kOk;
}

struct PValueArgs {
  std::optional<double> value;
  std::string method = "approx";
  std::string trials = "1e4";
};

int cmd_pvalue(const Globals& g, const PValueArgs& a, std::ostream& out) {
  const auto kind = kind_or(g, StatisticKind::W2);
  if (a.method != "approx" && a.method != "montecarlo") throw ConfigError("--method must be approx or montecarlo");
  const PValueEngine engine(AlphaGrid(g.grid_A), asymptotic_table(g));
  if (!a.value) {
    if (a.method != "approx") throw ConfigError("batch p-values use --method approx");
    auto in = open_input(g.input);
    std::size_t failed = 0;
    emit(g, out, [&](std::ostream& os) { failed = batch_pvalues(in, os, kind, engine); });
    return failed ? kData : kOk;
  }
  if (!g.n) throw ConfigError("--value needs --n");
  if (*g.n < 1) throw ConfigError("--n must be positive");
  StatisticValue T;
  T.kind = kind;
  T.value = *a.value;
  T.n = static_cast<std::size_t>(*g.n);
  if (!is_classical(kind)) T.p = g.p;
  json j = statistic_json(T);
  if (a.method == "approx") {
    const auto r = engine.pvalue(T);
    j["pvalue"] = r.value;
    j["method"] = method_name(r.method);
  } else {
    j["pvalue"] = montecarlo_pvalue(T, parse_count(a.trials), g.seed);
    j["method"] = "montecarlo";
  }
  emit(g, out, [&](std::ostream& os) {
    if (g.format == "json") return write_json(os, j);
    os.precision(10);
    os << "kind,n,p,statistic,pvalue,method\n"
       << kind_name(kind) << ',' << T.n << ',' << (T.p ? std::to_string(*T.p) : "") << ',' << T.value << ','
       << j["pvalue"].get<double>() << ',' << j["method"].get<std::string>() << '\n';
  });
  return kOk;
}

int cmd_test(const Globals& g, std::ostream& out) {
  const auto kind = kind_or(g, StatisticKind::W2);
  const double alpha = g.alpha.value_or(0.05);
  const auto T = load_statistic(g, kind);
  const auto table = asymptotic_table(g);
  const PValueEngine engine(AlphaGrid(g.grid_A), table);
  double modified = 0.0, limit = 0.0;
  if (is_classical(kind)) {
    modified = stabilize(T, alpha, builtin_form(kind));
    limit = asymptotic_quantile(kind, alpha);
  } else {
    modified = stabilize(T, alpha, builtin_dim_form(kind));
    limit = table.at(kind, T.p, alpha);
  }
  const auto pv = engine.pvalue(T);
  const bool rejected = modified > limit;
  json j = statistic_json(T);
  j["alpha"] = alpha;
  j["modified_statistic"] = modified;
  j["asymptotic_critical_value"] = limit;
  j["pvalue"] = pv.value;
  j["pvalue_method"] = method_name(pv.method);
  j["reject"] = rejected;
  emit(g, out, [&](std::ostream& os) {
    if (g.format == "json") return write_json(os, j);
    os.precision(10);
    os << "kind,n,p,statistic,alpha,modified_statistic,asymptotic_critical_value,pvalue,pvalue_method,reject\n"
       << kind_name(kind) << ',' << T.n << ',' << (T.p ? std::to_string(*T.p) : "") << ',' << T.value << ','
       << alpha << ',' << modified << ',' << limit << ',' << pv.value << ',' << method_name(pv.method) << ','
       << (rejected ? "true" : "false") << '\n';
  });
  return kOk;
}

struct TableArgs {
  std::string n_list = "5..50,100,200";
  std::string p_list;
  bool asymptotic = false;
};

std::string table_path(const std::string& pattern, StatisticKind kind, std::size_t count) {
  const auto at = pattern.find("{kind}");
  if (at == std::string::npos) {
    if (count > 1) throw ConfigError("several kinds need an --output containing {kind}");
    return pattern;
  }
  return pattern.substr(0, at) + std::string(kind_name(kind)) + pattern.substr(at + 6);
}

int cmd_table(const Globals& g, const TableArgs& a, std::ostream& err) {
  if (g.output.empty()) throw ConfigError("--output is required");
  const auto kinds = parse_kind_list(g.kind.value_or(a.asymptotic ? "PCvM,PAD,NBak" : "D,W2,A2,V,U2"));
  const std::uint64_t M = parse_count(g.M.value_or("1e5"));
  const AlphaGrid grid(g.grid_A);
  if (a.asymptotic) {
    for (auto k : kinds) {
      if (is_classical(k)) throw ConfigError("asymptotic tables are for the directional kinds");
    }
    const auto dims = parse_int_list(a.p_list.empty() ? "2,3,5" : a.p_list);
    auto table = build_projected_table(kinds, dims, grid, M, g.seed, g.workers);
    table.write(g.output);
    err << "wrote " << g.output << '\n';
    return kOk;
  }
  TableRequest req;
  req.kinds = kinds;
  req.n_list = parse_int_list(a.n_list);
  if (!is_classical(kinds.front())) req.p_list = parse_int_list(a.p_list.empty() ? "2..11" : a.p_list);
  req.grid = grid;
  req.M = M;
  req.seed = g.seed;
  req.workers = g.workers;
  for (auto k : kinds) table_path(g.output, k, kinds.size());
  const auto tables = build_quantile_tables(req);
  for (const auto& t : tables) {
    const auto path = table_path(g.output, t.kind(), tables.size());
    t.write(path);
    err << "wrote " << path << '\n';
  }
  return kOk;
}

struct FitArgs {
  std::string weights = "w2";
  int lambda = 2;
  int mu = 2;
  std::string dims;
  bool drop_negligible = false;
  double t_threshold = 2.0;
};

int cmd_fit(const Globals& g, const FitArgs& a, std::ostream& out) {
  if (g.input.empty()) throw ConfigError("--input is required");
  const auto table = QuantileTable::read(g.input);
  if (g.kind && parse_kind(*g.kind) != table.kind()) {
    throw ConfigError("table holds " + std::string(kind_name(table.kind())) + ", not " + *g.kind);
  }
  const auto scheme = parse_weight_scheme(a.weights);
  if (is_classical(table.kind())) {
    if (!a.dims.empty()) throw ConfigError("--dims applies to the directional kinds");
    RegressionSpec spec;
    spec.lambda = a.lambda;
    spec.mu = a.mu;
    spec.scheme = scheme;
    const auto model = refit_classical(table, spec);
    const auto form_json = to_json(model.to_form());
    if (g.format == "json") {
      emit(g, out, [&](std::ostream& os) { os << form_json << '\n'; });
    } else {
      model.print(out);
      if (!g.output.empty()) emit(g, out, [&](std::ostream& os) { os << form_json << '\n'; });
    }
    return kOk;
  }
  const auto asym = asymptotic_table(g);
  const auto dims = parse_int_list(a.dims.empty() ? "2..11" : a.dims);
  const auto data = ratio_dataset(table, asym);
  std::map<int, std::array<double, 3>> per_p;
  std::ostringstream summary;
  summary.precision(6);
  summary << "dimension fits (" << weight_scheme_name(scheme) << "):\n  p";
  for (const auto& pr : kDimPredictors) summary << "  " << pr.name();
  summary << "  R2_adj\n";
  for (int p : dims) {
    const auto sub = subset(data, p);
    if (sub.rows.empty()) throw TableMissError("no ratio rows for p = " + std::to_string(p));
    std::vector<double> avar;
    if (needs_avar(scheme)) avar = row_avar(sub, table);
    const auto model = fit_dimension_model(sub, p, scheme, avar);
    auto& c = per_p[p];
    summary << "  " << p;
    for (std::size_t r = 0; r < 3; ++r) {
      c[r] = model.coefficient(kDimPredictors[r]);
      summary << "  " << c[r];
    }
    summary << "  " << model.r2_adj << '\n';
  }
  DimCurveOptions options;
  options.drop_negligible = a.drop_negligible;
  options.t_threshold = a.t_threshold;
  const auto curves = fit_dimension_curves(table.kind(), per_p, options);
  const auto form_json = to_json(curves.form);
  if (g.format == "json") {
    emit(g, out, [&](std::ostream& os) { os << form_json << '\n'; });
    return kOk;
  }
  out << summary.str() << "q_r(p) = b1/sqrt(p) + b2/p:\n";
  for (std::size_t r = 0; r < 3; ++r) {
    out << "  " << kDimPredictors[r].name() << ": b1 = " << curves.form.beta[r][0] << " (se "
        << curves.std_error[r][0] << "), b2 = " << curves.form.beta[r][1] << " (se " << curves.std_error[r][1]
        << "), " << curves.rule[r] << '\n';
  }
  if (!g.output.empty()) emit(g, out, [&](std::ostream& os) { os << form_json << '\n'; });
  return kOk;
}

struct ValidateArgs {
  std::string n_list;
  std::string alphas;
  std::string methods = "new_form,stephens,montecarlo_cv";
  std::string M_cv = "1e4";
  unsigned cv_repeats = 10;
  std::vector<std::string> forms;
};

int cmd_validate(const Globals& g, const ValidateArgs& a, std::ostream& out, std::ostream& err) {
  ValidationRequest req;
  if (g.kind) req.kinds = parse_kind_list(*g.kind);
  req.p = g.p;
  if (!a.n_list.empty()) req.n_list = parse_int_list(a.n_list);
  if (!a.alphas.empty()) req.alphas = parse_real_list(a.alphas);
  req.methods.clear();
  std::stringstream ss(a.methods);
  for (std::string m; std::getline(ss, m, ',');) req.methods.push_back(parse_cv_method(csv::trim(m)));
  req.M = parse_count(g.M.value_or("1e5"));
  req.M_cv = parse_count(a.M_cv);
  req.cv_repeats = a.cv_repeats;
  req.seed = g.seed;
  req.workers = g.workers;
  const auto table = asymptotic_table(g);
  req.asymptotic = &table;
  for (const auto& path : a.forms) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    const auto bundle = form_from_json(text);
    if (!bundle.n_alpha) throw ConfigError(path + ": --form needs an (n, alpha) form");
    req.forms[bundle.n_alpha->kind] = *bundle.n_alpha;
  }
  req.progress = [&](std::size_t done, std::size_t total) {
    err << "\rvalidate: " << done << '/' << total << (done == total ? "\n" : "") << std::flush;
  };
  const auto report = validate(req);
  emit(g, out, [&](std::ostream& os) { report.write_csv(os); });
  return kOk;
}

struct ScanArgs {
  std::size_t window = 100;
  std::optional<double> window_days;
  std::size_t step = 1;
  std::string fdr = "by";
};

int cmd_scan(const Globals& g, const ScanArgs& a, std::ostream& out, std::ostream& err) {
  ScanConfig config;
  config.window = a.window;
  config.window_days = a.window_days;
  config.step = a.step;
  config.kind = kind_or(g, StatisticKind::PAD);
  if (a.fdr == "by") {
    config.fdr = FdrMethod::by;
  } else if (a.fdr == "none") {
    config.fdr = FdrMethod::none;
  } else {
    throw ConfigError("--fdr must be by or none");
  }
  config.check();
  auto in = open_input(g.input);
  auto observations = read_scan_input(in);
  const PValueEngine engine(AlphaGrid(g.grid_A), asymptotic_table(g));
  const auto result = scan(std::move(observations), config, engine);
  for (const auto& notice : result.notices) err << "notice: " << notice << '\n';
  emit(g, out, [&](std::ostream& os) { write_scan_csv(result, os); });
  return kOk;
}

struct BenchArgs {
  std::string n_list = "5,50,500";
  std::string alphas = "0.05";
  std::size_t calls = 1000;
  std::size_t warmup = 10;
};

int cmd_bench(const Globals& g, const BenchArgs& a, std::ostream& out) {
  const auto kinds = parse_kind_list(g.kind.value_or("D,W2,A2,V,U2"));
  const auto n_list = parse_int_list(a.n_list);
  const auto alphas = parse_real_list(a.alphas);
  const auto table = asymptotic_table(g);
  const AlphaGrid grid(g.grid_A);
  std::ostringstream report;
  report.precision(6);
  report << "kind,n,p,alpha,median_ns,calls\n";
  for (auto kind : kinds) {
    if (!is_classical(kind) && !g.p) throw ConfigError("directional kinds need --p");
    const auto p = is_classical(kind) ? std::nullopt : g.p;
    const auto column = is_classical(kind) ? QuantileColumn::classical(kind, grid)
                                           : QuantileColumn::from_table(table, kind, p);
    for (int n : n_list) {
      const auto nn = static_cast<double>(n);
      const auto g_n = is_classical(kind) ? builtin_form(kind).at(nn) : builtin_dim_form(kind).at(nn, *p);
      for (double alpha : alphas) {
        const double T = critical_value(kind, nn, alpha, p, table);
        const double ns = median_latency_ns([&] { return approx_pvalue(T, g_n, column).value; }, a.calls, a.warmup);
        report << kind_name(kind) << ',' << n << ',' << (p ? std::to_string(*p) : "") << ',' << alpha << ',' << ns
               << ',' << a.calls << '\n';
      }
    }
  }
  emit(g, out, [&](std::ostream& os) { os << report.str(); });
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Goodness-of-fit statistics with stabilized critical values and p-values", "gofstab"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--kind", g.kind, "D, W2, A2, V, U2, PCvM, PAD, NBak (lists where a command takes several)");
  app.add_option("--n", g.n, "Sample size");
  app.add_option("--p", g.p, "Dimension of the sphere's ambient space")->check(CLI::Range(2, 100000));
  app.add_option("--alpha", g.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--M", g.M, "Monte Carlo replicates (e.g. 1e5)");
  app.add_option("--grid-A", g.grid_A, "Alpha grid resolution A (alpha = 1/A, ..., (A-1)/A)")->check(CLI::Range(4, 10000000));
  app.add_option("--directions", g.directions, "Projection directions; 0 evaluates the direction integral exactly");
  app.add_option("--input", g.input, "Input file");
  app.add_option("--output", g.output, "Output file (default standard output)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--angles", g.angles, "Unit of single-column angle input")->check(CLI::IsMember({"radians", "degrees"}));
  app.add_option("--workers", g.workers, "Simulation threads (results do not depend on it)")->check(CLI::Range(1, 1024));
  app.add_option("--asymptotic", g.asymptotic, "Asymptotic critical table CSV merged over the published values");

  auto* stat = app.add_subcommand("stat", "Compute a statistic from a sample file");

  PValueArgs pa;
  auto* pvalue = app.add_subcommand("pvalue", "p-value of a statistic value, or of statistic,n[,p] rows in --input");
  pvalue->add_option("--value", pa.value, "Statistic value");
  pvalue->add_option("--method", pa.method, "approx (stabilized, default) or montecarlo");
  pvalue->add_option("--trials", pa.trials, "Monte Carlo trials");

  auto* test = app.add_subcommand("test", "Statistic, modified statistic, p-value and decision at --alpha");

  TableArgs ta;
  auto* table = app.add_subcommand("table", "Simulate a quantile table");
  table->add_option("--n-list", ta.n_list, "Sample sizes, e.g. 5..50,100,200");
  table->add_option("--p-list", ta.p_list, "Dimensions, e.g. 2..11");
  table->add_flag("--asymptotic-table", ta.asymptotic, "Asymptotic (n = 500) table of the directional kinds");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit a stabilizing form to a quantile table");
  fit->add_option("--weights", fa.weights, "Weight scheme w1..w7");
  fit->add_option("--lambda", fa.lambda, "Largest n exponent times two")->check(CLI::Range(2, 8));
  fit->add_option("--mu", fa.mu, "Largest alpha exponent times two")->check(CLI::Range(2, 8));
  fit->add_option("--dims", fa.dims, "Dimensions of the directional fit, e.g. 2..11");
  fit->add_flag("--drop-negligible", fa.drop_negligible, "Drop curve coefficients with |t| below --t-threshold");
  fit->add_option("--t-threshold", fa.t_threshold, "t-statistic threshold for --drop-negligible");

  ValidateArgs va;
  auto* val = app.add_subcommand("validate", "Rejection rates of stabilized, Stephens and Monte Carlo critical values");
  val->add_option("--n-list", va.n_list, "Sample sizes (default 5..10,20,30,40,50,100,200,300)");
  val->add_option("--alphas", va.alphas, "Levels (default 0.01..0.25 by 0.01)");
  val->add_option("--methods", va.methods, "new_form, stephens, montecarlo_cv");
  val->add_option("--M-cv", va.M_cv, "Replicates per Monte Carlo critical value");
  val->add_option("--cv-repeats", va.cv_repeats, "Independent Monte Carlo critical values averaged")->check(CLI::Range(1, 1000));
  val->add_option("--form", va.forms, "JSON (n, alpha) form replacing the built-in one of its kind");

  ScanArgs sa;
  auto* scn = app.add_subcommand("scan", "Rolling-window uniformity scan of time,longitude_deg[,group] data");
  scn->add_option("--window", sa.window, "Window size in observations");
  scn->add_option("--window-days", sa.window_days, "Window length in days (overrides --window)");
  scn->add_option("--step", sa.step, "Window step in observations");
  scn->add_option("--fdr", sa.fdr, "by or none");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Median latency of the stabilized p-value");
  bench->add_option("--n-list", ba.n_list, "Sample sizes");
  bench->add_option("--alphas", ba.alphas, "Levels at whose critical values to time");
  bench->add_option("--calls", ba.calls, "Timed calls")->check(CLI::Range(1, 100000000));
  bench->add_option("--warmup", ba.warmup, "Untimed calls");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (stat->parsed()) return cmd_stat(g, out);
    if (pvalue->parsed()) return cmd_pvalue(g, pa, out);
    if (test->parsed()) return cmd_test(g, out);
    if (table->parsed()) return cmd_table(g, ta, err);
    if (fit->parsed()) return cmd_fit(g, fa, out);
    if (val->parsed()) return cmd_validate(g, va, out, err);
    if (scn->parsed()) return cmd_scan(g, sa, out, err);
    if (bench->parsed()) return cmd_bench(g, ba, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidityError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const TableMissError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace gof::cli
