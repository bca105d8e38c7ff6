#include "rvrbm/experiment.hpp"

#include "rvrbm/error.hpp"
#include "rvrbm/format.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#ifndef RVRBM_VERSION
#define RVRBM_VERSION "unknown"
#endif

namespace rvrbm {

namespace {

using Map = std::map<std::string, std::string>;

// Every accepted key with its base default. An empty value means "unset".
const Map& base_defaults()
{
  static const Map defaults{
    {"experiment.preset", ""},
    {"experiment.methods", "rbm,rvrbm"},
    {"experiment.out", "results"},
    {"experiment.threads", "0"},
    {"experiment.snapshot_times", ""},
    {"model.kernel", ""},
    {"model.delta", "1"},
    {"model.xi", "1"},
    {"model.beta", "0.1"},
    {"model.diffusion", "none"},
    {"model.sigma2", "0.1"},
    {"model.initial", ""},
    {"model.dim_x", "0"},
    {"model.dim_v", "1"},
    {"model.opinion_domain", "true"},
    {"sim.n", "10000"},
    {"sim.m", "10"},
    {"sim.dt", "0.01"},
    {"sim.t_end", "1"},
    {"sim.seed", "1"},
    {"sim.record_every", "10"},
    {"sim.batching", "partition"},
    {"sim.divisor", "batch_size"},
    {"sim.error_reference", "initial_sample"},
    {"cv.surrogate", "case1"},
    {"cv.lambda_mode", "scalar"},
    {"cv.variance_floor", "1e-12"},
    {"cv.clamp", "-5,5"},
    {"cv.reference_mean", "recomputed"},
    {"cv.clusters", ""},
    {"cv.pinned_lambda", ""},
    {"kde.grid", "opinion"},
    {"kde.sigma2", "1e-5"},
    {"kde.points", "400"},
    {"kde.lo", "-1.1"},
    {"kde.hi", "1.1"},
    {"sweep.axis", ""},
    {"sweep.values", ""},
    {"sweep.repeats", "20"},
    {"bench.n_values", "5000,10000,20000"},
    {"bench.steps", "100"},
    {"bench.full_steps", "2"},
    {"bench.repetitions", "7"},
  };
  return defaults;
}

std::string trim(std::string_view s)
{
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s)
{
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty())
      out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected)
{
  throw ConfigError("invalid value '" + value + "' for " + key + " (expected " + expected + ")");
}

double to_double(const std::string& key, const std::string& s)
{
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end || !std::isfinite(v))
    bad_value(key, s, "a finite number");
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& s)
{
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end)
    bad_value(key, s, "a non-negative integer");
  return v;
}

bool to_bool(const std::string& key, const std::string& s)
{
  if (s == "true" || s == "1" || s == "yes")
    return true;
  if (s == "false" || s == "0" || s == "no")
    return false;
  bad_value(key, s, "true or false");
}

std::vector<double> to_doubles(const std::string& key, const std::string& s)
{
  std::vector<double> out;
  for (const auto& item : split_list(s))
    out.push_back(to_double(key, item));
  return out;
}

std::vector<std::size_t> to_sizes(const std::string& key, const std::string& s)
{
  std::vector<std::size_t> out;
  for (const auto& item : split_list(s)) {
    // Accept 1e4 style values as long as they are integral.
    const double d = to_double(key, item);
    if (d < 0 || d != std::floor(d) || d > 1e15)
      bad_value(key, item, "a non-negative integer");
    out.push_back(static_cast<std::size_t>(d));
  }
  return out;
}

std::size_t to_size(const std::string& key, const std::string& s)
{
  auto v = to_sizes(key, s);
  if (v.size() != 1)
    bad_value(key, s, "a non-negative integer");
  return v.front();
}

// Rethrows parse errors of enum-like values with the key attached.
template <class F>
auto with_key(const std::string& key, F&& f)
{
  try {
    return f();
  } catch (const ConfigError& err) {
    throw ConfigError(key + ": " + err.what());
  }
}

KernelSpec build_kernel(const Map& r)
{
  const auto& name = r.at("model.kernel");
  if (name == "constant")
    return ConstantKernel{};
  if (name == "bounded_confidence" || name == "bc")
    return BoundedConfidenceKernel{to_double("model.delta", r.at("model.delta"))};
  if (name == "cucker_smale" || name == "cs")
    return CuckerSmaleKernel{to_double("model.xi", r.at("model.xi")),
                             to_double("model.beta", r.at("model.beta"))};
  bad_value("model.kernel", name, "constant, bounded_confidence or cucker_smale");
}

DiffusionSpec build_diffusion(const Map& r)
{
  const auto& name = r.at("model.diffusion");
  const auto sigma2 = [&] { return to_double("model.sigma2", r.at("model.sigma2")); };
  if (name == "none")
    return NoDiffusion{};
  if (name == "constant")
    return ConstantDiffusion{sigma2()};
  if (name == "opinion")
    return OpinionDiffusion{sigma2()};
  bad_value("model.diffusion", name, "none, constant or opinion");
}

std::vector<std::vector<double>> parse_clusters(const std::string& s, std::size_t dim_v)
{
  // Centres are separated by ';', components by ','. In 1-D "a,b" is two centres.
  std::vector<std::vector<double>> out;
  if (trim(s).empty())
    return out;
  if (s.find(';') == std::string::npos && dim_v == 1) {
    for (double c : to_doubles("cv.clusters", s))
      out.push_back({c});
    return out;
  }
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ';'))
    if (!trim(item).empty())
      out.push_back(to_doubles("cv.clusters", item));
  return out;
}

CvConfig build_cv(const Map& r, std::size_t dim_v)
{
  CvConfig cv;
  cv.surrogate.kind =
    with_key("cv.surrogate", [&] { return parse_surrogate_kind(r.at("cv.surrogate")); });
  if (cv.surrogate.kind == SurrogateKind::custom)
    bad_value("cv.surrogate", "custom", "case1, case2 or two_cluster_quadratic (custom needs code)");
  cv.surrogate.clusters = parse_clusters(r.at("cv.clusters"), dim_v);
  cv.lambda_mode =
    with_key("cv.lambda_mode", [&] { return parse_lambda_mode(r.at("cv.lambda_mode")); });
  cv.variance_floor = to_double("cv.variance_floor", r.at("cv.variance_floor"));
  const auto clamp = to_doubles("cv.clamp", r.at("cv.clamp"));
  if (clamp.size() != 2)
    bad_value("cv.clamp", r.at("cv.clamp"), "two numbers lo,hi");
  cv.clamp_lo = clamp[0];
  cv.clamp_hi = clamp[1];
  cv.reference_mean_mode = with_key(
    "cv.reference_mean", [&] { return parse_reference_mean_mode(r.at("cv.reference_mean")); });
  if (!r.at("cv.pinned_lambda").empty())
    cv.pinned_lambda = to_double("cv.pinned_lambda", r.at("cv.pinned_lambda"));
  with_key("cv", [&] {
    validate(cv);
    return 0;
  });
  return cv;
}

ExperimentConfig build(const Map& r, const std::set<std::string>& user_keys)
{
  ExperimentConfig cfg;
  cfg.resolved = r;
  const auto& preset = r.at("experiment.preset");
  cfg.preset = preset.empty() ? Preset::custom : parse_preset(preset);

  if (r.at("model.kernel").empty() || r.at("model.initial").empty()) {
    if (preset.empty() && r.at("model.kernel").empty())
      throw ConfigError("no preset and no model specified");
    throw ConfigError("custom model requires model.kernel and model.initial");
  }

  SimConfig& sim = cfg.sim;
  sim.model.kernel = build_kernel(r);
  sim.model.diffusion = build_diffusion(r);
  sim.model.initial_law =
    with_key("model.initial", [&] { return parse_initial_law(r.at("model.initial")); });
  sim.model.dim_x = to_size("model.dim_x", r.at("model.dim_x"));
  sim.model.dim_v = to_size("model.dim_v", r.at("model.dim_v"));
  sim.model.opinion_domain = to_bool("model.opinion_domain", r.at("model.opinion_domain"));

  sim.n = to_size("sim.n", r.at("sim.n"));
  sim.m = to_size("sim.m", r.at("sim.m"));
  sim.dt = to_double("sim.dt", r.at("sim.dt"));
  sim.t_end = to_double("sim.t_end", r.at("sim.t_end"));
  sim.seed = to_uint("sim.seed", r.at("sim.seed"));
  sim.record_every = to_size("sim.record_every", r.at("sim.record_every"));
  sim.batching = with_key("sim.batching", [&] { return parse_batching_mode(r.at("sim.batching")); });
  const auto& divisor = r.at("sim.divisor");
  if (divisor == "batch_size")
    sim.divisor = BatchDivisor::batch_size;
  else if (divisor == "batch_size_minus_one")
    sim.divisor = BatchDivisor::batch_size_minus_one;
  else
    bad_value("sim.divisor", divisor, "batch_size or batch_size_minus_one");
  sim.error_reference = with_key(
    "sim.error_reference", [&] { return parse_error_reference(r.at("sim.error_reference")); });

  for (const auto& name : split_list(r.at("experiment.methods")))
    cfg.methods.push_back(with_key("experiment.methods", [&] { return parse_method(name); }));
  if (cfg.methods.empty())
    bad_value("experiment.methods", r.at("experiment.methods"), "a list of full, rbm, rvrbm");

  const bool wants_cv =
    std::find(cfg.methods.begin(), cfg.methods.end(), Method::rvrbm) != cfg.methods.end();
  if (wants_cv)
    sim.cv = build_cv(r, sim.model.dim_v);

  sim.snapshot_times = to_doubles("experiment.snapshot_times", r.at("experiment.snapshot_times"));
  // Preset snapshot times past a shortened t_end are dropped; explicit ones are validated.
  if (!user_keys.contains("experiment.snapshot_times"))
    std::erase_if(sim.snapshot_times, [&](double t) { return t > sim.t_end + 1e-12; });
  if (!sim.snapshot_times.empty()) {
    KdeConfig kde;
    kde.sigma2_kernel = to_double("kde.sigma2", r.at("kde.sigma2"));
    const auto points = to_size("kde.points", r.at("kde.points"));
    const auto& grid = r.at("kde.grid");
    if (grid == "opinion") {
      kde.grid_v = uniform_grid(to_double("kde.lo", r.at("kde.lo")),
                                to_double("kde.hi", r.at("kde.hi")), std::max<std::size_t>(points, 2));
      if (points < 2)
        bad_value("kde.points", r.at("kde.points"), "at least 2");
    } else if (grid == "phase") {
      kde.auto_phase_grid = true;
      kde.auto_points = points;
    } else {
      bad_value("kde.grid", grid, "opinion or phase");
    }
    with_key("kde", [&] {
      validate(kde);
      return 0;
    });
    sim.kde = kde;
  }

  with_key("model", [&] {
    validate(sim.model);
    return 0;
  });
  for (Method method : cfg.methods) {
    SimConfig c = sim;
    c.method = method;
    validate(c);
  }

  if (!r.at("sweep.axis").empty()) {
    SweepSpec sweep;
    const auto& axis = r.at("sweep.axis");
    if (axis == "n")
      sweep.axis = SweepAxis::n;
    else if (axis == "m")
      sweep.axis = SweepAxis::m;
    else
      bad_value("sweep.axis", axis, "n or m");
    sweep.values = to_sizes("sweep.values", r.at("sweep.values"));
    if (sweep.values.empty())
      bad_value("sweep.values", r.at("sweep.values"), "a non-empty list");
    sweep.repeats = to_size("sweep.repeats", r.at("sweep.repeats"));
    if (sweep.repeats < 1)
      bad_value("sweep.repeats", r.at("sweep.repeats"), "an integer >= 1");
    for (std::size_t value : sweep.values)
      for (Method method : cfg.methods) {
        SimConfig c = sim;
        c.method = method;
        (sweep.axis == SweepAxis::n ? c.n : c.m) = value;
        validate(c);
      }
    cfg.sweep = sweep;
  }

  cfg.bench.n_values = to_sizes("bench.n_values", r.at("bench.n_values"));
  cfg.bench.steps = to_size("bench.steps", r.at("bench.steps"));
  cfg.bench.full_steps = to_size("bench.full_steps", r.at("bench.full_steps"));
  cfg.bench.repetitions = to_size("bench.repetitions", r.at("bench.repetitions"));
  if (cfg.bench.steps < 1 || cfg.bench.full_steps < 1 || cfg.bench.repetitions < 1)
    throw ConfigError("bench.steps, bench.full_steps and bench.repetitions must be >= 1");

  cfg.out_dir = r.at("experiment.out");
  const auto threads = to_size("experiment.threads", r.at("experiment.threads"));
  if (threads > 4096)
    bad_value("experiment.threads", r.at("experiment.threads"), "0 to 4096");
  cfg.threads = static_cast<int>(threads);
  return cfg;
}

std::ofstream open_output(const std::filesystem::path& path)
{
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw IoError("cannot open " + path.string() + " for writing");
  return os;
}

void write_file(const std::filesystem::path& path, const std::string& body)
{
  auto os = open_output(path);
  os << body;
  if (!os)
    throw IoError("write failed: " + path.string());
}

std::string timestamp()
{
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_manifest(const ExperimentConfig& cfg, const std::vector<std::filesystem::path>& files,
                    const std::string& kind)
{
  nlohmann::json j;
  j["version"] = RVRBM_VERSION;
  j["created"] = timestamp();
  j["kind"] = kind;
  j["preset"] = to_string(cfg.preset);
  j["seed"] = cfg.sim.seed;
  j["config"] = cfg.resolved;
  auto& list = j["files"] = nlohmann::json::array();
  for (const auto& f : files)
    list.push_back(f.filename().string());
  write_file(cfg.out_dir / "manifest.json", j.dump(2) + "\n");
}

void ensure_dir(const std::filesystem::path& dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string() +
                  (ec ? ": " + ec.message() : ""));
}

double final_lambda(const RunOutput& run)
{
  return run.lambda_mean.empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : run.lambda_mean.back();
}

} // namespace

Preset parse_preset(const std::string& name)
{
  if (name == "test1a")
    return Preset::test1a;
  if (name == "test1b")
    return Preset::test1b;
  if (name == "test2")
    return Preset::test2;
  if (name == "test3")
    return Preset::test3;
  if (name == "custom")
    return Preset::custom;
  throw ConfigError("unknown preset '" + name + "' (expected test1a, test1b, test2, test3, custom)");
}

std::string to_string(Preset p)
{
  switch (p) {
  case Preset::test1a:
    return "test1a";
  case Preset::test1b:
    return "test1b";
  case Preset::test2:
    return "test2";
  case Preset::test3:
    return "test3";
  case Preset::custom:
    break;
  }
  return "custom";
}

Assignments parse_config_text(std::string_view text)
{
  Assignments out;
  std::string section;
  std::istringstream is{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos)
      raw.erase(hash);
    const auto line = trim(raw);
    if (line.empty())
      continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    auto key = trim(std::string_view(line).substr(0, eq));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!section.empty() && key.find('.') == std::string::npos)
      key = section + "." + key;
    out.emplace_back(std::move(key), trim(std::string_view(line).substr(eq + 1)));
  }
  return out;
}

std::vector<std::string> known_keys()
{
  std::vector<std::string> keys;
  for (const auto& [k, v] : base_defaults())
    keys.push_back(k);
  return keys;
}

Assignments preset_assignments(Preset p)
{
  // Shared by the three opinion experiments.
  const Assignments opinion{
    {"model.kernel", "bounded_confidence"},
    {"model.initial", "uniform_opinion"},
    {"model.dim_x", "0"},
    {"model.dim_v", "1"},
    {"model.opinion_domain", "true"},
    {"sim.n", "10000"},
    {"sim.m", "10"},
    {"sim.dt", "0.01"},
    {"sim.t_end", "5"},
    {"sim.batching", "per_particle"},
    {"cv.surrogate", "case1"},
    {"cv.lambda_mode", "scalar"},
    {"cv.reference_mean", "frozen"},
    {"experiment.methods", "rbm,rvrbm"},
    {"experiment.snapshot_times", "1,5"},
  };
  Assignments a;
  switch (p) {
  case Preset::test1a:
    a = opinion;
    a.push_back({"model.delta", "1"});
    break;
  case Preset::test1b:
    a = opinion;
    a.push_back({"model.delta", "0.5"});
    a.push_back({"model.initial", "two_cluster"});
    a.push_back({"cv.clusters", "-0.5,0.5"});
    break;
  case Preset::test2:
    a = opinion;
    a.push_back({"model.delta", "1"});
    a.push_back({"model.diffusion", "opinion"});
    a.push_back({"model.sigma2", "0.1"});
    break;
  case Preset::test3:
    a = {
      {"model.kernel", "cucker_smale"},
      {"model.xi", "1"},
      {"model.beta", "0.1"},
      {"model.initial", "uniform_phase"},
      {"model.dim_x", "1"},
      {"model.dim_v", "1"},
      {"model.opinion_domain", "false"},
      {"sim.n", "10000"},
      {"sim.m", "10"},
      {"sim.dt", "0.1"},
      {"sim.t_end", "10"},
      {"sim.record_every", "1"},
      {"sim.batching", "partition"},
      {"cv.surrogate", "case1"},
      {"cv.lambda_mode", "per_particle"},
      {"cv.reference_mean", "frozen"},
      {"kde.grid", "phase"},
      {"kde.points", "100"},
      {"experiment.methods", "full,rbm,rvrbm"},
      {"experiment.snapshot_times", "0,10"},
    };
    break;
  case Preset::custom:
    break;
  }
  return a;
}

ExperimentConfig resolve_config(const Assignments& assignments)
{
  Map resolved = base_defaults();
  for (const auto& [key, value] : assignments)
    if (!resolved.contains(key))
      throw ConfigError("unknown key '" + key + "'");

  std::string preset;
  for (const auto& [key, value] : assignments)
    if (key == "experiment.preset")
      preset = value;
  if (!preset.empty())
    for (const auto& [key, value] : preset_assignments(parse_preset(preset)))
      resolved[key] = value;
  std::set<std::string> user_keys;
  for (const auto& [key, value] : assignments) {
    resolved[key] = value;
    user_keys.insert(key);
  }
  return build(resolved, user_keys);
}

ExperimentConfig parse_config(const std::filesystem::path& file, const Assignments& overrides)
{
  Assignments all;
  if (!file.empty()) {
    std::ifstream is(file, std::ios::binary);
    if (!is)
      throw ConfigError("cannot read config file " + file.string());
    std::ostringstream text;
    text << is.rdbuf();
    all = parse_config_text(text.str());
  }
  all.insert(all.end(), overrides.begin(), overrides.end());
  return resolve_config(all);
}

std::string series_csv(const RunOutput& run)
{
  std::ostringstream os;
  const std::size_t dim = run.mean_v.empty() ? 1 : run.mean_v.front().size();
  os << "t";
  if (dim == 1)
    os << ",mean";
  else
    for (std::size_t c = 0; c < dim; ++c)
      os << ",mean_" << c;
  os << ",variance,error,lambda_mean,clamp_count,projection_count\n";
  const bool cv = !run.lambda_mean.empty();
  for (std::size_t r = 0; r < run.times.size(); ++r) {
    os << format_double(run.times[r]);
    for (double m : run.mean_v[r])
      os << ',' << format_double(m);
    os << ',' << format_double(run.var_v[r]) << ',' << format_double(run.error[r]) << ',';
    if (cv)
      os << format_double(run.lambda_mean[r]) << ',' << run.clamp_count[r];
    else
      os << ',';
    os << ',' << run.projection_count[r] << '\n';
  }
  return os.str();
}

void set_thread_count(int threads)
{
#ifdef _OPENMP
  if (threads > 0)
    omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
  set_thread_count(cfg.threads);
  ensure_dir(cfg.out_dir);
  ExperimentResult result;

  if (!cfg.sweep) {
    result.runs = coupled_run(cfg.sim, cfg.methods);
    for (const auto& run : result.runs) {
      const auto name = to_string(run.method);
      const auto path = cfg.out_dir / ("series_" + name + ".csv");
      write_file(path, series_csv(run));
      result.files.push_back(path);
      for (const auto& snap : run.snapshots) {
        const auto dpath = cfg.out_dir / ("density_" + name + "_t" + format_double(snap.t) + ".csv");
        auto os = open_output(dpath);
        write_csv(os, snap.density);
        if (!os)
          throw IoError("write failed: " + dpath.string());
        result.files.push_back(dpath);
      }
    }
    write_manifest(cfg, result.files, "run");
    return result;
  }

  // Sweep: each (value, repeat) is one coupled run with seed + repeat.
  const auto& sweep = *cfg.sweep;
  std::ostringstream summary;
  summary << "axis,value,method,repeats,mean_error,rms_error,ci_low,ci_high,mean_final_lambda\n";
  for (std::size_t value : sweep.values) {
    SimConfig sim = cfg.sim;
    (sweep.axis == SweepAxis::n ? sim.n : sim.m) = value;
    sim.snapshot_times.clear();
    std::map<Method, std::vector<double>> errors, lambdas;
    for (std::size_t r = 0; r < sweep.repeats; ++r) {
      sim.seed = cfg.sim.seed + r;
      for (const auto& run : coupled_run(sim, cfg.methods)) {
        errors[run.method].push_back(run.error.back());
        lambdas[run.method].push_back(final_lambda(run));
      }
    }
    for (Method method : cfg.methods) {
      const auto& errs = errors[method];
      summary << (sweep.axis == SweepAxis::n ? "n" : "m") << ',' << value << ','
              << to_string(method) << ',' << sweep.repeats << ',';
      if (errs.size() >= 2) {
        const auto s = rmse_over_repeats(errs);
        summary << format_double(s.mean) << ',' << format_double(s.rms) << ','
                << format_double(s.ci_low) << ',' << format_double(s.ci_high);
      } else {
        summary << format_double(errs.front()) << ',' << format_double(std::abs(errs.front()))
                << ",,";
      }
      summary << ',';
      if (method == Method::rvrbm) {
        const auto& l = lambdas[method];
        double sum = 0.0;
        for (double x : l)
          sum += x;
        summary << format_double(sum / static_cast<double>(l.size()));
      }
      summary << '\n';
    }
  }
  const auto path = cfg.out_dir / "summary.csv";
  write_file(path, summary.str());
  result.files.push_back(path);
  write_manifest(cfg, result.files, "sweep");
  return result;
}

std::vector<double> doubling_ratios(const std::vector<double>& seconds)
{
  std::vector<double> out;
  for (std::size_t i = 1; i < seconds.size(); ++i)
    out.push_back(seconds[i] / seconds[i - 1]);
  return out;
}

BenchResult bench(const ExperimentConfig& cfg, bool write_report)
{
  set_thread_count(cfg.threads);
  BenchResult result;
  result.n_values = cfg.bench.n_values;
  if (result.n_values.empty())
    throw ConfigError("bench.n_values is empty");

  const std::vector<Method> methods{Method::full, Method::rbm, Method::rvrbm};
  for (std::size_t n : result.n_values) {
    for (Method method : methods) {
      SimConfig sim = cfg.sim;
      sim.n = n;
      sim.method = method;
      sim.snapshot_times.clear();
      if (method == Method::rvrbm && !sim.cv)
        sim.cv = CvConfig{};
      validate(sim);
      const Ensemble initial = init_ensemble(sim.model, n, sim.seed);
      const Stepper stepper(sim, initial);
      const std::size_t steps = method == Method::full ? cfg.bench.full_steps : cfg.bench.steps;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t rep = 0; rep < cfg.bench.repetitions; ++rep) {
        Ensemble e = initial;
        const auto t0 = std::chrono::steady_clock::now();
        for (std::size_t k = 0; k < steps; ++k)
          e = stepper.step(e, k);
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        best = std::min(best, dt.count() / static_cast<double>(steps));
      }
      result.step_seconds[to_string(method)].push_back(best);
    }
  }

  if (write_report) {
    ensure_dir(cfg.out_dir);
    nlohmann::json j;
    j["version"] = RVRBM_VERSION;
    j["m"] = cfg.sim.m;
    j["n_values"] = result.n_values;
    j["step_seconds"] = result.step_seconds;
    for (const auto& [name, secs] : result.step_seconds)
      j["doubling_ratios"][name] = doubling_ratios(secs);
    const auto& rbm = result.step_seconds.at("rbm");
    const auto& rv = result.step_seconds.at("rvrbm");
    const auto& full = result.step_seconds.at("full");
    for (std::size_t i = 0; i < rbm.size(); ++i) {
      j["rvrbm_over_rbm"].push_back(rv[i] / rbm[i]);
      j["full_over_rbm"].push_back(full[i] / rbm[i]);
    }
    write_file(cfg.out_dir / "bench.json", j.dump(2) + "\n");
  }
  return result;
}

} // namespace rvrbm
