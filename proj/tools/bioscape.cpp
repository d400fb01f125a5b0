#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bioscape/bench.hpp"
#include "bioscape/engine.hpp"
#include "bioscape/gillespie.hpp"
#include "bioscape/trace.hpp"

namespace fs = std::filesystem;
using namespace bioscape;

namespace {

struct Options {
  std::string model_path;
  RunConfig config;
  std::string out;
  std::string snapshot_dir;
  std::string plot;
  std::string engine = "parallel";
  std::vector<std::size_t> agents{100, 1000, 10000};
  std::uint64_t bench_steps = 100;
  std::uint64_t seeds = 100;
  std::size_t points = 10;
};

// Usage-level failures that CLI11 cannot detect itself.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read model file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_model(text.str());
  } catch (const ModelError& e) {
    throw std::runtime_error(format_diagnostics(e.diagnostics(), path));
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void add_run_options(CLI::App* cmd, Options& o) {
  cmd->add_option("model", o.model_path, "Model file")->required();
  cmd->add_option("--seed", o.config.seed, "Random seed");
  cmd->add_option("--t-max", o.config.t_max, "Simulated time horizon");
  cmd->add_option("--step-max", o.config.step_max, "Maximum number of steps");
  cmd->add_option("--sample-interval", o.config.sample_interval,
                  "Snapshot period in time units (0 disables)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--move-retries", o.config.move_retries, "Translation samples per move redex")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--counting", o.config.counting_mode,
                "Scale communication rates by the number of partners in range");
  cmd->add_option("--threads", o.config.threads, "Worker cap (default: BIOSCAPE_THREADS)");
}

void emit(const Trace& trace, const Options& o) {
  if (o.out.empty()) {
    std::cout << format_trace(trace, TraceFormat::Csv);
  } else {
    write_trace(trace, format_for_path(o.out), o.out);
  }
  if (!o.plot.empty()) write_text(o.plot, population_svg(trace));
  if (!o.snapshot_dir.empty()) {
    fs::create_directories(o.snapshot_dir);
    for (std::size_t i = 0; i < trace.snapshots.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "snapshot_%05zu.json", i);
      write_text((fs::path(o.snapshot_dir) / name).string(),
                 trace.snapshots[i].configuration.dump(2) + "\n");
    }
  }
}

Trace simulate(const Model& model, const RunConfig& config, const std::string& engine) {
  if (engine == "reference") return run_reference(model, config);
  return run(model, config);
}

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return n ? sum / double(n) : 0.0; }
  double stderr_of_mean() const {
    if (n < 2) return 0.0;
    const double var = (sum_sq - sum * sum / double(n)) / double(n - 1);
    return std::sqrt(std::max(0.0, var) / double(n));
  }
};

int compare(const Model& model, const Options& o) {
  if (!std::isfinite(o.config.t_max)) throw UsageError("compare needs a finite --t-max");
  if (o.points == 0) throw UsageError("--points must be positive");
  const auto& entities = model.entity_names();
  std::vector<double> times;
  for (std::size_t i = 0; i <= o.points; ++i) times.push_back(o.config.t_max * double(i) / double(o.points));
  std::vector<Moments> parallel(times.size() * entities.size());
  std::vector<Moments> reference(parallel.size());
  for (std::uint64_t s = 0; s < o.seeds; ++s) {
    RunConfig config = o.config;
    config.seed = o.config.seed + s;
    const Trace a = run(model, config);
    const Trace b = run_reference(model, config);
    for (std::size_t t = 0; t < times.size(); ++t) {
      for (std::size_t e = 0; e < entities.size(); ++e) {
        parallel[t * entities.size() + e].add(double(population_at(a, entities[e], times[t])));
        reference[t * entities.size() + e].add(double(population_at(b, entities[e], times[t])));
      }
    }
  }
  std::ostringstream out;
  out << "time,entity,parallel_mean,parallel_se,reference_mean,reference_se,z\n";
  for (std::size_t t = 0; t < times.size(); ++t) {
    for (std::size_t e = 0; e < entities.size(); ++e) {
      const auto& a = parallel[t * entities.size() + e];
      const auto& b = reference[t * entities.size() + e];
      const double se = std::hypot(a.stderr_of_mean(), b.stderr_of_mean());
      const double diff = a.mean() - b.mean();
      const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY);
      out << times[t] << ',' << entities[e] << ',' << a.mean() << ',' << a.stderr_of_mean() << ','
          << b.mean() << ',' << b.stderr_of_mean() << ',' << z << '\n';
    }
  }
  if (o.out.empty()) {
    std::cout << out.str();
  } else {
    write_text(o.out, out.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel BioScape simulator"};
  app.require_subcommand(1);
  Options o;

  auto* run_cmd = app.add_subcommand("run", "Simulate with the parallel engine");
  add_run_options(run_cmd, o);
  run_cmd->add_option("--engine", o.engine, "Engine")->check(CLI::IsMember({"parallel", "reference"}));
  run_cmd->add_option("--out", o.out, "Trace file (.csv or .jsonl); stdout if omitted");
  run_cmd->add_option("--snapshot-dir", o.snapshot_dir, "Directory for JSON snapshots");
  run_cmd->add_option("--plot", o.plot, "Population plot (SVG)");

  auto* ref_cmd = app.add_subcommand("reference", "Simulate with the sequential Gillespie engine");
  add_run_options(ref_cmd, o);
  ref_cmd->add_option("--out", o.out, "Trace file (.csv or .jsonl); stdout if omitted");
  ref_cmd->add_option("--snapshot-dir", o.snapshot_dir, "Directory for JSON snapshots");
  ref_cmd->add_option("--plot", o.plot, "Population plot (SVG)");

  auto* check_cmd = app.add_subcommand("check", "Parse and validate a model");
  check_cmd->add_option("model", o.model_path, "Model file")->required();

  auto* bench_cmd = app.add_subcommand("bench", "Time parallel steps against agent count");
  add_run_options(bench_cmd, o);
  bench_cmd->add_option("--agents", o.agents, "Agent counts")->delimiter(',');
  bench_cmd->add_option("--steps", o.bench_steps, "Steps per agent count");
  bench_cmd->add_option("--out", o.out, "CSV output; stdout if omitted");

  auto* cmp_cmd = app.add_subcommand("compare", "Compare mean populations of both engines");
  add_run_options(cmp_cmd, o);
  cmp_cmd->add_option("--seeds", o.seeds, "Number of seeds")->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--points", o.points, "Number of time intervals");
  cmp_cmd->add_option("--out", o.out, "CSV output; stdout if omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const ModelFile file = load_model(o.model_path);
    if (check_cmd->parsed()) {
      std::cout << o.model_path << ": ok (" << file.definitions.size() << " entities, "
                << file.channels.size() << " channels)\n";
      return 0;
    }
    const Model model(file);
    if (run_cmd->parsed()) {
      emit(simulate(model, o.config, o.engine), o);
    } else if (ref_cmd->parsed()) {
      emit(run_reference(model, o.config), o);
    } else if (bench_cmd->parsed()) {
      const auto rows = run_bench(file, o.agents, o.bench_steps, o.config);
      if (o.out.empty()) {
        std::cout << format_bench_csv(rows);
      } else {
        write_text(o.out, format_bench_csv(rows));
      }
      if (rows.size() >= 2) std::cerr << "log-log slope: " << loglog_slope(rows) << '\n';
    } else if (cmp_cmd->parsed()) {
      return compare(model, o);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
