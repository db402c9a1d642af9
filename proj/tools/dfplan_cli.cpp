#include <CLI11.hpp>

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dfplan/distance_field.hpp"
#include "dfplan/experiments.hpp"
#include "dfplan/replanner.hpp"
#include "dfplan/scenario.hpp"
#include "dfplan/world_sim.hpp"

#ifndef DFPLAN_VERSION
#define DFPLAN_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace dfplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitError = 3;

int verbosity = 1;

void info(const std::string& msg) {
  if (verbosity > 0) std::cerr << msg << '\n';
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::uint64_t text_hash(const std::string& text) { return fnv1a(text.data(), text.size()); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

// Written as "started" before any other output and rewritten on completion.
class Manifest {
 public:
  Manifest(fs::path dir, const std::string& command, const std::vector<std::string>& argv)
      : path_(std::move(dir) / "manifest.json") {
    j_["tool"] = "dfplan";
    j_["command"] = command;
    j_["argv"] = argv;
    j_["status"] = "started";
    j_["config_schema_version"] = kConfigSchemaVersion;
    j_["versions"] = {{"dfplan", DFPLAN_VERSION},
                      {"compiler", __VERSION__},
                      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                    "." + std::to_string(EIGEN_MINOR_VERSION)},
                      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  }

  void config(const std::string& canonical, std::uint64_t seed, const std::string& source) {
    j_["config_source"] = source;
    j_["config_hash"] = "fnv1a64:" + hex64(text_hash(canonical));
    j_["seed"] = seed;
  }
  void output(const std::string& name) { j_["outputs"].push_back(name); }
  void set(const std::string& key, nlohmann::ordered_json v) { j_[key] = std::move(v); }
  void save() const { write_text(path_, j_.dump(2) + "\n"); }
  void finish(const std::string& status) {
    j_["status"] = status;
    save();
    done_ = true;
  }
  // An exception escaping the command leaves a "failed" manifest behind.
  ~Manifest() {
    if (done_) return;
    try {
      j_["status"] = "failed";
      save();
    } catch (...) {
    }
  }

 private:
  fs::path path_;
  bool done_ = false;
  nlohmann::ordered_json j_;
};

fs::path prepare_dir(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

template <class F>
void emit(Manifest& m, const fs::path& dir, const std::string& name, F&& writer) {
  std::ofstream os(dir / name, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
  writer(os);
  m.output(name);
}

// ---- study ----

struct StudyOpts {
  std::string study_case = "nav2d";
  std::optional<std::uint64_t> seed;
  std::optional<int> n_states;
  std::optional<int> n_envs;
  std::string out = "out/study";
};

std::string study_canonical(const StudyDesign& d) {
  StudyResult empty;
  empty.design = d;
  std::ostringstream s;
  write_study_json(s, empty);
  return s.str();
}

int run_study_cmd(const StudyOpts& o, const std::vector<std::string>& argv) {
  std::vector<StudyCase> cases;
  if (o.study_case == "all")
    cases = {StudyCase::kNav2d, StudyCase::kArm, StudyCase::kWholebody};
  else
    cases = {study_case_from_string(o.study_case)};
  std::vector<StudyDesign> designs;
  std::string canonical;
  for (StudyCase c : cases) {
    StudyDesign d = StudyDesign::defaults(c);
    if (o.seed) d.seed = *o.seed;
    if (o.n_states) d.n_states = *o.n_states;
    if (o.n_envs) d.n_envs = *o.n_envs;
    d.validate();
    canonical += study_canonical(d);
    designs.push_back(d);
  }
  const fs::path dir = prepare_dir(o.out);
  Manifest m(dir, "study", argv);
  m.config(canonical, designs.front().seed, "defaults+flags");
  m.save();
  std::vector<StudyResult> results;
  for (const auto& d : designs) {
    info(std::string("study ") + to_string(d.study_case) + ": " + std::to_string(d.problem_count()) + " problems");
    results.push_back(run_study(d));
    const std::string c = to_string(d.study_case);
    emit(m, dir, c + "_problems.csv", [&](std::ostream& os) { write_study_csv(os, results.back()); });
    emit(m, dir, c + "_summary.json", [&](std::ostream& os) { write_study_json(os, results.back()); });
    info(c + " done in " + std::to_string(results.back().runtime_s) + " s");
  }
  std::ostringstream report;
  write_study_report(report, results);
  emit(m, dir, "report.txt", [&](std::ostream& os) { os << report.str(); });
  if (verbosity > 0) std::cout << report.str();
  m.finish("complete");
  return kExitOk;
}

// ---- bench-edt ----

struct BenchOpts {
  FieldBenchConfig cfg;
  std::string out = "out/bench";
};

int run_bench_cmd(const BenchOpts& o, const std::vector<std::string>& argv) {
  o.cfg.validate();
  const fs::path dir = prepare_dir(o.out);
  Manifest m(dir, "bench-edt", argv);
  std::ostringstream canonical;
  canonical << std::setprecision(17) << "extent " << o.cfg.extent << "\nresolutions";
  for (double r : o.cfg.resolutions) canonical << ' ' << r;
  canonical << "\nrepetitions " << o.cfg.repetitions << "\ncuboids " << o.cfg.n_cuboids << "\nserial "
            << o.cfg.serial << '\n';
  m.config(canonical.str(), o.cfg.seed, "defaults+flags");
  m.save();
  const auto cells = run_field_bench(o.cfg);
  std::ostringstream table;
  write_field_bench_table(table, cells);
  emit(m, dir, "bench.csv", [&](std::ostream& os) { write_field_bench_csv(os, cells); });
  emit(m, dir, "bench.txt", [&](std::ostream& os) { os << table.str(); });
  if (verbosity > 0) std::cout << table.str();
  m.finish("complete");
  return kExitOk;
}

// ---- replan ----

struct ReplanOpts {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out/replan";
  bool threaded = false;
  double dump_every = 0.0;
};

// Replays the scripted world on its own clock and dumps fields every `every` s.
void dump_fields(const Scenario& s, double until, double every, Manifest& m, const fs::path& dir) {
  fs::create_directories(dir / "fields");
  WorldSim world(s.world);
  const double dt = 1.0 / s.replan.map_rate;
  double next = 0.0;
  int k = 0;
  for (double t = 0.0; t <= until + 1e-9; t = world.clock()) {
    if (t + 1e-9 >= next) {
      std::ostringstream name;
      name << "fields/field_" << std::setw(4) << std::setfill('0') << k++ << ".bin";
      emit(m, dir, name.str(), [&](std::ostream& os) { write_field_dump(os, *world.field()); });
      next += every;
    }
    world.step(dt);
  }
}

int run_replan_cmd(const ReplanOpts& o, const std::vector<std::string>& argv) {
  Scenario s = load_scenario(o.config);
  if (o.seed) s.seed = *o.seed;
  const fs::path dir = prepare_dir(o.out);
  Manifest m(dir, "replan", argv);
  m.config(scenario_to_yaml(s), s.seed, o.config);
  m.set("mode", o.threaded ? "threaded" : "lockstep");
  m.save();
  emit(m, dir, "scenario.yaml", [&](std::ostream& os) { os << scenario_to_yaml(s); });
  WorldSim world(s.world);
  const ExecutionLog log = o.threaded ? run_replanning_threaded(s.problem(), world) : run_replanning(s.problem(), world);
  emit(m, dir, "log.json", [&](std::ostream& os) { write_log_json(os, log); });
  emit(m, dir, "trajectory.csv", [&](std::ostream& os) { write_log_csv(os, log); });
  emit(m, dir, "timings.csv", [&](std::ostream& os) { write_timings_csv(os, log); });
  if (o.dump_every > 0.0) dump_fields(s, log.finish_time, o.dump_every, m, dir);
  m.set("result", {{"status", to_string(log.status)}, {"reason", log.reason}, {"replans", log.replans()}});
  std::ostringstream summary;
  summary << s.name << ": " << to_string(log.status) << " at t=" << log.finish_time << " s, " << log.replans()
          << " re-plans, min clearance " << log.min_clearance << " m";
  if (!log.reason.empty()) summary << " (" << log.reason << ")";
  info(summary.str());
  m.finish(log.reached() ? "complete" : "run_failed");
  return log.reached() ? kExitOk : kExitRunFailed;
}

// ---- inspect-field ----

struct InspectOpts {
  std::string config;
  std::string out = "out/field";
  double time = 0.0;
  std::vector<int> slices;
  std::optional<std::string> kind;
};

void write_slice(const DistanceField& f, int k, std::ostream& csv, std::ostream& pgm) {
  const GridSpec& s = f.spec();
  csv << "i,j,x,y,z,distance\n" << std::setprecision(17);
  double lo = 0.0, hi = 0.0;
  for (int j = 0; j < s.dims[1]; ++j)
    for (int i = 0; i < s.dims[0]; ++i) {
      const double v = f.value(i, j, k);
      const Vec3 c = s.center(i, j, k);
      csv << i << ',' << j << ',' << c.x() << ',' << c.y() << ',' << c.z() << ',' << v << '\n';
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  // Grey levels span [min, max]; rows are written with +y up.
  pgm << "P2\n" << s.dims[0] << ' ' << s.dims[1] << "\n255\n";
  const double span = hi > lo ? hi - lo : 1.0;
  for (int j = s.dims[1] - 1; j >= 0; --j) {
    for (int i = 0; i < s.dims[0]; ++i)
      pgm << static_cast<int>(std::lround(255.0 * (f.value(i, j, k) - lo) / span)) << (i + 1 < s.dims[0] ? " " : "");
    pgm << '\n';
  }
}

int run_inspect_cmd(const InspectOpts& o, const std::vector<std::string>& argv) {
  Scenario s = load_scenario(o.config);
  if (o.kind) s.world.kind = field_kind_from_string(*o.kind);
  if (o.time < 0.0) throw std::invalid_argument("--time must be >= 0");
  const GridSpec& g = s.world.grid;
  std::vector<int> slices = o.slices;
  if (slices.empty()) slices = {g.dims[2] / 2};
  for (int k : slices)
    if (k < 0 || k >= g.dims[2]) throw std::invalid_argument("slice index " + std::to_string(k) + " outside grid");
  const fs::path dir = prepare_dir(o.out);
  Manifest m(dir, "inspect-field", argv);
  m.config(scenario_to_yaml(s), s.seed, o.config);
  m.save();
  WorldSim world(s.world);
  if (o.time > 0.0) world.step(o.time);
  const DistanceField& f = *world.field();
  emit(m, dir, "field.bin", [&](std::ostream& os) { write_field_dump(os, f); });
  for (int k : slices) {
    std::ostringstream pgm;
    const std::string stem = "slice_z" + std::to_string(k);
    emit(m, dir, stem + ".csv", [&](std::ostream& os) { write_slice(f, k, os, pgm); });
    emit(m, dir, stem + ".pgm", [&](std::ostream& os) { os << pgm.str(); });
  }
  const auto [mn, mx] = std::minmax_element(f.values().begin(), f.values().end());
  m.set("field", {{"kind", to_string(f.kind())},
                  {"time", world.clock()},
                  {"hash", hex64(field_hash(f))},
                  {"occupied", world.mask().count()},
                  {"min", *mn},
                  {"max", *mx}});
  info("field " + std::string(to_string(f.kind())) + " at t=" + std::to_string(world.clock()) + ": hash " +
       hex64(field_hash(f)) + ", " + std::to_string(world.mask().count()) + " occupied voxels");
  m.finish("complete");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Distance-field motion planning: studies, benchmarks, re-planning and field inspection", "dfplan"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DFPLAN_VERSION);
  bool quiet = false;
  bool verbose = false;
  app.add_flag("-q,--quiet", quiet, "Only print errors");
  app.add_flag("-v,--verbose", verbose, "Print progress details");

  StudyOpts study;
  auto* s = app.add_subcommand("study", "SDF vs USDF planning comparison");
  s->add_option("--case", study.study_case, "nav2d | arm | wholebody | all")
      ->check(CLI::IsMember({"nav2d", "arm", "wholebody", "all"}));
  s->add_option("--seed", study.seed, "Random seed");
  s->add_option("--n-states", study.n_states, "Sampled robot states (pairs = n(n-1)/2)");
  s->add_option("--n-envs", study.n_envs, "Single-cuboid environments");
  s->add_option("--out", study.out, "Output directory");

  BenchOpts bench;
  auto* b = app.add_subcommand("bench-edt", "Distance-field build timing");
  b->add_option("--extent", bench.cfg.extent, "Cube edge in metres");
  b->add_option("--resolution", bench.cfg.resolutions, "Voxel sizes in metres (repeatable)");
  b->add_option("--reps", bench.cfg.repetitions, "Builds per cell")->check(CLI::Range(1, 100000));
  b->add_option("--cuboids", bench.cfg.n_cuboids, "Random cuboids in the scene");
  b->add_option("--seed", bench.cfg.seed, "Scene seed");
  b->add_flag("--serial", bench.cfg.serial, "Use the single-threaded EDT");
  b->add_option("--out", bench.out, "Output directory");

  ReplanOpts replan;
  auto* r = app.add_subcommand("replan", "Receding-horizon re-planning in a scripted world");
  r->add_option("config", replan.config, "Scenario YAML")->required();
  r->add_option("--seed", replan.seed, "Override the scenario seed");
  r->add_option("--out", replan.out, "Output directory");
  r->add_flag("--threaded", replan.threaded, "Free-running threads instead of lockstep");
  r->add_option("--dump-fields", replan.dump_every, "Dump the field every N simulated seconds")
      ->check(CLI::PositiveNumber);

  InspectOpts inspect;
  auto* f = app.add_subcommand("inspect-field", "Build a scenario field and dump slices");
  f->add_option("config", inspect.config, "Scenario YAML")->required();
  f->add_option("--time", inspect.time, "Simulated time of the world snapshot");
  f->add_option("--slice", inspect.slices, "z index of a slice (repeatable)");
  f->add_option("--kind", inspect.kind, "signed | unsigned")->check(CLI::IsMember({"signed", "unsigned"}));
  f->add_option("--out", inspect.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  verbosity = quiet ? 0 : verbose ? 2 : 1;

  try {
    if (*s) return run_study_cmd(study, args);
    if (*b) return run_bench_cmd(bench, args);
    if (*r) return run_replan_cmd(replan, args);
    if (*f) return run_inspect_cmd(inspect, args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}
