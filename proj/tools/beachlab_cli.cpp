// beachlab: command-line front end for the experiments.

#include "beachlab/lab.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace beachlab;
using lab::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LabError(ErrorKind::Io, "cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw LabError(ErrorKind::Config, path + ": " + e.what());
  }
}

void write_artifacts(const fs::path& dir, const lab::Artifacts& files) {
  for (const auto& f : files) {
    const fs::path p = dir / f.name;
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw LabError(ErrorKind::Io, "cannot write " + p.string());
    out.write(f.data.data(), static_cast<std::streamsize>(f.data.size()));
    if (!out) throw LabError(ErrorKind::Io, "write failed for " + p.string());
  }
}

int fail(const fs::path& dir, const std::string& kind, const std::string& msg, int code) {
  const std::string e = lab::error_json(kind, msg, code);
  std::cerr << e;
  if (dir.empty()) return code;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (fs::is_directory(dir, ec)) std::ofstream(dir / "error.json") << e;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corner-domain water-wave laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, tol_path;
  int jobs = 1;
  app.add_option("--out", out_dir, "output directory (default: $BEACHLAB_OUT_DIR, else ./out)");
  app.add_option("--jobs", jobs, "worker cap")->check(CLI::PositiveNumber);
  app.add_option("--tolerance-overrides", tol_path, "JSON file overriding solver tolerances")->check(CLI::ExistingFile);

  auto add_config = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--config", config_path, "experiment config (JSON)");
    if (required) o->required();
  };

  auto* exps = app.add_subcommand("exponents", "singular exponents: formula vs pencil roots");
  add_config(exps, false);
  std::vector<std::string> bcs;
  std::vector<double> omegas;
  int count = 0;
  exps->add_option("--bc", bcs, "dn, nn or dd (repeatable)");
  exps->add_option("--omega", omegas, "corner angle (repeatable)");
  exps->add_option("--count", count, "exponents per angle");

  auto* solve = app.add_subcommand("solve", "P1 solve of a sector problem with a singular exact solution");
  add_config(solve, true);
  auto* conv = app.add_subcommand("convergence", "mesh convergence study on a sector");
  add_config(conv, true);
  auto* dtn = app.add_subcommand("dtn", "Dirichlet-to-Neumann spectrum");
  add_config(dtn, true);
  auto* taylor = app.add_subcommand("taylor", "Taylor coefficient on the surface and at the corners");
  add_config(taylor, true);
  auto* energy = app.add_subcommand("energy", "energy time series of a run");
  add_config(energy, true);
  auto* sim = app.add_subcommand("simulate", "free-surface run with state files");
  add_config(sim, true);

  fs::path dir;
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail({}, "usage", e.what(), lab::kConfigError);
  }

  if (!out_dir.empty()) dir = out_dir;
  else if (const char* env = std::getenv("BEACHLAB_OUT_DIR"); env && *env) dir = env;
  else dir = "out";

  try {
    if (!tol_path.empty()) set_tolerances(lab::tolerances_from_json(read_json(tol_path)));
    json cfg = config_path.empty() ? json::object() : read_json(config_path);
    lab::Artifacts files;
    std::optional<MonitorEvent> halt;

    if (*exps) {
      lab::ExponentsOptions o;
      if (!config_path.empty()) o = lab::exponents_from_json(cfg);
      if (!bcs.empty()) o.bcs = bcs;
      if (!omegas.empty()) o.omegas = omegas;
      if (count > 0) o.count = count;
      if (o.omegas.empty()) throw LabError(ErrorKind::Config, "omegas: required (--omega or config)");
      files = lab::run_exponents(o, jobs);
    } else if (*solve) {
      files = lab::run_solve(cfg);
    } else if (*conv) {
      files = lab::run_convergence(cfg);
    } else if (*dtn) {
      files = lab::run_dtn(cfg);
    } else if (*taylor) {
      files = lab::run_taylor(cfg);
    } else if (*energy) {
      auto r = lab::run_energy(cfg);
      files = std::move(r.files);
      halt = r.halt;
    } else if (*sim) {
      auto r = lab::run_simulate(cfg);
      files = std::move(r.files);
      halt = r.halt;
    }

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw LabError(ErrorKind::Io, "cannot create output directory " + dir.string());
    write_artifacts(dir, files);
    for (const auto& f : files)
      if (f.name.find('/') == std::string::npos) std::cout << (dir / f.name).string() << "\n";
    if (halt)
      return fail(dir, "monitor_halt", halt->cause + " at t = " + lab::fmt(halt->t) + ": " + halt->detail,
                  lab::kMonitorHalt);
    return lab::kOk;
  } catch (const LabError& e) {
    return fail(dir, to_string(e.kind()), e.what(), lab::exit_code(e.kind()));
  } catch (const std::exception& e) {
    return fail(dir, "internal", e.what(), lab::kInternalError);
  }
}
