#include "floqmem/commands.hpp"

#include "floqmem/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

namespace floqmem {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void log_line(const CommandContext& ctx, const std::string& msg) {
  if (ctx.log) *ctx.log << msg << std::endl;
}

bool wants(const RunConfig& c, const std::string& format) {
  return std::find(c.output.formats.begin(), c.output.formats.end(), format) != c.output.formats.end();
}

fs::path prepare_out(const CommandContext& ctx) {
  const fs::path dir = ctx.out_dir();
  fs::create_directories(dir);
  return dir;
}

// Configuration recorded in output headers; the output location is left out
// so that runs are byte-comparable across directories.
json provenance(const RunConfig& c) {
  json j = c.to_json();
  j["output"].erase("directory");
  return j;
}

void write_manifest(const CommandContext& ctx, const std::string& command, const std::vector<std::string>& files) {
  write_json(ctx.out_dir() / "manifest.json", {{"command", command}, {"files", files}}, provenance(ctx.config));
}

std::vector<FloquetSolution> labelled_path(const RunConfig& c) {
  std::vector<FloquetSolution> path;
  for (double a : c.amplitudes()) {
    DriveSpec d = c.drive;
    d.amplitude = a;
    path.push_back(floquet_solve(d, c.floquet));
  }
  label_continuation(path);
  return path;
}

std::string short_number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(3);
  os << v;
  return os.str();
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

// Minimal SVG line chart with optional peak markers and vertical guides.
struct Series {
  std::string name;
  std::vector<double> y;
  std::string color;
};

std::string svg_panel(double ox, double oy, double w, double h, const std::string& title,
                      const std::vector<double>& x, const std::vector<Series>& series,
                      const std::vector<std::size_t>& markers, const std::vector<double>& guides) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (double v : x) {
    xmin = std::min(xmin, v);
    xmax = std::max(xmax, v);
  }
  for (const auto& s : series)
    for (double v : s.y)
      if (std::isfinite(v)) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
  if (!std::isfinite(ymin)) ymin = 0.0, ymax = 1.0;
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto px = [&](double v) { return ox + 60.0 + (v - xmin) / (xmax - xmin) * (w - 80.0); };
  auto py = [&](double v) { return oy + h - 40.0 - (v - ymin) / (ymax - ymin) * (h - 70.0); };

  std::ostringstream os;
  os << "<text x=\"" << fixed(ox + w / 2, 1) << "\" y=\"" << fixed(oy + 18, 1)
     << "\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<rect x=\"" << fixed(px(xmin), 1) << "\" y=\"" << fixed(py(ymax), 1) << "\" width=\""
     << fixed(px(xmax) - px(xmin), 1) << "\" height=\"" << fixed(py(ymin) - py(ymax), 1)
     << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4.0;
    const double yv = ymin + (ymax - ymin) * k / 4.0;
    os << "<text x=\"" << fixed(px(xv), 1) << "\" y=\"" << fixed(py(ymin) + 16, 1)
       << "\" text-anchor=\"middle\" font-size=\"10\">" << fixed(xv, 2) << "</text>\n";
    os << "<text x=\"" << fixed(px(xmin) - 4, 1) << "\" y=\"" << fixed(py(yv) + 3, 1)
       << "\" text-anchor=\"end\" font-size=\"10\">" << short_number(yv) << "</text>\n";
  }
  for (double g : guides) {
    os << "<line x1=\"" << fixed(px(g), 1) << "\" y1=\"" << fixed(py(ymin), 1) << "\" x2=\"" << fixed(px(g), 1)
       << "\" y2=\"" << fixed(py(ymax), 1) << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i)
      if (std::isfinite(s.y[i])) os << fixed(px(x[i]), 2) << "," << fixed(py(s.y[i]), 2) << " ";
    os << "\"/>\n";
  }
  if (!series.empty()) {
    for (std::size_t i : markers) {
      if (i >= x.size() || !std::isfinite(series[0].y[i])) continue;
      os << "<circle cx=\"" << fixed(px(x[i]), 2) << "\" cy=\"" << fixed(py(series[0].y[i]), 2)
         << "\" r=\"4\" fill=\"#d62728\"/>\n";
    }
  }
  os << "<text x=\"" << fixed(ox + w / 2, 1) << "\" y=\"" << fixed(oy + h - 6, 1)
     << "\" text-anchor=\"middle\" font-size=\"11\">Omega</text>\n";
  return os.str();
}

void write_svg(const fs::path& path, double w, double h, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << body << "</svg>\n";
}

std::vector<std::size_t> flagged(const CsvData& data, const std::string& column) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < data.rows.size(); ++r)
    if (data.number(r, column) != 0.0) out.push_back(r);
  return out;
}

std::vector<double> column_values(const CsvData& data, const std::string& column) {
  std::vector<double> out;
  for (std::size_t r = 0; r < data.rows.size(); ++r) out.push_back(data.number(r, column));
  return out;
}

}  // namespace

int cmd_quasienergies(const CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  const fs::path dir = prepare_out(ctx);
  const std::vector<FloquetSolution> path = labelled_path(c);
  CsvTable table({"Omega", "eps1", "eps2", "gap"}, provenance(c));
  for (const FloquetSolution& s : path) {
    table.row()
        .add(s.drive.amplitude)
        .add(s.quasienergies[0])
        .add(s.quasienergies[1])
        .add(circle_gap(s.quasienergies[0], s.quasienergies[1], s.drive.omega));
  }
  table.write(dir / "quasienergies.csv");
  std::vector<std::string> files{"quasienergies.csv"};
  if (wants(c, "svg")) {
    cmd_plot(ctx, dir);
    files.push_back("quasienergies.svg");
  }
  write_manifest(ctx, "quasienergies", files);
  log_line(ctx, "wrote " + (dir / "quasienergies.csv").string());
  return exit_success;
}

int cmd_coefficients(const CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  const fs::path dir = prepare_out(ctx);
  const std::vector<FloquetSolution> path = labelled_path(c);
  CsvTable full({"Omega", "n", "i", "j", "re", "im", "abs"}, provenance(c));
  CsvTable summary({"Omega", "abs_c0_12", "abs_c1_11", "max_other", "edge", "aliasing"}, provenance(c));
  for (const FloquetSolution& s : path) {
    const CoefficientTable t = fourier_coefficients(s, c.n_max);
    double other = 0.0;
    for (int n = -t.n_max; n <= t.n_max; ++n) {
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          const cplx v = t(n, i, j);
          full.row()
              .add(s.drive.amplitude)
              .add(static_cast<long long>(n))
              .add(static_cast<long long>(i + 1))
              .add(static_cast<long long>(j + 1))
              .add(v.real())
              .add(v.imag())
              .add(std::abs(v));
          const bool leading = (n == 0 && i != j) || (std::abs(n) == 1 && i == j);
          if (!leading) other = std::max(other, std::abs(v));
        }
      }
    }
    summary.row()
        .add(s.drive.amplitude)
        .add(std::abs(t(0, 0, 1)))
        .add(std::abs(t(1, 0, 0)))
        .add(other)
        .add(t.edge_magnitude)
        .add(static_cast<long long>(t.aliasing));
    if (t.aliasing) log_line(ctx, "warning: Fourier table aliasing at Omega = " + format_number(s.drive.amplitude));
  }
  full.write(dir / "coefficients.csv");
  summary.write(dir / "coefficient_summary.csv");
  write_manifest(ctx, "coefficients", {"coefficients.csv", "coefficient_summary.csv"});
  log_line(ctx, "wrote " + (dir / "coefficients.csv").string());
  return exit_success;
}

int cmd_evolve(const CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  const fs::path dir = prepare_out(ctx);
  const DriveSpec& drive = c.drive;
  const DensityMatrix rho0 = parse_state(c.evolve.rho0);
  const double dt = drive.period() / c.analysis.samples_per_period;
  const long steps = std::lround(std::floor(c.evolve.t_end / dt + 1e-9));
  std::vector<double> times;
  for (long k = 0; k <= steps; ++k) times.push_back(dt * static_cast<double>(k));
  if (c.evolve.t_end - times.back() > 1e-9 * dt) times.push_back(c.evolve.t_end);

  const FloquetSolution sol = floquet_solve(drive, c.floquet);
  const CoefficientTable table = fourier_coefficients(sol, c.n_max);
  json meta{{"solver", c.evolve.solver}, {"quasienergies", {sol.quasienergies[0], sol.quasienergies[1]}}};
  std::vector<std::string> warnings;
  if (table.aliasing) warnings.push_back("Fourier table aliasing: raise n_max or N_t");

  std::vector<Mat2> lab;
  if (c.evolve.solver == "heom") {
    const HeomTrajectory tr = heom_evolve(drive, c.bath, rho0, c.heom, times);
    lab = tr.states;
    meta["ado_count"] = tr.ado_count;
    meta["top_tier_ratio"] = tr.top_tier_ratio;
    meta["rejection_rate"] = tr.rejection_rate;
    meta["rhs_calls"] = tr.rhs_calls;
    warnings.insert(warnings.end(), tr.warnings.begin(), tr.warnings.end());
  } else {
    std::string model = c.evolve.model;
    if (model == "auto") {
      const double gap = circle_gap(sol.quasienergies[0], sol.quasienergies[1], drive.omega);
      model = gap <= degeneracy_threshold * drive.omega ? "degenerate" : "nondegenerate";
    }
    const double c11 = c.evolve.c11 ? *c.evolve.c11 : std::abs(table(1, 0, 0));
    DissipatorSpec spec;
    if (model == "generic") {
      spec = build_generic(table, sol, c.bath);
    } else if (model == "nondegenerate") {
      spec = build_nondegenerate(sol, c.bath, c11);
    } else {
      spec = build_degenerate(c.bath, c11, drive.omega);
    }
    meta["model"] = model;
    meta["dissipator"] = spec.to_json();
    if (spec.variant != DissipatorVariant::generic) {
      const RelaxationTimes rt = relaxation_times(spec);
      meta["relaxation_times"] = {{"diag", rt.diag}, {"off", rt.off}, {"re", rt.re}, {"im", rt.im}};
    }
    const Mat2 f0 = to_floquet_basis(sol, rho0.matrix());
    const LindbladTrajectory tr = evolve(spec, DensityMatrix(0.5 * (f0 + f0.adjoint())), times);
    for (std::size_t k = 0; k < times.size(); ++k) lab.push_back(to_lab_frame(sol, tr.states[k], times[k]));
  }

  CsvTable csv({"t", "rho_ee", "rho_gg", "re_rho_eg", "im_rho_eg", "bloch_x", "bloch_y", "bloch_z", "floquet_p1",
                "floquet_re12", "floquet_im12"},
               provenance(c));
  const double de = sol.quasienergies[0] - sol.quasienergies[1];
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Mat2& r = lab[k];
    const Eigen::Vector3d b = bloch_components(r);
    const Mat2 f = floquet_frame(sol, r, times[k]);
    const cplx coh = f(0, 1) * std::exp(cplx(0.0, de * times[k]));
    csv.row()
        .add(times[k])
        .add(r(0, 0).real())
        .add(r(1, 1).real())
        .add(r(0, 1).real())
        .add(r(0, 1).imag())
        .add(b(0))
        .add(b(1))
        .add(b(2))
        .add(f(0, 0).real())
        .add(coh.real())
        .add(coh.imag());
  }
  csv.write(dir / "trajectory.csv");
  meta["warnings"] = warnings;
  write_json(dir / "trajectory.json", meta, provenance(c));
  write_manifest(ctx, "evolve", {"trajectory.csv", "trajectory.json"});
  for (const auto& w : warnings) log_line(ctx, "warning: " + w);
  log_line(ctx, "wrote " + (dir / "trajectory.csv").string());
  return exit_success;
}

int cmd_sweep(const CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  const fs::path dir = prepare_out(ctx);
  fs::create_directories(dir / "details");
  const json cfg = provenance(c);
  const SweepConfig sc = c.sweep_config();
  const SweepResult result = sweep(sc, ctx.jobs, [&](std::size_t done, std::size_t total, const PointResult& p) {
    std::ostringstream os;
    os << "[" << done << "/" << total << "] Omega=" << format_number(p.amplitude);
    if (p.ok) {
      os << " N=" << format_number(p.nm) << " tau=" << format_number(p.tau);
    } else {
      os << " failed: " << p.error;
    }
    log_line(ctx, os.str());
  });
  const Correspondence corr = correspondence_report(result);

  CsvTable table({"Omega", "N", "tau", "gap", "is_N_peak", "is_tau_peak", "nearest_crossing"}, cfg);
  CsvTable points({"Omega", "ok", "tau_lab", "tau_element", "tau_estimate", "nm_horizon", "horizon",
                   "top_tier_ratio", "sigma_x_angle", "best_axis_x", "best_axis_y", "best_axis_z", "best_index",
                   "warnings"},
                  cfg);
  CsvTable fits({"Omega", "frame", "element", "ok", "tau", "r2", "peaks", "diagnostic"}, cfg);
  json failures = json::array();
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const PointResult& p = result.points[i];
    double nearest = std::numeric_limits<double>::quiet_NaN();
    for (double x : result.crossings)
      if (std::isnan(nearest) || std::abs(x - p.amplitude) < std::abs(nearest - p.amplitude)) nearest = x;
    const bool npk = std::find(result.nm_peaks.begin(), result.nm_peaks.end(), i) != result.nm_peaks.end();
    const bool tpk = std::find(result.tau_peaks.begin(), result.tau_peaks.end(), i) != result.tau_peaks.end();
    table.row()
        .add(p.amplitude)
        .add(p.nm)
        .add(p.tau)
        .add(p.gap)
        .add(static_cast<long long>(npk))
        .add(static_cast<long long>(tpk))
        .add(nearest);
    if (!p.ok) {
      failures.push_back({{"index", i}, {"Omega", p.amplitude}, {"error", p.error}});
      continue;
    }
    std::string warn;
    for (const auto& w : p.warnings) warn += (warn.empty() ? "" : "; ") + w;
    points.row()
        .add(p.amplitude)
        .add(1LL)
        .add(p.tau_lab)
        .add(p.tau_element)
        .add(p.tau_estimate)
        .add(p.nm_horizon)
        .add(p.horizon)
        .add(p.top_tier_ratio)
        .add(p.sigma_x_angle)
        .add(p.best.best_axis(0))
        .add(p.best.best_axis(1))
        .add(p.best.best_axis(2))
        .add(static_cast<long long>(p.best.best_index))
        .add(warn);
    for (const ElementFit& e : p.fit.elements) {
      fits.row()
          .add(p.amplitude)
          .add(e.frame)
          .add(e.element)
          .add(static_cast<long long>(e.fit.ok))
          .add(e.fit.tau)
          .add(e.fit.r2)
          .add(static_cast<long long>(e.fit.peaks))
          .add(e.fit.diagnostic);
    }
    CsvTable curve({"t", "D"}, cfg);
    const double dt = c.drive.period() / c.analysis.samples_per_period;
    for (std::size_t k = 0; k < p.best_curve.size(); ++k) curve.row().add(dt * static_cast<double>(k)).add(p.best_curve[k]);
    std::ostringstream name;
    name << "trace_distance_" << i << ".csv";
    curve.write(dir / "details" / name.str());
  }
  table.write(dir / "sweep.csv");
  points.write(dir / "details" / "points.csv");
  fits.write(dir / "details" / "fits.csv");

  json rows = json::array();
  for (const auto& r : corr.rows) {
    rows.push_back({{"crossing", r.crossing},
                    {"N_peak", r.nm_peak ? json(*r.nm_peak) : json(nullptr)},
                    {"tau_peak", r.tau_peak ? json(*r.tau_peak) : json(nullptr)}});
  }
  write_json(dir / "correspondence.json",
             {{"crossings", result.crossings},
              {"matches", rows},
              {"unmatched_N_peaks", corr.unmatched_nm},
              {"unmatched_tau_peaks", corr.unmatched_tau},
              {"unmatched_crossings", corr.unmatched_crossings},
              {"max_distance", corr.max_distance},
              {"complete", corr.complete()}},
             cfg);
  write_json(dir / "failures.json", {{"failures", failures}}, cfg);
  std::vector<std::string> files{"sweep.csv", "correspondence.json", "failures.json", "details/points.csv",
                                 "details/fits.csv"};
  if (wants(c, "svg")) {
    cmd_plot(ctx, dir);
    files.push_back("sweep.svg");
  }
  write_manifest(ctx, "sweep", files);
  log_line(ctx, "wrote " + (dir / "sweep.csv").string());
  if (result.failures() > 0) {
    log_line(ctx, std::to_string(result.failures()) + " of " + std::to_string(result.points.size()) +
                      " points failed; see failures.json");
    return exit_partial_failure;
  }
  return exit_success;
}

int cmd_crossings(const CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  if (!c.amplitude_range) throw ConfigError("crossings requires drive.Omega_range");
  const fs::path dir = prepare_out(ctx);
  const std::vector<double> x = find_crossings(c.drive, (*c.amplitude_range)[0], (*c.amplitude_range)[1]);
  write_json(dir / "crossings.json", {{"omega", c.drive.omega}, {"crossings", x}}, provenance(c));
  write_manifest(ctx, "crossings", {"crossings.json"});
  std::ostringstream os;
  os << "crossings:";
  for (double v : x) os << " " << fixed(v, 4);
  log_line(ctx, os.str());
  return exit_success;
}

int cmd_plot(const CommandContext& ctx, const fs::path& input) {
  const fs::path dir = ctx.out_dir();
  fs::create_directories(dir);
  bool any = false;
  if (fs::exists(input / "sweep.csv")) {
    const CsvData d = read_csv(input / "sweep.csv");
    const std::vector<double> x = column_values(d, "Omega");
    std::vector<double> guides;
    for (double v : column_values(d, "nearest_crossing"))
      if (std::isfinite(v) && std::find(guides.begin(), guides.end(), v) == guides.end()) guides.push_back(v);
    const std::string body =
        svg_panel(0, 0, 720, 300, "Non-Markovianity N", x, {{"N", column_values(d, "N"), "#1f77b4"}},
                  flagged(d, "is_N_peak"), guides) +
        svg_panel(0, 300, 720, 300, "Relaxation time tau", x, {{"tau", column_values(d, "tau"), "#2ca02c"}},
                  flagged(d, "is_tau_peak"), guides);
    write_svg(dir / "sweep.svg", 720, 600, body);
    any = true;
  }
  if (fs::exists(input / "quasienergies.csv")) {
    const CsvData d = read_csv(input / "quasienergies.csv");
    const std::string body =
        svg_panel(0, 0, 720, 360, "Quasienergies", column_values(d, "Omega"),
                  {{"eps1", column_values(d, "eps1"), "#1f77b4"}, {"eps2", column_values(d, "eps2"), "#ff7f0e"}},
                  {}, {});
    write_svg(dir / "quasienergies.svg", 720, 360, body);
    any = true;
  }
  if (!any) throw ConfigError("no sweep.csv or quasienergies.csv in " + input.string());
  log_line(ctx, "wrote plots to " + dir.string());
  return exit_success;
}

namespace {

int default_jobs() {
  if (const char* env = std::getenv("FLOQMEM_JOBS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Open-system dynamics of a periodically driven qubit: HEOM, Floquet-Lindblad, non-Markovianity",
               "floqmem"};
  app.set_version_flag("--version", version());
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  int jobs = default_jobs();
  bool quiet = false;
  std::vector<std::string> overrides;
  auto* seed_opt = app.add_option("--seed", seed, "Master seed of the pair sampling");
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--jobs", jobs, "Worker threads (default: $FLOQMEM_JOBS or all cores)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Output directory");
  app.add_option("--set", overrides, "Override a configuration key: section.key=value");
  app.add_flag("--quiet", quiet, "Suppress progress messages");
  app.require_subcommand(1, 1);
  app.fallthrough();

  app.add_subcommand("quasienergies", "Quasienergies over the Omega range");
  app.add_subcommand("coefficients", "Fourier coefficients of the coupling operator");
  auto* evolve_cmd = app.add_subcommand("evolve", "Single trajectory with HEOM or Floquet-Lindblad");
  std::string solver, model, rho0;
  double t_end = 0.0;
  evolve_cmd->add_option("--solver", solver, "heom or lindblad")->check(CLI::IsMember({"heom", "lindblad"}));
  evolve_cmd->add_option("--model", model, "Lindblad model: generic, nondegenerate, degenerate, auto");
  evolve_cmd->add_option("--rho0", rho0, "Initial state: e, g, +x, -x, +y, -y or [x,y,z]");
  evolve_cmd->add_option("--t-end", t_end, "Final time")->check(CLI::PositiveNumber);
  app.add_subcommand("sweep", "Non-Markovianity and relaxation time over the Omega range");
  app.add_subcommand("crossings", "Quasienergy crossings in the Omega range");
  auto* plot_cmd = app.add_subcommand("plot", "SVG plots of sweep.csv and quasienergies.csv");
  std::string input;
  plot_cmd->add_option("--input", input, "Directory holding the CSVs (default: the output directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_success : exit_config_error;
  }

  try {
    json j = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      j = json::parse(in, nullptr, false);
      if (j.is_discarded()) throw ConfigError("malformed configuration " + config_path);
    }
    for (const auto& o : overrides) apply_override(j, o);
    if (*seed_opt) j["analysis"]["seed"] = seed;
    if (!out.empty()) j["output"]["directory"] = out;
    if (!solver.empty()) j["evolve"]["solver"] = solver;
    if (!model.empty()) j["evolve"]["model"] = model;
    if (!rho0.empty()) {
      const json parsed = json::parse(rho0, nullptr, false);
      j["evolve"]["rho0"] = parsed.is_array() ? parsed : json(rho0);
    }
    if (t_end > 0.0) j["evolve"]["t_end"] = t_end;

    CommandContext ctx{RunConfig::from_json(j), jobs, quiet ? nullptr : &std::cerr};
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "quasienergies") return cmd_quasienergies(ctx);
    if (name == "coefficients") return cmd_coefficients(ctx);
    if (name == "evolve") return cmd_evolve(ctx);
    if (name == "sweep") return cmd_sweep(ctx);
    if (name == "crossings") return cmd_crossings(ctx);
    return cmd_plot(ctx, input.empty() ? ctx.out_dir() : fs::path(input));
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << std::endl;
    return exit_config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return exit_config_error;
  }
}

}  // namespace floqmem
