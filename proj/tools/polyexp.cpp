// polyexp command-line tool: basis export, differentiation of CSV data and the
// experiment suite. Exit codes: 0 success, 2 usage or input error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "polyexp/polyexp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polyexp;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  if (out.empty()) throw ArgumentError("empty list '" + s + "'");
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw ArgumentError("invalid " + what + " '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty() || s.front() == '-') throw ArgumentError("invalid " + what + " '" + s + "'");
  return v;
}

int parse_int(const std::string& s, const std::string& what) {
  const std::uint64_t v = parse_u64(s, what);
  if (v > 10000) throw ArgumentError(what + " '" + s + "' is too large");
  return static_cast<int>(v);
}

fs::path manifest_path(const fs::path& output) {
  fs::path p = output;
  p += ".manifest.json";
  return p;
}

std::string command_line(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

json cutoff_json(const CutoffReport& r) {
  json c = json::array();
  for (auto [n, res] : r.candidates) c.push_back({{"N", n}, {"residual_sup", res}});
  return {{"chosen_N", r.chosen_N}, {"threshold", r.threshold}, {"adaptive", r.adaptive}, {"candidates", c}};
}

json parameters_json(const ParameterRecord& p) {
  json j = json::object();
  if (!p.cutoffs.empty()) j["cutoffs"] = p.cutoffs;
  if (p.gamma) j["gamma"] = *p.gamma;
  if (p.gamma_second) j["gamma_second"] = *p.gamma_second;
  if (p.spline_step) j["spline_step"] = *p.spline_step;
  return j;
}

std::string lcurve_csv(const TikhonovScan& s) {
  std::string out = "gamma,l,curvature\n";
  for (std::size_t k = 0; k < s.gamma_grid.size(); ++k)
    out += format_double(s.gamma_grid[k]) + "," + format_double(s.l_values[k]) + "," +
           format_double(k < s.corner.curvature.size() ? s.corner.curvature[k] : 0.0) + "\n";
  return out;
}

// ---------------------------------------------------------------- basis

struct BasisArgs {
  double R = 3.0;
  int n = 25;
  int digits = Precision::kDefaultDigits;
  std::size_t check_points = 0;
  std::string output = "basis.json";
};

int cmd_basis(const BasisArgs& a, const std::string& cmd) {
  RunManifest m(cmd);
  m.parameters() = {{"R", a.R}, {"N_max", a.n}, {"digits", a.digits}, {"check_points", a.check_points}};
  BasisSpec spec;
  m.add_timing("construction", timed([&] { spec = build_basis(a.R, a.n, Precision{a.digits}); }));
  json j = basis_to_json(spec);
  if (a.check_points > 0) {
    double q = 0.0;
    m.add_timing("quadrature_check", timed([&] { q = quadrature_orthonormality_defect(spec, a.n, a.check_points); }));
    j["quadrature_defect"] = q;
    j["quadrature_points"] = a.check_points;
    m.results()["quadrature_defect"] = q;
  }
  m.results()["orthonormality_defect"] = spec.orthonormality_defect();
  const fs::path out(a.output);
  write_text_atomic(out, j.dump(2) + "\n");
  m.add_output(out);
  m.write(manifest_path(out));
  std::cout << "basis R=" << a.R << " N=" << a.n << " defect " << spec.orthonormality_defect() << " -> " << out.string()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------- differentiate

struct DiffArgs {
  std::string input;
  int dim = 1;
  std::string order;
  std::string cutoff = "auto";
  std::string method = "polyexp";
  std::string column = "f";
  std::optional<double> threshold;
  int digits = Precision::kDefaultDigits;
  std::string output = "derivative.csv";
};

std::vector<Derivative> parse_orders(const std::string& spec, int dim) {
  std::vector<Derivative> out;
  for (const auto& t : split_list(spec)) {
    if (dim == 1) {
      if (t == "1" || t == "d1") out.push_back(Derivative::dx);
      else if (t == "2" || t == "d2") out.push_back(Derivative::dxx);
      else throw ArgumentError("1D order must be 1 or 2, got '" + t + "'");
    } else {
      if (t == "dx") out.push_back(Derivative::dx);
      else if (t == "dy") out.push_back(Derivative::dy);
      else if (t == "dxx") out.push_back(Derivative::dxx);
      else if (t == "dyy") out.push_back(Derivative::dyy);
      else if (t == "dxy") out.push_back(Derivative::dxy);
      else if (t == "grad" || t == "grad_mag" || t == "1") out.push_back(Derivative::grad_mag);
      else if (t == "laplacian" || t == "lap" || t == "2") out.push_back(Derivative::laplacian);
      else throw ArgumentError("unknown 2D derivative '" + t + "'");
    }
  }
  return out;
}

std::string column_2d(Derivative d) {
  switch (d) {
    case Derivative::dx: return "dx";
    case Derivative::dxx: return "dxx";
    default: return column_name(d);
  }
}

int cmd_differentiate(const DiffArgs& a, const std::string& cmd) {
  if (a.dim != 1 && a.dim != 2) throw ArgumentError("--dim must be 1 or 2");
  const Method method = parse_method(a.method);
  const std::vector<Derivative> orders =
      parse_orders(a.order.empty() ? (a.dim == 1 ? "1,2" : "grad_mag,laplacian") : a.order, a.dim);
  std::vector<int> cutoffs;
  if (a.cutoff != "auto") {
    for (const auto& t : split_list(a.cutoff)) cutoffs.push_back(parse_int(t, "cut-off"));
    if (cutoffs.size() > static_cast<std::size_t>(a.dim)) throw ArgumentError("too many cut-offs for --dim");
  }
  const Precision precision{a.digits};
  precision.validate();

  RunManifest m(cmd);
  const fs::path in(a.input), out(a.output);
  m.add_input(in);
  json params = {{"dim", a.dim}, {"method", to_string(method)}, {"cutoff", a.cutoff}, {"column", a.column},
                 {"digits", a.digits}};
  json orders_json = json::array();

  if (a.dim == 1) {
    SampledFunction1D f = read_csv_1d(in, a.column);
    params["R"] = f.grid().R();
    params["points"] = f.grid().size();
    if (a.threshold) params["threshold"] = *a.threshold;
    RunOptions opt;
    opt.precision = precision;
    opt.threshold = a.threshold;
    if (!cutoffs.empty()) opt.cutoffs = cutoffs;
    std::optional<DerivativePair1D> result;
    m.add_timing("differentiate", timed([&] { result.emplace(differentiate_1d(f, method, opt)); }));
    const DerivativePair1D& d = *result;
    std::vector<Column1D> cols;
    for (Derivative o : orders) {
      cols.emplace_back(column_name(o), o == Derivative::dx ? d.first.samples.values() : d.second.samples.values());
      orders_json.push_back(column_name(o));
    }
    write_csv_1d(out, f.grid(), cols);
    m.results()["parameters"] = parameters_json(d.second.parameters);
    if (d.cutoff) m.results()["cutoff_report"] = cutoff_json(*d.cutoff);
    if (d.first_scan) {
      m.results()["gamma_first"] = d.first_scan->chosen_gamma;
      m.results()["gamma_second"] = d.second_scan->chosen_gamma;
    }
  } else {
    if (method != Method::polyexp) throw ArgumentError("2D differentiation supports only the polyexp method");
    SampledField2D f = read_csv_2d(in, a.column);
    const Grid2D& grid = f.grid();
    params["R"] = grid.R();
    params["points"] = grid.size();
    int hi = CutoffRange{}.hi;
    for (int c : cutoffs) hi = std::max(hi, c);
    std::vector<Column2D> cols;
    m.add_timing("differentiate", timed([&] {
                   const BasisPtr basis = cached_basis(grid.R(), hi, precision);
                   int N1 = 0, N2 = 0;
                   if (cutoffs.empty() && sup_norm(f) == 0.0) {
                     N1 = N2 = CutoffRange{}.lo;
                   } else if (cutoffs.empty()) {
                     const CutoffReport2D r = select_cutoff_2d(f, basis, {}, a.threshold);
                     N1 = r.N1;
                     N2 = r.N2;
                     m.results()["cutoff_report"] = {{"N1", r.N1},
                                                     {"N2", r.N2},
                                                     {"joint_residual", r.joint_residual},
                                                     {"x_scan", cutoff_json(r.x)},
                                                     {"y_scan", cutoff_json(r.y)}};
                   } else {
                     N1 = cutoffs.front();
                     N2 = cutoffs.size() > 1 ? cutoffs[1] : N1;
                   }
                   m.results()["parameters"] = {{"cutoffs", {N1, N2}}};
                   const SpectralCoeffs2D c = project_2d(f, basis, N1, N2);
                   for (Derivative o : orders) cols.emplace_back(column_2d(o), derivative_2d(c, grid, o).samples.values());
                 }));
    for (const auto& c : cols) orders_json.push_back(c.first);
    write_csv_2d(out, grid, cols);
  }
  params["orders"] = orders_json;
  m.parameters() = params;
  m.add_output(out);
  m.write(manifest_path(out));
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- experiment

struct ExperimentArgs {
  std::string test;
  std::string deltas = "0.05,0.1,0.2";
  std::string seeds;
  std::string methods = "polyexp";
  std::string cutoff = "auto";
  bool published_cutoffs = false;
  bool emit_lcurve = false;
  bool no_fields = false;
  std::size_t points = 0;
  std::string output = "results";
};

std::vector<std::uint64_t> resolve_seeds(const std::string& flag) {
  std::vector<std::uint64_t> out;
  if (!flag.empty()) {
    for (const auto& t : split_list(flag)) out.push_back(parse_u64(t, "seed"));
    return out;
  }
  if (const char* env = std::getenv("POLYEXP_SEED"); env && *env) return {parse_u64(env, "POLYEXP_SEED")};
  return {1, 2, 3, 4, 5};
}

std::string delta_tag(double d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", d);
  return buf;
}

const char* kPlotScript = R"py(#!/usr/bin/env python3
"""Plots the CSV files written by `polyexp experiment` in this directory."""
import csv
import glob
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))


def read(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) for r in rows] for k in rows[0]} if rows else {}


for path in sorted(glob.glob(os.path.join(here, "error_curves_*.csv"))):
    d = read(path)
    fig, ax = plt.subplots(figsize=(7, 4))
    for key, label in [("err_trig", "trig"), ("err_tik", "Tikhonov"), ("err_cub", "cubic spline"), ("err_comp", "polyexp")]:
        ax.semilogy(d["x"], [max(v, 1e-16) for v in d[key]], label=label, lw=0.8)
    ax.set_xlabel("x")
    ax.set_ylabel("relative pointwise error of f'")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path[:-4] + ".png", dpi=150)
    plt.close(fig)

for path in sorted(glob.glob(os.path.join(here, "lcurve_*.csv"))):
    d = read(path)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(d["gamma"], d["l"], "o-", ms=3)
    ax.set_xlabel("gamma")
    ax.set_ylabel("l(gamma)")
    fig.tight_layout()
    fig.savefig(path[:-4] + ".png", dpi=150)
    plt.close(fig)

for path in sorted(glob.glob(os.path.join(here, "error_field_*.csv"))):
    d = read(path)
    xs = sorted(set(d["x"]))
    n = len(xs)
    z = [d["error"][i * n:(i + 1) * n] for i in range(n)]
    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(list(map(list, zip(*z))), origin="lower", extent=[xs[0], xs[-1], xs[0], xs[-1]])
    fig.colorbar(im, ax=ax)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    fig.savefig(path[:-4] + ".png", dpi=150)
    plt.close(fig)

sys.exit(0)
)py";

int cmd_experiment(const ExperimentArgs& a, const std::string& cmd) {
  const TestId test = parse_test_id(a.test);
  const TestCase tc = test_case(test);
  std::vector<double> deltas;
  for (const auto& t : split_list(a.deltas)) {
    const double d = parse_double(t, "noise level");
    NoiseConfig{d, 0}.validate();
    deltas.push_back(d);
  }
  const std::vector<std::uint64_t> seeds = resolve_seeds(a.seeds);
  std::vector<Method> methods;
  if (a.methods == "all") {
    methods = tc.dimension == 1 ? std::vector<Method>{Method::polyexp, Method::trig, Method::tikhonov, Method::spline}
                                : std::vector<Method>{Method::polyexp};
  } else {
    std::set<Method> seen;
    for (const auto& t : split_list(a.methods)) {
      const Method m = parse_method(t);
      if (seen.insert(m).second) methods.push_back(m);
    }
  }
  if (tc.dimension == 2)
    for (Method m : methods)
      if (m != Method::polyexp) throw ArgumentError("2D tests support only the polyexp method");
  if (a.emit_lcurve && tc.dimension != 1) throw ArgumentError("--emit-lcurve needs a 1D test");

  RunOptions opt;
  opt.published_cutoffs = a.published_cutoffs;
  if (a.cutoff != "auto") {
    std::vector<int> c;
    for (const auto& t : split_list(a.cutoff)) c.push_back(parse_int(t, "cut-off"));
    opt.cutoffs = c;
  }
  if (a.points) {
    if (a.points < 3) throw ArgumentError("--points must be at least 3");
    (tc.dimension == 1 ? opt.points_1d : opt.points_2d) = a.points;
  }

  const fs::path dir(a.output);
  fs::create_directories(dir);
  RunManifest m(cmd);
  m.parameters() = {{"test", to_string(test)},
                    {"deltas", deltas},
                    {"seeds", seeds},
                    {"R", opt.R},
                    {"points", tc.dimension == 1 ? opt.points_1d : opt.points_2d},
                    {"cutoff", a.cutoff},
                    {"published_cutoffs", a.published_cutoffs},
                    {"spline_stride", opt.spline_stride},
                    {"gamma_grid", opt.gammas},
                    {"trig_range", {opt.trig_range.lo, opt.trig_range.hi}}};
  json methods_json = json::array();
  for (Method mm : methods) methods_json.push_back(to_string(mm));
  m.parameters()["methods"] = methods_json;

  std::vector<ErrorReport> runs;
  std::string runs_csv = "test,delta,seed,method,derivative,domain,error,parameters,seconds\n";
  json runs_json = json::array();
  for (double delta : deltas)
    for (Method mm : methods)
      for (std::uint64_t seed : seeds) {
        ErrorReport r = run_test(test, delta, seed, mm, opt);
        m.add_timing("run_" + to_string(mm), r.seconds);
        json p = parameters_json(r.parameters);
        for (const auto& e : r.entries)
          for (bool interior : {false, true})
            runs_csv += to_string(test) + "," + format_double(delta) + "," + std::to_string(seed) + "," + to_string(mm) +
                        "," + column_name(e.which) + "," + (interior ? "interior" : "full") + "," +
                        format_double(interior ? e.interior : e.full) + ",\"" + p.dump() + "\"," +
                        format_double(r.seconds) + "\n";
        json entry = {{"delta", delta}, {"seed", seed}, {"method", to_string(mm)}, {"parameters", p}};
        for (const auto& e : r.entries)
          entry["errors"][column_name(e.which)] = {{"full", e.full}, {"interior", e.interior}};
        if (r.cutoff) entry["cutoff_report"] = cutoff_json(*r.cutoff);
        if (r.cutoff_2d) entry["cutoffs"] = {r.cutoff_2d->N1, r.cutoff_2d->N2};
        runs_json.push_back(std::move(entry));
        runs.push_back(std::move(r));
      }
  auto emit = [&](const fs::path& p, const std::string& content) {
    write_text_atomic(p, content);
    m.add_output(p);
  };
  emit(dir / "runs.csv", runs_csv);

  json tables = json::object();
  const std::vector<int> table_ids =
      tc.dimension == 2 ? std::vector<int>{static_cast<int>(test)}
                        : std::vector<int>{static_cast<int>(test), 6, 7};
  for (int t : table_ids) {
    const std::vector<TableCell> cells = tabulate(t, runs);
    if (cells.empty()) continue;
    std::string csv = "table,test,delta,method,derivative,domain,mean,min,max,runs,reference\n";
    json jt = json::array();
    for (const auto& c : cells) {
      if (c.test != test) continue;
      csv += std::to_string(t) + "," + to_string(c.test) + "," + format_double(c.delta) + "," + to_string(c.method) +
             "," + column_name(c.which) + "," + (c.interior ? "interior" : "full") + "," + format_double(c.mean) + "," +
             format_double(c.min) + "," + format_double(c.max) + "," + std::to_string(c.runs) + "," +
             (c.reference ? format_double(*c.reference) : std::string()) + "\n";
      jt.push_back({{"delta", c.delta},
                    {"method", to_string(c.method)},
                    {"derivative", column_name(c.which)},
                    {"domain", c.interior ? "interior" : "full"},
                    {"mean", c.mean},
                    {"min", c.min},
                    {"max", c.max},
                    {"runs", c.runs},
                    {"reference", c.reference ? json(*c.reference) : json(nullptr)}});
    }
    emit(dir / ("table" + std::to_string(t) + ".csv"), csv);
    tables["table" + std::to_string(t)] = jt;
  }

  const std::uint64_t first_seed = seeds.front();
  if (tc.dimension == 1 && methods.size() == 4) {
    for (double delta : deltas) {
      const auto curves = error_curves(test, delta, first_seed, opt);
      const Grid1D grid(opt.R, opt.points_1d);
      emit(dir / ("error_curves_delta" + delta_tag(delta) + "_seed" + std::to_string(first_seed) + ".csv"),
           csv_1d(grid, {{"err_trig", curves.at(Method::trig).values()},
                         {"err_tik", curves.at(Method::tikhonov).values()},
                         {"err_cub", curves.at(Method::spline).values()},
                         {"err_comp", curves.at(Method::polyexp).values()}}));
    }
  }
  if (tc.dimension == 2 && !a.no_fields) {
    for (double delta : deltas)
      for (Derivative d : {Derivative::grad_mag, Derivative::laplacian}) {
        const SampledField2D e = error_field_2d(test, delta, first_seed, d, opt);
        emit(dir / ("error_field_" + column_name(d) + "_delta" + delta_tag(delta) + "_seed" +
                    std::to_string(first_seed) + ".csv"),
             csv_2d(e.grid(), {{"error", e.values()}}));
      }
  }
  if (a.emit_lcurve) {
    const Grid1D grid(opt.R, opt.points_1d);
    for (double delta : deltas) {
      const SampledFunction1D f = apply_noise(SampledFunction1D::sample(grid, tc.f1), {delta, first_seed});
      const TikhonovDerivatives t = tikhonov_derivatives(f, opt.gammas);
      const std::string stem = "lcurve_delta" + delta_tag(delta) + "_seed" + std::to_string(first_seed);
      emit(dir / (stem + "_stage1.csv"), lcurve_csv(t.first_scan));
      emit(dir / (stem + "_stage2.csv"), lcurve_csv(t.second_scan));
    }
  }

  emit(dir / "plot.py", kPlotScript);
  emit(dir / "summary.json", json{{"test", to_string(test)}, {"tables", tables}, {"runs", runs_json}}.dump(2) + "\n");
  m.write(dir / "manifest.json");
  std::cout << "wrote " << runs.size() << " runs to " << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral numerical differentiation with exponentially weighted orthonormal polynomials"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  BasisArgs ba;
  auto* basis = app.add_subcommand("basis", "build Psi_1..Psi_n on (-R, R) and export it as JSON");
  basis->add_option("--R", ba.R, "half-width of the interval")->required();
  basis->add_option("--n", ba.n, "number of basis functions")->required();
  basis->add_option("--digits", ba.digits, "construction precision (50 or 100)");
  basis->add_option("--check-points", ba.check_points, "also measure the trapezoid Gram defect on this many nodes");
  basis->add_option("-o,--output", ba.output, "output JSON path");

  DiffArgs da;
  auto* diff = app.add_subcommand("differentiate", "differentiate sampled data from a CSV file");
  diff->add_option("input", da.input, "CSV with x,f (1D) or x,y,f (2D)")->required();
  diff->add_option("--dim", da.dim, "1 or 2");
  diff->add_option("--order", da.order, "1D: 1,2; 2D: dx,dy,dxx,dyy,dxy,grad_mag,laplacian");
  diff->add_option("--cutoff", da.cutoff, "auto, N, or N1,N2");
  diff->add_option("--method", da.method, "polyexp, trig, tikhonov or spline");
  diff->add_option("--column", da.column, "value column name");
  diff->add_option("--threshold", da.threshold, "fixed cut-off threshold instead of the adaptive rule");
  diff->add_option("--digits", da.digits, "basis construction precision (50 or 100)");
  diff->add_option("-o,--output", da.output, "output CSV path");

  ExperimentArgs ea;
  auto* exp = app.add_subcommand("experiment", "run a test problem over noise levels, seeds and methods");
  exp->add_option("--test", ea.test, "1, 2, 3 or 4")->required();
  exp->add_option("--delta", ea.deltas, "comma-separated noise levels");
  exp->add_option("--seeds", ea.seeds, "comma-separated seeds (default POLYEXP_SEED, else 1..5)");
  exp->add_option("--methods", ea.methods, "comma-separated methods or all");
  exp->add_option("--cutoff", ea.cutoff, "auto, N, or N1,N2");
  exp->add_flag("--published-cutoffs", ea.published_cutoffs, "use the published cut-offs of each test");
  exp->add_flag("--emit-lcurve", ea.emit_lcurve, "write Tikhonov L-curve data");
  exp->add_flag("--no-fields", ea.no_fields, "skip the 2D error-field files");
  exp->add_option("--points", ea.points, "grid points per axis");
  exp->add_option("-o,--output", ea.output, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::string cmd = command_line(argc, argv);
  try {
    if (*basis) return cmd_basis(ba, cmd);
    if (*diff) return cmd_differentiate(da, cmd);
    if (*exp) return cmd_experiment(ea, cmd);
  } catch (const ConstructionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
