#include "dpg/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dpg/adaptivity.hpp"
#include "dpg/engine.hpp"
#include "dpg/errors.hpp"
#include "dpg/ode1d.hpp"
#include "dpg/poisson2d.hpp"
#include "dpg/verify.hpp"

namespace dpg::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr int kSamples = 201;

struct Config {
  std::vector<int> p;
  int r = -1;  // -1: derive from p
  std::vector<std::size_t> n;
  std::size_t m = 0;  // 0: no hybrid run
  double big_m = 40.0;
  std::size_t iters = 6;
  std::string out = "out";
  std::uint64_t seed = 1;
  std::string f = "default";
  bool inject = false;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Writes a CSV whose first line is `# ` followed by compact JSON metadata.
class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const Json& meta, const std::vector<std::string>& header) : os_(path) {
    if (!os_) throw std::runtime_error("cannot write " + path.string());
    os_ << "# " << meta.dump() << '\n';
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }

 private:
  std::ofstream os_;
};

void write_json(const fs::path& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text << '\n';
}

// -------------------------------------------------------------------------

int cmd_ode1d(Config cfg, std::ostream& out) {
  const bool defaults_p = cfg.p.empty();
  if (defaults_p) cfg.p = {2, 4, 8};
  for (int p : cfg.p)
    if (p < 1) throw InvalidArgument("ode1d: --p must be >= 1 (the least-squares variant needs it)");
  if (cfg.f != "default" && cfg.f != "zero") throw InvalidArgument("ode1d: --f must be 'default' or 'zero'");
  const bool zero = cfg.f == "zero";
  ode1d::Problem pr = ode1d::layer_solution(cfg.big_m);
  if (zero) pr = {[](double) { return 0.0; }, [](double) { return 0.0; }};

  const Mesh1D one = uniform_interval_mesh(1);
  struct Run {
    int p;
    std::unique_ptr<ode1d::OneElemFormulation> pg;
    std::unique_ptr<ode1d::NoIbpFormulation> lsq;
    std::unique_ptr<ode1d::Dpg1dFormulation> hyb;
    DpgSolution pg_sol, lsq_sol, hyb_sol;
    Vector proj;
  };
  std::vector<Run> runs;
  for (int p : cfg.p) {
    Run run{p, std::make_unique<ode1d::OneElemFormulation>(p, pr.f),
            std::make_unique<ode1d::NoIbpFormulation>(p, one, pr.f), nullptr, {}, {}, {}, {}};
    run.pg_sol = solve(assemble_normal(*run.pg));
    run.lsq_sol = solve(assemble_normal(*run.lsq));
    run.proj = ode1d::l2_projection(p, one, pr.u);
    if (cfg.m > 0) {
      run.hyb = std::make_unique<ode1d::Dpg1dFormulation>(p, uniform_interval_mesh(cfg.m), pr.f);
      run.hyb_sol = solve(assemble_normal(*run.hyb));
    }
    runs.push_back(std::move(run));
  }

  Json meta;
  meta["command"] = "ode1d";
  meta["M"] = cfg.big_m;
  meta["p"] = cfg.p;
  meta["p_is_default"] = defaults_p;
  meta["f"] = zero ? "zero" : "layer";
  meta["hybrid_m"] = cfg.m;
  meta["test_degree"] = "p+1";
  meta["defaults_note"] = "M = 40 and p = 2,4,8 are chosen defaults";
  Json residuals = Json::array();
  for (const auto& r : runs) residuals.push_back({{"p", r.p}, {"pg", r.pg_sol.solver_residual}, {"lsq", r.lsq_sol.solver_residual}});
  meta["solver_residuals"] = residuals;

  std::vector<std::string> header{"x", "exact"};
  for (const auto& r : runs) {
    const std::string s = std::to_string(r.p);
    header.insert(header.end(), {"pg_p" + s, "lsq_p" + s, "proj_p" + s});
    if (r.hyb) header.push_back("hybrid_p" + s);
  }
  CsvWriter csv(fs::path(cfg.out) / "ode1d_solutions.csv", meta, header);
  std::vector<double> pg_vs_proj(runs.size(), 0.0);
  for (int i = 0; i < kSamples; ++i) {
    const double x = i / static_cast<double>(kSamples - 1);
    std::vector<std::string> cells{num(x), num(pr.u(x))};
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const auto& r = runs[k];
      const double pg = r.pg->eval(r.pg_sol.x, x);
      const double proj = ode1d::eval_broken(r.p, one, r.proj, x);
      pg_vs_proj[k] = std::max(pg_vs_proj[k], std::abs(pg - proj));
      cells.insert(cells.end(), {num(pg), num(r.lsq->eval(r.lsq_sol.x, x)), num(proj)});
      if (r.hyb) cells.push_back(num(r.hyb->eval(r.hyb_sol.x, x)));
    }
    csv.row(cells);
  }

  if (cfg.m > 0) {
    CsvWriter flux(fs::path(cfg.out) / "ode1d_fluxes.csv", meta, {"p", "i", "x_i", "u_hat", "exact"});
    for (const auto& r : runs)
      for (std::size_t i = 1; i <= cfg.m; ++i) {
        const double xi = r.hyb->mesh().vertices()[i];
        flux.row({std::to_string(r.p), std::to_string(i), num(xi), num(r.hyb_sol.x[r.hyb->flux_dof(i)]), num(pr.u(xi))});
      }
  }

  Json metrics;
  metrics["metadata"] = meta;
  Json errs = Json::array();
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& r = runs[k];
    Json e;
    e["p"] = r.p;
    e["l2_error_pg"] = ode1d::l2_error(pr.u, [&](double x) { return r.pg->eval(r.pg_sol.x, x); }, one);
    e["l2_error_lsq"] = ode1d::l2_error(pr.u, [&](double x) { return r.lsq->eval(r.lsq_sol.x, x); }, one);
    e["l2_error_proj"] = ode1d::l2_error(pr.u, [&](double x) { return ode1d::eval_broken(r.p, one, r.proj, x); }, one);
    if (r.hyb) {
      e["l2_error_hybrid"] =
          ode1d::l2_error(pr.u, [&](double x) { return r.hyb->eval(r.hyb_sol.x, x); }, r.hyb->mesh());
      e["eta_hybrid"] = r.hyb_sol.eta;
    }
    e["u1_hat_pg"] = r.pg_sol.x.back();
    e["max_sample_diff_pg_proj"] = pg_vs_proj[k];
    errs.push_back(e);
  }
  metrics["errors"] = errs;
  write_json(fs::path(cfg.out) / "ode1d_metrics.json", metrics);
  out << "ode1d: wrote ode1d_solutions.csv and ode1d_metrics.json to " << cfg.out << '\n';
  return kOk;
}

int cmd_poisson_converge(Config cfg, std::ostream& out) {
  const int p = cfg.p.empty() ? 1 : cfg.p.front();
  if (cfg.p.size() > 1) throw InvalidArgument("poisson-converge: give a single --p");
  const int r = cfg.r < 0 ? p + 2 : cfg.r;
  if (cfg.n.empty()) cfg.n = {4, 8, 16, 32};
  const poisson::Manufactured mf = poisson::sine_solution();
  const poisson::ConvergenceStudy study = poisson::convergence_study(p, r, cfg.n, mf);
  const poisson::PoissonFormulation probe(p, r, uniform_square_mesh(1), nullptr);

  Json meta;
  meta["command"] = "poisson-converge";
  meta["p"] = p;
  meta["r"] = r;
  meta["case"] = mf.name;
  meta["error_norm"] = "full H1";
  meta["quadrature"] = {{"matrix", probe.matrix_quadrature_degree()},
                        {"load", probe.load_quadrature_degree()},
                        {"error", std::min(2 * (p + 1) + 4, 30)}};
  Json residuals = Json::array();
  for (const auto& row : study.rows) residuals.push_back(row.solver_residual);
  meta["solver_residuals"] = residuals;

  CsvWriter csv(fs::path(cfg.out) / "convergence.csv", meta, {"n", "h_over_sqrt2", "h1_error", "estimator", "ratio"});
  for (const auto& row : study.rows)
    csv.row({std::to_string(row.n), num(row.h_over_sqrt2), num(row.h1_error), num(row.estimator), num(row.ratio)});

  Json rates;
  rates["metadata"] = meta;
  rates["slope"] = study.slope ? Json(*study.slope) : Json(nullptr);
  write_json(fs::path(cfg.out) / "rates.json", rates);
  out << "poisson-converge: " << study.rows.size() << " rows";
  if (study.slope) out << ", slope " << *study.slope;
  out << '\n';
  return kOk;
}

int cmd_poisson_adapt(Config cfg, std::ostream& out) {
  const int p = cfg.p.empty() ? 1 : cfg.p.front();
  if (cfg.p.size() > 1) throw InvalidArgument("poisson-adapt: give a single --p");
  const int r = cfg.r < 0 ? p + 2 : cfg.r;
  const std::size_t n = cfg.n.empty() ? 2 : cfg.n.front();
  if (cfg.iters < 1) throw InvalidArgument("poisson-adapt: --iters must be >= 1");
  const auto history = adapt::adapt_loop(p, r, adapt::peak_load(), uniform_square_mesh(n), cfg.iters);

  Json meta;
  meta["command"] = "poisson-adapt";
  meta["p"] = p;
  meta["r"] = r;
  meta["n0"] = n;
  meta["iterations"] = cfg.iters;
  meta["f"] = "exp(-100(x^2+y^2))";
  meta["marking"] = "top half by count, ties to smaller id, before closure";
  meta["near_origin_radius"] = 0.25;

  CsvWriter summary(fs::path(cfg.out) / "adapt_summary.csv", meta, {"iter", "n_elem", "eta", "near_origin_fraction"});
  for (const auto& rec : history) {
    write_text(fs::path(cfg.out) / ("mesh_iter" + std::to_string(rec.iter) + ".json"), mesh_to_json(rec.mesh));
    Json imeta = meta;
    imeta["iter"] = rec.iter;
    imeta["solver_residual"] = rec.solver_residual;
    CsvWriter ind(fs::path(cfg.out) / ("indicators_iter" + std::to_string(rec.iter) + ".csv"), imeta,
                  {"element", "cx", "cy", "eta"});
    for (std::size_t t = 0; t < rec.mesh.num_triangles(); ++t) {
      const Point2 c = rec.mesh.centroid(t);
      ind.row({std::to_string(t), num(c[0]), num(c[1]), num(rec.eta_k[t])});
    }
    summary.row({std::to_string(rec.iter), std::to_string(rec.mesh.num_triangles()), num(rec.eta),
                 num(rec.near_origin_fraction)});
  }
  out << "poisson-adapt: " << history.size() << " meshes, final near-origin fraction "
      << history.back().near_origin_fraction << '\n';
  return kOk;
}

int cmd_verify(const Config& cfg, std::ostream& out) {
  verify::Options opts;
  opts.seed = cfg.seed;
  opts.inject_flux_sign_error = cfg.inject;
  bool all = true;
  for (const auto& c : verify::run_suite(opts)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e (tol %.0e)", c.measured, c.tolerance);
    out << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << buf << '\n';
    all = all && c.pass;
  }
  return all ? kOk : kVerifyFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"DPG experiments: 1D ODE, 2D Poisson convergence and adaptivity"};
  app.require_subcommand(1);
  Config cfg;

  auto add_common = [&](CLI::App* sub) { sub->add_option("--out", cfg.out, "output directory")->capture_default_str(); };
  auto* ode = app.add_subcommand("ode1d", "one-element PG, least squares and L2 projection for u' = f");
  add_common(ode);
  ode->add_option("--p", cfg.p, "trial degree (repeatable, default 2 4 8)");
  ode->add_option("--big-m", cfg.big_m, "layer steepness M")->capture_default_str()->check(CLI::PositiveNumber);
  ode->add_option("--m", cfg.m, "also run the hybrid method on m elements");
  ode->add_option("--f", cfg.f, "'default' (layer) or 'zero'");

  auto* conv = app.add_subcommand("poisson-converge", "uniform-refinement study, manufactured sine solution");
  add_common(conv);
  conv->add_option("--p", cfg.p, "flux degree (field degree p+1), default 1");
  conv->add_option("--r", cfg.r, "test degree, default p+2");
  conv->add_option("--n", cfg.n, "mesh sizes (repeatable, default 4 8 16 32)");

  auto* adapt = app.add_subcommand("poisson-adapt", "adaptive loop for f = exp(-100(x^2+y^2))");
  add_common(adapt);
  adapt->add_option("--p", cfg.p, "flux degree, default 1");
  adapt->add_option("--r", cfg.r, "test degree, default p+2");
  adapt->add_option("--n", cfg.n, "initial mesh size, default 2");
  adapt->add_option("--iters", cfg.iters, "iterations")->capture_default_str();

  auto* ver = app.add_subcommand("verify", "oracle and property checks");
  ver->add_option("--seed", cfg.seed, "seed for random-vector properties")->capture_default_str();
  ver->add_flag("--inject-flux-sign-error", cfg.inject)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    app.exit(e, o, er);
    err << er.str() << o.str();
    return e.get_exit_code() == 0 ? kOk : kUsage;
  }

  try {
    if (*ver) return cmd_verify(cfg, out);
    fs::create_directories(cfg.out);
    if (*ode) return cmd_ode1d(cfg, out);
    if (*conv) return cmd_poisson_converge(cfg, out);
    if (*adapt) return cmd_poisson_adapt(cfg, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DegreeTooLow& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DegreeViolation& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  }
  return kUsage;
}

}  // namespace dpg::cli
