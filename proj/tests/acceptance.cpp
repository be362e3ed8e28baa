// Acceptance gate: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails, unless it is listed with --known-failure.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "dpg/adaptivity.hpp"
#include "dpg/engine.hpp"
#include "dpg/ode1d.hpp"
#include "dpg/poisson2d.hpp"
#include "dpg/verify.hpp"

using namespace dpg;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Worst measured value among suite checks whose name starts with a prefix.
Outcome from_suite(const std::vector<verify::CheckResult>& suite, const std::vector<std::string>& prefixes) {
  bool pass = true;
  double worst = 0.0;
  std::size_t n = 0;
  for (const auto& c : suite)
    for (const auto& p : prefixes)
      if (c.name.rfind(p, 0) == 0) {
        ++n;
        pass = pass && c.pass;
        worst = std::max(worst, c.measured);
      }
  return {pass && n > 0, fmt("%.0f checks, worst %.3g", static_cast<double>(n), worst)};
}

Outcome convergence() {
  const auto s = poisson::convergence_study(1, 3, {4, 8, 16, 32}, poisson::sine_solution());
  double lo = 1e300, hi = 0.0;
  for (const auto& row : s.rows) {
    lo = std::min(lo, row.ratio);
    hi = std::max(hi, row.ratio);
  }
  const double slope = s.slope.value_or(0.0);
  const double drift = (hi - lo) / lo;
  const bool pass = std::abs(slope - 2.0) <= 0.15 && lo >= 0.8 && hi <= 1.3 && drift <= 0.15;
  return {pass, fmt("slope %.4f, ratio [%.4f, %.4f]", slope, lo, hi) + fmt(", drift %.3f", drift)};
}

Outcome infsup() {
  const ode1d::OneElemFormulation one(2, nullptr);
  const double beta1 = infsup_surrogate(assemble_normal(one), one.trial_norm_gram());
  std::vector<double> vals;
  for (std::size_t n : {4u, 8u, 16u, 32u}) {
    const poisson::PoissonFormulation f(1, 3, uniform_square_mesh(n), nullptr);
    vals.push_back(infsup_surrogate(assemble_normal(f), f.trial_norm_gram()));
  }
  const double mx = *std::max_element(vals.begin(), vals.end());
  const double mn = *std::min_element(vals.begin(), vals.end());
  const bool pass = std::abs(beta1 - 1.0) <= 0.02 && mn >= 0.5 * mx;
  return {pass, fmt("1D %.6f, 2D min %.4f max %.4f", beta1, mn, mx)};
}

Outcome adaptivity() {
  const auto run = [] { return adapt::adapt_loop(1, 3, adapt::peak_load(), uniform_square_mesh(2), 6); };
  const auto a = run();
  const auto b = run();
  bool conforming = true;
  for (const auto& rec : a) {
    try {
      rec.mesh.validate();
    } catch (const std::exception&) {
      conforming = false;
    }
  }
  bool deterministic = a.size() == b.size();
  for (std::size_t i = 0; deterministic && i < a.size(); ++i)
    deterministic = mesh_to_json(a[i].mesh) == mesh_to_json(b[i].mesh) && a[i].eta == b[i].eta;
  const double frac = a.back().near_origin_fraction;
  return {frac >= 0.5 && conforming && deterministic,
          fmt("near-origin fraction %.4f (need 0.5), %.0f elements", frac, static_cast<double>(a.back().mesh.num_triangles())) +
              (conforming ? ", conforming" : ", NOT conforming") + (deterministic ? ", deterministic" : ", NOT deterministic")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DPG acceptance criteria"};
  std::vector<int> known;
  app.add_option("--known-failure", known, "criterion allowed to fail without failing the run");
  CLI11_PARSE(app, argc, argv);

  std::vector<verify::CheckResult> suite;
  const auto suite_once = [&] {
    if (suite.empty()) suite = verify::run_suite();
  };

  struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "closed-form trial-to-test", 1, [] { const double e = verify::trial_to_test_error(); return Outcome{e <= 1e-10, fmt("max error %.3g", e)}; }},
      {2, "hybrid flux test functions", 1, [] { const double e = verify::flux_test_function_error(); return Outcome{e <= 1e-10, fmt("max error %.3g", e)}; }},
      {3, "PG equals L2 projection", 5, [&] { suite_once(); return from_suite(suite, {"PG solution equals"}); }},
      {4, "hybrid test-space containment", 5, [&] { return from_suite(suite, {"hybrid test space"}); }},
      {5, "mixed equals normal equations", 30, [&] { return from_suite(suite, {"mixed equals normal"}); }},
      {6, "orthogonality", 30, [&] { return from_suite(suite, {"Galerkin orthogonality", "residual orthogonal"}); }},
      {7, "2D convergence rate and estimator ratio", 120, convergence},
      {8, "inf-sup surrogate", 60, infsup},
      {9, "adaptive refinement near the origin", 60, adaptivity},
  };

  const std::set<int> allowed(known.begin(), known.end());
  int unexpected = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // Criterion 3 runs the shared suite; 4 to 6 read its results, so their
    // times are not separable and the suite time is charged to 3.
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    std::printf("%s %d %s: %s (%.2f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(), secs,
                in_time ? "" : " over budget");
    if (!pass && !allowed.count(c.id)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
