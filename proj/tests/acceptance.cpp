// Acceptance suite: one numbered criterion per line, PASS or FAIL with the
// measured quantities. Run with no arguments for the whole suite or with a
// single selector (1..10, figure) for one criterion. Exit code is the number
// of failed criteria.

#include "fkdv/sweep.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace fkdv;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  double time_budget_s;  // 0: no budget
  std::function<Outcome()> body;
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// ---- 1: closed-form checkpoints of the critical power ---------------------

Outcome criterion_closed_form() {
  Outcome out;
  const double p2 = critical_power(2.0);
  const double p1 = critical_power(1.0);
  const auto m = critical_power_max<double>();
  const bool exact_ok = std::abs(p2 - 2.0) <= 1e-14 && std::abs(p1 - 1.0) <= 1e-14;
  const bool alpha_ok = std::abs(m.alpha_star - 2.7486) <= 1e-3;
  const bool pmax_ok = std::abs(m.p_max - 2.19) <= 1e-2;
  out.passed = exact_ok && alpha_ok && pmax_ok;
  out.detail = "p*(2) = " + fmt("%.16g", p2) + ", p*(1) = " + fmt("%.16g", p1) +
               ", alpha* = " + fmt("%.6f", m.alpha_star) + ", p_max = " + fmt("%.6f", m.p_max) +
               (pmax_ok ? "" : " (expected 2.19 +- 0.01)");
  return out;
}

// ---- 2: Gamma vanishes along the p*(alpha) curve ---------------------------

Outcome criterion_gamma_root() {
  Outcome out;
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const double alpha = 1.05 + (8.0 - 1.05) * double(i) / 49.0;
    const double p = critical_power(alpha);
    const double scale =
        (p + 1.0) * alpha * std::pow(1.0 + alpha, 4.0) / (2.0 * (std::pow(2.0, alpha) - 1.0));
    worst = std::max(worst, std::abs(gamma_coefficient(alpha, p) / scale));
  }
  out.passed = worst <= 1e-10;
  out.detail = "max |Gamma/scale| over 50 alpha = " + fmt("%.3e", worst);
  return out;
}

// ---- 3: constant-state spectrum equals the dispersion relation ------------

Outcome criterion_constant_spectrum() {
  Outcome out;
  const Index N = 32;
  double worst = 0;
  for (ModelParams<double> prm : {ModelParams<double>{2, 1}, ModelParams<double>{1, 2},
                                  ModelParams<double>{3, 2}}) {
    const auto w = solve_wave(prm, 0.0, 0.0);
    for (double xi : {0.0, 0.1, 0.25, 0.49}) {
      const auto slice = slice_spectrum(assemble_bloch(w, xi, N));
      VectorXc<double> exact(slice.eigenvalues.size());
      for (Index n = 0; n < exact.size(); ++n)
        exact(n) = std::complex<double>(0.0, dispersion_omega(prm, double(n) - double(N) + xi));
      worst = std::max(worst, detail::spectrum_defect<double>(slice.eigenvalues, exact));
    }
  }
  out.passed = worst <= 1e-9;
  out.detail = "max eigenvalue defect = " + fmt("%.3e", worst);
  return out;
}

// ---- 4: convergence to the small-amplitude expansion -----------------------

Outcome criterion_expansion_orders() {
  Outcome out;
  double worst_profile = 100, worst_kappa = 100;
  for (ModelParams<double> prm : {ModelParams<double>{2, 1}, ModelParams<double>{2, 2},
                                  ModelParams<double>{1.5, 1}}) {
    const auto rep = validate_expansions(prm, {0.02, 0.04, 0.08}, SolveOptions<double>{});
    worst_profile = std::min(worst_profile, rep.profile_order);
    worst_kappa = std::min(worst_kappa, rep.kappa_order);
  }
  out.passed = worst_profile >= 2.9 && worst_kappa >= 3.9;
  out.detail = "min fitted orders: profile = " + fmt("%.3f", worst_profile) +
               ", wavenumber = " + fmt("%.3f", worst_kappa);
  return out;
}

// ---- 5: multi-period torus spectrum tiles into Bloch slices ----------------

Outcome criterion_block_oracle() {
  Outcome out;
  const auto w = solve_wave(ModelParams<double>{2.0, 2.0}, 0.05, 0.0);
  double worst = 0;
  for (int n : {2, 3}) worst = std::max(worst, block_oracle(w, n, 24).hausdorff);
  out.passed = worst <= 1e-7;
  out.detail = "max Hausdorff distance = " + fmt("%.3e", worst);
  return out;
}

// ---- 6: stability classification across the p*(alpha) boundary ------------

Outcome criterion_classification() {
  Outcome out;
  struct Case {
    double alpha, p;
    bool stable;
  };
  const std::vector<Case> cases = {
      {2.0, 1.0, true},  {3.0, 2.0, true},  {2.0, 1.5, true}, {0.8, 1.0, false},
      {2.0, 3.0, false}, {5.0, 2.0, false}, {1.0, 2.0, false},
  };
  out.passed = true;
  std::string bad;
  for (const auto& c : cases) {
    if (c.stable != (c.p < critical_power(c.alpha))) {
      out.passed = false;
      bad += " (" + fmt("%g", c.alpha) + "," + fmt("%g", c.p) + ") expectation inconsistent;";
      continue;
    }
    SolveOptions<double> opts;
    opts.n_modes = 24;
    const auto w = solve_wave(ModelParams<double>{c.alpha, c.p}, 0.05, 0.0, opts);
    const auto v = stability_sweep(w, make_xi_grid<double>(48), 24, {}, 1);
    const bool ok = c.stable ? (v.classification == Stability::Stable && v.growth_rate <= 1e-7)
                             : (v.classification == Stability::Unstable && v.growth_rate >= 1e-4);
    if (!ok) {
      out.passed = false;
      bad += " (" + fmt("%g", c.alpha) + "," + fmt("%g", c.p) + ") " + to_string(v.classification) +
             " growth " + fmt("%.2e", v.growth_rate) + ";";
    }
  }
  out.detail = out.passed ? "7/7 verdicts match sign(p*(alpha) - p)" : "mismatches:" + bad;
  return out;
}

// ---- 7: discriminant growth rate matches Gamma ------------------------------

Outcome criterion_discriminant_fit() {
  Outcome out;
  out.passed = true;
  for (double p : {1.0, 3.0}) {
    SolveOptions<double> opts;
    opts.n_modes = 16;
    const auto rep = discriminant_scaling_check(ModelParams<double>{2.0, p}, {0.03, 0.05}, 0.005, opts);
    out.passed = out.passed && rep.gamma_relative_error <= 0.05;
    if (!out.detail.empty()) out.detail += ", ";
    out.detail += "(2," + fmt("%g", p) + "): fitted " + fmt("%.4g", rep.fitted_gamma) + " vs " +
                  fmt("%.4g", rep.gamma_closed_form) + " (rel " +
                  fmt("%.2e", rep.gamma_relative_error) + ")";
  }
  return out;
}

// ---- 8: constant-state discriminant closed form ----------------------------

Outcome criterion_constant_discriminant() {
  Outcome out;
  double worst_rel = 0, worst_limit = 0;
  for (ModelParams<double> prm : {ModelParams<double>{2, 1}, ModelParams<double>{1, 2},
                                  ModelParams<double>{3, 2}}) {
    for (double b : {0.0, 0.02}) {
      const auto w = solve_wave(prm, 0.0, b);
      for (double xi : {0.05, 0.1, 0.3}) {
        const auto slice = slice_spectrum(assemble_bloch(w, xi, 32));
        const auto triple = extract_critical_triple(slice, prm, w.k_alpha);
        const double via_cubic = cubic_from_eigenvalues(triple, prm.p, xi).discriminant;
        const double closed = delta_constant_state(prm, b, xi);
        worst_rel = std::max(worst_rel, std::abs(via_cubic - closed) / std::abs(closed));
      }
      const double limit = std::pow(w.k_alpha, 6.0) * prm.alpha * prm.alpha *
                           std::pow(prm.alpha + 1.0, 6.0) / std::pow(prm.p, 6.0);
      const double at = delta_constant_state(prm, b, 0.005) / (0.005 * 0.005);
      worst_limit = std::max(worst_limit, std::abs(at - limit) / limit);
    }
  }
  out.passed = worst_rel <= 1e-9 && worst_limit <= 1e-2;
  out.detail = "max cubic-vs-closed-form rel = " + fmt("%.3e", worst_rel) +
               ", small-xi limit rel = " + fmt("%.3e", worst_limit);
  return out;
}

// ---- 9: spectral symmetries ------------------------------------------------

Outcome criterion_symmetries() {
  Outcome out;
  double worst = 0;
  for (ModelParams<double> prm : {ModelParams<double>{2, 1}, ModelParams<double>{1.5, 1},
                                  ModelParams<double>{2, 2}}) {
    const auto w = solve_wave(prm, 0.05, 0.0);
    for (double xi : {0.1, 0.25, 0.4})
      worst = std::max(worst, symmetry_check(w, xi, 24).max_defect);
  }
  out.passed = worst <= 1e-9;
  out.detail = "max symmetry defect over 3 parameter sets x 3 xi = " + fmt("%.3e", worst);
  return out;
}

// ---- 10: Benjamin-Ono borderline -------------------------------------------

Outcome criterion_borderline() {
  Outcome out;
  const double gamma_bo = gamma_coefficient(1.0, 1.0);
  SolveOptions<double> opts;
  opts.n_modes = 16;
  const auto rep = discriminant_scaling_check(ModelParams<double>{1.0, 1.0}, {0.03, 0.05}, 0.005, opts);
  const double scale = std::abs(gamma_coefficient(2.0, 1.0));
  out.passed = std::abs(gamma_bo) <= 1e-12 && std::abs(rep.fitted_gamma) <= 1e-3 * scale;
  out.detail = "Gamma(1,1) = " + fmt("%.3e", gamma_bo) + ", fitted a^2 coefficient " +
               fmt("%.3e", std::abs(rep.fitted_gamma)) + " <= " + fmt("%.3e", 1e-3 * scale) +
               ": indeterminate by design";
  return out;
}

// ---- figure: stability diagram boundary -------------------------------------

Outcome criterion_figure() {
  Outcome out;
  SweepConfig<double> cfg;  // 40 x 40 over [1.05,4] x [1,2.5]
  cfg.xi_count = 16;
  int failures = 0;
  const auto records = run_sweep<double>(cfg, [&](const SweepRecord<double>& rec) {
    if (!rec.solver_ok) ++failures;
  });
  const auto fig = figure_boundary_deviation(cfg, records);
  out.passed = fig.passed && failures == 0;
  out.detail = "boundary deviation = " + fmt("%.3f", fig.max_deviation_cells) +
               " cells (worst alpha = " + fmt("%.3f", fig.worst_alpha) + "), " +
               std::to_string(failures) + " solver failures";
  return out;
}

std::vector<Criterion> all_criteria() {
  return {
      {"1", "closed-form critical power checkpoints", 1.0, criterion_closed_form},
      {"2", "Gamma vanishes along p*(alpha)", 1.0, criterion_gamma_root},
      {"3", "constant-state spectrum matches the dispersion relation", 10.0,
       criterion_constant_spectrum},
      {"4", "small-amplitude expansion convergence orders", 30.0, criterion_expansion_orders},
      {"5", "multi-period spectrum tiles into Bloch slices", 60.0, criterion_block_oracle},
      {"6", "stability classification across the critical curve", 300.0, criterion_classification},
      {"7", "discriminant a^2 coefficient matches Gamma", 120.0, criterion_discriminant_fit},
      {"8", "constant-state discriminant closed form", 10.0, criterion_constant_discriminant},
      {"9", "spectral symmetries", 30.0, criterion_symmetries},
      {"10", "Benjamin-Ono borderline", 0.0, criterion_borderline},
      {"figure", "stability diagram boundary within one grid cell", 0.0, criterion_figure},
  };
}

}  // namespace

int main(int argc, char** argv) {
  const std::string selector = argc > 1 ? argv[1] : "";
  int failed = 0, ran = 0;
  for (const auto& c : all_criteria()) {
    if (!selector.empty() && c.id != selector) continue;
    ++ran;
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = c.body();
    } catch (const std::exception& e) {
      out.passed = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool in_budget = c.time_budget_s <= 0 || elapsed < c.time_budget_s;
    const bool ok = out.passed && in_budget;
    const std::string budget_note =
        in_budget ? "" : ", budget " + fmt("%.0f", c.time_budget_s) + " s exceeded";
    std::printf("%s  criterion %-6s %s: %s [%.2f s%s]\n", ok ? "PASS" : "FAIL", c.id.c_str(),
                c.title.c_str(), out.detail.c_str(), elapsed, budget_note.c_str());
    if (!ok) ++failed;
  }
  if (ran == 0) {
    std::fprintf(stderr, "unknown criterion '%s'\n", selector.c_str());
    return 64;
  }
  return failed;
}
