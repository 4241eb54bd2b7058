#pragma once

// Parameter sweeps over (alpha, p) grids and the tabular/graphical outputs
// built from them: per-cell stability records, CSV tables, and the stability
// diagram (stable region under the p*(alpha) curve). All outputs are
// deterministic for a fixed configuration; runtime_ms is reported only in
// JSON records so CSV bodies are byte-reproducible.

#include "fkdv/bloch.hpp"
#include "fkdv/reduction.hpp"
#include "fkdv/wave.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

namespace fkdv {

template <typename Scalar = double>
struct SweepConfig {
  Scalar alpha_min = Scalar(1.05), alpha_max = Scalar(4);
  Index alpha_count = 40;
  Scalar p_min = Scalar(1), p_max = Scalar(2.5);
  Index p_count = 40;
  std::vector<Scalar> amplitudes = {Scalar(0.05)};
  Scalar b = 0;
  Index xi_count = 64;
  Index n_modes = 24;
  int threads = 1;

  void validate() const {
    if (!(alpha_min > Scalar(0.5))) throw std::domain_error("alpha must exceed 1/2");
    if (alpha_count < 1 || p_count < 1) throw std::invalid_argument("grid counts must be >= 1");
    if (!(alpha_min <= alpha_max && p_min <= p_max))
      throw std::invalid_argument("empty parameter range");
    if (n_modes < 8) throw std::invalid_argument("truncation must be >= 8");
    if (amplitudes.empty()) throw std::invalid_argument("no amplitudes given");
  }

  Scalar alpha_at(Index i) const {
    return alpha_count == 1 ? alpha_min
                            : alpha_min + (alpha_max - alpha_min) * Scalar(i) / Scalar(alpha_count - 1);
  }
  Scalar p_at(Index j) const {
    return p_count == 1 ? p_min : p_min + (p_max - p_min) * Scalar(j) / Scalar(p_count - 1);
  }
};

template <typename Scalar = double>
struct SweepRecord {
  Scalar alpha = 0, p = 0, a = 0, b = 0;
  Scalar k_alpha = 0;
  Scalar growth_rate = 0;
  Scalar worst_xi = 0;
  Stability verdict = Stability::Indeterminate;
  int gamma_sign = 0;          // sign of Gamma(alpha, p)
  Scalar p_star = 0;           // critical_power(alpha)
  double runtime_ms = 0;
  bool solver_ok = true;
  std::string error;
};

// Runs one stability record; solver failures are captured in the record
// rather than thrown so that grid sweeps survive cells outside the
// existence regime.
template <typename Scalar>
SweepRecord<Scalar> sweep_cell(Scalar alpha, Scalar p, Scalar a, Scalar b, Index n_modes,
                               Index xi_count, int threads) {
  SweepRecord<Scalar> rec;
  rec.alpha = alpha;
  rec.p = p;
  rec.a = a;
  rec.b = b;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    ModelParams<Scalar> params{alpha, p};
    rec.p_star = critical_power(alpha);
    const Scalar gamma = gamma_coefficient(alpha, p);
    rec.gamma_sign = gamma > Scalar(1e-12) ? 1 : (gamma < -Scalar(1e-12) ? -1 : 0);

    SolveOptions<Scalar> opts;
    opts.n_modes = n_modes;
    const auto w = solve_wave(params, a, b, opts);
    rec.k_alpha = w.k_alpha;

    const auto verdict =
        stability_sweep(w, make_xi_grid<Scalar>(xi_count), n_modes, {}, threads);
    rec.growth_rate = verdict.growth_rate;
    rec.worst_xi = verdict.worst_xi;
    rec.verdict = verdict.classification;
  } catch (const std::exception& e) {
    rec.solver_ok = false;
    rec.error = e.what();
  }
  rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                       .count();
  return rec;
}

// Full (alpha, p) x amplitudes sweep in deterministic grid order. Each
// finished record is handed to on_record (when given) before the next cell
// starts, so partial output can be flushed incrementally.
template <typename Scalar>
std::vector<SweepRecord<Scalar>> run_sweep(
    const SweepConfig<Scalar>& cfg,
    const std::function<void(const SweepRecord<Scalar>&)>& on_record = {}) {
  cfg.validate();
  std::vector<SweepRecord<Scalar>> records;
  records.reserve(static_cast<size_t>(cfg.alpha_count * cfg.p_count) * cfg.amplitudes.size());
  for (Index i = 0; i < cfg.alpha_count; ++i) {
    for (Index j = 0; j < cfg.p_count; ++j) {
      for (Scalar a : cfg.amplitudes) {
        records.push_back(sweep_cell(cfg.alpha_at(i), cfg.p_at(j), a, cfg.b, cfg.n_modes,
                                     cfg.xi_count, cfg.threads));
        if (on_record) on_record(records.back());
      }
    }
  }
  return records;
}

namespace detail {

template <typename Scalar>
std::string g17(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(v));
  return buf;
}

}  // namespace detail

template <typename Scalar>
void write_profile_csv(const std::string& path, const WaveSolution<Scalar>& w,
                       Index samples = 256) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "z,P\n";
  const Scalar two_pi = 2 * PeriodicFunction<Scalar>::pi();
  for (Index j = 0; j < samples; ++j) {
    const Scalar z = two_pi * Scalar(j) / Scalar(samples);
    out << detail::g17(z) << ',' << detail::g17(w.profile.evaluate(z)) << '\n';
  }
}

template <typename Scalar>
void write_spectrum_csv(const std::string& path, const std::vector<SpectrumSlice<Scalar>>& slices) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "xi,re_lambda,im_lambda\n";
  for (const auto& s : slices)
    for (Index i = 0; i < s.eigenvalues.size(); ++i)
      out << detail::g17(s.xi) << ',' << detail::g17(std::real(s.eigenvalues[i])) << ','
          << detail::g17(std::imag(s.eigenvalues[i])) << '\n';
}

template <typename Scalar>
void write_pstar_csv(const std::string& path, Scalar alpha_min, Scalar alpha_max,
                     Index samples = 256) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "alpha,p_star\n";
  for (Index i = 0; i < samples; ++i) {
    const Scalar alpha =
        samples == 1 ? alpha_min : alpha_min + (alpha_max - alpha_min) * Scalar(i) / Scalar(samples - 1);
    out << detail::g17(alpha) << ',' << detail::g17(critical_power(alpha)) << '\n';
  }
}

template <typename Scalar>
void append_region_row(std::ofstream& out, const SweepRecord<Scalar>& rec) {
  out << detail::g17(rec.alpha) << ',' << detail::g17(rec.p) << ','
      << (rec.solver_ok ? to_string(rec.verdict) : "error") << '\n';
  out.flush();
}

template <typename Scalar>
void write_region_csv(const std::string& path, const std::vector<SweepRecord<Scalar>>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "alpha,p,verdict\n";
  for (const auto& rec : records) append_region_row(out, rec);
}

template <typename Scalar = double>
struct FigureReport {
  Scalar max_deviation_cells = 0;  // distance from the empirical boundary to p*(alpha)
  Scalar worst_alpha = 0;
  bool passed = false;             // every column within one grid cell
};

// Compares the empirical stable/unstable boundary of a sweep against the
// p*(alpha) curve, column by column. The deviation of a column is how far
// (in p-grid cells) a stable cell sits above the curve or an unstable cell
// below it; indeterminate cells are neutral.
template <typename Scalar>
FigureReport<Scalar> figure_boundary_deviation(const SweepConfig<Scalar>& cfg,
                                               const std::vector<SweepRecord<Scalar>>& records) {
  const Scalar cell = cfg.p_count > 1 ? (cfg.p_max - cfg.p_min) / Scalar(cfg.p_count - 1)
                                      : Scalar(1);
  FigureReport<Scalar> rep;
  rep.worst_alpha = cfg.alpha_min;
  for (Index i = 0; i < cfg.alpha_count; ++i) {
    const Scalar alpha = cfg.alpha_at(i);
    const Scalar p_star = critical_power(alpha);
    Scalar dev = 0;
    for (const auto& rec : records) {
      if (rec.alpha != alpha || !rec.solver_ok) continue;
      if (rec.verdict == Stability::Stable && rec.p > p_star)
        dev = std::max(dev, (rec.p - p_star) / cell);
      if (rec.verdict == Stability::Unstable && rec.p < p_star)
        dev = std::max(dev, (p_star - rec.p) / cell);
    }
    if (dev > rep.max_deviation_cells) {
      rep.max_deviation_cells = dev;
      rep.worst_alpha = alpha;
    }
  }
  rep.passed = rep.max_deviation_cells < Scalar(1);
  return rep;
}

// Stability diagram: verdict cells over the (alpha, p) plane with the
// p*(alpha) curve overlaid and the region beneath it shaded.
template <typename Scalar>
void write_diagram_svg(const std::string& path, const SweepConfig<Scalar>& cfg,
                       const std::vector<SweepRecord<Scalar>>& records) {
  const double width = 720, height = 540;
  const double ml = 70, mr = 30, mt = 40, mb = 60;
  const double pw = width - ml - mr, ph = height - mt - mb;
  const double a_lo = static_cast<double>(cfg.alpha_min), a_hi = static_cast<double>(cfg.alpha_max);
  const double p_lo = static_cast<double>(cfg.p_min), p_hi = static_cast<double>(cfg.p_max);
  auto x_of = [&](double alpha) { return ml + pw * (alpha - a_lo) / (a_hi - a_lo); };
  auto y_of = [&](double p) { return mt + ph * (p_hi - p) / (p_hi - p_lo); };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";

  // shaded stable region: below the p* curve, above the p-axis floor
  out << "<path d=\"M" << x_of(a_lo) << ' ' << y_of(p_lo);
  const int curve_samples = 200;
  for (int i = 0; i <= curve_samples; ++i) {
    const double alpha = a_lo + (a_hi - a_lo) * i / curve_samples;
    const double ps = std::min(std::max(static_cast<double>(critical_power(Scalar(alpha))), p_lo), p_hi);
    out << " L" << x_of(alpha) << ' ' << y_of(ps);
  }
  out << " L" << x_of(a_hi) << ' ' << y_of(p_lo) << " Z\" fill=\"#dff2df\" stroke=\"none\"/>\n";

  // verdict cells
  const double cw = cfg.alpha_count > 1 ? pw / (cfg.alpha_count - 1) : pw;
  const double ch = cfg.p_count > 1 ? ph / (cfg.p_count - 1) : ph;
  for (const auto& rec : records) {
    const char* color = !rec.solver_ok                          ? "#9e9e9e"
                        : rec.verdict == Stability::Stable      ? "#2e7d32"
                        : rec.verdict == Stability::Unstable    ? "#c62828"
                                                                : "#ef6c00";
    out << "<rect x=\"" << x_of(static_cast<double>(rec.alpha)) - cw / 2 << "\" y=\""
        << y_of(static_cast<double>(rec.p)) - ch / 2 << "\" width=\"" << cw << "\" height=\"" << ch
        << "\" fill=\"" << color << "\" fill-opacity=\"0.55\"/>\n";
  }

  // p*(alpha) curve
  out << "<polyline fill=\"none\" stroke=\"#1a237e\" stroke-width=\"2\" points=\"";
  for (int i = 0; i <= curve_samples; ++i) {
    const double alpha = a_lo + (a_hi - a_lo) * i / curve_samples;
    const double ps = std::min(std::max(static_cast<double>(critical_power(Scalar(alpha))), p_lo), p_hi);
    out << x_of(alpha) << ',' << y_of(ps) << ' ';
  }
  out << "\"/>\n";

  // axes, ticks, labels
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#000\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double alpha = a_lo + (a_hi - a_lo) * i / 5;
    const double p = p_lo + (p_hi - p_lo) * i / 5;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", alpha);
    out << "<text x=\"" << x_of(alpha) << "\" y=\"" << height - mb + 20
        << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">" << buf
        << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.2f", p);
    out << "<text x=\"" << ml - 8 << "\" y=\"" << y_of(p) + 4
        << "\" font-size=\"12\" text-anchor=\"end\" font-family=\"sans-serif\">" << buf
        << "</text>\n";
  }
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 15
      << "\" font-size=\"14\" text-anchor=\"middle\" font-family=\"sans-serif\">alpha</text>\n";
  out << "<text x=\"" << 20 << "\" y=\"" << mt + ph / 2
      << "\" font-size=\"14\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\"rotate(-90 20 "
      << mt + ph / 2 << ")\">p</text>\n";
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << mt - 14
      << "\" font-size=\"15\" text-anchor=\"middle\" font-family=\"sans-serif\">"
         "Spectral stability of small periodic waves: stable below p*(alpha)</text>\n";

  // legend
  const double lx = ml + 12, ly = mt + 12;
  const char* names[3] = {"stable", "unstable", "indeterminate"};
  const char* colors[3] = {"#2e7d32", "#c62828", "#ef6c00"};
  for (int i = 0; i < 3; ++i) {
    out << "<rect x=\"" << lx << "\" y=\"" << ly + 18 * i << "\" width=\"12\" height=\"12\" fill=\""
        << colors[i] << "\" fill-opacity=\"0.55\"/>\n";
    out << "<text x=\"" << lx + 18 << "\" y=\"" << ly + 18 * i + 10
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << names[i] << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace fkdv
