#include "risloc/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "risloc/error.hpp"
#include "risloc/parallel.hpp"
#include "risloc/random.hpp"

namespace risloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double circular_diff(double a, double b, double window) {
  double d = std::fmod(a - b, window);
  if (d > window / 2) d -= window;
  if (d < -window / 2) d += window;
  return d;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return kNaN;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double mean_finite(const std::vector<double>& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isfinite(x)) {
      sum += x;
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : kNaN;
}

std::vector<double> toa_errors(const TrialOutput& out, int n) {
  const Scenario& s = out.scenario;
  std::vector<double> errs(s.rxs.size(), kNaN);
  const auto& row = out.toa[static_cast<std::size_t>(n)];
  for (int m = 0; m < s.num_rx(); ++m) {
    if (row[static_cast<std::size_t>(m)]) {
      errs[static_cast<std::size_t>(m)] =
          circular_diff(row[static_cast<std::size_t>(m)]->tau, path_delay({n, m}, s), s.ofdm.ambiguity_window());
    }
  }
  return errs;
}

double rms_of(const ResultTable& t, std::vector<double> TrialRow::*member) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const TrialRow& r : t.rows) {
    for (double e : r.*member) {
      if (!std::isnan(e)) {
        sum += e * e;
        ++n;
      }
    }
  }
  return n ? std::sqrt(sum / static_cast<double>(n)) : kNaN;
}

std::vector<TrialRow> rows_from(const TrialOutput& out, const std::vector<double>& pebs, const std::string& label,
                                std::uint64_t ris_seed, std::uint64_t noise_seed) {
  std::vector<TrialRow> rows;
  const std::vector<double> los = toa_errors(out, 0);
  for (const UeResult& res : out.ues) {
    TrialRow row;
    row.cell = label;
    row.ris_seed = ris_seed;
    row.noise_seed = noise_seed;
    row.ue = res.ue;
    row.truth = out.scenario.ue(res.ue).position;
    row.peb = pebs[static_cast<std::size_t>(res.ue - 1)];
    row.nlos_toa_errors = toa_errors(out, res.ue);
    row.los_toa_errors = los;
    if (res.estimate) {
      row.estimate = res.estimate->position;
      row.objective = res.estimate->objective;
      row.converged = res.estimate->converged;
      if (row.converged) {
        row.error = (row.estimate - row.truth).norm();
      } else {
        row.failure = "not converged";
      }
    } else {
      row.failure = res.message;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---- output ---------------------------------------------------------------

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct Provenance {
  std::string experiment;
  std::string hash;
  std::uint64_t seed = 0;
  int ris_draws = 0;
  int noise_trials = 0;
};

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const Provenance& p, const std::string& columns) : out_(path) {
    if (!out_) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    out_ << "# risloc " << p.experiment << "\n"
         << "# config_hash: " << p.hash << "\n"
         << "# seed: " << p.seed << "\n"
         << "# ris_seeds: " << p.seed << ".." << p.seed + static_cast<std::uint64_t>(std::max(p.ris_draws, 1) - 1)
         << " (" << p.ris_draws << " draws)\n"
         << "# noise_seeds: derive_seed(ris_seed, j), j < " << p.noise_trials << "\n"
         << columns << "\n";
  }

  template <typename... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(values), first = false), ...);
    out_ << "\n";
  }

  void comment(const std::string& text) { out_ << "# " << text << "\n"; }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::uint64_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  std::ofstream out_;
};

void write_trials(const std::filesystem::path& path, const Provenance& p, const ResultTable& t) {
  CsvFile csv(path, p, "cell,ris_seed,noise_seed,ue,x_true,y_true,z_true,x,y,z,error_m,peb_m,objective,converged,failure");
  for (const TrialRow& r : t.rows) {
    std::string failure = r.failure;
    std::replace(failure.begin(), failure.end(), ',', ';');
    csv.row(r.cell, r.ris_seed, r.noise_seed, r.ue, r.truth.x(), r.truth.y(), r.truth.z(), r.estimate.x(),
            r.estimate.y(), r.estimate.z(), r.error, r.peb, r.objective, r.converged, failure);
  }
}

void write_cdf(CsvFile& csv, const std::string& key, const std::string& series, const std::vector<double>& values) {
  if (values.empty()) return;
  for (const auto& [v, p] : cdf(values)) csv.row(key, series, v, p);
}

void write_summary(const std::filesystem::path& path, const Provenance& p, const ExperimentResult& r) {
  nlohmann::json j;
  j["experiment"] = p.experiment;
  j["config_hash"] = p.hash;
  j["seed"] = p.seed;
  j["ris_draws"] = p.ris_draws;
  j["noise_trials"] = p.noise_trials;
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [k, v] : r.metrics) {
    metrics[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(num(v));
  }
  j["metrics"] = metrics;
  j["checks"] = nlohmann::json::array();
  for (const Check& c : r.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"value", std::isfinite(c.value) ? nlohmann::json(c.value) : nlohmann::json(num(c.value))},
                           {"lo", c.lo},
                           {"hi", c.hi},
                           {"pass", c.pass}});
  }
  j["passed"] = r.passed();
  std::vector<std::string> files;
  for (const auto& f : r.files) files.push_back(f.filename().string());
  j["files"] = files;
  std::ofstream(path) << j.dump(2) << "\n";
}

ScenarioSpec single_ue(ScenarioSpec spec, const Vec3& x) {
  spec.ue_positions = {x};
  spec.ue_columns.clear();
  return spec;
}

void record_table_metrics(ExperimentResult& r, const std::string& prefix, const ResultTable& t, double threshold) {
  r.metrics[prefix + "median_error_m"] = t.median_error();
  r.metrics[prefix + "rmse_m"] = t.rmse();
  r.metrics[prefix + "normalized_rmse"] = normalized_rmse(t, threshold);
  r.metrics[prefix + "median_peb_m"] = median_of(t.pebs());
  r.metrics[prefix + "failures"] = static_cast<double>(t.failures());
  r.metrics[prefix + "trials"] = static_cast<double>(t.rows.size());
}

// ---- experiments ----------------------------------------------------------

void simulate(ExperimentResult& r, const ScenarioSpec& spec, const std::filesystem::path& dir, const Provenance& p) {
  const std::uint64_t ris_seed = spec.seed;
  const Scenario first = materialize(spec, ris_seed, noise_seed_at(ris_seed, 0));
  std::vector<double> pebs;
  for (int n = 1; n <= first.num_ue(); ++n) {
    try {
      pebs.push_back(true_peb(first, n).peb);
    } catch (const Error&) {
      pebs.push_back(kInf);
    }
  }
  CsvFile toa(dir / "toa.csv", p, "n,m,tau_hat_s,beta_mag,crb_var_s2");
  CsvFile loc(dir / "localization.csv", p, "ue,x,y,z,objective,converged,peb_m");
  ResultTable table;
  for (int j = 0; j < p.noise_trials; ++j) {
    const std::uint64_t noise_seed = noise_seed_at(ris_seed, j);
    const TrialOutput out = run_trial(spec, ris_seed, noise_seed);
    const std::string tag = "trial " + std::to_string(j) + " ris_seed=" + std::to_string(ris_seed) +
                            " noise_seed=" + std::to_string(noise_seed);
    toa.comment(tag);
    loc.comment(tag);
    for (std::size_t n = 0; n < out.toa.size(); ++n) {
      for (std::size_t m = 0; m < out.toa[n].size(); ++m) {
        if (const auto& e = out.toa[n][m]) {
          toa.row(n, m, e->tau, e->beta_mag, e->crb_var);
        } else {
          toa.row(n, m, kNaN, kNaN, kNaN);
        }
      }
    }
    for (const UeResult& u : out.ues) {
      const double peb = pebs[static_cast<std::size_t>(u.ue - 1)];
      if (u.estimate) {
        const Vec3& x = u.estimate->position;
        loc.row(u.ue, x.x(), x.y(), x.z(), u.estimate->objective, u.estimate->converged, peb);
      } else {
        loc.row(u.ue, kNaN, kNaN, kNaN, kNaN, false, peb);
      }
    }
    for (TrialRow& row : rows_from(out, pebs, "simulate", ris_seed, noise_seed)) table.rows.push_back(std::move(row));
  }
  write_trials(dir / "trials.csv", p, table);
  r.files = {dir / "toa.csv", dir / "localization.csv", dir / "trials.csv"};
  record_table_metrics(r, "", table, spec.peb_threshold);
  r.metrics["nlos_toa_rmse_s"] = nlos_toa_rmse(table);
  r.metrics["los_toa_rmse_s"] = los_toa_rmse(table);
}

void peb_maps(ExperimentResult& r, const ScenarioSpec& spec, const std::filesystem::path& dir, const Provenance& p) {
  const std::vector<Vec3> grid = map_grid(spec);
  const std::vector<PebPoint> single = peb_map(materialize(spec, spec.seed, spec.seed), grid);
  {
    CsvFile csv(dir / "peb_map_single.csv", p, "x,y,z,peb_m,seed");
    for (const PebPoint& pt : single) csv.row(pt.position.x(), pt.position.y(), pt.position.z(), pt.peb, spec.seed);
  }
  const std::vector<PebPoint> avg = average_peb_map(spec, grid);
  {
    CsvFile csv(dir / "peb_map_average.csv", p, "x,y,z,peb_m,seed");
    for (const PebPoint& pt : avg) csv.row(pt.position.x(), pt.position.y(), pt.position.z(), pt.peb, spec.seed);
  }
  r.files = {dir / "peb_map_single.csv", dir / "peb_map_average.csv"};

  std::vector<double> inner, outer, single_values;
  for (const PebPoint& pt : avg) {
    const double rho = (pt.position - spec.tx).head<2>().norm();
    if (rho <= 0.25 * spec.grid_half_width) inner.push_back(pt.peb);
    if (rho >= 0.75 * spec.grid_half_width) outer.push_back(pt.peb);
  }
  for (const PebPoint& pt : single) single_values.push_back(pt.peb);
  r.metrics["single_median_peb_m"] = median_of(single_values);
  r.metrics["average_inner_mean_peb_m"] = mean_finite(inner);
  r.metrics["average_outer_mean_peb_m"] = mean_finite(outer);
  if (!inner.empty() && !outer.empty()) {
    r.checks.push_back(make_check("average PEB grows away from the Tx (outer/inner)",
                                  mean_finite(outer) / mean_finite(inner), 1.0, kInf));
  }
}

void cdf_experiment(ExperimentResult& r, const ScenarioSpec& spec, const std::filesystem::path& dir,
                    const Provenance& p) {
  CsvFile csv(dir / "cdf.csv", p, "ue_x,series,value_m,probability");
  ResultTable all;
  for (double x : spec.ue_x) {
    const ScenarioSpec cell = single_ue(spec, Vec3(x, 0.0, spec.grid_z));
    const std::string label = "x=" + num(x);
    const ResultTable t = run_cells(cell, label);
    write_cdf(csv, num(x), "error", t.errors());
    std::vector<double> pebs;
    for (std::size_t i = 0; i < t.rows.size(); i += static_cast<std::size_t>(spec.noise_seeds)) pebs.push_back(t.rows[i].peb);
    write_cdf(csv, num(x), "peb", pebs);
    record_table_metrics(r, label + ".", t, spec.peb_threshold);
    if (x == 10.0) {
      r.checks.push_back(make_check("normalized RMSE at x=10 (PEB < " + num(spec.peb_threshold) + " m)",
                                    normalized_rmse(t, spec.peb_threshold), 0.8, 1.2));
    }
    if (x == 0.0) r.checks.push_back(make_check("median error at x=0 [m]", t.median_error(), 0.0, 1.0));
    all.append(t);
  }
  write_trials(dir / "trials.csv", p, all);
  r.files = {dir / "cdf.csv", dir / "trials.csv"};
}

void sweep_rx(ExperimentResult& r, const ScenarioSpec& spec, const std::filesystem::path& dir, const Provenance& p) {
  const Vec3 probe(0.0, 0.0, spec.grid_z);
  {
    // CDF over the grid of the seed-averaged PEB for each radius
    CsvFile csv(dir / "peb_cdf_by_radius.csv", p, "radius_m,series,value_m,probability");
    const std::vector<Vec3> grid = map_grid(spec);
    for (double R : spec.radii) {
      ScenarioSpec cell = spec;
      cell.rx_radius = R;
      std::vector<double> values;
      for (const PebPoint& pt : average_peb_map(cell, grid)) values.push_back(pt.peb);
      write_cdf(csv, num(R), "average_peb", values);
      r.metrics["R=" + num(R) + ".grid_median_peb_m"] = median_of(values);
    }
  }
  std::map<std::pair<double, int>, double> table;
  {
    CsvFile csv(dir / "peb_vs_rx.csv", p, "radius_m,rx_count,avg_peb_m");
    for (double R : spec.radii) {
      for (int M : spec.rx_counts) {
        ScenarioSpec cell = single_ue(spec, probe);
        cell.rx_radius = R;
        cell.rx_count = M;
        cell.rx_positions.clear();
        const double v = average_peb(cell, probe);
        table[{R, M}] = v;
        csv.row(R, M, v);
      }
    }
  }
  r.files = {dir / "peb_cdf_by_radius.csv", dir / "peb_vs_rx.csv"};
  for (const auto& [key, v] : table) r.metrics["R=" + num(key.first) + ".M=" + std::to_string(key.second)] = v;

  auto at = [&](double R, int M) -> std::optional<double> {
    const auto it = table.find({R, M});
    return it == table.end() ? std::nullopt : std::optional<double>(it->second);
  };
  if (auto a = at(10.0, 3), b = at(20.0, 3); a && b) {
    r.checks.push_back(make_check("PEB(R=20)/PEB(R=10), M=3", *b / *a, 1.7, 2.3));
  }
  if (auto m3 = at(10.0, 3), m4 = at(10.0, 4), m5 = at(10.0, 5); m3 && m4 && m5) {
    r.checks.push_back(make_check("PEB(M=4)/PEB(M=3), R=10", *m4 / *m3, 0.0, 1.0 - 1e-12));
    r.checks.push_back(make_check("PEB(M=5)/PEB(M=4), R=10", *m5 / *m4, 0.0, 1.0 - 1e-12));
  }
  if (auto m8 = at(10.0, 8), m10 = at(10.0, 10); m8 && m10) {
    r.checks.push_back(make_check("|PEB(M=10)/PEB(M=8) - 1|, R=10", std::abs(*m10 / *m8 - 1.0), 0.0, 0.15));
  }
}

void scatterer_experiment(ExperimentResult& r, const ScenarioSpec& spec, const std::filesystem::path& dir,
                          const Provenance& p) {
  const ScenarioSpec base = single_ue(spec, spec.ue_positions.front());
  std::vector<int> counts{0};
  for (int c : spec.scatterer_counts) {
    if (c != 0) counts.push_back(c);
  }
  CsvFile cdf_csv(dir / "scatterers_cdf.csv", p, "scatterers,series,value_m,probability");
  CsvFile sum_csv(dir / "scatterers_summary.csv", p,
                  "scatterers,nlos_toa_rmse_s,los_toa_rmse_s,median_error_m,rmse_m,failures");
  ResultTable all;
  double clean_rmse = kNaN;
  for (int c : counts) {
    ScenarioSpec cell = base;
    cell.scatterer_count = c;
    cell.scatterer_positions.clear();
    const std::string label = "scatterers=" + std::to_string(c);
    const ResultTable t = run_cells(cell, label);
    const double nlos = nlos_toa_rmse(t);
    if (c == 0) clean_rmse = nlos;
    write_cdf(cdf_csv, std::to_string(c), "error", t.errors());
    sum_csv.row(c, nlos, los_toa_rmse(t), t.median_error(), t.rmse(), t.failures());
    record_table_metrics(r, label + ".", t, spec.peb_threshold);
    r.metrics[label + ".nlos_toa_rmse_s"] = nlos;
    r.metrics[label + ".los_toa_rmse_s"] = los_toa_rmse(t);
    all.append(t);
  }
  write_trials(dir / "trials.csv", p, all);
  r.files = {dir / "scatterers_cdf.csv", dir / "scatterers_summary.csv", dir / "trials.csv"};
  const int most = counts.back();
  if (most > 0) {
    const std::string label = "scatterers=" + std::to_string(most);
    r.checks.push_back(make_check("NLOS ToA RMSE ratio, " + label + " vs none",
                                  r.metrics[label + ".nlos_toa_rmse_s"] / clean_rmse, 0.9, 1.1));
    r.checks.push_back(make_check("median error with " + label + " [m]", r.metrics[label + ".median_error_m"], 0.0, 1.0));
  }
}

}  // namespace

std::uint64_t ris_seed_at(const ScenarioSpec& spec, int i) { return spec.seed + static_cast<std::uint64_t>(i); }

std::uint64_t noise_seed_at(std::uint64_t ris_seed, int j) {
  return derive_seed(ris_seed, static_cast<std::uint64_t>(j));
}

std::size_t ResultTable::failures() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const TrialRow& r) { return !std::isfinite(r.error); }));
}

std::vector<double> ResultTable::errors() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const TrialRow& r : rows) out.push_back(r.error);
  return out;
}

std::vector<double> ResultTable::pebs() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const TrialRow& r : rows) out.push_back(r.peb);
  return out;
}

double ResultTable::median_error() const { return median_of(errors()); }

double ResultTable::rmse() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const TrialRow& r : rows) {
    if (std::isfinite(r.error)) {
      sum += r.error * r.error;
      ++n;
    }
  }
  return n ? std::sqrt(sum / static_cast<double>(n)) : kNaN;
}

void ResultTable::append(const ResultTable& other) { rows.insert(rows.end(), other.rows.begin(), other.rows.end()); }

LocatorOptions locator_options(const ScenarioSpec& spec) {
  LocatorOptions opts;
  opts.region = {spec.region_lo, spec.region_hi};
  return opts;
}

TrialOutput run_trial(const ScenarioSpec& spec, std::uint64_t ris_seed, std::uint64_t noise_seed) {
  TrialOutput out{materialize(spec, ris_seed, noise_seed), {}, {}};
  const Scenario& s = out.scenario;
  const double noise = s.noise.enabled ? s.noise.effective() : 0.0;
  out.toa = estimate_all(synthesize(s), s.profile_set(), s.ofdm, noise);
  out.ues = localize_all(out.toa, s, locator_options(spec));
  return out;
}

ResultTable run_cell(const ScenarioSpec& spec, const std::string& label, std::uint64_t ris_seed,
                     std::span<const std::uint64_t> noise_seeds) {
  ResultTable table;
  std::vector<double> pebs;
  for (const std::uint64_t noise_seed : noise_seeds) {
    TrialOutput out = run_trial(spec, ris_seed, noise_seed);
    if (pebs.empty()) {
      // the PEB depends on the RIS draw only
      for (int n = 1; n <= out.scenario.num_ue(); ++n) {
        try {
          pebs.push_back(true_peb(out.scenario, n).peb);
        } catch (const Error&) {
          pebs.push_back(kInf);
        }
      }
    }
    for (TrialRow& row : rows_from(out, pebs, label, ris_seed, noise_seed)) table.rows.push_back(std::move(row));
  }
  return table;
}

ResultTable run_cells(const ScenarioSpec& spec, const std::string& label) {
  if (spec.ris_seeds < 1 || spec.noise_seeds < 1) throw Error(ErrorKind::InvalidArgument, "need at least one trial");
  std::vector<ResultTable> parts(static_cast<std::size_t>(spec.ris_seeds));
  parallel_for(parts.size(), [&](std::size_t i) {
    const std::uint64_t ris_seed = ris_seed_at(spec, static_cast<int>(i));
    std::vector<std::uint64_t> noise(static_cast<std::size_t>(spec.noise_seeds));
    for (int j = 0; j < spec.noise_seeds; ++j) noise[static_cast<std::size_t>(j)] = noise_seed_at(ris_seed, j);
    parts[i] = run_cell(spec, label, ris_seed, noise);
  });
  ResultTable out;
  for (const ResultTable& t : parts) out.append(t);
  return out;
}

std::vector<std::pair<double, double>> cdf(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "CDF of an empty sample");
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(values.size());
  const double n = static_cast<double>(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) out.emplace_back(values[k], static_cast<double>(k + 1) / n);
  return out;
}

double normalized_rmse(const ResultTable& t, double peb_threshold) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const TrialRow& r : t.rows) {
    if (!(r.peb < peb_threshold)) continue;
    const double z = r.error / r.peb;
    sum += z * z;
    ++n;
  }
  return n ? std::sqrt(sum / static_cast<double>(n)) : kNaN;
}

double nlos_toa_rmse(const ResultTable& t) { return rms_of(t, &TrialRow::nlos_toa_errors); }

double los_toa_rmse(const ResultTable& t) { return rms_of(t, &TrialRow::los_toa_errors); }

double average_peb(const ScenarioSpec& spec, const Vec3& x) {
  std::vector<double> values(static_cast<std::size_t>(spec.ris_seeds));
  const ScenarioSpec one = single_ue(spec, x);
  parallel_for(values.size(), [&](std::size_t i) {
    const std::uint64_t seed = ris_seed_at(spec, static_cast<int>(i));
    try {
      values[i] = true_peb(materialize(one, seed, seed), 1).peb;
    } catch (const Error&) {
      values[i] = kInf;
    }
  });
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::vector<Vec3> map_grid(const ScenarioSpec& spec) {
  std::vector<Vec3> grid;
  const int n = spec.grid_points;
  const double h = spec.grid_half_width;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = n == 1 ? 0.0 : -h + 2.0 * h * i / (n - 1);
      const double y = n == 1 ? 0.0 : -h + 2.0 * h * j / (n - 1);
      grid.emplace_back(spec.tx.x() + x, spec.tx.y() + y, spec.grid_z);
    }
  }
  return grid;
}

std::vector<PebPoint> average_peb_map(const ScenarioSpec& spec, std::span<const Vec3> grid) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty PEB grid");
  const auto draws = static_cast<std::size_t>(spec.ris_seeds);
  std::vector<std::vector<double>> per_draw(draws);
  const ScenarioSpec one = single_ue(spec, grid.front());
  // parallel over grid chunks inside each draw keeps memory flat and threads busy
  for (std::size_t d = 0; d < draws; ++d) {
    const std::uint64_t seed = ris_seed_at(spec, static_cast<int>(d));
    const Scenario s = materialize(one, seed, seed);
    per_draw[d].resize(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
      try {
        per_draw[d][i] = true_peb(s, s.ue(1), grid[i]).peb;
      } catch (const Error&) {
        per_draw[d][i] = kInf;
      }
    });
  }
  std::vector<PebPoint> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double sum = 0.0;
    for (std::size_t d = 0; d < draws; ++d) sum += per_draw[d][i];
    out[i] = {grid[i], sum / static_cast<double>(draws)};
  }
  return out;
}

Check make_check(std::string name, double value, double lo, double hi) {
  return {std::move(name), value, lo, hi, value >= lo && value <= hi};
}

std::optional<Experiment> parse_experiment(const std::string& name) {
  if (name == "simulate") return Experiment::Simulate;
  if (name == "peb-map") return Experiment::PebMap;
  if (name == "cdf") return Experiment::Cdf;
  if (name == "sweep-rx") return Experiment::SweepRx;
  if (name == "scatterers") return Experiment::Scatterers;
  return std::nullopt;
}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Simulate: return "simulate";
    case Experiment::PebMap: return "peb-map";
    case Experiment::Cdf: return "cdf";
    case Experiment::SweepRx: return "sweep-rx";
    case Experiment::Scatterers: return "scatterers";
  }
  return "unknown";
}

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

ExperimentResult run_experiment(Experiment kind, ScenarioSpec spec, const std::filesystem::path& out_dir,
                                std::optional<int> trials) {
  if (trials && *trials < 1) throw Error(ErrorKind::InvalidArgument, "--trials must be >= 1");
  switch (kind) {
    case Experiment::Simulate: spec.noise_seeds = trials.value_or(1); spec.ris_seeds = 1; break;
    case Experiment::Cdf:
    case Experiment::Scatterers: spec.noise_seeds = trials.value_or(spec.noise_seeds); break;
    case Experiment::PebMap:
    case Experiment::SweepRx: spec.ris_seeds = trials.value_or(spec.ris_seeds); break;
  }
  std::filesystem::create_directories(out_dir);
  const Provenance p{to_string(kind), config_hash(spec), spec.seed, spec.ris_seeds,
                     kind == Experiment::PebMap || kind == Experiment::SweepRx ? 0 : spec.noise_seeds};
  ExperimentResult r;
  r.kind = kind;
  switch (kind) {
    case Experiment::Simulate: simulate(r, spec, out_dir, p); break;
    case Experiment::PebMap: peb_maps(r, spec, out_dir, p); break;
    case Experiment::Cdf: cdf_experiment(r, spec, out_dir, p); break;
    case Experiment::SweepRx: sweep_rx(r, spec, out_dir, p); break;
    case Experiment::Scatterers: scatterer_experiment(r, spec, out_dir, p); break;
  }
  {
    std::ofstream cfg(out_dir / "config.ini");
    cfg << "# config_hash: " << p.hash << "\n" << serialize_spec(spec);
  }
  r.files.push_back(out_dir / "config.ini");
  r.files.push_back(out_dir / "summary.json");
  write_summary(out_dir / "summary.json", p, r);
  return r;
}

}  // namespace risloc
