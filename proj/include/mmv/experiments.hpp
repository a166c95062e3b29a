#pragma once

// Experiment drivers: resolution sweep, sample-count convergence and the
// baseline / LP / half-space comparison, with JSON, CSV and OBJ output.
//
// Result files are a pure function of the configuration and seed. Wall-clock
// timings go to a separate timings.json so results stay byte-reproducible.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "mmv/baseline.hpp"
#include "mmv/errors.hpp"
#include "mmv/geometry.hpp"
#include "mmv/mismatch.hpp"
#include "mmv/spectral.hpp"

namespace mmv {

namespace fs = std::filesystem;

/// MMV_DATA_DIR if set, else the directory configured at build time.
inline fs::path data_directory() {
  if (const char* env = std::getenv("MMV_DATA_DIR"); env && *env) return env;
#ifdef MMV_DEFAULT_DATA_DIR
  return MMV_DEFAULT_DATA_DIR;
#else
  return "data";
#endif
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline const std::vector<std::string>& known_illuminants() {
  static const std::vector<std::string> names{"D65", "A", "F11"};
  return names;
}

inline std::string canonical_illuminant(const std::string& name) {
  for (const std::string& n : known_illuminants())
    if (lower(n) == lower(name)) return n;
  throw ConfigError("unknown illuminant '" + name + "' (expected D65, A or F11)");
}

inline std::vector<Spectrum> load_cmfs(const fs::path& dir = data_directory()) {
  const fs::path file = dir / "cmf_judd_vos_1978_2deg.csv";
  if (!fs::exists(file)) throw ConfigError("missing data file " + file.string());
  std::vector<Spectrum> cmf = load_spectral_file(file.string());
  if (cmf.size() != 3) throw DataError(file.string() + ": expected three colour matching functions");
  return cmf;
}

inline Spectrum load_illuminant(const std::string& name, const fs::path& dir = data_directory()) {
  const fs::path file = dir / ("illuminant_" + lower(canonical_illuminant(name)) + ".csv");
  if (!fs::exists(file)) throw ConfigError("missing data file " + file.string());
  std::vector<Spectrum> s = load_spectral_file(file.string());
  if (s.size() != 1) throw DataError(file.string() + ": expected one spectral column");
  return s.front();
}

/// Grey-surface mismatch problem for an illuminant change under the
/// Judd-Vos observer.
inline MismatchProblem illuminant_change_problem(const std::string& phi, const std::string& psi, double grey,
                                                 double step_nm, const fs::path& dir = data_directory()) {
  const std::vector<Spectrum> cmf = load_cmfs(dir);
  const WavelengthGrid grid = WavelengthGrid::visible(step_nm);
  return grey_problem(make_colour_system(cmf, load_illuminant(phi, dir), grid),
                      make_colour_system(cmf, load_illuminant(psi, dir), grid), grey);
}

enum class Experiment { resolution_sweep, convergence, comparison, export_mesh };

inline std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::resolution_sweep: return "resolution-sweep";
    case Experiment::convergence: return "convergence";
    case Experiment::comparison: return "compare";
    case Experiment::export_mesh: return "export-mesh";
  }
  return "unknown";
}

struct ExperimentConfig {
  std::string phi_illuminant = "D65";
  std::string psi_illuminant = "A";
  std::vector<double> greys{0.5};
  std::vector<double> steps{1.0};
  std::vector<MmvMethod> methods;
  /// LP direction counts.
  std::vector<std::size_t> samples{10000};
  /// Half-space direction counts.
  std::vector<std::size_t> halfspace_samples{1000000};
  std::size_t baseline_seeds = 10000;
  std::uint64_t seed = 1;
  fs::path data_dir = data_directory();
};

inline ExperimentConfig default_config(Experiment e) {
  ExperimentConfig c;
  switch (e) {
    case Experiment::resolution_sweep:
      c.steps = {0.5, 1.0, 2.0, 5.0, 10.0};
      c.samples = {100, 1000, 10000};
      c.methods = {MmvMethod::lp_orthonormal};
      break;
    case Experiment::convergence:
      c.greys = {0.5, 0.7, 0.9};
      c.samples = {100, 1000, 10000};
      c.halfspace_samples = {100000, 1000000};
      c.methods = {MmvMethod::lp_original, MmvMethod::lp_orthonormal, MmvMethod::halfspace_original,
                   MmvMethod::halfspace_orthonormal};
      break;
    case Experiment::comparison:
      c.methods = {MmvMethod::baseline5, MmvMethod::lp_orthonormal, MmvMethod::halfspace_orthonormal};
      break;
    case Experiment::export_mesh:
      c.methods = {MmvMethod::lp_orthonormal};
      break;
  }
  return c;
}

inline void validate(const ExperimentConfig& c) {
  canonical_illuminant(c.phi_illuminant);
  canonical_illuminant(c.psi_illuminant);
  if (c.greys.empty() || c.steps.empty() || c.methods.empty()) throw ConfigError("empty grey, step or method list");
  for (double g : c.greys)
    if (!(g > 0.0 && g < 1.0)) throw ConfigError("grey levels must lie in (0, 1)");
  for (double s : c.steps)
    if (!(s > 0.0 && s <= 50.0)) throw ConfigError("wavelength steps must lie in (0, 50] nm");
  for (std::size_t n : c.samples)
    if (n == 0) throw ConfigError("sample counts must be positive");
  for (std::size_t n : c.halfspace_samples)
    if (n == 0) throw ConfigError("half-space sample counts must be positive");
  if (c.baseline_seeds == 0) throw ConfigError("baseline seed count must be positive");
  for (const std::string& name : {c.phi_illuminant, c.psi_illuminant}) {
    const fs::path f = c.data_dir / ("illuminant_" + lower(canonical_illuminant(name)) + ".csv");
    if (!fs::exists(f)) throw ConfigError("missing data file " + f.string());
  }
  if (!fs::exists(c.data_dir / "cmf_judd_vos_1978_2deg.csv"))
    throw ConfigError("missing data file " + (c.data_dir / "cmf_judd_vos_1978_2deg.csv").string());
}

struct ExperimentRecord {
  std::string phi;
  std::string psi;
  double grey = 0.0;
  double step_nm = 0.0;
  MmvMethod method = MmvMethod::lp_orthonormal;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  double volume = 0.0;
  std::size_t points = 0;
  std::size_t binding_halfspaces = 0;
  bool degenerate = false;
  /// Transition count -> spectra; empty for the half-space methods.
  std::map<std::size_t, std::size_t> histogram;
  std::size_t spectra = 0;
  double seconds = 0.0;
  std::string mesh;
  Hull3 hull;

  std::string label() const;
};

struct ContainmentCheck {
  double grey = 0.0;
  MmvMethod inner = MmvMethod::baseline5;
  MmvMethod outer = MmvMethod::halfspace_orthonormal;
  /// Largest signed distance of an inner point outside the outer hull,
  /// relative to the outer hull's coordinate scale.
  double max_violation = 0.0;
  bool contained = false;
};

struct ExperimentSet {
  Experiment experiment = Experiment::comparison;
  ExperimentConfig config;
  std::vector<ExperimentRecord> records;
  std::vector<ContainmentCheck> containment;
};

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

inline std::string ExperimentRecord::label() const {
  return std::string(to_string(method)) + "_" + lower(phi) + "_" + lower(psi) + "_g" + format_double(grey) + "_s" +
         format_double(step_nm) + "_n" + std::to_string(samples);
}

namespace detail {

inline MmvResult run_method(const MismatchProblem& p, MmvMethod m, std::size_t n, std::uint64_t seed) {
  switch (m) {
    case MmvMethod::lp_original: return mmv_lp(p, sample_sphere(6, n, seed), false);
    case MmvMethod::lp_orthonormal: return mmv_lp(p, sample_sphere(6, n, seed), true);
    case MmvMethod::halfspace_original: return mmv_halfspace(p, n, seed, false);
    case MmvMethod::halfspace_orthonormal: return mmv_halfspace(p, n, seed, true);
    case MmvMethod::baseline5: return baseline_mmv(p, n, seed);
  }
  throw ConfigError("unknown method");
}

inline bool is_halfspace(MmvMethod m) {
  return m == MmvMethod::halfspace_original || m == MmvMethod::halfspace_orthonormal;
}

inline ExperimentRecord make_record(const ExperimentConfig& c, double grey, double step, const MmvResult& r,
                                    double seconds) {
  ExperimentRecord rec;
  rec.phi = canonical_illuminant(c.phi_illuminant);
  rec.psi = canonical_illuminant(c.psi_illuminant);
  rec.grey = grey;
  rec.step_nm = step;
  rec.method = r.method;
  rec.seed = c.seed;
  rec.samples = r.sample_count;
  rec.volume = r.volume;
  rec.points = r.points.size();
  rec.binding_halfspaces = r.binding_halfspaces;
  rec.degenerate = r.degenerate;
  rec.spectra = r.spectra.size();
  if (!r.spectra.empty()) rec.histogram = classify_transitions(r);
  rec.seconds = seconds;
  rec.hull = r.hull;
  return rec;
}

struct Timed {
  MmvResult result;
  double seconds;
};

inline Timed timed_run(const MismatchProblem& p, MmvMethod m, std::size_t n, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  MmvResult r = run_method(p, m, n, seed);
  return {std::move(r), std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
}

/// Sample count for a method: half-space list, baseline seeds or LP list.
inline std::size_t count_for(const ExperimentConfig& c, MmvMethod m, std::size_t lp_count, std::size_t hs_count) {
  if (is_halfspace(m)) return hs_count;
  if (m == MmvMethod::baseline5) return c.baseline_seeds;
  return lp_count;
}

}  // namespace detail

/// Largest outward distance of `points` from the hull's face planes, divided
/// by the hull's largest absolute coordinate.
inline double containment_violation(const Hull3& outer, const std::vector<Vec3>& points) {
  if (outer.faces.empty()) return std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (const Vec3& v : outer.vertices) scale = std::max(scale, v.cwiseAbs().maxCoeff());
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < outer.faces.size(); ++f) {
    const Vec3& n = outer.face_normals[f];
    const double d = n.dot(outer.vertices[static_cast<std::size_t>(outer.faces[f][0])]);
    for (const Vec3& x : points) worst = std::max(worst, n.dot(x) - d);
  }
  return worst / std::max(scale, 1e-300);
}

/// LP-method volumes per wavelength step and direction count.
inline ExperimentSet run_resolution_sweep(const ExperimentConfig& c) {
  validate(c);
  ExperimentSet set{Experiment::resolution_sweep, c, {}, {}};
  for (double grey : c.greys)
    for (double step : c.steps) {
      const MismatchProblem p = illuminant_change_problem(c.phi_illuminant, c.psi_illuminant, grey, step, c.data_dir);
      for (MmvMethod m : c.methods) {
        if (detail::is_halfspace(m) || m == MmvMethod::baseline5)
          throw ConfigError("resolution-sweep runs the LP methods only");
        for (std::size_t n : c.samples) {
          const detail::Timed t = detail::timed_run(p, m, n, c.seed);
          set.records.push_back(detail::make_record(c, grey, step, t.result, t.seconds));
        }
      }
    }
  return set;
}

/// Volumes against sample count on nested direction sets: LP methods over
/// `samples`, half-space methods over `halfspace_samples`.
inline ExperimentSet run_convergence(const ExperimentConfig& c) {
  validate(c);
  ExperimentSet set{Experiment::convergence, c, {}, {}};
  for (double grey : c.greys)
    for (double step : c.steps) {
      const MismatchProblem p = illuminant_change_problem(c.phi_illuminant, c.psi_illuminant, grey, step, c.data_dir);
      for (MmvMethod m : c.methods) {
        if (m == MmvMethod::baseline5) {
          const detail::Timed t = detail::timed_run(p, m, c.baseline_seeds, c.seed);
          set.records.push_back(detail::make_record(c, grey, step, t.result, t.seconds));
          continue;
        }
        for (std::size_t n : detail::is_halfspace(m) ? c.halfspace_samples : c.samples) {
          const detail::Timed t = detail::timed_run(p, m, n, c.seed);
          set.records.push_back(detail::make_record(c, grey, step, t.result, t.seconds));
        }
      }
    }
  return set;
}

/// Baseline, LP and half-space volumes on one problem per grey level, with
/// pairwise containment of the smaller methods' points in the larger hulls.
inline ExperimentSet run_comparison(const ExperimentConfig& c) {
  validate(c);
  ExperimentSet set{Experiment::comparison, c, {}, {}};
  const std::size_t lp_count = *std::max_element(c.samples.begin(), c.samples.end());
  const std::size_t hs_count = *std::max_element(c.halfspace_samples.begin(), c.halfspace_samples.end());
  auto rank = [](MmvMethod m) { return m == MmvMethod::baseline5 ? 0 : detail::is_halfspace(m) ? 2 : 1; };
  for (double grey : c.greys)
    for (double step : c.steps) {
      const MismatchProblem p = illuminant_change_problem(c.phi_illuminant, c.psi_illuminant, grey, step, c.data_dir);
      std::vector<MmvResult> results;
      for (MmvMethod m : c.methods) {
        const std::size_t n = detail::count_for(c, m, lp_count, hs_count);
        detail::Timed t = detail::timed_run(p, m, n, c.seed);
        set.records.push_back(detail::make_record(c, grey, step, t.result, t.seconds));
        results.push_back(std::move(t.result));
      }
      for (std::size_t i = 0; i < results.size(); ++i)
        for (std::size_t j = 0; j < results.size(); ++j) {
          if (rank(results[i].method) >= rank(results[j].method) || results[j].degenerate) continue;
          ContainmentCheck chk;
          chk.grey = grey;
          chk.inner = results[i].method;
          chk.outer = results[j].method;
          chk.max_violation = containment_violation(results[j].hull, results[i].points);
          chk.contained = chk.max_violation <= 1e-6;
          set.containment.push_back(chk);
        }
    }
  return set;
}

/// Single run whose hull is meant for export.
inline ExperimentRecord run_single(const ExperimentConfig& c) {
  validate(c);
  const MmvMethod m = c.methods.front();
  const double grey = c.greys.front();
  const double step = c.steps.front();
  const MismatchProblem p = illuminant_change_problem(c.phi_illuminant, c.psi_illuminant, grey, step, c.data_dir);
  const std::size_t n = detail::count_for(c, m, c.samples.front(), c.halfspace_samples.front());
  const detail::Timed t = detail::timed_run(p, m, n, c.seed);
  return detail::make_record(c, grey, step, t.result, t.seconds);
}

// ---- serialization ----

/// Triangle mesh in OBJ format, 1-based face indices, outward winding.
inline void write_obj(const Hull3& hull, std::ostream& out, const std::string& comment = {}) {
  if (!comment.empty()) out << "# " << comment << '\n';
  for (const Vec3& v : hull.vertices)
    out << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << '\n';
  for (const auto& f : hull.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

inline void export_mesh(const ExperimentRecord& rec, const fs::path& path) {
  if (rec.hull.faces.empty()) throw NumericalError("export_mesh: " + rec.label() + " has no hull");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_obj(rec.hull, out, rec.label());
  if (!out) throw ConfigError("write failed: " + path.string());
}

/// Vertices and faces of an OBJ triangle mesh; face normals recomputed.
inline Hull3 import_mesh(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  Hull3 h;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad vertex");
      h.vertices.push_back(v);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      for (int& i : f) {
        std::string tok;
        if (!(ls >> tok)) throw DataError(path.string() + ":" + std::to_string(lineno) + ": face needs 3 indices");
        i = std::stoi(tok.substr(0, tok.find('/'))) - 1;
        if (i < 0 || static_cast<std::size_t>(i) >= h.vertices.size())
          throw DataError(path.string() + ":" + std::to_string(lineno) + ": face index out of range");
      }
      h.faces.push_back(f);
    }
  }
  for (const auto& f : h.faces) {
    const Vec3 n = (h.vertices[static_cast<std::size_t>(f[1])] - h.vertices[static_cast<std::size_t>(f[0])])
                       .cross(h.vertices[static_cast<std::size_t>(f[2])] - h.vertices[static_cast<std::size_t>(f[0])]);
    h.face_normals.push_back(n.normalized());
  }
  return h;
}

inline nlohmann::ordered_json config_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["phi_illuminant"] = canonical_illuminant(c.phi_illuminant);
  j["psi_illuminant"] = canonical_illuminant(c.psi_illuminant);
  j["greys"] = c.greys;
  j["steps_nm"] = c.steps;
  std::vector<std::string> methods;
  for (MmvMethod m : c.methods) methods.emplace_back(to_string(m));
  j["methods"] = methods;
  j["samples"] = c.samples;
  j["halfspace_samples"] = c.halfspace_samples;
  j["baseline_seeds"] = c.baseline_seeds;
  j["seed"] = c.seed;
  return j;
}

inline nlohmann::ordered_json record_json(const ExperimentRecord& r) {
  nlohmann::ordered_json j;
  j["phi"] = r.phi;
  j["psi"] = r.psi;
  j["grey"] = r.grey;
  j["step_nm"] = r.step_nm;
  j["method"] = to_string(r.method);
  j["seed"] = r.seed;
  j["samples"] = r.samples;
  j["volume"] = r.volume;
  j["points"] = r.points;
  j["hull_vertices"] = r.hull.vertices.size();
  j["hull_faces"] = r.hull.faces.size();
  j["binding_halfspaces"] = r.binding_halfspaces;
  j["degenerate"] = r.degenerate;
  j["spectra"] = r.spectra;
  nlohmann::ordered_json hist = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.histogram) hist[std::to_string(k)] = v;
  j["transition_histogram"] = hist;
  j["mesh"] = r.mesh;
  return j;
}

inline std::string results_json(const ExperimentSet& set) {
  nlohmann::ordered_json j;
  j["experiment"] = to_string(set.experiment);
  j["config"] = config_json(set.config);
  j["records"] = nlohmann::ordered_json::array();
  for (const ExperimentRecord& r : set.records) j["records"].push_back(record_json(r));
  j["containment"] = nlohmann::ordered_json::array();
  for (const ContainmentCheck& c : set.containment)
    j["containment"].push_back({{"grey", c.grey},
                                {"inner", to_string(c.inner)},
                                {"outer", to_string(c.outer)},
                                {"max_violation", c.max_violation},
                                {"contained", c.contained}});
  return j.dump(2) + "\n";
}

/// One row per run.
inline std::string results_csv(const ExperimentSet& set) {
  std::ostringstream out;
  out << "experiment,phi,psi,grey,step_nm,method,seed,samples,volume,points,hull_vertices,hull_faces,"
         "binding_halfspaces,spectra,degenerate,mesh\n";
  for (const ExperimentRecord& r : set.records)
    out << to_string(set.experiment) << ',' << r.phi << ',' << r.psi << ',' << format_double(r.grey) << ','
        << format_double(r.step_nm) << ',' << to_string(r.method) << ',' << r.seed << ',' << r.samples << ','
        << format_double(r.volume) << ',' << r.points << ',' << r.hull.vertices.size() << ','
        << r.hull.faces.size() << ',' << r.binding_halfspaces << ',' << r.spectra << ','
        << (r.degenerate ? 1 : 0) << ',' << r.mesh << '\n';
  return out.str();
}

/// One row per (run, transition count).
inline std::string histogram_csv(const ExperimentSet& set) {
  std::ostringstream out;
  out << "phi,psi,grey,step_nm,method,samples,transitions,count\n";
  for (const ExperimentRecord& r : set.records)
    for (const auto& [k, v] : r.histogram)
      out << r.phi << ',' << r.psi << ',' << format_double(r.grey) << ',' << format_double(r.step_nm) << ','
          << to_string(r.method) << ',' << r.samples << ',' << k << ',' << v << '\n';
  return out.str();
}

inline std::string timings_json(const ExperimentSet& set) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const ExperimentRecord& r : set.records) j[r.label()] = r.seconds;
  return j.dump(2) + "\n";
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed: " + path.string());
}

/// results.json, results.csv, histograms.csv, timings.json and, when
/// `meshes` is set, one OBJ per non-degenerate run under meshes/.
inline void write_outputs(ExperimentSet& set, const fs::path& dir, bool meshes) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create " + dir.string() + ": " + ec.message());
  if (meshes) {
    fs::create_directories(dir / "meshes", ec);
    if (ec) throw ConfigError("cannot create " + (dir / "meshes").string() + ": " + ec.message());
    for (ExperimentRecord& r : set.records) {
      if (r.hull.faces.empty()) continue;
      r.mesh = "meshes/" + r.label() + ".obj";
      export_mesh(r, dir / r.mesh);
    }
  }
  write_text(dir / "results.json", results_json(set));
  write_text(dir / "results.csv", results_csv(set));
  write_text(dir / "histograms.csv", histogram_csv(set));
  write_text(dir / "timings.json", timings_json(set));
}

}  // namespace mmv
