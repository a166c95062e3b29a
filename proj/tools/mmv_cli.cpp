// mmv: metamer mismatch volume experiments.
//
//   mmv compare --phi-illuminant F11 --psi-illuminant D65 --out runs/f11_d65
//   mmv convergence --grey 0.5,0.7,0.9 --samples 100,1000 --out runs/conv
//   mmv export-mesh --method halfspace_orthonormal --samples 1000000 --out hull.obj
//
// Exit codes: 0 success, 2 configuration or data error, 3 numerical failure.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmv/experiments.hpp"
#include "mmv/parallel.hpp"

namespace {

constexpr int kConfigFailure = 2;
constexpr int kNumericalFailure = 3;

struct Options {
  std::string phi;
  std::string psi;
  std::vector<double> greys;
  std::vector<double> steps;
  std::vector<std::string> methods;
  std::vector<std::size_t> samples;
  std::vector<std::size_t> halfspace_samples;
  std::optional<std::size_t> baseline_seeds;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 0;
};

void add_common(CLI::App* sub, Options& o, bool out_is_file) {
  sub->add_option("--phi-illuminant", o.phi, "Illuminant of the reference condition (D65, A, F11)");
  sub->add_option("--psi-illuminant", o.psi, "Illuminant of the test condition (D65, A, F11)");
  sub->add_option("--grey", o.greys, "Grey reflectance level(s) in (0, 1)")->delimiter(',');
  sub->add_option("--step-nm", o.steps, "Wavelength step(s) in nm")->delimiter(',');
  sub->add_option("--method", o.methods,
                  "lp_original, lp_orthonormal, halfspace_original, halfspace_orthonormal, baseline5")
      ->delimiter(',');
  sub->add_option("--samples", o.samples, "LP direction count(s)")->delimiter(',');
  sub->add_option("--halfspace-samples", o.halfspace_samples, "Half-space direction count(s)")->delimiter(',');
  sub->add_option("--baseline-seeds", o.baseline_seeds, "Random seeds for the five-transition baseline");
  sub->add_option("--seed", o.seed, "RNG seed");
  sub->add_option("--out", o.out, out_is_file ? "Output OBJ file" : "Output directory")->required();
  sub->add_option("--threads", o.threads, "Worker threads (0: all cores)");
}

mmv::ExperimentConfig make_config(mmv::Experiment e, const Options& o) {
  mmv::ExperimentConfig c = mmv::default_config(e);
  if (!o.phi.empty()) c.phi_illuminant = o.phi;
  if (!o.psi.empty()) c.psi_illuminant = o.psi;
  if (!o.greys.empty()) c.greys = o.greys;
  if (!o.steps.empty()) c.steps = o.steps;
  if (!o.methods.empty()) {
    c.methods.clear();
    for (const std::string& name : o.methods) {
      const auto m = mmv::parse_method(name);
      if (!m) throw mmv::ConfigError("unknown method '" + name + "'");
      c.methods.push_back(*m);
    }
  }
  if (!o.samples.empty()) c.samples = o.samples;
  if (!o.halfspace_samples.empty()) c.halfspace_samples = o.halfspace_samples;
  if (o.baseline_seeds) c.baseline_seeds = *o.baseline_seeds;
  if (o.seed) c.seed = *o.seed;
  return c;
}

int run(mmv::Experiment e, const Options& o) {
  mmv::set_thread_count(o.threads);
  const mmv::ExperimentConfig c = make_config(e, o);
  if (e == mmv::Experiment::export_mesh) {
    const mmv::ExperimentRecord rec = mmv::run_single(c);
    mmv::export_mesh(rec, o.out);
    std::cout << rec.label() << " volume " << mmv::format_double(rec.volume) << " -> " << o.out << '\n';
    return 0;
  }
  mmv::ExperimentSet set = e == mmv::Experiment::resolution_sweep ? mmv::run_resolution_sweep(c)
                           : e == mmv::Experiment::convergence    ? mmv::run_convergence(c)
                                                                  : mmv::run_comparison(c);
  mmv::write_outputs(set, o.out, e == mmv::Experiment::comparison);
  for (const mmv::ExperimentRecord& r : set.records)
    std::cout << r.label() << " volume " << mmv::format_double(r.volume) << '\n';
  for (const mmv::ContainmentCheck& chk : set.containment)
    std::cout << "containment " << mmv::to_string(chk.inner) << " in " << mmv::to_string(chk.outer) << " grey "
              << mmv::format_double(chk.grey) << ": " << (chk.contained ? "yes" : "no") << " (max violation "
              << mmv::format_double(chk.max_violation) << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metamer mismatch volume experiments"};
  app.require_subcommand(1);
  Options opt;
  std::optional<mmv::Experiment> chosen;
  for (mmv::Experiment e : {mmv::Experiment::resolution_sweep, mmv::Experiment::convergence,
                            mmv::Experiment::comparison, mmv::Experiment::export_mesh}) {
    const char* help = e == mmv::Experiment::resolution_sweep ? "LP volumes across wavelength steps"
                       : e == mmv::Experiment::convergence    ? "Volumes against sample count"
                       : e == mmv::Experiment::comparison     ? "Baseline vs LP vs half-space volumes"
                                                              : "Write one method's hull as OBJ";
    CLI::App* sub = app.add_subcommand(std::string(mmv::to_string(e)), help);
    add_common(sub, opt, e == mmv::Experiment::export_mesh);
    sub->callback([&chosen, e] { chosen = e; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigFailure;
  }

  try {
    return run(*chosen, opt);
  } catch (const mmv::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const mmv::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const mmv::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
}
