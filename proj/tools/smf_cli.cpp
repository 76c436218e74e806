#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <smf/smf.hpp>

namespace {

using smf::ExperimentConfig;

// Settings shared by every subcommand; each maps onto an ExperimentConfig key.
const std::vector<std::pair<std::string, std::string>> kSettings = {
    {"algo", "algorithm id"},
    {"N", "filter order (N+1 coefficients)"},
    {"L", "data-reuse factor"},
    {"iterations", "iterations per trial"},
    {"threads", "worker threads (0 = hardware)"},
    {"input", "white | bpsk | ar1 | ar"},
    {"ar-rho", "AR(1) pole"},
    {"unit-power", "scale AR input to unit power"},
    {"ar-coeffs", "comma separated AR coefficients"},
    {"system", "random | preset name | file:<path>"},
    {"sigma-n2", "noise variance"},
    {"snr-db", "SNR against input power; overrides sigma-n2"},
    {"noise-bound", "uniform noise on [-B, B]"},
    {"w0", "zeros | ones | <value>"},
    {"delay", "equalizer reference delay"},
    {"warmup", "samples discarded before k = 0"},
    {"gammabar", "error bound"},
    {"gamma-policy", "fixed | timevarying | first_pass | emse_refined"},
    {"target-p", "target update rate for estimated bounds"},
    {"cv", "simple | general | zero | noise"},
    {"delta", "regularization"},
    {"mu", "step size"},
    {"alpha", "sparsity / feature weight"},
    {"beta", "l0 surrogate sharpness"},
    {"surrogate", "LF | MLF | GMF | MGMF"},
    {"eps", "discard threshold"},
    {"lambda", "RLS forgetting factor"},
    {"rls-delta", "RLS initialisation"},
    {"ds-gammabar", "data-selective gate for RLS variants (0 = off)"},
    {"papa-r", "SM-PAPA proportionate mix"},
    {"M-fraction", "fraction of coefficients updated"},
    {"rule", "largest_magnitude | random | fixed"},
    {"period", "forced-keep period for alcf / ailcf"},
    {"kind", "lowpass | highpass | lowpass_interp | highpass_interp | nested"},
    {"kind-param", "stride or nesting depth for --kind"},
    {"plain-mu", "LMS update w + mu e x"},
    {"number-system", "trinion | quaternion"},
    {"task", "sysid | equalizer | wind | beamforming"},
    {"steady-window", "iterations averaged for steady-state figures"},
};

struct Sub {
  std::string name, help, default_algo;
};

const std::vector<Sub> kSubs = {
    {"classic", "LMS / NLMS / AP / RLS baselines", "nlms"},
    {"sm", "set-membership NLMS and AP", "smnlms"},
    {"robustness", "SM-NLMS / SM-AP with g1, g2 robustness trace", "smnlms"},
    {"hc", "trinion and quaternion filters", "smnlms"},
    {"pu", "partial-update SM-AP", "ismpuap"},
    {"sparse", "sparsity-aware SM-AP and RLS", "is-smap"},
    {"feature", "feature LMS and low-complexity output", "flms"},
};

// hc accepts either the family ("smnlms") or the full name ("smqnlms").
std::string hc_algo(const std::string& algo, const std::string& number_system) {
  const char letter = number_system == "trinion" ? 't' : number_system == "quaternion" ? 'q' : 0;
  if (!letter) throw smf::ConfigError("number-system must be trinion or quaternion");
  std::string rest = algo, sm;
  if (rest.rfind("sm", 0) == 0) {
    sm = "sm";
    rest = rest.substr(2);
  }
  if (!rest.empty() && (rest[0] == 'q' || rest[0] == 't') && rest != "t") return algo;
  return sm + letter + rest;
}

void print_summary(const ExperimentConfig& c, const smf::ExperimentResult& r) {
  const auto& s = r.summary;
  std::cout << "scenario=" << (c.scenario.empty() ? "-" : c.scenario) << " algo=" << c.algo << " trials=" << c.trials
            << " iterations=" << c.iterations << "\n";
  std::cout << "update_rate=" << s.update_rate << " steady_update_rate=" << s.steady_update_rate
            << " steady_mse_db=" << s.steady_mse_db << " steady_mults=" << s.steady_mults
            << " total_updates=" << s.total_updates << " anomalies=" << s.anomalies
            << " regularized=" << s.regularized << "\n";
}

int run(const ExperimentConfig& c, const std::string& out_dir, const std::string& stem) {
  smf::validate(c);
  std::filesystem::create_directories(out_dir);
  const auto base = (std::filesystem::path(out_dir) / stem).string();
  auto res = smf::run_experiment(c);
  smf::export_csv(res.curve, base + "_curve.csv");
  std::cout << "wrote " << base << "_curve.csv\n";
  if (c.robustness) {
    auto trace = smf::run_trial(c, 0);
    smf::export_csv(trace, base + "_trace.csv");
    std::cout << "wrote " << base << "_trace.csv\n";
  }
  print_summary(c, res);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Set-membership adaptive filtering experiments"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string out, config;
  app.add_option("--seed", seed, "base RNG seed");
  app.add_option("--trials", trials, "Monte-Carlo trials");
  app.add_option("--out", out, "output directory (default $SMF_OUT_DIR or .)");
  app.add_option("--config", config, "key=value config file; flags override it")->check(CLI::ExistingFile);

  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> opts;
  for (const auto& [key, help] : kSettings) opts.emplace_back(key, app.add_option("--" + key, values[key], help));

  std::string hc_preset;
  std::string scenario_id;
  std::map<std::string, CLI::App*> subs;
  for (const auto& s : kSubs) {
    auto* sub = app.add_subcommand(s.name, s.help)->fallthrough();
    if (s.name == "hc")
      sub->add_option("--preset", hc_preset, "wind-synth | beamforming")
          ->check(CLI::IsMember({"wind-synth", "beamforming"}));
    subs[s.name] = sub;
  }
  auto* scen = app.add_subcommand("scenario", "run a named preset end to end")->fallthrough();
  scen->add_option("id", scenario_id, "preset id")->required()->check(CLI::IsMember(smf::scenario_ids()));
  auto* list = app.add_subcommand("list", "print preset ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (list->parsed()) {
    for (const auto& id : smf::scenario_ids()) std::cout << id << "\n";
    return 0;
  }

  try {
    ExperimentConfig c;
    std::string stem;
    std::string cmd;
    if (scen->parsed()) {
      c = smf::scenario_preset(scenario_id);
      stem = scenario_id;
      cmd = "scenario";
    } else {
      for (const auto& s : kSubs)
        if (subs[s.name]->parsed()) {
          cmd = s.name;
          c.algo = s.default_algo;
        }
      if (cmd == "hc" && !hc_preset.empty()) {
        c = smf::scenario_preset(hc_preset == "wind-synth" ? "ch4-wind-synth" : "ch4-beamforming");
        stem = c.scenario;
      } else if (cmd == "hc") {
        c.task = smf::Task::wind;
      }
      if (cmd == "robustness") c.robustness = true;
    }

    if (!config.empty())
      for (const auto& [k, v] : smf::load_config_file(config)) smf::apply_setting(c, k, v);
    for (const auto& [key, opt] : opts)
      if (opt->count() > 0) smf::apply_setting(c, key, values[key]);
    if (seed) c.seed = *seed;
    if (trials) c.trials = *trials;
    if (cmd == "hc" && c.task != smf::Task::beamforming) c.algo = hc_algo(c.algo, c.number_system);
    else if (cmd == "hc") c.algo = hc_algo(c.algo, "quaternion");
    if (cmd == "robustness" && c.algo != "smnlms" && c.algo != "smap")
      throw smf::ConfigError("robustness supports smnlms and smap");
    if (cmd == "pu" && c.algo != "smpuap" && c.algo != "ismpuap")
      throw smf::ConfigError("pu supports smpuap and ismpuap");
    if (cmd == "feature" && c.algo != "flms" && c.algo != "lcf" && c.algo != "ilcf" && c.algo != "alcf" &&
        c.algo != "ailcf")
      throw smf::ConfigError("feature supports flms, lcf, ilcf, alcf, ailcf");
    if (stem.empty()) stem = cmd + "_" + c.algo;
    if (out.empty()) out = c.out.empty() ? smf::default_output_dir() : c.out;
    return run(c, out, stem);
  } catch (const smf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
