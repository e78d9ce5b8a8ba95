// Command-line front end: simulate, fit, fit-avg, summarise, evaluate, moc.
//
// Exit codes: 0 success, 1 invalid input or configuration, 2 numerical failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "catmix/averaging.hpp"
#include "catmix/coca.hpp"
#include "catmix/dataset.hpp"
#include "catmix/error.hpp"
#include "catmix/io.hpp"
#include "catmix/metrics.hpp"
#include "catmix/parallel.hpp"
#include "catmix/serialize.hpp"
#include "catmix/simulate.hpp"
#include "catmix/summarize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace catmix;

namespace {

constexpr int kExitInvalid = 1;
constexpr int kExitNumerical = 2;

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

struct ModelFlags {
  std::size_t k = 20;
  double alpha0 = 0.05;
  double a = 2.0;
  bool varsel = false;
  std::size_t max_iter = 2000;
  double tol = 1e-6;
  std::uint64_t seed = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--k", k, "Cluster cap K (overfitted)")->capture_default_str();
    cmd->add_option("--alpha0", alpha0, "Dirichlet prior on mixture weights")->capture_default_str();
    cmd->add_option("--a", a, "Beta prior on variable inclusion")->capture_default_str();
    cmd->add_flag("--varsel", varsel, "Enable variable selection");
    cmd->add_option("--max-iter", max_iter, "Maximum CAVI iterations")->capture_default_str();
    cmd->add_option("--tol", tol, "Absolute ELBO change for convergence")->capture_default_str();
    cmd->add_option("--seed", seed, "Seed (base seed for multi-run commands)")->capture_default_str();
  }

  ModelConfig config() const {
    if (k < 2) throw ConfigError("--k must be at least 2");
    ModelConfig c;
    c.k_max = k;
    c.alpha0 = alpha0;
    c.a = a;
    c.variable_selection = varsel;
    c.max_iter = max_iter;
    c.elbo_tol = tol;
    c.seed = seed;
    c.validate();
    return c;
  }
};

struct SummaryFlags {
  std::string method = "voi_complete";
  double tau = 0.95;
  double medvedovic_cut = 0.01;

  void add(CLI::App* cmd) {
    cmd->add_option("--method", method, "medvedovic | voi_average | voi_complete")
        ->check(CLI::IsMember({"medvedovic", "voi_average", "voi_complete"}))
        ->capture_default_str();
    cmd->add_option("--tau", tau, "Variable kept if selected in more than tau of runs")
        ->capture_default_str();
    cmd->add_option("--medvedovic-cut", medvedovic_cut, "Tree cut at height 1 - cut")
        ->capture_default_str();
  }

  SummaryConfig config() const {
    SummaryConfig s;
    s.method = parse_summary_method(method);
    s.tau = tau;
    s.medvedovic_cut = medvedovic_cut;
    s.validate();
    return s;
  }
};

std::vector<std::string> obs_names_or_index(const CategoricalDataset& data) {
  std::vector<std::string> names(data.n_obs());
  for (std::size_t n = 0; n < names.size(); ++n) names[n] = data.obs_name(n);
  return names;
}

std::string run_file_name(std::size_t m) {
  std::ostringstream s;
  s << "run_" << std::setw(3) << std::setfill('0') << m << ".json";
  return s.str();
}

void write_summary(const fs::path& out, const SummaryClustering& summary,
                   const std::vector<std::string>& obs_names) {
  write_json(out / "summary.json", to_json(summary));
  save_labels(summary.labels, out / "labels.csv", obs_names);
  if (summary.selected_vars) {
    const auto& sel = *summary.selected_vars;
    write_json(out / "selected.json", json(std::vector<bool>(sel.begin(), sel.end())));
  }
}

SimulationDesign design_from_json(const json& j) {
  SimulationDesign d;
  try {
    d.n_obs = j.at("n_obs").get<std::size_t>();
    d.n_vars = j.at("n_vars").get<std::size_t>();
    d.n_relevant = j.value("n_relevant", d.n_vars);
    d.k_true = j.at("k_true").get<std::size_t>();
    d.cluster_sizes = j.at("cluster_sizes").get<std::vector<std::size_t>>();
    d.n_categories = j.value("n_categories", std::size_t{2});
    if (j.contains("beta_shape")) {
      const auto shape = j.at("beta_shape").get<std::vector<double>>();
      if (shape.size() != 2) throw DesignError("beta_shape needs two entries");
      d.beta_shape = {shape[0], shape[1]};
    }
    d.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw DesignError(std::string("malformed design file: ") + e.what());
  }
  return d;
}

std::vector<bool> read_selection(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
    if (j.is_object()) j = j.at("selected_vars");
    return j.get<std::vector<bool>>();
  } catch (const json::exception& e) {
    throw InputError("cannot read selected variables from " + path.string() + ": " + e.what());
  }
}

// Splices the key = value pairs of a --config file in front of the command
// line arguments of the subcommand, so flags given explicitly take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (file.empty()) return args;
  if (!fs::is_regular_file(file)) throw ConfigError("config file not found: " + file);

  std::vector<std::string> injected;
  for (const auto& item : CLI::ConfigINI().from_file(file)) {
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == "default"))
      throw ConfigError("sections are not supported in config files: " + item.fullname());
    std::string key = item.name;
    std::replace(key.begin(), key.end(), '_', '-');
    for (const auto& value : item.inputs) injected.push_back("--" + key + "=" + value);
  }
  const auto insert_at = args.empty() ? args.end() : args.begin() + 1;
  args.insert(insert_at, injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational Bayesian clustering of categorical data"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a labelled synthetic dataset");
  std::string design_arg;
  std::uint64_t sim_seed = 1;
  fs::path sim_out;
  bool seed_given = false;
  sim->add_option("--design", design_arg, "Design JSON file or preset name (sim2.1 ... sim3.5, cat)")
      ->required();
  sim->add_option("--seed", sim_seed, "Simulation seed")->capture_default_str();
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->add_option("--config", "Flat key = value file; explicit flags win");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Single variational fit");
  fs::path fit_data;
  fs::path fit_out;
  ModelFlags fit_flags;
  fit_cmd->add_option("--data", fit_data, "Data CSV")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--out", fit_out, "Output directory")->required();
  fit_flags.add(fit_cmd);
  fit_cmd->add_option("--config", "Flat key = value file; explicit flags win");

  // fit-avg
  auto* avg = app.add_subcommand("fit-avg", "Multi-run fit summarised through the co-clustering matrix");
  fs::path avg_data;
  fs::path avg_out;
  ModelFlags avg_flags;
  SummaryFlags avg_summary;
  std::size_t runs = 25;
  std::size_t workers = default_workers();
  bool pcm_csv = false;
  bool timing = false;
  avg->add_option("--data", avg_data, "Data CSV")->required()->check(CLI::ExistingFile);
  avg->add_option("--out", avg_out, "Output directory")->required();
  avg->add_option("--runs", runs, "Number of independent runs (M)")->capture_default_str();
  avg->add_option("--workers", workers, "Parallel fits (does not change any output)");
  avg->add_flag("--pcm-csv", pcm_csv, "Also write the co-clustering matrix as CSV");
  avg->add_flag("--timing", timing, "Write per-run wall times to runs/timing.csv");
  avg_flags.add(avg);
  avg_summary.add(avg);
  avg->add_option("--config", "Flat key = value file; explicit flags win");

  // summarise
  auto* summ = app.add_subcommand("summarise", "Summarise the runs written by fit-avg");
  summ->alias("summarize");
  fs::path runs_dir;
  fs::path summ_out;
  SummaryFlags summ_flags;
  summ->add_option("--runs-dir", runs_dir, "Directory of run_*.json files")->required()->check(CLI::ExistingDirectory);
  summ->add_option("--out", summ_out, "Output directory (default: print JSON)");
  summ_flags.add(summ);
  summ->add_option("--config", "Flat key = value file; explicit flags win");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Compare labels to ground truth");
  fs::path eval_labels, eval_truth, eval_selected, eval_relevant, eval_out;
  eval->add_option("--labels", eval_labels, "Labels CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--truth", eval_truth, "True labels CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--selected", eval_selected, "Selected variables JSON")->check(CLI::ExistingFile);
  eval->add_option("--relevant", eval_relevant, "True relevance mask CSV")->check(CLI::ExistingFile);
  eval->add_option("--out", eval_out, "Write report.json and report.csv here");
  eval->add_option("--config", "Flat key = value file; explicit flags win");

  // moc
  auto* moc_cmd = app.add_subcommand("moc", "Cluster-of-clusters analysis of several clusterings");
  std::vector<fs::path> moc_labels;
  fs::path moc_out;
  ModelFlags moc_flags;
  SummaryFlags moc_summary;
  std::size_t moc_runs = 25;
  std::size_t moc_workers = default_workers();
  moc_cmd->add_option("--labels", moc_labels, "Label CSV per source clustering")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->check(CLI::ExistingFile);
  moc_cmd->add_option("--out", moc_out, "Output directory")->required();
  moc_cmd->add_option("--runs", moc_runs, "Number of runs (M)")->capture_default_str();
  moc_cmd->add_option("--workers", moc_workers, "Parallel fits");
  moc_flags.add(moc_cmd);
  moc_summary.add(moc_cmd);
  moc_cmd->add_option("--config", "Flat key = value file; explicit flags win");

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitInvalid;
  }
  seed_given = sim->count("--seed") > 0;

  try {
    if (sim->parsed()) {
      SimulationDesign design;
      std::size_t k_init = 0;
      if (fs::exists(design_arg)) {
        design = design_from_json(json::parse(read_file(design_arg)));
        if (seed_given) design.seed = sim_seed;
      } else {
        const auto& preset = find_preset(design_arg);
        design = make_design(preset, sim_seed);
        k_init = preset.k_init;
      }
      const auto data = simulate(design);
      save_dataset(data.data, sim_out / "data.csv");
      save_labels(data.true_labels, sim_out / "labels.csv");
      save_mask(data.relevant_mask, sim_out / "relevant.csv", data.data.var_names());
      auto meta = simulation_metadata(design);
      meta["design"] = fs::exists(design_arg) ? "file" : design_arg;
      if (k_init) meta["k_init"] = k_init;
      write_json(sim_out / "metadata.json", meta);
      return 0;
    }

    if (fit_cmd->parsed()) {
      const auto cfg = fit_flags.config();
      const auto data = load_dataset(fit_data);
      const auto res = fit(data, cfg);
      write_json(fit_out / "fit.json", to_json(res, true));
      save_labels(res.labels, fit_out / "labels.csv", obs_names_or_index(data));
      return 0;
    }

    if (avg->parsed()) {
      if (runs == 0) throw ConfigError("--runs must be at least 1");
      const auto cfg = avg_flags.config();
      const auto scfg = avg_summary.config();
      const auto data = load_dataset(avg_data);
      const auto result = fit_average(data, cfg, runs, cfg.seed, scfg, workers);

      std::ostringstream times;
      times << "run,seed,wall_time\n";
      for (std::size_t m = 0; m < result.runs.size(); ++m) {
        write_json(avg_out / "runs" / run_file_name(m), to_json(result.runs[m], false));
        times << m << ',' << result.runs[m].config.seed << ',' << result.runs[m].wall_time << '\n';
      }
      if (timing) write_file_atomic(avg_out / "runs" / "timing.csv", times.str());
      save_pcm(result.pcm, avg_out / "pcm.bin");
      if (pcm_csv) save_pcm_csv(result.pcm, avg_out / "pcm.csv");
      write_summary(avg_out, result.summary, obs_names_or_index(data));
      json manifest;
      manifest["base_seed"] = cfg.seed;
      manifest["m_runs"] = runs;
      manifest["config"] = to_json(cfg);
      manifest["data"] = avg_data.string();
      manifest["method"] = to_string(scfg.method);
      manifest["tau"] = scfg.tau;
      manifest["medvedovic_cut"] = scfg.medvedovic_cut;
      write_json(avg_out / "manifest.json", manifest);
      return 0;
    }

    if (summ->parsed()) {
      const auto scfg = summ_flags.config();
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(runs_dir)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("run_", 0) == 0 && entry.path().extension() == ".json") files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      if (files.empty()) throw InputError("no run_*.json files in " + runs_dir.string());
      std::vector<FitResult> fits;
      bool selecting = true;
      for (const auto& f : files) {
        fits.push_back(fit_result_from_json(json::parse(read_file(f))));
        selecting = selecting && fits.back().config.variable_selection;
      }
      const auto result = summarize_runs(std::move(fits), scfg, selecting);
      if (summ_out.empty()) {
        std::cout << to_json(result.summary).dump(2) << "\n";
      } else {
        write_summary(summ_out, result.summary, {});
        save_pcm(result.pcm, summ_out / "pcm.bin");
      }
      return 0;
    }

    if (eval->parsed()) {
      const auto labels = load_labels(eval_labels).labels;
      const auto truth = load_labels(eval_truth).labels;
      auto report = evaluate_labels(labels, truth);
      if (!eval_selected.empty() || !eval_relevant.empty()) {
        if (eval_selected.empty() || eval_relevant.empty())
          throw ConfigError("--selected and --relevant must be given together");
        const auto score = f1_selection(read_selection(eval_selected), load_mask(eval_relevant));
        report.f1 = score.f1;
        report.precision = score.precision;
        report.recall = score.recall;
      }
      const auto j = to_json(report);
      std::cout << j.dump(2) << "\n";
      if (!eval_out.empty()) {
        write_json(eval_out / "report.json", j);
        write_file_atomic(eval_out / "report.csv", to_csv(report));
      }
      return 0;
    }

    if (moc_cmd->parsed()) {
      auto cfg = moc_flags.config();
      cfg.variable_selection = false;
      const auto scfg = moc_summary.config();
      std::vector<std::vector<int>> clusterings;
      std::vector<std::string> names;
      for (const auto& path : moc_labels) {
        auto file = load_labels(path);
        if (names.empty()) {
          names = file.obs_names;
        } else if (file.obs_names != names) {
          throw InputError(path.string() + " does not list the same observations in the same order");
        }
        clusterings.push_back(std::move(file.labels));
      }
      const auto moc = build_moc(clusterings);
      save_moc_csv(moc, moc_out / "moc.csv", names);
      const auto summary = cluster_moc(moc, cfg, moc_runs, cfg.seed, moc_workers, scfg);
      write_summary(moc_out, summary, names);
      return 0;
    }
  } catch (const RunFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.numerical() ? kExitNumerical : kExitInvalid;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
