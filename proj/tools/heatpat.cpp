// heatpat command line: run the pipeline, inspect its artifacts, serve them.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "heatpat/artifacts.hpp"
#include "heatpat/error.hpp"
#include "heatpat/pipeline.hpp"
#include "heatpat/service.hpp"
#include "heatpat/synthetic.hpp"

using namespace heatpat;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitPipeline = 2;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InputError:
    case ErrorCode::ParseError:
    case ErrorCode::InvalidConfig:
    case ErrorCode::MissingArtifact:
    case ErrorCode::MissingMetadata:
    case ErrorCode::StaleLabeling: return kExitInput;
    default: return kExitPipeline;
  }
}

// Options shared by `run` and `sweep`. Values given on the command line
// override the config file.
struct ConfigFlags {
  std::string config_file;
  std::vector<std::string> inputs;
  std::string metadata;
  std::string partition;
  std::size_t k = 0;
  std::vector<std::size_t> sweep;
  std::uint64_t seed = 0;
  int max_iter = 0;
  int n_init = 0;
  int restarts = 0;
  double sigma = 0;
  int window_hours = 0;
  double eps_mad = 0;
  double mad_multiplier = 0;
  int max_gap_hours = 0;
  int max_total_missing_hours = 0;
  int stuck_run_hours = 0;
  std::string output_dir;

  void add_to(CLI::App& app) {
    app.add_option("-c,--config", config_file, "JSON config file");
    app.add_option("-i,--input", inputs, "readings CSV (repeatable)");
    app.add_option("--metadata", metadata, "building_id,category sidecar CSV");
    app.add_option("--partition", partition, "4-season or 3-season");
    app.add_option("-k,--k", k, "number of clusters");
    app.add_option("--sweep", sweep, "k range for the silhouette sweep, e.g. --sweep 2 8")->expected(2);
    app.add_option("--seed", seed);
    app.add_option("--max-iter", max_iter);
    app.add_option("--n-init", n_init, "k-shape initialisations per run");
    app.add_option("--restarts", restarts, "sweep runs per k");
    app.add_option("--sigma", sigma, "anomaly threshold multiplier");
    app.add_option("--window-hours", window_hours);
    app.add_option("--eps-mad", eps_mad);
    app.add_option("--mad-multiplier", mad_multiplier);
    app.add_option("--max-gap-hours", max_gap_hours);
    app.add_option("--max-total-missing-hours", max_total_missing_hours);
    app.add_option("--stuck-run-hours", stuck_run_hours);
    app.add_option("-o,--out", output_dir, "artifact store directory");
  }

  PipelineConfig resolve(const CLI::App& app) const {
    PipelineConfig c = config_file.empty() ? PipelineConfig{} : load_config(config_file);
    auto given = [&app](const char* name) { return app.count(name) > 0; };
    if (given("--input")) c.inputs.assign(inputs.begin(), inputs.end());
    if (given("--metadata")) c.metadata = metadata;
    if (given("--partition")) c.partition = partition;
    if (given("--k")) c.k = k;
    if (given("--sweep")) c.sweep = SweepRange{sweep[0], sweep[1]};
    if (given("--seed")) c.seed = seed;
    if (given("--max-iter")) c.max_iter = max_iter;
    if (given("--n-init")) c.n_init = n_init;
    if (given("--restarts")) c.restarts = restarts;
    if (given("--sigma")) c.sigma_multiplier = sigma;
    if (given("--window-hours")) c.cleaning.window_hours = window_hours;
    if (given("--eps-mad")) c.cleaning.eps_mad = eps_mad;
    if (given("--mad-multiplier")) c.cleaning.mad_multiplier = mad_multiplier;
    if (given("--max-gap-hours")) c.cleaning.max_gap_hours = max_gap_hours;
    if (given("--max-total-missing-hours")) c.cleaning.max_total_missing_hours = max_total_missing_hours;
    if (given("--stuck-run-hours")) c.cleaning.stuck_run_hours = stuck_run_hours;
    if (given("--out")) c.output_dir = output_dir;
    return c;
  }
};

void print_summary(const PipelineOutputs& out, const std::filesystem::path& dir) {
  const auto& m = out.manifest;
  const auto& n = m.counts;
  std::cout << "ingested " << n.ingested << ", rejected " << n.rejected << ", profiled " << n.profiled
            << ", degenerate " << n.degenerate << ", clustered " << n.clustered << ", abnormal " << n.abnormal
            << ", final " << n.final_clustered << "\n";
  std::cout << "k = " << m.k << " (" << m.k_source << ")";
  if (m.silhouette_initial) std::cout << ", silhouette " << *m.silhouette_initial;
  if (m.silhouette_final) std::cout << " -> " << *m.silhouette_final;
  std::cout << "\nfingerprint " << m.fingerprint << "\nartifacts in " << dir.string() << "\n";
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"District heating load pattern discovery"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  auto* run_cmd = app.add_subcommand("run", "clean, profile, cluster, remove anomalies, re-cluster");
  ConfigFlags run_flags;
  run_flags.add_to(*run_cmd);
  std::string write_config;
  run_cmd->add_option("--write-config", write_config, "save the resolved config and exit");

  auto* sweep_cmd = app.add_subcommand("sweep", "silhouette sweep over the profiles of a store");
  std::string sweep_store;
  SweepOptions sweep_opts;
  sweep_opts.seed = 1;
  sweep_opts.n_init = 10;
  std::string sweep_out;
  bool sweep_json = false;
  sweep_cmd->add_option("-s,--store", sweep_store, "artifact store")->required();
  sweep_cmd->add_option("--k-min", sweep_opts.k_min);
  sweep_cmd->add_option("--k-max", sweep_opts.k_max);
  sweep_cmd->add_option("--seed", sweep_opts.seed);
  sweep_cmd->add_option("--max-iter", sweep_opts.max_iter);
  sweep_cmd->add_option("--n-init", sweep_opts.n_init);
  sweep_cmd->add_option("--restarts", sweep_opts.restarts);
  sweep_cmd->add_flag("--json", sweep_json, "JSON instead of CSV");
  sweep_cmd->add_option("-o,--out", sweep_out, "output file (default stdout)");

  auto* detect_cmd = app.add_subcommand("detect", "flag abnormal profiles of a stored model");
  std::string detect_model;
  AnomalyOptions detect_opts;
  std::string detect_out;
  bool detect_json = false;
  detect_cmd->add_option("-m,--model", detect_model, "model JSON")->required();
  detect_cmd->add_option("--sigma", detect_opts.sigma_multiplier);
  detect_cmd->add_flag("--json", detect_json, "full report as JSON instead of CSV");
  detect_cmd->add_option("-o,--out", detect_out, "output file (default stdout)");

  auto* flag_cmd = app.add_subcommand("flag", "unsuitable control flags for a labeled model");
  std::string flag_store;
  std::string flag_labeling;
  std::string flag_out;
  flag_cmd->add_option("-s,--store", flag_store, "artifact store")->required();
  flag_cmd->add_option("-l,--labeling", flag_labeling, "labeling JSON (default: the store's)");
  flag_cmd->add_option("-o,--out", flag_out, "output file (default stdout)");

  auto* gen_cmd = app.add_subcommand("generate", "synthetic readings with ground truth");
  SyntheticSpec spec;
  std::string gen_out;
  std::string gen_truth;
  gen_cmd->add_option("--counts", spec.counts, "buildings per archetype: COC NSB TCO5 TCO7")->expected(4);
  gen_cmd->add_option("--noise", spec.noise);
  gen_cmd->add_option("--year", spec.year);
  gen_cmd->add_option("--scrambled", spec.scrambled);
  gen_cmd->add_option("--stuck-meters", spec.stuck_meters);
  gen_cmd->add_option("--long-gaps", spec.long_gaps);
  gen_cmd->add_option("--jumps", spec.jumps);
  gen_cmd->add_option("--short-gaps", spec.short_gaps_per_building);
  gen_cmd->add_option("--seed", spec.seed);
  gen_cmd->add_option("-o,--out", gen_out, "readings CSV")->required();
  gen_cmd->add_option("--truth", gen_truth, "ground truth CSV");

  auto* serve_cmd = app.add_subcommand("serve", "HTTP API over an artifact store");
  std::string serve_store;
  std::string host = "127.0.0.1";
  int port = 8080;
  serve_cmd->add_option("-s,--store", serve_store, "artifact store")->required();
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*run_cmd) {
      const auto config = run_flags.resolve(*run_cmd);
      config.validate();
      if (!write_config.empty()) {
        write_text_file(write_config, config_to_json(config));
        return 0;
      }
      const auto outputs = run(config);
      print_summary(outputs, config.output_dir);
    } else if (*sweep_cmd) {
      const auto profiles = profiles_from_json(read_text_file(std::filesystem::path(sweep_store) /
                                                              std::string(store::kProfiles)));
      const auto result = sweep(profiles, sweep_opts);
      if (sweep_json) {
        emit(sweep_out, sweep_to_json(result));
      } else {
        std::ostringstream ss;
        write_sweep_csv(ss, result);
        emit(sweep_out, ss.str());
      }
      std::cerr << "recommended k = " << result.recommended_k << "\n";
    } else if (*detect_cmd) {
      const auto model = model_from_json(read_text_file(detect_model));
      const auto report = detect(model, detect_opts);
      if (detect_json) {
        emit(detect_out, anomaly_report_to_json(report, detect_opts));
      } else {
        std::ostringstream ss;
        write_anomalies_csv(ss, report);
        emit(detect_out, ss.str());
      }
      std::cerr << report.flagged.size() << " of " << model.size() << " profiles flagged\n";
    } else if (*flag_cmd) {
      const std::filesystem::path dir(flag_store);
      const auto model = model_from_json(read_text_file(dir / std::string(store::kModelFinal)));
      CategoryTable categories;
      (void)profiles_from_json(read_text_file(dir / std::string(store::kProfiles)), &categories);
      const auto labeling =
          load_labeling(flag_labeling.empty() ? dir / std::string(store::kLabeling) : std::filesystem::path(flag_labeling), model);
      const auto flags = flag_unsuitable(model, labeling, categories);
      emit(flag_out, flags_csv(flags));
      const auto summary = summarize(flags);
      std::cerr << summary.total() << " unsuitable: COC " << summary.strategy_total(ControlStrategy::COC)
                << ", NSB " << summary.strategy_total(ControlStrategy::NSB) << ", TCO7 "
                << summary.strategy_total(ControlStrategy::TCO7) << ", TCO5 "
                << summary.strategy_total(ControlStrategy::TCO5) << "\n";
    } else if (*gen_cmd) {
      const auto data = generate_synthetic(spec);
      std::ostringstream readings;
      write_readings_csv(readings, data.series);
      write_text_file(gen_out, readings.str());
      if (!gen_truth.empty()) {
        std::ostringstream truth;
        truth << "building_id,archetype,category,fault\n";
        for (const auto& t : data.truth) {
          truth << t.building_id << ',' << to_string(t.archetype) << ',' << to_string(t.category) << ','
                << to_string(t.fault) << '\n';
        }
        write_text_file(gen_truth, truth.str());
      }
      std::cerr << data.series.size() << " buildings written to " << gen_out << "\n";
    } else if (*serve_cmd) {
      if (!serve(serve_store, host, port)) {
        std::cerr << "error: cannot listen on " << host << ':' << port << "\n";
        return kExitInput;
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
  return 0;
}
