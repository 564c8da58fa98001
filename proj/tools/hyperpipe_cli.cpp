// hyperpipe: run analyses from spec files, predict with saved models,
// regenerate reports, list registered elements.
//
// Exit codes: 0 ok, 1 runtime failure, 2 validation error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hyperpipe/archive.hpp"
#include "hyperpipe/data.hpp"
#include "hyperpipe/elements/registry.hpp"
#include "hyperpipe/engine.hpp"
#include "hyperpipe/error.hpp"
#include "hyperpipe/report.hpp"
#include "hyperpipe/results.hpp"
#include "hyperpipe/spec_file.hpp"

namespace {

using namespace hyperpipe;

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kValidation = 2;

struct RunArgs {
  std::string spec;
  std::optional<std::string> project_folder;
  std::optional<std::string> cache_folder;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> use_test_set;
  std::optional<int> verbosity;
  std::optional<std::size_t> jobs;
};

int cmd_run(const RunArgs& args) {
  AnalysisSpec spec = load_analysis_spec(args.spec);
  HyperpipeConfig& cfg = spec.config;
  // Precedence: flag > HYPERPIPE_CACHE > spec file.
  if (const char* env = std::getenv("HYPERPIPE_CACHE"); env && *env) cfg.cache_folder = env;
  if (args.project_folder) cfg.project_folder = *args.project_folder;
  if (args.cache_folder) cfg.cache_folder = *args.cache_folder;
  if (args.seed) cfg.seed = *args.seed;
  if (args.use_test_set) cfg.use_test_set = *args.use_test_set == "true" || *args.use_test_set == "1";
  if (args.verbosity) cfg.verbosity = *args.verbosity;
  if (args.jobs) cfg.jobs = *args.jobs;

  const Dataset data = load_csv_dataset(spec.data.path, spec.data.target_column, spec.data.kind);
  const auto fit = hyperpipe_fit(cfg, data);
  const auto out = cfg.output_folder();
  std::cout << "results: " << (out / "results.json").string() << '\n'
            << "report:  " << (out / "report.html").string() << '\n'
            << "model:   " << (out / fit.tree.model_path).string() << '\n';
  return kOk;
}

int cmd_predict(const std::string& model_path, const std::string& csv_path, const std::string& out_path) {
  const auto model = load_model(model_path);
  const auto x = load_csv_features(csv_path);
  const auto pred = model_predict(model.pipeline, x);
  std::string text = "prediction\n";
  char buf[32];
  for (double v : pred) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    text += buf;
  }
  write_file_atomic(out_path, text);
  return kOk;
}

int cmd_report(const std::string& results_path, std::optional<std::string> out_path) {
  const auto tree = read_results_json(results_path);
  const std::filesystem::path out =
      out_path ? std::filesystem::path(*out_path) : std::filesystem::path(results_path).parent_path() / "report.html";
  write_html_report(tree, out);
  std::cout << out.string() << '\n';
  return kOk;
}

const char* kind_of(const Capabilities& c) {
  if (c.modifies_targets) return "resampler";
  if (c.can_predict) return "estimator";
  return "transformer";
}

int cmd_list_elements() {
  const Registry& reg = default_registry();
  for (const auto& keyword : reg.keywords()) {
    const auto& meta = reg.metadata(keyword);
    std::cout << keyword << '\t' << kind_of(meta.capabilities) << '\t';
    for (std::size_t i = 0; i < meta.parameter_names.size(); ++i)
      std::cout << (i ? "," : "") << meta.parameter_names[i];
    std::cout << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nested cross-validated hyperparameter optimization of ML pipelines"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Fit, optimize and test the analysis described by a spec file");
  run_cmd->add_option("--spec", run.spec, "Analysis spec (JSON)")->required();
  run_cmd->add_option("--project-folder", run.project_folder, "Output root; artifacts go to <root>/<name>");
  run_cmd->add_option("--cache-folder", run.cache_folder, "Persistent transformer cache");
  run_cmd->add_option("--seed", run.seed, "Master seed");
  run_cmd->add_option("--use-test-set", run.use_test_set, "Score fold-best configs on the outer test split")
      ->check(CLI::IsMember({"true", "false", "1", "0"}));
  run_cmd->add_option("--verbosity", run.verbosity, "0 quiet, 1 per-config progress, 2 debug")->check(CLI::Range(0, 2));
  run_cmd->add_option("--jobs", run.jobs, "Concurrent outer folds (0 = hardware threads)");

  std::string model_path, csv_path, pred_out;
  auto* predict_cmd = app.add_subcommand("predict", "Predict with a saved model");
  predict_cmd->add_option("--model", model_path, "Model archive (.photon)")->required();
  predict_cmd->add_option("--input", csv_path, "CSV with a header row and the fit-time feature columns")->required();
  predict_cmd->add_option("--output", pred_out, "Output CSV, one prediction per row")->required();

  std::string results_path;
  std::optional<std::string> report_out;
  auto* report_cmd = app.add_subcommand("report", "Regenerate report.html from results.json");
  report_cmd->add_option("--results", results_path, "results.json of a finished run")->required();
  report_cmd->add_option("--output", report_out, "Defaults to report.html next to the results file");

  auto* list_cmd = app.add_subcommand("list-elements", "Print keyword, kind and parameters of each element");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*predict_cmd) return cmd_predict(model_path, csv_path, pred_out);
    if (*report_cmd) return cmd_report(results_path, report_out);
    if (*list_cmd) return cmd_list_elements();
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
