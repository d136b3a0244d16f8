// metacenter: simulate, preprocess, train, eval, compare, gradcheck.
// Exit codes: 0 success, 1 runtime or numerical failure, 2 usage or
// configuration error.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "json_config.hpp"
#include "manifest.hpp"
#include "metacenter/checkpoint.hpp"
#include "metacenter/errors.hpp"
#include "metacenter/hull_io.hpp"
#include "metacenter/preprocess.hpp"
#include "metacenter/report.hpp"
#include "metacenter/seaway.hpp"
#include "metacenter/training.hpp"

namespace fs = std::filesystem;
using namespace metacenter;
using cli::RunManifest;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string command_line(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) s += ' ';
    s += argv[i];
  }
  return s;
}

// Hull selection shared by every command that needs the oracle.
struct HullOptions {
  std::string box;
  double mass = std::numeric_limits<double>::quiet_NaN();
  std::string file;
  double density = kSeawaterDensity;
};

void add_hull_options(CLI::App* app, HullOptions& h) {
  app->add_option("--box", h.box, "Box hull dimensions LxBxD in meters (e.g. 9.5x2.4x1.2)");
  app->add_option("--mass", h.mass, "Vessel mass in kg (required with --box)");
  app->add_option("--hull", h.file, "Hull JSON file (mesh or box shorthand)")
      ->check(CLI::ExistingFile);
  app->add_option("--water-density", h.density, "Water density in kg/m^3")
      ->capture_default_str();
}

std::array<double, 3> parse_box(const std::string& text) {
  std::vector<double> dims;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    double v = 0.0;
    const auto res = std::from_chars(part.data(), part.data() + part.size(), v);
    if (res.ec != std::errc() || res.ptr != part.data() + part.size() || !(v > 0.0)) dims.clear();
    else dims.push_back(v);
    if (dims.empty()) break;
  }
  if (dims.size() != 3) {
    throw ConfigurationError("--box expects LxBxD with three positive numbers, got '" + text + "'");
  }
  return {dims[0], dims[1], dims[2]};
}

// Hull from flags; without any hull flag, the hull recorded in the input's
// manifest; failing that, the default hull.
HullSpec resolve_hull(const HullOptions& h, const fs::path& input = {}) {
  const bool have_mass = !std::isnan(h.mass);
  HullSpec hull;
  if (!h.file.empty()) {
    hull = load_hull(h.file);
    if (have_mass) hull.mass = h.mass;
  } else if (!h.box.empty()) {
    if (!have_mass) throw ConfigurationError("--box requires --mass");
    const auto d = parse_box(h.box);
    hull = make_box_hull(d[0], d[1], d[2], h.mass, h.density);
  } else if (have_mass) {
    throw ConfigurationError("--mass requires --box or --hull");
  } else {
    const fs::path manifest = cli::manifest_path_for(input);
    if (!input.empty() && fs::exists(manifest)) {
      std::ifstream in(manifest);
      const auto j = nlohmann::json::parse(in, nullptr, false);
      if (j.is_object() && j.contains("hull")) return hull_from_json(j.at("hull"));
    }
    hull = default_hull();
  }
  validate_hull(hull);
  return hull;
}

// Train options shared by train and compare. Modes are kept as strings and
// converted after parsing.
struct TrainOptions {
  TrainConfig config;
  std::string train_feedback = "teacher-forced";
  std::string test_feedback = "closed-loop";

  TrainConfig resolve(const HullSpec& hull) {
    TrainConfig c = config;
    c.train_feedback = feedback_mode_from_string(train_feedback);
    c.test_feedback = feedback_mode_from_string(test_feedback);
    c.feedback_init = metacenter_cm(hull, AttitudeSample{});
    c.validate();
    return c;
  }
};

void add_train_options(CLI::App* app, TrainOptions& t) {
  auto& c = t.config;
  app->add_option("--seed", c.seed, "Seed for the split, initialization and batches")
      ->capture_default_str();
  app->add_option("--iterations", c.iterations, "Adam steps")->capture_default_str();
  app->add_option("--batch-size", c.batch_size, "Samples per step")->capture_default_str();
  app->add_option("--learning-rate", c.learning_rate, "Adam step size")->capture_default_str();
  app->add_option("--test-fraction", c.test_fraction, "Share of trials held out")
      ->capture_default_str();
  app->add_option("--eval-every", c.eval_every, "Iterations between loss-curve points")
      ->capture_default_str();
  app->add_option("--train-feedback", t.train_feedback,
                  "ts-grnn feedback while training: teacher-forced or closed-loop")
      ->capture_default_str();
  app->add_option("--test-feedback", t.test_feedback,
                  "ts-grnn feedback for test error: closed-loop or teacher-forced")
      ->capture_default_str();
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  return p.parent_path() / (p.stem().string() + suffix);
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  HullOptions hull;
  SeawaySpec spec;
  int trials = 10;
  std::string output;
};

int run_simulate(const SimulateArgs& a, const std::string& command) {
  const HullSpec hull = resolve_hull(a.hull);
  a.spec.validate();
  if (a.trials < 1) throw ConfigurationError("--trials must be >= 1");
  RunManifest manifest(command, {{"trials", a.trials},
                                 {"duration", a.spec.duration},
                                 {"rate", a.spec.rate},
                                 {"components", a.spec.components},
                                 {"roll_amplitude", a.spec.roll_amplitude},
                                 {"pitch_amplitude", a.spec.pitch_amplitude},
                                 {"yaw_amplitude", a.spec.yaw_amplitude},
                                 {"min_frequency", a.spec.min_frequency},
                                 {"max_frequency", a.spec.max_frequency},
                                 {"noise_std", a.spec.noise_std}});
  manifest.set_seeds({{"seaway", a.spec.seed}});
  manifest.add_extra("hull", hull_to_json(hull));
  const RawDataset data = generate_dataset(hull, a.spec, a.trials);
  ensure_parent(a.output);
  write_dataset_csv(a.output, data);
  manifest.add_output(a.output);
  manifest.write(cli::manifest_path_for(a.output));
  std::cout << "wrote " << data.size() << " samples in " << a.trials << " trials to " << a.output
            << '\n';
  return 0;
}

// -------------------------------------------------------------- preprocess

struct PreprocessArgs {
  HullOptions hull;
  FilterConfig filter;
  bool variance_first = false;
  std::string input;
  std::string output;
};

int run_preprocess(PreprocessArgs a, const std::string& command) {
  a.filter.smooth_first = !a.variance_first;
  a.filter.validate();
  const HullSpec hull = resolve_hull(a.hull, a.input);
  const RawDataset raw = read_dataset_csv(a.input);
  PreprocessReport report;
  const RawDataset clean = preprocess(raw, a.filter, oracle_labeler(hull), &report);
  for (const auto& s : report.skipped_trials) std::cerr << "warning: skipped " << s << '\n';
  if (clean.empty()) throw ConfigurationError("no trial survived preprocessing");

  RunManifest manifest(command, {{"gaussian_sigma", a.filter.gaussian_sigma},
                                 {"gaussian_radius", a.filter.radius()},
                                 {"variance_window", a.filter.variance_window},
                                 {"variance_k", a.filter.variance_k},
                                 {"drop_outliers", a.filter.drop_outliers},
                                 {"smooth_first", a.filter.smooth_first}});
  manifest.add_extra("hull", hull_to_json(hull));
  manifest.add_extra("flagged", report.flagged);
  manifest.add_extra("dropped", report.dropped);
  manifest.add_input(a.input);
  ensure_parent(a.output);
  write_dataset_csv(a.output, clean);
  manifest.add_output(a.output);
  manifest.write(cli::manifest_path_for(a.output));

  const double share = raw.empty() ? 0.0 : 100.0 * static_cast<double>(report.flagged) /
                                               static_cast<double>(raw.size());
  std::cout << "flagged " << report.flagged << " of " << raw.size() << " samples (" << std::fixed
            << std::setprecision(3) << share << "%)";
  if (a.filter.drop_outliers) std::cout << ", dropped " << report.dropped;
  std::cout << "\nwrote " << clean.size() << " samples to " << a.output << '\n';
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  HullOptions hull;
  TrainOptions train;
  std::string arch = "ts-grnn";
  std::string input;
  std::string output;
  bool svg = false;
};

int run_train(TrainArgs a, const std::string& command) {
  const NetworkKind kind = kind_from_tag(a.arch);
  const HullSpec hull = resolve_hull(a.hull, a.input);
  const TrainConfig config = a.train.resolve(hull);
  const RawDataset data = read_dataset_csv(a.input);
  const auto split = split_dataset(data, config.test_fraction, config.seed);
  const auto standardized = standardize(split.train, split.test, config.feedback_init);
  print_warnings(standardized.warnings);
  const TrainResult result = train(kind, standardized, config);

  const fs::path ckpt = a.output.empty() ? fs::path(std::string(to_tag(kind)) + ".json") : fs::path(a.output);
  ensure_parent(ckpt);
  RunManifest manifest(command, config.to_json());
  manifest.set_seeds({{"train", config.seed}});
  manifest.add_extra("architecture", std::string(to_tag(kind)));
  manifest.add_extra("train_trials", split.train_trials);
  manifest.add_extra("test_trials", split.test_trials);
  manifest.add_input(a.input);
  save_checkpoint(ckpt, result.model, config);
  manifest.add_output(ckpt);
  const fs::path curve = with_suffix(ckpt, ".curve.csv");
  write_loss_curve_csv(curve, result.curve);
  manifest.add_output(curve);
  if (a.svg) {
    const fs::path svg = with_suffix(ckpt, ".curve.svg");
    write_text_file(svg, loss_curve_svg(result.curve, display_name(kind)));
    manifest.add_output(svg);
  }
  manifest.write(cli::manifest_path_for(ckpt));

  std::cout << std::fixed << std::setprecision(3) << display_name(kind) << ": train MSE "
            << result.final_train_mse << " cm^2, test MSE " << result.final_test_mse
            << " cm^2 (RMSE " << std::sqrt(result.final_test_mse) << " cm)";
  if (kind == NetworkKind::ts_grnn) std::cout << ", test feedback " << to_string(config.test_feedback);
  std::cout << "\ncheckpoint " << ckpt.string() << '\n';
  return 0;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::string checkpoint;
  std::string input;
  std::string mode = "closed-loop";
  std::string profile = "error_profile.csv";
};

int run_eval(const EvalArgs& a, const std::string& command) {
  const FeedbackMode mode = feedback_mode_from_string(a.mode);
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const RawDataset data = read_dataset_csv(a.input);
  if (data.empty()) throw ConfigurationError("dataset " + a.input + " has no samples");

  std::vector<std::span<const AttitudeSample>> attitudes;
  std::vector<std::span<const MetacenterPosition>> targets;
  std::vector<std::vector<AttitudeSample>> att_store;
  std::vector<std::vector<MetacenterPosition>> label_store;
  std::vector<int> ids;
  for (const auto& trial : data.trials()) {
    ids.push_back(trial.front().trial);
    auto& at = att_store.emplace_back();
    auto& lb = label_store.emplace_back();
    for (const auto& s : trial) {
      at.push_back(s.attitude);
      lb.push_back(s.label);
    }
  }
  for (std::size_t i = 0; i < att_store.size(); ++i) {
    attitudes.emplace_back(att_store[i]);
    targets.emplace_back(label_store[i]);
  }
  const auto predictions = predict_sequences(ckpt.model, attitudes, mode, targets);

  // Squared error per coordinate, summed per step index across trials.
  std::vector<double> step_sum;
  std::vector<long> step_count;
  double total = 0.0;
  long total_n = 0;
  std::cout << std::fixed << std::setprecision(3);
  std::cout << "architecture " << to_tag(ckpt.model.kind);
  if (ckpt.model.kind == NetworkKind::ts_grnn) std::cout << ", mode " << to_string(mode);
  std::cout << '\n';
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    double trial_sum = 0.0;
    for (std::size_t s = 0; s < predictions[i].size(); ++s) {
      const auto& p = predictions[i][s];
      const auto& y = label_store[i][s];
      const double se =
          ((p.x - y.x) * (p.x - y.x) + (p.y - y.y) * (p.y - y.y) + (p.z - y.z) * (p.z - y.z)) / 3.0;
      if (s >= step_sum.size()) {
        step_sum.push_back(0.0);
        step_count.push_back(0);
      }
      step_sum[s] += se;
      ++step_count[s];
      trial_sum += se;
    }
    total += trial_sum;
    total_n += static_cast<long>(predictions[i].size());
    std::cout << "trial " << ids[i] << ": MSE "
              << trial_sum / static_cast<double>(predictions[i].size()) << " cm^2\n";
  }
  const double mse = total / static_cast<double>(total_n);
  std::cout << "overall: MSE " << mse << " cm^2, RMSE " << std::sqrt(mse) << " cm\n";

  std::ostringstream csv;
  csv << "step,trials,mse_cm2,rmse_cm\n" << std::setprecision(17);
  csv.unsetf(std::ios::floatfield);
  for (std::size_t s = 0; s < step_sum.size(); ++s) {
    const double m = step_sum[s] / static_cast<double>(step_count[s]);
    csv << s << ',' << step_count[s] << ',' << m << ',' << std::sqrt(m) << '\n';
  }
  ensure_parent(a.profile);
  write_text_file(a.profile, csv.str());

  RunManifest manifest(command, {{"mode", std::string(to_string(mode))}});
  manifest.add_extra("overall_mse_cm2", mse);
  manifest.add_input(a.checkpoint);
  manifest.add_input(a.input);
  manifest.add_output(a.profile);
  manifest.write(cli::manifest_path_for(a.profile));
  std::cout << "per-step error profile " << a.profile << '\n';
  return 0;
}

// ----------------------------------------------------------------- compare

struct CompareArgs {
  HullOptions hull;
  TrainOptions train;
  std::string input;
  std::string output = "report";
  int jobs = 1;
  bool svg = false;
};

int run_compare(CompareArgs a, const std::string& command) {
  if (a.jobs < 1) throw ConfigurationError("--jobs must be >= 1");
  const HullSpec hull = resolve_hull(a.hull, a.input);
  const TrainConfig config = a.train.resolve(hull);
  const RawDataset data = read_dataset_csv(a.input);
  const Comparison result = compare(data, config, a.jobs);

  const fs::path dir = a.output;
  fs::create_directories(dir);
  RunManifest manifest(command, config.to_json());
  manifest.set_seeds({{"train", config.seed}});
  manifest.add_extra("jobs", a.jobs);
  manifest.add_input(a.input);
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    const auto& run = result.runs[i];
    const std::string tag(to_tag(run.model.kind));
    const fs::path ckpt = dir / (tag + ".json");
    save_checkpoint(ckpt, run.model, config);
    manifest.add_output(ckpt);
    const fs::path curve = dir / (tag + ".curve.csv");
    write_loss_curve_csv(curve, run.curve);
    manifest.add_output(curve);
    if (a.svg) {
      const fs::path svg = dir / (tag + ".curve.svg");
      write_text_file(svg, loss_curve_svg(run.curve, display_name(run.model.kind)));
      manifest.add_output(svg);
    }
  }
  const std::string table = format_report_table(result.report);
  write_text_file(dir / "report.txt", table);
  write_text_file(dir / "report.json", report_to_json(result.report).dump(2) + "\n");
  manifest.add_output(dir / "report.txt");
  manifest.add_output(dir / "report.json");
  nlohmann::json walls = nlohmann::json::object();
  for (const auto& e : result.report.entries) walls[std::string(to_tag(e.kind))] = e.wall_seconds;
  manifest.add_extra("training_wall_seconds", walls);
  manifest.write(dir / "manifest.json");
  std::cout << table;
  return 0;
}

// --------------------------------------------------------------- gradcheck

struct GradcheckArgs {
  bool all = false;
  std::vector<std::string> archs;
  std::uint64_t seed = 0;
  int samples = 16;
  double step = 1e-5;
  double tolerance = 1e-4;
};

int run_gradcheck(const GradcheckArgs& a) {
  std::vector<NetworkKind> kinds;
  if (a.all) kinds.assign(kAllNetworkKinds.begin(), kAllNetworkKinds.end());
  for (const auto& tag : a.archs) kinds.push_back(kind_from_tag(tag));
  if (kinds.empty()) throw ConfigurationError("gradcheck needs --all or --arch");
  bool ok = true;
  for (const NetworkKind kind : kinds) {
    const auto r = check_gradients(kind, a.seed, a.samples, a.step);
    const bool pass = r.max_relative_error < a.tolerance;
    ok = ok && pass;
    std::cout << std::left << std::setw(8) << to_tag(kind) << " max relative error "
              << std::scientific << std::setprecision(3) << r.max_relative_error << " over "
              << r.parameters_checked << " parameters  " << (pass ? "ok" : "FAIL") << '\n';
  }
  return ok ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn a vessel's dynamic metacenter from its Euler angles"};
  app.set_version_flag("--version", METACENTER_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<cli::JsonConfig>(&app));
  app.set_config("--config", "", "JSON file of option values; keys mirror flag names");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a labeled attitude dataset");
  add_hull_options(simulate, sim.hull);
  simulate->add_option("--trials", sim.trials, "Number of trials")->capture_default_str();
  simulate->add_option("--duration", sim.spec.duration, "Seconds per trial")->capture_default_str();
  simulate->add_option("--rate", sim.spec.rate, "Sampling rate in Hz")->capture_default_str();
  simulate->add_option("--components", sim.spec.components, "Sinusoids per channel")
      ->capture_default_str();
  simulate->add_option("--roll-amplitude", sim.spec.roll_amplitude, "Roll bound in rad")
      ->capture_default_str();
  simulate->add_option("--pitch-amplitude", sim.spec.pitch_amplitude, "Pitch bound in rad")
      ->capture_default_str();
  simulate->add_option("--yaw-amplitude", sim.spec.yaw_amplitude, "Yaw bound in rad")
      ->capture_default_str();
  simulate->add_option("--min-frequency", sim.spec.min_frequency, "Lowest wave frequency in Hz")
      ->capture_default_str();
  simulate->add_option("--max-frequency", sim.spec.max_frequency, "Highest wave frequency in Hz")
      ->capture_default_str();
  simulate->add_option("--noise-std", sim.spec.noise_std, "Attitude noise in rad")
      ->capture_default_str();
  simulate->add_option("--seed", sim.spec.seed, "Seaway seed")->capture_default_str();
  simulate->add_option("-o,--output", sim.output, "Dataset CSV")->required();

  PreprocessArgs pre;
  auto* prep = app.add_subcommand("preprocess", "Smooth and outlier-filter a dataset");
  add_hull_options(prep, pre.hull);
  prep->add_option("-i,--input", pre.input, "Raw dataset CSV")->required()->check(CLI::ExistingFile);
  prep->add_option("-o,--output", pre.output, "Cleaned dataset CSV")->required();
  prep->add_option("--gaussian-sigma", pre.filter.gaussian_sigma, "Kernel sigma in samples")
      ->capture_default_str();
  prep->add_option("--gaussian-radius", pre.filter.gaussian_radius,
                   "Kernel radius in samples (default ceil(3 sigma))");
  prep->add_option("--variance-window", pre.filter.variance_window, "Odd window length")
      ->capture_default_str();
  prep->add_option("--variance-k", pre.filter.variance_k, "Outlier threshold in std devs")
      ->capture_default_str();
  prep->add_flag("--drop-outliers", pre.filter.drop_outliers,
                 "Remove flagged samples instead of replacing them");
  prep->add_flag("--variance-first", pre.variance_first,
                 "Run the variance filter before smoothing");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train one architecture");
  add_hull_options(train_cmd, tr.hull);
  add_train_options(train_cmd, tr.train);
  train_cmd->add_option("-i,--input", tr.input, "Dataset CSV")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--arch", tr.arch, "fc, rbf, grnn or ts-grnn")->capture_default_str();
  train_cmd->add_option("-o,--output", tr.output, "Checkpoint path (default <arch>.json)");
  train_cmd->add_flag("--svg", tr.svg, "Also render the loss curve as SVG");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  eval->add_option("--ckpt", ev.checkpoint, "Checkpoint JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("-i,--input", ev.input, "Dataset CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--mode", ev.mode, "ts-grnn feedback: closed-loop or teacher-forced")
      ->capture_default_str();
  eval->add_option("-o,--profile", ev.profile, "Per-step error profile CSV")->capture_default_str();

  CompareArgs cmp;
  auto* compare_cmd = app.add_subcommand("compare", "Train and compare all four architectures");
  add_hull_options(compare_cmd, cmp.hull);
  add_train_options(compare_cmd, cmp.train);
  compare_cmd->add_option("-i,--input", cmp.input, "Dataset CSV")->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("-o,--output", cmp.output, "Output directory")->capture_default_str();
  compare_cmd->add_option("--jobs", cmp.jobs, "Architectures trained in parallel")
      ->capture_default_str();
  compare_cmd->add_flag("--svg", cmp.svg, "Also render loss curves as SVG");

  GradcheckArgs gc;
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare backprop with finite differences");
  gradcheck->add_flag("--all", gc.all, "Check all four architectures");
  gradcheck->add_option("--arch", gc.archs, "Architecture tag (repeatable)");
  gradcheck->add_option("--seed", gc.seed, "Initialization and sample seed")->capture_default_str();
  gradcheck->add_option("--samples", gc.samples, "Random samples")->capture_default_str();
  gradcheck->add_option("--step", gc.step, "Finite-difference step")->capture_default_str();
  gradcheck->add_option("--tolerance", gc.tolerance, "Pass threshold")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const std::string command = command_line(argc, argv);
  try {
    if (*simulate) return run_simulate(sim, command);
    if (*prep) return run_preprocess(pre, command);
    if (*train_cmd) return run_train(tr, command);
    if (*eval) return run_eval(ev, command);
    if (*compare_cmd) return run_compare(cmp, command);
    if (*gradcheck) return run_gradcheck(gc);
  } catch (const ConfigurationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const TrainingError& e) {
    std::cerr << "training failed: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
