#include "atca/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "atca/error.hpp"
#include "atca/io.hpp"

namespace atca {

namespace {

constexpr const char* kSynopsis =
    "usage: atca <command> [options]\n"
    "\n"
    "commands:\n"
    "  synth     --config FILE --out CORPUS [--seed N] [--threads N]\n"
    "  extract   --corpus CORPUS --out FEATURES.csv\n"
    "  train     --corpus CORPUS --out BANK.json [--config FILE] [--user ID] [--seed N] [--threads N]\n"
    "  eval      --experiment NAME --out DIR [--corpus CORPUS | --config FILE]\n"
    "            [--normalization faithful|train-stats] [--seed N] [--threads N]\n"
    "  report    --out DIR\n"
    "  validate  [--corpus CORPUS | --config FILE] [--seed N]\n"
    "\n"
    "experiments: matrix system settings-count learning-curve persistent-attack\n"
    "ATCA_LOG sets the log level (trace, debug, info, warn, error, off).\n";

std::shared_ptr<spdlog::logger> Logger() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto l = std::make_shared<spdlog::logger>("atca", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_pattern("[%H:%M:%S.%e] %^%l%$ %v");
    const char* env = std::getenv("ATCA_LOG");
    l->set_level(env != nullptr ? spdlog::level::from_str(env) : spdlog::level::info);
    return l;
  }();
  return logger;
}

struct Options {
  std::string config;
  std::string corpus;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> experiments;
  std::string normalization;
  std::optional<std::size_t> threads;
  std::optional<UserId> user;
};

ExperimentConfig LoadConfig(const Options& o) {
  ExperimentConfig c = o.config.empty() ? DefaultExperimentConfig() : ReadConfig(o.config);
  if (!o.corpus.empty()) {
    c.corpus_path = o.corpus;
    c.population.reset();
  }
  if (o.seed) c.seed = *o.seed;
  c.eval.seed = c.seed;
  if (o.threads) c.eval.threads = *o.threads;
  if (!o.normalization.empty()) c.eval.normalization = ParseNormalizationMode(o.normalization);
  if (!o.experiments.empty()) {
    c.experiments.clear();
    for (const std::string& e : o.experiments) c.experiments.push_back(ParseExperiment(e));
    // Derived experiments need the matrix.
    bool derived = false;
    bool matrix = false;
    for (Experiment e : c.experiments) {
      derived |= e == Experiment::kSystem || e == Experiment::kSettingsCount;
      matrix |= e == Experiment::kMatrix;
    }
    if (derived && !matrix) c.experiments.insert(c.experiments.begin(), Experiment::kMatrix);
  }
  if (!o.out.empty()) c.output_dir = o.out;
  c.Validate();
  return c;
}

StrokeCorpus ObtainCorpus(const ExperimentConfig& c) {
  if (c.corpus_path) {
    Logger()->info("reading corpus {}", *c.corpus_path);
    return ReadCorpus(*c.corpus_path);
  }
  PopulationConfig p = *c.population;
  p.master_seed = c.seed;
  Logger()->info("generating {} users x {} settings", p.user_count, p.factors.size());
  return GeneratePopulation(p, c.eval.threads);
}

double Since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int Synth(const Options& o, std::ostream& out) {
  ExperimentConfig c = LoadConfig(o);
  if (!c.population) throw Error(ErrorCode::kInvalidConfig, "synth needs a population config");
  const auto t0 = std::chrono::steady_clock::now();
  const StrokeCorpus corpus = ObtainCorpus(c);
  WriteCorpus(corpus, o.out, FileStamp{ConfigHash(c), c.seed});
  Logger()->info("wrote {} strokes in {:.2f}s", corpus.size(), Since(t0));
  out << o.out << '\n';
  return 0;
}

int Extract(const Options& o, std::ostream& out) {
  FileStamp stamp;
  const StrokeCorpus corpus = ReadCorpus(o.corpus, &stamp);
  WriteFeatures(corpus, o.out, stamp);
  out << o.out << '\n';
  return 0;
}

int Train(const Options& o, std::ostream& out) {
  ExperimentConfig c = LoadConfig(o);
  const StrokeCorpus corpus = ObtainCorpus(c);
  const UserId user = o.user.value_or(corpus.Users().empty() ? 0 : corpus.Users().front());
  const auto t0 = std::chrono::steady_clock::now();
  const ClassifierBank bank = RegisterUser(corpus, user, c.registration, c.seed, c.eval.threads);
  Logger()->info("registered user {} ({} classifiers) in {:.2f}s", user, bank.entries.size(), Since(t0));
  WriteBank(bank, o.out, FileStamp{ConfigHash(c), c.seed});
  out << o.out << '\n';
  return 0;
}

int Eval(const Options& o, std::ostream& out) {
  ExperimentConfig c = LoadConfig(o);
  const StrokeCorpus corpus = ObtainCorpus(c);
  Logger()->info("config {} seed {} normalization {} threads {}", ConfigHash(c), c.seed,
                 ToString(c.eval.normalization), c.eval.threads);
  const auto t0 = std::chrono::steady_clock::now();
  const RunOutputs outputs = RunExperiments(corpus, c);
  Logger()->info("experiments finished in {:.1f}s", Since(t0));
  if (outputs.learning_curve) {
    for (std::size_t b = 0; b < outputs.learning_curve->counts.size(); ++b) {
      Logger()->debug("learning curve: {} positives, final fit {:.3f}s", outputs.learning_curve->counts[b],
                      outputs.learning_curve->train_seconds[b]);
    }
  }
  for (const auto& path : WriteReports(outputs, c, c.output_dir)) out << path.string() << '\n';
  return 0;
}

int Report(const Options& o, std::ostream& out) {
  std::ifstream in(std::filesystem::path(o.out) / "summary.json");
  if (!in) throw Error(ErrorCode::kIoError, "no summary.json in " + o.out);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("summary: ") + e.what());
  }
  if (j.value("schema", 0) != kSchemaVersion) throw Error(ErrorCode::kSchemaVersionMismatch, "summary schema");
  out << "config " << j.value("config_hash", "") << "  seed " << j.value("seed", 0ULL) << "  normalization "
      << j.value("normalization", "") << '\n';
  char line[160];
  if (j.contains("system")) {
    out << "\nsystem                 type        random EER        targeted EER\n";
    for (const auto& r : j["system"]) {
      std::snprintf(line, sizeof(line), "%-22s %-10s  %.3f (%.4f)    %.3f (%.4f)\n",
                    r["system"].get<std::string>().c_str(), r["type"].get<std::string>().c_str(),
                    r["random"]["mean"].get<double>(), r["random"]["std"].get<double>(),
                    r["targeted"]["mean"].get<double>(), r["targeted"]["std"].get<double>());
      out << line;
    }
  }
  if (j.contains("settings_count")) {
    out << "\nsettings-count (S-ATCA targeted EER)\n";
    for (const auto& p : j["settings_count"]) {
      std::snprintf(line, sizeof(line), "%-10s %-3s n=%zu {%s} %.3f\n", p["type"].get<std::string>().c_str(),
                    p["scenario"].get<std::string>().c_str(), p["n"].get<std::size_t>(),
                    p["subset"].get<std::string>().c_str(), p["targeted"]["mean"].get<double>());
      out << line;
    }
  }
  if (j.contains("learning_curve")) {
    const auto& lc = j["learning_curve"];
    out << "\nlearning curve (minutes, positives";
    for (const auto& [name, _] : lc["eer"].items()) out << ", " << name;
    out << ")\n";
    for (std::size_t b = 0; b < lc["minutes"].size(); ++b) {
      out << lc["minutes"][b].get<double>() << ' ' << lc["positives"][b].get<std::size_t>();
      for (const auto& [name, series] : lc["eer"].items()) {
        std::snprintf(line, sizeof(line), " %.3f", series[b].get<double>());
        out << line;
      }
      out << '\n';
    }
  }
  if (j.contains("persistent_attack")) {
    const auto& pa = j["persistent_attack"];
    out << "\npersistent attack: n=" << pa["settings"].get<std::size_t>()
        << " mean tries=" << pa["mean_tries"].get<double>() << " over " << pa["trials"].get<std::size_t>()
        << " trials\n";
  }
  return 0;
}

int Validate(const Options& o, std::ostream& out) {
  ExperimentConfig c = LoadConfig(o);
  const StrokeCorpus corpus = ObtainCorpus(c);
  const PopulationReport r = ValidatePopulation(corpus);
  out << "stability_margin " << r.stability_margin << "\nsensitivity_score " << r.sensitivity_score
      << "\nfeature_scale " << r.feature_scale << '\n';
  const bool ok = r.stability_margin > 0.0 && r.sensitivity_score >= 0.7;
  if (!ok) Logger()->error("population fails calibration targets (stability > 0, sensitivity >= 0.7)");
  return ok ? 0 : 1;
}

}  // namespace

int RunCommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"adaptive touch-screen authentication experiments", "atca"};
  app.require_subcommand(1);
  app.set_help_flag();
  Options o;

  auto seed = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { o.seed = v; }, "master seed");
  };
  auto threads = [&](CLI::App* sub) {
    sub->add_option_function<std::size_t>("--threads", [&](std::size_t v) { o.threads = v; }, "worker threads")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--config", o.config, "experiment config")->required();
  synth->add_option("--out", o.out, "corpus file")->required();
  seed(synth);
  threads(synth);

  CLI::App* extract = app.add_subcommand("extract", "write per-stroke feature vectors");
  extract->add_option("--corpus", o.corpus)->required();
  extract->add_option("--out", o.out)->required();

  CLI::App* train = app.add_subcommand("train", "register one user and write the classifier bank");
  train->add_option("--corpus", o.corpus)->required();
  train->add_option("--out", o.out)->required();
  train->add_option("--config", o.config);
  train->add_option_function<UserId>("--user", [&](UserId v) { o.user = v; });
  seed(train);
  threads(train);

  CLI::App* eval = app.add_subcommand("eval", "run evaluation experiments");
  eval->add_option("--experiment", o.experiments)
      ->check(CLI::IsMember({"matrix", "system", "settings-count", "learning-curve", "persistent-attack"}));
  eval->add_option("--out", o.out)->required();
  eval->add_option("--corpus", o.corpus);
  eval->add_option("--config", o.config);
  eval->add_option("--normalization", o.normalization)->check(CLI::IsMember({"faithful", "train-stats"}));
  seed(eval);
  threads(eval);

  CLI::App* report = app.add_subcommand("report", "print a summary of an eval output directory");
  report->add_option("--out", o.out, "eval output directory")->required();

  CLI::App* validate = app.add_subcommand("validate", "check population stability and sensitivity");
  validate->add_option("--corpus", o.corpus);
  validate->add_option("--config", o.config);
  seed(validate);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    err << "atca: " << e.what() << "\n\n" << kSynopsis;
    return 2;
  }

  try {
    if (synth->parsed()) return Synth(o, out);
    if (extract->parsed()) return Extract(o, out);
    if (train->parsed()) return Train(o, out);
    if (eval->parsed()) return Eval(o, out);
    if (report->parsed()) return Report(o, out);
    if (validate->parsed()) return Validate(o, out);
  } catch (const Error& e) {
    err << "atca: " << ErrorCodeName(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "atca: " << e.what() << '\n';
    return 1;
  }
  err << kSynopsis;
  return 2;
}

}  // namespace atca
