#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "atca/core.hpp"
#include "atca/eval.hpp"
#include "atca/pipeline.hpp"
#include "atca/synth.hpp"

namespace atca {

inline constexpr int kSchemaVersion = 1;

enum class Experiment { kMatrix, kSystem, kSettingsCount, kLearningCurve, kPersistentAttack };

std::string_view ToString(Experiment e);
Experiment ParseExperiment(std::string_view text);

struct ExperimentConfig {
  /// Exactly one of these is set.
  std::optional<PopulationConfig> population;
  std::optional<std::string> corpus_path;

  RegistrationConfig registration;
  EvalConfig eval;  ///< `threads` is runtime-only and not hashed
  std::vector<Experiment> experiments = {Experiment::kMatrix, Experiment::kSystem, Experiment::kSettingsCount,
                                         Experiment::kLearningCurve, Experiment::kPersistentAttack};
  LearningCurveSpec learning_curve;
  std::size_t persistent_settings = 5;
  std::size_t persistent_trials = 100000;
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  void Validate() const;
};

ExperimentConfig DefaultExperimentConfig();

std::string ConfigToJson(const ExperimentConfig& config);
/// Missing keys take default values. Throws kParseError / kInvalidConfig.
ExperimentConfig ConfigFromJson(const std::string& text);
ExperimentConfig ReadConfig(const std::filesystem::path& path);

/// 16 hex digits over the canonical JSON, excluding thread count and output directory.
std::string ConfigHash(const ExperimentConfig& config);

/// Metadata stamped into every emitted file.
struct FileStamp {
  std::string config_hash = "0000000000000000";
  std::uint64_t seed = 0;
};

/// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double v);

void WriteCorpus(const StrokeCorpus& corpus, std::ostream& out, const FileStamp& stamp);
void WriteCorpus(const StrokeCorpus& corpus, const std::filesystem::path& path, const FileStamp& stamp);
/// Throws kParseError (with line number) or kSchemaVersionMismatch.
StrokeCorpus ReadCorpus(std::istream& in, FileStamp* stamp = nullptr);
StrokeCorpus ReadCorpus(const std::filesystem::path& path, FileStamp* stamp = nullptr);

std::string BankToJson(const ClassifierBank& bank, const FileStamp& stamp);
ClassifierBank BankFromJson(const std::string& text, FileStamp* stamp = nullptr);
void WriteBank(const ClassifierBank& bank, const std::filesystem::path& path, const FileStamp& stamp);
ClassifierBank ReadBank(const std::filesystem::path& path, FileStamp* stamp = nullptr);

void WriteFeatures(const StrokeCorpus& corpus, const std::filesystem::path& path, const FileStamp& stamp);

/// Everything an `eval` run produces.
struct RunOutputs {
  std::optional<MatrixReport> matrix;
  std::optional<SystemReport> system;
  std::vector<std::vector<std::vector<CountPoint>>> settings_count;  ///< [type][scenario]
  std::optional<LearningCurve> learning_curve;
  std::optional<PersistentAttackResult> persistent;
};

/// Runs the selected experiments on `corpus`.
RunOutputs RunExperiments(const StrokeCorpus& corpus, const ExperimentConfig& config);

/// Writes CSV tables, two-column plot series and summary.json into `dir`.
/// Returns the paths written, in order.
std::vector<std::filesystem::path> WriteReports(const RunOutputs& outputs, const ExperimentConfig& config,
                                                const std::filesystem::path& dir);

}  // namespace atca
