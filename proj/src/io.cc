#include "atca/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "atca/error.hpp"

namespace atca {

using nlohmann::json;

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(NormalSpec, mean, sd)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(HyperParams, horizontal_start_x_right, horizontal_start_x_left,
                                                horizontal_start_y, vertical_start_x, vertical_start_y_up,
                                                vertical_start_y_down, start_sd, horizontal_displacement,
                                                vertical_displacement, displacement_sd, lateral, lateral_sd, bow,
                                                positive_fraction, kappa, rho, kappa_noise, speed, speed_cv, jitter, pressure,
                                                pressure_sd, area, area_sd, points)

namespace {

[[noreturn]] void Fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + what);
}

std::string Hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string StampLine(const char* kind, const FileStamp& stamp) {
  return std::string("# ") + kind + " schema=" + std::to_string(kSchemaVersion) + " config_hash=" +
         stamp.config_hash + " seed=" + std::to_string(stamp.seed);
}

template <typename T>
T ParseNumber(std::string_view field, std::size_t line, const char* name) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    Fail(line, std::string("bad ") + name + " '" + std::string(field) + "'");
  }
  return value;
}

json TrainToJson(const TrainConfig& t) {
  return {{"c_grid", t.c_grid},
          {"gamma_grid", t.gamma_grid},
          {"tolerance", t.tolerance},
          {"max_iterations", t.max_iterations},
          {"inner_folds", t.inner_folds},
          {"max_search_samples", t.max_search_samples},
          {"weight_cap", t.weight_cap}};
}

TrainConfig TrainFromJson(const json& j) {
  TrainConfig t;
  t.c_grid = j.value("c_grid", t.c_grid);
  t.gamma_grid = j.value("gamma_grid", t.gamma_grid);
  t.tolerance = j.value("tolerance", t.tolerance);
  t.max_iterations = j.value("max_iterations", t.max_iterations);
  t.inner_folds = j.value("inner_folds", t.inner_folds);
  t.max_search_samples = j.value("max_search_samples", t.max_search_samples);
  t.weight_cap = j.value("weight_cap", t.weight_cap);
  return t;
}

json ModelToJson(const SvmModel& m) {
  json sv = json::array();
  for (const FeatureVector& v : m.support_vectors) sv.push_back(v);
  return {{"c", m.c},
          {"gamma", m.gamma},
          {"weight_pos", m.weight_pos},
          {"weight_neg", m.weight_neg},
          {"bias", m.bias},
          {"iterations", m.iterations},
          {"kkt_gap", m.kkt_gap},
          {"dual_objective", m.dual_objective},
          {"support_indices", m.support_indices},
          {"coef", m.coef},
          {"support_vectors", sv}};
}

SvmModel ModelFromJson(const json& j) {
  SvmModel m;
  m.c = j.at("c").get<double>();
  m.gamma = j.at("gamma").get<double>();
  m.weight_pos = j.at("weight_pos").get<double>();
  m.weight_neg = j.at("weight_neg").get<double>();
  m.bias = j.at("bias").get<double>();
  m.iterations = j.at("iterations").get<std::size_t>();
  m.kkt_gap = j.at("kkt_gap").get<double>();
  m.dual_objective = j.at("dual_objective").get<double>();
  m.support_indices = j.at("support_indices").get<std::vector<std::size_t>>();
  m.coef = j.at("coef").get<std::vector<double>>();
  for (const json& row : j.at("support_vectors")) m.support_vectors.push_back(row.get<FeatureVector>());
  if (m.coef.size() != m.support_vectors.size()) {
    throw Error(ErrorCode::kParseError, "model has " + std::to_string(m.coef.size()) + " coefficients but " +
                                            std::to_string(m.support_vectors.size()) + " support vectors");
  }
  return m;
}

std::string Slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

json ConfigJson(const ExperimentConfig& c, bool for_hash) {
  json j;
  if (c.population) {
    const PopulationConfig& p = *c.population;
    j["population"] = {{"user_count", p.user_count},
                       {"factors", p.factors},
                       {"horizontal_per_cell", p.horizontal_per_cell},
                       {"vertical_per_cell", p.vertical_per_cell},
                       {"hyper", p.hyper}};
  }
  if (c.corpus_path) j["corpus"] = *c.corpus_path;
  const RegistrationConfig& r = c.registration;
  j["registration"] = {{"range", {r.range_lo, r.range_hi}},
                       {"bins", r.bins},
                       {"sampled", r.sampled},
                       {"axis", std::string(1, r.axis == Axis::kX ? 'X' : 'Y')},
                       {"mode", ToString(r.mode)},
                       {"holdout_fraction", r.holdout_fraction},
                       {"factors", r.factors},
                       {"train", TrainToJson(r.train)}};
  const EvalConfig& e = c.eval;
  json types = json::array();
  for (StrokeType t : e.types) types.push_back(ToString(t));
  j["eval"] = {{"folds", e.folds},
               {"train", TrainToJson(e.train)},
               {"types", types},
               {"horizontal_rate", e.horizontal_rate},
               {"vertical_rate", e.vertical_rate}};
  j["normalization"] = ToString(e.normalization);
  json experiments = json::array();
  for (Experiment x : c.experiments) experiments.push_back(ToString(x));
  j["experiments"] = experiments;
  const LearningCurveSpec& l = c.learning_curve;
  j["learning_curve"] = {{"user", l.user},
                         {"type", ToString(l.type)},
                         {"family", ToString(l.family)},
                         {"classifier_setting", l.classifier_setting},
                         {"trial", l.trial},
                         {"budget_minutes", l.budget_minutes},
                         {"search_each_budget", l.search_each_budget}};
  j["persistent_attack"] = {{"settings", c.persistent_settings}, {"trials", c.persistent_trials}};
  j["seed"] = c.seed;
  if (!for_hash) {
    j["threads"] = e.threads;
    j["output_dir"] = c.output_dir;
  }
  return j;
}

}  // namespace

std::string_view ToString(Experiment e) {
  switch (e) {
    case Experiment::kMatrix:
      return "matrix";
    case Experiment::kSystem:
      return "system";
    case Experiment::kSettingsCount:
      return "settings-count";
    case Experiment::kLearningCurve:
      return "learning-curve";
    case Experiment::kPersistentAttack:
      return "persistent-attack";
  }
  return "?";
}

Experiment ParseExperiment(std::string_view text) {
  for (Experiment e : {Experiment::kMatrix, Experiment::kSystem, Experiment::kSettingsCount,
                       Experiment::kLearningCurve, Experiment::kPersistentAttack}) {
    if (ToString(e) == text) return e;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown experiment '" + std::string(text) + "'");
}

void ExperimentConfig::Validate() const {
  if (population.has_value() == corpus_path.has_value()) {
    throw Error(ErrorCode::kInvalidConfig, "config needs exactly one of 'population' or 'corpus'");
  }
  if (population) population->Validate();
  registration.Validate();
  eval.train.Validate();
  if (eval.folds < 2) throw Error(ErrorCode::kInvalidConfig, "need at least 2 folds");
  if (eval.horizontal_rate.empty() || eval.vertical_rate.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "stroke rates must not be empty");
  }
  for (const auto* rates : {&eval.horizontal_rate, &eval.vertical_rate}) {
    for (double r : *rates) {
      if (!(r > 0.0)) throw Error(ErrorCode::kInvalidConfig, "stroke rates must be positive");
    }
  }
  if (persistent_settings < 1 || persistent_trials < 1) {
    throw Error(ErrorCode::kInvalidConfig, "persistent attack needs n >= 1 and trials >= 1");
  }
}

ExperimentConfig DefaultExperimentConfig() {
  ExperimentConfig c;
  c.population = PopulationConfig{};
  c.eval.train.max_search_samples = 300;
  c.registration.train.max_search_samples = 300;
  return c;
}

std::string ConfigToJson(const ExperimentConfig& config) { return ConfigJson(config, false).dump(2) + "\n"; }

ExperimentConfig ConfigFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  try {
    if (j.contains("population")) {
      const json& p = j["population"];
      PopulationConfig pc;
      pc.user_count = p.value("user_count", pc.user_count);
      pc.factors = p.value("factors", pc.factors);
      pc.horizontal_per_cell = p.value("horizontal_per_cell", pc.horizontal_per_cell);
      pc.vertical_per_cell = p.value("vertical_per_cell", pc.vertical_per_cell);
      if (p.contains("hyper")) pc.hyper = p["hyper"].get<HyperParams>();
      c.population = pc;
    }
    if (j.contains("corpus")) c.corpus_path = j["corpus"].get<std::string>();
    if (j.contains("registration")) {
      const json& r = j["registration"];
      RegistrationConfig& rc = c.registration;
      if (r.contains("range")) {
        const auto range = r["range"].get<std::vector<double>>();
        if (range.size() != 2) throw Error(ErrorCode::kInvalidConfig, "registration.range needs [lo, hi]");
        rc.range_lo = range[0];
        rc.range_hi = range[1];
      }
      rc.bins = r.value("bins", rc.bins);
      rc.sampled = r.value("sampled", rc.sampled);
      const std::string axis = r.value("axis", std::string("Y"));
      if (axis != "X" && axis != "Y") throw Error(ErrorCode::kInvalidConfig, "registration.axis must be X or Y");
      rc.axis = axis == "X" ? Axis::kX : Axis::kY;
      if (r.contains("mode")) rc.mode = ParseTrainingMode(r["mode"].get<std::string>());
      rc.holdout_fraction = r.value("holdout_fraction", rc.holdout_fraction);
      rc.factors = r.value("factors", rc.factors);
      if (r.contains("train")) rc.train = TrainFromJson(r["train"]);
    }
    if (j.contains("eval")) {
      const json& e = j["eval"];
      EvalConfig& ec = c.eval;
      ec.folds = e.value("folds", ec.folds);
      if (e.contains("train")) ec.train = TrainFromJson(e["train"]);
      if (e.contains("types")) {
        ec.types.clear();
        for (const json& t : e["types"]) ec.types.push_back(ParseStrokeType(t.get<std::string>()));
      }
      ec.horizontal_rate = e.value("horizontal_rate", ec.horizontal_rate);
      ec.vertical_rate = e.value("vertical_rate", ec.vertical_rate);
    }
    if (j.contains("normalization")) {
      c.eval.normalization = ParseNormalizationMode(j["normalization"].get<std::string>());
    }
    if (j.contains("experiments")) {
      c.experiments.clear();
      for (const json& x : j["experiments"]) c.experiments.push_back(ParseExperiment(x.get<std::string>()));
    }
    if (j.contains("learning_curve")) {
      const json& l = j["learning_curve"];
      LearningCurveSpec& lc = c.learning_curve;
      lc.user = l.value("user", lc.user);
      if (l.contains("type")) lc.type = ParseStrokeType(l["type"].get<std::string>());
      if (l.contains("family")) lc.family = ParseTrainingMode(l["family"].get<std::string>());
      lc.classifier_setting = l.value("classifier_setting", lc.classifier_setting);
      lc.trial = l.value("trial", lc.trial);
      lc.budget_minutes = l.value("budget_minutes", lc.budget_minutes);
      lc.search_each_budget = l.value("search_each_budget", lc.search_each_budget);
    }
    if (j.contains("persistent_attack")) {
      c.persistent_settings = j["persistent_attack"].value("settings", c.persistent_settings);
      c.persistent_trials = j["persistent_attack"].value("trials", c.persistent_trials);
    }
    if (!j.contains("seed")) throw Error(ErrorCode::kInvalidConfig, "config must set 'seed'");
    c.seed = j["seed"].get<std::uint64_t>();
    c.eval.threads = j.value("threads", c.eval.threads);
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("config: ") + e.what());
  }
  c.eval.seed = c.seed;
  c.Validate();
  return c;
}

ExperimentConfig ReadConfig(const std::filesystem::path& path) { return ConfigFromJson(Slurp(path)); }

std::string ConfigHash(const ExperimentConfig& config) {
  const std::string canonical = ConfigJson(config, true).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return Hex64(h);
}

std::string FormatDouble(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

void WriteCorpus(const StrokeCorpus& corpus, std::ostream& out, const FileStamp& stamp) {
  out << StampLine("atca-corpus", stamp) << '\n';
  out << "user_id,setting_axis,setting_factor,stroke_id,point_index,t_ms,x,y,pressure,area\n";
  for (const RawStroke& s : corpus.strokes()) {
    const char axis = s.setting.axis == Axis::kX ? 'X' : 'Y';
    const std::string factor = FormatDouble(s.setting.factor);
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      const TouchPoint& p = s.points[i];
      out << s.user << ',' << axis << ',' << factor << ',' << s.stroke_id << ',' << i << ',' << FormatDouble(p.t)
          << ',' << FormatDouble(p.x) << ',' << FormatDouble(p.y) << ',' << FormatDouble(p.p) << ','
          << FormatDouble(p.a) << '\n';
    }
  }
}

void WriteCorpus(const StrokeCorpus& corpus, const std::filesystem::path& path, const FileStamp& stamp) {
  std::ostringstream ss;
  WriteCorpus(corpus, ss, stamp);
  Spit(path, ss.str());
}

namespace {

FileStamp ParseStamp(std::string_view line, std::string_view kind, std::size_t line_no) {
  const std::string prefix = "# " + std::string(kind) + " ";
  if (line.substr(0, prefix.size()) != prefix) Fail(line_no, "missing '" + std::string(kind) + "' header");
  std::istringstream fields{std::string(line.substr(prefix.size()))};
  FileStamp stamp;
  std::optional<int> schema;
  std::string token;
  while (fields >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) Fail(line_no, "bad header field '" + token + "'");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "schema") {
      schema = ParseNumber<int>(value, line_no, "schema");
    } else if (key == "config_hash") {
      stamp.config_hash = value;
    } else if (key == "seed") {
      stamp.seed = ParseNumber<std::uint64_t>(value, line_no, "seed");
    }
  }
  if (!schema) Fail(line_no, "header lacks schema version");
  if (*schema != kSchemaVersion) {
    throw Error(ErrorCode::kSchemaVersionMismatch, "schema " + std::to_string(*schema) + ", expected " +
                                                       std::to_string(kSchemaVersion));
  }
  return stamp;
}

}  // namespace

StrokeCorpus ReadCorpus(std::istream& in, FileStamp* stamp) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) Fail(1, "empty file, missing header");
  ++line_no;
  const FileStamp header = ParseStamp(line, "atca-corpus", line_no);
  if (stamp != nullptr) *stamp = header;
  if (!std::getline(in, line)) Fail(2, "missing column header");
  ++line_no;
  if (line != "user_id,setting_axis,setting_factor,stroke_id,point_index,t_ms,x,y,pressure,area") {
    Fail(line_no, "unexpected column header");
  }

  StrokeCorpus corpus;
  struct Pending {
    UserId user = 0;
    ScreenSetting setting;
    StrokeId id = 0;
    std::vector<TouchPoint> points;
    std::size_t first_line = 0;
  };
  std::optional<Pending> pending;
  auto flush = [&] {
    if (!pending) return;
    try {
      corpus.Add(ValidateStroke(std::move(pending->points), pending->user, pending->setting, pending->id));
    } catch (const Error& e) {
      Fail(pending->first_line, "stroke " + std::to_string(pending->id) + ": " + e.what());
    }
    pending.reset();
  };

  std::vector<std::string_view> f;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    f.clear();
    std::string_view rest = line;
    for (;;) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 10) Fail(line_no, "expected 10 fields, got " + std::to_string(f.size()));
    const auto user = ParseNumber<UserId>(f[0], line_no, "user_id");
    if (f[1] != "X" && f[1] != "Y") Fail(line_no, "bad setting_axis '" + std::string(f[1]) + "'");
    const ScreenSetting setting{f[1] == "X" ? Axis::kX : Axis::kY, ParseNumber<double>(f[2], line_no, "factor")};
    const auto id = ParseNumber<StrokeId>(f[3], line_no, "stroke_id");
    const auto index = ParseNumber<std::size_t>(f[4], line_no, "point_index");
    TouchPoint p;
    p.t = ParseNumber<double>(f[5], line_no, "t_ms");
    p.x = ParseNumber<double>(f[6], line_no, "x");
    p.y = ParseNumber<double>(f[7], line_no, "y");
    p.p = ParseNumber<double>(f[8], line_no, "pressure");
    p.a = ParseNumber<double>(f[9], line_no, "area");

    if (index == 0) {
      flush();
      pending = Pending{user, setting, id, {}, line_no};
    } else if (!pending || pending->id != id || pending->user != user || !(pending->setting == setting)) {
      Fail(line_no, "point continues no open stroke");
    } else if (index != pending->points.size()) {
      Fail(line_no, "point_index " + std::to_string(index) + " out of sequence");
    }
    pending->points.push_back(p);
  }
  flush();
  return corpus;
}

StrokeCorpus ReadCorpus(const std::filesystem::path& path, FileStamp* stamp) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return ReadCorpus(in, stamp);
}

std::string BankToJson(const ClassifierBank& bank, const FileStamp& stamp) {
  json entries = json::array();
  for (const BankEntry& e : bank.entries) {
    entries.push_back({{"setting", e.setting.Label()},
                       {"factor", e.setting.factor},
                       {"type", ToString(e.type)},
                       {"threshold", e.threshold},
                       {"scaler", {{"min", e.scaler.min}, {"max", e.scaler.max}}},
                       {"model", ModelToJson(e.model)}});
  }
  json j = {{"schema", kSchemaVersion},
            {"config_hash", stamp.config_hash},
            {"seed", stamp.seed},
            {"user", bank.user},
            {"mode", ToString(bank.mode)},
            {"factors", bank.factors},
            {"entries", entries}};
  return j.dump(1) + "\n";
}

ClassifierBank BankFromJson(const std::string& text, FileStamp* stamp) {
  ClassifierBank bank;
  try {
    const json j = json::parse(text);
    const int schema = j.at("schema").get<int>();
    if (schema != kSchemaVersion) {
      throw Error(ErrorCode::kSchemaVersionMismatch, "schema " + std::to_string(schema) + ", expected " +
                                                         std::to_string(kSchemaVersion));
    }
    if (stamp != nullptr) {
      stamp->config_hash = j.at("config_hash").get<std::string>();
      stamp->seed = j.at("seed").get<std::uint64_t>();
    }
    bank.user = j.at("user").get<UserId>();
    bank.mode = ParseTrainingMode(j.at("mode").get<std::string>());
    bank.factors = j.at("factors").get<std::vector<double>>();
    for (const json& e : j.at("entries")) {
      BankEntry entry;
      const ScreenSetting label = ParseSetting(e.at("setting").get<std::string>());
      entry.setting = {label.axis, e.at("factor").get<double>()};
      entry.type = ParseStrokeType(e.at("type").get<std::string>());
      entry.threshold = e.at("threshold").get<double>();
      entry.scaler.min = e.at("scaler").at("min").get<FeatureVector>();
      entry.scaler.max = e.at("scaler").at("max").get<FeatureVector>();
      entry.model = ModelFromJson(e.at("model"));
      bank.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("bank: ") + e.what());
  }
  for (double f : bank.factors) {
    for (StrokeType t : kStrokeTypes) {
      if (bank.Find(f, t) == nullptr) {
        throw Error(ErrorCode::kParseError, "bank lacks classifier for " +
                                                ScreenSetting{PrimaryAxis(t), f}.Label() + "/" +
                                                std::string(ToString(t)));
      }
    }
  }
  if (bank.entries.size() != bank.factors.size() * 2) {
    throw Error(ErrorCode::kParseError, "bank has " + std::to_string(bank.entries.size()) + " entries, expected " +
                                            std::to_string(bank.factors.size() * 2));
  }
  return bank;
}

void WriteBank(const ClassifierBank& bank, const std::filesystem::path& path, const FileStamp& stamp) {
  Spit(path, BankToJson(bank, stamp));
}

ClassifierBank ReadBank(const std::filesystem::path& path, FileStamp* stamp) {
  return BankFromJson(Slurp(path), stamp);
}

void WriteFeatures(const StrokeCorpus& corpus, const std::filesystem::path& path, const FileStamp& stamp) {
  std::ostringstream out;
  out << StampLine("atca-features", stamp) << '\n';
  out << "stroke_id,user_id,setting,type";
  for (std::string_view name : FeatureNames()) out << ',' << name;
  out << '\n';
  const std::vector<FeatureVector> features = ExtractFeatures(corpus.strokes());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const RawStroke& s = corpus.at(i);
    out << s.stroke_id << ',' << s.user << ',' << s.setting.Label() << ',' << ToString(s.stroke_type);
    for (double v : features[i]) out << ',' << FormatDouble(v);
    out << '\n';
  }
  Spit(path, out.str());
}

RunOutputs RunExperiments(const StrokeCorpus& corpus, const ExperimentConfig& config) {
  auto wants = [&](Experiment e) {
    return std::find(config.experiments.begin(), config.experiments.end(), e) != config.experiments.end();
  };
  EvalConfig eval = config.eval;
  eval.seed = config.seed;
  RunOutputs out;
  const bool need_matrix = wants(Experiment::kMatrix) || wants(Experiment::kSystem) ||
                           wants(Experiment::kSettingsCount);
  const bool need_folds = need_matrix || wants(Experiment::kLearningCurve);
  FoldAssignment folds;
  if (need_folds) folds = KFoldSplit(corpus, eval.folds, DeriveSeed({config.seed, 0x666f6c64UL}));
  if (need_matrix) out.matrix = ClassifierAttackMatrix(corpus, folds, eval);
  if (wants(Experiment::kSystem)) out.system = SystemEval(*out.matrix, eval);
  if (wants(Experiment::kSettingsCount)) {
    for (std::size_t ti = 0; ti < out.matrix->types().size(); ++ti) {
      out.settings_count.push_back({SettingsCountExperiment(*out.matrix, ti, Scenario::kI),
                                    SettingsCountExperiment(*out.matrix, ti, Scenario::kII)});
    }
  }
  if (wants(Experiment::kLearningCurve)) out.learning_curve = RunLearningCurve(corpus, folds, config.learning_curve, eval);
  if (wants(Experiment::kPersistentAttack)) {
    Rng rng(DeriveSeed({config.seed, 0x70657273UL}));
    out.persistent = PersistentAttackSim(config.persistent_settings, config.persistent_trials, rng);
  }
  return out;
}

namespace {

const char* KindName(AttackKind k) { return k == AttackKind::kRandom ? "random" : "targeted"; }

json StatsJson(const CellStats& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}};
}

}  // namespace

std::vector<std::filesystem::path> WriteReports(const RunOutputs& outputs, const ExperimentConfig& config,
                                                const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  const FileStamp stamp{ConfigHash(config), config.seed};
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const char* kind, const std::string& body) {
    const std::filesystem::path path = dir / name;
    Spit(path, StampLine(kind, stamp) + "\n" + body);
    written.push_back(path);
  };
  const char* norm = ToString(config.eval.normalization).data();

  json summary = {{"schema", kSchemaVersion},
                  {"config_hash", stamp.config_hash},
                  {"seed", stamp.seed},
                  {"normalization", norm},
                  {"score_convention", "accept when score >= threshold; higher is more legitimate"}};

  if (outputs.matrix) {
    const MatrixReport& m = *outputs.matrix;
    std::ostringstream cells;
    std::ostringstream raw;
    cells << "type,family,attack,classifier,source,label,mean,std,min,max\n";
    raw << "type,family,attack,classifier,source,user_id,trial,eer\n";
    json jm = json::array();
    for (std::size_t ti = 0; ti < m.types().size(); ++ti) {
      const std::string type(ToString(m.types()[ti]));
      for (TrainingMode fam : kFamilies) {
        for (AttackKind kind : kAttackKinds) {
          for (std::size_t x = 0; x < m.settings(); ++x) {
            for (std::size_t y = 0; y < m.settings(); ++y) {
              const CellStats s = m.Stats(ti, fam, kind, x, y);
              const std::string label = AttackSpec{kind, x, y}.Label();
              cells << type << ',' << FamilyName(fam) << '-' << SettingLetter(x) << ',' << KindName(kind) << ','
                    << SettingLetter(x) << ',' << SettingLetter(y) << ',' << label << ',' << FormatDouble(s.mean)
                    << ',' << FormatDouble(s.std) << ',' << FormatDouble(s.min) << ',' << FormatDouble(s.max)
                    << '\n';
              for (std::size_t u = 0; u < m.users().size(); ++u) {
                for (std::size_t i = 0; i < m.trials(); ++i) {
                  raw << type << ',' << FamilyName(fam) << '-' << SettingLetter(x) << ',' << KindName(kind) << ','
                      << SettingLetter(x) << ',' << SettingLetter(y) << ',' << m.users()[u] << ',' << i << ','
                      << FormatDouble(m.At(ti, fam, kind, x, y, u, i)) << '\n';
                }
              }
              jm.push_back({{"type", type},
                            {"classifier", FamilyName(fam) + "-" + SettingLetter(x)},
                            {"attack", label},
                            {"eer", StatsJson(s)}});
            }
          }
        }
      }
    }
    emit("matrix.csv", "atca-matrix", cells.str());
    emit("matrix_per_user.csv", "atca-matrix-per-user", raw.str());
    json settings = json::array();
    for (std::size_t s = 0; s < m.settings(); ++s) {
      settings.push_back({{"letter", std::string(1, SettingLetter(s))}, {"factor", m.factors()[s]}});
    }
    summary["settings"] = settings;
    summary["users"] = m.users().size();
    summary["trials"] = m.trials();
    summary["matrix"] = jm;
  }

  if (outputs.system) {
    const SystemReport& sys = *outputs.system;
    std::ostringstream csv;
    csv << "type,system,random_mean,random_std,targeted_mean,targeted_std,mean_inter_stroke_s,expected_reauth_s\n";
    json js = json::array();
    for (std::size_t ti = 0; ti < sys.types.size(); ++ti) {
      const std::string type(ToString(sys.types[ti]));
      for (const SystemRow& r : sys.rows[ti]) {
        csv << type << ',' << r.name << ',' << FormatDouble(r.random.mean) << ',' << FormatDouble(r.random.std)
            << ',' << FormatDouble(r.targeted.mean) << ',' << FormatDouble(r.targeted.std) << ','
            << FormatDouble(r.mean_inter_stroke_seconds) << ','
            << (r.expected_reauth_seconds ? FormatDouble(*r.expected_reauth_seconds) : std::string()) << '\n';
        json row = {{"type", type},
                    {"system", r.name},
                    {"random", StatsJson(r.random)},
                    {"targeted", StatsJson(r.targeted)},
                    {"mean_inter_stroke_s", r.mean_inter_stroke_seconds},
                    {"expected_reauth_s", nullptr}};
        if (r.expected_reauth_seconds) row["expected_reauth_s"] = *r.expected_reauth_seconds;
        js.push_back(row);
      }
    }
    emit("system.csv", "atca-system", csv.str());
    summary["system"] = js;
  }

  if (!outputs.settings_count.empty()) {
    std::ostringstream csv;
    csv << "type,scenario,n,subset,targeted_mean,targeted_std\n";
    json jc = json::array();
    const std::vector<StrokeType>& types = outputs.matrix->types();
    for (std::size_t ti = 0; ti < outputs.settings_count.size(); ++ti) {
      const std::string type(ToString(types[ti]));
      for (std::size_t sc = 0; sc < outputs.settings_count[ti].size(); ++sc) {
        const std::string scenario = sc == 0 ? "I" : "II";
        std::ostringstream series;
        series << "# n targeted_eer\n";
        for (const CountPoint& p : outputs.settings_count[ti][sc]) {
          std::string subset;
          for (std::size_t s : p.subset) subset += SettingLetter(s);
          csv << type << ',' << scenario << ',' << p.n << ',' << subset << ',' << FormatDouble(p.targeted.mean)
              << ',' << FormatDouble(p.targeted.std) << '\n';
          series << p.n << ' ' << FormatDouble(p.targeted.mean) << '\n';
          jc.push_back({{"type", type}, {"scenario", scenario}, {"n", p.n}, {"subset", subset},
                        {"targeted", StatsJson(p.targeted)}});
        }
        emit("settings_count_" + type + "_" + scenario + ".dat", "atca-series", series.str());
      }
    }
    emit("settings_count.csv", "atca-settings-count", csv.str());
    summary["settings_count"] = jc;
  }

  if (outputs.learning_curve) {
    const LearningCurve& lc = *outputs.learning_curve;
    std::ostringstream csv;
    csv << "minutes,positives";
    for (const std::string& a : lc.attacks) csv << ',' << a;
    csv << '\n';
    for (std::size_t b = 0; b < lc.minutes.size(); ++b) {
      csv << FormatDouble(lc.minutes[b]) << ',' << lc.counts[b];
      for (const auto& series : lc.eer) csv << ',' << FormatDouble(series[b]);
      csv << '\n';
    }
    emit("learning_curve.csv", "atca-learning-curve", csv.str());
    json jl = json::object();
    for (std::size_t a = 0; a < lc.attacks.size(); ++a) {
      std::ostringstream series;
      series << "# minutes eer\n";
      for (std::size_t b = 0; b < lc.minutes.size(); ++b) {
        series << FormatDouble(lc.minutes[b]) << ' ' << FormatDouble(lc.eer[a][b]) << '\n';
      }
      emit("learning_curve_" + lc.attacks[a] + ".dat", "atca-series", series.str());
      jl[lc.attacks[a]] = lc.eer[a];
    }
    summary["learning_curve"] = {{"minutes", lc.minutes}, {"positives", lc.counts}, {"eer", jl}};
  }

  if (outputs.persistent) {
    const PersistentAttackResult& pa = *outputs.persistent;
    std::ostringstream csv;
    std::ostringstream series;
    csv << "tries,trials\n";
    series << "# tries fraction\n";
    for (const auto& [tries, count] : pa.histogram) {
      csv << tries << ',' << count << '\n';
      series << tries << ' ' << FormatDouble(static_cast<double>(count) / static_cast<double>(pa.trials)) << '\n';
    }
    emit("persistent_attack.csv", "atca-persistent-attack", csv.str());
    emit("persistent_attack.dat", "atca-series", series.str());
    summary["persistent_attack"] = {{"settings", pa.settings}, {"trials", pa.trials}, {"mean_tries", pa.mean_tries}};
  }

  const std::filesystem::path summary_path = dir / "summary.json";
  Spit(summary_path, summary.dump(2) + "\n");
  written.push_back(summary_path);
  return written;
}

}  // namespace atca
