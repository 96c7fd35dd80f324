// Acceptance run: prints one PASS/FAIL line per criterion, exits non-zero if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "atca/eval.hpp"
#include "atca/io.hpp"
#include "atca/roc.hpp"
#include "atca/synth.hpp"
#include "atca/transform.hpp"
#include "svm_oracle.hpp"

namespace fs = std::filesystem;
using namespace atca;

namespace {

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<Verdict> verdicts;

void Report(int id, std::string name, bool pass, std::string detail) {
  std::printf("%s %d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  verdicts.push_back({id, std::move(name), pass, std::move(detail)});
}

std::string Fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 ---------------------------------------------------------------------------

void TransformFidelity() {
  const auto t0 = Clock::now();
  RawStroke s;
  s.points = {{0, 10, 10, 0.5, 0.1}, {10, 60, 60, 0.5, 0.1}, {20, 110, 110, 0.5, 0.1}};
  const RawStroke y = ApplySetting(s, {Axis::kY, 0.8});
  const RawStroke x = ApplySetting(s, {Axis::kX, 1.2});
  const TouchPoint& ye = y.points.back();
  const TouchPoint& xe = x.points.back();
  const bool exact = ye.x == 110.0 && ye.y == 90.0 && xe.x == 130.0 && xe.y == 110.0 && y.points[0] == s.points[0] &&
                     x.points[0] == s.points[0];
  const double secs = Since(t0);
  Report(1, "transform fidelity", exact && secs < 1.0,
         Fmt("Y0.8 end (%g,%g), X1.2 end (%g,%g), %.4f s", ye.x, ye.y, xe.x, xe.y, secs));
}

// 2 ---------------------------------------------------------------------------

// The targeted attack in the classifier's own setting replays exactly the
// test positives, so any scoring function must give EER 0.5.
bool DiagonalConstruction(const StrokeCorpus& corpus, const FoldAssignment& folds, double* worst) {
  const std::vector<FeatureVector> features = ExtractFeatures(corpus.strokes());
  *worst = 0.0;
  for (const CellKey& key : corpus.Keys()) {
    for (std::size_t i = 0; i < folds.k; ++i) {
      std::vector<double> pos;
      std::vector<double> attack;
      for (std::size_t idx : folds.Fold(key, i)) pos.push_back(features[idx][2] - 0.3 * features[idx][9]);
      for (std::size_t idx : folds.Fold(key, i)) attack.push_back(features[idx][2] - 0.3 * features[idx][9]);
      *worst = std::max(*worst, std::abs(ComputeEer(pos, attack) - 0.5));
    }
  }
  return *worst <= 1e-9;
}

void DiagonalLaw(const StrokeCorpus& corpus, const ExperimentConfig& config, const MatrixReport& matrix) {
  const auto t0 = Clock::now();
  const FoldAssignment folds = KFoldSplit(corpus, config.eval.folds, DeriveSeed({config.seed, 0x666f6c64UL}));
  double construction = 0.0;
  const bool built = DiagonalConstruction(corpus, folds, &construction);
  const double secs = Since(t0);
  double worst_mean = 0.0;
  double worst_std = 0.0;
  for (std::size_t t = 0; t < matrix.types().size(); ++t) {
    for (TrainingMode fam : kFamilies) {
      for (std::size_t x = 0; x < matrix.settings(); ++x) {
        const CellStats s = matrix.Stats(t, fam, AttackKind::kTargeted, x, x);
        worst_mean = std::max(worst_mean, std::abs(s.mean - 0.5));
        worst_std = std::max(worst_std, s.std);
      }
    }
  }
  const bool pass = built && worst_mean <= 1e-9 && worst_std <= 1e-9 && secs < 10.0;
  Report(2, "diagonal law", pass,
         Fmt("trained matrix max|mean-0.5| %.3g max std %.3g over 20 diagonal cells; attack construction on default "
             "corpus max dev %.3g in %.2f s",
             worst_mean, worst_std, construction, secs));
}

// 3 ---------------------------------------------------------------------------

void EerOracle() {
  const auto t0 = Clock::now();
  Rng rng(20240521);
  std::normal_distribution<double> g(0, 1);
  std::uniform_int_distribution<int> coarse(0, 6);
  std::uniform_int_distribution<int> size(1, 60);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> pos(size(rng));
    std::vector<double> neg(size(rng));
    const bool ties = trial % 4 == 0;
    for (double& v : pos) v = ties ? coarse(rng) + 1 : g(rng) + 0.8;
    for (double& v : neg) v = ties ? coarse(rng) : g(rng);
    worst = std::max(worst, std::abs(ComputeEer(pos, neg) - oracle::BruteForceEer(pos, neg)));
  }
  const double secs = Since(t0);
  Report(3, "EER oracle", worst <= 1e-9 && secs < 5.0, Fmt("1000 score sets, max |diff| %.3g, %.3f s", worst, secs));
}

// 4 ---------------------------------------------------------------------------

void SvmCorrectness() {
  const auto t0 = Clock::now();
  Rng rng(4242);
  std::normal_distribution<double> g(0, 1);
  auto point = [](double a, double b) {
    FeatureVector v{};
    v[0] = a;
    v[1] = b;
    return v;
  };
  struct Fixture {
    std::vector<FeatureVector> x;
    std::vector<int> y;
    double c;
    double gamma;
  };
  std::vector<Fixture> fixtures;
  fixtures.push_back({{point(-1, 0), point(1, 0)}, {-1, 1}, 1e3, 0.5});
  fixtures.push_back({{point(0, 0), point(1, 0.5), point(0.2, 1), point(2, 2), point(2.5, 1), point(1.2, 1.6)},
                      {-1, -1, -1, 1, 1, 1},
                      10.0,
                      0.5});
  const double cs[] = {0.5, 2.0, 16.0};
  const double gammas[] = {0.1, 0.5, 2.0};
  for (int k = 0; k < 60; ++k) {
    Fixture f;
    const std::size_t n = 3 + k % 6;
    for (std::size_t i = 0; i < n; ++i) {
      const int label = i % 2 ? 1 : -1;
      f.x.push_back(point(g(rng) + 0.6 * label, g(rng)));
      f.y.push_back(label);
    }
    std::shuffle(f.y.begin(), f.y.end(), rng);
    f.c = cs[k % 3];
    f.gamma = gammas[(k / 3) % 3];
    fixtures.push_back(f);
  }
  double worst_decision = 0.0;
  std::size_t compared = 0;
  std::size_t skipped = 0;
  for (const Fixture& f : fixtures) {
    const auto sol = oracle::SolveDual(f.x, f.y, f.c, 1.0, 1.0, f.gamma);
    if (!sol) {
      ++skipped;
      continue;
    }
    ++compared;
    SvmParams params;
    params.c = f.c;
    params.gamma = f.gamma;
    params.tolerance = 1e-9;
    const SvmModel m = Train(f.x, f.y, params);
    for (double a = -3.0; a <= 3.0; a += 0.5) {
      for (double b = -3.0; b <= 3.0; b += 0.5) {
        worst_decision = std::max(worst_decision, std::abs(DecisionValue(m, point(a, b)) -
                                                           oracle::Decision(*sol, f.x, f.y, point(a, b), f.gamma)));
      }
    }
  }
  double worst_kkt = 0.0;
  double worst_eq = 0.0;
  const double kkt_c[] = {0.125, 0.5, 2.0, 8.0, 32.0, 128.0};
  const double kkt_g[] = {1.0 / 512, 1.0 / 128, 1.0 / 32, 1.0 / 8, 0.5, 2.0};
  for (int k = 0; k < 100; ++k) {
    std::vector<FeatureVector> x(20);
    std::vector<int> y(20);
    for (std::size_t i = 0; i < 20; ++i) {
      y[i] = i % 2 ? 1 : -1;
      for (double& v : x[i]) v = g(rng) + 0.4 * y[i];
    }
    std::shuffle(y.begin(), y.end(), rng);
    SvmParams params;  // default tolerance 1e-3
    params.c = kkt_c[k % 6];
    params.gamma = kkt_g[(k / 6) % 6];
    const SvmModel m = Train(x, y, params);
    const oracle::KktReport r = oracle::CheckKkt(m, x, y);
    worst_kkt = std::max(worst_kkt, r.max_violation);
    worst_eq = std::max(worst_eq, r.equality_residual);
  }
  const double secs = Since(t0);
  const bool pass = skipped == 0 && worst_decision <= 1e-4 && worst_kkt <= 1e-3 && worst_eq <= 1e-6 && secs < 30.0;
  Report(4, "SVM correctness",
         pass,
         Fmt("%zu fixtures (<= 8 points) max decision diff %.3g (%zu without oracle solution); 100 random 20-point "
             "problems max KKT residual %.3g, max |sum a y| %.3g; %.2f s",
             compared, worst_decision, skipped, worst_kkt, worst_eq, secs));
}

// 5, 6, 7 -----------------------------------------------------------------------

void SystemOrdering(const StrokeCorpus& corpus, const RunOutputs& out, double secs, std::size_t workers) {
  std::size_t min_cell = corpus.size();
  for (const CellKey& key : corpus.Keys()) min_cell = std::min(min_cell, corpus.Cell(key).size());
  const bool shape = corpus.Users().size() == 25 && corpus.Settings(StrokeType::kHorizontal).size() == 5 &&
                     corpus.Settings(StrokeType::kVertical).size() == 5 && min_cell >= 50;
  bool pass = shape && secs < 15 * 60;
  std::string detail;
  for (std::size_t t = 0; t < out.system->types.size(); ++t) {
    const auto& rows = out.system->rows[t];
    bool baseline_half = true;
    for (std::size_t x = 0; x < 5; ++x) baseline_half = baseline_half && rows[x].targeted.mean == 0.5;
    const double improved = rows[5].targeted.mean;
    const double atca = rows[6].targeted.mean;
    pass = pass && baseline_half && atca <= improved - 0.08;
    detail += Fmt("%s: S-Baseline TA %s, improved %.3f, S-ATCA %.3f (gap %.3f); ",
                  std::string(ToString(out.system->types[t])).c_str(), baseline_half ? "0.50 exactly" : "NOT 0.50",
                  improved, atca, improved - atca);
  }
  detail += Fmt("%zu users x %zu settings, min cell %zu; full run %.1f s with %zu workers", corpus.Users().size(),
                corpus.Settings(StrokeType::kHorizontal).size(), min_cell, secs, workers);
  Report(5, "system ordering", pass, detail);
}

void SettingsCountTrend(const RunOutputs& out) {
  bool pass = true;
  std::string detail;
  for (std::size_t t = 0; t < out.settings_count.size(); ++t) {
    for (std::size_t sc = 0; sc < out.settings_count[t].size(); ++sc) {
      const auto& curve = out.settings_count[t][sc];
      detail += Fmt("%s-%s", std::string(ToString(out.system->types[t])).c_str(), sc == 0 ? "I" : "II");
      for (std::size_t i = 0; i < curve.size(); ++i) {
        detail += Fmt(" %.3f", curve[i].targeted.mean);
        if (i > 0 && curve[i].targeted.mean > curve[i - 1].targeted.mean + 0.02) pass = false;
      }
      detail += "; ";
    }
  }
  detail += "max allowed rise per step 0.02";
  Report(6, "settings-count trend", pass, detail);
}

void LearningCurveStability(const RunOutputs& out, double secs) {
  const LearningCurve& lc = *out.learning_curve;
  double worst = 0.0;
  std::string worst_label;
  std::size_t checked = 0;
  for (std::size_t b = 0; b < lc.counts.size(); ++b) {
    if (lc.counts[b] <= 30) continue;
    ++checked;
    for (std::size_t a = 0; a < lc.attacks.size(); ++a) {
      const double d = std::abs(lc.eer[a][b] - lc.eer[a].back());
      if (d > worst) {
        worst = d;
        worst_label = Fmt("%s at %zu strokes", lc.attacks[a].c_str(), lc.counts[b]);
      }
    }
  }
  const double train = *std::max_element(lc.train_seconds.begin(), lc.train_seconds.end());
  const bool pass = checked > 0 && worst < 0.02 && train < 1.0 && secs < 120.0;
  std::string counts;
  for (std::size_t c : lc.counts) counts += Fmt("%zu ", c);
  Report(7, "learning-curve stabilization", pass,
         Fmt("counts %smax |EER(t)-EER(final)| beyond 30 strokes %.3f (%s); slowest fit %.3f s; %.1f s",
             counts.c_str(), worst, worst_label.empty() ? "-" : worst_label.c_str(), train, secs));
}

// 8 ---------------------------------------------------------------------------

void PersistentAttack() {
  const auto t0 = Clock::now();
  Rng rng(DeriveSeed({1, 0x70657273UL}));
  const PersistentAttackResult r = PersistentAttackSim(5, 100000, rng);
  const double secs = Since(t0);
  Report(8, "persistent-attack expectation", r.mean_tries >= 4.9 && r.mean_tries <= 5.1 && secs < 5.0,
         Fmt("n=5, 1e5 trials, mean tries %.4f, %.3f s", r.mean_tries, secs));
}

// 9 ---------------------------------------------------------------------------

struct FullRun {
  StrokeCorpus corpus;
  RunOutputs outputs;
  double seconds = 0.0;
  double learning_curve_seconds = 0.0;
};

FullRun RunPipeline(ExperimentConfig config, std::size_t threads, const fs::path& dir) {
  FullRun run;
  const auto t0 = Clock::now();
  fs::remove_all(dir);
  fs::create_directories(dir);
  config.eval.threads = threads;
  config.eval.seed = config.seed;
  config.output_dir = dir.string();
  const FileStamp stamp{ConfigHash(config), config.seed};
  PopulationConfig pc = *config.population;
  pc.master_seed = config.seed;
  run.corpus = GeneratePopulation(pc, threads);
  WriteCorpus(run.corpus, dir / "corpus.csv", stamp);
  // The learning curve is timed on its own for criterion 7.
  ExperimentConfig rest = config;
  rest.experiments.erase(std::remove(rest.experiments.begin(), rest.experiments.end(), Experiment::kLearningCurve),
                         rest.experiments.end());
  run.outputs = RunExperiments(run.corpus, rest);
  ExperimentConfig lc_only = config;
  lc_only.experiments = {Experiment::kLearningCurve};
  const auto t1 = Clock::now();
  run.outputs.learning_curve = RunExperiments(run.corpus, lc_only).learning_curve;
  run.learning_curve_seconds = Since(t1);
  WriteReports(run.outputs, config, dir);
  run.seconds = Since(t0);
  return run;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void Determinism(const fs::path& a, const fs::path& b, std::size_t wa, std::size_t wb) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  std::size_t differing = 0;
  std::string first;
  for (const std::string& n : names) {
    if (!fs::exists(b / n) || Slurp(a / n) != Slurp(b / n)) {
      ++differing;
      if (first.empty()) first = n;
    }
  }
  std::size_t count_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++count_b;
  const bool pass = differing == 0 && count_b == names.size() && !names.empty();
  Report(9, "determinism", pass,
         Fmt("%zu files compared between %zu-worker and %zu-worker runs, %zu differ%s%s", names.size(), wa, wb,
             differing, first.empty() ? "" : ", first: ", first.c_str()));
}

}  // namespace

int main(int argc, char** argv) {
  fs::path out_dir = "acceptance_runs";
  fs::path config_path = ATCA_DEFAULT_CONFIG;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--out") out_dir = argv[i + 1];
    if (flag == "--config") config_path = argv[i + 1];
  }
  try {
    TransformFidelity();
    EerOracle();
    SvmCorrectness();
    PersistentAttack();

    const ExperimentConfig config = ReadConfig(config_path);
    const std::size_t many = std::max<std::size_t>(4, std::thread::hardware_concurrency());
    std::printf("running the full pipeline with %zu workers (config %s)\n", many, config_path.string().c_str());
    std::fflush(stdout);
    const FullRun first = RunPipeline(config, many, out_dir / "run_many");
    SystemOrdering(first.corpus, first.outputs, first.seconds, many);
    DiagonalLaw(first.corpus, config, *first.outputs.matrix);
    SettingsCountTrend(first.outputs);
    LearningCurveStability(first.outputs, first.learning_curve_seconds);

    std::printf("repeating the full pipeline with 1 worker\n");
    std::fflush(stdout);
    RunPipeline(config, 1, out_dir / "run_one");
    Determinism(out_dir / "run_many", out_dir / "run_one", many, 1);
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }

  std::sort(verdicts.begin(), verdicts.end(), [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
  std::printf("\nsummary\n");
  int failed = 0;
  for (const Verdict& v : verdicts) {
    std::printf("%s %d %s\n", v.pass ? "PASS" : "FAIL", v.id, v.name.c_str());
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
