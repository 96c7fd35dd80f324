#include "atca/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <numeric>

#include "atca/random.hpp"
#include "atca/roc.hpp"

namespace atca {
namespace {

constexpr double kTau = 1e-12;

double SquaredDistance(const FeatureVector& a, const FeatureVector& b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    const double d = a[k] - b[k];
    sum += d * d;
  }
  return sum;
}

// Least-recently-used cache of kernel matrix rows.
class KernelCache {
 public:
  KernelCache(std::span<const FeatureVector> x, double gamma, std::size_t budget_bytes)
      : x_(x), gamma_(gamma), rows_(x.size()), where_(x.size(), lru_.end()) {
    const std::size_t row_bytes = std::max<std::size_t>(1, x.size() * sizeof(double));
    capacity_ = std::max<std::size_t>(2, budget_bytes / row_bytes);
  }

  const std::vector<double>& Row(std::size_t i) {
    if (!rows_[i].empty()) {
      lru_.splice(lru_.begin(), lru_, where_[i]);
      return rows_[i];
    }
    if (lru_.size() >= capacity_) {
      const std::size_t victim = lru_.back();
      lru_.pop_back();
      where_[victim] = lru_.end();
      std::vector<double>().swap(rows_[victim]);
    }
    std::vector<double>& row = rows_[i];
    row.resize(x_.size());
    const FeatureVector& xi = x_[i];
    for (std::size_t k = 0; k < x_.size(); ++k) {
      row[k] = std::exp(-gamma_ * SquaredDistance(xi, x_[k]));
    }
    lru_.push_front(i);
    where_[i] = lru_.begin();
    return row;
  }

 private:
  std::span<const FeatureVector> x_;
  double gamma_;
  std::size_t capacity_ = 2;
  std::vector<std::vector<double>> rows_;
  std::list<std::size_t> lru_;
  std::vector<std::list<std::size_t>::iterator> where_;
};

void CheckInputs(std::span<const FeatureVector> x, std::span<const int> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "feature rows and labels differ in count");
  }
  bool has_pos = false;
  bool has_neg = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] == 1) {
      has_pos = true;
    } else if (y[i] == -1) {
      has_neg = true;
    } else {
      throw Error(ErrorCode::kSingleClass, "labels must be +1 or -1");
    }
    for (double v : x[i]) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "non-finite feature in training row");
    }
  }
  if (!has_pos || !has_neg) throw Error(ErrorCode::kSingleClass, "training set needs both classes");
}

}  // namespace

double RbfKernel(std::span<const double> x, std::span<const double> z, double gamma) {
  if (x.size() != z.size()) throw Error(ErrorCode::kDimensionMismatch, "kernel arguments differ in length");
  double sum = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - z[k];
    sum += d * d;
  }
  return std::exp(-gamma * sum);
}

double RbfKernel(const FeatureVector& x, const FeatureVector& z, double gamma) {
  return std::exp(-gamma * SquaredDistance(x, z));
}

SvmModel Train(std::span<const FeatureVector> x, std::span<const int> y, const SvmParams& params) {
  CheckInputs(x, y);
  if (!(params.c > 0.0) || !(params.gamma > 0.0) || !(params.tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "C, gamma and tolerance must be positive");
  }
  const std::size_t n = x.size();
  std::vector<double> yd(n);
  std::vector<double> upper(n);
  for (std::size_t i = 0; i < n; ++i) {
    yd[i] = static_cast<double>(y[i]);
    upper[i] = params.c * (y[i] > 0 ? params.weight_pos : params.weight_neg);
  }

  // Dual in minimization form: min 1/2 a'Qa - e'a, Q_ij = y_i y_j K_ij,
  // subject to y'a = 0 and 0 <= a_i <= upper_i. G = Qa - e.
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  KernelCache cache(x, params.gamma, params.cache_bytes);

  auto in_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < upper[t] : alpha[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < upper[t]; };

  std::size_t iter = 0;
  double gap = 0.0;
  for (;;) {
    // i: maximal violator in I_up of -y_t G_t.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t) && -yd[t] * grad[t] >= gmax) {
        gmax = -yd[t] * grad[t];
        i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t j = n;
    std::size_t j_first_order = n;
    double best_obj = std::numeric_limits<double>::infinity();
    const std::vector<double>* row_i = nullptr;
    if (i < n && params.rule == WorkingSetRule::kSecondOrder) row_i = &cache.Row(i);
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double yg = yd[t] * grad[t];
      if (yg >= gmax2) {
        gmax2 = yg;
        j_first_order = t;
      }
      if (row_i != nullptr) {
        const double grad_diff = gmax + yg;
        if (grad_diff > 0.0) {
          double quad = 2.0 - 2.0 * (*row_i)[t];
          if (quad <= 0.0) quad = kTau;
          const double obj = -(grad_diff * grad_diff) / quad;
          if (obj <= best_obj) {
            best_obj = obj;
            j = t;
          }
        }
      }
    }
    if (params.rule == WorkingSetRule::kMaxViolatingPair) j = j_first_order;
    gap = gmax + gmax2;
    if (i == n || j == n || gap < params.tolerance) break;
    if (iter >= params.max_iterations) {
      throw Error(ErrorCode::kConvergenceFailure,
                  "SMO did not converge within " + std::to_string(params.max_iterations) + " pair updates");
    }
    ++iter;

    const std::vector<double>& ki = cache.Row(i);
    const std::vector<double>& kj = cache.Row(j);
    const double kij = ki[j];
    const double old_i = alpha[i];
    const double old_j = alpha[j];
    const double ci = upper[i];
    const double cj = upper[j];
    if (y[i] != y[j]) {
      double quad = 2.0 - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > ci - cj) {
        if (alpha[i] > ci) {
          alpha[i] = ci;
          alpha[j] = ci - diff;
        }
      } else if (alpha[j] > cj) {
        alpha[j] = cj;
        alpha[i] = cj + diff;
      }
    } else {
      double quad = 2.0 - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > ci) {
        if (alpha[i] > ci) {
          alpha[i] = ci;
          alpha[j] = sum - ci;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > cj) {
        if (alpha[j] > cj) {
          alpha[j] = cj;
          alpha[i] = sum - cj;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    // Q_ik = y_i y_k K_ik
    const double di = (alpha[i] - old_i) * yd[i];
    const double dj = (alpha[j] - old_j) * yd[j];
    for (std::size_t k = 0; k < n; ++k) {
      grad[k] += yd[k] * (ki[k] * di + kj[k] * dj);
    }
  }

  // Bias from free vectors; falls back to the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = yd[t] * grad[t];
    if (alpha[t] >= upper[t]) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

  SvmModel model;
  model.bias = -rho;
  model.gamma = params.gamma;
  model.c = params.c;
  model.weight_pos = params.weight_pos;
  model.weight_neg = params.weight_neg;
  model.iterations = iter;
  model.kkt_gap = std::max(0.0, gap);
  double objective = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    objective += alpha[t] * (grad[t] - 1.0);
    if (alpha[t] > 0.0) {
      model.support_vectors.push_back(x[t]);
      model.coef.push_back(alpha[t] * yd[t]);
      model.support_indices.push_back(t);
    }
  }
  model.dual_objective = -0.5 * objective;
  return model;
}

double DecisionValue(const SvmModel& model, const FeatureVector& x) {
  double sum = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
    sum += model.coef[i] * RbfKernel(model.support_vectors[i], x, model.gamma);
  }
  return sum;
}

double DecisionValue(const SvmModel& model, std::span<const double> x) {
  if (x.size() != kFeatureCount) {
    throw Error(ErrorCode::kDimensionMismatch,
                "expected " + std::to_string(kFeatureCount) + " features, got " + std::to_string(x.size()));
  }
  FeatureVector v{};
  std::copy(x.begin(), x.end(), v.begin());
  return DecisionValue(model, v);
}

std::vector<double> DecisionValues(const SvmModel& model, std::span<const FeatureVector> x) {
  std::vector<double> out;
  out.reserve(x.size());
  for (const FeatureVector& row : x) out.push_back(DecisionValue(model, row));
  return out;
}

double BalancedPositiveWeight(std::size_t n_pos, std::size_t n_neg, double cap) {
  if (n_pos == 0) return 1.0;
  return std::min(cap, static_cast<double>(n_neg) / static_cast<double>(n_pos));
}

void TrainConfig::Validate() const {
  if (c_grid.empty() || gamma_grid.empty()) throw Error(ErrorCode::kInvalidConfig, "empty hyper-parameter grid");
  if (!(tolerance > 0.0)) throw Error(ErrorCode::kInvalidConfig, "tolerance must be positive");
  if (inner_folds < 2) throw Error(ErrorCode::kInvalidConfig, "inner cross-validation needs >= 2 folds");
}

GridChoice GridSearch(std::span<const FeatureVector> x, std::span<const int> y, const TrainConfig& config,
                      std::uint64_t seed) {
  config.Validate();
  CheckInputs(x, y);
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] > 0 ? pos : neg).push_back(i);

  Rng rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  if (config.max_search_samples > 0 && pos.size() + neg.size() > config.max_search_samples) {
    // The minority class is kept whole up to half the budget; the majority fills the rest.
    std::vector<std::size_t>& minority = pos.size() <= neg.size() ? pos : neg;
    std::vector<std::size_t>& majority = pos.size() <= neg.size() ? neg : pos;
    const std::size_t keep_minority = std::min(minority.size(), config.max_search_samples / 2);
    minority.resize(keep_minority);
    majority.resize(std::min(majority.size(), config.max_search_samples - keep_minority));
  }
  if (pos.size() < config.inner_folds || neg.size() < config.inner_folds) {
    throw Error(ErrorCode::kSingleClass, "each class needs at least inner_folds members for grid search");
  }

  const std::size_t k = config.inner_folds;
  std::vector<std::size_t> fold_of(y.size(), k);
  for (std::size_t r = 0; r < pos.size(); ++r) fold_of[pos[r]] = r % k;
  for (std::size_t r = 0; r < neg.size(); ++r) fold_of[neg[r]] = r % k;

  struct Split {
    std::vector<FeatureVector> train_x;
    std::vector<int> train_y;
    std::vector<FeatureVector> test_x;
    std::vector<int> test_y;
    double weight_pos = 1.0;
  };
  std::vector<Split> splits(k);
  std::vector<std::size_t> used(pos);
  used.insert(used.end(), neg.begin(), neg.end());
  std::sort(used.begin(), used.end());
  for (std::size_t f = 0; f < k; ++f) {
    Split& s = splits[f];
    std::size_t n_pos = 0;
    for (std::size_t idx : used) {
      if (fold_of[idx] == f) {
        s.test_x.push_back(x[idx]);
        s.test_y.push_back(y[idx]);
      } else {
        s.train_x.push_back(x[idx]);
        s.train_y.push_back(y[idx]);
        n_pos += y[idx] > 0 ? 1 : 0;
      }
    }
    s.weight_pos = BalancedPositiveWeight(n_pos, s.train_y.size() - n_pos, config.weight_cap);
  }

  GridChoice best;
  best.auc = -1.0;
  std::vector<double> c_grid = config.c_grid;
  std::vector<double> g_grid = config.gamma_grid;
  std::sort(c_grid.begin(), c_grid.end());
  std::sort(g_grid.begin(), g_grid.end());
  for (double c : c_grid) {
    for (double gamma : g_grid) {
      double auc_sum = 0.0;
      for (const Split& s : splits) {
        SvmParams params;
        params.c = c;
        params.gamma = gamma;
        params.weight_pos = s.weight_pos;
        params.tolerance = config.tolerance;
        params.max_iterations = config.max_iterations;
        const SvmModel model = Train(s.train_x, s.train_y, params);
        std::vector<double> pos_scores;
        std::vector<double> neg_scores;
        for (std::size_t r = 0; r < s.test_x.size(); ++r) {
          (s.test_y[r] > 0 ? pos_scores : neg_scores).push_back(DecisionValue(model, s.test_x[r]));
        }
        auc_sum += ComputeAuc(pos_scores, neg_scores);
      }
      const double auc = auc_sum / static_cast<double>(k);
      if (auc > best.auc) best = {c, gamma, auc};
    }
  }
  return best;
}

SvmModel FitWithSearch(std::span<const FeatureVector> x, std::span<const int> y, const TrainConfig& config,
                       std::uint64_t seed) {
  GridChoice choice;
  if (config.c_grid.size() == 1 && config.gamma_grid.size() == 1) {
    choice = {config.c_grid.front(), config.gamma_grid.front(), 0.0};
  } else {
    choice = GridSearch(x, y, config, seed);
  }
  std::size_t n_pos = 0;
  for (int label : y) n_pos += label > 0 ? 1 : 0;
  SvmParams params;
  params.c = choice.c;
  params.gamma = choice.gamma;
  params.weight_pos = BalancedPositiveWeight(n_pos, y.size() - n_pos, config.weight_cap);
  params.tolerance = config.tolerance;
  params.max_iterations = config.max_iterations;
  return Train(x, y, params);
}

}  // namespace atca
