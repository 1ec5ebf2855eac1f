#include "mousedyn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "mousedyn/errors.hpp"
#include "mousedyn/parallel.hpp"
#include "mousedyn/rng.hpp"

namespace mousedyn {

namespace {

double rank_statistic_auc(std::vector<double> pos, std::vector<double> neg) {
  // Mann-Whitney with average ranks; ties between a positive and a negative
  // count half.
  struct Tagged {
    double score;
    bool positive;
  };
  std::vector<Tagged> all;
  all.reserve(pos.size() + neg.size());
  for (double p : pos) all.push_back({p, true});
  for (double q : neg) all.push_back({q, false});
  std::sort(all.begin(), all.end(),
            [](const Tagged& a, const Tagged& b) { return a.score < b.score; });

  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].positive) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos.size());
  const double n = static_cast<double>(neg.size());
  const double u = rank_sum_pos - p * (p + 1.0) / 2.0;
  return u / (p * n);
}

}  // namespace

RocCurve compute_roc(const ScoreSet& scores) {
  if (scores.positives.empty()) throw EmptyScoreList("positive");
  if (scores.negatives.empty()) throw EmptyScoreList("negative");

  std::vector<double> pos = scores.positives;
  std::vector<double> neg = scores.negatives;
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  std::vector<double> thresholds;
  thresholds.reserve(pos.size() + neg.size() + 3);
  thresholds.push_back(0.0);
  thresholds.push_back(1.0);
  thresholds.insert(thresholds.end(), pos.begin(), pos.end());
  thresholds.insert(thresholds.end(), neg.begin(), neg.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  // Closing cut above every score so the curve reaches (0, 0).
  thresholds.push_back(std::nextafter(std::max(thresholds.back(), 1.0),
                                      std::numeric_limits<double>::infinity()));

  RocCurve roc;
  roc.points.reserve(thresholds.size());
  const double np = static_cast<double>(pos.size());
  const double nn = static_cast<double>(neg.size());
  for (double th : thresholds) {
    // accept iff score >= th
    const auto neg_accepted =
        static_cast<double>(neg.end() - std::lower_bound(neg.begin(), neg.end(), th));
    const auto pos_rejected =
        static_cast<double>(std::lower_bound(pos.begin(), pos.end(), th) - pos.begin());
    RocPoint pt;
    pt.threshold = th;
    pt.fpr = neg_accepted / nn;
    pt.fnr = pos_rejected / np;
    pt.tpr = 1.0 - pt.fnr;
    roc.points.push_back(pt);
  }

  double area = 0.0;
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    const RocPoint& a = roc.points[i - 1];
    const RocPoint& b = roc.points[i];
    area += (a.fpr - b.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  roc.auc_trapezoid = area;
  roc.auc = rank_statistic_auc(scores.positives, scores.negatives);

  // fpr - fnr decreases monotonically from +1 toward -1; find the sign change.
  std::size_t cross = roc.points.size() - 1;
  for (std::size_t i = 0; i < roc.points.size(); ++i) {
    if (roc.points[i].fpr - roc.points[i].fnr <= 0.0) {
      cross = i;
      break;
    }
  }
  const RocPoint& hi = roc.points[cross];
  const double d_hi = hi.fpr - hi.fnr;
  if (cross == 0 || d_hi == 0.0) {
    roc.eer = (hi.fpr + hi.fnr) / 2.0;
    roc.eer_threshold = hi.threshold;
  } else {
    const RocPoint& lo = roc.points[cross - 1];
    const double d_lo = lo.fpr - lo.fnr;  // > 0
    const double lambda = d_lo / (d_lo - d_hi);
    roc.eer = lo.fnr + lambda * (hi.fnr - lo.fnr);
    roc.eer_threshold = lo.threshold + lambda * (hi.threshold - lo.threshold);
  }
  return roc;
}

EvalReport report_from_scores(const ScoreSet& scores, Scenario sc, Protocol pr, int set_size) {
  const RocCurve roc = compute_roc(scores);
  EvalReport r;
  r.scenario = sc;
  r.protocol = pr;
  r.set_size = set_size;
  r.auc = roc.auc;
  r.eer = roc.eer;
  r.n_positive = static_cast<std::int64_t>(scores.positives.size());
  r.n_negative = static_cast<std::int64_t>(scores.negatives.size());

  std::int64_t tp = 0, tn = 0;
  for (double s : scores.positives) tp += s >= 0.5 ? 1 : 0;
  for (double s : scores.negatives) tn += s < 0.5 ? 1 : 0;
  r.fnr = 1.0 - static_cast<double>(tp) / static_cast<double>(scores.positives.size());
  r.fpr = 1.0 - static_cast<double>(tn) / static_cast<double>(scores.negatives.size());
  r.acc = 100.0 * static_cast<double>(tp + tn) /
          static_cast<double>(scores.positives.size() + scores.negatives.size());
  return r;
}

ScoreSet CvScores::pooled() const {
  ScoreSet s;
  for (const auto& f : pos_by_fold) s.positives.insert(s.positives.end(), f.begin(), f.end());
  for (const auto& f : neg_by_fold) s.negatives.insert(s.negatives.end(), f.begin(), f.end());
  return s;
}

namespace {

// Stratified fold ids for one class's row positions, shuffled then dealt
// round-robin.
std::vector<std::vector<std::size_t>> stratified_folds(std::vector<std::size_t> rows, int folds,
                                                       Rng& rng) {
  rng.shuffle(rows);
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[i % static_cast<std::size_t>(folds)].push_back(rows[i]);
  }
  for (auto& f : out) std::sort(f.begin(), f.end());  // keep temporal order inside a fold
  return out;
}

CvScores cross_validate_user(const UserDataset& ds, int folds, std::uint64_t seed,
                             const ForestOptions& options) {
  std::vector<std::size_t> pos_rows, neg_rows;
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    (ds.labels[i] ? pos_rows : neg_rows).push_back(i);
  }
  if (pos_rows.size() < static_cast<std::size_t>(folds) ||
      neg_rows.size() < static_cast<std::size_t>(folds)) {
    throw InsufficientData("user " + std::to_string(ds.genuine_user) + " has " +
                           std::to_string(pos_rows.size()) + " genuine / " +
                           std::to_string(neg_rows.size()) + " impostor rows, need >= " +
                           std::to_string(folds) + " per class for " + std::to_string(folds) +
                           "-fold CV");
  }

  Rng fold_rng(derive_seed(seed, {kStreamFolds, static_cast<std::uint64_t>(ds.genuine_user)}));
  const auto pos_folds = stratified_folds(pos_rows, folds, fold_rng);
  const auto neg_folds = stratified_folds(neg_rows, folds, fold_rng);

  CvScores cv;
  cv.user_id = ds.genuine_user;
  cv.pos_by_fold.resize(static_cast<std::size_t>(folds));
  cv.neg_by_fold.resize(static_cast<std::size_t>(folds));
  cv.pos_rows_by_fold = pos_folds;
  cv.neg_rows_by_fold = neg_folds;

  std::vector<std::uint8_t> held_out(ds.rows.size());
  for (int f = 0; f < folds; ++f) {
    std::fill(held_out.begin(), held_out.end(), 0);
    for (std::size_t i : pos_folds[static_cast<std::size_t>(f)]) held_out[i] = 1;
    for (std::size_t i : neg_folds[static_cast<std::size_t>(f)]) held_out[i] = 1;

    UserDataset train;
    train.genuine_user = ds.genuine_user;
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
      if (held_out[i]) continue;
      train.rows.push_back(ds.rows[i]);
      train.labels.push_back(ds.labels[i]);
    }
    const std::uint64_t forest_seed =
        derive_seed(seed, {kStreamForest, static_cast<std::uint64_t>(ds.genuine_user),
                           static_cast<std::uint64_t>(f)});
    const ForestModel model = train_forest(train, options, forest_seed);

    for (std::size_t i : pos_folds[static_cast<std::size_t>(f)]) {
      cv.pos_by_fold[static_cast<std::size_t>(f)].push_back(predict_proba(model, ds.rows[i]));
    }
    for (std::size_t i : neg_folds[static_cast<std::size_t>(f)]) {
      cv.neg_by_fold[static_cast<std::size_t>(f)].push_back(predict_proba(model, ds.rows[i]));
    }
  }
  return cv;
}

PerUserTable summarize_users(std::vector<EvalReport> per_user) {
  if (per_user.empty()) throw InsufficientData("no per-user reports to summarize");
  PerUserTable t;
  t.per_user = std::move(per_user);
  const auto n = static_cast<double>(t.per_user.size());
  EvalReport mean = t.per_user.front();
  mean.scope = EvalReport::Scope::Global;
  mean.user_id = -1;
  mean.acc = mean.auc = mean.eer = mean.fnr = mean.fpr = 0.0;
  mean.n_positive = mean.n_negative = 0;
  for (const EvalReport& r : t.per_user) {
    mean.acc += r.acc;
    mean.auc += r.auc;
    mean.eer += r.eer;
    mean.fnr += r.fnr;
    mean.fpr += r.fpr;
    mean.n_positive += r.n_positive;
    mean.n_negative += r.n_negative;
  }
  mean.acc /= n;
  mean.auc /= n;
  mean.eer /= n;
  mean.fnr /= n;
  mean.fpr /= n;

  EvalReport sd = mean;
  sd.acc = sd.auc = sd.eer = sd.fnr = sd.fpr = 0.0;
  if (t.per_user.size() > 1) {
    double va = 0, vu = 0, ve = 0, vn = 0, vp = 0;
    for (const EvalReport& r : t.per_user) {
      va += (r.acc - mean.acc) * (r.acc - mean.acc);
      vu += (r.auc - mean.auc) * (r.auc - mean.auc);
      ve += (r.eer - mean.eer) * (r.eer - mean.eer);
      vn += (r.fnr - mean.fnr) * (r.fnr - mean.fnr);
      vp += (r.fpr - mean.fpr) * (r.fpr - mean.fpr);
    }
    sd.acc = std::sqrt(va / (n - 1.0));
    sd.auc = std::sqrt(vu / (n - 1.0));
    sd.eer = std::sqrt(ve / (n - 1.0));
    sd.fnr = std::sqrt(vn / (n - 1.0));
    sd.fpr = std::sqrt(vp / (n - 1.0));
  }
  t.mean = mean;
  t.stddev = sd;
  return t;
}

}  // namespace

std::map<int, CvScores> scenario_a_cv_scores(
    const std::map<int, std::vector<ActionFeatures>>& features, int folds, std::uint64_t seed,
    const ForestOptions& options, int jobs) {
  if (features.size() < 2) throw NotEnoughUsers();
  std::vector<int> users;
  users.reserve(features.size());
  for (const auto& [u, _] : features) users.push_back(u);

  std::vector<CvScores> results(users.size());
  std::exception_ptr err;
  std::mutex err_mutex;
  parallel_for(users.size(), jobs, [&](std::size_t i) {
    try {
      const UserDataset ds = build_user_dataset(features, users[i], seed);
      results[i] = cross_validate_user(ds, folds, seed, options);
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mutex);
      if (!err) err = std::current_exception();
    }
  });
  if (err) std::rethrow_exception(err);

  std::map<int, CvScores> out;
  for (std::size_t i = 0; i < users.size(); ++i) out[users[i]] = std::move(results[i]);
  return out;
}

PerUserTable scenario_a_action(const std::map<int, std::vector<ActionFeatures>>& features,
                               int folds, std::uint64_t seed, const ForestOptions& options,
                               int jobs, std::map<int, CvScores>* out_cv) {
  auto cv = scenario_a_cv_scores(features, folds, seed, options, jobs);
  std::vector<EvalReport> per_user;
  for (const auto& [user, scores] : cv) {
    EvalReport r = report_from_scores(scores.pooled(), Scenario::A, Protocol::Action, 1);
    r.scope = EvalReport::Scope::PerUser;
    r.user_id = user;
    per_user.push_back(r);
  }
  if (out_cv) *out_cv = std::move(cv);
  return summarize_users(std::move(per_user));
}

PerUserTable scenario_a_by_type(const std::map<int, std::vector<ActionFeatures>>& features,
                                ActionKind kind, int folds, std::uint64_t seed,
                                const ForestOptions& options, int jobs,
                                std::map<int, CvScores>* out_cv) {
  std::map<int, std::vector<ActionFeatures>> filtered;
  for (const auto& [user, rows] : features) {
    std::vector<ActionFeatures> keep;
    for (const ActionFeatures& f : rows) {
      if (f.kind() == kind) keep.push_back(f);
    }
    if (keep.size() < static_cast<std::size_t>(folds)) {
      throw InsufficientData("user " + std::to_string(user) + " has only " +
                             std::to_string(keep.size()) + " " + to_string(kind) + " actions");
    }
    filtered[user] = std::move(keep);
  }
  return scenario_a_action(filtered, folds, seed, options, jobs, out_cv);
}

namespace {

void fuse_windows(const std::vector<double>& stream, int k, std::vector<double>& out) {
  const std::size_t kk = static_cast<std::size_t>(k);
  for (std::size_t start = 0; start + kk <= stream.size(); start += kk) {
    double sum = 0.0;
    for (std::size_t i = 0; i < kk; ++i) sum += stream[start + i];
    out.push_back(sum / static_cast<double>(kk));
  }
}

}  // namespace

std::vector<SetCurveRow> scenario_a_action_set(
    const std::map<int, std::vector<ActionFeatures>>& features, int k_min, int k_max, int folds,
    std::uint64_t seed, const ForestOptions& options, int jobs) {
  if (k_min < 1 || k_max < k_min) throw Error("bad k range");
  const auto cv = scenario_a_cv_scores(features, folds, seed, options, jobs);

  std::vector<SetCurveRow> rows;
  for (int k = k_min; k <= k_max; ++k) {
    ScoreSet pooled;
    for (const auto& [user, scores] : cv) {
      for (const auto& stream : scores.pos_by_fold) fuse_windows(stream, k, pooled.positives);
      for (const auto& stream : scores.neg_by_fold) fuse_windows(stream, k, pooled.negatives);
    }
    const RocCurve roc = compute_roc(pooled);
    rows.push_back({k, roc.auc, roc.eer});
  }
  return rows;
}

namespace {

std::map<int, ForestModel> train_all_users(
    const std::map<int, std::vector<ActionFeatures>>& features_train, std::uint64_t seed,
    const ForestOptions& options, int jobs) {
  if (features_train.size() < 2) throw NotEnoughUsers();
  std::vector<int> users;
  for (const auto& [u, _] : features_train) users.push_back(u);
  std::vector<ForestModel> models(users.size());
  std::exception_ptr err;
  std::mutex err_mutex;
  parallel_for(users.size(), jobs, [&](std::size_t i) {
    try {
      const UserDataset ds = build_user_dataset(features_train, users[i], seed);
      const std::uint64_t forest_seed =
          derive_seed(seed, {kStreamForest, static_cast<std::uint64_t>(users[i])});
      models[i] = train_forest(ds, options, forest_seed);
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mutex);
      if (!err) err = std::current_exception();
    }
  });
  if (err) std::rethrow_exception(err);

  std::map<int, ForestModel> out;
  for (std::size_t i = 0; i < users.size(); ++i) out[users[i]] = std::move(models[i]);
  return out;
}

}  // namespace

ScenarioBResult scenario_b(const std::map<int, std::vector<ActionFeatures>>& features_train,
                           const std::vector<TestSessionFeatures>& sessions_test,
                           Protocol protocol, int set_size, std::uint64_t seed,
                           const ForestOptions& options, int jobs) {
  if (sessions_test.empty()) throw EmptyTestSet();
  if (protocol == Protocol::ActionSet && set_size < 1) throw Error("set size must be >= 1");

  const auto models = train_all_users(features_train, seed, options, jobs);
  for (const TestSessionFeatures& s : sessions_test) {
    if (!models.count(s.claimed_user)) throw NoModelForUser(s.claimed_user);
  }

  // Per-session action scores, computed in parallel.
  std::vector<std::vector<double>> session_scores(sessions_test.size());
  parallel_for(sessions_test.size(), jobs, [&](std::size_t i) {
    const TestSessionFeatures& s = sessions_test[i];
    const ForestModel& model = models.at(s.claimed_user);
    session_scores[i].reserve(s.actions.size());
    for (const ActionFeatures& a : s.actions) {
      session_scores[i].push_back(predict_proba(model, a));
    }
  });

  ScenarioBResult result;
  ScoreSet pooled;

  switch (protocol) {
    case Protocol::Action: {
      std::map<int, ScoreSet> by_user;
      for (std::size_t i = 0; i < sessions_test.size(); ++i) {
        const TestSessionFeatures& s = sessions_test[i];
        auto& dst = s.legal ? by_user[s.claimed_user].positives : by_user[s.claimed_user].negatives;
        dst.insert(dst.end(), session_scores[i].begin(), session_scores[i].end());
        auto& gl = s.legal ? pooled.positives : pooled.negatives;
        gl.insert(gl.end(), session_scores[i].begin(), session_scores[i].end());
      }
      std::vector<EvalReport> per_user;
      for (const auto& [user, scores] : by_user) {
        EvalReport r = report_from_scores(scores, Scenario::B, Protocol::Action, 1);
        r.scope = EvalReport::Scope::PerUser;
        r.user_id = user;
        per_user.push_back(r);
      }
      result.per_user = summarize_users(std::move(per_user));
      break;
    }
    case Protocol::ActionSet: {
      for (int k = 1; k <= set_size; ++k) {
        ScoreSet sk;
        for (std::size_t i = 0; i < sessions_test.size(); ++i) {
          fuse_windows(session_scores[i], k,
                       sessions_test[i].legal ? sk.positives : sk.negatives);
        }
        // Every session may be shorter than an intermediate k; only the
        // requested set size failing is an error (raised by compute_roc below).
        if (!sk.positives.empty() && !sk.negatives.empty()) {
          const RocCurve roc = compute_roc(sk);
          result.set_curve.push_back({k, roc.auc, roc.eer});
        }
        if (k == set_size) pooled = std::move(sk);
      }
      break;
    }
    case Protocol::Session: {
      for (std::size_t i = 0; i < sessions_test.size(); ++i) {
        if (session_scores[i].empty()) continue;  // session lost all actions in segmentation
        double sum = 0.0;
        for (double v : session_scores[i]) sum += v;
        (sessions_test[i].legal ? pooled.positives : pooled.negatives)
            .push_back(sum / static_cast<double>(session_scores[i].size()));
      }
      break;
    }
  }

  result.n_scores =
      static_cast<std::int64_t>(pooled.positives.size() + pooled.negatives.size());
  result.roc = compute_roc(pooled);
  result.global = report_from_scores(pooled, Scenario::B, protocol, set_size);
  return result;
}

std::vector<SmoothingRow> smoothing_experiment(
    const std::map<int, std::vector<MouseAction>>& train_actions,
    const std::vector<TestSessionActions>& sessions_test,
    const std::vector<ResampleConfig>& configs, std::uint64_t seed,
    const ForestOptions& options, int jobs) {
  std::vector<SmoothingRow> out;
  for (const ResampleConfig& cfg : configs) {
    std::map<int, std::vector<ActionFeatures>> train_features;
    for (const auto& [user, actions] : train_actions) {
      auto& dst = train_features[user];
      dst.reserve(actions.size());
      for (const MouseAction& a : actions) {
        dst.push_back(extract_features(resample(a, cfg).action));
      }
    }
    std::vector<TestSessionFeatures> test_features;
    test_features.reserve(sessions_test.size());
    for (const TestSessionActions& s : sessions_test) {
      TestSessionFeatures tf;
      tf.claimed_user = s.claimed_user;
      tf.session_id = s.session_id;
      tf.legal = s.legal;
      tf.actions.reserve(s.actions.size());
      for (const MouseAction& a : s.actions) {
        tf.actions.push_back(extract_features(resample(a, cfg).action));
      }
      test_features.push_back(std::move(tf));
    }
    const ScenarioBResult r =
        scenario_b(train_features, test_features, Protocol::Session, 1, seed, options, jobs);
    out.push_back({cfg, r.global, r.n_scores});
  }
  return out;
}

}  // namespace mousedyn
