#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mousedyn/errors.hpp"
#include "mousedyn/forest.hpp"

namespace mousedyn {

namespace {

using Counts = std::vector<std::size_t>;

double entropy(const Counts& counts, std::size_t total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

int classes_present(const Counts& counts) {
  int k = 0;
  for (std::size_t c : counts) k += c > 0 ? 1 : 0;
  return k;
}

struct Discretizer {
  const std::vector<std::pair<double, int>>& v;  // sorted (value, class)
  int n_classes;
  std::vector<double> cuts;

  Counts class_counts(std::size_t lo, std::size_t hi) const {
    Counts c(static_cast<std::size_t>(n_classes), 0);
    for (std::size_t i = lo; i < hi; ++i) ++c[static_cast<std::size_t>(v[i].second)];
    return c;
  }

  // Entropy-minimization partition of v[lo..hi) with the MDL stopping rule
  // (Fayyad & Irani). Accepted cut values (midpoints) accumulate in cuts.
  void partition(std::size_t lo, std::size_t hi) {
    const std::size_t n = hi - lo;
    if (n < 2) return;
    const Counts total = class_counts(lo, hi);
    if (classes_present(total) < 2) return;

    double best_ent = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    Counts left(static_cast<std::size_t>(n_classes), 0);
    for (std::size_t i = lo; i + 1 < hi; ++i) {
      ++left[static_cast<std::size_t>(v[i].second)];
      if (v[i].first == v[i + 1].first) continue;
      const std::size_t ln = i - lo + 1;
      const std::size_t rn = n - ln;
      Counts right = total;
      for (std::size_t c = 0; c < right.size(); ++c) right[c] -= left[c];
      const double ent = (static_cast<double>(ln) * entropy(left, ln) +
                          static_cast<double>(rn) * entropy(right, rn)) /
                         static_cast<double>(n);
      if (ent < best_ent) {
        best_ent = ent;
        best_i = i;
      }
    }
    if (!std::isfinite(best_ent)) return;  // constant on this range

    const Counts l = class_counts(lo, best_i + 1);
    Counts r = total;
    for (std::size_t c = 0; c < r.size(); ++c) r[c] -= l[c];
    const std::size_t ln = best_i + 1 - lo;
    const std::size_t rn = n - ln;

    const double ent_s = entropy(total, n);
    const double gain = ent_s - best_ent;
    const int k = classes_present(total);
    const int k1 = classes_present(l);
    const int k2 = classes_present(r);
    const double delta = std::log2(std::pow(3.0, k) - 2.0) -
                         (k * ent_s - k1 * entropy(l, ln) - k2 * entropy(r, rn));
    const double threshold =
        (std::log2(static_cast<double>(n) - 1.0) + delta) / static_cast<double>(n);
    if (gain <= threshold) return;

    cuts.push_back(v[best_i].first + (v[best_i + 1].first - v[best_i].first) / 2.0);
    partition(lo, best_i + 1);
    partition(best_i + 1, hi);
  }
};

double gain_ratio_from_bins(const std::vector<Counts>& bins, std::size_t n,
                            const Counts& class_totals) {
  const double class_entropy = entropy(class_totals, n);
  double cond = 0.0;
  double split_info = 0.0;
  for (const Counts& bin : bins) {
    std::size_t bn = 0;
    for (std::size_t c : bin) bn += c;
    if (bn == 0) continue;
    const double w = static_cast<double>(bn) / static_cast<double>(n);
    cond += w * entropy(bin, bn);
    split_info -= w * std::log2(w);
  }
  if (split_info <= 0.0) return 0.0;
  const double gain = class_entropy - cond;
  return gain > 0.0 ? gain / split_info : 0.0;
}

}  // namespace

std::vector<std::pair<std::string, double>> gain_ratio_ranking(
    std::span<const ActionFeatures> rows, std::span<const int> labels) {
  if (rows.size() != labels.size()) throw Error("rows/labels size mismatch");
  if (rows.empty()) throw InsufficientData("gain ratio needs at least one row");
  const std::size_t n = rows.size();

  // Dense class ids in label order of first appearance.
  std::vector<int> class_of(n);
  std::vector<int> seen;
  for (std::size_t i = 0; i < n; ++i) {
    auto it = std::find(seen.begin(), seen.end(), labels[i]);
    if (it == seen.end()) {
      seen.push_back(labels[i]);
      it = seen.end() - 1;
    }
    class_of[i] = static_cast<int>(it - seen.begin());
  }
  const int n_classes = static_cast<int>(seen.size());
  Counts class_totals(static_cast<std::size_t>(n_classes), 0);
  for (int c : class_of) ++class_totals[static_cast<std::size_t>(c)];

  std::vector<std::pair<std::string, double>> out;
  out.reserve(kFeatureCount);
  std::vector<std::pair<double, int>> v(n);

  for (int f = 0; f < kFeatureCount; ++f) {
    double gr = 0.0;
    if (feature_is_categorical(f)) {
      const auto card = static_cast<std::size_t>(feature_cardinality(f));
      std::vector<Counts> bins(card, Counts(static_cast<std::size_t>(n_classes), 0));
      for (std::size_t i = 0; i < n; ++i) {
        const auto code =
            static_cast<std::size_t>(std::llround(rows[i].values[static_cast<std::size_t>(f)]));
        ++bins[code][static_cast<std::size_t>(class_of[i])];
      }
      gr = gain_ratio_from_bins(bins, n, class_totals);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = {rows[i].values[static_cast<std::size_t>(f)], class_of[i]};
      }
      std::sort(v.begin(), v.end());
      Discretizer d{v, n_classes, {}};
      d.partition(0, n);
      std::sort(d.cuts.begin(), d.cuts.end());
      std::vector<Counts> bins(d.cuts.size() + 1, Counts(static_cast<std::size_t>(n_classes), 0));
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t b = static_cast<std::size_t>(
            std::upper_bound(d.cuts.begin(), d.cuts.end(), v[i].first) - d.cuts.begin());
        ++bins[b][static_cast<std::size_t>(v[i].second)];
      }
      gr = gain_ratio_from_bins(bins, n, class_totals);
    }
    out.emplace_back(feature_names()[static_cast<std::size_t>(f)], gr);
  }

  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

std::vector<std::pair<std::string, double>> gain_ratio_ranking(
    std::span<const ActionFeatures> rows, std::span<const std::uint8_t> labels) {
  std::vector<int> int_labels(labels.begin(), labels.end());
  return gain_ratio_ranking(rows, std::span<const int>(int_labels));
}

std::vector<std::pair<std::string, double>> gain_ratio_ranking_by_user(
    const std::map<int, std::vector<ActionFeatures>>& features) {
  std::vector<ActionFeatures> rows;
  std::vector<int> labels;
  for (const auto& [user, user_rows] : features) {
    for (const ActionFeatures& r : user_rows) {
      rows.push_back(r);
      labels.push_back(user);
    }
  }
  return gain_ratio_ranking(rows, std::span<const int>(labels));
}

}  // namespace mousedyn
