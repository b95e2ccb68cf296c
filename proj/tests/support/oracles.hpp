#pragma once

// Straightforward reimplementations used as test oracles. They share no code
// with the library: plain loops, std::complex, full sorts.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "dualkge/model.hpp"

namespace dualkge::oracle {

inline double score(const EmbeddingModel& m, const Triple& tr) {
  const auto h = m.entities.row(tr.head);
  const auto r = m.relations.row(tr.relation);
  const auto t = m.entities.row(tr.tail);
  switch (m.kind.family) {
    case ModelFamily::TransE: {
      double acc = 0.0;
      for (std::size_t i = 0; i < m.dim; ++i) {
        const double x = h[i] + r[i] - t[i];
        acc += m.kind.norm == 1 ? std::abs(x) : x * x;
      }
      return m.kind.norm == 1 ? -acc : -std::sqrt(acc);
    }
    case ModelFamily::DistMult: {
      double acc = 0.0;
      for (std::size_t i = 0; i < m.dim; ++i) acc += h[i] * r[i] * t[i];
      return acc;
    }
    case ModelFamily::ComplEx: {
      std::complex<double> acc = 0.0;
      for (std::size_t i = 0; i < m.dim; ++i) {
        const std::complex<double> hc(h[i], h[m.dim + i]), rc(r[i], r[m.dim + i]), tc(t[i], t[m.dim + i]);
        acc += hc * rc * (m.kind.conjugate_tail ? std::conj(tc) : tc);
      }
      return acc.real();
    }
  }
  return 0.0;
}

/// Unfiltered-by-construction rank: 1 + #{admissible candidates scoring strictly higher}.
template <class ScoreFn>
double filtered_rank(ScoreFn&& fn, Triple test, bool head, std::size_t n_entities,
                     const std::vector<Triple>& known) {
  const double s = fn(test);
  double rank = 1.0;
  for (std::size_t e = 0; e < n_entities; ++e) {
    Triple c = test;
    (head ? c.head : c.tail) = static_cast<EntityId>(e);
    if (c == test) continue;
    if (std::find(known.begin(), known.end(), c) != known.end()) continue;
    if (fn(c) > s) rank += 1.0;
  }
  return rank;
}

inline double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

struct Clustering {
  double ch = 0.0, db = 0.0, silhouette = 0.0;
};

/// Pointwise-definition clustering scores over 2-D or n-D points.
inline Clustering clustering(const std::vector<std::vector<double>>& x, const std::vector<int>& labels) {
  const std::size_t n = x.size(), d = x[0].size();
  std::vector<int> ids(labels);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const std::size_t k = ids.size();
  auto dist = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(s);
  };
  std::vector<double> mu(d, 0.0);
  for (const auto& p : x)
    for (std::size_t j = 0; j < d; ++j) mu[j] += p[j] / static_cast<double>(n);
  std::vector<std::vector<double>> cent(k, std::vector<double>(d, 0.0));
  std::vector<double> size(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), labels[i]) - ids.begin());
    size[c] += 1.0;
    for (std::size_t j = 0; j < d; ++j) cent[c][j] += x[i][j];
  }
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < d; ++j) cent[c][j] /= size[c];

  Clustering out;
  double between = 0.0, within = 0.0;
  for (std::size_t c = 0; c < k; ++c) between += size[c] * dist(cent[c], mu) * dist(cent[c], mu);
  std::vector<double> scatter(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), labels[i]) - ids.begin());
    const double dd = dist(x[i], cent[c]);
    within += dd * dd;
    scatter[c] += dd / size[c];
  }
  out.ch = within == 0.0 ? 1.0 : (between / static_cast<double>(k - 1)) / (within / static_cast<double>(n - k));

  double db = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    double worst = 0.0;
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      const double m = dist(cent[a], cent[b]);
      if (m == 0.0) continue;
      worst = std::max(worst, (scatter[a] + scatter[b]) / m);
    }
    db += worst;
  }
  out.db = db / static_cast<double>(k);

  double sil = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> sum(k, 0.0), cnt(k, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto c = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), labels[j]) - ids.begin());
      sum[c] += dist(x[i], x[j]);
      cnt[c] += 1.0;
    }
    const auto own = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), labels[i]) - ids.begin());
    if (cnt[own] == 0.0) continue;
    const double a = sum[own] / cnt[own];
    double b = INFINITY;
    for (std::size_t c = 0; c < k; ++c)
      if (c != own && cnt[c] > 0.0) b = std::min(b, sum[c] / cnt[c]);
    sil += (b - a) / std::max(a, b);
  }
  out.silhouette = sil / static_cast<double>(n);
  return out;
}

/// Probability that a random positive outscores a random negative, ties count half.
inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double num = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      num += scores[i] > scores[j] ? 1.0 : scores[i] == scores[j] ? 0.5 : 0.0;
    }
  }
  return num / pairs;
}

}  // namespace dualkge::oracle
