#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "grainfield/cues.hpp"
#include "grainfield/errors.hpp"

namespace grainfield {

inline constexpr std::size_t kExactWilcoxonMaxN = 25;
inline constexpr std::size_t kMinWilcoxonPairs = 5;

struct WilcoxonResult {
  std::size_t n = 0;        // non-zero differences
  double w_plus = 0.0;      // rank sum of positive differences (a > b)
  double p_two_sided = 1.0;
  double p_greater = 1.0;   // alternative: a tends to exceed b
  double p_less = 1.0;      // alternative: a tends to fall below b
  bool exact = true;
};

// Average ranks (1-based) of |d|; equal magnitudes share their mean rank.
inline std::vector<double> signed_rank_magnitudes(const std::vector<double>& d) {
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  std::vector<double> ranks(d.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace detail

// Wilcoxon signed-rank test on paired samples. Zero differences are dropped,
// tied magnitudes get average ranks. Exact null distribution for n <= 25
// (tie-aware, counted over doubled ranks); normal approximation with
// continuity and tie correction above.
inline WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a,
                                           const std::vector<double>& b) {
  if (a.size() != b.size()) throw StatisticsError("paired samples differ in length");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      throw StatisticsError("paired samples must be finite");
    }
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  }
  if (d.size() < kMinWilcoxonPairs) {
    throw StatisticsError("Wilcoxon test needs at least " + std::to_string(kMinWilcoxonPairs) +
                          " non-zero differences, got " + std::to_string(d.size()));
  }
  const auto ranks = signed_rank_magnitudes(d);
  WilcoxonResult r;
  r.n = d.size();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > 0) r.w_plus += ranks[i];
  }

  if (r.n <= kExactWilcoxonMaxN) {
    // Doubled ranks are integers even with ties.
    std::vector<std::size_t> doubled(r.n);
    std::size_t total = 0;
    for (std::size_t i = 0; i < r.n; ++i) {
      doubled[i] = static_cast<std::size_t>(std::lround(2.0 * ranks[i]));
      total += doubled[i];
    }
    std::vector<double> count(total + 1, 0.0);
    count[0] = 1.0;
    std::size_t reach = 0;
    for (std::size_t v : doubled) {
      reach += v;
      for (std::size_t s = reach; s >= v; --s) count[s] += count[s - v];
    }
    const double all = std::ldexp(1.0, static_cast<int>(r.n));
    const auto w2 = static_cast<std::size_t>(std::lround(2.0 * r.w_plus));
    double le = 0.0, ge = 0.0;
    for (std::size_t s = 0; s <= total; ++s) {
      if (s <= w2) le += count[s];
      if (s >= w2) ge += count[s];
    }
    r.p_less = le / all;
    r.p_greater = ge / all;
    r.exact = true;
  } else {
    const double n = static_cast<double>(r.n);
    const double mean = n * (n + 1.0) / 4.0;
    double tie = 0.0;
    {
      std::map<double, std::size_t> groups;
      for (double v : ranks) ++groups[v];
      for (const auto& [rank, t] : groups) {
        const double tt = static_cast<double>(t);
        tie += tt * tt * tt - tt;
      }
    }
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie / 48.0;
    const double sd = std::sqrt(var);
    r.p_greater = 1.0 - detail::normal_cdf((r.w_plus - mean - 0.5) / sd);
    r.p_less = detail::normal_cdf((r.w_plus - mean + 0.5) / sd);
    r.exact = false;
  }
  r.p_greater = std::min(1.0, r.p_greater);
  r.p_less = std::min(1.0, r.p_less);
  r.p_two_sided = std::min(1.0, 2.0 * std::min(r.p_greater, r.p_less));
  return r;
}

// Holm step-down: the i-th smallest p (1-based) is scaled by m - i + 1, the
// sequence is made non-decreasing and clipped at 1. Original order is kept.
inline std::vector<double> holm_correction(const std::vector<double>& p) {
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw StatisticsError("p-values must lie in [0, 1]");
  }
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> out(m);
  double running = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double scaled = std::min(1.0, static_cast<double>(m - i) * p[order[i]]);
    running = std::max(running, scaled);
    out[order[i]] = running;
  }
  return out;
}

class RatingTable {
 public:
  void add(const std::string& participant, const std::string& condition, double rating) {
    if (!(rating >= 0.0 && rating <= 100.0)) {
      throw DataError("rating " + std::to_string(rating) + " for " + participant + "/" +
                      condition + " is outside [0, 100]");
    }
    auto& row = ratings_[condition];
    if (!row.emplace(participant, rating).second) {
      throw DataError("duplicate rating for participant " + participant + ", condition " +
                      condition);
    }
  }

  bool has_condition(const std::string& c) const { return ratings_.count(c) != 0; }

  std::vector<std::string> conditions() const {
    std::vector<std::string> out;
    for (const auto& [c, row] : ratings_) out.push_back(c);
    return out;
  }

  // Ratings of two conditions paired by participant. Both must cover the same
  // participants.
  std::pair<std::vector<double>, std::vector<double>> paired(const std::string& a,
                                                             const std::string& b) const {
    const auto ia = ratings_.find(a);
    const auto ib = ratings_.find(b);
    if (ia == ratings_.end()) throw DataError("unknown condition '" + a + "'");
    if (ib == ratings_.end()) throw DataError("unknown condition '" + b + "'");
    std::pair<std::vector<double>, std::vector<double>> out;
    for (const auto& [participant, value] : ia->second) {
      const auto jt = ib->second.find(participant);
      if (jt == ib->second.end()) {
        throw DataError("participant " + participant + " rated '" + a + "' but not '" + b + "'");
      }
      out.first.push_back(value);
      out.second.push_back(jt->second);
    }
    if (ia->second.size() != ib->second.size()) {
      throw DataError("conditions '" + a + "' and '" + b + "' have different participants");
    }
    return out;
  }

 private:
  std::map<std::string, std::map<std::string, double>> ratings_;
};

// CSV with header participant,condition,rating (any column order).
inline RatingTable rating_table_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("ratings CSV is empty");
  const auto header = detail::split_csv_line(line);
  auto find = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("ratings CSV lacks column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t cp = find("participant"), cc = find("condition"), cr = find("rating");
  RatingTable t;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("ratings CSV row " + std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " cells");
    }
    t.add(cells[cp], cells[cc],
          detail::parse_double(cells[cr], "ratings CSV row " + std::to_string(row)));
  }
  return t;
}

struct Contrast {
  std::string a;
  std::string b;
  bool operator==(const Contrast&) const = default;
};

// Contrasts whose p-values are Holm-corrected together.
struct ContrastFamily {
  std::string name;
  std::vector<Contrast> contrasts;
  bool operator==(const ContrastFamily&) const = default;
};

// {"families": [{"name": ..., "contrasts": [["a", "b"] | {"a": ..., "b": ...}]}]}
inline std::vector<ContrastFamily> contrast_families_from_json(const nlohmann::json& j) {
  if (!j.contains("families") || !j["families"].is_array()) {
    throw DataError("contrasts document needs a 'families' array");
  }
  std::vector<ContrastFamily> out;
  for (const auto& f : j["families"]) {
    ContrastFamily fam;
    fam.name = f.value("name", "family" + std::to_string(out.size() + 1));
    if (!f.contains("contrasts") || !f["contrasts"].is_array()) {
      throw DataError("family '" + fam.name + "' needs a 'contrasts' array");
    }
    for (const auto& c : f["contrasts"]) {
      if (c.is_array() && c.size() == 2) {
        fam.contrasts.push_back({c[0].get<std::string>(), c[1].get<std::string>()});
      } else if (c.is_object()) {
        fam.contrasts.push_back({c.at("a").get<std::string>(), c.at("b").get<std::string>()});
      } else {
        throw DataError("contrast in family '" + fam.name + "' must be [a, b] or {a, b}");
      }
    }
    out.push_back(std::move(fam));
  }
  return out;
}

inline nlohmann::json to_json(const std::vector<ContrastFamily>& families) {
  nlohmann::json fams = nlohmann::json::array();
  for (const auto& f : families) {
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : f.contrasts) cs.push_back({c.a, c.b});
    fams.push_back({{"name", f.name}, {"contrasts", cs}});
  }
  return {{"families", fams}};
}

struct ContrastResult {
  std::string family;
  Contrast contrast;
  WilcoxonResult test;
  double p_holm_two_sided = 1.0;
  double p_one_sided = 1.0;  // in the observed direction
  double p_holm_one_sided = 1.0;
};

// Wilcoxon per contrast, Holm within each family.
inline std::vector<ContrastResult> reanalyze_ratings(const RatingTable& table,
                                                     const std::vector<ContrastFamily>& families) {
  std::vector<ContrastResult> out;
  for (const auto& fam : families) {
    for (const auto& c : fam.contrasts) {
      if (!table.has_condition(c.a)) throw DataError("unknown condition '" + c.a + "'");
      if (!table.has_condition(c.b)) throw DataError("unknown condition '" + c.b + "'");
    }
    const std::size_t first = out.size();
    std::vector<double> p2, p1;
    for (const auto& c : fam.contrasts) {
      const auto [xa, xb] = table.paired(c.a, c.b);
      ContrastResult r;
      r.family = fam.name;
      r.contrast = c;
      r.test = wilcoxon_signed_rank(xa, xb);
      r.p_one_sided = std::min(r.test.p_greater, r.test.p_less);
      p2.push_back(r.test.p_two_sided);
      p1.push_back(r.p_one_sided);
      out.push_back(std::move(r));
    }
    const auto h2 = holm_correction(p2);
    const auto h1 = holm_correction(p1);
    for (std::size_t i = 0; i < h2.size(); ++i) {
      out[first + i].p_holm_two_sided = h2[i];
      out[first + i].p_holm_one_sided = h1[i];
    }
  }
  return out;
}

inline std::string contrast_results_to_csv(const std::vector<ContrastResult>& rows) {
  std::string out =
      "family,a,b,n,w_plus,p_two_sided,p_holm_two_sided,p_one_sided,p_holm_one_sided\n";
  for (const auto& r : rows) {
    out += r.family + ',' + r.contrast.a + ',' + r.contrast.b + ',' + std::to_string(r.test.n) +
           ',' + detail::fmt(r.test.w_plus) + ',' + detail::fmt(r.test.p_two_sided) + ',' +
           detail::fmt(r.p_holm_two_sided) + ',' + detail::fmt(r.p_one_sided) + ',' +
           detail::fmt(r.p_holm_one_sided) + '\n';
  }
  return out;
}

}  // namespace grainfield
