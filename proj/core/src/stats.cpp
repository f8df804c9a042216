#include "exactlm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace exactlm {

PairedSeries PairedSeries::create(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size()) throw InputError("paired series must have equal length");
  if (xs.size() < 2) throw InputError("paired series needs at least 2 points");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
      throw InputError("paired series entries must be finite");
  }
  return {std::move(xs), std::move(ys)};
}

double pearson(const PairedSeries& s) {
  const std::size_t n = s.xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += s.xs[i];
    my += s.ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = s.xs[i] - mx, dy = s.ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw InputError("correlation undefined for a constant sequence");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    // 1-based ranks; tied block gets the average rank.
    const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(const PairedSeries& s) {
  PairedSeries ranked{average_ranks(s.xs), average_ranks(s.ys)};
  return pearson(ranked);
}

double cramers_v(const std::vector<std::vector<int64_t>>& table) {
  const std::size_t rows = table.size();
  if (rows == 0) return 0.0;
  const std::size_t cols = table[0].size();
  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  double n = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (table[r].size() != cols) throw InputError("ragged contingency table");
    for (std::size_t c = 0; c < cols; ++c) {
      if (table[r][c] < 0) throw InputError("contingency counts must be non-negative");
      row_sum[r] += static_cast<double>(table[r][c]);
      col_sum[c] += static_cast<double>(table[r][c]);
      n += static_cast<double>(table[r][c]);
    }
  }
  if (n < 1.0) throw InputError("contingency table must have total count >= 1");
  const auto r_eff = static_cast<std::size_t>(std::count_if(
      row_sum.begin(), row_sum.end(), [](double v) { return v > 0.0; }));
  const auto c_eff = static_cast<std::size_t>(std::count_if(
      col_sum.begin(), col_sum.end(), [](double v) { return v > 0.0; }));
  if (r_eff < 2 || c_eff < 2) return 0.0;

  double chi2 = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (row_sum[r] == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) {
      if (col_sum[c] == 0.0) continue;
      const double expected = row_sum[r] * col_sum[c] / n;
      const double diff = static_cast<double>(table[r][c]) - expected;
      chi2 += diff * diff / expected;
    }
  }
  const double denom = n * static_cast<double>(std::min(r_eff, c_eff) - 1);
  return std::sqrt(std::max(0.0, chi2 / denom));
}

double cramers_v_consecutive(std::span<const int32_t> sequence) {
  if (sequence.size() < 2) throw InputError("chain must have length >= 2");
  std::unordered_map<int32_t, int32_t> remap;
  for (int32_t s : sequence) remap.emplace(s, static_cast<int32_t>(remap.size()));
  const std::size_t k = remap.size();
  if (k < 2) return 0.0;

  const std::size_t n = sequence.size() - 1;
  std::vector<double> row_sum(k, 0.0), col_sum(k, 0.0);
  std::unordered_map<int64_t, int64_t> cells;
  for (std::size_t t = 0; t + 1 < sequence.size(); ++t) {
    const auto a = static_cast<std::size_t>(remap.at(sequence[t]));
    const auto b = static_cast<std::size_t>(remap.at(sequence[t + 1]));
    row_sum[a] += 1.0;
    col_sum[b] += 1.0;
    ++cells[static_cast<int64_t>(a) * static_cast<int64_t>(k) + static_cast<int64_t>(b)];
  }
  const auto r_eff = static_cast<std::size_t>(std::count_if(
      row_sum.begin(), row_sum.end(), [](double v) { return v > 0.0; }));
  const auto c_eff = static_cast<std::size_t>(std::count_if(
      col_sum.begin(), col_sum.end(), [](double v) { return v > 0.0; }));
  if (r_eff < 2 || c_eff < 2) return 0.0;

  // chi^2 = sum O^2/E - n over cells with positive marginals; zero-count
  // cells contribute only through the -n term, so only observed cells and
  // the marginals are needed.
  double sum_o2_over_e = 0.0;
  const double dn = static_cast<double>(n);
  for (const auto& [key, count] : cells) {
    const auto a = static_cast<std::size_t>(key / static_cast<int64_t>(k));
    const auto b = static_cast<std::size_t>(key % static_cast<int64_t>(k));
    const double expected = row_sum[a] * col_sum[b] / dn;
    sum_o2_over_e += static_cast<double>(count) * static_cast<double>(count) / expected;
  }
  const double chi2 = sum_o2_over_e - dn;
  const double denom = dn * static_cast<double>(std::min(r_eff, c_eff) - 1);
  return std::sqrt(std::max(0.0, chi2 / denom));
}

}  // namespace exactlm
