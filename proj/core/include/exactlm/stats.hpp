#pragma once

// Correlation and association statistics shared by experiments and chain
// diagnostics.

#include <cstdint>
#include <span>
#include <vector>

#include "exactlm/errors.hpp"

namespace exactlm {

struct PairedSeries {
  std::vector<double> xs;
  std::vector<double> ys;

  static PairedSeries create(std::vector<double> xs, std::vector<double> ys);
};

// Sample Pearson coefficient; constant sequences are an InputError.
double pearson(const PairedSeries& s);

// Spearman's rho: Pearson of average-ranked data (ties get average ranks).
double spearman(const PairedSeries& s);

std::vector<double> average_ranks(std::span<const double> xs);

// Cramer's V of a non-negative integer contingency table, chi^2 based, no
// bias correction. Fewer than 2 rows or columns with positive marginals
// yields 0 by convention.
double cramers_v(const std::vector<std::vector<int64_t>>& table);

// V of the (s_t, s_{t+1}) pair table of a categorical sequence; equivalent to
// building the dense table over observed categories but linear in length.
double cramers_v_consecutive(std::span<const int32_t> sequence);

}  // namespace exactlm
