#include "hetcomm/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "hetcomm/error.hpp"

namespace hetcomm {

void validate_sample(const TimingSample& s) {
  if (!std::isfinite(s.bytes) || s.bytes < 0.0) throw DataError("sample bytes must be finite and >= 0");
  if (!std::isfinite(s.seconds) || s.seconds < kMinResolvableSeconds) {
    throw DataError("sample seconds " + std::to_string(s.seconds) +
                    " is below the 1 ns resolution floor (wrong units?)");
  }
  if (s.ppn && *s.ppn < 1) throw DataError("sample ppn must be >= 1");
  if (s.n_messages < 1) throw DataError("sample n_messages must be >= 1");
}

namespace {

struct Line {
  double alpha = 0.0;
  double beta = 0.0;
  double sse = 0.0;
  bool clamped = false;
};

double squared_residual(std::span<const TimingSample> samples, double alpha, double beta) {
  long double sse = 0.0L;
  for (const auto& s : samples) {
    const long double r = static_cast<long double>(s.seconds) - alpha - static_cast<long double>(beta) * s.bytes;
    sse += r * r;
  }
  return static_cast<double>(sse);
}

// Least squares restricted to alpha, beta >= 0.  When the free solution has a
// negative coordinate, the optimum lies on an edge of the feasible quadrant:
// either alpha = 0 with beta refitted, or beta = 0 with alpha refitted.
// Returns nullopt when fewer than two distinct sizes are present.
std::optional<Line> least_squares(std::span<const TimingSample> samples) {
  if (samples.size() < 2) return std::nullopt;
  const long double n = static_cast<long double>(samples.size());
  long double sum_x = 0.0L, sum_y = 0.0L;
  for (const auto& s : samples) {
    sum_x += s.bytes;
    sum_y += s.seconds;
  }
  const long double mean_x = sum_x / n;
  const long double mean_y = sum_y / n;
  long double sxx = 0.0L, sxy = 0.0L, raw_xx = 0.0L, raw_xy = 0.0L;
  for (const auto& s : samples) {
    const long double dx = s.bytes - mean_x;
    sxx += dx * dx;
    sxy += dx * (s.seconds - mean_y);
    raw_xx += static_cast<long double>(s.bytes) * s.bytes;
    raw_xy += static_cast<long double>(s.bytes) * s.seconds;
  }
  if (sxx == 0.0L) return std::nullopt;

  const double beta = static_cast<double>(sxy / sxx);
  const double alpha = static_cast<double>(mean_y - sxy / sxx * mean_x);
  if (alpha >= 0.0 && beta >= 0.0) return Line{alpha, beta, squared_residual(samples, alpha, beta), false};

  const double beta_only = std::max(0.0, static_cast<double>(raw_xy / raw_xx));
  const double alpha_only = std::max(0.0, static_cast<double>(mean_y));
  Line through_origin{0.0, beta_only, squared_residual(samples, 0.0, beta_only), true};
  Line flat{alpha_only, 0.0, squared_residual(samples, alpha_only, 0.0), true};
  return flat.sse < through_origin.sse ? flat : through_origin;
}

std::vector<TimingSample> sorted_by_size(std::span<const TimingSample> samples) {
  std::vector<TimingSample> v(samples.begin(), samples.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.bytes < b.bytes; });
  return v;
}

struct Candidate {
  std::uint64_t threshold;
  std::size_t split;         // first sample index above the threshold
  std::size_t distinct_low;  // distinct sizes at or below the threshold
};

std::vector<Candidate> candidates_for(const std::vector<TimingSample>& sorted) {
  std::vector<Candidate> out;
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i].bytes == sorted[i - 1].bytes) continue;
    ++distinct;
    const std::size_t next = static_cast<std::size_t>(
        std::upper_bound(sorted.begin(), sorted.end(), sorted[i].bytes,
                         [](double v, const TimingSample& s) { return v < s.bytes; }) -
        sorted.begin());
    if (next == sorted.size()) break;
    const double lo = sorted[i].bytes;
    const double hi = sorted[next].bytes;
    const double mid = lo > 0.0 ? std::sqrt(lo * hi) : hi / 2.0;
    const double t = std::floor(mid);
    if (t < lo || t >= hi || t < 1.0) continue;
    out.push_back({static_cast<std::uint64_t>(t), next, distinct});
  }
  return out;
}

std::size_t distinct_sizes(const std::vector<TimingSample>& sorted) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i == 0 || sorted[i].bytes != sorted[i - 1].bytes) ++d;
  }
  return d;
}

struct PairScore {
  double sse = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  std::size_t j = 0;
  Line low, mid, high;
  bool found = false;

  // Lower residual wins; equal residuals go to the smaller breakpoint pair.
  [[nodiscard]] bool better_than(const PairScore& other) const {
    if (!found) return false;
    if (!other.found) return true;
    if (sse != other.sse) return sse < other.sse;
    return std::pair(i, j) < std::pair(other.i, other.j);
  }
};

struct SearchInput {
  std::vector<TimingSample> sorted;
  std::vector<Candidate> candidates;
  std::size_t distinct_total = 0;
};

PairScore score_pair(const SearchInput& in, std::size_t i, std::size_t j) {
  const Candidate& a = in.candidates[i];
  const Candidate& b = in.candidates[j];
  PairScore out;
  if (a.distinct_low < 2 || b.distinct_low - a.distinct_low < 2 || in.distinct_total - b.distinct_low < 2) return out;
  std::span<const TimingSample> all(in.sorted);
  auto low = least_squares(all.subspan(0, a.split));
  auto mid = least_squares(all.subspan(a.split, b.split - a.split));
  auto high = least_squares(all.subspan(b.split));
  if (!low || !mid || !high) return out;
  out.sse = low->sse + mid->sse + high->sse;
  out.i = i;
  out.j = j;
  out.low = *low;
  out.mid = *mid;
  out.high = *high;
  out.found = true;
  return out;
}

PairScore search_serial(const SearchInput& in) {
  PairScore best;
  const std::size_t k = in.candidates.size();
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      PairScore s = score_pair(in, i, j);
      if (s.better_than(best)) best = s;
    }
  }
  return best;
}

PairScore search_parallel(const SearchInput& in) {
  const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(in.candidates.size());
  PairScore best;
#pragma omp parallel
  {
    PairScore local;
#pragma omp for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < k; ++i) {
      for (std::ptrdiff_t j = i + 1; j < k; ++j) {
        PairScore s = score_pair(in, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        if (s.better_than(local)) local = s;
      }
    }
#pragma omp critical(hetcomm_breakpoint_reduce)
    {
      if (local.better_than(best)) best = local;
    }
  }
  return best;
}

SearchInput prepare(std::span<const TimingSample> samples) {
  for (const auto& s : samples) validate_sample(s);
  if (samples.size() < 6) {
    throw DataError("protocol fit needs at least 6 samples spanning 3 decades of sizes (got " +
                    std::to_string(samples.size()) + " samples)");
  }
  SearchInput in;
  in.sorted = sorted_by_size(samples);
  double smallest_positive = 0.0;
  for (const auto& s : in.sorted) {
    if (s.bytes > 0.0) {
      smallest_positive = s.bytes;
      break;
    }
  }
  const double largest = in.sorted.back().bytes;
  if (smallest_positive == 0.0 || largest / smallest_positive < 1000.0) {
    throw DataError("protocol fit needs sizes spanning at least 3 decades");
  }
  in.candidates = candidates_for(in.sorted);
  in.distinct_total = distinct_sizes(in.sorted);
  return in;
}

ProtocolFit finish(const SearchInput& in, const PairScore& best) {
  auto single = least_squares(in.sorted);
  if (!single) throw DataError("degenerate samples: all at one size");

  long double energy = 0.0L;
  for (const auto& s : in.sorted) energy += static_cast<long double>(s.seconds) * s.seconds;
  const double noise_floor = 1e-12 * static_cast<double>(energy);

  ProtocolFit fit;
  fit.single_tier_squared_residual = single->sse;
  if (!best.found || single->sse - best.sse <= noise_floor) {
    fit.table = ProtocolTable::uniform({single->alpha, single->beta});
    fit.squared_residual = single->sse;
    fit.single_tier_fallback = true;
    return fit;
  }
  fit.table = ProtocolTable({best.low.alpha, best.low.beta}, {best.mid.alpha, best.mid.beta},
                            {best.high.alpha, best.high.beta}, in.candidates[best.i].threshold,
                            in.candidates[best.j].threshold);
  fit.squared_residual = best.sse;
  return fit;
}

}  // namespace

FitResult fit_postal(std::span<const TimingSample> samples) {
  for (const auto& s : samples) validate_sample(s);
  if (samples.size() < 2) throw DataError("postal fit needs at least 2 samples");
  auto line = least_squares(samples);
  if (!line) throw DataError("degenerate samples: all at one size; need at least 2 distinct sizes");
  FitResult r;
  r.params = PostalParams(line->alpha, line->beta);
  r.sample_count = samples.size();
  r.residual = std::sqrt(line->sse / static_cast<double>(samples.size()));
  r.clamped = line->clamped;
  return r;
}

std::vector<std::uint64_t> breakpoint_candidates(std::span<const TimingSample> samples) {
  std::vector<std::uint64_t> out;
  for (const auto& c : candidates_for(sorted_by_size(samples))) out.push_back(c.threshold);
  return out;
}

ProtocolFit fit_protocol_table(std::span<const TimingSample> samples) {
  const SearchInput in = prepare(samples);
  return finish(in, search_parallel(in));
}

ProtocolFit fit_protocol_table_serial(std::span<const TimingSample> samples) {
  const SearchInput in = prepare(samples);
  return finish(in, search_serial(in));
}

InjectionFit fit_injection(std::span<const TimingSample> samples, std::optional<PostalParams> base) {
  for (const auto& s : samples) {
    validate_sample(s);
    if (!s.ppn) throw DataError("injection fit needs a ppn value on every sample");
  }
  std::map<Count, std::vector<TimingSample>> by_ppn;
  for (const auto& s : samples) by_ppn[*s.ppn].push_back(s);
  if (by_ppn.size() < 2) {
    throw DataError("injection fit needs at least 2 distinct ppn values; rerun the sweep with more processes per node");
  }

  const double alpha = base ? base->alpha() : fit_postal(by_ppn.begin()->second).params.alpha();

  std::map<Count, double> mean_cost;
  for (const auto& [ppn, group] : by_ppn) {
    long double sum = 0.0L;
    std::size_t used = 0;
    for (const auto& s : group) {
      if (s.bytes <= 0.0) continue;
      sum += (s.seconds - alpha) / s.bytes;
      ++used;
    }
    if (used > 0) mean_cost[ppn] = static_cast<double>(sum / used);
  }
  if (mean_cost.size() < 2) throw DataError("injection fit needs nonzero-size samples at 2 or more ppn values");

  double floor_cost = std::numeric_limits<double>::infinity();
  for (const auto& [ppn, c] : mean_cost) floor_cost = std::min(floor_cost, c);
  const double limit = floor_cost + 0.1 * std::abs(floor_cost);

  long double num = 0.0L, den = 0.0L;
  Count used = 0;
  for (const auto& [ppn, c] : mean_cost) {
    if (!(c > limit)) continue;
    for (const auto& s : by_ppn[ppn]) {
      if (s.bytes <= 0.0) continue;
      const long double x = static_cast<long double>(s.bytes) * static_cast<long double>(ppn);
      num += (s.seconds - static_cast<long double>(alpha)) * x;
      den += x * x;
      ++used;
    }
  }
  if (used == 0) {
    throw DataError("no injection-limited samples: per-byte cost is flat in ppn within 10%; rerun with larger ppn");
  }
  const double t = static_cast<double>(num / den);
  if (!(t > 0.0)) throw DataError("fitted injection inverse rate is not positive");
  return InjectionFit{InjectionParams(t), alpha, used};
}

}  // namespace hetcomm
