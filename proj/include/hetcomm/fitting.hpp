#pragma once

// Parameter estimation from measured timings.  Protocol tables use segmented
// least squares with breakpoints between observed sizes; the injection rate
// comes from ppn sweeps.

#include <optional>
#include <span>
#include <vector>

#include "hetcomm/model.hpp"

namespace hetcomm {

/// Smallest timing accepted; anything below is treated as a unit mistake.
inline constexpr Seconds kMinResolvableSeconds = 1e-9;

struct TimingSample {
  Bytes bytes = 0.0;
  Seconds seconds = 0.0;
  std::optional<Count> ppn;
  Count n_messages = 1;
  std::optional<LocalityClass> locality;

  friend bool operator==(const TimingSample&, const TimingSample&) = default;
};

/// Throws DataError for negative/non-finite bytes, seconds below kMinResolvableSeconds
/// or zero-valued counts.
void validate_sample(const TimingSample& sample);

struct FitResult {
  PostalParams params;
  Seconds residual = 0.0;  ///< root-mean-square
  Count sample_count = 0;
  bool clamped = false;  ///< alpha or beta was pinned to 0
};

/// Least squares of seconds ~ alpha + beta * bytes, restricted to alpha, beta >= 0.
/// Throws DataError for fewer than two samples or a single distinct size.
[[nodiscard]] FitResult fit_postal(std::span<const TimingSample> samples);

struct ProtocolFit {
  ProtocolTable table;
  Seconds squared_residual = 0.0;  ///< total over all samples
  Seconds single_tier_squared_residual = 0.0;
  bool single_tier_fallback = false;
};

/// Two-breakpoint segmented fit.  Candidate breakpoints are the geometric
/// midpoints between consecutive distinct sizes; the pair minimizing total
/// squared residual wins, ties going to smaller breakpoints.  Runs the
/// candidate search in parallel when OpenMP is available.
[[nodiscard]] ProtocolFit fit_protocol_table(std::span<const TimingSample> samples);

/// Same result as fit_protocol_table, candidate search done sequentially.
[[nodiscard]] ProtocolFit fit_protocol_table_serial(std::span<const TimingSample> samples);

/// Breakpoint candidates for a sample set, ascending.
[[nodiscard]] std::vector<std::uint64_t> breakpoint_candidates(std::span<const TimingSample> samples);

struct InjectionFit {
  InjectionParams params;
  Seconds alpha_used = 0.0;
  Count samples_used = 0;
};

/// Fits t_inject in seconds ~ alpha + bytes * ppn * t_inject over the samples
/// whose per-byte cost rises above the flat regime.  When `base` is absent,
/// alpha comes from a postal fit of the lowest-ppn samples.
[[nodiscard]] InjectionFit fit_injection(std::span<const TimingSample> samples,
                                         std::optional<PostalParams> base = std::nullopt);

}  // namespace hetcomm
