#include "hetcomm/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hetcomm {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_size(Bytes s) { require(std::isfinite(s) && s >= 0.0, "message size must be finite and >= 0"); }

}  // namespace

PostalParams::PostalParams(Seconds alpha, Seconds beta_per_byte) : alpha_(alpha), beta_(beta_per_byte) {
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be finite and >= 0");
  require(std::isfinite(beta_per_byte) && beta_per_byte >= 0.0, "beta must be finite and >= 0");
}

ProtocolTable::ProtocolTable(PostalParams short_tier, PostalParams eager_tier, PostalParams rendezvous_tier,
                             std::uint64_t short_max_bytes, std::uint64_t eager_max_bytes)
    : short_(short_tier),
      eager_(eager_tier),
      rendezvous_(rendezvous_tier),
      short_max_(short_max_bytes),
      eager_max_(eager_max_bytes) {
  require(short_max_bytes > 0 && short_max_bytes < eager_max_bytes,
          "protocol thresholds must satisfy 0 < short_max_bytes < eager_max_bytes");
}

ProtocolTable ProtocolTable::uniform(PostalParams params, std::uint64_t short_max_bytes,
                                     std::uint64_t eager_max_bytes) {
  return ProtocolTable(params, params, params, short_max_bytes, eager_max_bytes);
}

const PostalParams& ProtocolTable::tier(ProtocolTier t) const noexcept {
  switch (t) {
    case ProtocolTier::Short:
      return short_;
    case ProtocolTier::Eager:
      return eager_;
    case ProtocolTier::Rendezvous:
      break;
  }
  return rendezvous_;
}

InjectionParams::InjectionParams(Seconds t_inject) : t_inject_(t_inject) {
  require(std::isfinite(t_inject) && t_inject > 0.0, "t_inject must be finite and > 0");
}

void TransferSpec::validate() const {
  require(ppn >= 1, "ppn must be >= 1");
  require_size(bytes_per_message);
  require(dedup_fraction >= 0.0 && dedup_fraction <= 1.0, "dedup_fraction must lie in [0, 1]");
}

void CostBreakdown::add(std::string label, Seconds seconds) {
  require(std::isfinite(seconds) && seconds >= 0.0, "phase seconds must be finite and >= 0");
  phases_.push_back({std::move(label), seconds});
  total_ += seconds;
}

void CostBreakdown::append(const CostBreakdown& other) {
  for (const auto& p : other.phases_) add(p.label, p.seconds);
}

std::optional<Seconds> CostBreakdown::phase(std::string_view label) const {
  for (const auto& p : phases_) {
    if (p.label == label) return p.seconds;
  }
  return std::nullopt;
}

std::string_view to_string(LocalityClass l) {
  switch (l) {
    case LocalityClass::OnSocket:
      return "on-socket";
    case LocalityClass::OnNode:
      return "on-node";
    case LocalityClass::OffNode:
      break;
  }
  return "off-node";
}

std::string_view to_string(ProtocolTier t) {
  switch (t) {
    case ProtocolTier::Short:
      return "short";
    case ProtocolTier::Eager:
      return "eager";
    case ProtocolTier::Rendezvous:
      break;
  }
  return "rendezvous";
}

std::optional<LocalityClass> parse_locality(std::string_view text) {
  for (auto l : kAllLocalities) {
    if (to_string(l) == text) return l;
  }
  return std::nullopt;
}

Seconds postal_time(const PostalParams& params, Bytes s) {
  require_size(s);
  return params.alpha() + params.beta() * s;
}

ProtocolTier select_tier(const ProtocolTable& table, Bytes s) {
  require_size(s);
  if (s <= static_cast<double>(table.short_max_bytes())) return ProtocolTier::Short;
  if (s <= static_cast<double>(table.eager_max_bytes())) return ProtocolTier::Eager;
  return ProtocolTier::Rendezvous;
}

const PostalParams& select_protocol(const ProtocolTable& table, Bytes s) { return table.tier(select_tier(table, s)); }

Seconds best_protocol_time(const ProtocolTable& table, Bytes s) {
  return std::min({postal_time(table.short_tier(), s), postal_time(table.eager_tier(), s),
                   postal_time(table.rendezvous_tier(), s)});
}

Seconds maxrate_time(const PostalParams& params, const InjectionParams& inj, Count ppn, Bytes s) {
  return multi_message_time(params, inj, ppn, 1, s);
}

Seconds multi_message_time(const PostalParams& params, const InjectionParams& inj, Count ppn, Count n, Bytes s) {
  require(ppn >= 1, "ppn must be >= 1");
  require_size(s);
  if (n == 0) return 0.0;
  const double per_byte = std::max(params.beta(), static_cast<double>(ppn) * inj.t_inject());
  const double count = static_cast<double>(n);
  return count * params.alpha() + (count * s) * per_byte;
}

Seconds multi_message_time(const PostalParams& params, Count n, Bytes s) {
  require_size(s);
  if (n == 0) return 0.0;
  const double count = static_cast<double>(n);
  return count * params.alpha() + (count * s) * params.beta();
}

Seconds memcpy_time(const MemcpyParams& mp, Bytes s) { return postal_time(mp.params, s); }

Bytes staged_bytes(const TransferSpec& spec) {
  spec.validate();
  if (spec.n_messages == 0) return 0.0;
  const double n = static_cast<double>(spec.n_messages);
  const double s = spec.bytes_per_message;
  return n * s - spec.dedup_fraction * (n - 1.0) * s;
}

}  // namespace hetcomm
