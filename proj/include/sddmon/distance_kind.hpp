#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "error.hpp"

namespace sddmon {

enum class DistanceKind {
  KolmogorovSmirnov,
  CramerVonMises,
  AndersonDarling,
  Wasserstein,
  Dts,
  EppsSingleton,
};

inline constexpr std::array<DistanceKind, 6> kAllKinds = {
    DistanceKind::KolmogorovSmirnov, DistanceKind::CramerVonMises,
    DistanceKind::AndersonDarling,   DistanceKind::Wasserstein,
    DistanceKind::Dts,               DistanceKind::EppsSingleton,
};

/// Kinds defined purely through the two ECDFs (everything except ES).
inline constexpr std::array<DistanceKind, 5> kEcdfKinds = {
    DistanceKind::KolmogorovSmirnov, DistanceKind::CramerVonMises,
    DistanceKind::AndersonDarling,   DistanceKind::Wasserstein,
    DistanceKind::Dts,
};

inline constexpr bool is_ecdf_kind(DistanceKind k) noexcept {
  return k != DistanceKind::EppsSingleton;
}

// Short tags are the serialised form (JSON, CSV, CLI flags).
inline std::string_view to_tag(DistanceKind k) noexcept {
  switch (k) {
    case DistanceKind::KolmogorovSmirnov: return "KS";
    case DistanceKind::CramerVonMises: return "CVM";
    case DistanceKind::AndersonDarling: return "AD";
    case DistanceKind::Wasserstein: return "WS";
    case DistanceKind::Dts: return "DTS";
    case DistanceKind::EppsSingleton: return "ES";
  }
  return "?";
}

inline std::optional<DistanceKind> parse_kind(std::string_view tag) noexcept {
  for (auto k : kAllKinds) {
    if (to_tag(k) == tag) return k;
  }
  return std::nullopt;
}

inline DistanceKind kind_from_tag(std::string_view tag) {
  if (auto k = parse_kind(tag)) return *k;
  throw Error(ErrorCode::kParseError,
              "unknown distance kind '" + std::string(tag) +
                  "' (expected one of KS, CVM, AD, WS, DTS, ES)");
}

}  // namespace sddmon
