#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <string_view>

namespace nscov {

enum class TaperFamily { None, Spherical, Wendland1, Wendland2 };

/// Compactly supported correlation used to sparsify the covariance.
/// With family None the taper is identically one; delta then only limits the
/// sparsity pattern (infinite delta keeps every pair).
struct TaperSpec {
  TaperFamily family = TaperFamily::None;
  double delta = std::numeric_limits<double>::infinity();

  [[nodiscard]] bool tapered() const noexcept { return family != TaperFamily::None; }
  /// Finite delta selects the sparse (pattern-based) covariance path.
  [[nodiscard]] bool sparse() const noexcept { return std::isfinite(delta); }
  /// Throws std::invalid_argument when delta is not positive, or infinite for
  /// a compactly supported family.
  void validate() const;
};

/// Taper correlation at distance h >= 0; zero for h >= delta.
[[nodiscard]] double taper_correlation(double h, const TaperSpec& spec);

/// Accepts none, spherical, wendland1, wendland2 (case-insensitive).
[[nodiscard]] TaperFamily parse_taper_family(std::string_view name);
[[nodiscard]] std::string to_string(TaperFamily family);

/// Parses "FAMILY:DELTA", e.g. "wendland1:0.18".
[[nodiscard]] TaperSpec parse_taper(std::string_view text);

}  // namespace nscov
