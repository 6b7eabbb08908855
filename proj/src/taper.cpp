#include "nscov/taper.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace nscov {

void TaperSpec::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("taper delta must be positive");
  if (family != TaperFamily::None && !std::isfinite(delta)) {
    throw std::invalid_argument("taper delta must be finite for family " + to_string(family));
  }
}

double taper_correlation(double h, const TaperSpec& spec) {
  if (!(h >= 0.0)) throw std::invalid_argument("taper_correlation: negative distance");
  if (spec.family == TaperFamily::None) return 1.0;
  if (h >= spec.delta) return 0.0;
  const double t = h / spec.delta;
  const double u = 1.0 - t;
  switch (spec.family) {
    case TaperFamily::Spherical:
      return 1.0 - 1.5 * t + 0.5 * t * t * t;
    case TaperFamily::Wendland1: {
      const double u2 = u * u;
      return u2 * u2 * (4.0 * t + 1.0);
    }
    case TaperFamily::Wendland2: {
      const double u3 = u * u * u;
      return u3 * u3 * (35.0 / 3.0 * t * t + 6.0 * t + 1.0);
    }
    case TaperFamily::None:
      break;
  }
  throw std::invalid_argument("taper_correlation: unknown taper family");
}

TaperFamily parse_taper_family(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "none") return TaperFamily::None;
  if (lower == "spherical") return TaperFamily::Spherical;
  if (lower == "wendland1") return TaperFamily::Wendland1;
  if (lower == "wendland2") return TaperFamily::Wendland2;
  throw std::invalid_argument("unknown taper family '" + std::string(name) + "'");
}

std::string to_string(TaperFamily family) {
  switch (family) {
    case TaperFamily::None: return "none";
    case TaperFamily::Spherical: return "spherical";
    case TaperFamily::Wendland1: return "wendland1";
    case TaperFamily::Wendland2: return "wendland2";
  }
  return "unknown";
}

TaperSpec parse_taper(std::string_view text) {
  const auto colon = text.find(':');
  TaperSpec spec;
  spec.family = parse_taper_family(text.substr(0, colon));
  if (colon != std::string_view::npos) {
    const std::string value(text.substr(colon + 1));
    std::size_t used = 0;
    try {
      spec.delta = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty()) {
      throw std::invalid_argument("taper delta '" + value + "' is not a number");
    }
  } else if (spec.tapered()) {
    throw std::invalid_argument("taper '" + std::string(text) + "' needs a delta (FAMILY:DELTA)");
  }
  spec.validate();
  return spec;
}

}  // namespace nscov
