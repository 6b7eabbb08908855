#include "nscov/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace nscov {
namespace {

const double kInvSqrtPi = 1.0 / std::sqrt(std::numbers::pi);

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("scoring: sigma must be positive");
}

std::vector<double> sorted(const Eigen::VectorXd& v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  return s;
}

// Empirical quantile, linear interpolation between order statistics.
double quantile(std::vector<double> s, double q) {
  std::sort(s.begin(), s.end());
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

template <class Get>
double mean_over(const std::vector<ClusterScore>& c, Get get) {
  double s = 0.0;
  for (const auto& x : c) s += get(x.scores);
  return s / static_cast<double>(c.size());
}

template <class Get>
double sd_over(const std::vector<ClusterScore>& c, Get get) {
  const double m = mean_over(c, get);
  double s = 0.0;
  for (const auto& x : c) s += (get(x.scores) - m) * (get(x.scores) - m);
  return std::sqrt(s / static_cast<double>(c.size() - 1));
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

double crps_gaussian(double z, double mu, double sigma) {
  check_sigma(sigma);
  const double u = (z - mu) / sigma;
  return sigma * (u * (2.0 * normal_cdf(u) - 1.0) + 2.0 * normal_pdf(u) - kInvSqrtPi);
}

double logscore_gaussian(double z, double mu, double sigma) {
  check_sigma(sigma);
  const double u = (z - mu) / (std::numbers::sqrt2 * sigma);
  return 0.5 * std::log(2.0 * std::numbers::pi) + u * u + std::log(sigma);
}

double ks_statistic(const Eigen::VectorXd& residuals) {
  if (residuals.size() == 0) throw std::invalid_argument("ks_statistic: empty sample");
  const auto s = sorted(residuals);
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = normal_cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return std::min(d, 1.0);
}

double coverage(const Eigen::VectorXd& z, const Eigen::VectorXd& mu, const Eigen::VectorXd& sd, double level) {
  if (z.size() != mu.size() || z.size() != sd.size()) throw std::invalid_argument("coverage: length mismatch");
  if (z.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  const double q = normal_quantile(0.5 * (1.0 + level));
  Eigen::Index inside = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (std::abs(z(i) - mu(i)) <= q * sd(i)) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(z.size());
}

std::vector<int> cluster_holdout(const Eigen::MatrixX2d& locations, int k, std::uint64_t seed) {
  const Eigen::Index n = locations.rows();
  if (k < 1 || k > n) throw std::invalid_argument("cluster_holdout: need 1 <= k <= number of points");
  std::mt19937_64 rng(seed);
  Eigen::MatrixX2d centers(k, 2);
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.row(0) = locations.row(first(rng));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], (locations.row(i) - centers.row(c - 1)).squaredNorm());
      total += d2[static_cast<std::size_t>(i)];
    }
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (pick = 0; pick < n - 1; ++pick) {
        target -= d2[static_cast<std::size_t>(pick)];
        if (target < 0.0) break;
      }
      while (d2[static_cast<std::size_t>(pick)] == 0.0 && pick > 0) --pick;
    }
    centers.row(c) = locations.row(pick);
  }
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < 100; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (locations.row(i) - centers.row(c)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (label[static_cast<std::size_t>(i)] != best) {
        label[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixX2d sum = Eigen::MatrixX2d::Zero(k, 2);
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sum.row(label[static_cast<std::size_t>(i)]) += locations.row(i);
      ++count[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (count[static_cast<std::size_t>(c)] > 0) centers.row(c) = sum.row(c) / count[static_cast<std::size_t>(c)];
    }
  }
  return label;
}

ScoreSet score_set(const Eigen::VectorXd& z, const Eigen::VectorXd& mu, const Eigen::VectorXd& sd) {
  if (z.size() != mu.size() || z.size() != sd.size()) throw std::invalid_argument("score_set: length mismatch");
  const Eigen::Index n = z.size();
  ScoreSet s;
  std::vector<double> crps(static_cast<std::size_t>(n));
  Eigen::VectorXd standardized(n);
  double ls = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    crps[static_cast<std::size_t>(i)] = crps_gaussian(z(i), mu(i), sd(i));
    ls += logscore_gaussian(z(i), mu(i), sd(i));
    standardized(i) = (z(i) - mu(i)) / sd(i);
  }
  s.rmspe = std::sqrt((z - mu).squaredNorm() / static_cast<double>(n));
  double sum = 0.0;
  for (double c : crps) sum += c;
  s.crps = sum / static_cast<double>(n);
  s.crps_q95 = quantile(crps, 0.95);
  s.logscore = ls / static_cast<double>(n);
  s.ks = ks_statistic(standardized);
  s.cpi = coverage(z, mu, sd);
  return s;
}

ScoreReport score_report(const Eigen::VectorXd& z, const Eigen::VectorXd& mu, const Eigen::VectorXd& sd,
                         const std::vector<int>& clusters, int k, std::uint64_t seed) {
  if (z.size() != mu.size() || z.size() != sd.size() || static_cast<std::size_t>(z.size()) != clusters.size()) {
    throw std::invalid_argument("score_report: length mismatch");
  }
  ScoreReport rep;
  rep.seed = seed;
  int kmax = k;
  for (int c : clusters) kmax = std::max(kmax, c + 1);
  rep.k = kmax;
  for (int c = 0; c < kmax; ++c) {
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      if (clusters[i] == c) idx.push_back(static_cast<Eigen::Index>(i));
    if (idx.empty()) {
      rep.notes.push_back("cluster " + std::to_string(c) + " is empty and was skipped");
      continue;
    }
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::VectorXd zc(m), mc(m), sc(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      zc(j) = z(idx[static_cast<std::size_t>(j)]);
      mc(j) = mu(idx[static_cast<std::size_t>(j)]);
      sc(j) = sd(idx[static_cast<std::size_t>(j)]);
    }
    rep.clusters.push_back({c, idx.size(), score_set(zc, mc, sc)});
  }
  if (rep.clusters.empty()) throw std::invalid_argument("score_report: no points");
  const auto& cl = rep.clusters;
  auto fill = [&](auto stat) {
    ScoreSet s;
    s.rmspe = stat([](const ScoreSet& x) { return x.rmspe; });
    s.crps = stat([](const ScoreSet& x) { return x.crps; });
    s.crps_q95 = stat([](const ScoreSet& x) { return x.crps_q95; });
    s.logscore = stat([](const ScoreSet& x) { return x.logscore; });
    s.ks = stat([](const ScoreSet& x) { return x.ks; });
    s.cpi = stat([](const ScoreSet& x) { return x.cpi; });
    return s;
  };
  rep.aggregate = fill([&](auto get) { return mean_over(cl, get); });
  if (cl.size() > 1) rep.standard_error = fill([&](auto get) { return sd_over(cl, get); });
  rep.pooled = score_set(z, mu, sd);
  return rep;
}

std::string format_report(const ScoreReport& report, const std::string& model_name) {
  std::ostringstream out;
  out << "model: " << model_name << "  clusters: " << report.clusters.size() << "\n";
  out << std::left << std::setw(12) << "metric" << std::right << std::setw(14) << "mean" << std::setw(14) << "(se)"
      << "\n";
  auto row = [&](const char* name, double ScoreSet::*field) {
    out << std::left << std::setw(12) << name << std::right << std::setw(14) << std::setprecision(5)
        << report.aggregate.*field;
    if (report.standard_error) {
      std::ostringstream se;
      se << "(" << std::setprecision(3) << (*report.standard_error).*field << ")";
      out << std::setw(14) << se.str();
    } else {
      out << std::setw(14) << "(-)";
    }
    out << "\n";
  };
  row("RMSPE", &ScoreSet::rmspe);
  row("CRPS", &ScoreSet::crps);
  row("q0.95 CRPS", &ScoreSet::crps_q95);
  row("Log-Score", &ScoreSet::logscore);
  row("D_n", &ScoreSet::ks);
  row("CPI", &ScoreSet::cpi);
  for (const auto& n : report.notes) out << "note: " << n << "\n";
  return out.str();
}

}  // namespace nscov
