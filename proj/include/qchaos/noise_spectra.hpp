#ifndef QCHAOS_NOISE_SPECTRA_HPP
#define QCHAOS_NOISE_SPECTRA_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "error.hpp"

namespace qchaos {

// Frequencies are in units of the qubit frequency (omega_q == 1).

enum class NoiseKind { OneOverF, Ohmic, SubOhmic, SuperOhmic, Tabulated };

inline std::string_view to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::OneOverF: return "one_over_f";
    case NoiseKind::Ohmic: return "ohmic";
    case NoiseKind::SubOhmic: return "sub_ohmic";
    case NoiseKind::SuperOhmic: return "super_ohmic";
    case NoiseKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

inline NoiseKind noise_kind_from_string(std::string_view s) {
  if (s == "one_over_f" || s == "1/f" || s == "1f") return NoiseKind::OneOverF;
  if (s == "ohmic") return NoiseKind::Ohmic;
  if (s == "sub_ohmic") return NoiseKind::SubOhmic;
  if (s == "super_ohmic") return NoiseKind::SuperOhmic;
  if (s == "tabulated") return NoiseKind::Tabulated;
  throw config_error("unknown noise kind '" + std::string(s) + "'");
}

/// Bath spectral density J(omega) restricted to a finite domain [lo, hi].
/// Immutable once built through make_spectral_density().
class SpectralDensity {
public:
  NoiseKind kind() const noexcept { return kind_; }
  double amplitude() const noexcept { return amplitude_; }
  double domain_lo() const noexcept { return lo_; }
  double domain_hi() const noexcept { return hi_; }
  double cutoff() const noexcept { return cutoff_; }
  const std::vector<std::pair<double, double>>& table() const noexcept { return table_; }

  bool in_domain(double w) const noexcept { return w >= lo_ && w <= hi_; }

  /// Hard cutoff at the domain edges.
  double operator()(double w) const {
    if (!std::isfinite(w)) throw config_error("spectral density evaluated at non-finite frequency");
    if (!in_domain(w)) return 0.0;
    return amplitude_ * shape(w);
  }

  /// Interior breakpoints where J has a kink (table knots); used to align quadrature panels.
  std::vector<double> breakpoints() const {
    std::vector<double> b;
    if (kind_ == NoiseKind::Tabulated)
      for (const auto& [w, j] : table_)
        if (w > lo_ && w < hi_) b.push_back(w);
    return b;
  }

private:
  friend SpectralDensity make_spectral_density(NoiseKind, double, double, double, double,
                                               std::vector<std::pair<double, double>>);

  double shape(double w) const {
    switch (kind_) {
      case NoiseKind::OneOverF: return 1.0 / w;
      case NoiseKind::Ohmic: return w * std::exp(-w / cutoff_);
      case NoiseKind::SubOhmic: return std::sqrt(w) * std::exp(-w / cutoff_);
      case NoiseKind::SuperOhmic: return w * w * std::exp(-w / cutoff_);
      case NoiseKind::Tabulated: {
        auto it = std::lower_bound(table_.begin(), table_.end(), w,
                                   [](const auto& p, double x) { return p.first < x; });
        if (it == table_.begin()) return it->second;
        if (it == table_.end()) return table_.back().second;
        const auto& [w1, j1] = *it;
        const auto& [w0, j0] = *(it - 1);
        return j0 + (j1 - j0) * (w - w0) / (w1 - w0);
      }
    }
    return 0.0;
  }

  NoiseKind kind_ = NoiseKind::OneOverF;
  double amplitude_ = 0.0;
  double lo_ = 1.0;
  double hi_ = 2.0;
  double cutoff_ = 5.0;
  std::vector<std::pair<double, double>> table_;
};

/// Validating factory. For Tabulated, the domain is the table's frequency span and
/// amplitude scales the tabulated values.
inline SpectralDensity make_spectral_density(NoiseKind kind, double amplitude, double lo, double hi,
                                             double cutoff = 5.0,
                                             std::vector<std::pair<double, double>> table = {}) {
  using detail::require;
  require(std::isfinite(amplitude) && amplitude >= 0.0, "spectral density: amplitude must be >= 0");
  if (kind == NoiseKind::Tabulated) {
    require(table.size() >= 2, "spectral density: tabulated density needs at least two points");
    for (std::size_t i = 0; i < table.size(); ++i) {
      require(std::isfinite(table[i].first) && std::isfinite(table[i].second),
              "spectral density: non-finite table entry");
      require(table[i].second >= 0.0, "spectral density: negative tabulated value");
      if (i > 0)
        require(table[i].first > table[i - 1].first,
                "spectral density: table frequencies must be strictly increasing");
    }
    lo = table.front().first;
    hi = table.back().first;
  }
  require(std::isfinite(lo) && std::isfinite(hi), "spectral density: non-finite domain");
  require(lo > 0.0, "spectral density: domain lower edge must be positive");
  require(hi > lo, "spectral density: inverted or empty domain [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  require(std::isfinite(cutoff) && cutoff > 0.0, "spectral density: cutoff must be positive");

  SpectralDensity sd;
  sd.kind_ = kind;
  sd.amplitude_ = amplitude;
  sd.lo_ = lo;
  sd.hi_ = hi;
  sd.cutoff_ = cutoff;
  sd.table_ = std::move(table);
  return sd;
}

/// Integral of J over its domain, adaptive Gauss-Kronrod to relative tolerance `tol`.
inline double total_power(const SpectralDensity& sd, double tol = 1e-10) {
  if (sd.amplitude() == 0.0) return 0.0;
  if (sd.kind() == NoiseKind::Tabulated) {
    // piecewise linear: the trapezoid rule is exact
    double s = 0.0;
    const auto& t = sd.table();
    for (std::size_t i = 1; i < t.size(); ++i)
      s += 0.5 * (t[i].first - t[i - 1].first) * (t[i].second + t[i - 1].second);
    return sd.amplitude() * s;
  }
  using boost::math::quadrature::gauss_kronrod;
  // geometric panels keep 1/omega well resolved on wide domains
  const double lo = sd.domain_lo(), hi = sd.domain_hi();
  const int panels = std::max(1, static_cast<int>(std::ceil(std::log2(hi / lo))));
  const double ratio = std::pow(hi / lo, 1.0 / panels);
  double sum = 0.0, err_sum = 0.0, l1_sum = 0.0;
  double a = lo;
  for (int p = 0; p < panels; ++p) {
    const double b = (p == panels - 1) ? hi : a * ratio;
    double err = 0.0, l1 = 0.0;
    sum += gauss_kronrod<double, 31>::integrate([&](double w) { return sd(w); }, a, b, 15, tol,
                                               &err, &l1);
    err_sum += err;
    l1_sum += l1;
    a = b;
  }
  if (err_sum > tol * std::max(l1_sum, 1e-300) * 10.0)
    throw numerical_error("total_power", "quadrature did not converge, achieved error " +
                                             std::to_string(err_sum));
  return sum;
}

}  // namespace qchaos

#endif
