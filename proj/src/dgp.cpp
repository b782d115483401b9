#include "copulacp/dgp.hpp"

#include "copulacp/error.hpp"
#include "copulacp/normal.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace copulacp {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::independence: return "independence";
    case Family::clayton: return "clayton";
    case Family::gumbel: return "gumbel";
    case Family::normal: return "normal";
    case Family::frank: return "frank";
  }
  return "independence";
}

Family parse_family(std::string_view text) {
  if (text == "independence" || text == "indep") return Family::independence;
  if (text == "clayton") return Family::clayton;
  if (text == "gumbel" || text == "gumbel-hougaard") return Family::gumbel;
  if (text == "normal" || text == "gaussian") return Family::normal;
  if (text == "frank") return Family::frank;
  throw Error("config", "unknown copula family '" + std::string(text) + "'");
}

std::string_view to_string(SerialModel m) {
  switch (m) {
    case SerialModel::iid: return "iid";
    case SerialModel::ar1: return "ar1";
    case SerialModel::expar: return "expar";
  }
  return "iid";
}

SerialModel parse_serial_model(std::string_view text) {
  if (text == "iid") return SerialModel::iid;
  if (text == "ar1") return SerialModel::ar1;
  if (text == "expar") return SerialModel::expar;
  throw Error("config", "unknown serial model '" + std::string(text) + "'");
}

void CopulaSpec::validate() const {
  if (d < 2) throw Error("dimension", "copula dimension must be at least 2");
  switch (family) {
    case Family::independence: return;
    case Family::clayton:
      if (!(param > 0.0) || !std::isfinite(param)) throw Error("param-range", "clayton parameter must be > 0");
      return;
    case Family::gumbel:
      if (!(param >= 1.0) || !std::isfinite(param)) throw Error("param-range", "gumbel parameter must be >= 1");
      return;
    case Family::normal: {
      const double lower = -1.0 / static_cast<double>(d - 1);
      if (!(param > lower && param < 1.0)) throw Error("param-range", "normal correlation outside the admissible range");
      return;
    }
    case Family::frank:
      if (param == 0.0 || !std::isfinite(param)) throw Error("param-range", "frank parameter must be nonzero");
      if (param < 0.0 && d != 2) throw Error("dimension", "negative frank parameter requires d = 2");
      return;
  }
}

double debye1(double x) {
  if (x == 0.0) return 1.0;
  const double a = std::abs(x);
  const auto integrand = [](double t) { return t == 0.0 ? 1.0 : t / std::expm1(t); };
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, a, 15, 1e-14);
  const double d_pos = integral / a;
  return x > 0.0 ? d_pos : d_pos + a / 2.0;
}

namespace {

double frank_tau(double theta) { return 1.0 - 4.0 / theta * (1.0 - debye1(theta)); }

constexpr double kFrankBound = 50.0;

}  // namespace

double param_to_tau(Family family, double param) {
  switch (family) {
    case Family::independence: return 0.0;
    case Family::clayton: return param / (param + 2.0);
    case Family::gumbel: return 1.0 - 1.0 / param;
    case Family::normal: return 2.0 / std::numbers::pi * std::asin(param);
    case Family::frank: return param == 0.0 ? 0.0 : frank_tau(param);
  }
  return 0.0;
}

double tau_to_param(Family family, double tau) {
  switch (family) {
    case Family::independence:
      if (tau != 0.0) throw Error("tau-range", "independence copula has tau = 0");
      return 0.0;
    case Family::clayton:
      if (!(tau > 0.0 && tau < 1.0)) throw Error("tau-range", "clayton needs tau in (0, 1)");
      return 2.0 * tau / (1.0 - tau);
    case Family::gumbel:
      if (!(tau >= 0.0 && tau < 1.0)) throw Error("tau-range", "gumbel needs tau in [0, 1)");
      return 1.0 / (1.0 - tau);
    case Family::normal:
      if (!(tau > -1.0 && tau < 1.0)) throw Error("tau-range", "normal needs tau in (-1, 1)");
      return std::sin(std::numbers::pi * tau / 2.0);
    case Family::frank: {
      if (tau == 0.0 || !(std::abs(tau) < frank_tau(kFrankBound))) {
        throw Error("tau-range", "frank tau must be nonzero and attainable with |theta| <= 50");
      }
      // tau(theta) is odd and increasing; bisect on the side of the sign of tau.
      const double target = std::abs(tau);
      double lo = 1e-12;
      double hi = kFrankBound;
      while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (frank_tau(mid) < target ? lo : hi) = mid;
      }
      const double theta = 0.5 * (lo + hi);
      return tau > 0.0 ? theta : -theta;
    }
  }
  return 0.0;
}

CopulaSpec copula_from_tau(Family family, double tau, std::size_t d) {
  if (tau == 0.0) return {Family::independence, 0.0, d};
  CopulaSpec spec{family, tau_to_param(family, tau), d};
  spec.validate();
  return spec;
}

namespace {

double open_uniform(Rng& rng) {
  for (;;) {
    const double u = std::generate_canonical<double, 53>(rng);
    if (u > 0.0) return u;
  }
}

double exponential(Rng& rng) { return -std::log(open_uniform(rng)); }

/// Positive stable variable with Laplace transform exp(-t^alpha), 0 < alpha < 1 (Kanter).
double positive_stable(double alpha, Rng& rng) {
  const double theta = std::numbers::pi * open_uniform(rng);
  const double w = exponential(rng);
  const double a = std::sin(alpha * theta) / std::pow(std::sin(theta), 1.0 / alpha);
  const double b = std::pow(std::sin((1.0 - alpha) * theta) / w, (1.0 - alpha) / alpha);
  return a * b;
}

/// Logarithmic series variable with P(V = k) = -p^k / (k log(1 - p)); log1mp = log(1 - p).
/// Kemp's LK algorithm.
double log_series(double p, double log1mp, Rng& rng) {
  const double v = open_uniform(rng);
  if (v >= p) return 1.0;
  const double q = -std::expm1(open_uniform(rng) * log1mp);
  if (v <= q * q) return std::floor(1.0 + std::log(v) / std::log(q));
  return v <= q ? 2.0 : 1.0;
}

}  // namespace

Eigen::MatrixXd sample_copula(const CopulaSpec& spec, std::size_t n, Rng& rng) {
  spec.validate();
  const auto rows = static_cast<Eigen::Index>(n);
  const auto d = static_cast<Eigen::Index>(spec.d);
  Eigen::MatrixXd out(rows, d);
  const double theta = spec.param;

  switch (spec.family) {
    case Family::independence:
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < d; ++j) out(i, j) = open_uniform(rng);
      break;
    case Family::clayton: {
      std::gamma_distribution<double> gamma(1.0 / theta, 1.0);
      for (Eigen::Index i = 0; i < rows; ++i) {
        const double v = gamma(rng);
        for (Eigen::Index j = 0; j < d; ++j) out(i, j) = std::pow(1.0 + exponential(rng) / v, -1.0 / theta);
      }
      break;
    }
    case Family::gumbel: {
      if (theta == 1.0) return sample_copula({Family::independence, 0.0, spec.d}, n, rng);
      const double alpha = 1.0 / theta;
      for (Eigen::Index i = 0; i < rows; ++i) {
        const double v = positive_stable(alpha, rng);
        for (Eigen::Index j = 0; j < d; ++j) out(i, j) = std::exp(-std::pow(exponential(rng) / v, alpha));
      }
      break;
    }
    case Family::frank: {
      if (theta > 0.0) {
        const double p = -std::expm1(-theta);
        for (Eigen::Index i = 0; i < rows; ++i) {
          const double v = log_series(p, -theta, rng);
          for (Eigen::Index j = 0; j < d; ++j) {
            out(i, j) = -std::log1p(-p * std::exp(-exponential(rng) / v)) / theta;
          }
        }
      } else {
        // Conditional inversion of dC/du for the bivariate family.
        for (Eigen::Index i = 0; i < rows; ++i) {
          const double u = open_uniform(rng);
          const double w = open_uniform(rng);
          const double y = w * std::expm1(-theta) / (std::exp(-theta * u) * (1.0 - w) + w);
          out(i, 0) = u;
          out(i, 1) = -std::log1p(y) / theta;
        }
      }
      break;
    }
    case Family::normal: {
      Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(d, d, theta);
      corr.diagonal().setOnes();
      const Eigen::LLT<Eigen::MatrixXd> llt(corr);
      const Eigen::MatrixXd lower = llt.matrixL();
      std::normal_distribution<double> normal;
      Eigen::VectorXd z(d);
      for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) z(j) = normal(rng);
        const Eigen::VectorXd x = lower * z;
        for (Eigen::Index j = 0; j < d; ++j) out(i, j) = normal_cdf(x(j));
      }
      break;
    }
  }
  return out;
}

Eigen::MatrixXd khoudraji_sample(const CopulaSpec& c1, const CopulaSpec& c2, double a, double b, std::size_t n,
                                 Rng& rng) {
  if (c1.d != 2 || c2.d != 2) throw Error("dimension", "Khoudraji construction is bivariate");
  if (!(a > 0.0 && a <= 1.0 && b > 0.0 && b <= 1.0)) throw Error("param-range", "shape parameters must lie in (0, 1]");
  const Eigen::MatrixXd first = sample_copula(c1, n, rng);
  const Eigen::MatrixXd second = sample_copula(c2, n, rng);
  const double shapes[2] = {a, b};
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) {
      const double s = shapes[j];
      const double from_second = std::pow(second(i, j), 1.0 / s);
      out(i, j) = s < 1.0 ? std::max(std::pow(first(i, j), 1.0 / (1.0 - s)), from_second) : from_second;
    }
  }
  return out;
}

Eigen::MatrixXd sample_model(const CopulaModel& model, std::size_t n, Rng& rng) {
  if (model.second) return khoudraji_sample(model.first, *model.second, model.shape_a, model.shape_b, n, rng);
  return sample_copula(model.first, n, rng);
}

Eigen::MatrixXd filter_path(const Eigen::MatrixXd& innovations, SerialModel model) {
  Eigen::MatrixXd x = innovations;
  if (model == SerialModel::iid) return x;
  for (Eigen::Index i = 1; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double prev = x(i - 1, j);
      const double eps = innovations(i, j);
      x(i, j) = model == SerialModel::ar1 ? 0.5 * prev + eps
                                          : (0.8 - 1.1 * std::exp(-50.0 * prev * prev)) * prev + 0.1 * eps;
    }
  }
  return x;
}

Eigen::MatrixXd serial_filter(const Eigen::MatrixXd& innovations, SerialModel model) {
  if (static_cast<std::size_t>(innovations.rows()) <= kBurnIn) {
    throw Error("burn-in", "innovations must cover indices -100..n with n >= 1");
  }
  const auto n = innovations.rows() - static_cast<Eigen::Index>(kBurnIn);
  return filter_path(innovations, model).bottomRows(n);
}

std::size_t ScenarioSpec::break_index() const {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * break_fraction));
}

void ScenarioSpec::validate() const {
  if (n < 2) throw Error("too-short", "scenario needs n >= 2");
  if (d < 2) throw Error("dimension", "scenario needs d >= 2");
  const auto check_model = [this](const CopulaModel& m) {
    if (m.second) {
      if (d != 2) throw Error("dimension", "Khoudraji construction is bivariate");
      m.first.validate();
      m.second->validate();
    } else {
      if (m.first.d != d) throw Error("dimension", "copula dimension differs from scenario dimension");
      m.first.validate();
    }
  };
  check_model(before);
  if (after) check_model(*after);
  if (after && shift) throw Error("config", "copula change and margin shift cannot be combined");
  if (after || shift) {
    if (!(break_fraction > 0.0 && break_fraction < 1.0)) throw Error("break-range", "break fraction must lie in (0, 1)");
    const std::size_t k = break_index();
    if (k < 1 || k >= n) throw Error("break-range", "break index floor(n t) must lie in 1..n-1");
  }
  if (shift && (shift->component < 1 || shift->component > d)) {
    throw Error("dimension", "shifted component out of range");
  }
}

Sample make_scenario(const ScenarioSpec& spec, Rng& rng) {
  spec.validate();
  const std::size_t n = spec.n;
  const std::size_t k = (spec.after || spec.shift) ? spec.break_index() : n;
  const std::size_t offset = spec.serial == SerialModel::iid ? 0 : kBurnIn;
  const std::size_t total = n + offset;
  const std::size_t first_rows = k + offset;

  Eigen::MatrixXd u(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(spec.d));
  u.topRows(static_cast<Eigen::Index>(first_rows)) = sample_model(spec.before, first_rows, rng);
  if (first_rows < total) {
    const auto& later = spec.after ? *spec.after : spec.before;
    u.bottomRows(static_cast<Eigen::Index>(total - first_rows)) = sample_model(later, total - first_rows, rng);
  }

  if (spec.serial == SerialModel::iid && !spec.shift) return Sample(std::move(u));

  Eigen::MatrixXd eps = u.unaryExpr([](double p) { return normal_quantile(p); });
  Eigen::MatrixXd x = spec.serial == SerialModel::iid ? eps : serial_filter(eps, spec.serial);
  if (spec.shift) {
    const auto j = static_cast<Eigen::Index>(spec.shift->component - 1);
    for (std::size_t i = k; i < n; ++i) x(static_cast<Eigen::Index>(i), j) += spec.shift->mean;
  }
  return Sample(std::move(x));
}

}  // namespace copulacp
