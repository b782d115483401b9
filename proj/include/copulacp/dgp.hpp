#pragma once

#include "copulacp/rng.hpp"
#include "copulacp/sample.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string_view>

namespace copulacp {

enum class Family { independence, clayton, gumbel, normal, frank };

std::string_view to_string(Family f);
Family parse_family(std::string_view text);

/// One-parameter copula. Parameter domains: clayton > 0, gumbel >= 1,
/// normal in (-1, 1) (pairwise correlation of an equicorrelated normal copula),
/// frank != 0 (negative values for d = 2 only).
struct CopulaSpec {
  Family family = Family::independence;
  double param = 0.0;
  std::size_t d = 2;

  void validate() const;
};

/// Debye function D_1(x) = x^{-1} int_0^x t / (e^t - 1) dt (D_1(0) = 1).
double debye1(double x);

double param_to_tau(Family family, double param);
double tau_to_param(Family family, double tau);

/// Copula with the given Kendall's tau; tau = 0 maps to the independence copula.
CopulaSpec copula_from_tau(Family family, double tau, std::size_t d);

/// n x d matrix of i.i.d. draws in (0, 1)^d.
Eigen::MatrixXd sample_copula(const CopulaSpec& spec, std::size_t n, Rng& rng);

/// Bivariate draws from C(u, v) = C1(u^{1-a}, v^{1-b}) C2(u^a, v^b) with a, b in (0, 1].
Eigen::MatrixXd khoudraji_sample(const CopulaSpec& c1, const CopulaSpec& c2, double a, double b, std::size_t n,
                                 Rng& rng);

/// A base copula, optionally combined with a second one through Khoudraji's device.
struct CopulaModel {
  CopulaSpec first;
  std::optional<CopulaSpec> second;
  double shape_a = 0.8;
  double shape_b = 0.5;
};

Eigen::MatrixXd sample_model(const CopulaModel& model, std::size_t n, Rng& rng);

enum class SerialModel { iid, ar1, expar };

std::string_view to_string(SerialModel m);
SerialModel parse_serial_model(std::string_view text);

/// Number of innovation rows consumed before the first retained observation
/// (indices -100..0).
inline constexpr std::size_t kBurnIn = 101;

/// Full recursion path of the filter, X_{-100} = eps_{-100}, one row per innovation row.
Eigen::MatrixXd filter_path(const Eigen::MatrixXd& innovations, SerialModel model);

/// Applies the AR(1) or EXPAR recursion to innovations indexed -100..n and returns rows 1..n.
Eigen::MatrixXd serial_filter(const Eigen::MatrixXd& innovations, SerialModel model);

/// Mean shift applied to one component (1-based) of the post-break observations,
/// with N(0, 1) margins before the shift.
struct MarginShift {
  std::size_t component = 1;
  double mean = 0.0;
};

struct ScenarioSpec {
  std::size_t n = 100;
  std::size_t d = 2;
  CopulaModel before;
  std::optional<CopulaModel> after;
  double break_fraction = 0.5;
  SerialModel serial = SerialModel::iid;
  std::optional<MarginShift> shift;

  [[nodiscard]] std::size_t break_index() const;
  void validate() const;
};

/// Generates one sample: constant distribution, a copula change at floor(n t) (in the
/// innovations when a serial model is used), or a mean shift of one margin.
Sample make_scenario(const ScenarioSpec& spec, Rng& rng);

}  // namespace copulacp
