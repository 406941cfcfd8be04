#include "mvcreg/errors.hpp"

#include <sstream>

namespace mvcreg {

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

SingularGramian::SingularGramian(double det, double det_tol)
    : Error("SingularGramian",
            "det(Gamma_N) = " + fmt_double(det) + " <= det_tol = " + fmt_double(det_tol) +
                "; violated condition: det Gamma_N > C (concentration vectors must be "
                "linearly independent for the components to be identifiable)"),
      det_(det) {}

SingularNormalMatrix::SingularNormalMatrix(std::size_t component, double condition, double xtx_tol)
    : Error("SingularNormalMatrix",
            "component " + std::to_string(component + 1) + ": cond(X^T A X) = " +
                fmt_double(condition) + " > xtx_tol = " + fmt_double(xtx_tol) +
                "; violated condition: second-moment matrix D of the component's "
                "regressors must be nonsingular"),
      component_(component),
      condition_(condition) {}

DegenerateWeights::DegenerateWeights(std::size_t component, double mean_abs_weight)
    : Error("DegenerateWeights", "component " + std::to_string(component + 1) +
                                     ": mean |a^m_j| = " + fmt_double(mean_abs_weight) +
                                     " is below 1e-12") {}

SingularD::SingularD(std::size_t component)
    : Error("SingularD", "component " + std::to_string(component + 1) +
                             ": second-moment matrix D is singular; violated condition: "
                             "D must be nonsingular") {}

NonFiniteMoment::NonFiniteMoment(std::size_t row)
    : Error("NonFiniteMoment",
            "moment function returned a non-finite value at row " + std::to_string(row)),
      row_(row) {}

ConfigError::ConfigError(std::string path, const std::string& what)
    : Error("ConfigError", path + ": " + what), path_(std::move(path)) {}

}  // namespace mvcreg
