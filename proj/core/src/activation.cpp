#include "wntk/activation.hpp"

#include <cmath>
#include <numbers>

#include "wntk/errors.hpp"

namespace wntk {

ActivationKind ActivationKind::relu() { return ActivationKind(true, "relu", nullptr, nullptr); }

ActivationKind ActivationKind::smooth(std::string name, Fn value, Fn derivative) {
  if (!value || !derivative) throw ConfigError("smooth activation needs value and derivative");
  if (name == "relu") throw ConfigError("'relu' is reserved for the closed-form activation");
  return ActivationKind(false, std::move(name), std::move(value), std::move(derivative));
}

ActivationKind ActivationKind::tanh() {
  return smooth(
      "tanh", [](double u) { return std::tanh(u); },
      [](double u) {
        const double t = std::tanh(u);
        return 1.0 - t * t;
      });
}

ActivationKind ActivationKind::identity() {
  return smooth("identity", [](double u) { return u; }, [](double) { return 1.0; });
}

ActivationKind ActivationKind::erf() {
  return smooth(
      "erf", [](double u) { return std::erf(u); },
      [](double u) { return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-u * u); });
}

ActivationKind ActivationKind::from_name(const std::string& name) {
  if (name == "relu") return relu();
  if (name == "tanh") return tanh();
  if (name == "identity" || name == "linear") return identity();
  if (name == "erf") return erf();
  throw ConfigError("unknown activation '" + name + "'");
}

}  // namespace wntk
