#include "onebit/channel_models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "onebit/errors.hpp"

namespace onebit {

Mat exponential_covariance(int n, double rho) {
  if (n < 1) throw DimensionError("exponential_covariance: n must be positive");
  if (!(std::fabs(rho) < 1.0)) throw DomainError("exponential_covariance: |rho| must be < 1");
  Mat out(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) out(i, k) = std::pow(rho, std::abs(i - k));
  return out;
}

double bessel_j0(double x) { return std::cyl_bessel_j(0.0, std::fabs(x)); }

CMat bessel_tx_covariance(int n_tx, double delta, double theta, double gamma_max) {
  if (n_tx < 1) throw DimensionError("bessel_tx_covariance: n_tx must be positive");
  if (!std::isfinite(delta) || !std::isfinite(theta) || !std::isfinite(gamma_max))
    throw DomainError("bessel_tx_covariance: parameters must be finite");
  const double two_pi = 2.0 * std::numbers::pi;
  CMat out(n_tx, n_tx);
  for (int i = 0; i < n_tx; ++i) {
    for (int k = 0; k < n_tx; ++k) {
      const double d = static_cast<double>(k - i);
      const double amp = bessel_j0(two_pi * d * delta * gamma_max * std::cos(theta));
      const double phase = -two_pi * d * delta * std::sin(theta);
      out(i, k) = amp * cplx(std::cos(phase), std::sin(phase));
    }
  }
  return out;
}

std::string CovarianceSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Identity: os << "identity"; break;
    case Kind::Exponential: os << "exponential(rho=" << rho << ")"; break;
    case Kind::BesselTx:
      os << "bessel-tx(delta=" << delta << ", theta=" << theta << ", gamma_max=" << gamma_max << ")";
      break;
    case Kind::Custom: os << "custom(" << custom.rows() << "x" << custom.cols() << ")"; break;
  }
  return os.str();
}

CMat transmit_covariance(const CovarianceSpec& spec, int n_tx) {
  switch (spec.kind) {
    case CovarianceSpec::Kind::Identity: return CMat::Identity(n_tx, n_tx);
    case CovarianceSpec::Kind::BesselTx:
      return bessel_tx_covariance(n_tx, spec.delta, spec.theta, spec.gamma_max);
    default:
      throw PreconditionError("transmit covariance is only defined for identity and bessel-tx models");
  }
}

CMat build_covariance(const CovarianceSpec& spec, const SystemDims& dims) {
  const int nc = dims.channel_length();
  switch (spec.kind) {
    case CovarianceSpec::Kind::Identity: return CMat::Identity(nc, nc);
    case CovarianceSpec::Kind::Exponential:
      return kron(CMat::Identity(dims.n_tx, dims.n_tx),
                  exponential_covariance(dims.n_rx, spec.rho).cast<cplx>());
    case CovarianceSpec::Kind::BesselTx:
      return kron(transmit_covariance(spec, dims.n_tx), CMat::Identity(dims.n_rx, dims.n_rx));
    case CovarianceSpec::Kind::Custom:
      if (spec.custom.rows() != nc || spec.custom.cols() != nc)
        throw DimensionError("custom covariance must be " + std::to_string(nc) + "x" +
                             std::to_string(nc));
      return spec.custom;
  }
  throw Error("unknown covariance kind");
}

}  // namespace onebit
