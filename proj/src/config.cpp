#include "onebit/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "onebit/errors.hpp"

namespace onebit {
namespace {

using json = nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw DomainError("config: " + where + " must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw DomainError("config: unknown key '" + key + "' in " + where);
}

Mat real_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw DomainError("config: " + where + " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols)
      throw DimensionError("config: " + where + " has ragged rows");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

CMat complex_matrix(const json& j, const std::string& where) {
  if (j.is_array()) return real_matrix(j, where).cast<cplx>();
  reject_unknown(j, {"re", "im"}, where);
  if (!j.contains("re")) throw DomainError("config: " + where + " needs a 're' part");
  const Mat re = real_matrix(j.at("re"), where + ".re");
  Mat im = Mat::Zero(re.rows(), re.cols());
  if (j.contains("im")) {
    im = real_matrix(j.at("im"), where + ".im");
    if (im.rows() != re.rows() || im.cols() != re.cols())
      throw DimensionError("config: " + where + " real and imaginary parts differ in shape");
  }
  CMat m(re.rows(), re.cols());
  m.real() = re;
  m.imag() = im;
  return m;
}

cplx complex_scalar(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  reject_unknown(j, {"re", "im"}, where);
  return {j.value("re", 0.0), j.value("im", 0.0)};
}

CovarianceSpec parse_covariance(const json& j) {
  CovarianceSpec spec;
  const std::string kind = j.value("kind", "identity");
  if (kind == "identity") {
    reject_unknown(j, {"kind"}, "covariance");
  } else if (kind == "exponential") {
    reject_unknown(j, {"kind", "rho"}, "covariance");
    spec.kind = CovarianceSpec::Kind::Exponential;
    spec.rho = j.at("rho").get<double>();
  } else if (kind == "bessel-tx") {
    reject_unknown(j, {"kind", "delta", "theta", "gamma_max"}, "covariance");
    spec.kind = CovarianceSpec::Kind::BesselTx;
    spec.delta = j.value("delta", spec.delta);
    spec.theta = j.value("theta", spec.theta);
    spec.gamma_max = j.value("gamma_max", spec.gamma_max);
  } else if (kind == "custom") {
    reject_unknown(j, {"kind", "matrix"}, "covariance");
    spec.kind = CovarianceSpec::Kind::Custom;
    spec.custom = complex_matrix(j.at("matrix"), "covariance.matrix");
  } else {
    throw DomainError("config: unknown covariance kind '" + kind + "'");
  }
  return spec;
}

PilotSpec parse_pilots(const json& j) {
  PilotSpec spec;
  const std::string kind = j.value("kind", "scaled-unitary");
  if (kind == "scaled-unitary") {
    reject_unknown(j, {"kind"}, "pilots");
  } else if (kind == "eigenbasis") {
    reject_unknown(j, {"kind"}, "pilots");
    spec.kind = PilotSpec::Kind::Eigenbasis;
  } else if (kind == "scalar") {
    reject_unknown(j, {"kind", "value"}, "pilots");
    spec.kind = PilotSpec::Kind::Scalar;
    if (j.contains("value")) spec.scalar = complex_scalar(j.at("value"), "pilots.value");
  } else if (kind == "explicit") {
    reject_unknown(j, {"kind", "matrix"}, "pilots");
    spec.kind = PilotSpec::Kind::Explicit;
    spec.matrix = complex_matrix(j.at("matrix"), "pilots.matrix");
  } else {
    throw DomainError("config: unknown pilot kind '" + kind + "'");
  }
  return spec;
}

SweepEstimator parse_estimator(const std::string& name) {
  if (name == "mmse") return SweepEstimator::Mmse;
  if (name == "blmmse") return SweepEstimator::Blmmse;
  if (name == "closed-form") return SweepEstimator::ClosedForm;
  throw DomainError("config: unknown estimator '" + name + "'");
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

SweepConfig parse_config(const std::string& json_text) {
  const json root = parse_json(json_text);
  reject_unknown(root,
                 {"dims", "covariance", "pilots", "noise_var", "snr_db", "estimators", "trials", "seed", "rel_tol",
                  "max_samples", "threads"},
                 "top level");
  SweepConfig cfg;
  try {
    const json& d = root.at("dims");
    reject_unknown(d, {"n_tx", "n_rx", "n_pilots"}, "dims");
    cfg.dims.n_tx = d.value("n_tx", 1);
    cfg.dims.n_rx = d.value("n_rx", 1);
    cfg.dims.n_pilots = d.value("n_pilots", cfg.dims.n_tx);
    if (cfg.dims.n_tx < 1 || cfg.dims.n_rx < 1 || cfg.dims.n_pilots < 1)
      throw DimensionError("config: dims must be positive");
    if (root.contains("covariance")) cfg.covariance = parse_covariance(root.at("covariance"));
    if (root.contains("pilots")) cfg.pilots = parse_pilots(root.at("pilots"));
    cfg.noise_var = root.value("noise_var", cfg.noise_var);
    if (root.contains("snr_db")) {
      const json& s = root.at("snr_db");
      cfg.snr_grid_db.clear();
      if (s.is_array()) {
        for (const auto& v : s) cfg.snr_grid_db.push_back(v.get<double>());
      } else {
        cfg.snr_grid_db.push_back(s.get<double>());
      }
    }
    if (root.contains("estimators")) {
      cfg.estimators.clear();
      for (const auto& v : root.at("estimators")) cfg.estimators.push_back(parse_estimator(v.get<std::string>()));
    }
    cfg.trials = root.value("trials", cfg.trials);
    cfg.seed = root.value("seed", cfg.seed);
    cfg.rel_tol = root.value("rel_tol", cfg.rel_tol);
    cfg.max_samples = root.value("max_samples", cfg.max_samples);
    cfg.threads = root.value("threads", cfg.threads);
  } catch (const json::exception& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  if (!(cfg.noise_var > 0.0)) throw DomainError("config: noise_var must be positive");
  return cfg;
}

SweepConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

Scenario make_scenario(const SweepConfig& config, double snr_db) {
  SystemModel model = build_pilot_model(
      build_pilots(config.pilots, config.dims, config.covariance, snr_db, config.noise_var), config.dims.n_rx);
  SecondOrderStats stats = second_order_stats(model, build_covariance(config.covariance, config.dims), config.noise_var);
  return Scenario{std::move(model), std::move(stats), snr_db};
}

CVec parse_complex_vector(const std::string& json_text) {
  const json j = parse_json(json_text);
  try {
    const json& v = j.is_object() && j.contains("r") ? j.at("r") : j;
    auto read = [](const json& arr) {
      if (!arr.is_array() || arr.empty()) throw DimensionError("complex vector must be a non-empty array");
      Vec out(static_cast<Eigen::Index>(arr.size()));
      for (std::size_t i = 0; i < arr.size(); ++i) out(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
      return out;
    };
    if (v.is_array()) return read(v).cast<cplx>();
    reject_unknown(v, {"re", "im"}, "complex vector");
    const Vec re = read(v.at("re"));
    const Vec im = v.contains("im") ? read(v.at("im")) : Vec::Zero(re.size());
    if (im.size() != re.size()) throw DimensionError("complex vector: real and imaginary lengths differ");
    CVec out(re.size());
    out.real() = re;
    out.imag() = im;
    return out;
  } catch (const json::exception& e) {
    throw DomainError(std::string("complex vector: ") + e.what());
  }
}

Mat parse_real_matrix(const std::string& json_text) {
  const json j = parse_json(json_text);
  try {
    return real_matrix(j.is_object() ? j.at("matrix") : j, "matrix");
  } catch (const json::exception& e) {
    throw DomainError(std::string("matrix: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return os.str();
}

}  // namespace onebit
