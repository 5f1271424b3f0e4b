#include "frb/noise.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "frb/errors.hpp"
#include "frb/weyl.hpp"

namespace frb {

NoiseModel NoiseModel::depolarizing(double f, int p, int n) {
  NoiseModel m;
  m.type = Type::gate_independent;
  m.channel = Superop(p, n);
  m.channel.mat.diagonal().setConstant(f);
  m.channel.mat(0, 0) = 1.0;
  validate_channel(m.channel);
  return m;
}

NoiseModel NoiseModel::local_depolarizing(double eps, int n) {
  std::vector<std::array<double, 3>> r(size_t(n), {eps / 4.0, eps / 4.0, eps / 4.0});
  return local_pauli(std::move(r));
}

NoiseModel NoiseModel::local_pauli(std::vector<std::array<double, 3>> rates) {
  NoiseModel m;
  m.type = Type::local_pauli;
  m.rates = std::move(rates);
  for (const auto& r : m.rates) {
    double s = 0.0;
    for (double q : r) {
      if (q < 0.0) throw std::invalid_argument("local_pauli: negative error rate");
      s += q;
    }
    if (s > 1.0) throw std::invalid_argument("local_pauli: rates exceed 1");
  }
  return m;
}

NoiseModel NoiseModel::from_json(const nlohmann::json& j, int p, int n) {
  if (!j.is_object()) throw config_error("noise: config must be a JSON object");
  const std::string type = j.value("type", "none");
  if (type == "none") return none_model();
  if (type == "depolarizing") {
    if (!j.contains("f")) throw config_error("noise: depolarizing needs 'f'");
    const double f = j.at("f").get<double>();
    if (f < 0.0 || f > 1.0) throw config_error("noise: depolarizing f outside [0, 1]");
    return depolarizing(f, p, n);
  }
  if (type == "local_pauli") {
    if (!j.contains("rates")) throw config_error("noise: local_pauli needs 'rates'");
    auto raw = j.at("rates").get<std::vector<std::vector<double>>>();
    if (int(raw.size()) != n) throw config_error("noise: one rate triple per site required");
    std::vector<std::array<double, 3>> rates;
    for (const auto& r : raw) {
      if (r.size() != 3) throw config_error("noise: rates entries must be [pX, pY, pZ]");
      rates.push_back({r[0], r[1], r[2]});
    }
    try {
      return local_pauli(std::move(rates));
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("noise: ") + e.what());
    }
  }
  throw config_error("noise: unknown type '" + type + "'");
}

nlohmann::json NoiseModel::to_json() const {
  nlohmann::json j;
  switch (type) {
    case Type::none:
      j["type"] = "none";
      break;
    case Type::gate_independent:
      j["type"] = "depolarizing";
      j["f"] = channel.mat.rows() > 1 ? channel.mat(1, 1) : 1.0;
      break;
    case Type::local_pauli: {
      j["type"] = "local_pauli";
      nlohmann::json rts = nlohmann::json::array();
      for (const auto& r : rates) rts.push_back({r[0], r[1], r[2]});
      j["rates"] = rts;
      break;
    }
    case Type::gate_dependent:
      j["type"] = "gate_dependent";
      break;
  }
  return j;
}

// ------------------------------------------------------------- validation ----

double choi_min_eigenvalue(const Superop& channel) {
  const Index dim = channel.mat.rows();
  const Index d = pow_index(channel.p, channel.n);
  MatrixXcd choi = MatrixXcd::Zero(dim, dim);
  for (Index b = 0; b < dim; ++b) {
    VectorXd eb = VectorXd::Zero(dim);
    eb[b] = 1.0;
    MatrixXcd sb = from_weyl_coeffs(eb, channel.p, channel.n);
    MatrixXcd esb = from_weyl_coeffs(channel.mat.col(b), channel.p, channel.n);
    // J = sum_b sigma_b^T (x) E(sigma_b); PSD iff the map is CP
    MatrixXcd sbt = sb.transpose();
    for (Index i = 0; i < d; ++i)
      for (Index k = 0; k < d; ++k)
        if (sbt(i, k) != cplx(0.0, 0.0))
          choi.block(i * d, k * d, d, d) += sbt(i, k) * esb;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(choi, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool trace_non_increasing(const Superop& channel, double tol) {
  const double d = double(pow_index(channel.p, channel.n));
  VectorXd adj_id = std::sqrt(d) * channel.mat.row(0).transpose();
  VectorXd id_coords = VectorXd::Zero(channel.mat.rows());
  id_coords[0] = std::sqrt(d);
  MatrixXcd gap = from_weyl_coeffs(id_coords - adj_id, channel.p, channel.n);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gap, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

void validate_channel(const Superop& channel, double tol) {
  if (choi_min_eigenvalue(channel) < -std::max(tol, 1e-10))
    throw std::invalid_argument("validate_channel: channel is not completely positive");
  if (!trace_non_increasing(channel, std::max(tol, 1e-9)))
    throw std::invalid_argument("validate_channel: channel increases trace");
}

// ------------------------------------------------------------- assembly ----

namespace {

Superop single_site_pauli_channel(const std::array<double, 3>& r) {
  Superop s(2, 1);
  const double px = r[0], py = r[1], pz = r[2];
  // label order (z, x): 0 = I, 1 = X, 2 = Z, 3 = Y
  s.mat.diagonal() << 1.0, 1.0 - 2.0 * (py + pz), 1.0 - 2.0 * (px + py),
      1.0 - 2.0 * (px + pz);
  return s;
}

}  // namespace

Superop noise_channel_dense(const NoiseModel& m, int p, int n) {
  switch (m.type) {
    case NoiseModel::Type::none:
      return Superop::identity(p, n);
    case NoiseModel::Type::gate_independent:
      if (m.channel.p != p || m.channel.n != n)
        throw std::invalid_argument("noise_channel_dense: channel dimension mismatch");
      return m.channel;
    case NoiseModel::Type::local_pauli: {
      if (p != 2) throw std::invalid_argument("noise_channel_dense: Pauli noise needs p=2");
      if (!m.joint_table.empty()) {
        Superop s(p, n);
        const Index dim = s.mat.rows();
        double p_id = 1.0;
        for (const auto& [lbl, q] : m.joint_table) p_id -= q;
        for (Index b = 0; b < dim; ++b) {
          WeylLabel wb = WeylLabel::from_index(b, p, n);
          double v = p_id;
          for (const auto& [lbl, q] : m.joint_table)
            v += q * (symplectic_form(lbl, wb, p) % 2 == 0 ? 1.0 : -1.0);
          s.mat(b, b) = v;
        }
        return s;
      }
      if (int(m.rates.size()) != n)
        throw std::invalid_argument("noise_channel_dense: one rate triple per site required");
      std::vector<Superop> sites;
      for (const auto& r : m.rates) sites.push_back(single_site_pauli_channel(r));
      return local_superop(sites);
    }
    case NoiseModel::Type::gate_dependent:
      throw std::invalid_argument("noise_channel_dense: gate-dependent model has no fixed channel");
  }
  throw std::logic_error("noise_channel_dense: bad model type");
}

Superop apply_noise(const NoiseModel& m, const GroupElement& g) {
  Superop ideal = element_superop(g);
  if (m.type == NoiseModel::Type::none) return ideal;
  if (m.type == NoiseModel::Type::gate_dependent) {
    if (!m.dense_map) throw std::invalid_argument("apply_noise: missing gate map");
    Superop err = m.dense_map(g);
    validate_channel(err);
    err.mat = err.mat * ideal.mat;
    return err;
  }
  Superop err = noise_channel_dense(m, g.p, g.n);
  err.mat = err.mat * ideal.mat;
  return err;
}

std::vector<WeylLabel> pauli_trajectory(const NoiseModel& m, int n, std::mt19937_64& rng) {
  std::vector<WeylLabel> out;
  if (m.type == NoiseModel::Type::none) return out;
  if (m.type != NoiseModel::Type::local_pauli)
    throw std::invalid_argument("pauli_trajectory: model is not Pauli-diagonal");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (!m.joint_table.empty()) {
    double r = unif(rng), acc = 0.0;
    for (const auto& [lbl, q] : m.joint_table) {
      acc += q;
      if (r < acc) {
        out.push_back(lbl);
        return out;
      }
    }
    return out;  // identity remainder
  }
  if (int(m.rates.size()) != n)
    throw std::invalid_argument("pauli_trajectory: one rate triple per site required");
  WeylLabel a;
  a.z.assign(size_t(n), 0);
  a.x.assign(size_t(n), 0);
  bool nontrivial = false;
  for (int k = 0; k < n; ++k) {
    const auto& r = m.rates[size_t(k)];
    double u = unif(rng);
    if (u < r[0]) {  // X
      a.x[size_t(k)] = 1;
    } else if (u < r[0] + r[1]) {  // Y
      a.x[size_t(k)] = 1;
      a.z[size_t(k)] = 1;
    } else if (u < r[0] + r[1] + r[2]) {  // Z
      a.z[size_t(k)] = 1;
    } else {
      continue;
    }
    nontrivial = true;
  }
  if (nontrivial) out.push_back(std::move(a));
  return out;
}

// ----------------------------------------------------------------- SPAM ----

SpamModel SpamModel::none_model(int p, int n) {
  SpamModel s;
  s.prep = Superop::identity(p, n);
  s.meas = Superop::identity(p, n);
  s.trivial = true;
  return s;
}

SpamModel SpamModel::depolarizing_meas(double f, int p, int n) {
  SpamModel s = none_model(p, n);
  s.meas.mat.diagonal().setConstant(f);
  s.meas.mat(0, 0) = 1.0;
  s.trivial = false;
  return s;
}

SpamModel SpamModel::from_json(const nlohmann::json& j, int p, int n) {
  SpamModel s = none_model(p, n);
  if (j.is_null()) return s;
  if (!j.is_object()) throw config_error("spam: config must be a JSON object");
  if (j.contains("prep")) {
    s.prep = noise_channel_dense(NoiseModel::from_json(j.at("prep"), p, n), p, n);
    s.trivial = false;
  }
  if (j.contains("meas")) {
    s.meas = noise_channel_dense(NoiseModel::from_json(j.at("meas"), p, n), p, n);
    s.trivial = false;
  }
  if (!s.trivial) {
    validate_channel(s.prep);
    Superop meas_adj = s.meas;
    meas_adj.mat = s.meas.mat.transpose();
    validate_channel(meas_adj);  // E_M^dagger must be a (sub)channel
  }
  return s;
}

VectorXd zero_state_coords(int p, int n) {
  const Index d = pow_index(p, n);
  if (p == 2) {
    VectorXd v = VectorXd::Zero(d * d);
    const double s = 1.0 / std::sqrt(double(d));
    for (Index z = 0; z < d; ++z) v[z * d] = s;
    return v;
  }
  MatrixXcd rho = MatrixXcd::Zero(d, d);
  rho(0, 0) = 1.0;
  return weyl_coeffs(rho, p, n);
}

VectorXd basis_effect_coords(int p, int n, std::uint64_t outcome) {
  const Index d = pow_index(p, n);
  if (p == 2) {
    VectorXd v = VectorXd::Zero(d * d);
    const double s = 1.0 / std::sqrt(double(d));
    for (Index z = 0; z < d; ++z)
      v[z * d] = (__builtin_parityll(std::uint64_t(z) & outcome) ? -s : s);
    return v;
  }
  MatrixXcd e = MatrixXcd::Zero(d, d);
  e(Index(outcome), Index(outcome)) = 1.0;
  return weyl_coeffs(e, p, n);
}

}  // namespace frb
