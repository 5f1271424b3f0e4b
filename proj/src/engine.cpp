#include "frb/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "frb/errors.hpp"
#include "frb/stabilizer.hpp"
#include "frb/tableau.hpp"

namespace frb {

std::uint64_t config_hash_of(const std::string& canonical) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// ------------------------------------------------------------- seeding ----

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stage,
                          std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = mix64(master);
  s = mix64(s ^ (stage + 0x632be59bd9b4e019ull));
  s = mix64(s ^ (a + 0x9e6c63d0876a9a47ull));
  s = mix64(s ^ (b + 0xd1b54a32d192ed03ull));
  return s;
}

Backend parse_backend(const std::string& name) {
  if (name == "dense") return Backend::dense;
  if (name == "stabilizer") return Backend::stabilizer;
  throw config_error("parse_backend: unknown backend '" + name + "'");
}

std::string FilterSpec::column_name() const {
  switch (kind) {
    case FilterKind::standard: return lambda;
    case FilterKind::xeb: return "xeb";
    case FilterKind::trivial: return "trivial";
    case FilterKind::trace: return "trace";
    case FilterKind::exact_frame: return "exact:" + lambda;
  }
  throw std::logic_error("column_name: bad enum value");
}

// -------------------------------------------------------- filter_value ----

double filter_value(const FrameOperator& f, const IrrepSpec& lambda,
                    const GroupElement& g, std::uint64_t outcome,
                    const VectorXd& rho) {
  const double s = f.blocks.at(lambda.name);
  if (s == 0.0) return 0.0;
  VectorXd a = (lambda.diag.array() * rho.array()).matrix() / s;
  const Superop w = element_superop(g);
  const VectorXd u = w.mat * a;
  return u.dot(basis_effect_coords(f.p, f.n, outcome));
}

// ------------------------------------------------------ column planning ----

namespace {

struct ColPlan {
  FilterSpec spec;
  std::string name;
  double offset = 0.0;     // added after the inner product (trace: -1/d)
  bool is_trivial = false; // f = [clicked] / d
  bool via_pideal = false; // f = (d+1)/d (d p_ideal - 1)
  bool per_m = false;      // exact_frame: filter vector depends on the depth
  VectorXd a;              // S^+ P_lambda rho in PTM coordinates
  std::vector<VectorXd> a_per_m;
  // stabilizer fast path: list of (z label, coefficient / sqrt(d)) when the
  // filter vector lives on Z-type directions only
  bool z_supported = true;
  std::vector<std::pair<std::uint64_t, double>> zterms;
  std::vector<std::vector<std::pair<std::uint64_t, double>>> zterms_per_m;
};

GroupKind kind_for_lambda(const std::string& name) { return group_of_irrep(name); }

std::vector<std::pair<std::uint64_t, double>> z_terms_of(const VectorXd& a,
                                                         Index d, bool* pure_z) {
  std::vector<std::pair<std::uint64_t, double>> out;
  const double rt = std::sqrt(double(d));
  *pure_z = true;
  for (Index i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    if (i % d != 0) {
      *pure_z = false;
      continue;
    }
    out.emplace_back(std::uint64_t(i / d), a[i] / rt);
  }
  return out;
}

// Monte-Carlo frame operator of the depth-m circuit measure:
// S_m = E[w^T M w], assembled from the Z-type rows of sampled circuits.
MatrixXd frame_operator_mc(const Ensemble& e, int m, Index samples,
                           std::uint64_t seed) {
  const Index d = pow_index(e.p, e.n), dim = d * d;
  MatrixXd s = MatrixXd::Zero(dim, dim);
  for (Index k = 0; k < samples; ++k) {
    std::mt19937_64 rng(derive_seed(seed, 0xF7A3E, std::uint64_t(m),
                                    std::uint64_t(k)));
    std::vector<LayerSample> layers;
    layers.reserve(size_t(m));
    for (int l = 0; l < m; ++l) layers.push_back(sample_layer(e, rng));
    for (Index z = 0; z < d; ++z) {
      VectorXd v = VectorXd::Zero(dim);
      v[z * d] = 1.0;
      for (int l = m - 1; l >= 0; --l)
        apply_layer_adjoint(layers[size_t(l)], v);
      s.noalias() += v * v.transpose();
    }
  }
  return s / double(samples);
}

// S_m^+ P_lambda rho with the pseudoinverse restricted to the irrep support;
// an ill-conditioned restriction is reported instead of inverted.
VectorXd frame_filter_vector(const MatrixXd& s_m, const IrrepSpec& lambda,
                             const VectorXd& rho) {
  const std::vector<Index> supp = lambda.support();
  const Index k = Index(supp.size());
  MatrixXd b(k, k);
  VectorXd r(k);
  for (Index i = 0; i < k; ++i) {
    r[i] = rho[supp[size_t(i)]];
    for (Index j = 0; j < k; ++j)
      b(i, j) = s_m(supp[size_t(i)], supp[size_t(j)]);
  }
  Eigen::BDCSVD<MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv[0] <= 0.0 || sv[0] / sv[k - 1] > 1e8)
    throw convergence_error(
        "run_protocol: depth-m frame operator is ill-conditioned on irrep " +
        lambda.name);
  const VectorXd x = svd.solve(r);
  VectorXd a = VectorXd::Zero(rho.size());
  for (Index i = 0; i < k; ++i) a[supp[size_t(i)]] = x[i];
  return a;
}

struct EngineCtx {
  int n = 0;
  Index d = 0, dim = 0;
  std::vector<ColPlan> plans;
  bool need_pideal = false;  // some column reads the ideal outcome probability
  VectorXd rho;              // ideal |0..0> coordinates
  // dense backend
  VectorXd rho_prepped;
  enum class NoiseApp { none, diag, dense } noise_app = NoiseApp::none;
  VectorXd noise_diag;
  MatrixXd noise_mat;
  bool meas_noise = false;
  MatrixXd meas_mat;
};

void plan_columns(EngineCtx& ctx, const Ensemble& e, const ProtocolOptions& opt,
                  const std::vector<int>& ms) {
  const Index d = ctx.d;
  for (const FilterSpec& spec : opt.filters) {
    ColPlan plan;
    plan.spec = spec;
    plan.name = spec.column_name();
    switch (spec.kind) {
      case FilterKind::trivial:
        plan.is_trivial = true;
        break;
      case FilterKind::xeb:
        plan.via_pideal = true;
        break;
      case FilterKind::standard:
      case FilterKind::exact_frame: {
        const GroupKind kind = kind_for_lambda(spec.lambda);
        const auto irreps = irrep_projectors(kind, e.p, e.n);
        const IrrepSpec& lam = find_irrep(irreps, spec.lambda);
        if (spec.kind == FilterKind::standard) {
          const FrameOperator f = frame_operator(kind, e.p, e.n);
          const double s = f.blocks.at(lam.name);
          plan.a = s == 0.0
                       ? VectorXd::Zero(ctx.dim).eval()
                       : ((lam.diag.array() * ctx.rho.array()) / s).matrix();
          plan.zterms = z_terms_of(plan.a, d, &plan.z_supported);
          if (kind == GroupKind::clifford && spec.lambda == "ad")
            plan.via_pideal = true;  // exact identity on the stabilizer path
        } else {
          if (e.n > 5)
            throw capacity_error(
                "run_protocol: exact_frame filters limited to n <= 5");
          plan.per_m = true;
          MatrixXd s_exact;
          if (e.arch == Arch::exact)
            s_exact = frame_operator(e.group, e.p, e.n).diag.asDiagonal();
          for (size_t mi = 0; mi < ms.size(); ++mi) {
            const int m = ms[mi];
            MatrixXd s_m =
                e.arch == Arch::exact
                    ? s_exact
                    : frame_operator_mc(e, std::max(m, 1), opt.frame_mc_samples,
                                        opt.seed);
            plan.a_per_m.push_back(frame_filter_vector(s_m, lam, ctx.rho));
            bool pure = true;
            plan.zterms_per_m.push_back(z_terms_of(plan.a_per_m.back(), d, &pure));
            plan.z_supported = plan.z_supported && pure;
          }
        }
        break;
      }
      case FilterKind::trace: {
        if (!e.right_lc_invariant)
          throw config_error(
              "run_protocol: trace filter needs an ensemble invariant under "
              "right local-Clifford multiplication");
        // S^-1 xi with xi = d^-2 sum_z 3^|z| Z(z); Clifford frame inverse is
        // P_1 + (d+1) P_ad.
        plan.a = VectorXd::Zero(ctx.dim);
        const double rt = std::sqrt(double(d));
        for (std::uint64_t z = 0; z < std::uint64_t(d); ++z) {
          const double pinv_s = z == 0 ? 1.0 : double(d + 1);
          plan.a[Index(z) * d] = std::pow(3.0, __builtin_popcountll(z)) * rt /
                                 double(d * d) * pinv_s;
        }
        plan.offset = -1.0 / double(d);
        plan.zterms = z_terms_of(plan.a, d, &plan.z_supported);
        break;
      }
    }
    ctx.need_pideal = ctx.need_pideal || plan.via_pideal;
    ctx.plans.push_back(std::move(plan));
  }
}

// ------------------------------------------------------- per-task state ----

// Aggregates one (depth, circuit) task writes into its private slots.
struct TaskOut {
  std::vector<double> sum, sumsq;  // per column over the N_M measurements
};

double dot_with_effect(const std::vector<double>& uz, std::uint64_t i) {
  double f = 0.0;
  for (std::uint64_t z = 0; z < uz.size(); ++z) {
    const double c = uz[size_t(z)];
    if (c != 0.0) f += __builtin_parityll(z & i) ? -c : c;
  }
  return f;
}

}  // namespace

// -------------------------------------------------------- run_protocol ----

RBDataset run_protocol(const Ensemble& e, const NoiseModel& noise,
                       const SpamModel& spam, const std::vector<int>& ms_in,
                       const ProtocolOptions& opt) {
  e.validate();
  if (e.p != 2)
    throw config_error("run_protocol: only p = 2 ensembles are supported");
  if (opt.n_circuits < 1 || opt.n_meas < 1)
    throw config_error("run_protocol: need n_circuits >= 1 and n_meas >= 1");
  if (opt.filters.empty())
    throw config_error("run_protocol: no filter columns requested");
  if (noise.type == NoiseModel::Type::gate_dependent)
    throw config_error("run_protocol: gate-dependent noise is not supported");

  // depth list: drop or prepend m = 0 according to the option
  std::vector<int> ms;
  for (int m : ms_in) {
    if (m < 0) throw config_error("run_protocol: negative depth");
    if (m == 0 && !opt.include_m0) continue;
    if (std::find(ms.begin(), ms.end(), m) == ms.end()) ms.push_back(m);
  }
  if (opt.include_m0 && std::find(ms.begin(), ms.end(), 0) == ms.end())
    ms.insert(ms.begin(), 0);
  if (ms.empty()) throw config_error("run_protocol: empty depth list");

  EngineCtx ctx;
  ctx.n = e.n;
  ctx.d = pow_index(e.p, e.n);
  ctx.dim = ctx.d * ctx.d;
  ctx.rho = zero_state_coords(e.p, e.n);

  const bool dense = opt.backend == Backend::dense;
  if (dense) {
    if (e.n > 5)
      throw capacity_error("run_protocol: dense backend limited to n <= 5");
    ctx.rho_prepped = spam.trivial ? ctx.rho : (spam.prep.mat * ctx.rho).eval();
    if (noise.type == NoiseModel::Type::local_pauli) {
      ctx.noise_app = EngineCtx::NoiseApp::diag;
      ctx.noise_diag = noise_channel_dense(noise, e.p, e.n).mat.diagonal();
    } else if (noise.type == NoiseModel::Type::gate_independent) {
      ctx.noise_mat = noise.channel.mat;
      const MatrixXd off =
          ctx.noise_mat - MatrixXd(ctx.noise_mat.diagonal().asDiagonal());
      if (off.norm() < 1e-13) {
        ctx.noise_app = EngineCtx::NoiseApp::diag;
        ctx.noise_diag = ctx.noise_mat.diagonal();
      } else {
        ctx.noise_app = EngineCtx::NoiseApp::dense;
      }
    }
    if (!spam.trivial) {
      ctx.meas_mat = spam.meas.mat;
      ctx.meas_noise =
          (ctx.meas_mat - MatrixXd::Identity(ctx.dim, ctx.dim)).norm() > 1e-14;
    }
  } else {
    if (e.gateset == GateSet::haar && e.arch != Arch::exact)
      throw config_error("run_protocol: stabilizer backend needs Clifford gates");
    if (e.arch == Arch::exact && e.group == GroupKind::unitary_2_group)
      throw config_error("run_protocol: stabilizer backend needs Clifford gates");
    if (noise.type != NoiseModel::Type::none &&
        noise.type != NoiseModel::Type::local_pauli)
      throw config_error(
          "run_protocol: stabilizer backend needs Pauli-channel noise");
    if (!spam.trivial)
      throw config_error(
          "run_protocol: stabilizer backend does not model SPAM channels");
    if (e.n > 63)
      throw capacity_error("run_protocol: stabilizer backend limited to n <= 63");
  }

  plan_columns(ctx, e, opt, ms);
  if (!dense) {
    for (const ColPlan& plan : ctx.plans)
      if (!plan.z_supported && e.n > 5)
        throw capacity_error(
            "run_protocol: column " + plan.name +
            " needs dense filter vectors; stabilizer path limited to n <= 5");
  }

  const Index n_cols = Index(ctx.plans.size());
  const Index n_ms = Index(ms.size());
  const Index nc = opt.n_circuits, nm = opt.n_meas;
  const double d = double(ctx.d);

  RBDataset ds;
  ds.ms = ms;
  ds.n_circuits = nc;
  ds.n_meas = nm;
  ds.seed = opt.seed;
  for (const ColPlan& plan : ctx.plans) ds.columns.push_back(plan.name);
  {
    std::ostringstream os;
    os << e.to_json().dump() << '|' << noise.to_json().dump() << '|'
       << (spam.trivial ? "spam0" : "spam1") << '|'
       << (dense ? "dense" : "stabilizer") << '|' << nc << 'x' << nm << '|'
       << opt.seed << '|' << opt.include_m0;
    for (int m : ms) os << ',' << m;
    for (const auto& c : ds.columns) os << ';' << c;
    ds.config_hash = config_hash_of(os.str());
  }

  ds.circuit_means.assign(
      size_t(n_cols),
      std::vector<std::vector<double>>(size_t(n_ms),
                                       std::vector<double>(size_t(nc), 0.0)));
  ds.circuit_vars = ds.circuit_means;
  if (opt.shot_log) ds.shots.resize(size_t(n_ms * nc * nm));

  const Index n_tasks = n_ms * nc;
  std::exception_ptr task_error = nullptr;

#pragma omp parallel for schedule(dynamic)
  for (Index task = 0; task < n_tasks; ++task) {
    try {
      const Index mi = task / nc, c = task % nc;
      const int m = ms[size_t(mi)];
      const std::uint64_t cseed =
          derive_seed(opt.seed, 0xC1, std::uint64_t(mi), std::uint64_t(c));
      std::mt19937_64 rng(cseed);

      std::vector<LayerSample> layers;
      layers.reserve(size_t(m));
      for (int l = 0; l < m; ++l) layers.push_back(sample_layer(e, rng));

      TaskOut out;
      out.sum.assign(size_t(n_cols), 0.0);
      out.sumsq.assign(size_t(n_cols), 0.0);

      auto record = [&](Index j, std::uint64_t outcome, bool clicked,
                        const std::vector<double>& fv) {
        for (Index k = 0; k < n_cols; ++k) {
          out.sum[size_t(k)] += fv[size_t(k)];
          out.sumsq[size_t(k)] += fv[size_t(k)] * fv[size_t(k)];
        }
        if (opt.shot_log) {
          ShotRecord& sr = ds.shots[size_t((mi * nc + c) * nm + j)];
          sr.m = m;
          sr.circuit = c;
          sr.seed = cseed;
          sr.outcome = clicked ? outcome : ~std::uint64_t{0};
          sr.clicked = clicked;
          sr.filters = fv;
        }
      };

      std::vector<double> fv(size_t(n_cols), 0.0);
      std::uniform_real_distribution<double> unif(0.0, 1.0);

      if (dense) {
        // noisy propagation of the prepared state
        VectorXd v = ctx.rho_prepped.size() ? ctx.rho_prepped : ctx.rho;
        for (const LayerSample& layer : layers) {
          apply_layer(layer, v);
          if (ctx.noise_app == EngineCtx::NoiseApp::diag)
            v.array() *= ctx.noise_diag.array();
          else if (ctx.noise_app == EngineCtx::NoiseApp::dense)
            v = ctx.noise_mat * v;
        }
        if (ctx.meas_noise) v = ctx.meas_mat * v;

        // outcome distribution p(i) = sum_z v[z d] (-1)^{z.i} / sqrt(d)
        std::vector<double> cdf(size_t(ctx.d), 0.0);
        double tot = 0.0;
        for (std::uint64_t i = 0; i < std::uint64_t(ctx.d); ++i) {
          double p = 0.0;
          for (std::uint64_t z = 0; z < std::uint64_t(ctx.d); ++z) {
            const double cz = v[Index(z) * ctx.d];
            p += __builtin_parityll(z & i) ? -cz : cz;
          }
          tot += std::max(0.0, p / std::sqrt(d));
          cdf[size_t(i)] = tot;
        }

        // ideal-circuit filter vectors, reduced to their Z-type overlaps
        std::vector<std::vector<double>> uz(static_cast<size_t>(n_cols));
        std::vector<double> pz;
        auto reduce_z = [&](const VectorXd& u) {
          std::vector<double> r(size_t(ctx.d));
          for (Index z = 0; z < ctx.d; ++z) r[size_t(z)] = u[z * ctx.d] / std::sqrt(d);
          return r;
        };
        for (Index k = 0; k < n_cols; ++k) {
          const ColPlan& plan = ctx.plans[size_t(k)];
          if (plan.is_trivial || plan.via_pideal) continue;
          VectorXd u = plan.per_m ? plan.a_per_m[size_t(mi)] : plan.a;
          for (const LayerSample& layer : layers) apply_layer(layer, u);
          uz[size_t(k)] = reduce_z(u);
        }
        if (ctx.need_pideal) {
          VectorXd u = ctx.rho;
          for (const LayerSample& layer : layers) apply_layer(layer, u);
          pz = reduce_z(u);
        }

        for (Index j = 0; j < nm; ++j) {
          const double r = unif(rng);
          std::uint64_t outcome = 0;
          bool clicked = r < cdf[size_t(ctx.d - 1)];
          if (clicked)
            outcome = std::uint64_t(
                std::lower_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
          for (Index k = 0; k < n_cols; ++k) {
            const ColPlan& plan = ctx.plans[size_t(k)];
            double f = 0.0;
            if (clicked) {
              if (plan.is_trivial)
                f = 1.0 / d;
              else if (plan.via_pideal)
                f = (d + 1.0) / d * (d * dot_with_effect(pz, outcome) - 1.0);
              else
                f = dot_with_effect(uz[size_t(k)], outcome) + plan.offset;
            }
            fv[size_t(k)] = f;
          }
          record(j, outcome, clicked, fv);
        }
      } else {
        // stabilizer backend: accumulate the ideal circuit tableau
        std::vector<CliffordTableau> tabs;
        tabs.reserve(layers.size());
        CliffordTableau g_tab = CliffordTableau::identity(e.n);
        for (const LayerSample& layer : layers) {
          tabs.push_back(layer_tableau(layer));
          g_tab = g_tab.then(tabs.back());
        }
        StabilizerState st_ideal = StabilizerState::zero_state(e.n);
        st_ideal.apply(g_tab);

        // per-circuit filter caches
        struct ZCache {
          std::vector<double> coeff;      // c_z * sign, 0 when not Z-type
          std::vector<std::uint64_t> zimg;
        };
        std::vector<ZCache> zc(static_cast<size_t>(n_cols));
        std::vector<std::vector<double>> uz(static_cast<size_t>(n_cols));
        for (Index k = 0; k < n_cols; ++k) {
          const ColPlan& plan = ctx.plans[size_t(k)];
          if (plan.is_trivial || plan.via_pideal) continue;
          if (plan.z_supported) {
            const auto& terms =
                plan.per_m ? plan.zterms_per_m[size_t(mi)] : plan.zterms;
            ZCache& cache = zc[size_t(k)];
            for (const auto& [z, cz] : terms) {
              const PauliBits q = g_tab.conjugate(PauliBits{z, 0, 0});
              if (q.x != 0) continue;  // moved off the Z-type directions
              cache.coeff.push_back(q.s == 2 ? -cz : cz);
              cache.zimg.push_back(q.z);
            }
          } else {
            // dense fallback through the signed-permutation action
            const SignedPerm sp = clifford_action(g_tab);
            const VectorXd& a = plan.per_m ? plan.a_per_m[size_t(mi)] : plan.a;
            VectorXd u(a.size());
            sp.apply(a.data(), u.data());
            std::vector<double> r(size_t(ctx.d));
            for (Index z = 0; z < ctx.d; ++z)
              r[size_t(z)] = u[z * ctx.d] / std::sqrt(d);
            uz[size_t(k)] = std::move(r);
          }
        }

        for (Index j = 0; j < nm; ++j) {
          StabilizerState st = StabilizerState::zero_state(e.n);
          for (size_t l = 0; l < tabs.size(); ++l) {
            st.apply(tabs[l]);
            for (const WeylLabel& lbl : pauli_trajectory(noise, e.n, rng))
              st.apply_pauli(PauliBits::from_weyl(lbl));
          }
          const std::uint64_t outcome = st.measure_all(rng);
          for (Index k = 0; k < n_cols; ++k) {
            const ColPlan& plan = ctx.plans[size_t(k)];
            double f = 0.0;
            if (plan.is_trivial) {
              f = 1.0 / d;
            } else if (plan.via_pideal) {
              const double p = st_ideal.prob_of_outcome(outcome);
              f = (d + 1.0) / d * (d * p - 1.0);
            } else if (plan.z_supported) {
              // zterms carry a / sqrt(d), the effect overlap per Z direction
              const ZCache& cache = zc[size_t(k)];
              for (size_t t = 0; t < cache.coeff.size(); ++t)
                f += __builtin_parityll(cache.zimg[t] & outcome)
                         ? -cache.coeff[t]
                         : cache.coeff[t];
              f += plan.offset;
            } else {
              f = dot_with_effect(uz[size_t(k)], outcome) + plan.offset;
            }
            fv[size_t(k)] = f;
          }
          record(j, outcome, true, fv);
        }
      }

      for (Index k = 0; k < n_cols; ++k) {
        const double mean = out.sum[size_t(k)] / double(nm);
        ds.circuit_means[size_t(k)][size_t(mi)][size_t(c)] = mean;
        ds.circuit_vars[size_t(k)][size_t(mi)][size_t(c)] =
            nm > 1
                ? std::max(0.0, (out.sumsq[size_t(k)] - double(nm) * mean * mean) /
                                    double(nm - 1))
                : 0.0;
      }
    } catch (...) {
#pragma omp critical
      if (!task_error) task_error = std::current_exception();
    }
  }
  if (task_error) std::rethrow_exception(task_error);

  for (Index k = 0; k < n_cols; ++k) {
    for (Index mi = 0; mi < n_ms; ++mi) {
      const auto& means = ds.circuit_means[size_t(k)][size_t(mi)];
      double s1 = 0.0;
      for (double x : means) s1 += x;
      const double mean = s1 / double(nc);
      double s2 = 0.0;
      for (double x : means) s2 += (x - mean) * (x - mean);
      const double var = nc > 1 ? s2 / double(nc - 1) : 0.0;
      EstimateRow row;
      row.column = ds.columns[size_t(k)];
      row.m = ms[size_t(mi)];
      row.n_shots = nc * nm;
      row.estimate = mean;
      row.stderr_ = std::sqrt(var / double(nc));
      ds.estimates.push_back(std::move(row));
    }
  }
  return ds;
}

// ----------------------------------------------------------- estimators ----

const EstimateRow& RBDataset::row(const std::string& column, int m) const {
  for (const EstimateRow& r : estimates)
    if (r.column == column && r.m == m) return r;
  throw std::invalid_argument("RBDataset::row: no estimate for column '" +
                              column + "' at m=" + std::to_string(m));
}

std::vector<std::pair<int, double>> xeb_estimator(const RBDataset& ds, Index d) {
  const bool have_xeb =
      std::find(ds.columns.begin(), ds.columns.end(), "xeb") != ds.columns.end();
  const std::string col = have_xeb ? "xeb" : "ad";
  if (!have_xeb &&
      std::find(ds.columns.begin(), ds.columns.end(), "ad") == ds.columns.end())
    throw std::invalid_argument("xeb_estimator: adjoint-irrep column required");
  std::vector<std::pair<int, double>> out;
  const double dd = double(d);
  for (int m : ds.ms) {
    if (m == 0)  // empty circuit: defined as the ideal-overlap constant
      out.emplace_back(m, (dd - 1.0) / (dd + 1.0));
    else
      out.emplace_back(m, dd / (dd + 1.0) * ds.row(col, m).estimate);
  }
  return out;
}

VarianceDecomposition multishot_variance(const RBDataset& ds,
                                         const std::string& column, int m) {
  Index k = -1;
  for (size_t i = 0; i < ds.columns.size(); ++i)
    if (ds.columns[i] == column) k = Index(i);
  Index mi = -1;
  for (size_t i = 0; i < ds.ms.size(); ++i)
    if (ds.ms[i] == m) mi = Index(i);
  if (k < 0 || mi < 0 || ds.circuit_means.empty())
    throw std::invalid_argument("multishot_variance: column or depth not found");
  const auto& means = ds.circuit_means[size_t(k)][size_t(mi)];
  const auto& vars = ds.circuit_vars[size_t(k)][size_t(mi)];
  const Index nc = Index(means.size());

  VarianceDecomposition out;
  double s = 0.0;
  for (double x : vars) s += x;
  out.within = s / double(nc);
  double s1 = 0.0;
  for (double x : means) s1 += x;
  const double mean = s1 / double(nc);
  double s2 = 0.0;
  for (double x : means) s2 += (x - mean) * (x - mean);
  const double var_means = nc > 1 ? s2 / double(nc - 1) : 0.0;
  out.between = var_means - out.within / double(ds.n_meas);
  out.total = out.within + out.between;
  return out;
}

// -------------------------------------------------------------- output ----

void write_csv(std::ostream& os, const RBDataset& ds) {
  os << "# config_hash=0x" << std::hex << ds.config_hash << std::dec
     << " tool_version=" << kToolVersion << '\n';
  os << "lambda,m,n_shots,estimate,stderr\n";
  os << std::setprecision(17);
  for (const EstimateRow& r : ds.estimates)
    os << r.column << ',' << r.m << ',' << r.n_shots << ',' << r.estimate << ','
       << r.stderr_ << '\n';
}

void write_jsonl(std::ostream& os, const RBDataset& ds) {
  if (ds.shots.empty())
    throw std::invalid_argument("write_jsonl: dataset has no shot log");
  {
    nlohmann::json meta;
    std::ostringstream hash_hex;
    hash_hex << "0x" << std::hex << ds.config_hash;
    meta["config_hash"] = hash_hex.str();
    meta["tool_version"] = kToolVersion;
    os << meta.dump() << '\n';
  }
  for (const ShotRecord& sr : ds.shots) {
    nlohmann::json j;
    j["m"] = sr.m;
    j["circuit"] = sr.circuit;
    std::ostringstream seed_hex, out_hex;
    seed_hex << "0x" << std::hex << sr.seed;
    j["seed"] = seed_hex.str();
    if (sr.clicked) {
      out_hex << "0x" << std::hex << sr.outcome;
      j["outcome"] = out_hex.str();
    } else {
      j["outcome"] = nullptr;
    }
    nlohmann::json f = nlohmann::json::object();
    for (size_t k = 0; k < ds.columns.size(); ++k)
      f[ds.columns[k]] = sr.filters[k];
    j["filters"] = std::move(f);
    os << j.dump() << '\n';
  }
}

}  // namespace frb
