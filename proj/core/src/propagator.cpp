#include "heomflow/propagator.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <tuple>

#include "heomflow/errors.hpp"

namespace heomflow {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_shape(const Eigen::MatrixXcd& sigma, int site) {
  if (sigma.rows() != sigma.cols()) throw ContractViolation("operator must be square");
  if (site < 0 || site >= sigma.rows()) throw ContractViolation("site index out of range");
}

// out += row_coef * V_m sigma + col_coef * sigma V_m on column-major N x N blocks.
inline void add_site_term(const Complex* sigma, Complex* out, int n, int m, Complex row_coef,
                          Complex col_coef) {
  for (int l = 0; l < n; ++l) out[m + l * n] += row_coef * sigma[m + l * n];
  for (int j = 0; j < n; ++j) out[j + m * n] += col_coef * sigma[j + m * n];
}

double log_normalization(std::span<const int> entries, double log_abs_c0) {
  double acc = 0.0;
  for (int n : entries) {
    if (n > 0) acc += std::lgamma(static_cast<double>(n) + 1.0) + n * log_abs_c0;
  }
  return acc;
}

}  // namespace

HierarchyState::HierarchyState(std::shared_ptr<const HierarchyIndexTable> table,
                               Representation representation)
    : table_(std::move(table)),
      representation_(representation),
      dim_(table_->n_sites()),
      data_(table_->size() * block(), Complex{0.0, 0.0}) {}

HierarchyState HierarchyState::from_system(std::shared_ptr<const HierarchyIndexTable> table,
                                           const Eigen::MatrixXcd& rho0,
                                           Representation representation) {
  HierarchyState state(std::move(table), representation);
  if (rho0.rows() != state.dim() || rho0.cols() != state.dim()) {
    throw ConfigError("initial density matrix has the wrong dimension");
  }
  state.matrix(0) = rho0;
  return state;
}

Eigen::MatrixXcd phi_apply(int site, const Eigen::MatrixXcd& sigma) {
  require_shape(sigma, site);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(sigma.rows(), sigma.cols());
  add_site_term(sigma.data(), out.data(), static_cast<int>(sigma.rows()), site, kI, -kI);
  return out;
}

Eigen::MatrixXcd theta_apply(int site, const Eigen::MatrixXcd& sigma, const BathSpec& bath) {
  require_shape(sigma, site);
  const double a = 2.0 * bath.lambda_rad_per_fs() * bath.thermal_energy_rad_per_fs();
  const double b = bath.lambda_rad_per_fs() * bath.dissipation_rate_per_fs;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(sigma.rows(), sigma.cols());
  add_site_term(sigma.data(), out.data(), static_cast<int>(sigma.rows()), site, kI * a + b,
                -kI * a + b);
  return out;
}

HeomGenerator::HeomGenerator(const ExcitonModel& model, const BathSpec& bath,
                             std::shared_ptr<const HierarchyIndexTable> table,
                             Representation representation)
    : table_(std::move(table)), representation_(representation), dim_(model.n_sites()) {
  if (table_->n_sites() != dim_) {
    throw ContractViolation("hierarchy table and exciton model disagree on the number of sites");
  }
  // H_e is real symmetric in the site basis.
  const Eigen::MatrixXd h = build_hamiltonian(model).real();
  hamiltonian_.assign(h.data(), h.data() + h.size());

  const double gamma = bath.dissipation_rate_per_fs;
  const double a = 2.0 * bath.lambda_rad_per_fs() * bath.thermal_energy_rad_per_fs();
  const double b = bath.lambda_rad_per_fs() * gamma;
  theta_row_ = kI * a + b;
  theta_col_ = -kI * a + b;
  const double abs_c0 = std::abs(c0(bath));

  const auto size = table_->size();
  const auto n = static_cast<std::size_t>(dim_);
  damping_.resize(size);
  up_target_.assign(size * n, -1);
  up_weight_.assign(size * n, 0.0);
  down_target_.assign(size * n, -1);
  down_weight_.assign(size * n, 0.0);
  for (Ordinal k = 0; k < size; ++k) {
    damping_[k] = table_->tier(k) * gamma;
    const auto entries = table_->entries(k);
    for (std::size_t m = 0; m < n; ++m) {
      const double nm = entries[m];
      if (auto up = table_->raise(k, static_cast<int>(m))) {
        const double w =
            representation_ == Representation::Regular ? 1.0 : std::sqrt((nm + 1.0) * abs_c0);
        up_target_[k * n + m] = static_cast<std::int64_t>(*up);
        up_weight_[k * n + m] = w;
      }
      if (auto down = table_->lower(k, static_cast<int>(m))) {
        double w = nm;
        if (representation_ == Representation::Normalized) {
          // theta carries a factor lambda, so the coupling vanishes with c0.
          w = abs_c0 > 0.0 ? std::sqrt(nm / abs_c0) : 0.0;
        }
        // A zero weight (lambda = 0) drops the link entirely.
        if (w != 0.0) {
          down_target_[k * n + m] = static_cast<std::int64_t>(*down);
          down_weight_[k * n + m] = w;
        }
      }
    }
  }
}

namespace {

// Kernel with the system dimension as a template parameter (0 = runtime) so
// the small dense loops unroll for the common sizes.
template <int Fixed>
void apply_blocks(int runtime_n, std::size_t size, const double* h, const double* damping,
                  const std::int64_t* up_target, const double* up_weight,
                  const std::int64_t* down_target, const double* down_weight, Complex theta_row,
                  Complex theta_col, const Complex* in, Complex* out) {
  const int n = Fixed > 0 ? Fixed : runtime_n;
  const auto block = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  for (std::size_t k = 0; k < size; ++k) {
    const Complex* s = in + k * block;
    Complex* o = out + k * block;
    const double damp = damping[k];
    for (int l = 0; l < n; ++l) {
      for (int j = 0; j < n; ++j) {
        Complex comm{0.0, 0.0};
        for (int p = 0; p < n; ++p) comm += h[j + p * n] * s[p + l * n] - s[j + p * n] * h[p + l * n];
        o[j + l * n] = Complex{comm.imag(), -comm.real()} - damp * s[j + l * n];
      }
    }
    const std::size_t base = k * static_cast<std::size_t>(n);
    for (int m = 0; m < n; ++m) {
      const std::int64_t up = up_target[base + m];
      if (up >= 0) {
        const double w = up_weight[base + m];
        add_site_term(in + static_cast<std::size_t>(up) * block, o, n, m, Complex{0.0, w},
                      Complex{0.0, -w});
      }
      const std::int64_t down = down_target[base + m];
      if (down >= 0) {
        const double w = down_weight[base + m];
        add_site_term(in + static_cast<std::size_t>(down) * block, o, n, m, w * theta_row,
                      w * theta_col);
      }
    }
  }
}

}  // namespace

void HeomGenerator::apply(std::span<const Complex> in, std::span<Complex> out) const {
  const auto args = std::make_tuple(dim_, table_->size(), hamiltonian_.data(), damping_.data(),
                                    up_target_.data(), up_weight_.data(), down_target_.data(),
                                    down_weight_.data(), theta_row_, theta_col_, in.data(),
                                    out.data());
  switch (dim_) {
    case 1: std::apply(apply_blocks<1>, args); break;
    case 2: std::apply(apply_blocks<2>, args); break;
    case 3: std::apply(apply_blocks<3>, args); break;
    case 4: std::apply(apply_blocks<4>, args); break;
    case 7: std::apply(apply_blocks<7>, args); break;
    default: std::apply(apply_blocks<0>, args); break;
  }
}

namespace {

HierarchyState apply_generator(const HierarchyState& state, const ExcitonModel& model,
                               const BathSpec& bath, Representation expected) {
  if (state.representation() != expected) {
    throw ContractViolation("state representation does not match the requested right-hand side");
  }
  HeomGenerator gen(model, bath, state.shared_table(), expected);
  HierarchyState out(state.shared_table(), expected);
  gen.apply(state.data(), out.data());
  return out;
}

}  // namespace

HierarchyState rhs(const HierarchyState& state, const ExcitonModel& model, const BathSpec& bath) {
  return apply_generator(state, model, bath, Representation::Regular);
}

HierarchyState rhs_normalized(const HierarchyState& state, const ExcitonModel& model,
                              const BathSpec& bath) {
  return apply_generator(state, model, bath, Representation::Normalized);
}

HierarchyState convert_representation(const HierarchyState& state, Representation target,
                                      const BathSpec& bath) {
  HierarchyState out = state;
  if (state.representation() == target) return out;
  HierarchyState converted(state.shared_table(), target);
  const double abs_c0 = std::abs(c0(bath));
  const auto& table = state.table();
  // Regular -> Normalized multiplies by exp(-log_norm / 2).
  const double sign = target == Representation::Normalized ? -0.5 : 0.5;
  for (Ordinal k = 0; k < table.size(); ++k) {
    auto src = state.matrix(k);
    if (k == 0) {
      converted.matrix(k) = src;
      continue;
    }
    if (abs_c0 == 0.0) {
      if (src.cwiseAbs().maxCoeff() != 0.0) {
        throw ContractViolation("cannot rescale non-zero auxiliary operators when |c0| = 0");
      }
      continue;
    }
    const double scale = std::exp(sign * log_normalization(table.entries(k), std::log(abs_c0)));
    converted.matrix(k) = scale * src;
  }
  return converted;
}

void check_stability(const ExcitonModel& model, const BathSpec& bath, int max_tier, double dt_fs) {
  const double stiffest = max_tier * bath.dissipation_rate_per_fs +
                          characteristic_frequency(model, CharacteristicFrequency::EigenvalueSpread);
  const double product = dt_fs * stiffest;
  if (product > kStabilityLimit) {
    std::ostringstream os;
    os << "time step " << dt_fs << " fs violates the stability bound: dt * (max_tier * gamma + "
       << "omega_e) = " << product << " > " << kStabilityLimit;
    throw ConfigError(os.str());
  }
}

void evolve(HierarchyState& state, const ExcitonModel& model, const BathSpec& bath,
            const PropagationSettings& settings, const SampleObserver& observer) {
  if (!(settings.dt_fs > 0.0) || !std::isfinite(settings.dt_fs)) {
    throw ConfigError("dt_fs must be finite and positive");
  }
  if (!(settings.t_end_fs >= 0.0) || !std::isfinite(settings.t_end_fs)) {
    throw ConfigError("t_end_fs must be finite and non-negative");
  }
  if (settings.sample_every < 1) throw ConfigError("sample_every must be >= 1");
  const auto n_steps = static_cast<long long>(std::llround(settings.t_end_fs / settings.dt_fs));
  if (std::abs(static_cast<double>(n_steps) * settings.dt_fs - settings.t_end_fs) >
      1e-9 * std::max(1.0, settings.t_end_fs)) {
    throw ConfigError("t_end_fs must be an integer multiple of dt_fs");
  }

  const HeomGenerator gen(model, bath, state.shared_table(), state.representation());
  const auto len = state.data().size();
  std::vector<Complex> k1(len), k2(len), k3(len), k4(len), tmp(len);
  auto y = state.data();
  const double dt = settings.dt_fs;

  if (observer) observer(0.0, state);
  for (long long step = 1; step <= n_steps; ++step) {
    gen.apply(y, k1);
    for (std::size_t i = 0; i < len; ++i) tmp[i] = y[i] + (0.5 * dt) * k1[i];
    gen.apply(tmp, k2);
    for (std::size_t i = 0; i < len; ++i) tmp[i] = y[i] + (0.5 * dt) * k2[i];
    gen.apply(tmp, k3);
    for (std::size_t i = 0; i < len; ++i) tmp[i] = y[i] + dt * k3[i];
    gen.apply(tmp, k4);
    for (std::size_t i = 0; i < len; ++i) {
      y[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if (step % settings.sample_every == 0) {
      for (Complex v : y.first(state.block())) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
          throw NumericalError("hierarchy integration produced non-finite values at t = " +
                               std::to_string(static_cast<double>(step) * dt) + " fs");
        }
      }
      if (observer) observer(static_cast<double>(step) * dt, state);
    }
  }
}

Trajectory propagate(const Eigen::MatrixXcd& rho0, const ExcitonModel& model, const BathSpec& bath,
                     const PropagationSettings& settings) {
  PhysicalSystem{model, bath}.validate();
  const int n = model.n_sites();
  if (rho0.rows() != n || rho0.cols() != n) {
    throw ConfigError("initial density matrix has the wrong dimension");
  }
  if ((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ConfigError("initial density matrix is not Hermitian");
  }
  if (std::abs(rho0.trace() - Complex{1.0, 0.0}) > 1e-9) {
    throw ConfigError("initial density matrix does not have unit trace");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(rho0, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-9) {
    throw ConfigError("initial density matrix is not positive semidefinite");
  }
  check_stability(model, bath, settings.max_tier, settings.dt_fs);

  auto table = std::make_shared<const HierarchyIndexTable>(n, settings.max_tier);
  HierarchyState state = HierarchyState::from_system(table, rho0, settings.representation);

  Trajectory traj;
  traj.metadata = TrajectoryMetadata{model, bath, settings.max_tier, settings.dt_fs,
                                     settings.representation};
  evolve(state, model, bath, settings, [&](double t, const HierarchyState& s) {
    auto rho = s.matrix(0);
    const double drift = std::abs(rho.trace() - Complex{1.0, 0.0});
    if (drift > kTraceDriftTolerance) {
      throw NumericalError("trace drifted by " + std::to_string(drift) + " at t = " +
                           std::to_string(t) + " fs");
    }
    traj.times_fs.push_back(t);
    traj.system_states.emplace_back(rho);
    if (settings.keep_ados) {
      traj.ado_snapshots.push_back(convert_representation(s, Representation::Normalized, bath));
    }
  });
  return traj;
}

Eigen::MatrixXcd site_projector(int n_sites, int site) {
  if (site < 0 || site >= n_sites) throw ConfigError("site index out of range");
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n_sites, n_sites);
  p(site, site) = 1.0;
  return p;
}

}  // namespace heomflow
