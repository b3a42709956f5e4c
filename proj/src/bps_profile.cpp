#include "smectic/bps_profile.hpp"

#include "smectic/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace smectic {

double profile_rhs(double g, const JumpStates& j) {
  const Eigen::Vector3d p = j.jump();
  const Eigen::Vector3d& mm = j.m_minus();
  const double denom = std::abs(p.head<2>().dot(j.nu().head<2>()));
  const double a = g * p.x() + mm.x();
  const double b = g * p.y() + mm.y();
  return std::abs(g * p.z() + mm.z() - 0.5 * a * a - 0.5 * b * b) / denom;
}

namespace {

using State = std::array<double, 2>;
using Rhs = std::function<State(const State&)>;

struct Sample {
  double t;
  State y;
  State dy;
};

State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms) {
  State out = y;
  for (const auto& [c, k] : terms) {
    out[0] += h * c * (*k)[0];
    out[1] += h * c * (*k)[1];
  }
  return out;
}

// Dormand-Prince 5(4) with FSAL. Component 0 is controlled relative to its
// magnitude (it decays exponentially in the tails), component 1 absolutely.
std::vector<Sample> integrate_dopri(const Rhs& f, State y, double t_end, double tol,
                                    const ProfileOptions& opt, const char* leg) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2, (void)c3, (void)c4, (void)c5;  // autonomous system

  std::vector<Sample> out;
  double t = 0.0;
  State k1 = f(y);
  out.push_back({t, y, k1});
  double h = std::min(opt.initial_step, opt.max_step);

  std::size_t steps = 0;
  while (t < t_end) {
    if (++steps > opt.max_steps) {
      std::ostringstream msg;
      msg << "solve_profile (" << leg << "): exceeded " << opt.max_steps << " steps at t=" << t;
      throw NumericalError(msg.str());
    }
    h = std::min({h, opt.max_step, t_end - t});
    const State k2 = f(axpy(y, h, {{a21, &k1}}));
    const State k3 = f(axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const State k4 = f(axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State k5 = f(axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State k6 = f(axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State y_new = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const State k7 = f(y_new);

    double err = 0.0;
    for (int c = 0; c < 2; ++c) {
      const double e = h * (e1 * k1[c] + e3 * k3[c] + e4 * k4[c] + e5 * k5[c] + e6 * k6[c] +
                            e7 * k7[c]);
      const double scale = c == 0 ? tol * std::max(std::abs(y_new[c]), 1e-300) : tol;
      err = std::max(err, std::abs(e) / scale);
    }

    if (err <= 1.0) {
      t += h;
      y = y_new;
      k1 = k7;
      if (y[0] < -tol || y[0] > 1.0 + tol) {
        std::ostringstream msg;
        msg << "solve_profile (" << leg << "): profile left [0, 1] at |t|=" << t
            << ", value " << y[0];
        throw NumericalError(msg.str());
      }
      out.push_back({t, y, k1});
    }
    const double factor = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
    h *= std::clamp(factor, 0.2, 5.0);
    if (h < opt.min_step) {
      std::ostringstream msg;
      msg << "solve_profile (" << leg << "): step size underflow (h=" << h << ") at |t|=" << t
          << ", value " << y[0] << ", error ratio " << err;
      throw NumericalError(msg.str());
    }
  }
  return out;
}

struct LogFit {
  double slope = 0.0;
  double r2 = 0.0;
};

LogFit fit_log_linear(const std::vector<double>& t, const std::vector<double>& y) {
  std::vector<double> xs, ls;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (y[i] > 0.0) {
      xs.push_back(t[i]);
      ls.push_back(std::log(y[i]));
    }
  if (xs.size() < 3) throw NumericalError("solve_profile: too few tail samples for decay fit");
  const Eigen::Map<const Eigen::ArrayXd> x(xs.data(), xs.size());
  const Eigen::Map<const Eigen::ArrayXd> l(ls.data(), ls.size());
  const double xm = x.mean(), lm = l.mean();
  const double sxx = (x - xm).square().sum();
  const double sxl = ((x - xm) * (l - lm)).sum();
  const double sll = (l - lm).square().sum();
  LogFit fit;
  fit.slope = sxl / sxx;
  fit.r2 = sll > 0.0 ? (sxl * sxl) / (sxx * sll) : 1.0;
  return fit;
}

double hermite(double t0, double t1, double y0, double y1, double d0, double d1, double t) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * h * d1;
}

// Five-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 5> gl_x{-0.9061798459386640, -0.5384693101056831, 0.0,
                                     0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> gl_w{0.2369268850561891, 0.4786286704993665,
                                     0.5688888888888889, 0.4786286704993665,
                                     0.2369268850561891};

template <class F>
double gauss5(double a, double b, F&& f) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < 5; ++i) acc += gl_w[i] * f(mid + half * gl_x[i]);
  return acc * half;
}

}  // namespace

ProfileSolution solve_profile(const JumpStates& j, double t_max, double tol,
                              const ProfileOptions& options) {
  if (!(t_max > 0.0)) throw std::invalid_argument("solve_profile: t_max must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_profile: tol must be positive");

  // Each leg works in the distance to the limit it approaches, with the
  // compression expanded about that limit (the constant term vanishes for
  // compatible states), so the tails keep relative precision.
  const Eigen::Vector3d p = j.jump();
  const double denom = std::abs(p.head<2>().dot(j.nu().head<2>()));
  const double quad = 0.5 * p.head<2>().squaredNorm();
  const double lin_plus = j.m_plus().head<2>().dot(p.head<2>()) - p.z();
  const double lin_minus = p.z() - j.m_minus().head<2>().dot(p.head<2>());
  // Forward leg in q = 1 − g.
  const Rhs forward = [=](const State& s) -> State {
    const double q = s[0];
    return {-std::abs(q * (lin_plus - quad * q)) / denom, 1.0 - q};
  };
  // Backward leg in τ = −t.
  const Rhs backward = [=](const State& s) -> State {
    const double g = s[0];
    return {-std::abs(g * (lin_minus - quad * g)) / denom, -g};
  };

  const auto fwd = integrate_dopri(forward, {0.5, 0.0}, t_max, tol, options, "forward");
  const auto bwd = integrate_dopri(backward, {0.5, 0.0}, t_max, tol, options, "backward");

  ProfileSolution sol{j, {}, {}, {}, {}, {}, 0, 0, 0, 0,
                      std::abs(j.jump().head<2>().dot(j.nu().head<2>()))};
  const std::size_t total = fwd.size() + bwd.size() - 1;
  sol.ts.reserve(total);
  sol.gs.reserve(total);
  sol.tails.reserve(total);
  sol.dgs.reserve(total);
  sol.antiderivative.reserve(total);
  for (auto it = bwd.rbegin(); it != bwd.rend(); ++it) {
    if (it->t == 0.0) continue;
    sol.ts.push_back(-it->t);
    sol.gs.push_back(it->y[0]);
    sol.tails.push_back(it->y[0]);
    sol.dgs.push_back(-it->dy[0]);
    sol.antiderivative.push_back(it->y[1]);
  }
  for (const Sample& s : fwd) {
    sol.ts.push_back(s.t);
    sol.gs.push_back(1.0 - s.y[0]);
    sol.tails.push_back(s.y[0]);
    sol.dgs.push_back(-s.dy[0]);
    sol.antiderivative.push_back(s.y[1]);
  }

  std::vector<double> tp, yp, tm, ym;
  for (std::size_t i = 0; i < sol.ts.size(); ++i) {
    if (sol.ts[i] >= 0.75 * t_max) {
      tp.push_back(sol.ts[i]);
      yp.push_back(sol.tails[i]);
    } else if (sol.ts[i] <= -0.75 * t_max) {
      tm.push_back(sol.ts[i]);
      ym.push_back(sol.tails[i]);
    }
  }
  const LogFit plus = fit_log_linear(tp, yp);
  const LogFit minus = fit_log_linear(tm, ym);
  sol.decay_plus = -plus.slope;
  sol.decay_minus = minus.slope;
  sol.fit_r2_plus = plus.r2;
  sol.fit_r2_minus = minus.r2;
  return sol;
}

namespace {

// Index i with ts[i] <= t <= ts[i+1].
std::size_t bracket(const std::vector<double>& ts, double t) {
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  std::size_t i = static_cast<std::size_t>(it - ts.begin());
  if (i == 0) return 0;
  return std::min(i - 1, ts.size() - 2);
}

void out_of_span(const ProfileSolution& s, double t) {
  std::ostringstream msg;
  msg << "profile evaluated at t=" << t << " outside the sampled span [" << s.t_min() << ", "
      << s.t_max() << "]; enable tail extension or raise t_max";
  throw std::out_of_range(msg.str());
}

}  // namespace

double ProfileSolution::g_at(double t, bool extend) const {
  if (t > t_max()) {
    if (!extend) out_of_span(*this, t);
    return 1.0 - tails.back() * std::exp(-decay_plus * (t - t_max()));
  }
  if (t < t_min()) {
    if (!extend) out_of_span(*this, t);
    return tails.front() * std::exp(decay_minus * (t - t_min()));
  }
  const std::size_t i = bracket(ts, t);
  const double y = ts[i] >= 0.0
                       ? hermite(ts[i], ts[i + 1], tails[i], tails[i + 1], -dgs[i], -dgs[i + 1], t)
                       : hermite(ts[i], ts[i + 1], tails[i], tails[i + 1], dgs[i], dgs[i + 1], t);
  return ts[i] >= 0.0 ? 1.0 - y : y;
}

double ProfileSolution::antiderivative_at(double t, bool extend) const {
  if (t > t_max()) {
    if (!extend) out_of_span(*this, t);
    const double dt = t - t_max();
    return antiderivative.back() + dt -
           tails.back() * (1.0 - std::exp(-decay_plus * dt)) / decay_plus;
  }
  if (t < t_min()) {
    if (!extend) out_of_span(*this, t);
    const double dt = t - t_min();
    return antiderivative.front() - tails.front() * (1.0 - std::exp(decay_minus * dt)) / decay_minus;
  }
  const std::size_t i = bracket(ts, t);
  return hermite(ts[i], ts[i + 1], antiderivative[i], antiderivative[i + 1], gs[i], gs[i + 1], t);
}

double ProfileSolution::tail_extension_error() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] >= 0.75 * t_max())
      worst = std::max(worst, std::abs(tails[i] - tails.back() *
                                                      std::exp(-decay_plus * (ts[i] - t_max()))));
    else if (ts[i] <= 0.75 * t_min())
      worst = std::max(worst, std::abs(tails[i] - tails.front() *
                                                      std::exp(decay_minus * (ts[i] - t_min()))));
  }
  return worst;
}

double profile_energy(const ProfileSolution& sol, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("profile_energy: epsilon must be positive");
  constexpr double span_tol = 1e-8;
  if (sol.tails.front() > span_tol || sol.tails.back() > span_tol) {
    std::ostringstream msg;
    msg << "profile_energy: profile not converged at the span ends (g(-T)=" << sol.tails.front()
        << ", 1-g(T)=" << sol.tails.back() << "); increase t_max";
    throw std::domain_error(msg.str());
  }
  const JumpStates& j = sol.j;
  const Eigen::Vector3d p = j.jump();
  const Eigen::Vector3d& mm = j.m_minus();
  const double denom2 = sol.denom * sol.denom;
  auto density = [&](double t) {
    const double g = sol.g_at(t / epsilon);
    const double a = g * p.x() + mm.x();
    const double b = g * p.y() + mm.y();
    const double comp = g * p.z() + mm.z() - 0.5 * a * a - 0.5 * b * b;
    const double dg = profile_rhs(g, j);
    return 0.5 * (comp * comp / epsilon + epsilon * dg * dg * denom2 / (epsilon * epsilon));
  };
  std::vector<double> pieces;
  pieces.reserve(sol.ts.size());
  for (std::size_t i = 0; i + 1 < sol.ts.size(); ++i)
    pieces.push_back(gauss5(epsilon * sol.ts[i], epsilon * sol.ts[i + 1], density));
  return pairwise_sum(pieces);
}

ScalarField ansatz_field(const ProfileSolution& sol, const Grid3& grid, double epsilon,
                         const AnsatzOptions& options) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("ansatz_field: epsilon must be positive");
  const Eigen::Vector3d p = sol.j.jump();
  const Eigen::Vector3d nu = sol.j.oriented_normal();
  const Eigen::Vector3d& mm = sol.j.m_minus();
  const double amp = epsilon * p.norm();
  Eigen::ArrayXd v(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Eigen::Vector3d x = grid.coord(n);
    v[n] = amp * sol.antiderivative_at(x.dot(nu) / epsilon, options.extend_tails) + mm.dot(x);
  }
  return {grid, std::move(v)};
}

double smooth_ramp(double tau) {
  if (tau <= 0.0) return 0.0;
  if (tau >= 1.0) return 1.0;
  return tau * tau * tau * (tau * (6.0 * tau - 15.0) + 10.0);
}

namespace {

// Cumulative integral of f over [a, c] on a uniform lattice, interpolated with
// cubic Hermite (f is the derivative).
class CumulativeTable {
 public:
  template <class F>
  CumulativeTable(double a, double c, int cells, F&& f) : a_(a), h_((c - a) / cells) {
    values_.resize(cells + 1);
    slopes_.resize(cells + 1);
    values_[0] = 0.0;
    for (int i = 0; i <= cells; ++i) slopes_[i] = f(a + i * h_);
    for (int i = 0; i < cells; ++i)
      values_[i + 1] = values_[i] + gauss5(a + i * h_, a + (i + 1) * h_, f);
  }
  double operator()(double r) const {
    const int cells = static_cast<int>(values_.size()) - 1;
    const int i = std::clamp(static_cast<int>((r - a_) / h_), 0, cells - 1);
    const double t0 = a_ + i * h_;
    return hermite(t0, t0 + h_, values_[i], values_[i + 1], slopes_[i], slopes_[i + 1], r);
  }
  double end() const { return values_.back(); }

 private:
  double a_, h_;
  std::vector<double> values_, slopes_;
};

}  // namespace

ScalarField truncated_ansatz_field(const ProfileSolution& sol, const Grid3& grid,
                                   double epsilon, const CubeTruncation& trunc) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("truncated_ansatz_field: epsilon must be positive");
  const double c = trunc.clamp_start;
  const double a = c - trunc.blend_width;
  if (!(trunc.blend_width > 0.0) || !(a >= 0.0))
    throw std::invalid_argument(
        "truncated_ansatz_field: need blend_width > 0 and clamp_start >= blend_width");

  const Eigen::Vector3d p = sol.j.jump();
  const Eigen::Vector3d nu = sol.j.oriented_normal();
  const Eigen::Vector3d& mm = sol.j.m_minus();
  const double w = trunc.blend_width;
  auto chi = [&](double r) { return smooth_ramp((r - a) / w); };

  // ĝ − g on the + side is (1 − g)χ; on the − side it is −gχ.
  const CumulativeTable plus(a, c, 2048, [&](double r) {
    return (1.0 - sol.g_at(r / epsilon, true)) * chi(r);
  });
  const CumulativeTable minus(a, c, 2048, [&](double r) {
    return sol.g_at(-r / epsilon, true) * chi(r);
  });

  auto blended = [&](double s) {
    const double r = std::abs(s);
    if (r <= a) return epsilon * sol.antiderivative_at(s / epsilon, true);
    if (s > 0.0) {
      if (s >= c) return epsilon * sol.antiderivative_at(c / epsilon, true) + plus.end() + (s - c);
      return epsilon * sol.antiderivative_at(s / epsilon, true) + plus(s);
    }
    if (r >= c) return epsilon * sol.antiderivative_at(-c / epsilon, true) + minus.end();
    return epsilon * sol.antiderivative_at(s / epsilon, true) + minus(r);
  };

  const double amp = p.norm();
  Eigen::ArrayXd v(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Eigen::Vector3d x = grid.coord(n);
    v[n] = amp * blended(x.dot(nu)) + mm.dot(x);
  }
  return {grid, std::move(v)};
}

Grid3 dislocation_grid(const DislocationSpec& spec) {
  if (!(spec.epsilon > 0.0)) throw std::invalid_argument("dislocation: epsilon must be positive");
  if (!(spec.z_range[0] > 0.0) || !(spec.z_range[1] > spec.z_range[0]))
    throw std::invalid_argument("dislocation: depth range must satisfy 0 < z0 < z1");
  Box box;
  box.lo = {spec.x_range[0], spec.y_range[0], spec.z_range[0]};
  box.hi = {spec.x_range[1], spec.y_range[1], spec.z_range[1]};
  if (spec.sign == BpsSign::minus) {
    box.lo.z() = -spec.z_range[1];
    box.hi.z() = -spec.z_range[0];
  }
  return make_grid(spec.nx, spec.ny, spec.nz, box);
}

namespace {

// ln S with S = 1 + (e^{σb/4ε} − 1)·½erfc(−x / (2√(ε·depth))).
double log_heat_solution(const DislocationSpec& spec, double x, double depth) {
  const double s = to_double(spec.sign);
  const double jump = std::expm1(s * spec.b / (4.0 * spec.epsilon));
  const double weight = 0.5 * std::erfc(-x / (2.0 * std::sqrt(spec.epsilon * depth)));
  return std::log1p(jump * weight);
}

}  // namespace

ScalarField dislocation_field(const DislocationSpec& spec) {
  const Grid3 grid = dislocation_grid(spec);
  const double s = to_double(spec.sign);
  return sample_field(grid, [&](double x, double, double z) {
    return s * 2.0 * spec.epsilon * log_heat_solution(spec, x, s * z);
  });
}

ScalarField dislocation_heat_field(const DislocationSpec& spec) {
  Grid3 grid = dislocation_grid(spec);
  Box box = grid.box();
  box.lo.z() = spec.z_range[0];
  box.hi.z() = spec.z_range[1];
  return sample_field(make_grid(spec.nx, spec.ny, spec.nz, box), [&](double x, double, double z) {
    return std::exp(log_heat_solution(spec, x, z));
  });
}

BpsVerification bps_verify(const ScalarField& u, double epsilon, BpsSign sign,
                           const Window& window) {
  const Eigen::ArrayXd res = bps_residual(u, epsilon, sign).values;
  const Eigen::ArrayXd w = quadrature_weights(u.grid, window);
  BpsVerification out;
  std::array<std::array<int, 2>, 3> range;
  for (int c = 0; c < 3; ++c) range[c] = window.node_range(u.grid, static_cast<Axis>(c));
  for (int k = range[2][0]; k <= range[2][1]; ++k)
    for (int j = range[1][0]; j <= range[1][1]; ++j)
      for (int i = range[0][0]; i <= range[0][1]; ++i)
        out.max_residual = std::max(out.max_residual, std::abs(res[u.grid.index(i, j, k)]));
  out.l2_residual = std::sqrt(weighted_sum(w, res.square()));
  return out;
}

}  // namespace smectic
