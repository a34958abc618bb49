#include "ckam/error.hpp"
#include "ckam/variational.hpp"

#include <algorithm>
#include <cmath>

namespace ckam {

namespace {

double dotv(const Vec& r, const double* x) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r[i] * x[i];
  return s;
}

Vec unit(std::size_t d, std::size_t i) {
  Vec e(d, 0.0);
  e[i] = 1.0;
  return e;
}

Vec to_real(const IntVec& v) { return Vec(v.begin(), v.end()); }

}  // namespace

void CouplingPotential::Poly1::eval(double u, int order, double* out) const {
  for (int k = 0; k <= order; ++k) out[k] = 0.0;
  const double c1 = std::cos(u), s1 = std::sin(u);
  double cm = 1.0, sm = 0.0;
  for (std::size_t m = 0; m < c.size(); ++m) {
    const double fm = static_cast<double>(m);
    // d^j/du^j of (a cos mu + b sin mu), cycling through the four phases
    double a = c[m], b = s[m];
    double f = 1.0;
    for (int j = 0; j <= order; ++j) {
      out[j] += f * (a * cm + b * sm);
      double na = b;  // a cos + b sin -> m (b cos - a sin)
      b = -a;
      a = na;
      f *= fm;
    }
    double nc = cm * c1 - sm * s1;
    sm = sm * c1 + cm * s1;
    cm = nc;
  }
}

CouplingPotential::CouplingPotential(std::size_t d, Vec r1, Vec r2, double c_pend, double c_v, TrigPoly A,
                                     TrigPoly B)
    : d_(d), r1_(std::move(r1)), r2_(std::move(r2)), c_pend_(c_pend), c_v_(c_v) {
  if (r1_.size() != d || (c_v != 0.0 && r2_.size() != d)) throw DomainError("CouplingPotential: row size");
  if (A.dim() != 1 || B.dim() != 1) throw DomainError("CouplingPotential: factors must be 1-variable");
  auto fill = [](const TrigPoly& p, Poly1& out) {
    long n = 0;
    for (std::size_t i = 0; i < p.size(); ++i) n = std::max(n, p.freq(i)[0]);
    out.c.assign(static_cast<std::size_t>(n) + 1, 0.0);
    out.s.assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      out.c[static_cast<std::size_t>(p.freq(i)[0])] += p.cos_coeff(i);
      out.s[static_cast<std::size_t>(p.freq(i)[0])] += p.sin_coeff(i);
    }
  };
  fill(A, A_);
  fill(B, B_);
}

CouplingPotential CouplingPotential::zero(std::size_t d) {
  return CouplingPotential(d, unit(d, 0), unit(d, d > 1 ? 1 : 0), 0.0, 0.0, TrigPoly(1), TrigPoly(1));
}

CouplingPotential CouplingPotential::pendulum(std::size_t d, double g) {
  return CouplingPotential(d, unit(d, 0), unit(d, d > 1 ? 1 : 0), g, 0.0, TrigPoly(1), TrigPoly(1));
}

double CouplingPotential::pendulum_part(const double* x) const {
  if (c_pend_ == 0.0) return 0.0;
  return c_pend_ * (1.0 - std::cos(dotv(r1_, x)));
}

double CouplingPotential::value(const double* x) const {
  double v = pendulum_part(x);
  if (c_v_ != 0.0) {
    double a, b;
    A_.eval(dotv(r1_, x), 0, &a);
    B_.eval(dotv(r2_, x), 0, &b);
    v += c_v_ * a * b;
  }
  return v;
}

void CouplingPotential::gradient(const double* x, double* g) const {
  const double u1 = dotv(r1_, x);
  double f1 = c_pend_ * std::sin(u1), f2 = 0.0;
  if (c_v_ != 0.0) {
    double a[2], b[2];
    A_.eval(u1, 1, a);
    B_.eval(dotv(r2_, x), 1, b);
    f1 += c_v_ * a[1] * b[0];
    f2 = c_v_ * a[0] * b[1];
  }
  for (std::size_t i = 0; i < d_; ++i) g[i] = r1_[i] * f1 + (c_v_ != 0.0 ? r2_[i] * f2 : 0.0);
}

void CouplingPotential::hessian(const double* x, double* h) const {
  const double u1 = dotv(r1_, x);
  double h11 = c_pend_ * std::cos(u1), h12 = 0.0, h22 = 0.0;
  if (c_v_ != 0.0) {
    double a[3], b[3];
    A_.eval(u1, 2, a);
    B_.eval(dotv(r2_, x), 2, b);
    h11 += c_v_ * a[2] * b[0];
    h12 = c_v_ * a[1] * b[1];
    h22 = c_v_ * a[0] * b[2];
  }
  for (std::size_t i = 0; i < d_; ++i)
    for (std::size_t j = 0; j < d_; ++j) {
      double v = r1_[i] * r1_[j] * h11;
      if (c_v_ != 0.0) v += (r1_[i] * r2_[j] + r2_[i] * r1_[j]) * h12 + r2_[i] * r2_[j] * h22;
      h[i * d_ + j] = v;
    }
}

// ---------------------------------------------------------------------------

double LagrangianModel::L(const double* q, const double* qdot) const {
  double kin = 0.0;
  for (std::size_t i = 0; i < d; ++i) kin += kinetic_weights[i] * qdot[i] * qdot[i];
  return overall_scale * (0.5 * kin + potential.value(q));
}

double LagrangianModel::A_n(double q1, double q1dot) const {
  return 0.5 * q1dot * q1dot + pendulum_strength * (1.0 - std::cos(q1));
}

double LagrangianModel::B_n(const double* q, const double* qdot) const {
  double kin = 0.0;
  for (std::size_t i = 1; i < d; ++i) kin += kinetic_weights[i] * qdot[i] * qdot[i];
  double v = coupling ? (*coupling)(q[0], q[1]) : 0.0;
  return 0.5 * kin + v;
}

void LagrangianModel::momentum(const double*, const double* qdot, double* p) const {
  for (std::size_t i = 0; i < d; ++i) p[i] = overall_scale * kinetic_weights[i] * qdot[i];
}

double LagrangianModel::hamiltonian(const double* q, const double* p) const {
  double kin = 0.0;
  for (std::size_t i = 0; i < d; ++i) kin += p[i] * p[i] / (overall_scale * kinetic_weights[i]);
  return 0.5 * kin - overall_scale * potential.value(q);
}

LagrangianModel LagrangianModel::free(std::size_t d, double scale) {
  LagrangianModel m;
  m.d = d;
  m.kinetic_weights.assign(d, 1.0);
  m.overall_scale = scale;
  m.potential = CouplingPotential::zero(d);
  return m;
}

LagrangianModel LagrangianModel::pendulum(double g) {
  LagrangianModel m;
  m.d = 1;
  m.kinetic_weights = {1.0};
  m.pendulum_strength = g;
  m.potential = CouplingPotential::pendulum(1, g);
  return m;
}

LagrangianModel lagrangian_from(const PerturbationSpec& spec) {
  const auto& p = spec.params;
  const std::size_t d = spec.frame.dim();
  LagrangianModel m;
  m.d = d;
  const double k2 = static_cast<double>(norm_squared(spec.frame.k));
  m.kinetic_weights.assign(d, 1.0);
  m.kinetic_weights[1] = k2 / static_cast<double>(norm_squared(spec.frame.k_prime));
  for (std::size_t i = 2; i < d; ++i)
    m.kinetic_weights[i] = k2 / static_cast<double>(norm_squared(spec.frame.fill_rows[i - 2]));
  m.pendulum_strength = std::pow(p.k_norm, -p.a);
  m.overall_scale = 1.0 / k2;
  m.potential = CouplingPotential(d, unit(d, 0), unit(d, 1), m.pendulum_strength, spec.v.v_scale, spec.v.A,
                                  spec.v.B);
  m.coupling = spec.v;
  return m;
}

LagrangianModel lagrangian_x(const PerturbationSpec& spec) {
  const std::size_t d = spec.frame.dim();
  LagrangianModel m = LagrangianModel::free(d);
  m.potential = CouplingPotential(d, to_real(spec.frame.k), to_real(spec.frame.k_prime), spec.pend_scale,
                                  spec.v_weight * spec.v.v_scale, spec.v.A, spec.v.B);
  return m;
}

// ---------------------------------------------------------------------------

double MechanicalModel::energy(const double* x, const double* y) const {
  double kin = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) kin += y[i] * y[i] / masses[i];
  return 0.5 * kin + v_factor * V.value(x);
}

MechanicalModel pendulum_hamiltonian(double g) {
  MechanicalModel m;
  m.masses = {1.0};
  m.V = CouplingPotential::pendulum(1, g);
  return m;
}

MechanicalModel mechanical_from(const LagrangianModel& L) {
  MechanicalModel m;
  m.masses.resize(L.d);
  for (std::size_t i = 0; i < L.d; ++i) m.masses[i] = L.overall_scale * L.kinetic_weights[i];
  m.V = L.potential;
  m.v_factor = -L.overall_scale;
  return m;
}

// ---------------------------------------------------------------------------

namespace {

void check_run(std::size_t d, const Vec& x0, const Vec& y0, double T, double dt) {
  if (x0.size() != d || y0.size() != d) throw DomainError("integrate: state dimension mismatch");
  if (!(T > 0.0) || !(dt > 0.0) || !std::isfinite(T / dt)) throw DomainError("integrate: need T > 0, dt > 0");
}

double rel_drift(double H, double H0) { return std::fabs(H - H0) / std::max(std::fabs(H0), 1e-300); }

double norm2(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

Trajectory integrate(const MechanicalModel& H, const Vec& x0, const Vec& y0, double T, double dt,
                     std::size_t stride) {
  const std::size_t d = H.masses.size();
  check_run(d, x0, y0, T, dt);
  if (stride == 0) stride = 1;
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  Vec x = x0, y = y0, g(d), v(d);
  Trajectory tr;
  const double H0 = H.energy(x.data(), y.data());
  auto record = [&](std::size_t n) {
    tr.t.push_back(static_cast<double>(n) * dt);
    tr.x.push_back(x);
    tr.y.push_back(y);
  };
  auto speed = [&] {
    for (std::size_t i = 0; i < d; ++i) v[i] = y[i] / H.masses[i];
    tr.max_speed = std::max(tr.max_speed, norm2(v));
  };
  record(0);
  speed();
  H.V.gradient(x.data(), g.data());
  for (std::size_t n = 1; n <= steps; ++n) {
    for (std::size_t i = 0; i < d; ++i) y[i] -= 0.5 * dt * H.v_factor * g[i];
    for (std::size_t i = 0; i < d; ++i) x[i] += dt * y[i] / H.masses[i];
    H.V.gradient(x.data(), g.data());
    for (std::size_t i = 0; i < d; ++i) y[i] -= 0.5 * dt * H.v_factor * g[i];
    tr.energy_drift = std::max(tr.energy_drift, rel_drift(H.energy(x.data(), y.data()), H0));
    speed();
    if (n % stride == 0 || n == steps) record(n);
  }
  return tr;
}

Trajectory integrate(const GeneralHamiltonian& H, const Vec& x0, const Vec& y0, double T, double dt,
                     std::size_t stride, double tol) {
  const std::size_t d = H.d;
  check_run(d, x0, y0, T, dt);
  if (stride == 0) stride = 1;
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  Vec x = x0, y = y0, xn(d), yn(d), xm(d), ym(d), hx(d), hy(d);
  Trajectory tr;
  const double H0 = H.H(x.data(), y.data());
  auto record = [&](std::size_t n) {
    tr.t.push_back(static_cast<double>(n) * dt);
    tr.x.push_back(x);
    tr.y.push_back(y);
  };
  record(0);
  H.grad(x.data(), y.data(), hx.data(), hy.data());
  tr.max_speed = norm2(hy);
  for (std::size_t n = 1; n <= steps; ++n) {
    xn = x;
    yn = y;
    bool done = false;
    for (int it = 0; it < 100 && !done; ++it) {
      for (std::size_t i = 0; i < d; ++i) {
        xm[i] = 0.5 * (x[i] + xn[i]);
        ym[i] = 0.5 * (y[i] + yn[i]);
      }
      H.grad(xm.data(), ym.data(), hx.data(), hy.data());
      double change = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        double nx = x[i] + dt * hy[i], ny = y[i] - dt * hx[i];
        change = std::max({change, std::fabs(nx - xn[i]), std::fabs(ny - yn[i])});
        xn[i] = nx;
        yn[i] = ny;
      }
      done = change <= tol * std::max(1.0, norm2(xn) + norm2(yn));
    }
    if (!done) throw IntegrationError("implicit midpoint: fixed point did not converge at t = " +
                                      std::to_string(static_cast<double>(n) * dt));
    x = xn;
    y = yn;
    tr.max_speed = std::max(tr.max_speed, norm2(hy));
    tr.energy_drift = std::max(tr.energy_drift, rel_drift(H.H(x.data(), y.data()), H0));
    if (n % stride == 0 || n == steps) record(n);
  }
  return tr;
}

RotationEstimate rotation_vector(const Trajectory& traj) {
  if (traj.t.size() < 2) throw DomainError("rotation_vector: trajectory too short");
  const double T = traj.t.back() - traj.t.front();
  RotationEstimate r;
  r.omega.resize(traj.x.front().size());
  for (std::size_t i = 0; i < r.omega.size(); ++i) r.omega[i] = (traj.x.back()[i] - traj.x.front()[i]) / T;
  r.error_bar = 2.0 * traj.max_speed / T;
  return r;
}

// ---------------------------------------------------------------------------

GeneralHamiltonian mane_fixture(const Vec& alpha) {
  GeneralHamiltonian h;
  h.d = alpha.size();
  const double dd = static_cast<double>(h.d);
  auto psi = [dd](const double* x, std::size_t d) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += 1.0 - std::cos(x[i]);
    return s / (2.0 * dd);
  };
  h.H = [alpha, psi](const double* x, const double* y) {
    double ky = 0.0, ay = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      ky += y[i] * y[i];
      ay += alpha[i] * y[i];
    }
    return 0.5 * ky + ay * psi(x, alpha.size());
  };
  h.grad = [alpha, psi, dd](const double* x, const double* y, double* hx, double* hy) {
    const std::size_t d = alpha.size();
    double ay = 0.0;
    for (std::size_t i = 0; i < d; ++i) ay += alpha[i] * y[i];
    const double p = psi(x, d);
    for (std::size_t i = 0; i < d; ++i) {
      hx[i] = ay * std::sin(x[i]) / (2.0 * dd);
      hy[i] = y[i] + alpha[i] * p;
    }
  };
  return h;
}

double arnaud_psi(double th2, double amp) { return amp * std::sin(th2); }

GeneralHamiltonian arnaud_fixture(double amp) {
  GeneralHamiltonian h;
  h.d = 2;
  h.H = [amp](const double* x, const double* y) {
    double u = y[0] - arnaud_psi(x[1], amp);
    return 0.5 * u * u + 0.5 * y[1] * y[1];
  };
  h.grad = [amp](const double* x, const double* y, double* hx, double* hy) {
    double u = y[0] - arnaud_psi(x[1], amp);
    hx[0] = 0.0;
    hx[1] = -u * amp * std::cos(x[1]);
    hy[0] = u;
    hy[1] = y[1];
  };
  return h;
}

}  // namespace ckam
