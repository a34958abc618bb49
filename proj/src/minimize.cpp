#include "ckam/error.hpp"
#include "ckam/variational.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ckam {

namespace {

using Mat = Eigen::MatrixXd;
using EVec = Eigen::VectorXd;

void check_path(const LagrangianModel& L, const Vec& times, const std::vector<Vec>& points) {
  if (times.size() != points.size() || times.size() < 2) throw DomainError("path: need matching times and points");
  for (const auto& p : points)
    if (p.size() != L.d) throw DomainError("path: point dimension mismatch");
  for (std::size_t j = 1; j < times.size(); ++j)
    if (!(times[j] > times[j - 1])) throw DomainError("path: times must increase");
}

struct Segment {
  Vec mid, vel;
};

Segment segment(const std::vector<Vec>& x, const Vec& t, std::size_t j) {
  const std::size_t d = x[j].size();
  Segment s{Vec(d), Vec(d)};
  const double h = t[j + 1] - t[j];
  for (std::size_t i = 0; i < d; ++i) {
    s.mid[i] = 0.5 * (x[j][i] + x[j + 1][i]);
    s.vel[i] = (x[j + 1][i] - x[j][i]) / h;
  }
  return s;
}

// Full gradient dS/dx_j for every node (endpoints included, ignored later).
std::vector<Vec> full_gradient(const LagrangianModel& L, const Vec& t, const std::vector<Vec>& x) {
  const std::size_t d = L.d, K = x.size() - 1;
  std::vector<Vec> G(K + 1, Vec(d, 0.0));
  Vec gu(d);
  for (std::size_t j = 0; j < K; ++j) {
    const double h = t[j + 1] - t[j];
    auto s = segment(x, t, j);
    L.potential.gradient(s.mid.data(), gu.data());
    for (std::size_t i = 0; i < d; ++i) {
      const double pot = 0.5 * h * L.overall_scale * gu[i];
      const double kin = L.overall_scale * L.kinetic_weights[i] * s.vel[i];
      G[j][i] += pot - kin;
      G[j + 1][i] += pot + kin;
    }
  }
  return G;
}

double residual_of(const std::vector<Vec>& G, const Vec& t) {
  double r = 0.0;
  for (std::size_t j = 1; j + 1 < G.size(); ++j) {
    const double w = 0.5 * (t[j + 1] - t[j - 1]);
    for (double g : G[j]) r = std::max(r, std::fabs(g) / w);
  }
  return r;
}

// Solves the block tridiagonal system (diag D, super-diagonal O) by block
// Cholesky. Returns false when a pivot block is not positive definite.
bool block_solve(std::vector<Mat> D, const std::vector<Mat>& O, std::vector<EVec>& rhs) {
  const std::size_t n = D.size();
  std::vector<Eigen::LLT<Mat>> fac(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) {
      Mat X = fac[j - 1].solve(O[j - 1]);
      D[j] -= O[j - 1].transpose() * X;
      rhs[j] -= O[j - 1].transpose() * fac[j - 1].solve(rhs[j - 1]);
    }
    fac[j].compute(D[j]);
    if (fac[j].info() != Eigen::Success) return false;
  }
  rhs[n - 1] = fac[n - 1].solve(rhs[n - 1]);
  for (std::size_t j = n - 1; j-- > 0;) rhs[j] = fac[j].solve(rhs[j] - O[j] * rhs[j + 1]);
  return true;
}

}  // namespace

double discrete_action(const LagrangianModel& L, const Vec& times, const std::vector<Vec>& points) {
  check_path(L, times, points);
  double S = 0.0;
  for (std::size_t j = 0; j + 1 < points.size(); ++j) {
    auto s = segment(points, times, j);
    S += (times[j + 1] - times[j]) * L.L(s.mid.data(), s.vel.data());
  }
  return S;
}

std::vector<Vec> discrete_gradient(const LagrangianModel& L, const Vec& times, const std::vector<Vec>& points) {
  check_path(L, times, points);
  auto G = full_gradient(L, times, points);
  std::vector<Vec> out;
  for (std::size_t j = 1; j + 1 < G.size(); ++j) {
    const double w = 0.5 * (times[j + 1] - times[j - 1]);
    for (double& g : G[j]) g /= w;
    out.push_back(G[j]);
  }
  return out;
}

DiscretePath minimize_path_from(const LagrangianModel& L, const Vec& times, std::vector<Vec> x,
                                const MinimizeOptions& opt) {
  check_path(L, times, x);
  const std::size_t d = L.d, K = x.size() - 1;
  DiscretePath out;
  out.times = times;
  auto finish = [&](double r) {
    out.points = x;
    out.action = discrete_action(L, times, x);
    out.grad_norm = r;
    out.rotation_estimate.resize(d);
    for (std::size_t i = 0; i < d; ++i) out.rotation_estimate[i] = (x[K][i] - x[0][i]) / (times[K] - times[0]);
    return out;
  };
  if (K < 2) return finish(0.0);

  const std::size_t n = K - 1;
  Mat HU(d, d);
  double S = discrete_action(L, times, x);
  auto G = full_gradient(L, times, x);
  double r = residual_of(G, times);
  double lambda = 0.0;
  for (int it = 0; it <= opt.max_newton; ++it) {
    out.residual_history.push_back(r);
    if (r < opt.tol) {
      out.newton_iterations = it;
      return finish(r);
    }
    if (it == opt.max_newton) break;

    // Hessian blocks
    std::vector<Mat> D(n, Mat::Zero(d, d)), O(n > 0 ? n - 1 : 0, Mat::Zero(d, d));
    double kin_scale = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
      const double h = times[j + 1] - times[j];
      auto s = segment(x, times, j);
      L.potential.hessian(s.mid.data(), HU.data());  // symmetric, so layout does not matter
      Mat B = (0.25 * h * L.overall_scale) * HU;
      Mat W = Mat::Zero(d, d);
      for (std::size_t i = 0; i < d; ++i) W(i, i) = L.overall_scale * L.kinetic_weights[i] / h;
      kin_scale = std::max(kin_scale, W.diagonal().maxCoeff());
      if (j >= 1) D[j - 1] += B + W;
      if (j + 1 <= n) D[j] += B + W;
      if (j >= 1 && j + 1 <= n) O[j - 1] += B - W;
    }
    std::vector<EVec> rhs(n, EVec(d));
    bool ok = false;
    lambda = lambda > 0 ? lambda * 0.25 : 0.0;
    for (int tries = 0; tries < 60 && !ok; ++tries) {
      std::vector<Mat> Ds = D;
      for (auto& m : Ds) m += lambda * Mat::Identity(d, d);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < d; ++i) rhs[j](i) = -G[j + 1][i];
      ok = block_solve(std::move(Ds), O, rhs);
      if (!ok) lambda = std::max(2.0 * lambda, 1e-10 * kin_scale);
    }
    double slope = 0.0;
    if (!ok) {  // steepest descent
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < d; ++i) rhs[j](i) = -G[j + 1][i] / kin_scale;
    }
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < d; ++i) slope += G[j + 1][i] * rhs[j](i);

    double alpha = 1.0;
    bool accepted = false;
    std::vector<Vec> trial = x;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < d; ++i) trial[j + 1][i] = x[j + 1][i] + alpha * rhs[j](i);
      double S_new = discrete_action(L, times, trial);
      auto G_new = full_gradient(L, times, trial);
      double r_new = residual_of(G_new, times);
      bool armijo = S_new < S + 1e-4 * alpha * slope;
      bool flat = S_new <= S + 1e-13 * std::fabs(S) && r_new < r;
      if (armijo || flat) {
        x = trial;
        S = S_new;
        G = std::move(G_new);
        r = r_new;
        accepted = true;
        break;
      }
      alpha *= opt.damping;
    }
    if (!accepted) break;
  }
  throw MinimizationError("minimize_path: residual " + std::to_string(r) + " above tolerance after " +
                              std::to_string(out.residual_history.size() - 1) + " iterations",
                          out.residual_history);
}

DiscretePath minimize_path(const LagrangianModel& L, const Vec& lift_start, const Vec& lift_end, double t_a,
                           double t_b, std::size_t K, const MinimizeOptions& opt) {
  if (K < 16) throw DomainError("minimize_path: K must be >= 16");
  if (!(t_b > t_a)) throw DomainError("minimize_path: need t_b > t_a");
  if (lift_start.size() != L.d || lift_end.size() != L.d) throw DomainError("minimize_path: endpoint dimension");
  Vec times(K + 1);
  std::vector<Vec> x(K + 1, Vec(L.d));
  for (std::size_t j = 0; j <= K; ++j) {
    const double f = static_cast<double>(j) / static_cast<double>(K);
    times[j] = t_a + (t_b - t_a) * f;
    for (std::size_t i = 0; i < L.d; ++i) x[j][i] = lift_start[i] + f * (lift_end[i] - lift_start[i]);
  }
  times[K] = t_b;
  return minimize_path_from(L, times, std::move(x), opt);
}

std::string path_csv(const LagrangianModel& L, const DiscretePath& path) {
  const std::size_t d = L.d, K = path.points.size() - 1;
  std::ostringstream os;
  os << "t";
  for (std::size_t i = 0; i < d; ++i) os << ",q" << i + 1;
  for (std::size_t i = 0; i < d; ++i) os << ",qdot" << i + 1;
  os << ",action\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    os << buf;
  };
  double acc = 0.0;
  for (std::size_t j = 0; j <= K; ++j) {
    if (j > 0) {
      auto s = segment(path.points, path.times, j - 1);
      acc += (path.times[j] - path.times[j - 1]) * L.L(s.mid.data(), s.vel.data());
    }
    std::snprintf(buf, sizeof buf, "%.17g", path.times[j]);
    os << buf;
    for (std::size_t i = 0; i < d; ++i) put(path.points[j][i]);
    for (std::size_t i = 0; i < d; ++i) {
      // node velocity: mean of the adjacent segment velocities
      double v = 0.0;
      int cnt = 0;
      if (j > 0) {
        v += (path.points[j][i] - path.points[j - 1][i]) / (path.times[j] - path.times[j - 1]);
        ++cnt;
      }
      if (j < K) {
        v += (path.points[j + 1][i] - path.points[j][i]) / (path.times[j + 1] - path.times[j]);
        ++cnt;
      }
      put(v / cnt);
    }
    put(acc);
    os << "\n";
  }
  return os.str();
}

}  // namespace ckam
