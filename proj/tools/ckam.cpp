// ckam command-line front end. Each subcommand writes its artifacts plus
// manifest.json into the output directory.

#include "ckam/diophantine.hpp"
#include "ckam/error.hpp"
#include "ckam/perturbation.hpp"
#include "ckam/resonance_frame.hpp"
#include "ckam/variational.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>
#include <gmp.h>
#include <json.hpp>
#include <mpfr.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#ifndef CKAM_VERSION
#define CKAM_VERSION "0.0.0"
#endif

using nlohmann::json;
namespace fs = std::filesystem;

namespace ckam::cli {

struct ResonancesParams {
  std::string omega = "golden";
  long kmax = 100;
  double C = 1.0;
  unsigned bits = kDefaultPrecisionBits;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ResonancesParams, omega, kmax, C, bits)

struct FrameParams {
  std::string k = "-3,5";
  std::string omega = "golden";
  double tau = 0.0;
  double search_radius = 2.0;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(FrameParams, k, omega, tau, search_radius)

struct BuildParams {
  std::string k = "-3,5";
  std::string omega = "golden";
  double tau = 0.0;
  double eps_exp = 0.1;
  double eps_size = 0.0;
  std::string policy = "enforce";
  double alpha = 2.0;
  int kappa_cap = 40;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(BuildParams, k, omega, tau, eps_exp, eps_size, policy, alpha,
                                                kappa_cap)

struct NormsParams {
  std::string spec;
  std::string r = "0,1,2";
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(NormsParams, spec, r)

struct PendulumParams {
  double g = 1.0;
  double q_a = 0.0;
  double q_b = 2 * std::numbers::pi;
  double T = 40.0;
  int profile_points = 41;
  long K = 4000;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PendulumParams, g, q_a, q_b, T, profile_points, K)

struct DestroyParams {
  std::string spec;
  std::string fixture = "none";  // "integrable": P = 0 with the S0 box of the spec
  std::string omega = "golden";
  long trials = 32;
  long K = 512;
  double jitter = 0.2;
  double speed_safety = 10.0;
  double margin_factor = 10.0;
  bool write_paths = false;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DestroyParams, spec, fixture, omega, trials, K, jitter,
                                                speed_safety, margin_factor, write_paths)

struct ScalingParams {
  std::string omega = "golden";
  double tau = 0.0;
  double eps_exp = 0.1;
  std::string r = "0,2";
  std::string k_sequence = "-3,5;5,-8;-8,13;13,-21";
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ScalingParams, omega, tau, eps_exp, r, k_sequence)

struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;
  std::string output_dir = "ckam-out";
  std::string format = "csv";
  int threads = 0;
  json params = json::object();
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RunConfig, command, seed, output_dir, format, threads, params)

std::string serialize(const RunConfig& c) { return json(c).dump(2) + "\n"; }

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

IntVec parse_ints(const std::string& s) {
  IntVec out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stol(tok, &pos));
      if (tok.find_first_not_of(' ', pos) != std::string::npos) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw UsageError("not an integer list: " + s);
    }
  }
  if (out.empty()) throw UsageError("empty integer list");
  return out;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::logic_error&) {
      throw UsageError("not a number list: " + s);
    }
  }
  if (out.empty()) throw UsageError("empty number list");
  return out;
}

std::vector<IntVec> parse_sequence(const std::string& s) {
  std::vector<IntVec> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ';')) out.push_back(parse_ints(tok));
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Artifacts: tables as CSV (with a hash comment line) or JSON, documents as JSON.
class Output {
 public:
  Output(fs::path dir, std::string format, std::string hash)
      : dir_(std::move(dir)), format_(std::move(format)), hash_(std::move(hash)) {
    fs::create_directories(dir_);
  }

  void table(const std::string& stem, const std::vector<std::string>& cols,
             const std::vector<std::vector<std::string>>& rows) {
    if (format_ == "csv") {
      std::ostringstream os;
      os << "# config_hash=" << hash_ << "\n";
      for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
      os << "\n";
      for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << "\n";
      }
      write(stem + ".csv", os.str());
    } else {
      json j;
      j["config_hash"] = hash_;
      j["columns"] = cols;
      j["rows"] = rows;
      write(stem + ".json", j.dump(2) + "\n");
    }
  }

  void document(const std::string& name, json j) {
    j["config_hash"] = hash_;
    write(name, j.dump(2) + "\n");
  }

  void write(const std::string& name, const std::string& text) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    out << text;
    artifacts_.push_back(name);
  }

  const std::vector<std::string>& artifacts() const { return artifacts_; }

 private:
  fs::path dir_;
  std::string format_, hash_;
  std::vector<std::string> artifacts_;
};

std::string join(const IntVec& k, char sep = ' ') {
  std::string s;
  for (std::size_t i = 0; i < k.size(); ++i) s += (i ? std::string(1, sep) : "") + std::to_string(k[i]);
  return s;
}

const char* kind_name(HitKind k) {
  switch (k) {
    case HitKind::kResonant: return "resonant";
    case HitKind::kNearResonant: return "near";
    default: return "none";
  }
}

PerturbationConfig perturbation_config(const BuildParams& p) {
  PerturbationConfig c;
  c.alpha = p.alpha;
  c.kappa_cap = p.kappa_cap;
  if (p.policy == "record") c.policy = ThresholdPolicy::kRecord;
  else if (p.policy != "enforce") throw UsageError("policy must be enforce or record");
  return c;
}

int run_resonances(const ResonancesParams& p, Output& out) {
  auto w = FrequencyVector::parse(p.omega, p.bits);
  auto hits = find_resonances(w, p.kmax, p.C);
  std::vector<std::string> cols;
  for (std::size_t i = 0; i < w.dim(); ++i) cols.push_back("k" + std::to_string(i + 1));
  for (const char* c : {"norm", "value", "tau_eff", "kind"}) cols.push_back(c);
  std::vector<std::vector<std::string>> rows;
  for (const auto& h : hits) {
    std::vector<std::string> r;
    for (long v : h.k) r.push_back(std::to_string(v));
    r.push_back(num(h.norm));
    r.push_back(num(h.value_double()));
    r.push_back(num(h.tau_eff));
    r.push_back(kind_name(h.kind));
    rows.push_back(r);
  }
  out.table("resonances", cols, rows);
  return 0;
}

int run_frame(const FrameParams& p, Output& out) {
  auto w = FrequencyVector::parse(p.omega);
  auto k = parse_ints(p.k);
  if (k.size() != w.dim()) throw DomainError("k and omega differ in dimension");
  auto kp = orthogonal_partner(k, w, p.search_radius);
  auto frame = complete_frame(k, kp);
  auto lift = symplectic_lift(frame);
  auto pf = pushforward(frame, w, p.tau);
  json j = json::parse(frame_record(frame, lift));
  std::vector<double> wn;
  for (std::size_t i = 0; i < pf.omega_new.dim(); ++i) wn.push_back(pf.omega_new[i].to_double());
  j["pushforward"] = {{"omega_new", wn}, {"bound1", pf.bound1}, {"ratio2", pf.ratio2}, {"in_regime", pf.in_regime}};
  j["symplectic_verified"] = lift.verified;
  out.document("frame.json", j);
  return 0;
}

int run_build(const BuildParams& p, Output& out) {
  auto w = FrequencyVector::parse(p.omega);
  auto spec = build_perturbation(parse_ints(p.k), w, p.tau, p.eps_exp, p.eps_size, perturbation_config(p), false);
  json j = json::parse(spec_to_json(spec));
  out.document("spec.json", j);
  return 0;
}

int run_norms(const NormsParams& p, Output& out) {
  if (p.spec.empty()) throw UsageError("norms needs --spec");
  auto spec = spec_from_json(read_file(p.spec));
  std::vector<std::vector<std::string>> rows;
  for (double r : parse_doubles(p.r)) {
    auto n = perturbation_norm(spec, r);
    rows.push_back({num(r), num(n.value), num(n.sup_norm), num(n.refinement_delta), std::to_string(n.grid_size)});
  }
  out.table("norms", {"r", "value", "sup_norm", "refinement_delta", "grid"}, rows);
  return 0;
}

int run_pendulum(const PendulumParams& p, Output& out) {
  auto b = pendulum_bvp(p.g, p.q_a, p.q_b, 0.0, p.T);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < b.t.size(); ++i) rows.push_back({num(b.t[i]), num(b.q[i]), num(b.qdot[i])});
  out.table("pendulum_path", {"t", "q", "qdot"}, rows);

  json summary = {{"action", b.action},
                  {"action_closed_form", b.action_closed_form},
                  {"energy", b.energy},
                  {"v0", b.v0},
                  {"bisection_steps", b.bisection_steps}};
  if (p.K > 0) {
    auto P = minimize_path(LagrangianModel::pendulum(p.g), {p.q_a}, {p.q_b}, 0.0, p.T, static_cast<std::size_t>(p.K));
    summary["minimized_action"] = P.action;
    summary["minimized_residual"] = P.grad_norm;
    summary["relative_difference"] = (P.action - b.action) / b.action;
  }
  // profile only makes sense for the 0 -> 2 pi traversal
  if (p.profile_points > 0 && p.q_a == 0.0 && std::fabs(p.q_b - 2 * std::numbers::pi) < 1e-12) {
    std::vector<double> s;
    for (int i = 0; i < p.profile_points; ++i) s.push_back(p.T * (i + 1) / (p.profile_points + 1));
    auto prof = action_profile(p.g, 0.0, p.T, s);
    std::vector<std::vector<std::string>> pr;
    for (std::size_t i = 0; i < s.size(); ++i) pr.push_back({num(prof.s[i]), num(prof.value[i])});
    out.table("action_profile", {"s", "action"}, pr);
    summary["profile"] = {{"unimodal", prof.unimodal},
                          {"argmin_s", prof.s[prof.argmin]},
                          {"symmetry_residual", prof.symmetry_residual}};
  }
  out.document("pendulum.json", summary);
  return 0;
}

int run_destroy(const DestroyParams& p, std::uint64_t seed, Output& out) {
  auto w = FrequencyVector::parse(p.omega);
  PerturbationSpec spec;
  if (!p.spec.empty()) {
    spec = spec_from_json(read_file(p.spec));
  } else {
    PerturbationConfig c;
    c.policy = ThresholdPolicy::kRecord;
    spec = build_perturbation({-3, 5}, w, 0.0, 0.1, 0.0, c, false);
  }
  auto pf = pushforward(spec.frame, w, spec.params.tau);
  Vec wp;
  for (std::size_t i = 0; i < pf.omega_new.dim(); ++i) wp.push_back(pf.omega_new[i].to_double());
  DestructionOptions o;
  if (p.trials < 1 || p.K < 1) throw UsageError("trials and K must be positive");
  o.trials = static_cast<std::size_t>(p.trials);
  o.K = static_cast<std::size_t>(p.K);
  o.seed = seed;
  o.jitter = p.jitter;
  o.speed_safety = p.speed_safety;
  o.margin_factor = p.margin_factor;

  DestructionReport rep;
  LagrangianModel model;
  if (p.fixture == "integrable") {
    model = LagrangianModel::free(spec.frame.dim(), 1.0 / static_cast<double>(norm_squared(spec.frame.k)));
    rep = destruction_test(model, spec.params.R_n, spec.params.k_norm, wp, pf.in_regime, o);
  } else if (p.fixture == "none") {
    model = lagrangian_from(spec);
    rep = destruction_test(spec, wp, o);
  } else {
    throw UsageError("fixture must be none or integrable");
  }
  out.document("destruction.json", json::parse(report_json(rep)));
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : rep.records)
    rows.push_back({num(r.q2_start), num(r.horizon), num(r.delta_q2), num(r.min_distance), num(r.action),
                    num(r.action_through), num(r.action_detour), num(r.action_gap), num(r.speed_deviation),
                    num(r.residual)});
  out.table("trials",
            {"q2_start", "horizon", "delta_q2", "min_distance", "action", "action_through", "action_detour",
             "action_gap", "speed_deviation", "residual"},
            rows);
  if (p.write_paths) {
    // minimizer of the first trial, for plotting
    const auto& r = rep.records.front();
    Vec a(model.d, 0.0), b(model.d, 0.0);
    a[1] = r.q2_start;
    b[0] = (wp[0] > 0 ? 2 : -2) * std::numbers::pi;
    b[1] = r.q2_start + r.delta_q2;
    for (std::size_t i = 2; i < model.d; ++i) b[i] = wp[i] * r.horizon;
    auto P = minimize_path(model, a, b, 0.0, r.horizon, o.K);
    out.write("path_trial0.csv", path_csv(model, P));
  }
  std::cout << "verdict: " << to_string(rep.verdict) << "\n";
  return rep.verdict == Verdict::kInconclusive ? 3 : 0;
}

int run_scaling(const ScalingParams& p, Output& out) {
  auto w = FrequencyVector::parse(p.omega);
  auto rep = norm_scaling_report(w, p.tau, p.eps_exp, parse_doubles(p.r), parse_sequence(p.k_sequence));
  std::vector<std::string> cols = {"k", "k_norm", "omega1", "M", "jackson_degree", "N", "N_budget", "thresholds_ok"};
  for (const auto& [r, v] : rep.rows.front().norms) cols.push_back("norm_r" + num(r));
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : rep.rows) {
    std::vector<std::string> row = {join(r.k),         num(r.k_norm),           num(r.omega1),
                                    std::to_string(r.M), std::to_string(r.jackson_degree), num(r.N),
                                    num(r.N_budget),   r.thresholds_ok ? "1" : "0"};
    for (const auto& [rr, v] : r.norms) row.push_back(num(v));
    rows.push_back(row);
  }
  out.table("scaling_rows", cols, rows);
  std::vector<std::vector<std::string>> fits;
  for (const auto& f : rep.fits)
    fits.push_back({num(f.r), num(f.slope), num(f.predicted), num(f.rel_dev), num(f.N_exponent),
                    num(f.N_exponent_predicted)});
  out.table("scaling_fits", {"r", "slope", "predicted", "rel_dev", "N_exponent", "N_exponent_predicted"}, fits);
  return 0;
}

json versions() {
  return {{"ckam", CKAM_VERSION},
          {"boost", BOOST_LIB_VERSION},
          {"mpfr", std::string(mpfr_get_version())},
          {"gmp", std::string(gmp_version)},
          {"fftw", std::string(fftw_version)},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"compiler", __VERSION__}};
}

int execute(RunConfig cfg) {
  if (const char* env = std::getenv("CKAM_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
  if (cfg.threads > 0 && !std::getenv("CKAM_THREADS"))
    setenv("CKAM_THREADS", std::to_string(cfg.threads).c_str(), 1);
  if (cfg.format != "csv" && cfg.format != "structured-text") throw UsageError("format must be csv or structured-text");

  const std::string text = serialize(cfg);
  const std::string hash = hex(fnv1a(text));
  Output out(cfg.output_dir, cfg.format, hash);
  out.write("config.json", text);

  const auto t0 = std::chrono::steady_clock::now();
  int code = 0;
  const auto& c = cfg.command;
  if (c == "resonances") code = run_resonances(cfg.params.get<ResonancesParams>(), out);
  else if (c == "frame") code = run_frame(cfg.params.get<FrameParams>(), out);
  else if (c == "build") code = run_build(cfg.params.get<BuildParams>(), out);
  else if (c == "norms") code = run_norms(cfg.params.get<NormsParams>(), out);
  else if (c == "pendulum-bench") code = run_pendulum(cfg.params.get<PendulumParams>(), out);
  else if (c == "destroy-check") code = run_destroy(cfg.params.get<DestroyParams>(), cfg.seed, out);
  else if (c == "reproduce-scaling") code = run_scaling(cfg.params.get<ScalingParams>(), out);
  else throw UsageError("unknown command: " + c);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json manifest = {{"command", c},
                   {"config", json::parse(text)},
                   {"config_hash", hash},
                   {"seed", cfg.seed},
                   {"versions", versions()},
                   {"threads", worker_threads()},
                   {"wall_time_s", wall},
                   {"artifacts", out.artifacts()},
                   {"exit_code", code}};
  std::ofstream(fs::path(cfg.output_dir) / "manifest.json") << manifest.dump(2) << "\n";
  return code;
}

// Parsed params of the chosen subcommand, re-read from the canonical config so
// unknown keys in a config file are reported.
template <class P>
json checked_params(const json& given) {
  json canon = given.get<P>();
  for (const auto& [key, value] : given.items())
    if (!canon.contains(key)) throw UsageError("unknown config key: params." + key);
  return canon;
}

json canonical_params(const std::string& command, const json& given) {
  if (command == "resonances") return checked_params<ResonancesParams>(given);
  if (command == "frame") return checked_params<FrameParams>(given);
  if (command == "build") return checked_params<BuildParams>(given);
  if (command == "norms") return checked_params<NormsParams>(given);
  if (command == "pendulum-bench") return checked_params<PendulumParams>(given);
  if (command == "destroy-check") return checked_params<DestroyParams>(given);
  if (command == "reproduce-scaling") return checked_params<ScalingParams>(given);
  throw UsageError("unknown command: " + command);
}

int main_impl(int argc, char** argv) {
  CLI::App app{"Explicit trigonometric perturbations of H0 = |y|^2/2 and desk-scale destruction checks"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_file, output_dir, format;
  std::uint64_t seed = 1;
  int threads = 0;
  bool dump = false;
  app.add_option("--config", config_file, "Run a serialized config (structured text)");
  app.add_option("--output-dir", output_dir, "Artifact directory (env CKAM_OUTPUT_DIR overrides)");
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--format", format, "Table format: csv or structured-text");
  app.add_option("--threads", threads, "Worker threads (env CKAM_THREADS overrides)");
  app.add_flag("--dump-config", dump, "Print the effective config and exit");

  ResonancesParams rp;
  auto* res = app.add_subcommand("resonances", "Near-resonant integer vectors of omega");
  res->add_option("--omega", rp.omega, "golden, spread-<d>, liouville-demo or a comma list");
  res->add_option("--kmax", rp.kmax, "Sup-norm bound");
  res->add_option("--C", rp.C, "Dirichlet constant");
  res->add_option("--bits", rp.bits, "Working precision");

  FrameParams fp;
  auto* frm = app.add_subcommand("frame", "Resonant frame, symplectic lift and pushforward");
  frm->add_option("--k", fp.k, "Integer vector, comma separated");
  frm->add_option("--omega", fp.omega);
  frm->add_option("--tau", fp.tau);
  frm->add_option("--search-radius", fp.search_radius);

  BuildParams bp;
  auto* bld = app.add_subcommand("build", "Assemble the perturbation P_N for k");
  bld->add_option("--k", bp.k);
  bld->add_option("--omega", bp.omega);
  bld->add_option("--tau", bp.tau);
  bld->add_option("--eps-exp", bp.eps_exp);
  bld->add_option("--eps-size", bp.eps_size);
  bld->add_option("--policy", bp.policy, "Threshold policy: enforce or record");
  bld->add_option("--alpha", bp.alpha);
  bld->add_option("--kappa-cap", bp.kappa_cap);

  NormsParams np;
  auto* nrm = app.add_subcommand("norms", "C^r norms of a built perturbation");
  nrm->add_option("--spec", np.spec, "spec.json from build");
  nrm->add_option("--r", np.r, "Comma separated orders");

  PendulumParams pp;
  auto* pen = app.add_subcommand("pendulum-bench", "Pendulum boundary value problem and action profile");
  pen->add_option("--g", pp.g);
  pen->add_option("--q-a", pp.q_a);
  pen->add_option("--q-b", pp.q_b);
  pen->add_option("--T", pp.T);
  pen->add_option("--profile-points", pp.profile_points);
  pen->add_option("--K", pp.K, "Grid for the minimization cross-check (0 skips it)");

  DestroyParams dp;
  auto* des = app.add_subcommand("destroy-check", "Variational destruction test");
  des->add_option("--spec", dp.spec, "spec.json (default: golden k = (-3,5), recorded thresholds)");
  des->add_option("--fixture", dp.fixture, "none or integrable");
  des->add_option("--omega", dp.omega);
  des->add_option("--trials", dp.trials);
  des->add_option("--K", dp.K);
  des->add_option("--jitter", dp.jitter);
  des->add_option("--speed-safety", dp.speed_safety);
  des->add_option("--margin-factor", dp.margin_factor);
  des->add_flag("--write-paths", dp.write_paths);

  ScalingParams sp;
  auto* scl = app.add_subcommand("reproduce-scaling", "Norm scaling regression over a k sequence");
  scl->add_option("--omega", sp.omega);
  scl->add_option("--tau", sp.tau);
  scl->add_option("--eps-exp", sp.eps_exp);
  scl->add_option("--r", sp.r);
  scl->add_option("--k-sequence", sp.k_sequence, "Semicolon separated vectors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 64;
  }

  RunConfig cfg;
  if (!config_file.empty()) {
    try {
      cfg = json::parse(read_file(config_file)).get<RunConfig>();
    } catch (const json::exception& e) {
      throw UsageError(std::string("bad config: ") + e.what());
    }
  } else {
    auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
    if (!sub) {
      std::cerr << app.help();
      return 64;
    }
    cfg.command = sub->get_name();
    if (sub == res) cfg.params = rp;
    else if (sub == frm) cfg.params = fp;
    else if (sub == bld) cfg.params = bp;
    else if (sub == nrm) cfg.params = np;
    else if (sub == pen) cfg.params = pp;
    else if (sub == des) cfg.params = dp;
    else cfg.params = sp;
  }
  if (app.count("--seed")) cfg.seed = seed;
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  if (!format.empty()) cfg.format = format;
  if (app.count("--threads")) cfg.threads = threads;
  cfg.params = canonical_params(cfg.command, cfg.params);

  if (dump) {
    std::cout << serialize(cfg);
    return 0;
  }
  return execute(cfg);
}

}  // namespace ckam::cli

int main(int argc, char** argv) {
  try {
    return ckam::cli::main_impl(argc, argv);
  } catch (const ckam::cli::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 64;
  } catch (const ckam::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
