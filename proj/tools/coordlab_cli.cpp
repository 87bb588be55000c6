// coordlab: feasibility checks, rate-region sweeps, closed-form gap tables,
// and exact small-n scheme simulation, with reproducible seeds.
//
// Output is CSV (6-decimal fixed) or JSON (pretty, sorted keys). Options can
// also come from a JSON config file (--config); the file wins on conflict.
// COORDLAB_BUDGET_CELLS overrides the exact-table cell budget.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coordlab/dsbs.hpp"
#include "coordlab/feasibility.hpp"
#include "coordlab/json_io.hpp"
#include "coordlab/prob.hpp"
#include "coordlab/regions.hpp"
#include "coordlab/scheme_sim.hpp"

namespace {

using nlohmann::json;

std::string format_fixed(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(6);
  os << v;
  return os.str();
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw std::runtime_error("cannot open output path: " + out_path);
  f << text;
}

std::size_t budget_from_env() {
  if (const char* s = std::getenv("COORDLAB_BUDGET_CELLS")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    throw std::runtime_error("COORDLAB_BUDGET_CELLS is not a positive integer");
  }
  return coordlab::kDefaultBudgetCells;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  if (out.empty()) throw std::runtime_error("empty list: \"" + s + "\"");
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_double_list(s)) out.push_back(static_cast<int>(v));
  return out;
}

// The config file mirrors the long option names (dashes or underscores both
// accepted) and overrides any flag given on the command line.
json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  json j = json::parse(f);
  if (!j.is_object()) throw std::runtime_error("config must be a JSON object");
  json norm = json::object();
  for (auto& [k, v] : j.items()) {
    std::string key = k;
    for (char& c : key)
      if (c == '-') c = '_';
    norm[key] = v;
  }
  return norm;
}

template <typename T>
void override_from(const json& cfg, const std::string& key, T& slot) {
  if (cfg.contains(key)) slot = cfg.at(key).get<T>();
}

// Scheme spec file: {"p": {axes, probs}, "r": real, "rc": real, "eps": real}.
// The blocklength comes from the command line.
struct SpecFile {
  coordlab::JointTable p;
  double r, rc, eps;
};

SpecFile load_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open spec file: " + path);
  json j = json::parse(f);
  for (const char* field : {"p", "r", "rc", "eps"}) {
    if (!j.contains(field))
      throw std::runtime_error(std::string("spec file missing field \"") +
                               field + "\"");
  }
  return {coordlab::joint_from_json(j.at("p")), j.at("r").get<double>(),
          j.at("rc").get<double>(), j.at("eps").get<double>()};
}

int cmd_feasible(const std::string& qxz_path, const std::string& qxy_path,
                 const std::string& out_path) {
  coordlab::JointTable qxz = coordlab::load_joint(qxz_path);
  coordlab::JointTable qxy = coordlab::load_joint(qxy_path);
  coordlab::CompatibilityResult res =
      coordlab::find_compatible_channel(qxz, qxy);
  json out;
  out["feasible"] = res.feasible;
  out["residual"] = res.residual;
  out["witness"] =
      res.witness_channel ? coordlab::to_json(*res.witness_channel) : json();
  if (res.marginal) out["marginal"] = true;
  write_output(out.dump(2) + "\n", out_path);
  return res.feasible ? 0 : 2;
}

int cmd_region(const std::string& qxz_path, const std::string& qxy_path,
               const std::string& rc_grid_str, const coordlab::SolverOptions& opts,
               const std::string& out_path) {
  coordlab::JointTable qxz = coordlab::load_joint(qxz_path);
  coordlab::JointTable qxy = coordlab::load_joint(qxy_path);
  std::vector<double> rc_grid = parse_double_list(rc_grid_str);
  auto rows = coordlab::region_boundary(qxz, qxy, rc_grid, opts);
  std::string csv = "rc,r_rcs,r_dcs,residual_rcs,residual_dcs\n";
  for (const auto& row : rows) {
    csv += format_fixed(row.rc) + "," + format_fixed(row.r_rcs) + "," +
           format_fixed(row.r_dcs) + "," + format_fixed(row.residual_rcs) +
           "," + format_fixed(row.residual_dcs) + "\n";
  }
  write_output(csv, out_path);
  return 0;
}

int cmd_gap(double theta, double tau, const std::string& out_path) {
  coordlab::GapInputs g(theta, tau);
  json out;
  out["theta"] = theta;
  out["tau"] = tau;
  out["gap_bits"] = coordlab::rcs_gap_lower_bound(g);
  write_output(out.dump(2) + "\n", out_path);
  return 0;
}

int cmd_figure4(double theta_min, double theta_max, double tau_min,
                double tau_max, int steps, const std::string& out_path) {
  auto rows =
      coordlab::figure4_grid(theta_min, theta_max, tau_min, tau_max, steps);
  std::string csv = "theta,tau,gap_bits\n";
  for (const auto& row : rows) {
    csv += format_fixed(row.theta) + "," + format_fixed(row.tau) + "," +
           format_fixed(row.gap_bits) + "\n";
  }
  write_output(csv, out_path);
  return 0;
}

int cmd_simulate(const std::string& spec_path, const std::string& n_list_str,
                 int trials, std::uint64_t seed, const std::string& out_path) {
  SpecFile sf = load_spec(spec_path);
  std::vector<int> n_list = parse_int_list(n_list_str);
  coordlab::SchemeSpec spec(sf.p, sf.r, sf.rc, sf.eps, n_list.front());
  coordlab::SoftCoveringCurve curve = coordlab::soft_covering_curve(
      spec, n_list, trials, seed, budget_from_env());
  std::string csv = "n,mean_tv_xy,min_tv_xy,mean_tv_jz,mean_tv_pxy,stderr_pxy\n";
  for (const auto& row : curve.rows) {
    csv += std::to_string(row.n) + "," + format_fixed(row.mean_tv_xy) + "," +
           format_fixed(row.min_tv_xy) + "," + format_fixed(row.mean_tv_jz) +
           "," + format_fixed(row.mean_tv_pxy) + "," +
           format_fixed(row.stderr_pxy) + "\n";
  }
  if (curve.truncated) {
    csv += "# truncated: n=" + std::to_string(curve.truncated_at_n) +
           " exceeds the cell budget\n";
  }
  write_output(csv, out_path);
  return 0;
}

int cmd_audit(const std::string& spec_path, int n, std::uint64_t seed,
              const std::string& out_path) {
  SpecFile sf = load_spec(spec_path);
  std::size_t budget = budget_from_env();
  coordlab::SchemeSpec spec(sf.p, sf.r, sf.rc, sf.eps, n);
  coordlab::Codebook cb = coordlab::sample_codebook(spec, seed, budget);
  coordlab::AuditReport rep = coordlab::converse_audit(cb, spec, seed, budget);
  json out;
  out["eps_obs"] = rep.eps_obs;
  out["i_zw"] = rep.i_zw;
  out["i_xyw"] = rep.i_xyw;
  out["bounds_ok"] = rep.bounds_ok;
  out["chain_ok"] = rep.chain_ok;
  write_output(out.dump(2) + "\n", out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coordlab: channel-synthesis rate regions and exact scheme "
               "simulation"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may appear after the subcommand

  std::string config_path, out_path;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path,
                 "JSON config file; overrides flags on conflict");
  app.add_option("--output", out_path, "write result here instead of stdout");
  app.add_option("--seed", seed, "random seed");

  coordlab::SolverOptions sopts;
  app.add_option("--starts", sopts.starts, "optimizer multi-start count");
  app.add_option("--threads", sopts.threads,
                 "multi-start parallelism (result is thread-count invariant)");
  app.add_option("--marginal-tol", sopts.marginal_tol,
                 "required tv to the target marginal");
  app.add_option("--max-outer", sopts.max_outer, "penalty schedule length");

  std::string qxz_path, qxy_path, spec_path;
  std::string rc_grid_str = "0,0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5";
  std::string n_list_str = "2,4,6";
  double theta = 0.2, tau = 0.1;
  double theta_min = 0.05, theta_max = 0.45, tau_min = 0.05, tau_max = 0.45;
  int steps = 9, trials = 20, n = 3;

  CLI::App* feas = app.add_subcommand("feasible",
                                      "is (q_XZ, q_XY) a feasible pair?");
  feas->add_option("--qxz", qxz_path, "q_XZ JSON file")->required();
  feas->add_option("--qxy", qxy_path, "q_XY JSON file")->required();

  CLI::App* region = app.add_subcommand(
      "region", "boundary sweep: minimal R for both regions over an Rc grid");
  region->add_option("--qxz", qxz_path, "q_XZ JSON file")->required();
  region->add_option("--qxy", qxy_path, "q_XY JSON file")->required();
  region->add_option("--rc-grid", rc_grid_str, "comma-separated Rc values");

  CLI::App* gap = app.add_subcommand(
      "gap", "closed-form lower bound on the direct-vs-remote rate gap");
  gap->add_option("--theta", theta, "Z-to-Y disagreement, in (0, 1/2)");
  gap->add_option("--tau", tau, "X-to-Z disagreement, in (0, 1/2)");

  CLI::App* fig4 = app.add_subcommand("figure4", "gap table over a grid");
  fig4->add_option("--steps", steps, "grid resolution per axis");
  fig4->add_option("--theta-min", theta_min);
  fig4->add_option("--theta-max", theta_max);
  fig4->add_option("--tau-min", tau_min);
  fig4->add_option("--tau-max", tau_max);

  CLI::App* sim = app.add_subcommand(
      "simulate", "soft-covering sweep over blocklengths and codebook seeds");
  sim->add_option("--spec", spec_path, "scheme spec JSON file")->required();
  sim->add_option("--n-list", n_list_str, "comma-separated blocklengths");
  sim->add_option("--trials", trials, "codebooks per blocklength");

  CLI::App* audit = app.add_subcommand(
      "audit", "single-letterization converse audit of one codebook");
  audit->add_option("--spec", spec_path, "scheme spec JSON file")->required();
  audit->add_option("--n", n, "blocklength");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) {
      json cfg = load_config(config_path);
      override_from(cfg, "output", out_path);
      override_from(cfg, "seed", seed);
      override_from(cfg, "starts", sopts.starts);
      override_from(cfg, "threads", sopts.threads);
      override_from(cfg, "marginal_tol", sopts.marginal_tol);
      override_from(cfg, "max_outer", sopts.max_outer);
      override_from(cfg, "qxz", qxz_path);
      override_from(cfg, "qxy", qxy_path);
      override_from(cfg, "spec", spec_path);
      override_from(cfg, "rc_grid", rc_grid_str);
      override_from(cfg, "n_list", n_list_str);
      override_from(cfg, "theta", theta);
      override_from(cfg, "tau", tau);
      override_from(cfg, "theta_min", theta_min);
      override_from(cfg, "theta_max", theta_max);
      override_from(cfg, "tau_min", tau_min);
      override_from(cfg, "tau_max", tau_max);
      override_from(cfg, "steps", steps);
      override_from(cfg, "trials", trials);
      override_from(cfg, "n", n);
    }
    sopts.seed = seed;

    if (feas->parsed()) return cmd_feasible(qxz_path, qxy_path, out_path);
    if (region->parsed())
      return cmd_region(qxz_path, qxy_path, rc_grid_str, sopts, out_path);
    if (gap->parsed()) return cmd_gap(theta, tau, out_path);
    if (fig4->parsed())
      return cmd_figure4(theta_min, theta_max, tau_min, tau_max, steps,
                         out_path);
    if (sim->parsed())
      return cmd_simulate(spec_path, n_list_str, trials, seed, out_path);
    if (audit->parsed()) return cmd_audit(spec_path, n, seed, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
