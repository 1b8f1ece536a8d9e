// airyhier command-line front end: tabular access to the special function,
// determinant, solver, hierarchy-CAS and mkdv-check computations.

#include <algorithm>
#include <atomic>
#include <clocale>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "airyhier/airy.hpp"
#include "airyhier/cas.hpp"
#include "airyhier/fredholm.hpp"
#include "airyhier/mkdv.hpp"
#include "airyhier/selftest.hpp"
#include "airyhier/solver.hpp"
#include "airyhier/weight.hpp"

namespace {

using json = nlohmann::json;
using namespace airyhier;

// All floating output uses 15 significant digits, C-locale numerals.
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

std::vector<double> parse_range(const std::string& spec) {
  // "lo:hi:step" inclusive of hi up to rounding
  double lo, hi, step;
  char c1, c2;
  std::istringstream in(spec);
  if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' ||
      !(step > 0.0) || hi < lo)
    throw std::invalid_argument("range spec must be lo:hi:step with step > 0");
  std::vector<double> out;
  for (double x = lo; x <= hi + 0.5 * step; x += step) out.push_back(x);
  return out;
}

std::vector<double> points(const std::vector<double>& single,
                           const std::string& range, double fallback) {
  if (!range.empty()) {
    if (!single.empty())
      throw std::invalid_argument("give either point values or a range, not both");
    return parse_range(range);
  }
  if (!single.empty()) return single;
  return {fallback};
}

// Sweeps fan out over a worker pool; results keep input order.
template <class F>
std::vector<std::string> parallel_rows(std::size_t count, F&& row) {
  std::vector<std::string> out(count);
  const unsigned workers = std::min<unsigned>(
      std::max(1u, std::thread::hardware_concurrency()),
      static_cast<unsigned>(count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = row(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mu;
  for (unsigned k = 0; k < workers; ++k)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          out[i] = row(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
  return out;
}

struct Output {
  std::string path;  // empty = stdout

  void emit(const std::string& header, const std::vector<std::string>& rows) {
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!path.empty()) {
      file.open(path, std::ios::binary);
      if (!file) throw std::runtime_error("cannot open output file " + path);
      os = &file;
    }
    *os << header << "\n";
    for (const auto& r : rows) *os << r << "\n";
  }
};

// --config file.json: keys become "--key value" arguments appended after the
// explicit ones, so explicit flags win and subcommand options resolve in
// place. Arrays append one argument per element; booleans append the bare
// flag when true.
std::vector<std::string> apply_config(const std::vector<std::string>& args) {
  std::string cfg_path;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size())
        throw std::invalid_argument("--config requires a file path");
      cfg_path = args[++i];
    } else {
      out.push_back(args[i]);
    }
  }
  if (cfg_path.empty()) return out;
  std::ifstream in(cfg_path);
  if (!in) throw std::runtime_error("cannot read config file " + cfg_path);
  json cfg = json::parse(in);
  if (!cfg.is_object()) throw std::runtime_error("config must be a JSON object");
  auto given = [&](const std::string& flag) {
    return std::find(out.begin(), out.end(), flag) != out.end();
  };
  for (const auto& [key, val] : cfg.items()) {
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    auto push_scalar = [&](const json& v) {
      if (v.is_string())
        out.push_back(v.get<std::string>());
      else if (v.is_number_integer())
        out.push_back(std::to_string(v.get<long long>()));
      else
        out.push_back(fmt(v.get<double>()));
    };
    if (val.is_boolean()) {
      if (val.get<bool>()) out.push_back(flag);
    } else if (val.is_array()) {
      for (const auto& v : val) {
        out.push_back(flag);
        push_scalar(v);
      }
    } else {
      out.push_back(flag);
      push_scalar(val);
    }
  }
  return out;
}

int dispatch(std::vector<std::string> args) {
  CLI::App app{"higher-order finite-temperature Airy kernels: determinants, "
               "integro-differential Painleve II, and the mKdV reduction"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  app.footer("Any option may also come from --config file.json "
             "(keys = long option names; explicit flags win).");

  // shared parameters
  int n = 1, grid_m = 160, deriv = 0;
  double lambda = 1.0, T0 = 8.0, tol = 1e-10, alpha = 1.0;
  double tau = 1.0, delta_tau = 0.01, t1 = 0.0, x_at = 0.0;
  std::string weight_spec = "fermi:alpha=1", route = "halfline";
  std::string t_range, x_range, format = "text", kind = "pii";
  std::vector<double> t_pts, x_pts;
  Output output;
  bool quick = false;

  auto add_common = [&](CLI::App* sub, bool with_weight) {
    sub->add_option("--n", n, "hierarchy order n >= 1")
        ->check(CLI::PositiveNumber);
    sub->add_option("--output", output.path, "write CSV here (default stdout)");
    if (with_weight)
      sub->add_option("--weight", weight_spec,
                      "weight spec: fermi:alpha=A or step-approx:k=K");
  };

  auto* ai_cmd = app.add_subcommand("ai", "evaluate Ai_n and derivatives");
  add_common(ai_cmd, false);
  ai_cmd->add_option("--x", x_pts, "evaluation points");
  ai_cmd->add_option("--x-range", x_range, "lo:hi:step sweep");
  ai_cmd->add_option("--deriv", deriv, "derivative order j >= 0")
      ->check(CLI::NonNegativeNumber);

  auto* det_cmd = app.add_subcommand("det", "Fredholm determinant D_n(t, lambda)");
  add_common(det_cmd, true);
  det_cmd->add_option("--t", t_pts, "time points");
  det_cmd->add_option("--t-range", t_range, "lo:hi:step sweep");
  det_cmd->add_option("--lambda", lambda, "coupling in [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  det_cmd->add_option("--route", route, "halfline | sigma | step")
      ->check(CLI::IsMember({"halfline", "sigma", "step"}));

  const std::string solve_schema = "t,u,Q,logD_tw,logD_det,diff";
  auto* solve_cmd = app.add_subcommand(
      "solve", "integro-differential Painleve II backward solve");
  auto* id_cmd = app.add_subcommand(
      "identity", "Theorem 1.1 cross-check of both log-determinant routes");
  for (CLI::App* sub : {solve_cmd, id_cmd}) {
    add_common(sub, true);
    sub->add_option("--t", t_pts, "time points");
    sub->add_option("--t-range", t_range, "lo:hi:step sweep");
    sub->add_option("--lambda", lambda, "coupling in [0,1]")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--T0", T0, "asymptotic seeding point");
    sub->add_option("--tol", tol, "integrator tolerance");
    sub->add_option("--grid-m", grid_m, "sigma-quadrature nodes (>= 40)")
        ->check(CLI::Range(40, 2000));
  }

  auto* hier_cmd = app.add_subcommand(
      "hierarchy", "print a generated hierarchy member");
  hier_cmd->add_option("--n", n, "member index n >= 1")->check(CLI::PositiveNumber);
  hier_cmd->add_option("--kind", kind, "pii | mkdv")
      ->check(CLI::IsMember({"pii", "mkdv"}));
  hier_cmd->add_option("--format", format, "text | json")
      ->check(CLI::IsMember({"text", "json"}));
  hier_cmd->add_option("--output", output.path, "write here (default stdout)");

  auto* mkdv_cmd = app.add_subcommand(
      "mkdv-check", "Theorem 1.2 scaling-reduction residual");
  add_common(mkdv_cmd, true);
  mkdv_cmd->add_option("--tau", tau, "scaling parameter > 0")
      ->check(CLI::PositiveNumber);
  mkdv_cmd->add_option("--delta-tau", delta_tau, "centered-difference step")
      ->check(CLI::PositiveNumber);
  mkdv_cmd->add_option("--t1", t1, "mkdv time t1");
  mkdv_cmd->add_option("--x", x_at, "evaluation point x");
  mkdv_cmd->add_option("--lambda", lambda, "coupling in [0,1]")
      ->check(CLI::Range(0.0, 1.0));
  mkdv_cmd->add_option("--T0", T0, "asymptotic seeding point");
  mkdv_cmd->add_option("--grid-m", grid_m, "sigma-quadrature nodes (>= 40)")
      ->check(CLI::Range(40, 2000));

  auto* table_cmd = app.add_subcommand(
      "table", "Fermi distribution F_n^alpha(t) table");
  add_common(table_cmd, false);
  table_cmd->add_option("--alpha", alpha, "Fermi steepness > 0")
      ->check(CLI::PositiveNumber);
  table_cmd->add_option("--t", t_pts, "time points");
  table_cmd->add_option("--t-range", t_range, "lo:hi:step sweep");

  auto* self_cmd = app.add_subcommand("selftest", "run the acceptance suite");
  self_cmd->add_flag("--quick", quick, "trimmed subset (completes in seconds)");

  std::vector<const char*> argv{"airyhier"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (*ai_cmd) {
    const auto xs = points(x_pts, x_range, 0.0);
    auto rows = parallel_rows(xs.size(), [&](std::size_t i) {
      return std::to_string(n) + "," + fmt(xs[i]) + "," + std::to_string(deriv) +
             "," + fmt(specfun::ai_deriv(n, xs[i], deriv));
    });
    output.emit("n,x,j,value", rows);
  } else if (*det_cmd) {
    const auto ts = points(t_pts, t_range, 0.0);
    const auto w = weights::parse_weight(weight_spec);
    const std::string wlabel = (route == "step") ? "step" : weight_spec;
    auto rows = parallel_rows(ts.size(), [&](std::size_t i) {
      double d;
      if (route == "halfline")
        d = fredholm::det_halfline(n, ts[i], lambda, w);
      else if (route == "sigma")
        d = fredholm::det_sigma(n, ts[i], lambda, w);
      else
        d = fredholm::det_step(n, ts[i], lambda);
      return std::to_string(n) + "," + fmt(ts[i]) + "," + fmt(lambda) + "," +
             wlabel + "," + fmt(d) + "," + fmt(std::log(d)) + "," + route;
    });
    output.emit("n,t,lambda,weight,det,logdet,route", rows);
  } else if (*solve_cmd || *id_cmd) {
    const auto ts = points(t_pts, t_range, 0.0);
    const auto w = weights::parse_weight(weight_spec);
    idpii::SolverOptions opt;
    opt.T0 = T0;
    opt.tol = tol;
    opt.grid_m = grid_m;
    auto rows = parallel_rows(ts.size(), [&](std::size_t i) {
      const auto r = idpii::tw_representation(n, lambda, w, ts[i], opt);
      const double det = std::log(fredholm::det_halfline(n, ts[i], lambda, w));
      return fmt(ts[i]) + "," + fmt(r.u_ref) + "," + fmt(r.Q) + "," +
             fmt(r.logdet) + "," + fmt(det) + "," + fmt(r.logdet - det);
    });
    output.emit(solve_schema, rows);
  } else if (*hier_cmd) {
    const auto m = (kind == "pii") ? cas::pii_member(n) : cas::mkdv_member(n);
    const std::string body =
        (format == "text") ? cas::render(m) : cas::to_json(m);
    output.emit(body, {});
  } else if (*mkdv_cmd) {
    const auto w = weights::parse_weight(weight_spec);
    idpii::SolverOptions opt;
    opt.T0 = T0;
    opt.grid_m = grid_m;
    const double res =
        mkdv::mkdv_residual_at(n, tau, delta_tau, t1, x_at, lambda, w, opt);
    output.emit("n,tau,delta_tau,t1,x,residual",
                {std::to_string(n) + "," + fmt(tau) + "," + fmt(delta_tau) +
                 "," + fmt(t1) + "," + fmt(x_at) + "," + fmt(res)});
  } else if (*table_cmd) {
    const auto ts = points(t_pts, t_range, 0.0);
    const auto w = weights::make_fermi(alpha);
    const double h = 0.05;  // dF/dt by centered differencing
    auto rows = parallel_rows(ts.size(), [&](std::size_t i) {
      const double f = fredholm::det_halfline(n, ts[i], 1.0, w);
      const double df = (fredholm::det_halfline(n, ts[i] + h, 1.0, w) -
                         fredholm::det_halfline(n, ts[i] - h, 1.0, w)) /
                        (2.0 * h);
      return std::to_string(n) + "," + fmt(alpha) + "," + fmt(ts[i]) + "," +
             fmt(f) + "," + fmt(df);
    });
    output.emit("n,alpha,t,F,dFdt", rows);
  } else if (*self_cmd) {
    return selftest::run_acceptance(quick, std::cout) == 0 ? 0 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(apply_config(args));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
