#include "nlepi/cli.hpp"

#include <chrono>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "nlepi/config.hpp"
#include "nlepi/errors.hpp"
#include "nlepi/output.hpp"
#include "nlepi/sweep.hpp"

namespace nlepi {

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
};

ConfigDocument load_document(const Common& c) {
  ConfigDocument doc = c.config.empty() ? ConfigDocument{} : read_config_file(c.config);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError({"--set '" + s + "': expected path=value"});
    set_override(doc, s.substr(0, eq), s.substr(eq + 1));
  }
  return doc;
}

json eigen_summary(const RunConfig& rc, double l, const EigenResult<double>& r, const Grid<double>& g) {
  json j = {{"l", l}, {"dx", g.dx}};
  j.update(to_json(r));
  const auto coeffs = linearized_coefficients(rc.model);
  const auto asym = lambda_A_closed_form(coeffs);
  j["lambda_A"] = asym.lambda_A;
  j["theta_A"] = asym.theta_A;
  j["R0"] = basic_reproduction_number(rc.model);
  return j;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonlocal epidemic free-boundary toolkit", "nlepi"};
  app.require_subcommand(1, 1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Config file (sectioned key = value text)");
    sub->add_option("--set", common.sets, "Override a config key, e.g. --set model.c=1.5")->take_all();
  };

  std::optional<double> l_opt;
  std::string dump_path;
  auto* eigen = app.add_subcommand("eigen", "Principal eigenpair on [-l/2, l/2]");
  add_common(eigen);
  eigen->add_option("--l", l_opt, "Interval length (default run.l)");
  eigen->add_option("--dump-eigenfunction", dump_path, "Write x, phi1, phi2 as CSV");

  auto* nu = app.add_subcommand("nu", "Scalar eigenvalue nu(l) of the J11 kernel");
  add_common(nu);
  nu->add_option("--l", l_opt, "Interval length (default run.l)");

  bool zero_diffusion = false;
  auto* critical = app.add_subcommand("critical", "Critical length L*");
  add_common(critical);
  critical->add_flag("--zero-diffusion", zero_diffusion, "Use d1 = d2 = 0 (needs c = G'(0), J12 = J21)");

  auto* compare4 = app.add_subcommand("compare4", "Shared-kernel comparison of five eigenvalue curves");
  add_common(compare4);

  auto* steady = app.add_subcommand("steady", "Positive steady state on [-l/2, l/2]");
  add_common(steady);
  steady->add_option("--l", l_opt, "Interval length (default run.l)");

  auto* evolve = app.add_subcommand("evolve", "Time integration (free boundary, or fixed with run.fixed = true)");
  add_common(evolve);

  auto* classify_cmd = app.add_subcommand("classify", "Single run classified as spreading or vanishing");
  add_common(classify_cmd);

  std::string parameter;
  auto* search = app.add_subcommand("search", "Threshold search by bisection");
  add_common(search);
  search->add_option("--parameter", parameter, "tau, mu1 or d1")
      ->required()
      ->check(CLI::IsMember({"tau", "mu1", "d1"}));

  std::vector<std::string> axes;
  std::string sweep_out;
  unsigned workers = 0;
  auto* sweep = app.add_subcommand("sweep", "Cross-product of classify runs");
  add_common(sweep);
  sweep->add_option("--axis", axes, "path=v1,v2,... (repeatable)");
  sweep->add_option("--out", sweep_out, "Sweep table path (default <output.dir>/<prefix>sweep.csv)");
  sweep->add_option("--workers", workers, "Concurrent cells (default NLEPI_WORKERS or 1)");

  auto* validate = app.add_subcommand("validate", "Check a config and report every problem");
  add_common(validate);

  std::vector<std::string> argv_store = args;
  if (argv_store.empty()) argv_store.push_back("nlepi");
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  const auto started = std::chrono::steady_clock::now();
  auto finish = [&](json j, const RunConfig& rc) {
    if (!rc.deterministic)
      j["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    out << j.dump(2) << '\n';
    return 0;
  };

  try {
    if (validate->parsed()) {
      json j;
      try {
        build_config(load_document(common));
        j = {{"ok", true}, {"problems", json::array()}};
      } catch (const ConfigError& e) {
        j = {{"ok", false}, {"problems", e.problems()}};
      }
      out << j.dump(2) << '\n';
      return j["ok"].get<bool>() ? 0 : 1;
    }

    const RunConfig rc = build_config(load_document(common));
    const ModelParams& m = rc.model;
    const double l = l_opt.value_or(rc.l);
    if (!(l > 0)) throw std::invalid_argument("--l must be positive");

    if (eigen->parsed()) {
      const Grid<double> g = model_grid(m, -l / 2, l / 2, rc.grid);
      const auto r = principal_eigenpair(assemble_block_operator(linearized_coefficients(m), m.kernels, g));
      if (!dump_path.empty()) {
        std::vector<std::vector<double>> rows;
        for (Eigen::Index i = 0; i < g.n; ++i) rows.push_back({g.node(i), r.phi1[i], r.phi2[i]});
        write_csv(dump_path, {"x", "phi1", "phi2"}, rows);
      }
      return finish(eigen_summary(rc, l, r, g), rc);
    }
    if (nu->parsed()) {
      const auto g = make_grid(-l / 2, l / 2, m.kernels.J11.scale, rc.grid);
      return finish({{"l", l}, {"dx", g.dx}, {"nu", scalar_principal_eigenvalue<double>(m.kernels.J11, 1, 0, g)}}, rc);
    }
    if (critical->parsed()) {
      CriticalOptions co;
      co.grid = rc.grid;
      const auto r = zero_diffusion ? critical_length_zero_diffusion(m, co) : critical_length(m, co);
      json j = to_json(r);
      j["zero_diffusion"] = zero_diffusion;
      return finish(j, rc);
    }
    if (compare4->parsed()) {
      if (!m.kernels.all_equal()) throw std::invalid_argument("compare4 needs one shared kernel for J11..J22");
      ComparisonOptions co;
      co.grid = rc.grid;
      co.refine = rc.compare.refine;
      const auto rep = compare_shared_kernel_curves(m.kernels.J11, rc.compare.params, rc.compare.l_grid(), co);
      std::vector<std::vector<double>> rows;
      for (const auto& r : rep.rows)
        rows.push_back({r.l, r.nu, r.closed.lambda1, r.closed.lambda2, r.closed.lambda3, r.closed.lambda4,
                        r.closed.lambda_p, r.lambda_p_matrix});
      write_csv(rc.output.file("compare4.csv"),
                {"l", "nu", "lambda1", "lambda2", "lambda3", "lambda4", "lambda_p_closed", "lambda_p_matrix"}, rows);
      const json j = to_json(rep);
      write_json(rc.output.file("compare4.json"), j);
      return finish(j, rc);
    }
    if (steady->parsed()) {
      SteadyStateOptions so;
      so.grid = rc.grid;
      const auto ss = steady_state(m, -l / 2, l / 2, so);
      const auto eq = positive_equilibrium(m);
      std::vector<std::vector<double>> rows;
      for (Eigen::Index i = 0; i < ss.grid.n; ++i)
        rows.push_back({ss.grid.node(i), ss.U[i], ss.V[i], ss.zero ? 0.0 : ss.E[i], ss.zero ? 0.0 : ss.F[i]});
      write_csv(rc.output.file("steady.csv"), {"x", "U", "V", "u_star_minus_U", "v_star_minus_V"}, rows);
      json j = {{"l", l},
                {"zero", ss.zero},
                {"lambda_p", number_or_null(ss.lambda_p)},
                {"residual", ss.residual},
                {"iterations", ss.iterations},
                {"u_star", eq.exists ? json(eq.u_star) : json(nullptr)},
                {"v_star", eq.exists ? json(eq.v_star) : json(nullptr)}};
      write_json(rc.output.file("steady.json"), j);
      return finish(j, rc);
    }
    if (evolve->parsed()) {
      json j;
      if (rc.fixed_mode) {
        const Grid<double> g = model_grid(m, -l / 2, l / 2, rc.grid);
        Eigen::VectorXd u0(g.n), v0(g.n);
        for (Eigen::Index i = 0; i < g.n; ++i) {
          u0[i] = rc.init.u0(g.node(i));
          v0[i] = rc.init.v0(g.node(i));
        }
        const auto run = evolve_fixed(m, g, u0, v0, rc.fixed);
        write_timeseries(rc.output.file("timeseries.csv"), run.trajectory);
        if (rc.output.profiles) write_profiles(rc.output.file("profiles.csv"), run.trajectory);
        const auto& last = run.trajectory.samples.back();
        j = {{"mode", "fixed"}, {"l", l}, {"T", rc.fixed.T}, {"dt", run.trajectory.dt}, {"final_sup_u", last.sup_u},
             {"final_sup_v", last.sup_v}, {"lambda_p", model_lambda_p(m, -l / 2, l / 2, rc.grid)}};
      } else {
        FreeControls fc = rc.free;
        fc.stop.l_star = critical_length_or_inf(m, rc.grid);
        fc.stop.margin = rc.thresholds.margin;
        fc.stop.eps_v = rc.thresholds.eps_v;
        const auto run = evolve_free(m, rc.init, fc);
        write_timeseries(rc.output.file("timeseries.csv"), run.trajectory);
        if (rc.output.profiles) write_profiles(rc.output.file("profiles.csv"), run.trajectory);
        j = {{"mode", "free"},
             {"stop_reason", to_string(run.reason)},
             {"t", run.final_state.t},
             {"g", run.final_state.g},
             {"h", run.final_state.h},
             {"l_star", number_or_null(fc.stop.l_star)},
             {"dt", run.trajectory.dt},
             {"dx", run.trajectory.dx},
             {"diagnostics", to_json(run.diagnostics)}};
        if (rc.output.profiles) {
          const auto mb = mass_balance_check(run.trajectory, m);
          j["mass_balance"] = {{"max_defect", mb.max_defect},
                               {"bound", mb.bound},
                               {"max_reaction_sign", number_or_null(mb.max_sign)},
                               {"max_reaction_sign_literal", number_or_null(mb.max_sign_literal)}};
        }
      }
      write_json(rc.output.file("evolve.json"), j);
      return finish(j, rc);
    }
    if (classify_cmd->parsed()) {
      const auto cr = classify(m, rc.init, rc.free, rc.thresholds, critical_length_or_inf(m, rc.grid));
      json j = to_json(cr.outcome);
      j["R0"] = basic_reproduction_number(m);
      j["stop_reason"] = to_string(cr.run.reason);
      j["width_bound_rederived"] = number_or_null(cr.width_bounds.rederived);
      j["width_bound_literal"] = number_or_null(cr.width_bounds.literal);
      j["diagnostics"] = to_json(cr.run.diagnostics);
      return finish(j, rc);
    }
    if (search->parsed()) {
      SearchOptions so;
      so.tol = rc.search.tol;
      so.undecided_retries = static_cast<int>(rc.search.retries);
      so.max_probes = rc.search.max_probes;
      so.thresholds = rc.thresholds;
      so.controls = rc.free;
      json j;
      if (parameter == "tau") {
        j = to_json(find_tau_star(m, rc.init, rc.search.lo, rc.search.hi, so));
      } else if (parameter == "mu1") {
        j = to_json(find_mu_star(m, rc.init, Link{rc.search.link_factor}, rc.search.lo, rc.search.hi, so));
      } else {
        j = to_json(find_d_star(m, rc.init.h0, Link{rc.search.link_factor}, rc.search.tol, rc.grid));
      }
      json tagged = {{"parameter", parameter}};
      tagged.update(j);
      write_json(rc.output.file("search_" + parameter + ".json"), tagged);
      return finish(tagged, rc);
    }
    if (sweep->parsed()) {
      SweepSpec spec;
      spec.base = load_document(common);
      for (const auto& a : axes) spec.axes.push_back(parse_axis(a));
      spec.out = sweep_out.empty() ? rc.output.file("sweep.csv") : std::filesystem::path(sweep_out);
      spec.workers = workers;
      const auto table = run_sweep(spec);
      std::size_t failed = 0;
      for (const auto& r : table.rows) failed += r.error.empty() ? 0 : 1;
      return finish({{"cells", table.rows.size()},
                     {"computed", table.computed},
                     {"reused", table.reused},
                     {"failed", failed},
                     {"table", spec.out.string()}},
                    rc);
    }
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return 2;
  }
  err << app.help();
  return 1;
}

}  // namespace nlepi
