#include "cli.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsdma/discretize.hpp"
#include "hsdma/error.hpp"
#include "hsdma/hybrid_sim.hpp"
#include "hsdma/io.hpp"
#include "hsdma/loewner.hpp"
#include "hsdma/margin.hpp"
#include "hsdma/pipeline.hpp"

namespace hsdma::cli {
namespace {

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") out << text;
  else io::write_file(path, text);
}

discretize::Method method_of(const std::string& name) {
  auto m = discretize::parse_method(name);
  if (!m) throw DomainError("unknown method \"" + name + "\"");
  return *m;
}

pipeline::Grid grid_of(const std::string& name) {
  if (name == "log") return pipeline::Grid::log;
  if (name == "linear") return pipeline::Grid::linear;
  throw DomainError("unknown grid \"" + name + "\"");
}

loewner::RankTest rank_test_of(const std::string& name) {
  if (name == "stacked") return loewner::RankTest::stacked;
  if (name == "loewner") return loewner::RankTest::loewner;
  throw DomainError("unknown rank test \"" + name + "\"");
}

sim::HoldConvention hold_of(const std::string& name) {
  if (name == "output_zoh") return sim::HoldConvention::output_zoh;
  if (name == "two_rate_transitions") return sim::HoldConvention::two_rate_transitions;
  throw DomainError("unknown hold convention \"" + name + "\"");
}

sim::Excitation excitation_of(const std::string& name) {
  if (name == "initial_state") return sim::Excitation::initial_state;
  if (name == "step") return sim::Excitation::step_reference;
  throw DomainError("unknown excitation \"" + name + "\"");
}

struct FitFlags {
  double svd_tol = 1e-8;
  std::string rank_test = "stacked";
  bool no_equilibrate = false;
  bool enforce = false;
};

void add_fit_flags(CLI::App* app, FitFlags& f) {
  app->add_option("--svd-tol", f.svd_tol, "relative singular-value cutoff");
  app->add_option("--rank-test", f.rank_test, "stacked | loewner")
      ->check(CLI::IsMember({"stacked", "loewner"}));
  app->add_flag("--no-equilibrate", f.no_equilibrate, "skip diagonal scaling before the SVD");
  app->add_flag("--enforce-stability", f.enforce, "reflect unstable poles of the fit");
}

struct SimFlags {
  double t_final = 120.0;
  double window = 0.0;
  std::string hold = "two_rate_transitions";
  std::string excitation = "initial_state";
  double slope_tol = 1e-3;
};

void add_sim_flags(CLI::App* app, SimFlags& f) {
  app->add_option("--t-final", f.t_final, "simulated horizon, s");
  app->add_option("--window", f.window, "envelope window, s (0: automatic)");
  app->add_option("--hold", f.hold, "output_zoh | two_rate_transitions")
      ->check(CLI::IsMember({"output_zoh", "two_rate_transitions"}));
  app->add_option("--excitation", f.excitation, "initial_state | step")
      ->check(CLI::IsMember({"initial_state", "step"}));
  app->add_option("--slope-tol", f.slope_tol, "log-envelope slope threshold, 1/s");
}

sim::BisectOptions bisect_options(const SimFlags& f) {
  sim::BisectOptions o;
  o.sim.t_final = f.t_final;
  o.sim.window = f.window;
  o.sim.hold = hold_of(f.hold);
  o.sim.excitation = excitation_of(f.excitation);
  o.classify.slope_tol = f.slope_tol;
  return o;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Delay margin of hybrid (continuous plant, discrete controller) loops"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  std::string out_path;

  // discretize
  auto* c_disc = app.add_subcommand("discretize", "continuous system JSON -> discrete system JSON");
  std::string disc_sys, disc_method;
  double disc_h = 0.0;
  c_disc->add_option("--system", disc_sys, "continuous system JSON")->required();
  c_disc->add_option("--method", disc_method, "forward | backward | bilinear | zoh")
      ->required()
      ->check(CLI::IsMember({"forward", "backward", "bilinear", "zoh"}));
  c_disc->add_option("--h", disc_h, "sampling period, s")->required();
  c_disc->add_option("--out", out_path, "output file (default stdout)");

  // sample
  auto* c_sample = app.add_subcommand("sample", "discrete system JSON -> frequency CSV");
  std::string sample_sys, sample_grid = "log";
  std::size_t sample_n = 200;
  double sample_wmin = 1e-3;
  c_sample->add_option("--system", sample_sys, "discrete system JSON")->required();
  c_sample->add_option("--n", sample_n, "number of frequencies");
  c_sample->add_option("--grid", sample_grid, "log | linear")->check(CLI::IsMember({"log", "linear"}));
  c_sample->add_option("--omega-min", sample_wmin, "lowest frequency, rad/s");
  c_sample->add_option("--out", out_path, "output file (default stdout)");

  // fit
  auto* c_fit = app.add_subcommand("fit", "frequency CSV -> rational model JSON + error report");
  std::string fit_data, fit_model_out;
  double fit_h = 0.0;
  FitFlags fit_flags;
  c_fit->add_option("--data", fit_data, "frequency CSV")->required();
  c_fit->add_option("--h", fit_h, "sampling period bounding the grid (default pi / max omega)");
  c_fit->add_option("--model-out", fit_model_out, "write the fitted system JSON here");
  add_fit_flags(c_fit, fit_flags);
  c_fit->add_option("--out", out_path, "report file (default stdout)");

  // margin
  auto* c_margin = app.add_subcommand("margin", "plant + continuous controller -> margin report");
  std::string m_plant, m_ctrl;
  margin::SweepOptions m_sweep;
  c_margin->add_option("--plant", m_plant, "continuous plant JSON")->required();
  c_margin->add_option("--controller", m_ctrl, "continuous controller JSON")->required();
  c_margin->add_option("--omega-min", m_sweep.omega_min, "sweep start, rad/s");
  c_margin->add_option("--omega-max", m_sweep.omega_max, "sweep end, rad/s");
  c_margin->add_option("--points-per-decade", m_sweep.points_per_decade, "sweep density");
  c_margin->add_option("--out", out_path, "output file (default stdout)");

  // hsdma
  auto* c_hsdma = app.add_subcommand("hsdma", "plant + discrete controller -> delay margin");
  std::string hs_plant, hs_ctrl, hs_grid = "log", hs_nominal = "sampled";
  pipeline::HsdmaConfig hs_cfg;
  FitFlags hs_fit;
  double hs_band = 0.0;
  c_hsdma->add_option("--plant", hs_plant, "continuous plant JSON")->required();
  c_hsdma->add_option("--controller", hs_ctrl, "discrete controller JSON")->required();
  c_hsdma->add_option("--n", hs_cfg.n, "number of frequency samples");
  c_hsdma->add_option("--grid", hs_grid, "log | linear")->check(CLI::IsMember({"log", "linear"}));
  c_hsdma->add_option("--omega-min", hs_cfg.omega_min, "lowest frequency, rad/s");
  c_hsdma->add_option("--band-max", hs_band, "crossover search limit, rad/s (default pi/h)");
  c_hsdma->add_option("--nominal", hs_nominal, "sampled | fitted")
      ->check(CLI::IsMember({"sampled", "fitted"}));
  add_fit_flags(c_hsdma, hs_fit);
  c_hsdma->add_option("--out", out_path, "output file (default stdout)");

  // simulate
  auto* c_sim = app.add_subcommand("simulate", "hybrid closed-loop simulation -> trace CSV");
  std::string sim_plant, sim_ctrl;
  double sim_tau = 0.0;
  SimFlags sim_flags;
  c_sim->add_option("--plant", sim_plant, "continuous plant JSON")->required();
  c_sim->add_option("--controller", sim_ctrl, "discrete controller JSON")->required();
  c_sim->add_option("--tau", sim_tau, "transport delay, s");
  add_sim_flags(c_sim, sim_flags);
  c_sim->add_option("--out", out_path, "output file (default stdout)");

  // bisect
  auto* c_bis = app.add_subcommand("bisect", "simulation-based delay margin bracket -> JSON");
  std::string bis_plant, bis_ctrl;
  double bis_lo = 0.0, bis_hi = 0.0, bis_tol = 1e-3;
  SimFlags bis_flags;
  c_bis->add_option("--plant", bis_plant, "continuous plant JSON")->required();
  c_bis->add_option("--controller", bis_ctrl, "discrete controller JSON")->required();
  c_bis->add_option("--tau-lo", bis_lo, "stable transport delay, s")->required();
  c_bis->add_option("--tau-hi", bis_hi, "unstable transport delay, s")->required();
  c_bis->add_option("--tol", bis_tol, "bracket width, s");
  add_sim_flags(c_bis, bis_flags);
  c_bis->add_option("--out", out_path, "output file (default stdout)");

  // sweep
  auto* c_sweep = app.add_subcommand("sweep", "(method, h) sweep -> rows CSV + plot CSV");
  std::string sw_plant, sw_ctrl, sw_plot;
  std::vector<std::string> sw_methods{"forward", "backward", "bilinear"};
  std::vector<double> sw_h;
  bool sw_oracle = false;
  std::size_t sw_threads = 0;
  double sw_oracle_tol = 1e-3;
  pipeline::HsdmaConfig sw_cfg;
  FitFlags sw_fit;
  SimFlags sw_sim;
  c_sweep->add_option("--plant", sw_plant, "continuous plant JSON")->required();
  c_sweep->add_option("--controller", sw_ctrl, "continuous controller JSON")->required();
  c_sweep->add_option("--methods", sw_methods, "comma-separated methods")->delimiter(',');
  c_sweep->add_option("--h", sw_h, "comma-separated sampling periods")->delimiter(',');
  c_sweep->add_option("--n", sw_cfg.n, "number of frequency samples");
  c_sweep->add_flag("--oracle", sw_oracle, "also run the simulation oracle");
  c_sweep->add_option("--oracle-tol", sw_oracle_tol, "oracle bisection tolerance, s");
  c_sweep->add_option("--threads", sw_threads, "worker threads (default HSDMA_THREADS or all)");
  c_sweep->add_option("--plot", sw_plot, "write plot CSV here");
  add_fit_flags(c_sweep, sw_fit);
  add_sim_flags(c_sweep, sw_sim);
  c_sweep->add_option("--out", out_path, "rows file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  auto apply_fit = [](pipeline::HsdmaConfig& cfg, const FitFlags& f) {
    cfg.svd_tol = f.svd_tol;
    cfg.rank_test = rank_test_of(f.rank_test);
    cfg.equilibrate = !f.no_equilibrate;
    cfg.enforce_stability = f.enforce;
  };

  try {
    if (*c_disc) {
      const auto sys = io::parse_continuous(io::read_file(disc_sys), disc_sys);
      emit(io::to_json(discretize::apply(method_of(disc_method), sys, disc_h)), out_path, out);
    } else if (*c_sample) {
      const auto sys = io::parse_discrete(io::read_file(sample_sys), sample_sys);
      const auto grid = pipeline::make_grid(sample_n, grid_of(sample_grid), sample_wmin, sys.h());
      emit(io::to_csv(pipeline::sample(sys, grid)), out_path, out);
    } else if (*c_fit) {
      const auto data = io::parse_frequency_csv(io::read_file(fit_data), fit_h, fit_data);
      loewner::ReduceOptions ro;
      ro.tol = fit_flags.svd_tol;
      ro.rank_test = rank_test_of(fit_flags.rank_test);
      ro.equilibrate = !fit_flags.no_equilibrate;
      auto model = loewner::fit_rational(data, ro);
      const double e = loewner::interpolation_error(model, data);
      if (fit_flags.enforce && model.order() > 0) model = loewner::enforce_stability(model);
      if (!fit_model_out.empty()) io::write_file(fit_model_out, io::to_json(model));
      emit(io::fit_report(model, e, data.size()), out_path, out);
    } else if (*c_margin) {
      const auto plant = io::parse_continuous(io::read_file(m_plant), m_plant);
      const auto ctrl = io::parse_continuous(io::read_file(m_ctrl), m_ctrl);
      margin::MarginOptions mo;
      mo.sweep = m_sweep;
      emit(io::to_json(margin::delay_margin(margin::loop_transfer(plant, ctrl), mo)), out_path, out);
    } else if (*c_hsdma) {
      const auto plant = io::parse_continuous(io::read_file(hs_plant), hs_plant);
      const auto ctrl = io::parse_discrete(io::read_file(hs_ctrl), hs_ctrl);
      hs_cfg.grid = grid_of(hs_grid);
      if (hs_band > 0.0) hs_cfg.sweep_band_max = hs_band;
      hs_cfg.nominal = hs_nominal == "fitted" ? pipeline::NominalCheck::fitted_model
                                              : pipeline::NominalCheck::sampled_data;
      apply_fit(hs_cfg, hs_fit);
      const auto res = pipeline::hsdma(plant, ctrl, hs_cfg);
      for (const auto& w : res.warnings) err << "warning: " << w << '\n';
      emit(io::to_json(res), out_path, out);
    } else if (*c_sim) {
      const auto plant = io::parse_continuous(io::read_file(sim_plant), sim_plant);
      const auto ctrl = io::parse_discrete(io::read_file(sim_ctrl), sim_ctrl);
      const auto bo = bisect_options(sim_flags);
      const auto trace = sim::simulate_hybrid(plant, ctrl, sim_tau, bo.sim);
      emit(io::to_csv(trace), out_path, out);
      err << "verdict: " << sim::to_string(sim::classify(trace, bo.classify)) << '\n';
    } else if (*c_bis) {
      const auto plant = io::parse_continuous(io::read_file(bis_plant), bis_plant);
      const auto ctrl = io::parse_discrete(io::read_file(bis_ctrl), bis_ctrl);
      const auto bo = bisect_options(bis_flags);
      const auto b = sim::bisect_delay_margin(plant, ctrl, bis_lo, bis_hi, bis_tol, bo);
      emit(io::to_json(b, bo.sim.hold), out_path, out);
    } else if (*c_sweep) {
      const auto plant = io::parse_continuous(io::read_file(sw_plant), sw_plant);
      const auto ctrl = io::parse_continuous(io::read_file(sw_ctrl), sw_ctrl);
      pipeline::SweepConfig cfg;
      cfg.methods.clear();
      for (const auto& m : sw_methods) cfg.methods.push_back(method_of(m));
      if (!sw_h.empty()) cfg.h_values = sw_h;
      apply_fit(sw_cfg, sw_fit);
      cfg.hsdma = sw_cfg;
      cfg.with_oracle = sw_oracle;
      cfg.oracle_tol = sw_oracle_tol;
      cfg.oracle = bisect_options(sw_sim);
      if (sw_threads > 0) cfg.threads = sw_threads;
      for (double h : cfg.h_values)
        if (h > 0.15) err << "warning: h = " << h << " is beyond 0.15 s\n";
      const auto rows = pipeline::sweep(plant, ctrl, cfg);
      emit(io::sweep_csv(rows), out_path, out);
      if (!sw_plot.empty()) io::write_file(sw_plot, io::plot_csv(rows));
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace hsdma::cli
