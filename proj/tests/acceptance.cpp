// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any
// criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsdma/discretize.hpp"
#include "hsdma/hybrid_sim.hpp"
#include "hsdma/io.hpp"
#include "hsdma/loewner.hpp"
#include "hsdma/margin.hpp"
#include "hsdma/pipeline.hpp"
#include "support.hpp"

using namespace hsdma;
using discretize::Method;

namespace {

const std::string data_dir = HSDMA_DATA_DIR;
constexpr double target_dm = 0.3254;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

ContinuousStateSpace plant() { return io::parse_continuous(io::read_file(data_dir + "/plant.json")); }
ContinuousStateSpace controller() {
  return io::parse_continuous(io::read_file(data_dir + "/controller.json"));
}

double continuous_dm(const ContinuousStateSpace& ctrl) {
  return margin::delay_margin(margin::loop_transfer(plant(), ctrl)).delay_margin;
}

Outcome criterion1() {
  const double readings[] = {7.854, 7854.0};
  std::vector<double> winners;
  std::ostringstream d;
  for (double a12 : readings) {
    const double dm = continuous_dm(fixtures::controller(a12));
    d << "A12=" << num(a12) << " -> DM " << num(dm) << "; ";
    if (std::abs(dm - target_dm) <= 5e-4) winners.push_back(a12);
  }
  const auto rec = nlohmann::json::parse(io::read_file(data_dir + "/controller_resolution.json"));
  const double recorded = rec["winner"].get<double>();
  const double in_fixture = controller().a()(0, 1);
  d << "recorded winner " << num(recorded) << ", fixture A12 " << num(in_fixture);
  const bool ok = winners.size() == 1 && winners[0] == recorded && in_fixture == recorded;
  return {ok, d.str()};
}

Outcome criterion2() {
  const double dm = continuous_dm(controller());
  return {std::abs(dm - target_dm) <= 5e-4, "DM = " + num(dm, 8) + " s (target 0.3254 +- 5e-4)"};
}

Outcome criterion3() {
  const auto cd = discretize::bilinear(controller(), 0.02);
  std::ostringstream d;
  bool dm_ok = true, order_ok = false;
  for (double tol : {1e-6, 1e-8, 1e-10}) {
    pipeline::HsdmaConfig cfg;
    cfg.svd_tol = tol;
    const auto r = pipeline::hsdma(plant(), cd, cfg);
    const auto order = r.model.order();
    d << "tol " << num(tol) << ": DM " << num(r.report.delay_margin, 8) << " r " << order << "; ";
    if (tol == 1e-8) dm_ok = std::abs(r.report.delay_margin - 0.3255) <= 5e-4;
    if (order >= 14 && order <= 22) order_ok = true;
  }
  d << "need DM 0.3255 +- 5e-4 at the default tol and r in [14, 22]";
  return {dm_ok && order_ok, d.str()};
}

Outcome criterion4() {
  pipeline::SweepConfig cfg;
  cfg.h_values = {0.02, 0.05, 0.10, 0.15};
  cfg.with_oracle = true;
  cfg.oracle_tol = 1e-3;
  const auto rows = pipeline::sweep(plant(), controller(), cfg);
  std::ostringstream d;
  int bad = 0;
  double worst = 0;
  for (const auto& r : rows) {
    const double diff = r.dm_sim ? std::abs(r.dm_hsdma - *r.dm_sim) : INFINITY;
    worst = std::max(worst, diff);
    if (!(diff <= 2e-3) || r.status != "ok") {
      ++bad;
      d << discretize::to_string(r.method) << "@" << num(r.h) << " hsdma " << num(r.dm_hsdma)
        << " sim " << (r.dm_sim ? num(*r.dm_sim) : std::string("n/a")) << " (" << r.status << "); ";
    }
  }
  d << bad << " of " << rows.size() << " rows exceed 2e-3, worst " << num(worst, 3);
  return {bad == 0, d.str()};
}

Outcome criterion5() {
  pipeline::SweepConfig cfg;
  const auto rows = pipeline::sweep(plant(), controller(), cfg);
  bool exceed = false;
  double bwd_first = NAN, bwd_last = NAN;
  std::size_t lo = SIZE_MAX, hi = 0;
  for (const auto& r : rows) {
    if (r.status.rfind("failed", 0) == 0) continue;
    if ((r.method == Method::forward || r.method == Method::bilinear) && r.dm_hsdma > target_dm)
      exceed = true;
    if (r.method == Method::backward && r.h == 0.01) bwd_first = r.dm_hsdma;
    if (r.method == Method::backward && r.h == 0.15) bwd_last = r.dm_hsdma;
    lo = std::min(lo, r.order);
    hi = std::max(hi, r.order);
  }
  const bool drop = bwd_last < bwd_first;
  const bool orders = lo >= 12 && hi <= 34;
  std::ostringstream d;
  d << "forward/bilinear above 0.3254: " << (exceed ? "yes" : "no") << "; backward h=0.01 "
    << num(bwd_first) << " -> h=0.15 " << num(bwd_last) << "; fitted orders in [" << lo << ", "
    << hi << "] (need [12, 34])";
  return {exceed && drop && orders, d.str()};
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  return w;
}

Outcome criterion6() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto w = logspace(0.05, 50, 20);
  double worst_interp = 0, worst_syl = 0, worst_off = 0;
  int order_miss = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int degree = 1 + trial % 6;
    const auto sys = fixtures::random_stable(rng, degree);
    std::vector<CMatrix> phi;
    for (double x : w) phi.push_back(eval_continuous(sys, Complex(0, x)));
    const loewner::FrequencyDataSet data(w, phi, std::numbers::pi / w.back());
    const auto pencil = loewner::build_pencil(loewner::build_tangential(data));
    const auto res = loewner::verify_sylvester(pencil);
    worst_syl = std::max({worst_syl, res.loewner, res.shifted});
    const auto fit = loewner::reduce(pencil);
    if (fit.order() != static_cast<std::size_t>(degree)) ++order_miss;
    worst_interp = std::max(worst_interp, loewner::interpolation_error(fit, data));
    for (int k = 0; k < 10; ++k) {
      const Complex s(0.1 * u(rng), 0.05 * std::pow(1000.0, u(rng)));
      const CMatrix ref = eval_continuous(sys, s);
      worst_off = std::max(worst_off, (eval_continuous(fit, s) - ref).norm() / std::max(1.0, ref.norm()));
    }
  }
  // the worked example's pencil as well
  const auto cd = discretize::bilinear(controller(), 0.02);
  const auto ex = pipeline::sample(cd, pipeline::make_grid(200, pipeline::Grid::log, 1e-3, 0.02));
  const auto exr = loewner::verify_sylvester(loewner::build_pencil(loewner::build_tangential(ex)));
  worst_syl = std::max({worst_syl, exr.loewner, exr.shifted});
  const double ex_interp = loewner::interpolation_error(loewner::fit_rational(ex), ex);

  std::ostringstream d;
  d << "50 systems: order misses " << order_miss << ", interpolation " << num(worst_interp, 3)
    << ", off-data " << num(worst_off, 3) << ", Sylvester " << num(worst_syl, 3)
    << "; sampled example interpolation " << num(ex_interp, 3);
  return {order_miss == 0 && worst_interp <= 1e-8 && worst_off <= 1e-8 && worst_syl <= 1e-10,
          d.str()};
}

Outcome criterion7() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto c = controller();
  const double h = 0.02;
  const auto bil = discretize::bilinear(c, h);
  const auto fwd = discretize::forward_euler(c, h);
  const auto bwd = discretize::backward_euler(c, h);
  double e_bil = 0, e_fwd = 0, e_bwd = 0, e_exact = 0;
  for (int i = 0; i < 50; ++i) {
    const double w = (0.001 + 0.998 * u(rng)) * std::numbers::pi / h;
    const Complex z = std::exp(Complex(0, w * h));
    e_bil = std::max(e_bil, fixtures::rel_err(eval_discrete(bil, z)(0, 0),
                                              response(c, Complex(0, (2 / h) * std::tan(w * h / 2)))));
    e_fwd = std::max(e_fwd, fixtures::rel_err(eval_discrete(fwd, z)(0, 0), response(c, (z - 1.0) / h)));
    e_bwd = std::max(e_bwd,
                     fixtures::rel_err(eval_discrete(bwd, z)(0, 0), response(c, (z - 1.0) / (h * z))));
    e_exact = std::max(e_exact, fixtures::rel_err(discretize::eval_exact_discretization(c, h, w)(0, 0),
                                                  response(c, Complex(0, w))));
  }
  std::ostringstream d;
  d << "bilinear " << num(e_bil, 3) << ", forward " << num(e_fwd, 3) << ", backward "
    << num(e_bwd, 3) << ", exact evaluator " << num(e_exact, 3);
  return {e_bil <= 1e-10 && e_fwd <= 1e-10 && e_bwd <= 1e-10 && e_exact <= 1e-12, d.str()};
}

Outcome criterion8() {
  double worst = 0;
  for (double k : {0.1, 1.0, 10.0}) {
    const double expect = std::numbers::pi / (2 * k);
    const double dm = margin::delay_margin(fixtures::integrator(k)).delay_margin;
    worst = std::max(worst, std::abs(dm - expect) / expect);
  }
  return {worst <= 1e-9, "worst relative error " + num(worst, 3)};
}

Outcome criterion9() {
  std::ostringstream d;
  bool ok = true;
  for (Method m : {Method::forward, Method::backward, Method::bilinear}) {
    const auto r = pipeline::hsdma(plant(), discretize::apply(m, controller(), 1e-4));
    const double dm = r.report.delay_margin;
    ok = ok && std::abs(dm - target_dm) <= 1e-3;
    d << discretize::to_string(m) << " " << num(dm) << " (r " << r.model.order() << "); ";
  }
  d << "need each within 1e-3 of 0.3254";
  return {ok, d.str()};
}

Outcome criterion10() {
  const auto cd = discretize::bilinear(controller(), 0.02);
  const double tol = 1e-3;
  const auto br = sim::bisect_delay_margin(plant(), cd, 0.2, 0.5, tol);
  const auto verdict = sim::classify(sim::simulate_hybrid(plant(), cd, 0.305));
  const bool ok = 0.305 >= br.tau_stable - tol && 0.305 <= br.tau_unstable + tol;
  std::ostringstream d;
  d << "boundary in [" << num(br.tau_stable) << ", " << num(br.tau_unstable) << "], tau = 0.305 is "
    << sim::to_string(verdict) << ", hold delay " << num(br.hold_delay) << " -> total "
    << num(br.total_midpoint());
  return {ok, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8,
                                                       criterion9, criterion10};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << " " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
