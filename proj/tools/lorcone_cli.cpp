// Experiment runner: one pipeline per invocation, JSON report plus CSV tables.

#include <omp.h>

#include <chrono>
#include <ctime>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "io.hpp"
#include "lorcone/errors.hpp"

using namespace lorcone;
using io::json;
namespace fs = std::filesystem;

namespace {

// JSON config files: top-level keys are options, nested objects are
// subcommand sections, e.g. {"threads": 4, "tcbb": {"K": 0, "seed": 7}}.
class ConfigJSON : public CLI::Config {
public:
  std::string to_config(const CLI::App* app, bool defaults, bool, std::string) const override {
    json j;
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_configurable() && !opt->get_lnames().empty()) {
        std::string name = opt->get_lnames()[0];
        if (opt->count() == 1) j[name] = opt->results().at(0);
        else if (opt->count() > 1) j[name] = opt->results();
        else if (defaults && !opt->get_default_str().empty()) j[name] = opt->get_default_str();
      }
    }
    for (const CLI::App* sub : app->get_subcommands({}))
      j[sub->get_name()] = json::parse(to_config(sub, defaults, false, ""));
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config: ") + e.what());
    }
    return items_of(j, "", {});
  }

private:
  static std::string scalar(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

  std::vector<CLI::ConfigItem> items_of(const json& j, const std::string& name,
                                        std::vector<std::string> prefix) const {
    std::vector<CLI::ConfigItem> out;
    if (j.is_object()) {
      // "++" and "--" bracket a section; they are what activates a
      // configurable subcommand.
      if (!name.empty()) {
        prefix.push_back(name);
        out.push_back({prefix, "++", {}});
      }
      for (auto it = j.begin(); it != j.end(); ++it) {
        auto sub = items_of(*it, it.key(), prefix);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      if (!name.empty()) out.push_back({prefix, "--", {}});
      return out;
    }
    if (name.empty()) throw CLI::ConversionError("config must be a JSON object");
    CLI::ConfigItem item;
    item.name = name;
    item.parents = prefix;
    if (j.is_array())
      for (const auto& v : j) item.inputs.push_back(scalar(v));
    else if (j.is_boolean())
      item.inputs = {j.get<bool>() ? "true" : "false"};
    else
      item.inputs = {scalar(j)};
    out.push_back(std::move(item));
    return out;
  }
};

struct Run {
  fs::path out = "out";
  int threads = 0;
  std::string command;
};

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Pass: return 0;
    case Verdict::Fail: return 2;
    case Verdict::Inconclusive: return 3;
  }
  return 1;
}

int finish(const Run& run, json report, Verdict v) {
  fs::create_directories(run.out);
  report["command"] = run.command;
  if (!report.contains("verdict")) report["verdict"] = verdict_name(v);
  {
    std::ofstream f(run.out / "report.json");
    f << report.dump(2) << '\n';
  }
  // Wall-clock data lives in a sidecar so that report.json stays reproducible.
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  std::ofstream(run.out / "report.meta.json") << json{{"timestamp", stamp}, {"threads", omp_get_max_threads()}}.dump(2)
                                              << '\n';
  std::cout << run.command << ": " << report["verdict"].get<std::string>() << " (" << (run.out / "report.json").string()
            << ")\n";
  return exit_code(v);
}

GridPoint point_of(const std::vector<std::size_t>& v, const char* what) {
  if (v.size() != 2) throw Error(ErrorCode::InvalidInput, std::string(what) + " needs a time index and a fiber index");
  return {v[0], v[1]};
}

std::vector<double> default_t_grid() {
  std::vector<double> t;
  for (int k = 1; k < 8; ++k) t.push_back(k / 8.0);
  return t;
}

void write_margins(const fs::path& p, const CurvatureReport& r) {
  io::CsvWriter csv(p, {"t", "excluded", "marginLo", "marginHi"});
  for (const auto& s : r.slots) csv.row({s.t, double(s.excluded), s.marginLo, s.marginHi});
}

void write_convergence_tables(const fs::path& dir, const EllConvergenceReport& r) {
  io::CsvWriter m(dir / "moduli.csv",
                  {"i", "k", "l", "delta", "eps1", "eps2", "inclusionA", "inclusionB", "remarkApplies"});
  for (const auto& e : r.moduli)
    m.row({double(e.i), double(e.k), double(e.l), e.delta, e.eps1, e.eps2, double(e.inclusionA), double(e.inclusionB),
           double(e.remarkApplies)});
  io::CsvWriter g(dir / "gh.csv", {"i", "k", "lower", "upper"});
  for (const auto& e : r.gh) g.row({double(e.i), double(e.k), e.lower, e.upper});
}

ConeSequence sequence_of(const io::SequenceSpec& s) {
  if (!s.limit) throw Error(ErrorCode::InvalidInput, "sequence spec needs a 'limit' cone");
  return ConeSequence{s.cones, *s.limit, s.depth, s.center};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete Lorentzian cones: separations, curvature bounds and convergence"};
  app.config_formatter(std::make_shared<ConfigJSON>());
  app.set_config("--config", "", "JSON config file");
  app.require_subcommand(1);
  Run run;
  app.add_option("--out", run.out, "output directory")->capture_default_str();
  app.add_option("--threads", run.threads, "cap on worker threads (0 = runtime default)");

  std::function<int()> action;
  auto sub = [&](const char* name, const char* desc) {
    auto* s = app.add_subcommand(name, desc);
    s->configurable();
    return s;
  };

  // Shared parameter storage; each subcommand binds what it uses.
  std::string cone, warp, mu0, mu1, seqFile, aFile, bFile, mode = "auto", flavor = "entropic", configs;
  std::vector<std::size_t> from, to, x1;
  std::vector<double> tGrid = default_t_grid(), epsList;
  double K = 0, N = 1, p = 1, tol = 0.02, densityCap = 1e6, D = 0, fiberBound = 0, t0 = 0, tolFactor = 2, redTol = -1;
  std::size_t samples = 500, cycles = 1000, depth = 2, level = 2, n = 2, timeSteps = 100;
  std::uint64_t seed = 0;
  bool tables = false, strict = false;

  auto* tau = sub("tau", "time separation bracket between two grid points");
  tau->add_option("--cone", cone, "cone spec JSON")->required()->check(CLI::ExistingFile);
  tau->add_option("--from", from, "time index and fiber index")->expected(2);
  tau->add_option("--to", to, "time index and fiber index")->expected(2);
  tau->add_flag("--tables", tables, "export the full lower/upper tables");
  tau->final_callback([&] {
    action = [&] {
      GeneralizedCone c = io::parse_cone(io::load_json(cone));
      json rep = {{"bracketWidth", 0.0}};
      if (!from.empty() || !to.empty()) {
        GridPoint P = point_of(from, "--from"), Q = point_of(to, "--to");
        double lo = c.ell(P, Q), hi = c.ell_hi(P, Q);
        rep = {{"from", {P.t, P.x}}, {"to", {Q.t, Q.x}}, {"lo", io::num(lo)}, {"hi", io::num(hi)},
               {"causal", lo > kNegInf}, {"bracketWidth", io::num(lo > kNegInf ? hi - lo : 0.0)}};
        io::CsvWriter(run.out / "tables" / "tau.csv", {"s", "x", "t", "y", "lo", "hi"})
            .row({double(P.t), double(P.x), double(Q.t), double(Q.x), lo, hi});
      }
      if (tables) {
        const auto& T = c.tables();
        io::CsvWriter csv(run.out / "tables" / "tables.csv", {"s", "t", "r", "lo", "hi"});
        for (std::size_t s = 0; s < T.time_points(); ++s)
          for (std::size_t t = s; t < T.time_points(); ++t)
            for (std::size_t j = 0; j < T.dist_points(); ++j)
              csv.row({c.time(s), c.time(t), double(j) * c.dist_step(), T.lo(s, t, j), T.hi(s, t, j)});
      }
      return finish(run, rep, Verdict::Pass);
    };
  });

  auto* geo = sub("geodesic", "grid maximizer between two points");
  geo->add_option("--cone", cone)->required()->check(CLI::ExistingFile);
  geo->add_option("--from", from)->required()->expected(2);
  geo->add_option("--to", to)->required()->expected(2);
  geo->final_callback([&] {
    action = [&] {
      GeneralizedCone c = io::parse_cone(io::load_json(cone));
      GridGeodesic g = c.maximizer(point_of(from, "--from"), point_of(to, "--to"));
      io::CsvWriter csv(run.out / "tables" / "geodesic.csv", {"step", "timeIndex", "time", "fiberDistance", "weight"});
      for (std::size_t k = 0; k < g.states.size(); ++k)
        csv.row({double(k), double(g.states[k].timeIndex), c.time(g.states[k].timeIndex), g.states[k].fiberDistance,
                 k ? g.stepWeights[k - 1] : 0.0});
      return finish(run, io::to_json(g), Verdict::Pass);
    };
  });

  auto* tcbb = sub("tcbb", "4-point timelike curvature comparison");
  tcbb->add_option("--cone", cone)->check(CLI::ExistingFile);
  tcbb->add_option("--configs", configs, "JSON list of 4-point separations checked directly")->check(CLI::ExistingFile);
  tcbb->add_option("--K", K)->required();
  tcbb->add_option("--samples", samples)->capture_default_str();
  tcbb->add_option("--tol", tol)->capture_default_str();
  tcbb->add_option("--seed", seed);
  tcbb->final_callback([&] {
    action = [&] {
      TcbbReport r;
      if (!configs.empty()) {
        std::vector<FourPointConfig> cfgs;
        for (const auto& e : io::load_json(configs)) cfgs.push_back(io::parse_four_point(e));
        r = tcbb_check(cfgs, K, tol);
      } else {
        if (cone.empty()) throw Error(ErrorCode::InvalidInput, "tcbb needs --cone or --configs");
        if (tcbb->count("--seed") == 0) throw Error(ErrorCode::InvalidInput, "sampling commands need --seed");
        r = tcbb_verify(io::parse_cone(io::load_json(cone)), K, samples, tol, seed);
      }
      json rep = io::to_json(r);
      rep["seed"] = seed;
      return finish(run, rep, r.pass ? Verdict::Pass : Verdict::Fail);
    };
  });

  auto* ot = sub("ot", "optimal causal coupling");
  ot->add_option("--cone", cone)->required()->check(CLI::ExistingFile);
  ot->add_option("--mu0", mu0)->required()->check(CLI::ExistingFile);
  ot->add_option("--mu1", mu1)->required()->check(CLI::ExistingFile);
  ot->add_option("--p", p)->capture_default_str();
  ot->add_flag("--strict", strict, "couple along chronological pairs only");
  ot->add_option("--cycles", cycles, "random cycles for the monotonicity check")->capture_default_str();
  ot->add_option("--seed", seed)->required();
  ot->final_callback([&] {
    action = [&] {
      GeneralizedCone c = io::parse_cone(io::load_json(cone));
      CausalCoupling cp = solve_lp(c, io::parse_measure(io::load_json(mu0)), io::parse_measure(io::load_json(mu1)), p,
                                   strict);
      json rep = io::to_json(cp);
      rep["cyclicalMonotonicitySlack"] = io::num(check_cyclical_monotonicity(cp, cycles, seed));
      rep["seed"] = seed;
      io::CsvWriter csv(run.out / "tables" / "coupling.csv", {"t0", "x0", "t1", "x1", "mass", "ell"});
      for (std::size_t i = 0; i < cp.mu0.size(); ++i)
        for (std::size_t k = 0; k < cp.mu1.size(); ++k)
          if (cp.at(i, k) > 0)
            csv.row({double(cp.mu0[i].p.t), double(cp.mu0[i].p.x), double(cp.mu1[k].p.t), double(cp.mu1[k].p.x),
                     cp.at(i, k), cp.ell_at(i, k)});
      return finish(run, rep, Verdict::Pass);
    };
  });

  auto* tcd = sub("tcd", "entropic or Renyi curvature-dimension check along a coupling");
  tcd->add_option("--cone", cone)->required()->check(CLI::ExistingFile);
  tcd->add_option("--mu0", mu0)->required()->check(CLI::ExistingFile);
  tcd->add_option("--mu1", mu1)->required()->check(CLI::ExistingFile);
  tcd->add_option("--p", p)->capture_default_str();
  tcd->add_option("--K", K)->required();
  tcd->add_option("--N", N)->required();
  tcd->add_option("--flavor", flavor)->check(CLI::IsMember({"entropic", "renyi"}))->capture_default_str();
  tcd->add_option("--t", tGrid, "interpolation times");
  tcd->add_option("--tol", tol)->capture_default_str();
  tcd->add_option("--density-cap", densityCap)->capture_default_str();
  tcd->add_option("--seed", seed, "recorded only; the check is deterministic");
  tcd->final_callback([&] {
    action = [&] {
      GeneralizedCone c = io::parse_cone(io::load_json(cone));
      CurvatureReport r =
          tcd_verify(c, io::parse_measure(io::load_json(mu0)), io::parse_measure(io::load_json(mu1)), p, K, N,
                     flavor == "renyi" ? TcdFlavor::Renyi : TcdFlavor::Entropic, tGrid, tol, densityCap);
      write_margins(run.out / "tables" / "margins.csv", r);
      return finish(run, io::to_json(r), r.verdict);
    };
  });

  auto* tmcp = sub("tmcp", "measure contraction check towards a point");
  tmcp->add_option("--cone", cone)->required()->check(CLI::ExistingFile);
  tmcp->add_option("--mu0", mu0)->required()->check(CLI::ExistingFile);
  tmcp->add_option("--x1", x1, "time index and fiber index")->required()->expected(2);
  tmcp->add_option("--K", K)->required();
  tmcp->add_option("--N", N)->required();
  tmcp->add_option("--t", tGrid);
  tmcp->add_option("--tol", tol)->capture_default_str();
  tmcp->add_option("--density-cap", densityCap)->capture_default_str();
  tmcp->add_option("--seed", seed, "recorded only; the check is deterministic");
  tmcp->final_callback([&] {
    action = [&] {
      GeneralizedCone c = io::parse_cone(io::load_json(cone));
      CurvatureReport r =
          tmcp_verify(c, io::parse_measure(io::load_json(mu0)), point_of(x1, "--x1"), K, N, tGrid, tol, densityCap);
      write_margins(run.out / "tables" / "margins.csv", r);
      return finish(run, io::to_json(r), r.verdict);
    };
  });

  auto* gh = sub("gh", "Gromov-Hausdorff bracket between two finite metric spaces");
  gh->add_option("--a", aFile)->required()->check(CLI::ExistingFile);
  gh->add_option("--b", bFile)->required()->check(CLI::ExistingFile);
  gh->add_option("--mode", mode)->check(CLI::IsMember({"auto", "exact", "heuristic"}))->capture_default_str();
  gh->final_callback([&] {
    action = [&] {
      FiniteMetricSpace A = io::parse_fiber(io::load_json(aFile)), B = io::parse_fiber(io::load_json(bFile));
      GhMode m = mode == "exact"       ? GhMode::Exact
                 : mode == "heuristic" ? GhMode::Heuristic
                 : std::max(A.size(), B.size()) <= kExactGhCap ? GhMode::Exact
                                                               : GhMode::Heuristic;
      json rep = io::to_json(gh_distance(A, B, m));
      rep["mode"] = m == GhMode::Exact ? "exact" : "heuristic";
      return finish(run, rep, Verdict::Pass);
    };
  });

  auto* ell = sub("ellconv", "covered GH and uniform separation convergence of a cone sequence");
  ell->add_option("--sequence", seqFile)->required()->check(CLI::ExistingFile);
  ell->final_callback([&] {
    action = [&] {
      io::SequenceSpec s = io::parse_sequence(io::load_json(seqFile));
      EllConvergenceReport r = ell_converge_check(sequence_of(s), s.schedule);
      write_convergence_tables(run.out / "tables", r);
      return finish(run, io::to_json(r), r.verdict);
    };
  });

  auto* meas = sub("measured", "weak distance of normalized reference measures on a cover set");
  meas->add_option("--sequence", seqFile)->required()->check(CLI::ExistingFile);
  meas->add_option("--k", level, "cover level")->capture_default_str();
  meas->final_callback([&] {
    action = [&] {
      io::SequenceSpec s = io::parse_sequence(io::load_json(seqFile));
      auto m = measured_converge_check(sequence_of(s), level);
      io::CsvWriter csv(run.out / "tables" / "measured.csv", {"i", "w1", "tv", "diameter"});
      for (const auto& e : m) csv.row({double(e.i), e.w1, e.tv, e.diameter});
      bool trend = m.size() < 2 || m.back().w1 <= m.front().w1;
      return finish(run, {{"entries", io::to_json(m)}}, trend ? Verdict::Pass : Verdict::Inconclusive);
    };
  });

  auto* pre = sub("precompact", "normalization, slope bounds and limit extraction for warped profiles");
  pre->add_option("--sequence", seqFile, "sequence spec; its 'cones' are the profiles")
      ->required()
      ->check(CLI::ExistingFile);
  pre->add_option("--K", K)->required();
  pre->add_option("--N", N)->required();
  pre->add_option("--D", D, "diameter bound on the base interval")->required();
  pre->add_option("--depth", depth)->capture_default_str();
  pre->final_callback([&] {
    action = [&] {
      io::SequenceSpec s = io::parse_sequence(io::load_json(seqFile));
      PrecompactReport r = precompact_harness(s.cones, K, N, D, depth);
      if (r.hasLimit) write_convergence_tables(run.out / "tables", r.convergence);
      return finish(run, io::to_json(r), r.hasLimit ? r.convergence.verdict : Verdict::Fail);
    };
  });

  auto* tan = sub("tangent", "blow-up sequence at a base time");
  tan->add_option("--cone", cone)->required()->check(CLI::ExistingFile);
  tan->add_option("--t0", t0, "base time; snapped to the nearest grid time")->required();
  tan->add_option("--eps", epsList)->required();
  tan->add_option("--depth", depth)->capture_default_str();
  tan->add_option("--time-steps", timeSteps)->capture_default_str();
  tan->add_option("--tol-factor", tolFactor)->capture_default_str();
  tan->final_callback([&] {
    action = [&] {
      GeneralizedCone c = io::parse_cone(io::load_json(cone));
      const auto& ts = c.warp().ts();
      std::size_t i0 = std::size_t(std::min_element(ts.begin(), ts.end(),
                                                    [&](double a, double b) { return std::abs(a - t0) < std::abs(b - t0); }) -
                                   ts.begin());
      TangentReport r = tangent_cone(c, i0, epsList, depth, timeSteps, tolFactor);
      io::CsvWriter csv(run.out / "tables" / "tangent.csv", {"eps", "k", "warpDeviation"});
      for (const auto& e : r.entries)
        for (std::size_t k = 0; k < e.warpDeviation.size(); ++k) csv.row({e.eps, double(k + 1), e.warpDeviation[k]});
      write_convergence_tables(run.out / "tables", r.convergence);
      json rep = io::to_json(r);
      rep["t0"] = c.time(i0);
      return finish(run, rep, r.verdict);
    };
  });

  auto reduction = [&](const char* name, bool ricci) {
    auto* s = sub(name, ricci ? "Ricci lower bound of a warped product from f and the fiber bound"
                              : "sectional lower bound of a warped product from f and the fiber bound");
    s->add_option("--warp", warp)->required()->check(CLI::ExistingFile);
    s->add_option("--K", K)->required();
    s->add_option("--n", n, "fiber dimension")->capture_default_str();
    s->add_option("--fiber-bound", fiberBound, "declared fiber curvature lower bound")->required();
    s->add_option("--tol", redTol, "FK tolerance (negative = grid-aware default)");
    s->final_callback([&, ricci] {
      action = [&, ricci] {
        WarpingFunction f = io::parse_warp(io::load_json(warp));
        CurvatureReductionReport r =
            ricci ? ricci_reduction(f, K, n, fiberBound, redTol) : sectional_reduction(f, K, fiberBound, redTol);
        auto pts = oneill_diagnostics(f, n);
        io::CsvWriter csv(run.out / "tables" / "oneill.csv", {"t", "radial", "mixed", "tangential", "nearZero"});
        json diag = json::array();
        for (const auto& q : pts) {
          csv.row({q.t, q.radial, q.mixed, q.tangential, double(q.nearZero)});
          diag.push_back({{"t", q.t}, {"radial", io::num(q.radial)}, {"mixed", io::num(q.mixed)},
                          {"tangential", io::num(q.tangential)}, {"nearZero", q.nearZero}});
        }
        json rep = io::to_json(r);
        rep["pointwise"] = diag;
        return finish(run, rep, r.verdict ? Verdict::Pass : Verdict::Fail);
      };
    });
  };
  reduction("ricci", true);
  reduction("sectional", false);

  // Preset emitter: prints a warp or fiber JSON object.
  std::string kind;
  double a = 0, b = 1, c = 1, slope = 1, intercept = 0, pw = 1, length = 1, radius = 1, angle = 1;
  std::size_t steps = 100, points = 101;
  auto* preset = sub("preset", "print a preset warp or fiber as JSON");
  preset->add_option("kind", kind)
      ->required()
      ->check(CLI::IsMember({"const", "linear", "sin", "cos", "sinK", "power", "segment", "circleArc"}));
  preset->add_option("--a", a);
  preset->add_option("--b", b);
  preset->add_option("--steps", steps);
  preset->add_option("--c", c);
  preset->add_option("--slope", slope);
  preset->add_option("--intercept", intercept);
  preset->add_option("--K", K);
  preset->add_option("--p", pw);
  preset->add_option("--length", length);
  preset->add_option("--radius", radius);
  preset->add_option("--angle", angle);
  preset->add_option("--n", points);
  preset->final_callback([&] {
    action = [&] {
      json j;
      if (kind == "segment")
        j = io::fiber_json(segment(length, points));
      else if (kind == "circleArc")
        j = io::fiber_json(circle_arc(radius, angle, points));
      else
        j = io::warp_json(io::parse_warp({{"preset", kind}, {"a", a}, {"b", b}, {"steps", steps}, {"c", c},
                                          {"slope", slope}, {"intercept", intercept}, {"K", K}, {"p", pw}}));
      std::cout << j.dump() << '\n';
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  run.command = app.get_subcommands().front()->get_name();
  if (run.threads > 0) omp_set_num_threads(run.threads);
  try {
    return action();
  } catch (const Error& e) {
    json err = {{"error", {{"code", std::string(code_name(e.code()))}, {"message", e.what()}}}, {"command", run.command}};
    std::cerr << err.dump() << '\n';
    std::error_code ec;
    fs::create_directories(run.out, ec);
    if (!ec) std::ofstream(run.out / "report.json") << err.dump(2) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"code", "INTERNAL"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  }
}
