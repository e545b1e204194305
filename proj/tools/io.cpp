#include "io.hpp"

#include <cmath>
#include <iomanip>

#include "lorcone/errors.hpp"

namespace lorcone::io {

namespace {

template <class T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::InvalidInput, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T dflt) {
  return j.contains(key) ? get<T>(j, key) : dflt;
}

json grid_point(GridPoint p) { return {{"t", p.t}, {"x", p.x}}; }

json model_point(const ModelPoint& p) { return {num(p.c[0]), num(p.c[1]), num(p.c[2])}; }

json four_point(const FourPointConfig& c) {
  json j = {{"yx", num(c.yx)},   {"yz1", num(c.yz1)}, {"yz2", num(c.yz2)}, {"xz1", num(c.xz1)},
            {"xz2", num(c.xz2)}, {"zz", num(c.zz)},   {"past", c.past}};
  if (c.points) {
    j["points"] = json::array();
    for (auto p : *c.points) j["points"].push_back(grid_point(p));
  }
  return j;
}

json concavity(const ConcavityReport& c) {
  return {{"K", c.K},   {"maxViolation", num(c.maxViolation)}, {"argmaxViolation", c.argmaxViolation},
          {"Kf", num(c.Kf)}, {"argminG", c.argminG}, {"tol", c.tol}, {"fkConcave", c.fk_concave}};
}

}  // namespace

json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

json load_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Io, p.string() + ": " + e.what());
  }
}

WarpingFunction parse_warp(const json& j, std::size_t defaultSteps) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "warp must be an object");
  if (!j.contains("preset")) {
    auto ts = get<std::vector<double>>(j, "ts");
    auto vals = get<std::vector<double>>(j, "vals");
    if (j.contains("a") && std::abs(get<double>(j, "a") - ts.front()) > 1e-12)
      throw Error(ErrorCode::InvalidInput, "warp 'a' does not match ts[0]");
    if (j.contains("b") && std::abs(get<double>(j, "b") - ts.back()) > 1e-12)
      throw Error(ErrorCode::InvalidInput, "warp 'b' does not match the last grid time");
    return WarpingFunction(std::move(ts), std::move(vals));
  }
  auto name = get<std::string>(j, "preset");
  double a = get<double>(j, "a"), b = get<double>(j, "b");
  std::size_t steps = get_or<std::size_t>(j, "steps", defaultSteps);
  if (name == "const") return presets::constant(get_or(j, "c", 1.0), a, b, steps);
  if (name == "linear") return presets::linear(get<double>(j, "slope"), get_or(j, "intercept", 0.0), a, b, steps);
  if (name == "sin") return presets::sin(a, b, steps);
  if (name == "cos") return presets::cos(a, b, steps);
  if (name == "sinK") return presets::sin_k(get<double>(j, "K"), a, b, steps);
  if (name == "power") return presets::power(get<double>(j, "p"), a, b, steps);
  throw Error(ErrorCode::InvalidInput, "unknown warp preset '" + name + "'");
}

FiniteMetricSpace parse_fiber(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "fiber must be an object");
  if (!j.contains("preset"))
    return FiniteMetricSpace(get<std::size_t>(j, "n"), get<std::vector<double>>(j, "dist"),
                             get_or<std::size_t>(j, "base", 0));
  auto name = get<std::string>(j, "preset");
  if (name == "segment") return segment(get<double>(j, "length"), get<std::size_t>(j, "n"));
  if (name == "circleArc")
    return circle_arc(get<double>(j, "radius"), get<double>(j, "angle"), get<std::size_t>(j, "n"));
  throw Error(ErrorCode::InvalidInput, "unknown fiber preset '" + name + "'");
}

GeneralizedCone parse_cone(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "cone spec must be an object");
  std::size_t steps = get_or<std::size_t>(j, "timeSteps", 100);
  WarpingFunction f = parse_warp(get<json>(j, "warp"), steps);
  if (j.contains("timeSteps") && f.size() != steps + 1) f = resample(f, steps);
  ConeOptions o;
  o.distSteps = get_or(j, "distSteps", o.distSteps);
  o.window = get_or(j, "window", o.window);
  o.band = get_or(j, "band", o.band);
  o.nullHints = get_or(j, "nullHints", o.nullHints);
  o.hiStride = get_or(j, "hiStride", o.hiStride);
  o.budget = get_or(j, "budget", o.budget);
  return GeneralizedCone(std::move(f), parse_fiber(get<json>(j, "fiber")), get_or(j, "N", 1.0), o,
                         get_or(j, "fiberWeights", std::vector<double>{}));
}

DiscreteMeasure parse_measure(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidInput, "measure must be a list of atoms");
  std::vector<Atom> atoms;
  for (const auto& a : j) atoms.push_back({{get<std::size_t>(a, "t"), get<std::size_t>(a, "x")}, get<double>(a, "mass")});
  return make_measure(std::move(atoms));
}

FourPointConfig parse_four_point(const json& j) {
  FourPointConfig c;
  c.yx = get<double>(j, "yx"), c.yz1 = get<double>(j, "yz1"), c.yz2 = get<double>(j, "yz2");
  c.xz1 = get<double>(j, "xz1"), c.xz2 = get<double>(j, "xz2"), c.zz = get<double>(j, "zz");
  c.past = get_or(j, "past", false);
  return c;
}

SequenceSpec parse_sequence(const json& j) {
  SequenceSpec s;
  for (const auto& c : get<json>(j, "cones")) s.cones.push_back(parse_cone(c));
  if (j.contains("limit")) s.limit = parse_cone(j["limit"]);
  s.depth = get_or<std::size_t>(j, "depth", 2);
  if (j.contains("center")) s.center = get<double>(j, "center");
  if (j.contains("schedule"))
    for (const auto& e : j["schedule"])
      s.schedule.push_back({get<std::size_t>(e, "k"), get<std::size_t>(e, "l"), get_or(e, "delta", -1.0)});
  else
    s.schedule = default_schedule(s.depth);
  return s;
}

json warp_json(const WarpingFunction& f) {
  return {{"a", f.a()}, {"b", f.b()}, {"ts", f.ts()}, {"vals", f.vals()}};
}

json fiber_json(const FiniteMetricSpace& X) {
  return {{"n", X.size()}, {"base", X.base()}, {"dist", X.table()}};
}

json to_json(const TcbbReport& r) {
  json j = {{"K", r.K},
            {"tol", r.tol},
            {"attempts", r.attempts},
            {"valid", r.valid},
            {"future", r.futureCount},
            {"past", r.pastCount},
            {"domainRejected", r.domainRejected},
            {"unrealizable", r.unrealizable},
            {"worstMargin", num(r.worstMargin)},
            {"bracketWidth", r.bracketWidth},
            {"verdict", r.pass ? "PASS" : "FAIL"}};
  if (r.worst) {
    const auto& w = *r.worst;
    j["worst"] = {{"config", four_point(w.cfg)},
                  {"margin", num(w.margin)},
                  {"model",
                   {{"y", model_point(w.model.y)},
                    {"x", model_point(w.model.x)},
                    {"z1", model_point(w.model.z1)},
                    {"z2", model_point(w.model.z2)},
                    {"tauBar", num(w.model.tauBar)},
                    {"residual", w.model.residual}}}};
  }
  return j;
}

json to_json(const CausalCoupling& c) {
  json plan = json::array();
  for (std::size_t i = 0; i < c.mu0.size(); ++i)
    for (std::size_t k = 0; k < c.mu1.size(); ++k)
      if (c.at(i, k) > 0)
        plan.push_back({{"from", grid_point(c.mu0[i].p)}, {"to", grid_point(c.mu1[k].p)},
                        {"mass", c.at(i, k)}, {"ell", num(c.ell_at(i, k))}});
  return {{"p", c.p}, {"value", num(c.pValue)}, {"plan", plan}};
}

json to_json(const CurvatureReport& r) {
  json slots = json::array();
  for (const auto& s : r.slots) {
    json e = {{"t", s.t}, {"excluded", s.excluded}};
    if (s.excluded)
      e["reason"] = s.reason;
    else
      e["marginLo"] = num(s.marginLo), e["marginHi"] = num(s.marginHi);
    slots.push_back(e);
  }
  return {{"slots", slots},
          {"worstMargin", num(r.worstMargin)},
          {"bestMargin", num(r.bestMargin)},
          {"thetaLo", num(r.thetaLo)},
          {"thetaHi", num(r.thetaHi)},
          {"bracketWidth", num(r.bestMargin - r.worstMargin)},
          {"pValue", num(r.pValue)},
          {"verdict", verdict_name(r.verdict)}};
}

json to_json(const GhBracket& g) {
  json pairs = json::array();
  for (auto [a, b] : g.witness.pairs) pairs.push_back({a, b});
  return {{"lower", g.lower}, {"upper", g.upper}, {"bracketWidth", g.upper - g.lower}, {"witness", pairs}};
}

json to_json(const EllConvergenceReport& r) {
  json gh = json::array(), mods = json::array();
  for (const auto& g : r.gh) gh.push_back({{"i", g.i}, {"k", g.k}, {"lower", g.lower}, {"upper", g.upper}});
  for (const auto& m : r.moduli)
    mods.push_back({{"i", m.i},
                    {"k", m.k},
                    {"l", m.l},
                    {"delta", m.delta},
                    {"eps1", num(m.eps1)},
                    {"eps2", num(m.eps2)},
                    {"levelSetSize", m.levelSetSize},
                    {"remarkApplies", m.remarkApplies},
                    {"inclusionA", m.inclusionA},
                    {"inclusionB", m.inclusionB},
                    {"violationsA", m.violationsA},
                    {"violationsWeakA", m.violationsWeakA},
                    {"violationsB", m.violationsB}});
  json imprison = json::array();
  for (const auto& row : r.imprison) {
    json jr = json::array();
    for (double c : row) jr.push_back(num(c));
    imprison.push_back(jr);
  }
  json bound = json::array();
  for (double c : r.imprisonBound) bound.push_back(num(c));
  return {{"coveredGh", gh},
          {"imprisonment", imprison},
          {"imprisonmentBound", bound},
          {"moduli", mods},
          {"notes", r.notes},
          {"bracketWidth", r.width},
          {"crossCheck",
           {{"baseGap", r.baseGap},
            {"fiberGhUpper", r.fiberGhUpper},
            {"warpSup", r.warpSup},
            {"sufficientConditions", r.sufficientConditions}}},
          {"verdict", verdict_name(r.verdict)}};
}

json to_json(const std::vector<MeasuredEntry>& m) {
  json a = json::array();
  for (const auto& e : m) a.push_back({{"i", e.i}, {"w1", e.w1}, {"tv", e.tv}, {"diameter", e.diameter}});
  return a;
}

json to_json(const PrecompactReport& r) {
  json prof = json::array();
  for (const auto& p : r.profiles) {
    json e = {{"index", p.index}, {"accepted", p.accepted}, {"lambda", num(p.lambda)}};
    if (!p.accepted) e["reason"] = p.reason, e["location"] = p.location;
    prof.push_back(e);
  }
  json j = {{"profiles", prof}, {"selected", r.selected}, {"hasLimit", r.hasLimit}};
  if (r.hasLimit) j["convergence"] = to_json(r.convergence);
  return j;
}

json to_json(const TangentReport& r) {
  json e = json::array();
  for (const auto& t : r.entries)
    e.push_back({{"eps", t.eps},
                 {"warpDeviation", t.warpDeviation},
                 {"fiberBallSize", t.fiberBallSize},
                 {"fiberBallDiameter", t.fiberBallDiameter}});
  return {{"entries", e},
          {"productOK", r.productOK},
          {"convergence", to_json(r.convergence)},
          {"verdict", verdict_name(r.verdict)}};
}

json to_json(const CurvatureReductionReport& r) {
  return {{"kind", r.kind == ReductionKind::Ricci ? "ricci" : "sectional"},
          {"K", r.K},
          {"n", r.n},
          {"fiberBound", r.fiberBound},
          {"fiberBoundProvenance", "declared input"},
          {"fkConcavity", concavity(r.cond1)},
          {"Kf", num(r.Kf)},
          {"threshold", num(r.threshold)},
          {"cond2Tol", r.cond2Tol},
          {"cond2", r.cond2},
          {"verdict", r.verdict ? "PASS" : "FAIL"}};
}

json to_json(const GridGeodesic& g) {
  static const char* names[] = {"timelike", "null", "mixed", "trivial"};
  json st = json::array();
  for (const auto& s : g.states) st.push_back({s.timeIndex, s.fiberDistance});
  return {{"states", st}, {"tau", g.tauLength}, {"character", names[int(g.character)]}};
}

CsvWriter::CsvWriter(const std::filesystem::path& p, const std::vector<std::string>& header) {
  std::filesystem::create_directories(p.parent_path());
  out_.open(p);
  if (!out_) throw Error(ErrorCode::Io, "cannot write " + p.string());
  out_ << std::setprecision(17);
  for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
  out_ << '\n';
}

CsvWriter& CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    out_ << (k ? "," : "");
    double v = values[k];
    if (std::isinf(v))
      out_ << (v > 0 ? "inf" : "-inf");
    else
      out_ << v;
  }
  out_ << '\n';
  return *this;
}

}  // namespace lorcone::io
