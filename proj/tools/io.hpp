#pragma once

#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lorcone/converge.hpp"
#include "lorcone/lorot.hpp"
#include "lorcone/model2d.hpp"
#include "lorcone/smoothcurv.hpp"

namespace lorcone::io {

using nlohmann::json;

json load_json(const std::filesystem::path& p);

// Warp and fiber entries are either raw objects or {"preset": name, ...}.
WarpingFunction parse_warp(const json& j, std::size_t defaultSteps = 100);
FiniteMetricSpace parse_fiber(const json& j);
GeneralizedCone parse_cone(const json& j);
DiscreteMeasure parse_measure(const json& j);
FourPointConfig parse_four_point(const json& j);

struct SequenceSpec {
  std::vector<GeneralizedCone> cones;
  std::optional<GeneralizedCone> limit;
  std::size_t depth = 2;
  double center = std::numeric_limits<double>::quiet_NaN();
  std::vector<ScheduleEntry> schedule;
};
SequenceSpec parse_sequence(const json& j);

json warp_json(const WarpingFunction& f);
json fiber_json(const FiniteMetricSpace& X);

// Non-finite values become the strings "inf", "-inf" and "nan".
json num(double x);

json to_json(const TcbbReport& r);
json to_json(const CausalCoupling& c);
json to_json(const CurvatureReport& r);
json to_json(const GhBracket& g);
json to_json(const EllConvergenceReport& r);
json to_json(const std::vector<MeasuredEntry>& m);
json to_json(const PrecompactReport& r);
json to_json(const TangentReport& r);
json to_json(const CurvatureReductionReport& r);
json to_json(const GridGeodesic& g);

class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& p, const std::vector<std::string>& header);
  CsvWriter& row(const std::vector<double>& values);

private:
  std::ofstream out_;
};

}  // namespace lorcone::io
