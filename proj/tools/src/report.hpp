#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "wntk/dynamics.hpp"
#include "wntk/weight_learning.hpp"

namespace wntk::cli {

inline constexpr const char* kSchema = "wntk.report/1";

// Report skeleton: schema tag, command name and the config echo.
json report_header(const RunConfig& cfg);

json to_json(const SweepConfig& c);
json to_json(const SlopeFit& f);
json to_json(const StabilityReport& r);
json to_json(const LazyReport& r);
json to_json(const EquivalenceReport& r);
json to_json(const WeightTrace& t);

// Pretty JSON with a trailing newline.
void write_json(const std::string& path, const json& j);
// "width,<metric>" rows for external plotting.
void write_plot_csv(const std::string& path, const std::string& metric, const std::vector<std::size_t>& widths,
                    const std::vector<double>& values);
void write_text(const std::string& path, const std::string& text);

}  // namespace wntk::cli
