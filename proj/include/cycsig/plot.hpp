#pragma once

#include <string>

#include "cycsig/experiments.hpp"

namespace cycsig::plot {

// Stacked bars, one per length, bottom to top rank 0..max then failures.
std::string rank_svg(const experiments::RankTable& t, const std::string& title = "");
// One polyline per subspace key, legend keyed by the key string.
std::string curves_svg(const experiments::FrequencyCurves& c, const std::string& title = "");

}  // namespace cycsig::plot
