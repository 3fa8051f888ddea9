#pragma once

#include <string>

#include "json.hpp"

#include "qshadow/refinement.hpp"
#include "qshadow/shadow_solver.hpp"

namespace qshadow {

inline constexpr const char* tool_version = "0.1.0";

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);
/// "%.17g"
std::string format_coord(double x);

nlohmann::json to_json(const Vec& v);
nlohmann::json to_json(const Margin& m);
nlohmann::json to_json(const Certificate& c, bool with_margins = true);
nlohmann::json to_json(const SegmentedPseudoOrbit& po);
nlohmann::json to_json(const SolverConstants& k);
nlohmann::json to_json(const Preconditions& p);
nlohmann::json to_json(const ShadowingResult& r);
nlohmann::json to_json(const InfiniteResult& r);
nlohmann::json to_json(const RefinedSplitting& r);

/// Sorted keys, two-space indentation, trailing newline.
std::string dump(const nlohmann::json& doc);

/// segment,step,condition,lhs,rhs,margin
std::string certificate_csv(const Certificate& c);
/// j,distance,orbit_residual
std::string shadow_csv(const ShadowingResult& r);
/// j,min_norm_M,norm_N,off_diagonal
std::string refine_csv(const RefinedSplitting& r);

} // namespace qshadow
