#ifndef COLLAPSEKIT_IO_HPP
#define COLLAPSEKIT_IO_HPP

#include <stdexcept>
#include <string>

#include "collapsekit/complex.hpp"
#include "collapsekit/system.hpp"

namespace collapsekit {

class ParseError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// {"vertices": [...], "simplices": [[...], ...]}; missing faces are added, vertices may be omitted.
json to_json(const SimplicialComplex& k);
/// {"cells": [[[lo, hi], ...], ...]}.
json to_json(const CubicalComplex& k);
SimplicialComplex simplicial_from_json(const json& j);
CubicalComplex cubical_from_json(const json& j);
/// True for the cubical format.
bool is_cubical_json(const json& j);

/// Ordered [tau, sigma] pairs plus the cell-count filtration.
json to_json(const CollapseSchedule& s);
json to_json(const CubicalCollapseSchedule& s);
CollapseSchedule schedule_from_json(const json& j);
CubicalCollapseSchedule cubical_schedule_from_json(const json& j);

/// Gallery systems carry their spec at the top level and are rebuilt from it; hand-built systems are
/// listed space by space ("box", "complex") and bond by bond ("pl1d", "schedule", "identity").
json to_json(const InverseSystem& sys);
/// Throws ParseError on malformed input; builder errors pass through.
InverseSystem system_from_json(const json& j);

/// Rounds every floating value to `digits` significant digits; non-finite values become null.
json rounded(const json& j, int digits = 12);
/// Rounded, indented dump with a trailing newline.
std::string dump(const json& j);
/// Parses a file, throwing ParseError with the path on failure.
json read_json_file(const std::string& path);

} // namespace collapsekit

#endif
