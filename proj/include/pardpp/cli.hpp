#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pardpp/dpp_model.hpp"
#include "pardpp/planar.hpp"

namespace pardpp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

std::uint64_t fnv1a(std::string_view bytes);

// Hex digest of the model's matrix bits and constraint.
std::string model_digest(const DppModel& model);
std::string graph_digest(const PlanarGraph& graph);

// Runs the command line `args` (without the program name). Records and
// reports go to `out` unless redirected with --out; diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pardpp
