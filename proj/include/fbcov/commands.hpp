#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fbcov {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitStrict = 2 };

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> outputs;
  std::string timestamp;  // UTC, ISO 8601
};

nlohmann::json to_json(const RunManifest& m);

/// "start:stop:step" with inclusive stop, or a comma list "a,b,c".
/// A negative step or stop < start is rejected; grids must ascend.
std::vector<double> parse_grid(std::string_view spec);

/// Entry point shared by the fbcov binary and the CLI tests.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fbcov
