#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace netbound::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitRefuted = 2;

struct CommandOptions {
  std::string spec_path;
  std::string out_dir;  // empty: no files written
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> horizon;
};

int cmd_analyze(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_certify(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_validate(const CommandOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace netbound::cli
