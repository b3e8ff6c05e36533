#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

namespace qs::cli {

enum ExitCode : int { ok = 0, config_error = 2, runtime_error = 3 };

struct Invocation {
  std::filesystem::path config;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const Invocation& inv);
int cmd_eval(const Invocation& inv);
int cmd_bench(const Invocation& inv);
int cmd_nyquist(const Invocation& inv);
int cmd_calibrate(const Invocation& inv);

/// Parses argv, resolves the output directory (QSAMPLER_OUT wins over --out)
/// and maps failures onto exit codes.
int run(int argc, char** argv);

}  // namespace qs::cli
