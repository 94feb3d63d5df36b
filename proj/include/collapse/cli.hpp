#pragma once

namespace collapse::cli {

inline constexpr const char* kVersion = "1.0.0";
/// Config files must carry "version": kSchemaVersion.
inline constexpr int kSchemaVersion = 1;

inline constexpr int kExitOk = 0;
inline constexpr int kExitAssertion = 1;
inline constexpr int kExitConfig = 2;

/// Entry point of the `collapse` tool. Returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace collapse::cli
