#pragma once

#include "config.hpp"

#include <iosfwd>

namespace lsfem::cli {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitCertificate = 2;
constexpr int kExitConfig = 3;

// Each command writes its artifacts below config.out_dir and a summary to os.
// Returns kExitCertificate when any solve misses the certificate tolerance.
int cmd_solve(const RunConfig& config, std::ostream& os);
int cmd_converge(const RunConfig& config, std::ostream& os);
int cmd_bimolecular(const RunConfig& config, std::ostream& os);
int cmd_diagnose(const RunConfig& config, std::ostream& os);
int cmd_mesh_export(const RunConfig& config, std::ostream& os);

// Parses argv and dispatches; configuration errors map to kExitConfig.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace lsfem::cli
