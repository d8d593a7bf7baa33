#pragma once

#include <ostream>

#include "chains/config.hpp"

namespace chains {

// Executes the requested stages in order (spectral -> toda -> nahm; missing
// dependencies are enabled automatically), writes the stage artifacts and
// report.json under cfg.output_dir.  Returns 0 on success; on stage failure
// the report carries a machine-readable error record and the exit status is
// nonzero.
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace chains
