#ifndef APFSIM_APP_HPP
#define APFSIM_APP_HPP

#include <optional>
#include <string>

#include "apfsim/metrics.hpp"
#include "apfsim/scenario.hpp"

namespace apfsim::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

struct CommonOptions {
    std::string config_path;  // empty = built-in default scenario
    std::string out_dir = ".";
    bool plots = false;
    bool dump_config = false;
    std::optional<std::uint64_t> seed;
};

/// Load + validate the scenario, applying the seed override when present.
ScenarioConfig resolve_config(const CommonOptions& opt);

/// Evaluation intervals derived from the scenario: steady-state metrics
/// start at settling_time and exclude the disturbance window plus the
/// control pipeline's ring-down (one window + hop).
metrics::EvalWindows eval_windows(const ScenarioConfig& cfg);

int cmd_simulate(const CommonOptions& opt);
int cmd_compare(const CommonOptions& opt);
int cmd_emd(const std::string& input_csv, double sample_rate, const std::string& out_csv);

}  // namespace apfsim::app

#endif
