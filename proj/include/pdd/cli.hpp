#pragma once
// Command-line front end: table generation, samplers and verification suites.
//
//   pdd partitions     --n N
//   pdd ewens-pitman   --n N --alpha A --theta T
//   pdd death-probs    (--n N | --infinite) --theta T --t T1,T2,... [--precision-report]
//   pdd dual-transition --eta 2,1 [--omega 1] --theta T --t T1,...
//   pdd sample  --mode {pd|pd-cond|urn|split-urn|transition} --seed S ...
//   pdd density --form {mixture|spectral} --x ... --y ... --t T --trunc K
//   pdd verify  --what {duality|split-urn|representation|urn-conditional|
//                       stationarity|radon-nikodym} --seed S ...
//
// Tables are CSV and start with a "# meta: {...}" line; samples and reports are
// JSON lines and start with a {"meta": {...}} line. The metadata echoes the
// version, the subcommand and every option with its effective value, so a run
// is reproducible from its own output.

#include <iosfwd>
#include <string>
#include <vector>

namespace pdd::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int {
    kOk = 0,
    kVerificationFailed = 1,
    kUsageError = 2,
    kNumericalError = 3,
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pdd::cli
