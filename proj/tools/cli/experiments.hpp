#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cmilab/rng.hpp"
#include "cmilab/state.hpp"
#include "output.hpp"
#include "params.hpp"

namespace cmilab::cli {

/// State shared by one experiment run. Runners add files to `artifacts`,
/// facts to `summary`, failed hard checks to `violations` and other
/// reported failures (outputs still written) to `failures`.
struct RunContext {
  std::uint64_t seed = 0;
  LogBase base = LogBase::Two;
  Rng root;  // Rng(seed).substream(experiment name)
  Artifacts artifacts;
  json summary = json::object();
  std::vector<std::string> violations;
  std::vector<std::string> failures;

  RunContext(std::uint64_t s, LogBase b, const std::string& experiment)
      : seed(s), base(b), root(Rng(s).substream(experiment)) {}

  /// Column name for an information quantity: "<stem>_bits" or "<stem>_nats".
  std::string unit(const std::string& stem) const;
  /// Converts a value in bits to the run's log base.
  double in_base(double bits) const;
  void check(bool ok, const std::string& what);
};

using Runner = void (*)(Params&, RunContext&);

const std::map<std::string, Runner>& experiments();

}  // namespace cmilab::cli
