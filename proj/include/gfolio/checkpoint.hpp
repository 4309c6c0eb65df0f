#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gfolio/optim.hpp"

namespace gfolio {

// Plain-text checkpoint: a versioned header, then named sections of
// parameters with shapes, values and Adam state. Doubles are printed with
// %.17g so reruns are byte-identical and reloads round-trip exactly.
//
//   gfolio-checkpoint v1
//   section <name> <param-count>
//   param <name> <rank> <d0> <d1> ...
//   <values...>
//   <first moments...>
//   <second moments...>
//   step <adam step count>
void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, const ParamStore*>>& sections);

// Loads into existing stores; every section, parameter name and shape must
// match the receiving model, and mismatches name the offending field.
void load_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, ParamStore*>>& sections);

}  // namespace gfolio
