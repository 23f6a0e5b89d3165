#pragma once

/** File formats:
      - models: TOML with a [model] table (builtin name or polynomial
        monomial rows [c, px, pt, py] for z1/z2/source);
      - sections: CSV node list "x,t,u" over a rectangular lattice;
      - jump curves: JSON descriptor {"jumps": [...]}.
    All floats are printed with 17 significant digits so files round-trip
    bit-exactly.
*/

#include <string>

#include "charentropy/model.hpp"

namespace charentropy::model {

FluxModel load_model_file(const std::string& path);
FluxModel load_model_spec(const std::string& name_or_path);  // accepts builtin names too

void save_section_csv(const PiecewiseSection& s, const std::string& path);
PiecewiseSection load_section_csv(const std::string& path);

void save_jumps_json(const PiecewiseSection& s, const std::string& path);
// Attaches jumps from a JSON descriptor to an existing section.
void load_jumps_json(PiecewiseSection& s, const std::string& path);

std::string format_double(double v);  // %.17g

}  // namespace charentropy::model
