#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kmtc/chain.hpp"
#include "kmtc/coupling.hpp"
#include "kmtc/diagnostics.hpp"
#include "kmtc/dyadic.hpp"
#include "kmtc/family.hpp"

namespace kmtc {

// Key order in emitted documents is fixed, so output bytes are reproducible.
using Json = nlohmann::ordered_json;

// Shortest round-trip decimal form ('.' decimal point, no locale).
std::string format_double(double v);

// RFC 4180: quote only when the cell contains a comma, quote, or newline.
std::string csv_escape(const std::string& cell);
void write_csv_row(std::ostream& os, const std::vector<std::string>& cells);

Json family_to_json(const FamilySpec1D& spec);
FamilySpec1D family_from_json(const Json& j);
Json product_to_json(const ProductFamily& fam);
// Accepts {"coords": [...]} or the shorthand {"spec": {...}, "d": n}.
ProductFamily product_from_json(const Json& j);
Json grid_policy_to_json(const GridPolicy& gp);
GridPolicy grid_policy_from_json(const Json& j);

Json probe_to_json(const ProbeReport& rep);
// Rows "probe,point,empirical,bound,margin"; header written by the caller.
void write_probe_rows(std::ostream& os, const ProbeReport& rep);
Json class_report_to_json(const ClassReport& rep);

// Path table: k, x_1..x_d, y_1..y_d, disc; k is 1-based.
void write_coupling_csv(std::ostream& os, const CouplingOutput& out);
void write_chain_csv(std::ostream& os, const ChainOutput& out);

Json decomposition_to_json(const Decomposition& dec);
// Exact dyadic fractions, e.g. "S_2 = 3/4*S[8] + 1/4*D[2,0] + 1/2*D[1,1]".
std::string decomposition_text(const Decomposition& dec);

}  // namespace kmtc
