#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include <json.hpp>

#include "qsp/regime.hpp"
#include "qsp/run.hpp"

namespace qsp {

using Json = nlohmann::ordered_json;

/// Serializes with every floating-point number at 17 significant digits;
/// non-finite values become the strings "inf", "-inf" and "nan".
std::string dump_json(const Json& j, int indent = 2);

/// Finite doubles stay numbers, the rest become strings, empty is null.
Json number(double v);
Json number(const std::optional<double>& v);

Json to_json(const Supremum& s);
Json to_json(const RegimeReport& r);
Json to_json(const DeltaTrial& t);
Json to_json(const BlowupDesign& d);
Json to_json(const CheckVerdict& c);
Json to_json(const RunSummary& s);

/// Header of series.csv.
extern const char* const kSeriesHeader;

void write_series_csv(const DiagnosticsSeries& series, std::ostream& out);
/// u-form rows: t,dt,u_max,mass_err.
void write_series_u_csv(const DiagnosticsSeries& series, std::ostream& out);

/// series.csv, summary.json, initial_f.csv and the final fields; series_u.csv
/// when the u-form ran. Creates `dir`.
void emit_outputs(const RunResult& result, const std::filesystem::path& dir);

}  // namespace qsp
