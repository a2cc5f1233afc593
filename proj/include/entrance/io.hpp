#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "entrance/boundary.hpp"
#include "entrance/coupling.hpp"
#include "entrance/diagnostics.hpp"
#include "entrance/errors.hpp"
#include "entrance/model.hpp"
#include "entrance/passage.hpp"
#include "entrance/simulate.hpp"

namespace entrance::io {

using Json = nlohmann::ordered_json;

/// Config that does not match the documented schema. `field` is a dotted
/// path ("spec.gamma0.slope"); `line` is 0 when unknown.
class SchemaError : public SpecError {
public:
    SchemaError(const std::string& field, const std::string& message, int line = 0);
    const std::string& field() const noexcept { return field_; }
    int line() const noexcept { return line_; }

private:
    std::string field_;
    int line_;
};

/// Parses JSON text; syntax errors become SchemaError with the line number.
Json parse_json(std::string_view text, const std::string& source = "config");
Json read_json_file(const std::filesystem::path& path);

RateFunction rate_from_json(const Json& j, const std::string& path);
LevyMeasure measure_from_json(const Json& j, const std::string& path);
ProcessSpec spec_from_json(const Json& j, const std::string& path = "spec");
/// Fields absent from j keep their value in `base`.
SimConfig sim_from_json(const Json& j, SimConfig base = {}, const std::string& path = "sim");

Json to_json(const RateFunction& f);
Json to_json(const LevyMeasure& nu);
Json to_json(const ProcessSpec& spec);
Json to_json(const SimConfig& config);
Json to_json(const ValidationReport& report);
Json to_json(const BoundaryReport& report);
Json to_json(const EnsembleSummary& summary);
Json to_json(const PassageEstimate& estimate);  // without per-path samples
Json to_json(const ExpMoment& moment);
Json to_json(const MarkovDecomposition& check);
Json to_json(const TailFit& fit);
Json to_json(const GronwallResult& result);
Json to_json(const EntranceProfile& profile);
Json to_json(const SemigroupCauchy& table);
Json to_json(const MomentConvergence& result);
Json to_json(const FddConvergence& result);

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite.
std::string format_double(double v);

/// Real as JSON: null when not finite.
Json real(double v);

/// RFC 4180 writer: fields containing a comma, quote or line break are
/// quoted with doubled quotes; lines end in CRLF.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}
    CsvWriter& field(std::string_view text);
    CsvWriter& field(double v) { return field(format_double(v)); }
    CsvWriter& field(std::uint64_t v) { return field(std::to_string(v)); }
    void end_row();
    void row(const std::vector<std::string>& fields);

private:
    std::ostream& out_;
    bool first_ = true;
};

/// Whitespace separated columns for gnuplot; '#' header line.
void write_plot_data(const std::filesystem::path& path, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);

/// Reads keys of an object, rejecting unknown ones on finish().
class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path);

    bool has(const std::string& key) const;
    const Json& at(const std::string& key);
    double number(const std::string& key);
    double number(const std::string& key, double fallback);
    std::uint64_t count(const std::string& key);
    std::uint64_t count(const std::string& key, std::uint64_t fallback);
    bool boolean(const std::string& key, bool fallback);
    std::string text(const std::string& key);
    std::string text(const std::string& key, const std::string& fallback);
    std::vector<double> numbers(const std::string& key);
    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
    std::string child(const std::string& key) const { return path_ + "." + key; }
    const std::string& path() const noexcept { return path_; }
    void finish() const;

private:
    const Json& j_;
    std::string path_;
    std::vector<std::string> seen_;
};

}  // namespace entrance::io
