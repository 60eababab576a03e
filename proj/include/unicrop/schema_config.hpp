#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "unicrop/core/date.hpp"
#include "unicrop/core/family.hpp"
#include "unicrop/core/numeric.hpp"

namespace unicrop::schema {

// Derivation rule tags. Only the enumerated rules exist; there is no
// expression language. CUSTOM carries an opaque expression id that the
// pipeline records but never evaluates.
enum class Derivation {
    none,
    evi,
    irrigation,
    custom,
};

const char* derivation_name(Derivation derivation);

// One declarative row of the feature mapping.
struct FeatureSpec {
    std::string key_variable;
    std::string api_parameter;
    std::string source_dataset;
    std::string platform;
    std::string notes;
    Derivation derivation = Derivation::none;
    std::string custom_id; // set when derivation == custom
    Family family = Family::meteorology;
};

// One seed observation from the input field table.
struct FieldRecord {
    std::string field_id;
    double lat = 0.0;
    double lon = 0.0;
    Date window_start;
    Date window_end;
    Cell yield_kg_ha;
    std::string district;
    std::string season;
};

// One concrete retrieval operation of the fetch plan. Derivation and family
// ride along so downstream stages can route and tag results without a
// second join against the mapping.
struct FetchTask {
    std::string field_id;
    std::string key_variable;
    std::string source_dataset;
    std::string platform;
    std::string api_parameter;
    Derivation derivation = Derivation::none;
    Family family = Family::meteorology;
    Date window_start;
    Date window_end;
    double lat = 0.0;
    double lon = 0.0;
};

enum class DropReason {
    invalid_coordinate,
    invalid_date,
    invalid_window,
    invalid_yield,
    duplicate_field_id,
    missing_field_id,
};

const char* drop_reason_name(DropReason reason);

struct FieldParseReport {
    std::vector<FieldRecord> records;
    std::map<DropReason, size_t> dropped;
    std::vector<std::string> warnings;
};

// Parses the feature mapping CSV. Derivation is inferred from the notes
// column ("EVI =" -> EVI, "Irrigation = max" -> IRRIGATION); family comes
// from an explicit family column or from the source-dataset table.
std::vector<FeatureSpec> parse_feature_mapping(const std::filesystem::path& path);
std::vector<FeatureSpec> parse_feature_mapping_text(const std::string& text);

// Cleans the field table: rows with invalid coordinates, unparseable dates,
// inverted windows, bad yields or duplicate ids are dropped and counted.
// Coordinates are rounded to 1e-6 degrees (the table precision policy).
FieldParseReport parse_fields(const std::filesystem::path& path);
FieldParseReport parse_fields_text(const std::string& text);

// Cartesian product fields x specs, deduplicated, sorted by
// (field_id, key_variable).
std::vector<FetchTask> build_fetch_plan(const std::vector<FieldRecord>& fields,
                                        const std::vector<FeatureSpec>& specs);

std::string fetch_plan_to_csv(const std::vector<FetchTask>& plan);
void write_fetch_plan(const std::filesystem::path& path, const std::vector<FetchTask>& plan);

std::string feature_mapping_to_csv(const std::vector<FeatureSpec>& specs);

} // namespace unicrop::schema
