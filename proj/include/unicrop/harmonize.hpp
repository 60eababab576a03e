#pragma once

#include <optional>
#include <string>
#include <vector>

#include "unicrop/acquire.hpp"
#include "unicrop/core/date.hpp"
#include "unicrop/core/family.hpp"
#include "unicrop/core/numeric.hpp"
#include "unicrop/schema_config.hpp"

namespace unicrop::harmonize {

// Provenance carried on every master-table column.
struct ColumnTag {
    std::string name;       // canonical column name
    std::string source_key; // original key_variable before suffix restoration
    Family family = Family::meteorology;
    std::string source_dataset;
    std::string platform;
    std::string units;
    std::string derivation = "NONE"; // NONE | EVI | IRRIGATION | CUSTOM | ENGINEERED
    bool diagnostic = false;         // excluded from candidate features
};

// Wide time-series table keyed by (lat, lon, date); field context rides
// along per row. Cells are finite or missing, rounded to the table
// precision policy.
struct MasterTable {
    struct Key {
        std::string field_id;
        double lat = 0.0;
        double lon = 0.0;
        Date date;
    };

    std::vector<Key> keys;
    std::vector<std::string> district;
    std::vector<std::string> season;
    std::vector<Cell> yield_kg_ha;

    std::vector<ColumnTag> columns;
    std::vector<std::vector<Cell>> cells; // [column][row]

    size_t row_count() const { return keys.size(); }
    std::optional<size_t> column_index(const std::string& name) const;
    void add_column(ColumnTag tag, std::vector<Cell> values);
};

struct ManifestEntry {
    std::string name;
    Family family = Family::meteorology;
    std::string source_dataset;
    std::string platform;
    std::string units;
    std::string derivation;
    size_t non_missing = 0;
};

using ColumnManifest = std::vector<ManifestEntry>;

// Pivots long fetch results into the wide table: ISO dates, float precision
// policy, canonical topography names (elevation/slope/aspect) restored.
MasterTable merge_sources(const std::vector<acquire::FetchResult>& results,
                          const std::vector<schema::FieldRecord>& fields);

// Enforces key-triple uniqueness: among rows sharing (lat, lon, date) the
// one with the most non-missing cells wins; ties keep the earliest source
// order. Idempotent.
MasterTable dedup_rows(MasterTable table, std::vector<std::string>* audit = nullptr);

// One manifest row per column with provenance joined from the specs.
// Non-engineered columns must trace back to a spec.
ColumnManifest emit_manifest(const MasterTable& table, const std::vector<schema::FeatureSpec>& specs);

std::string master_table_to_csv(const MasterTable& table);
MasterTable master_table_from_csv(const std::string& table_text, const ColumnManifest& manifest);

std::string manifest_to_csv(const ColumnManifest& manifest);
ColumnManifest manifest_from_csv(const std::string& text);

// Canonical rename for topography aliases; identity for everything else.
std::string canonical_column_name(const std::string& key_variable, Family family);

} // namespace unicrop::harmonize
