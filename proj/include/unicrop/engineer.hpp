#pragma once

#include <string>
#include <vector>

#include "unicrop/core/family.hpp"
#include "unicrop/core/numeric.hpp"
#include "unicrop/harmonize.hpp"

namespace unicrop::engineer {

// Window statistic plus the fraction of window days whose inputs were valid.
struct WindowStat {
    Cell value;
    double coverage = 0.0;
};

// Degree-days above base 10: sum over days of max(0, (tmax+tmin)/2 - 10).
// Days with either input missing contribute nothing and lower coverage.
// Both series must be date-aligned; an empty window throws EmptyWindow.
WindowStat compute_gdd(const std::vector<Cell>& tmax, const std::vector<Cell>& tmin);

// Days with tmin strictly below 15 degC; missing days are excluded.
long count_chill_nights(const std::vector<Cell>& tmin);

// max - min over non-missing values; fewer than two values -> missing.
Cell seasonal_amplitude(const std::vector<Cell>& index);

// Sample standard deviation (n-1) of non-missing values; fewer than two ->
// missing.
Cell sar_texture(const std::vector<Cell>& backscatter);

struct InteractionTerms {
    Cell clay_x_radiation;
    Cell elevation_x_temperature;
};

// Elementwise products of per-field scalars; any missing input propagates.
InteractionTerms interaction_terms(Cell clay, Cell radiation, Cell elevation, Cell temperature);

// Column bindings for the engineered features. A feature whose inputs are
// absent from the table is skipped for every field.
struct EngineerOptions {
    std::string tmax_column = "T2M_MAX";
    std::string tmin_column = "T2M_MIN";
    std::string ndvi_column = "NDVI";
    std::string evi_column = "EVI";
    std::string vv_column = "VV";
    std::string vh_column = "VH";
    std::string clay_column = "clay";
    std::string radiation_column = "solar_radiation";
    std::string elevation_column = "elevation";
    std::string temperature_column; // empty: daily (tmax+tmin)/2 midpoints
};

struct EngineerReport {
    std::vector<std::string> added;
    std::vector<std::string> skipped;
};

// Computes one engineered value per field over its growing window and
// appends the results (plus *_coverage diagnostics for the dynamic
// features) as new master-table columns, replicated across the field rows.
EngineerReport append_engineered_columns(harmonize::MasterTable& table,
                                         const std::vector<schema::FieldRecord>& fields,
                                         const EngineerOptions& options = {});

// Per-field analysis matrix: every non-diagnostic master column reduced to
// its window mean (engineered columns are constant per field), field
// context carried through. Rows are sorted by field_id.
struct FieldMatrix {
    struct Column {
        std::string name;
        Family family = Family::meteorology;
        std::string derivation;
        bool candidate = true;
        std::vector<Cell> values;
    };

    std::vector<std::string> field_ids;
    std::vector<std::string> district;
    std::vector<std::string> season;
    std::vector<Cell> yield_kg_ha;
    std::vector<Column> columns;

    size_t row_count() const { return field_ids.size(); }
    std::optional<size_t> column_index(const std::string& name) const;
};

FieldMatrix build_field_matrix(const harmonize::MasterTable& table);

std::string field_matrix_to_csv(const FieldMatrix& matrix);
FieldMatrix field_matrix_from_csv(const std::string& text,
                                  const harmonize::ColumnManifest& manifest);

} // namespace unicrop::engineer
