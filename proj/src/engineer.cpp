#include "unicrop/engineer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include "unicrop/core/csv.hpp"
#include "unicrop/core/error.hpp"
#include "unicrop/core/stats.hpp"

namespace unicrop::engineer {

namespace {

constexpr double kGddBase = 10.0;
constexpr double kChillThreshold = 15.0;

struct FieldRows {
    const schema::FieldRecord* record = nullptr;
    // master-table row index per window day; npos where the field has no row
    std::vector<size_t> day_rows;
};

constexpr size_t kNoRow = static_cast<size_t>(-1);

// Aligns each field's master rows onto its calendar window so per-day series
// line up and coverage is measured against the true window length.
std::map<std::string, FieldRows> window_alignment(const harmonize::MasterTable& table,
                                                  const std::vector<schema::FieldRecord>& fields) {
    std::map<std::string, FieldRows> alignment;
    for (const auto& field : fields) {
        FieldRows rows;
        rows.record = &field;
        rows.day_rows.assign(static_cast<size_t>(window_days(field.window_start, field.window_end)),
                             kNoRow);
        alignment.emplace(field.field_id, std::move(rows));
    }
    for (size_t row = 0; row < table.row_count(); ++row) {
        const auto it = alignment.find(table.keys[row].field_id);
        if (it == alignment.end()) continue;
        const auto& field = *it->second.record;
        const long offset = table.keys[row].date.serial() - field.window_start.serial();
        if (offset < 0 || offset >= static_cast<long>(it->second.day_rows.size())) continue;
        it->second.day_rows[static_cast<size_t>(offset)] = row;
    }
    return alignment;
}

std::vector<Cell> extract_series(const harmonize::MasterTable& table,
                                 const FieldRows& field_rows, size_t column) {
    std::vector<Cell> series;
    series.reserve(field_rows.day_rows.size());
    for (size_t row : field_rows.day_rows) {
        series.push_back(row == kNoRow ? Cell{} : table.cells[column][row]);
    }
    return series;
}

Cell window_mean(const std::vector<Cell>& series) {
    const auto values = stats::non_missing(series);
    if (values.empty()) return {};
    return stats::mean(values);
}

struct PendingColumn {
    harmonize::ColumnTag tag;
    std::map<std::string, Cell> per_field;
};

harmonize::ColumnTag engineered_tag(const std::string& name, Family family,
                                    const std::string& units, bool diagnostic = false) {
    harmonize::ColumnTag tag;
    tag.name = name;
    tag.source_key = name;
    tag.family = family;
    tag.source_dataset = "engineered";
    tag.platform = "engineered";
    tag.units = units;
    tag.derivation = "ENGINEERED";
    tag.diagnostic = diagnostic;
    return tag;
}

} // namespace

WindowStat compute_gdd(const std::vector<Cell>& tmax, const std::vector<Cell>& tmin) {
    if (tmax.size() != tmin.size()) {
        throw Error(Errc::misaligned_dates, "tmax/tmin series lengths differ");
    }
    if (tmax.empty()) throw Error(Errc::empty_window, "no days in growing window");
    double sum = 0.0;
    size_t valid = 0;
    for (size_t i = 0; i < tmax.size(); ++i) {
        if (!tmax[i].has_value() || !tmin[i].has_value()) continue;
        sum += std::max(0.0, (*tmax[i] + *tmin[i]) / 2.0 - kGddBase);
        ++valid;
    }
    WindowStat stat;
    stat.coverage = static_cast<double>(valid) / static_cast<double>(tmax.size());
    if (valid > 0) stat.value = sum;
    return stat;
}

long count_chill_nights(const std::vector<Cell>& tmin) {
    long count = 0;
    for (const Cell& value : tmin) {
        if (value.has_value() && *value < kChillThreshold) ++count;
    }
    return count;
}

Cell seasonal_amplitude(const std::vector<Cell>& index) {
    const auto values = stats::non_missing(index);
    if (values.size() < 2) return {};
    const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
    return *max_it - *min_it;
}

Cell sar_texture(const std::vector<Cell>& backscatter) {
    const auto values = stats::non_missing(backscatter);
    if (values.size() < 2) return {};
    return stats::sample_std(values);
}

InteractionTerms interaction_terms(Cell clay, Cell radiation, Cell elevation, Cell temperature) {
    InteractionTerms terms;
    if (clay.has_value() && radiation.has_value()) {
        terms.clay_x_radiation = *clay * *radiation;
    }
    if (elevation.has_value() && temperature.has_value()) {
        terms.elevation_x_temperature = *elevation * *temperature;
    }
    return terms;
}

EngineerReport append_engineered_columns(harmonize::MasterTable& table,
                                         const std::vector<schema::FieldRecord>& fields,
                                         const EngineerOptions& options) {
    EngineerReport report;
    const auto alignment = window_alignment(table, fields);

    const auto col_tmax = table.column_index(options.tmax_column);
    const auto col_tmin = table.column_index(options.tmin_column);
    const auto col_ndvi = table.column_index(options.ndvi_column);
    const auto col_evi = table.column_index(options.evi_column);
    const auto col_vv = table.column_index(options.vv_column);
    const auto col_vh = table.column_index(options.vh_column);
    const auto col_clay = table.column_index(options.clay_column);
    const auto col_radiation = table.column_index(options.radiation_column);
    const auto col_elevation = table.column_index(options.elevation_column);
    const auto col_temperature = options.temperature_column.empty()
                                     ? std::nullopt
                                     : table.column_index(options.temperature_column);

    std::vector<PendingColumn> pending;
    auto begin_column = [&](const std::string& name, Family family, const std::string& units,
                            bool diagnostic = false) -> PendingColumn& {
        pending.push_back({engineered_tag(name, family, units, diagnostic), {}});
        return pending.back();
    };

    const bool have_thermal = col_tmax.has_value() && col_tmin.has_value();
    if (have_thermal) {
        auto& gdd = begin_column("gdd_base10", Family::meteorology, "degC_day");
        auto& gdd_cov = begin_column("gdd_base10_coverage", Family::meteorology, "fraction", true);
        auto& chill = begin_column("chill_nights", Family::meteorology, "days");
        for (const auto& [field_id, rows] : alignment) {
            const auto tmax = extract_series(table, rows, *col_tmax);
            const auto tmin = extract_series(table, rows, *col_tmin);
            if (tmax.empty()) continue;
            const WindowStat stat = compute_gdd(tmax, tmin);
            gdd.per_field[field_id] = stat.value;
            gdd_cov.per_field[field_id] = stat.coverage;
            chill.per_field[field_id] = static_cast<double>(count_chill_nights(tmin));
        }
    } else {
        report.skipped.push_back("gdd_base10/chill_nights (no " + options.tmax_column + "/" +
                                 options.tmin_column + " columns)");
    }

    auto amplitude_column = [&](const std::optional<size_t>& column, const std::string& input,
                                const std::string& name) {
        if (!column.has_value()) {
            report.skipped.push_back(name + " (no " + input + " column)");
            return;
        }
        auto& amp = begin_column(name, Family::vegetation, "unitless");
        for (const auto& [field_id, rows] : alignment) {
            amp.per_field[field_id] = seasonal_amplitude(extract_series(table, rows, *column));
        }
    };
    amplitude_column(col_ndvi, options.ndvi_column, "ndvi_amplitude");
    amplitude_column(col_evi, options.evi_column, "evi_amplitude");

    auto texture_column = [&](const std::optional<size_t>& column, const std::string& input,
                              const std::string& name) {
        if (!column.has_value()) {
            report.skipped.push_back(name + " (no " + input + " column)");
            return;
        }
        auto& texture = begin_column(name, Family::sar, "dB");
        for (const auto& [field_id, rows] : alignment) {
            texture.per_field[field_id] = sar_texture(extract_series(table, rows, *column));
        }
    };
    texture_column(col_vv, options.vv_column, "sar_texture_vv");
    texture_column(col_vh, options.vh_column, "sar_texture_vh");

    const bool have_clay_radiation = col_clay.has_value() && col_radiation.has_value();
    const bool have_elevation_temp =
        col_elevation.has_value() && (col_temperature.has_value() || have_thermal);
    if (have_clay_radiation || have_elevation_temp) {
        PendingColumn* clay_rad =
            have_clay_radiation ? &begin_column("clay_x_radiation", Family::soil, "product")
                                : nullptr;
        PendingColumn* elev_temp =
            have_elevation_temp
                ? &begin_column("elevation_x_temperature", Family::topography, "product")
                : nullptr;
        for (const auto& [field_id, rows] : alignment) {
            Cell clay, radiation, elevation, temperature;
            if (col_clay) clay = window_mean(extract_series(table, rows, *col_clay));
            if (col_radiation) radiation = window_mean(extract_series(table, rows, *col_radiation));
            if (col_elevation) elevation = window_mean(extract_series(table, rows, *col_elevation));
            if (col_temperature) {
                temperature = window_mean(extract_series(table, rows, *col_temperature));
            } else if (have_thermal) {
                const auto tmax = extract_series(table, rows, *col_tmax);
                const auto tmin = extract_series(table, rows, *col_tmin);
                std::vector<Cell> midpoints(tmax.size());
                for (size_t i = 0; i < tmax.size(); ++i) {
                    if (tmax[i].has_value() && tmin[i].has_value()) {
                        midpoints[i] = (*tmax[i] + *tmin[i]) / 2.0;
                    }
                }
                temperature = window_mean(midpoints);
            }
            const InteractionTerms terms =
                interaction_terms(clay, radiation, elevation, temperature);
            if (clay_rad) clay_rad->per_field[field_id] = terms.clay_x_radiation;
            if (elev_temp) elev_temp->per_field[field_id] = terms.elevation_x_temperature;
        }
    }
    if (!have_clay_radiation) {
        report.skipped.push_back("clay_x_radiation (missing input columns)");
    }
    if (!have_elevation_temp) {
        report.skipped.push_back("elevation_x_temperature (missing input columns)");
    }

    for (auto& column : pending) {
        std::vector<Cell> values(table.row_count());
        for (size_t row = 0; row < table.row_count(); ++row) {
            const auto it = column.per_field.find(table.keys[row].field_id);
            if (it != column.per_field.end()) values[row] = it->second;
        }
        report.added.push_back(column.tag.name);
        table.add_column(std::move(column.tag), std::move(values));
    }
    return report;
}

std::optional<size_t> FieldMatrix::column_index(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == name) return i;
    }
    return std::nullopt;
}

FieldMatrix build_field_matrix(const harmonize::MasterTable& table) {
    std::map<std::string, std::vector<size_t>> rows_by_field;
    for (size_t row = 0; row < table.row_count(); ++row) {
        rows_by_field[table.keys[row].field_id].push_back(row);
    }

    FieldMatrix matrix;
    for (const auto& [field_id, rows] : rows_by_field) {
        matrix.field_ids.push_back(field_id);
        matrix.district.push_back(table.district[rows.front()]);
        matrix.season.push_back(table.season[rows.front()]);
        matrix.yield_kg_ha.push_back(table.yield_kg_ha[rows.front()]);
    }

    // Columns are kept name-sorted so a matrix rebuilt from its CSV artifact
    // is indistinguishable from the freshly computed one.
    std::vector<size_t> column_order(table.columns.size());
    for (size_t i = 0; i < column_order.size(); ++i) column_order[i] = i;
    std::sort(column_order.begin(), column_order.end(), [&](size_t a, size_t b) {
        return table.columns[a].name < table.columns[b].name;
    });

    for (size_t c : column_order) {
        FieldMatrix::Column column;
        column.name = table.columns[c].name;
        column.family = table.columns[c].family;
        column.derivation = table.columns[c].derivation;
        column.candidate = !table.columns[c].diagnostic;
        column.values.reserve(rows_by_field.size());
        for (const auto& [field_id, rows] : rows_by_field) {
            std::vector<double> values;
            for (size_t row : rows) {
                if (table.cells[c][row].has_value()) values.push_back(*table.cells[c][row]);
            }
            column.values.push_back(values.empty() ? Cell{} : Cell(round6(stats::mean(values))));
        }
        matrix.columns.push_back(std::move(column));
    }
    return matrix;
}

std::string field_matrix_to_csv(const FieldMatrix& matrix) {
    std::ostringstream out;
    std::vector<std::string> header = {"field_id", "district", "season", "yield_kg_ha"};
    std::vector<size_t> order(matrix.columns.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return matrix.columns[a].name < matrix.columns[b].name;
    });
    for (size_t c : order) header.push_back(matrix.columns[c].name);
    csv::write_row(out, header);
    for (size_t row = 0; row < matrix.row_count(); ++row) {
        std::vector<std::string> cells = {matrix.field_ids[row], matrix.district[row],
                                          matrix.season[row],
                                          format_cell(matrix.yield_kg_ha[row])};
        for (size_t c : order) cells.push_back(format_cell(matrix.columns[c].values[row]));
        csv::write_row(out, cells);
    }
    return out.str();
}

FieldMatrix field_matrix_from_csv(const std::string& text,
                                  const harmonize::ColumnManifest& manifest) {
    const csv::File file = csv::File::from_string(text);
    const size_t col_field = file.required_column("field_id");
    const size_t col_district = file.required_column("district");
    const size_t col_season = file.required_column("season");
    const size_t col_yield = file.required_column("yield_kg_ha");

    std::unordered_map<std::string, const harmonize::ManifestEntry*> manifest_by_name;
    for (const auto& entry : manifest) manifest_by_name.emplace(entry.name, &entry);

    FieldMatrix matrix;
    std::vector<size_t> file_columns;
    for (size_t i = 0; i < file.header().size(); ++i) {
        if (i == col_field || i == col_district || i == col_season || i == col_yield) continue;
        const std::string& name = file.header()[i];
        const auto it = manifest_by_name.find(name);
        if (it == manifest_by_name.end()) {
            throw Error(Errc::spec_missing_for_column,
                        "field matrix column '" + name + "' missing from manifest");
        }
        FieldMatrix::Column column;
        column.name = name;
        column.family = it->second->family;
        column.derivation = it->second->derivation;
        column.candidate = !(name.size() > 9 && name.rfind("_coverage") == name.size() - 9);
        matrix.columns.push_back(std::move(column));
        file_columns.push_back(i);
    }

    for (const auto& row : file.rows()) {
        matrix.field_ids.push_back(csv::File::cell(row, col_field));
        matrix.district.push_back(csv::File::cell(row, col_district));
        matrix.season.push_back(csv::File::cell(row, col_season));
        const auto yield_cell = parse_cell(csv::File::cell(row, col_yield));
        if (!yield_cell.ok) throw Error(Errc::parse_payload, "bad yield cell in field matrix");
        matrix.yield_kg_ha.push_back(yield_cell.value);
        for (size_t c = 0; c < matrix.columns.size(); ++c) {
            const auto cell = parse_cell(csv::File::cell(row, file_columns[c]));
            if (!cell.ok) {
                throw Error(Errc::parse_payload,
                            "bad cell in field matrix column '" + matrix.columns[c].name + "'");
            }
            matrix.columns[c].values.push_back(cell.value);
        }
    }
    return matrix;
}

} // namespace unicrop::engineer
