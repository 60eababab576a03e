#include "unicrop/harmonize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "unicrop/core/csv.hpp"
#include "unicrop/core/error.hpp"

namespace unicrop::harmonize {

namespace {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

size_t non_missing_in_row(const MasterTable& table, size_t row) {
    size_t count = 0;
    for (const auto& column : table.cells) {
        if (column[row].has_value()) ++count;
    }
    return count;
}

struct KeyLess {
    bool operator()(const MasterTable::Key& a, const MasterTable::Key& b) const {
        if (a.field_id != b.field_id) return a.field_id < b.field_id;
        if (a.lat != b.lat) return a.lat < b.lat;
        if (a.lon != b.lon) return a.lon < b.lon;
        return a.date < b.date;
    }
};

} // namespace

std::optional<size_t> MasterTable::column_index(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].name == name) return i;
    }
    return std::nullopt;
}

void MasterTable::add_column(ColumnTag tag, std::vector<Cell> values) {
    if (values.size() != row_count()) {
        throw Error(Errc::length_mismatch, "column '" + tag.name + "' has " +
                                               std::to_string(values.size()) + " cells for " +
                                               std::to_string(row_count()) + " rows");
    }
    if (column_index(tag.name).has_value()) {
        throw Error(Errc::column_name_collision, "column '" + tag.name + "' already exists");
    }
    for (auto& cell : values) {
        if (cell.has_value()) {
            if (!std::isfinite(*cell)) cell.reset();
            else cell = round6(*cell);
        }
    }
    columns.push_back(std::move(tag));
    cells.push_back(std::move(values));
}

std::string canonical_column_name(const std::string& key_variable, Family family) {
    if (family != Family::topography) return key_variable;
    const std::string lower = to_lower(key_variable);
    if (lower == "elevation" || lower == "elev" || lower == "dem" || lower == "altitude") {
        return "elevation";
    }
    if (lower == "slope" || lower == "slp") return "slope";
    if (lower == "aspect" || lower == "asp") return "aspect";
    return key_variable;
}

MasterTable merge_sources(const std::vector<acquire::FetchResult>& results,
                          const std::vector<schema::FieldRecord>& fields) {
    std::unordered_map<std::string, const schema::FieldRecord*> field_by_id;
    for (const auto& field : fields) field_by_id.emplace(field.field_id, &field);

    // Column set: one per distinct key_variable, canonicalised.
    MasterTable table;
    std::unordered_map<std::string, size_t> column_by_key; // source key -> column index
    for (const auto& result : results) {
        const auto& task = result.task;
        if (!field_by_id.count(task.field_id)) {
            throw Error(Errc::unknown_field_id,
                        "result references unknown field '" + task.field_id + "'");
        }
        if (column_by_key.count(task.key_variable)) continue;
        ColumnTag tag;
        tag.source_key = task.key_variable;
        tag.name = canonical_column_name(task.key_variable, task.family);
        tag.family = task.family;
        tag.source_dataset = task.source_dataset;
        tag.platform = task.platform;
        if (result.status == acquire::FetchStatus::ok) tag.units = result.units;
        tag.derivation = schema::derivation_name(task.derivation);
        for (const auto& existing : table.columns) {
            if (existing.name == tag.name) {
                throw Error(Errc::column_name_collision,
                            "specs '" + existing.source_key + "' and '" + tag.source_key +
                                "' both map to column '" + tag.name + "'");
            }
        }
        column_by_key.emplace(task.key_variable, table.columns.size());
        table.columns.push_back(std::move(tag));
    }
    // A column created from a FAILED result inherits units from any healthy
    // sibling result of the same variable.
    for (const auto& result : results) {
        if (result.status != acquire::FetchStatus::ok) continue;
        ColumnTag& tag = table.columns[column_by_key.at(result.task.key_variable)];
        if (tag.units.empty()) tag.units = result.units;
    }

    // Row set: (field, date) pairs in field-then-date order.
    std::map<std::pair<std::string, Date>, size_t> row_index;
    for (const auto& result : results) {
        for (const auto& point : result.values) {
            row_index.emplace(std::make_pair(result.task.field_id, point.date), 0);
        }
    }
    {
        size_t next = 0;
        for (auto& [key, index] : row_index) index = next++;
    }

    const size_t rows = row_index.size();
    table.keys.resize(rows);
    table.district.resize(rows);
    table.season.resize(rows);
    table.yield_kg_ha.resize(rows);
    table.cells.assign(table.columns.size(), std::vector<Cell>(rows));

    for (const auto& [key, index] : row_index) {
        const schema::FieldRecord& field = *field_by_id.at(key.first);
        table.keys[index] = MasterTable::Key{field.field_id, field.lat, field.lon, key.second};
        table.district[index] = field.district;
        table.season[index] = field.season;
        table.yield_kg_ha[index] =
            field.yield_kg_ha.has_value() ? Cell(round6(*field.yield_kg_ha)) : Cell{};
    }

    for (const auto& result : results) {
        const size_t column = column_by_key.at(result.task.key_variable);
        for (const auto& point : result.values) {
            if (!point.value.has_value()) continue;
            if (!std::isfinite(*point.value)) continue;
            const size_t row = row_index.at({result.task.field_id, point.date});
            table.cells[column][row] = round6(*point.value);
        }
    }
    return table;
}

MasterTable dedup_rows(MasterTable table, std::vector<std::string>* audit) {
    std::map<std::tuple<double, double, Date>, std::vector<size_t>> groups;
    for (size_t row = 0; row < table.row_count(); ++row) {
        const auto& key = table.keys[row];
        groups[{key.lat, key.lon, key.date}].push_back(row);
    }

    std::vector<bool> keep(table.row_count(), true);
    bool any_dropped = false;
    for (const auto& [key, rows] : groups) {
        if (rows.size() < 2) continue;
        size_t best = rows.front();
        size_t best_count = non_missing_in_row(table, best);
        for (size_t i = 1; i < rows.size(); ++i) {
            const size_t count = non_missing_in_row(table, rows[i]);
            if (count > best_count) {
                best = rows[i];
                best_count = count;
            }
        }
        for (size_t row : rows) {
            if (row == best) continue;
            keep[row] = false;
            any_dropped = true;
            if (audit) {
                audit->push_back("dedup: dropped row (" + table.keys[row].field_id + ", " +
                                 table.keys[row].date.to_iso() + ") with " +
                                 std::to_string(non_missing_in_row(table, row)) +
                                 " non-missing cells; kept row of " + table.keys[best].field_id +
                                 " with " + std::to_string(best_count));
            }
        }
    }
    if (!any_dropped) return table;

    MasterTable out;
    out.columns = table.columns;
    out.cells.assign(table.columns.size(), {});
    for (size_t row = 0; row < table.row_count(); ++row) {
        if (!keep[row]) continue;
        out.keys.push_back(table.keys[row]);
        out.district.push_back(table.district[row]);
        out.season.push_back(table.season[row]);
        out.yield_kg_ha.push_back(table.yield_kg_ha[row]);
        for (size_t column = 0; column < table.cells.size(); ++column) {
            out.cells[column].push_back(table.cells[column][row]);
        }
    }
    return out;
}

ColumnManifest emit_manifest(const MasterTable& table,
                             const std::vector<schema::FeatureSpec>& specs) {
    std::unordered_map<std::string, const schema::FeatureSpec*> spec_by_key;
    for (const auto& spec : specs) spec_by_key.emplace(spec.key_variable, &spec);

    ColumnManifest manifest;
    manifest.reserve(table.columns.size());
    for (size_t i = 0; i < table.columns.size(); ++i) {
        const ColumnTag& tag = table.columns[i];
        if (tag.derivation != "ENGINEERED" && !spec_by_key.count(tag.source_key)) {
            throw Error(Errc::spec_missing_for_column,
                        "column '" + tag.name + "' has no mapping spec and is not engineered");
        }
        ManifestEntry entry;
        entry.name = tag.name;
        entry.family = tag.family;
        entry.source_dataset = tag.source_dataset;
        entry.platform = tag.platform;
        entry.units = tag.units;
        entry.derivation = tag.derivation;
        entry.non_missing = 0;
        for (const Cell& cell : table.cells[i]) {
            if (cell.has_value()) ++entry.non_missing;
        }
        manifest.push_back(std::move(entry));
    }
    return manifest;
}

std::string master_table_to_csv(const MasterTable& table) {
    std::vector<size_t> column_order(table.columns.size());
    std::iota(column_order.begin(), column_order.end(), size_t{0});
    std::sort(column_order.begin(), column_order.end(), [&](size_t a, size_t b) {
        return table.columns[a].name < table.columns[b].name;
    });

    std::vector<size_t> row_order(table.row_count());
    std::iota(row_order.begin(), row_order.end(), size_t{0});
    std::sort(row_order.begin(), row_order.end(), [&](size_t a, size_t b) {
        return KeyLess{}(table.keys[a], table.keys[b]);
    });

    std::ostringstream out;
    std::vector<std::string> header = {"field_id", "lat", "lon", "date",
                                       "district", "season", "yield_kg_ha"};
    for (size_t column : column_order) header.push_back(table.columns[column].name);
    csv::write_row(out, header);

    for (size_t row : row_order) {
        std::vector<std::string> cells = {
            table.keys[row].field_id,
            format_value(table.keys[row].lat),
            format_value(table.keys[row].lon),
            table.keys[row].date.to_iso(),
            table.district[row],
            table.season[row],
            format_cell(table.yield_kg_ha[row]),
        };
        for (size_t column : column_order) cells.push_back(format_cell(table.cells[column][row]));
        csv::write_row(out, cells);
    }
    return out.str();
}

MasterTable master_table_from_csv(const std::string& table_text, const ColumnManifest& manifest) {
    const csv::File file = csv::File::from_string(table_text);
    const size_t col_field = file.required_column("field_id");
    const size_t col_lat = file.required_column("lat");
    const size_t col_lon = file.required_column("lon");
    const size_t col_date = file.required_column("date");
    const size_t col_district = file.required_column("district");
    const size_t col_season = file.required_column("season");
    const size_t col_yield = file.required_column("yield_kg_ha");

    std::unordered_map<std::string, const ManifestEntry*> manifest_by_name;
    for (const auto& entry : manifest) manifest_by_name.emplace(entry.name, &entry);

    MasterTable table;
    std::vector<size_t> file_columns;
    for (size_t i = 0; i < file.header().size(); ++i) {
        const std::string& name = file.header()[i];
        if (i == col_field || i == col_lat || i == col_lon || i == col_date ||
            i == col_district || i == col_season || i == col_yield) {
            continue;
        }
        const auto it = manifest_by_name.find(name);
        if (it == manifest_by_name.end()) {
            throw Error(Errc::spec_missing_for_column,
                        "table column '" + name + "' missing from the manifest");
        }
        ColumnTag tag;
        tag.name = name;
        tag.source_key = name;
        tag.family = it->second->family;
        tag.source_dataset = it->second->source_dataset;
        tag.platform = it->second->platform;
        tag.units = it->second->units;
        tag.derivation = it->second->derivation;
        tag.diagnostic = name.size() > 9 && name.rfind("_coverage") == name.size() - 9;
        table.columns.push_back(std::move(tag));
        file_columns.push_back(i);
    }
    table.cells.assign(table.columns.size(), {});

    for (const auto& row : file.rows()) {
        MasterTable::Key key;
        key.field_id = csv::File::cell(row, col_field);
        const auto lat = parse_double(csv::File::cell(row, col_lat));
        const auto lon = parse_double(csv::File::cell(row, col_lon));
        const auto date = Date::parse(csv::File::cell(row, col_date));
        if (!lat || !lon || !date) {
            throw Error(Errc::parse_payload, "bad key cells in master table row");
        }
        key.lat = *lat;
        key.lon = *lon;
        key.date = *date;
        table.keys.push_back(std::move(key));
        table.district.push_back(csv::File::cell(row, col_district));
        table.season.push_back(csv::File::cell(row, col_season));
        const auto yield_cell = parse_cell(csv::File::cell(row, col_yield));
        if (!yield_cell.ok) throw Error(Errc::parse_payload, "bad yield cell in master table");
        table.yield_kg_ha.push_back(yield_cell.value);

        for (size_t c = 0; c < table.columns.size(); ++c) {
            const auto cell = parse_cell(csv::File::cell(row, file_columns[c]));
            if (!cell.ok) {
                throw Error(Errc::parse_payload,
                            "bad cell in column '" + table.columns[c].name + "'");
            }
            table.cells[c].push_back(cell.value);
        }
    }
    return table;
}

std::string manifest_to_csv(const ColumnManifest& manifest) {
    std::ostringstream out;
    csv::write_row(out, {"name", "family", "source_dataset", "platform", "units",
                         "derivation", "non_missing"});
    for (const auto& entry : manifest) {
        csv::write_row(out, {entry.name, family_name(entry.family), entry.source_dataset,
                             entry.platform, entry.units, entry.derivation,
                             std::to_string(entry.non_missing)});
    }
    return out.str();
}

ColumnManifest manifest_from_csv(const std::string& text) {
    const csv::File file = csv::File::from_string(text);
    const size_t col_name = file.required_column("name");
    const size_t col_family = file.required_column("family");
    const size_t col_source = file.required_column("source_dataset");
    const size_t col_platform = file.required_column("platform");
    const size_t col_units = file.required_column("units");
    const size_t col_derivation = file.required_column("derivation");
    const size_t col_count = file.required_column("non_missing");

    ColumnManifest manifest;
    for (const auto& row : file.rows()) {
        ManifestEntry entry;
        entry.name = csv::File::cell(row, col_name);
        const auto family = family_from_name(csv::File::cell(row, col_family));
        if (!family) throw Error(Errc::unknown_family, "bad family in manifest");
        entry.family = *family;
        entry.source_dataset = csv::File::cell(row, col_source);
        entry.platform = csv::File::cell(row, col_platform);
        entry.units = csv::File::cell(row, col_units);
        entry.derivation = csv::File::cell(row, col_derivation);
        const auto count = parse_long(csv::File::cell(row, col_count));
        if (!count || *count < 0) throw Error(Errc::parse_payload, "bad count in manifest");
        entry.non_missing = static_cast<size_t>(*count);
        manifest.push_back(std::move(entry));
    }
    return manifest;
}

} // namespace unicrop::harmonize
