#include "unicrop/core/csv.hpp"

#include <fstream>
#include <sstream>

#include "unicrop/core/error.hpp"

namespace unicrop::csv {

std::vector<std::vector<std::string>> parse(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false;
    bool cell_started = false;

    auto end_cell = [&] {
        row.push_back(std::move(cell));
        cell.clear();
        cell_started = false;
    };
    auto end_row = [&] {
        end_cell();
        rows.push_back(std::move(row));
        row.clear();
    };

    for (size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!cell_started) {
                quoted = true;
                cell_started = true;
            } else {
                cell.push_back(c);
            }
            break;
        case ',':
            end_cell();
            break;
        case '\r':
            break;
        case '\n':
            end_row();
            break;
        default:
            cell.push_back(c);
            cell_started = true;
            break;
        }
    }
    if (cell_started || !cell.empty() || !row.empty()) end_row();
    return rows;
}

std::string escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) out.put(',');
        out << escape(cells[i]);
    }
    out.put('\n');
}

File File::read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

File File::from_string(const std::string& text) {
    auto rows = parse(text);
    File file;
    if (rows.empty()) throw Error(Errc::missing_header, "file has no header row");
    file.header_ = std::move(rows.front());
    rows.erase(rows.begin());
    // drop fully empty trailing rows
    while (!rows.empty() && rows.back().size() == 1 && rows.back().front().empty()) {
        rows.pop_back();
    }
    file.rows_ = std::move(rows);
    return file;
}

std::optional<size_t> File::column_index(const std::string& name) const {
    for (size_t i = 0; i < header_.size(); ++i) {
        if (header_[i] == name) return i;
    }
    return std::nullopt;
}

size_t File::required_column(const std::string& name) const {
    if (auto index = column_index(name)) return *index;
    throw Error(Errc::missing_header, "required column '" + name + "' absent");
}

std::string File::cell(const std::vector<std::string>& row, size_t index) {
    return index < row.size() ? row[index] : std::string();
}

} // namespace unicrop::csv
