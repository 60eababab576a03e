#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace unicrop::csv {

// RFC-4180 style parsing: comma delimited, double quotes with "" escapes,
// CRLF tolerated. Cells are returned verbatim apart from quote removal.
std::vector<std::vector<std::string>> parse(const std::string& text);

std::string escape(const std::string& cell);
void write_row(std::ostream& out, const std::vector<std::string>& cells);

// A parsed file with a mandatory header row.
class File {
  public:
    static File read(const std::filesystem::path& path);
    static File from_string(const std::string& text);

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

    std::optional<size_t> column_index(const std::string& name) const;

    // Missing column throws Error{missing_header}.
    size_t required_column(const std::string& name) const;

    static std::string cell(const std::vector<std::string>& row, size_t index);

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace unicrop::csv
