#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "hatsr/error.hpp"
#include "hatsr/stats/types.hpp"

namespace hatsr::stats {

/// Malformed ratings file. `rows` lists one message per offending line.
class SchemaError : public InputError {
 public:
  SchemaError(const std::string& what, std::vector<std::string> rows)
      : InputError(what), rows_(std::move(rows)) {}
  const std::vector<std::string>& rows() const { return rows_; }

 private:
  std::vector<std::string> rows_;
};

/// Comma- or tab-separated, header `case_id,side,reader_id,method,item,value`.
/// Likert values are 1..5, grades use the Noyes tokens, binary findings
/// accept 0/1 or absent/present.
RatingsTable read_ratings(std::istream& in);
RatingsTable read_ratings(const std::filesystem::path& path);

struct DiagnosticRow {
  std::string case_id;
  std::string compartment;
  std::optional<NoyesGrade> ref;  // empty or NA when no reference exists
  NoyesGrade lr = NoyesGrade::k0, sr = NoyesGrade::k0, hr = NoyesGrade::k0;

  NoyesGrade grade(Method m) const { return m == Method::kLR ? lr : (m == Method::kSR ? sr : hr); }
};

/// Header `case_id,compartment,ref_grade,lr_grade,sr_grade,hr_grade`.
std::vector<DiagnosticRow> read_diagnostic(std::istream& in);
std::vector<DiagnosticRow> read_diagnostic(const std::filesystem::path& path);

/// Parses a value token on the item's scale into a 0-based category.
std::optional<int> parse_category(Item item, std::string_view token);

/// Reader scores for one item and method keyed by subject (case_id + side),
/// readers ordered by id; -1 marks a missing rating.
struct ReaderMatrix {
  std::vector<std::string> subjects;
  std::vector<std::string> readers;
  std::vector<std::vector<int>> categories;  // subjects x readers
};
ReaderMatrix reader_matrix(const RatingsTable& table, Item item, Method method);

/// Items present in the table, in enum order.
std::vector<Item> items_in(const RatingsTable& table);

}  // namespace hatsr::stats
