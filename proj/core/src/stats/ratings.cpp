#include "hatsr/stats/ratings.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace hatsr::stats {

namespace {

struct ItemInfo {
  Item item;
  const char* name;
  Scale scale;
};

constexpr std::array<ItemInfo, 13> kItems{{
    {Item::kImageQuality, "image_quality", Scale::kLikert},
    {Item::kNoise, "noise", Scale::kLikert},
    {Item::kMotionArtifacts, "motion_artifacts", Scale::kLikert},
    {Item::kGibbsArtifacts, "gibbs_artifacts", Scale::kLikert},
    {Item::kCartilage, "cartilage", Scale::kLikert},
    {Item::kMeniscus, "meniscus", Scale::kLikert},
    {Item::kCruciateLigament, "cruciate_ligament", Scale::kLikert},
    {Item::kCollateralLigament, "collateral_ligament", Scale::kLikert},
    {Item::kTibialNerve, "tibial_nerve", Scale::kLikert},
    {Item::kCartilageGrade, "cartilage_grade", Scale::kNoyes},
    {Item::kMeniscusTear, "meniscus_tear", Scale::kBinary},
    {Item::kLigamentTear, "ligament_tear", Scale::kBinary},
    {Item::kBoneMarrow, "bone_marrow", Scale::kBinary},
}};

constexpr std::array<const char*, 5> kNoyesTokens{"0", "1", "2A", "2B", "3"};

std::string trim(std::string s) {
  const auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), issp));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), issp).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) out.push_back(trim(field));
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

// Reads the header, checks it, and returns the data lines with their numbers.
struct Delimited {
  char delim = ',';
  std::vector<std::pair<int, std::vector<std::string>>> rows;
};

Delimited read_delimited(std::istream& in, const std::vector<std::string>& header) {
  Delimited d;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    if (!have_header) {
      d.delim = line.find('\t') != std::string::npos ? '\t' : ',';
      auto cols = split(line, d.delim);
      for (auto& c : cols) c = lower(c);
      if (cols != header) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
        throw SchemaError("bad header, expected " + expected, {"line " + std::to_string(lineno) + ": " + line});
      }
      have_header = true;
      continue;
    }
    d.rows.emplace_back(lineno, split(line, d.delim));
  }
  if (!have_header) throw SchemaError("empty table", {});
  return d;
}

void raise_if_any(const std::vector<std::string>& problems, const std::string& what) {
  if (problems.empty()) return;
  std::string msg = what + ": " + std::to_string(problems.size()) + " offending row(s)";
  const std::size_t shown = std::min<std::size_t>(problems.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) msg += "\n  " + problems[i];
  if (shown < problems.size()) msg += "\n  ...";
  throw SchemaError(msg, problems);
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

}  // namespace

std::optional<NoyesGrade> parse_noyes(std::string_view token) {
  std::string t(token);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (std::size_t i = 0; i < kNoyesTokens.size(); ++i)
    if (t == kNoyesTokens[i]) return static_cast<NoyesGrade>(i);
  return std::nullopt;
}

const char* noyes_token(NoyesGrade g) { return kNoyesTokens.at(static_cast<std::size_t>(g)); }

std::optional<Method> parse_method(std::string_view token) {
  const std::string t = lower(std::string(token));
  if (t == "lr") return Method::kLR;
  if (t == "sr") return Method::kSR;
  if (t == "hr") return Method::kHR;
  return std::nullopt;
}

const char* method_name(Method m) {
  switch (m) {
    case Method::kLR: return "LR";
    case Method::kSR: return "SR";
    case Method::kHR: return "HR";
  }
  return "?";
}

std::optional<Item> parse_item(std::string_view token) {
  const std::string t = lower(std::string(token));
  for (const auto& info : kItems)
    if (t == info.name) return info.item;
  return std::nullopt;
}

const char* item_name(Item item) { return kItems.at(static_cast<std::size_t>(item)).name; }
Scale item_scale(Item item) { return kItems.at(static_cast<std::size_t>(item)).scale; }

int category_count(Scale scale) {
  switch (scale) {
    case Scale::kLikert: return 5;
    case Scale::kNoyes: return kNoyesCategories;
    case Scale::kBinary: return 2;
  }
  return 0;
}

std::optional<int> parse_category(Item item, std::string_view token) {
  const std::string t = lower(std::string(token));
  switch (item_scale(item)) {
    case Scale::kLikert:
      if (t.size() == 1 && t[0] >= '1' && t[0] <= '5') return t[0] - '1';
      return std::nullopt;
    case Scale::kNoyes:
      if (auto g = parse_noyes(t)) return ordinal(*g);
      return std::nullopt;
    case Scale::kBinary:
      if (t == "0" || t == "absent" || t == "no") return 0;
      if (t == "1" || t == "present" || t == "yes") return 1;
      return std::nullopt;
  }
  return std::nullopt;
}

RatingsTable read_ratings(std::istream& in) {
  const auto d = read_delimited(in, {"case_id", "side", "reader_id", "method", "item", "value"});
  RatingsTable table;
  std::vector<std::string> problems;
  std::set<std::tuple<std::string, std::string, std::string, Method, Item>> seen;
  for (const auto& [lineno, f] : d.rows) {
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (f.size() != 6) {
      problems.push_back(where + "expected 6 fields, found " + std::to_string(f.size()));
      continue;
    }
    Rating r;
    r.case_id = f[0];
    r.side = f[1];
    r.reader_id = f[2];
    if (r.case_id.empty() || r.reader_id.empty()) {
      problems.push_back(where + "empty case_id or reader_id");
      continue;
    }
    const auto m = parse_method(f[3]);
    const auto item = parse_item(f[4]);
    if (!m) {
      problems.push_back(where + "unknown method '" + f[3] + "'");
      continue;
    }
    if (!item) {
      problems.push_back(where + "unknown item '" + f[4] + "'");
      continue;
    }
    const auto c = parse_category(*item, f[5]);
    if (!c) {
      problems.push_back(where + "value '" + f[5] + "' is not valid for " + item_name(*item));
      continue;
    }
    r.method = *m;
    r.item = *item;
    r.category = *c;
    if (!seen.emplace(r.case_id, r.side, r.reader_id, r.method, r.item).second) {
      problems.push_back(where + "duplicate (case, side, reader, method, item)");
      continue;
    }
    table.rows.push_back(std::move(r));
  }
  raise_if_any(problems, "ratings table");
  return table;
}

RatingsTable read_ratings(const std::filesystem::path& path) {
  auto in = open(path);
  return read_ratings(in);
}

std::vector<DiagnosticRow> read_diagnostic(std::istream& in) {
  const auto d = read_delimited(in, {"case_id", "compartment", "ref_grade", "lr_grade", "sr_grade", "hr_grade"});
  std::vector<DiagnosticRow> rows;
  std::vector<std::string> problems;
  for (const auto& [lineno, f] : d.rows) {
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (f.size() != 6) {
      problems.push_back(where + "expected 6 fields, found " + std::to_string(f.size()));
      continue;
    }
    DiagnosticRow row;
    row.case_id = f[0];
    row.compartment = f[1];
    const std::string ref = lower(f[2]);
    if (!(ref.empty() || ref == "na")) {
      row.ref = parse_noyes(f[2]);
      if (!row.ref) {
        problems.push_back(where + "bad ref_grade '" + f[2] + "'");
        continue;
      }
    }
    const auto lr = parse_noyes(f[3]), sr = parse_noyes(f[4]), hr = parse_noyes(f[5]);
    if (!lr || !sr || !hr) {
      problems.push_back(where + "grades must be one of 0, 1, 2A, 2B, 3");
      continue;
    }
    row.lr = *lr;
    row.sr = *sr;
    row.hr = *hr;
    rows.push_back(std::move(row));
  }
  raise_if_any(problems, "diagnostic table");
  return rows;
}

std::vector<DiagnosticRow> read_diagnostic(const std::filesystem::path& path) {
  auto in = open(path);
  return read_diagnostic(in);
}

ReaderMatrix reader_matrix(const RatingsTable& table, Item item, Method method) {
  std::map<std::string, std::size_t> subjects, readers;
  for (const auto& r : table.rows) {
    if (r.item != item || r.method != method) continue;
    subjects.emplace(r.case_id + "/" + r.side, 0);
    readers.emplace(r.reader_id, 0);
  }
  ReaderMatrix m;
  for (auto& [id, idx] : subjects) {
    idx = m.subjects.size();
    m.subjects.push_back(id);
  }
  for (auto& [id, idx] : readers) {
    idx = m.readers.size();
    m.readers.push_back(id);
  }
  m.categories.assign(m.subjects.size(), std::vector<int>(m.readers.size(), -1));
  for (const auto& r : table.rows) {
    if (r.item != item || r.method != method) continue;
    m.categories[subjects.at(r.case_id + "/" + r.side)][readers.at(r.reader_id)] = r.category;
  }
  return m;
}

std::vector<Item> items_in(const RatingsTable& table) {
  std::set<int> ids;
  for (const auto& r : table.rows) ids.insert(static_cast<int>(r.item));
  std::vector<Item> out;
  for (int id : ids) out.push_back(static_cast<Item>(id));
  return out;
}

}  // namespace hatsr::stats
