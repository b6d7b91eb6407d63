#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hatsr::stats {

/// Modified Noyes cartilage grade, ordered 0 < 1 < 2A < 2B < 3.
enum class NoyesGrade { k0 = 0, k1 = 1, k2A = 2, k2B = 3, k3 = 4 };

inline constexpr int kNoyesCategories = 5;

/// Literal tokens "0", "1", "2A", "2B", "3".
std::optional<NoyesGrade> parse_noyes(std::string_view token);
const char* noyes_token(NoyesGrade g);
inline int ordinal(NoyesGrade g) { return static_cast<int>(g); }

enum class Method { kLR, kSR, kHR };

std::optional<Method> parse_method(std::string_view token);
const char* method_name(Method m);

enum class Item {
  kImageQuality,
  kNoise,
  kMotionArtifacts,
  kGibbsArtifacts,
  kCartilage,
  kMeniscus,
  kCruciateLigament,
  kCollateralLigament,
  kTibialNerve,
  kCartilageGrade,  // Noyes-graded
  kMeniscusTear,    // binary findings
  kLigamentTear,
  kBoneMarrow,
};

enum class Scale { kLikert, kNoyes, kBinary };

std::optional<Item> parse_item(std::string_view token);
const char* item_name(Item item);
Scale item_scale(Item item);
/// Number of ordered categories on the item's scale (5, 5 or 2).
int category_count(Scale scale);

/// One reader's score, stored as a 0-based category index on the item's
/// scale: Likert 1..5 -> 0..4, Noyes 0..3 -> 0..4, binary absent/present -> 0/1.
struct Rating {
  std::string case_id;
  std::string side;
  std::string reader_id;
  Method method = Method::kLR;
  Item item = Item::kImageQuality;
  int category = 0;
};

/// Long-form reader scores; (case, side, reader, method, item) is unique.
struct RatingsTable {
  std::vector<Rating> rows;
};

/// Confusion counts with reference-standard totals; sensitivity and
/// specificity use ref_pos / ref_neg as denominators.
struct DiagnosticCounts {
  int tp = 0, tn = 0, fp = 0, fn = 0;
  int ref_pos = 0, ref_neg = 0;

  /// Throws InputError unless all counts are nonnegative, tp <= ref_pos and
  /// tn <= ref_neg.
  void validate() const;
  /// tp + fn != ref_pos or tn + fp != ref_neg.
  bool inconsistent() const { return tp + fn != ref_pos || tn + fp != ref_neg; }
};

}  // namespace hatsr::stats
