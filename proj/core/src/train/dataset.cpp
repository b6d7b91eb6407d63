#include "hatsr/train/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "../json_support.hpp"
#include "hatsr/error.hpp"
#include "hatsr/io/raw_image.hpp"

namespace hatsr::train {

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kTest:
      return "test";
    case Split::kUnassigned:
      break;
  }
  return "unassigned";
}

namespace {

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  if (s == "unassigned") return Split::kUnassigned;
  throw InputError("unknown split label '" + s + "'");
}

}  // namespace

void PairedDataset::validate() const {
  if (scale < 1) throw InputError("dataset scale must be >= 1");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (p.subject_id.empty()) throw InputError("pair " + std::to_string(i) + " has no subject id");
    if (p.hr.height != scale * p.lr.height || p.hr.width != scale * p.lr.width) {
      throw InputError("pair " + std::to_string(i) + ": HR " + std::to_string(p.hr.height) + "x" +
                       std::to_string(p.hr.width) + " is not " + std::to_string(scale) + "x LR " +
                       std::to_string(p.lr.height) + "x" + std::to_string(p.lr.width));
    }
  }
}

std::vector<std::size_t> PairedDataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (pairs[i].split == split) out.push_back(i);
  return out;
}

PairedDataset split_dataset(PairedDataset dataset, const SplitPolicy& policy) {
  dataset.validate();
  const auto n = static_cast<int>(dataset.pairs.size());
  const int target = policy.train_count ? *policy.train_count
                                        : static_cast<int>(std::lround(policy.train_fraction * n));
  if (target < 0 || target > n) throw ConfigError("split: train count " + std::to_string(target) + " out of range");

  // Subjects in order of first appearance.
  std::vector<std::string> subjects;
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < dataset.pairs.size(); ++i) {
    auto& m = members[dataset.pairs[i].subject_id];
    if (m.empty()) subjects.push_back(dataset.pairs[i].subject_id);
    m.push_back(i);
  }
  std::vector<std::string> eligible;
  for (const auto& s : subjects) {
    const auto& m = members[s];
    const bool surgical = std::any_of(m.begin(), m.end(), [&](auto i) { return dataset.pairs[i].surgical_reference; });
    if (!surgical) eligible.push_back(s);
  }
  std::mt19937_64 rng(policy.seed);
  std::shuffle(eligible.begin(), eligible.end(), rng);

  // Exact subset sum over subject sizes; reach[i][t]: first i subjects can fill t slots.
  const std::size_t k = eligible.size();
  std::vector<std::vector<char>> reach(k + 1, std::vector<char>(static_cast<std::size_t>(target) + 1, 0));
  reach[0][0] = 1;
  for (std::size_t i = 0; i < k; ++i) {
    const auto size = static_cast<int>(members[eligible[i]].size());
    for (int t = 0; t <= target; ++t) {
      reach[i + 1][t] = reach[i][t] || (t >= size && reach[i][t - size]);
    }
  }
  if (!reach[k][target]) {
    throw ConfigError("split: cannot place exactly " + std::to_string(target) +
                      " pairs in train from subject-disjoint non-surgical subjects");
  }
  for (auto& p : dataset.pairs) p.split = Split::kTest;
  int t = target;
  for (std::size_t i = k; i > 0; --i) {
    const auto size = static_cast<int>(members[eligible[i - 1]].size());
    if (t >= size && reach[i - 1][t - size]) {
      for (auto idx : members[eligible[i - 1]]) dataset.pairs[idx].split = Split::kTrain;
      t -= size;
    }
  }
  return dataset;
}

void save_dataset(const std::filesystem::path& dir, const PairedDataset& dataset) {
  dataset.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create dataset directory " + dir.string() + ": " + ec.message());
  detail::json manifest{{"format", "hatsr-dataset"}, {"version", 1}, {"scale", dataset.scale}};
  auto& pairs = manifest["pairs"] = detail::json::array();
  for (std::size_t i = 0; i < dataset.pairs.size(); ++i) {
    const auto& p = dataset.pairs[i];
    char id[32];
    std::snprintf(id, sizeof id, "pair-%03zu", i);
    const std::string lr = std::string(id) + "_lr.raw", hr = std::string(id) + "_hr.raw";
    io::write_raw_image(dir / lr, p.lr);
    io::write_raw_image(dir / hr, p.hr);
    pairs.push_back({{"id", id},
                     {"subject_id", p.subject_id},
                     {"side", p.knee_side},
                     {"surgical_reference", p.surgical_reference},
                     {"split", split_name(p.split)},
                     {"lr", lr},
                     {"hr", hr}});
  }
  std::ofstream os(dir / "manifest.json", std::ios::trunc);
  if (!os) throw InputError("cannot write " + (dir / "manifest.json").string());
  os << manifest.dump(2) << '\n';
}

PairedDataset load_dataset(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  std::ifstream is(path);
  if (!is) throw InputError("missing dataset manifest: " + path.string());
  PairedDataset ds;
  try {
    const auto manifest = detail::json::parse(is);
    if (manifest.value("format", std::string()) != "hatsr-dataset") {
      throw InputError("not a dataset manifest: " + path.string());
    }
    ds.scale = manifest.at("scale").get<int>();
    for (const auto& e : manifest.at("pairs")) {
      ImagePair p;
      p.subject_id = e.at("subject_id").get<std::string>();
      p.knee_side = e.value("side", std::string("L"));
      p.surgical_reference = e.value("surgical_reference", false);
      p.split = parse_split(e.value("split", std::string("unassigned")));
      p.lr = io::read_raw_image(dir / e.at("lr").get<std::string>());
      p.hr = io::read_raw_image(dir / e.at("hr").get<std::string>());
      ds.pairs.push_back(std::move(p));
    }
  } catch (const detail::json::exception& e) {
    throw InputError("dataset manifest " + path.string() + ": " + e.what());
  }
  ds.validate();
  return ds;
}

}  // namespace hatsr::train
