// Copyright 2026 The weakagg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Corpus ingestion for the Person_Trial_Iteration folder layout, protocol
// splits, and a synthetic bag generator with a planted key frame.
//
// On-disk layout:
//
//   <root>/labels.csv            folder name,arousal,valence,comfort   (values in [0, 2])
//   <root>/exclusions.csv        folder name,frame_index               (optional)
//   <root>/P01_T01_I01/embeddings.csv
//       dim=<d>
//       <d comma-separated floats>   one row per frame, temporal order

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <vector>

#include "weakagg/bag.hpp"
#include "weakagg/diffmath.hpp"
#include "weakagg/error.hpp"

namespace weakagg {

namespace fs = std::filesystem;

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::size_t> parse_index(std::string_view s) {
  s = trim(s);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline bool is_id_component(std::string_view s, char prefix) {
  return s.size() == 3 && s[0] == prefix && s[1] >= '0' && s[1] <= '9' && s[2] >= '0' &&
         s[2] <= '9';
}

inline std::ifstream open_for_read(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return in;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace detail

/// Splits "P01_T02_I05" into its three validated parts.
inline BagId parse_bag_id(std::string_view folder_name) {
  const auto parts = detail::split(folder_name, '_');
  if (parts.size() != 3) {
    throw Error(ErrorKind::Parse, "folder name '" + std::string(folder_name) +
                                      "' must have three underscore-separated parts, found " +
                                      std::to_string(parts.size()));
  }
  if (!detail::is_id_component(parts[0], 'P') || parts[0] == "P00") {
    throw Error(ErrorKind::Parse, "person component '" + std::string(parts[0]) +
                                      "' in '" + std::string(folder_name) +
                                      "' does not match P01..P99");
  }
  if (!detail::is_id_component(parts[1], 'T')) {
    throw Error(ErrorKind::Parse, "trial component '" + std::string(parts[1]) + "' in '" +
                                      std::string(folder_name) + "' does not match T00..T99");
  }
  if (!detail::is_id_component(parts[2], 'I')) {
    throw Error(ErrorKind::Parse, "iteration component '" + std::string(parts[2]) + "' in '" +
                                      std::string(folder_name) + "' does not match I00..I99");
  }
  return BagId{std::string(parts[0]), std::string(parts[1]), std::string(parts[2])};
}

/// Label triple as it appears in labels.csv, before rescaling.
struct RawLabel {
  double arousal = 0.0;
  double valence = 0.0;
  double comfort = 0.0;
};

inline constexpr double kRawLabelMax = 2.0;

inline double rescale_label(double raw) {
  if (!(raw >= 0.0 && raw <= kRawLabelMax)) {
    throw Error(ErrorKind::Range, "raw label " + std::to_string(raw) + " outside [0, 2]");
  }
  return raw / 2.0;
}

inline LabelPair rescale(const RawLabel& raw) {
  return LabelPair{rescale_label(raw.valence), rescale_label(raw.arousal),
                   rescale_label(raw.comfort)};
}

/// Reads labels.csv. The header must be exactly
/// `folder name,arousal,valence,comfort` (case and surrounding blanks
/// ignored); a reordered header is rejected rather than silently swapping
/// valence and arousal.
inline std::map<std::string, RawLabel> load_reference(const fs::path& path) {
  auto in = detail::open_for_read(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Format, path.string() + " is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = detail::split(line, ',');
  const std::vector<std::string> expected = {"folder name", "arousal", "valence", "comfort"};
  bool header_ok = header.size() == expected.size();
  for (std::size_t i = 0; header_ok && i < header.size(); ++i) {
    header_ok = detail::lower(header[i]) == expected[i];
  }
  if (!header_ok) {
    throw Error(ErrorKind::Format, path.string() + ": header must be 'folder name,arousal,valence,comfort', got '" +
                                       std::string(detail::trim(line)) + "'");
  }

  std::map<std::string, RawLabel> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != 4) {
      throw Error(ErrorKind::Format, path.string() + " row " + std::to_string(row) +
                                         ": expected 4 columns, found " +
                                         std::to_string(cells.size()));
    }
    double values[3];
    for (int c = 0; c < 3; ++c) {
      const auto v = detail::parse_double(cells[c + 1]);
      if (!v) {
        throw Error(ErrorKind::Format, path.string() + " row " + std::to_string(row) +
                                           ": '" + std::string(cells[c + 1]) + "' is not a number");
      }
      if (*v < 0.0 || *v > kRawLabelMax) {
        throw Error(ErrorKind::Range, path.string() + " row " + std::to_string(row) + ": " +
                                          expected[c + 1] + " value " + std::string(cells[c + 1]) +
                                          " outside [0, 2]");
      }
      values[c] = *v;
    }
    const std::string name(cells[0]);
    if (!out.emplace(name, RawLabel{values[0], values[1], values[2]}).second) {
      throw Error(ErrorKind::Duplicate, path.string() + " row " + std::to_string(row) +
                                            ": folder '" + name + "' already listed");
    }
  }
  return out;
}

/// Reads one embeddings.csv: `dim=<d>` then one row of d floats per frame.
inline std::vector<Vector> load_embeddings(const fs::path& path) {
  auto in = detail::open_for_read(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Format, path.string() + " is empty");
  const auto head = detail::trim(line);
  std::optional<std::size_t> dim;
  if (head.substr(0, 4) == "dim=") dim = detail::parse_index(head.substr(4));
  if (!dim || *dim == 0) {
    throw Error(ErrorKind::Format, path.string() + ": first line must be dim=<d>, got '" +
                                       std::string(head) + "'");
  }
  std::vector<Vector> frames;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != *dim) {
      throw Error(ErrorKind::Format, path.string() + " frame row " + std::to_string(row) +
                                         ": expected " + std::to_string(*dim) + " values, found " +
                                         std::to_string(cells.size()));
    }
    Vector v(*dim);
    for (std::size_t k = 0; k < *dim; ++k) {
      const auto x = detail::parse_double(cells[k]);
      if (!x) {
        throw Error(ErrorKind::Format, path.string() + " frame row " + std::to_string(row) +
                                           ": '" + std::string(cells[k]) + "' is not a number");
      }
      v[k] = *x;
    }
    frames.push_back(std::move(v));
    ++row;
  }
  if (frames.empty()) throw Error(ErrorKind::EmptyBag, path.string() + " holds no frames");
  return frames;
}

/// Per-bag frame indices to drop, keyed by folder name.
using FrameExclusions = std::map<std::string, std::set<std::size_t>>;

/// Reads exclusions.csv rows `folder name,frame_index`. A header row whose
/// second cell is not an integer is skipped.
inline FrameExclusions load_frame_exclusions(const fs::path& path) {
  auto in = detail::open_for_read(path);
  FrameExclusions out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != 2) {
      throw Error(ErrorKind::Format, path.string() + " row " + std::to_string(row) +
                                         ": expected 'folder name,frame_index'");
    }
    const auto index = detail::parse_index(cells[1]);
    if (!index) {
      if (row == 1) continue;
      throw Error(ErrorKind::Format, path.string() + " row " + std::to_string(row) +
                                         ": bad frame index '" + std::string(cells[1]) + "'");
    }
    out[std::string(cells[0])].insert(*index);
  }
  return out;
}

inline std::set<std::string> default_excluded_persons() { return {"P03", "P05", "P10", "P11"}; }

struct CorpusFilter {
  std::set<std::string> excluded_persons = default_excluded_persons();
  bool exclude_warmup_trial = true;  // drops T00
  std::optional<std::size_t> max_frames_per_bag = 32;
  FrameExclusions frame_exclusions;

  void validate() const {
    if (max_frames_per_bag && *max_frames_per_bag == 0) {
      throw Error(ErrorKind::Config, "max_frames_per_bag must be >= 1");
    }
  }
};

/// Keeps at most `max_frames` frames by uniform temporal stride
/// floor(J / max_frames), starting at frame 0.
inline Bag subsample_frames(Bag bag, std::size_t max_frames) {
  if (max_frames == 0) throw Error(ErrorKind::Precondition, "max_frames must be >= 1");
  const std::size_t count = bag.frames.size();
  if (count <= max_frames) return bag;
  const std::size_t stride = count / max_frames;
  std::vector<Vector> kept;
  kept.reserve(max_frames);
  for (std::size_t i = 0; i < max_frames; ++i) kept.push_back(std::move(bag.frames[i * stride]));
  bag.frames = std::move(kept);
  return bag;
}

struct CorpusLoad {
  std::vector<Bag> bags;
  std::size_t skipped_unlabelled = 0;  // folder has embeddings but no labels.csv row
  std::size_t skipped_unparsable = 0;  // directory name is not P##_T##_I##
  std::size_t filtered = 0;            // dropped by person/trial filter
  std::size_t dropped_empty = 0;       // no frames left after exclusions
};

/// Walks `root` in sorted folder order and builds one bag per labelled
/// Person_Trial_Iteration folder that holds an embeddings.csv.
inline CorpusLoad assemble_corpus(const fs::path& root,
                                  const std::map<std::string, RawLabel>& reference,
                                  const CorpusFilter& filter) {
  filter.validate();
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorKind::Io, "corpus root " + root.string() + " is not a readable directory");
  }
  std::vector<fs::path> folders;
  for (const auto& entry : fs::directory_iterator(root, ec)) {
    if (entry.is_directory() && fs::exists(entry.path() / "embeddings.csv")) {
      folders.push_back(entry.path());
    }
  }
  if (ec) throw Error(ErrorKind::Io, "cannot list " + root.string() + ": " + ec.message());
  std::sort(folders.begin(), folders.end());

  CorpusLoad load;
  for (const auto& folder : folders) {
    const std::string name = folder.filename().string();
    BagId id;
    try {
      id = parse_bag_id(name);
    } catch (const Error&) {
      ++load.skipped_unparsable;
      continue;
    }
    if (filter.excluded_persons.count(id.person) ||
        (filter.exclude_warmup_trial && id.trial == "T00")) {
      ++load.filtered;
      continue;
    }
    const auto label = reference.find(name);
    if (label == reference.end()) {
      ++load.skipped_unlabelled;
      continue;
    }
    Bag bag{load_embeddings(folder / "embeddings.csv"), rescale(label->second), id};
    if (const auto drop = filter.frame_exclusions.find(name);
        drop != filter.frame_exclusions.end()) {
      std::vector<Vector> kept;
      for (std::size_t j = 0; j < bag.frames.size(); ++j) {
        if (!drop->second.count(j)) kept.push_back(std::move(bag.frames[j]));
      }
      bag.frames = std::move(kept);
    }
    if (bag.frames.empty()) {
      ++load.dropped_empty;
      continue;
    }
    if (filter.max_frames_per_bag) bag = subsample_frames(std::move(bag), *filter.max_frames_per_bag);
    load.bags.push_back(std::move(bag));
  }
  return load;
}

/// Loads `root/labels.csv` and, when present, `root/exclusions.csv` (merged
/// into the filter's exclusion list), then assembles the corpus.
inline CorpusLoad assemble_corpus(const fs::path& root, CorpusFilter filter) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorKind::Io, "corpus root " + root.string() + " is not a readable directory");
  }
  const auto reference = load_reference(root / "labels.csv");
  if (fs::exists(root / "exclusions.csv")) {
    for (auto& [name, frames] : load_frame_exclusions(root / "exclusions.csv")) {
      filter.frame_exclusions[name].insert(frames.begin(), frames.end());
    }
  }
  return assemble_corpus(root, reference, filter);
}

inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

/// Writes bags in the on-disk layout. Labels are stored on the raw 0..2
/// scale; doubles use shortest round-trip text so reloading is exact.
inline void write_corpus(const fs::path& root, const std::vector<Bag>& bags) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + root.string() + ": " + ec.message());
  std::ofstream labels(root / "labels.csv");
  if (!labels) throw Error(ErrorKind::Io, "cannot write " + (root / "labels.csv").string());
  labels << "folder name,arousal,valence,comfort\n";
  for (const auto& bag : bags) {
    const std::string name = bag.id.folder_name();
    labels << name << ',' << format_double(bag.label.arousal * 2.0) << ','
           << format_double(bag.label.valence * 2.0) << ','
           << format_double(bag.label.comfort * 2.0) << '\n';
    fs::create_directories(root / name, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + (root / name).string());
    std::ofstream emb(root / name / "embeddings.csv");
    if (!emb) throw Error(ErrorKind::Io, "cannot write embeddings for " + name);
    emb << "dim=" << (bag.frames.empty() ? 0 : bag.frames.front().size()) << '\n';
    for (const auto& frame : bag.frames) {
      for (std::size_t k = 0; k < frame.size(); ++k) {
        if (k) emb << ',';
        emb << format_double(frame[k]);
      }
      emb << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Splits

/// Chronological per-person split: bags ordered by (trial, iteration), the
/// first ceil(fraction * n) train and the remainder test.
struct Split {
  std::vector<Bag> train;
  std::vector<Bag> test;
};

inline Split split_individual(std::vector<Bag> bags, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorKind::Precondition, "split fraction must lie strictly inside (0, 1)");
  }
  if (bags.size() < 3) {
    throw Error(ErrorKind::InsufficientData, "individual split needs >= 3 bags, have " +
                                                 std::to_string(bags.size()));
  }
  std::stable_sort(bags.begin(), bags.end(), [](const Bag& a, const Bag& b) {
    return std::tie(a.id.trial, a.id.iteration) < std::tie(b.id.trial, b.id.iteration);
  });
  const double n = static_cast<double>(bags.size());
  // 2/3 * 24 lands a hair above 16 in binary; the slack keeps it at 16.
  auto n_train = static_cast<std::size_t>(std::ceil(fraction * n - 1e-9));
  n_train = std::max<std::size_t>(n_train, 1);
  if (n_train >= bags.size()) {
    throw Error(ErrorKind::InsufficientData, "split leaves no test bags");
  }
  Split s;
  s.train.assign(std::make_move_iterator(bags.begin()),
                 std::make_move_iterator(bags.begin() + static_cast<std::ptrdiff_t>(n_train)));
  s.test.assign(std::make_move_iterator(bags.begin() + static_cast<std::ptrdiff_t>(n_train)),
                std::make_move_iterator(bags.end()));
  return s;
}

inline std::set<std::string> persons_of(const std::vector<Bag>& bags) {
  std::set<std::string> out;
  for (const auto& b : bags) out.insert(b.id.person);
  return out;
}

inline std::vector<Bag> bags_of_person(const std::vector<Bag>& bags, const std::string& person) {
  std::vector<Bag> out;
  for (const auto& b : bags) {
    if (b.id.person == person) out.push_back(b);
  }
  return out;
}

struct Fold {
  std::set<std::string> test_persons;
  std::vector<Bag> train;
  std::vector<Bag> test;
};

/// One fold per held-out person set: test = bags of those persons, train =
/// everything else.
inline std::vector<Fold> folds_universal(const std::vector<Bag>& bags,
                                         const std::vector<std::set<std::string>>& held_out) {
  const auto known = persons_of(bags);
  std::vector<Fold> folds;
  for (std::size_t f = 0; f < held_out.size(); ++f) {
    if (held_out[f].empty()) {
      throw Error(ErrorKind::Precondition, "fold " + std::to_string(f) + " holds out nobody");
    }
    for (const auto& p : held_out[f]) {
      if (!known.count(p)) {
        throw Error(ErrorKind::Lookup, "fold " + std::to_string(f) + " holds out unknown person " + p);
      }
    }
    Fold fold;
    fold.test_persons = held_out[f];
    for (const auto& b : bags) {
      (held_out[f].count(b.id.person) ? fold.test : fold.train).push_back(b);
    }
    if (fold.train.empty()) {
      throw Error(ErrorKind::InsufficientData,
                  "fold " + std::to_string(f) + " leaves no training persons");
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

/// Round-robin assignment of the sorted person list into `k` held-out sets.
inline std::vector<std::set<std::string>> round_robin_folds(const std::set<std::string>& persons,
                                                            std::size_t k) {
  if (k == 0) throw Error(ErrorKind::Precondition, "fold count must be >= 1");
  std::vector<std::set<std::string>> out(k);
  std::size_t i = 0;
  for (const auto& p : persons) out[i++ % k].insert(p);
  std::erase_if(out, [](const auto& s) { return s.empty(); });
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

struct SynthConfig {
  std::size_t participants = 8;
  std::size_t bags_per_participant = 24;
  std::size_t frames_per_bag = 16;
  std::size_t embed_dim = 32;
  std::size_t key_frame_signal_dim = 4;
  double noise_std = 0.5;
  /// Value of the marker coordinate (index key_frame_signal_dim) on the key
  /// frame; it is what makes the key frame detectable by a linear score.
  double key_frame_marker = 2.0;
  double valence_mean = 0.253;
  double valence_std = 0.200;
  double arousal_mean = 0.622;
  double arousal_std = 0.171;
  std::uint64_t seed = 7;

  void validate() const {
    if (participants == 0 || bags_per_participant == 0 || frames_per_bag == 0 ||
        key_frame_signal_dim == 0) {
      throw Error(ErrorKind::Config, "synthetic corpus counts must be >= 1");
    }
    if (embed_dim < key_frame_signal_dim + 1) {
      throw Error(ErrorKind::Config, "embed_dim must exceed key_frame_signal_dim");
    }
    if (!(noise_std >= 0.0) || !(valence_std >= 0.0) || !(arousal_std >= 0.0)) {
      throw Error(ErrorKind::Config, "standard deviations must be >= 0");
    }
    if (bags_per_participant > 24 * 99) {
      throw Error(ErrorKind::Config, "bags_per_participant exceeds the T01..T99 x 24 id space");
    }
  }
};

/// What synth_generate planted, for checking recovery.
struct SynthTruth {
  std::vector<std::size_t> key_frame;  // per bag, same order as the bags
  Vector valence_weights;              // unit-norm functional over the signal coordinates
  Vector arousal_weights;
  double gain = 0.0;                   // label = sigmoid(gain * w . z), standardised
  double sigmoid_std = 0.0;            // std of sigmoid(gain * N(0, 1))
};

struct SynthCorpus {
  std::vector<Bag> bags;
  SynthTruth truth;
};

/// Person ids for synthetic corpora: P01..P99 minus the default exclusions,
/// so the default filter keeps every synthetic participant.
inline std::vector<std::string> synthetic_person_ids(std::size_t count) {
  const auto excluded = default_excluded_persons();
  std::vector<std::string> ids;
  for (int n = 1; n <= 99 && ids.size() < count; ++n) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "P%02d", n);
    if (!excluded.count(buf)) ids.emplace_back(buf);
  }
  if (ids.size() < count) throw Error(ErrorKind::Config, "too many synthetic participants");
  return ids;
}

namespace detail {

/// Std of sigmoid(gain * Z), Z ~ N(0, 1), by trapezoid quadrature on [-10, 10].
inline double sigmoid_gaussian_std(double gain) {
  constexpr int kSteps = 20000;
  const double lo = -10.0, hi = 10.0, h = (hi - lo) / kSteps;
  double mass = 0.0, first = 0.0, second = 0.0;
  for (int i = 0; i <= kSteps; ++i) {
    const double z = lo + h * i;
    const double w = (i == 0 || i == kSteps ? 0.5 : 1.0) * normal_pdf(z) * h;
    const double s = sigmoid(gain * z);
    mass += w;
    first += w * s;
    second += w * s * s;
  }
  first /= mass;
  second /= mass;
  return std::sqrt(second - first * first);
}

}  // namespace detail

/// Each bag has one key frame whose first key_frame_signal_dim coordinates
/// carry a latent z ~ N(0, I) and whose next coordinate carries the marker;
/// its remaining coordinates and every other frame are N(0, noise_std^2)
/// noise. Targets are sigmoid(gain * w . z) standardised to the configured
/// mean/std and clamped to [0, 1].
inline SynthCorpus synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  SynthCorpus out;
  auto draw_direction = [&]() {
    Vector w(cfg.key_frame_signal_dim);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : w) {
        v = unit(rng);
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& v : w) v /= norm;
    return w;
  };
  out.truth.valence_weights = draw_direction();
  out.truth.arousal_weights = draw_direction();
  out.truth.gain = 2.0;
  out.truth.sigmoid_std = detail::sigmoid_gaussian_std(out.truth.gain);

  auto target = [&](const Vector& w, std::span<const double> z, double mean, double sd) {
    const double u = sigmoid(out.truth.gain * dot(w, z));
    return std::clamp(mean + sd * (u - 0.5) / out.truth.sigmoid_std, 0.0, 1.0);
  };

  std::uniform_int_distribution<std::size_t> pick_key(0, cfg.frames_per_bag - 1);
  const auto persons = synthetic_person_ids(cfg.participants);
  for (const auto& person : persons) {
    for (std::size_t b = 0; b < cfg.bags_per_participant; ++b) {
      char trial[24], iteration[24];
      std::snprintf(trial, sizeof(trial), "T%02zu", 1 + b / 24);
      std::snprintf(iteration, sizeof(iteration), "I%02zu", 1 + b % 24);
      Bag bag;
      bag.id = BagId{person, trial, iteration};
      const std::size_t key = pick_key(rng);
      for (std::size_t j = 0; j < cfg.frames_per_bag; ++j) {
        Vector frame(cfg.embed_dim);
        for (double& v : frame) v = cfg.noise_std * unit(rng);
        if (j == key) {
          for (std::size_t k = 0; k < cfg.key_frame_signal_dim; ++k) frame[k] = unit(rng);
          frame[cfg.key_frame_signal_dim] = cfg.key_frame_marker;
        }
        bag.frames.push_back(std::move(frame));
      }
      const std::span<const double> z(bag.frames[key].data(), cfg.key_frame_signal_dim);
      bag.label.valence = target(out.truth.valence_weights, z, cfg.valence_mean, cfg.valence_std);
      bag.label.arousal = target(out.truth.arousal_weights, z, cfg.arousal_mean, cfg.arousal_std);
      bag.label.comfort = 0.5;
      out.truth.key_frame.push_back(key);
      out.bags.push_back(std::move(bag));
    }
  }
  return out;
}

}  // namespace weakagg
