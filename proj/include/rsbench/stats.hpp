#pragma once

// Descriptive statistics of a caption corpus: token and sentence counts,
// vocabulary size, length histograms and the panchromatic:color ratio.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rsbench/corpus.hpp"
#include "rsbench/error.hpp"
#include "rsbench/report.hpp"
#include "rsbench/text.hpp"

namespace rsbench::stats {

/// Left-closed bins [start, start + bin_width) keyed by start.
struct Histogram {
  std::int64_t bin_width = 1;
  std::map<std::int64_t, std::size_t> bins;
  std::size_t total = 0;

  /// counts / (total * bin_width); integrates to one.
  std::map<std::int64_t, double> density() const {
    std::map<std::int64_t, double> out;
    if (total == 0) return out;
    for (const auto& [start, n] : bins)
      out[start] = static_cast<double>(n) / (static_cast<double>(total) * static_cast<double>(bin_width));
    return out;
  }

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

inline Histogram histogram(const std::vector<std::int64_t>& values, std::int64_t bin_width) {
  if (bin_width < 1) throw InvalidArgument("histogram: bin width must be >= 1");
  Histogram h;
  h.bin_width = bin_width;
  for (auto v : values) {
    std::int64_t q = v / bin_width;
    if (v % bin_width != 0 && v < 0) --q;
    ++h.bins[q * bin_width];
  }
  h.total = values.size();
  return h;
}

/// Sentences are the segments between '.', '!' and '?' that hold at least
/// one token.
inline std::size_t count_sentences(std::string_view caption) {
  std::size_t n = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= caption.size(); ++i) {
    if (i == caption.size() || caption[i] == '.' || caption[i] == '!' || caption[i] == '?') {
      if (!tokenize(caption.substr(start, i - start)).empty()) ++n;
      start = i + 1;
    }
  }
  return n;
}

struct StatsOptions {
  std::int64_t token_bin_width = 10;
  std::int64_t sentence_bin_width = 1;
};

struct CorpusStats {
  std::size_t captions = 0;
  std::size_t total_tokens = 0;
  std::size_t distinct_tokens = 0;
  std::size_t total_sentences = 0;
  double avg_caption_tokens = 0.0;
  std::size_t max_caption_tokens = 0;
  double avg_sentences_per_caption = 0.0;
  std::size_t max_sentences_per_caption = 0;
  std::size_t panchromatic_images = 0;
  std::size_t color_images = 0;
  // panchromatic / color; empty when no color image is known.
  std::optional<double> pan_to_color;
  Histogram token_length_histogram;
  Histogram sentence_count_histogram;
};

/// Statistics over `captions`. Modality counts cover manifest images that
/// have at least one caption.
inline CorpusStats corpus_stats(const std::vector<CaptionRecord>& captions,
                                const std::vector<ImageRecord>& images = {}, const StatsOptions& opt = {}) {
  CorpusStats s;
  s.captions = captions.size();
  std::unordered_set<std::string> vocab;
  std::unordered_set<std::string> captioned;
  std::vector<std::int64_t> lengths, sentences;
  lengths.reserve(captions.size());
  sentences.reserve(captions.size());
  for (const auto& c : captions) {
    auto tokens = tokenize(c.text);
    auto n_sent = count_sentences(c.text);
    s.total_tokens += tokens.size();
    s.total_sentences += n_sent;
    s.max_caption_tokens = std::max(s.max_caption_tokens, tokens.size());
    s.max_sentences_per_caption = std::max(s.max_sentences_per_caption, n_sent);
    vocab.insert(tokens.begin(), tokens.end());
    captioned.insert(c.image_id);
    lengths.push_back(static_cast<std::int64_t>(tokens.size()));
    sentences.push_back(static_cast<std::int64_t>(n_sent));
  }
  s.distinct_tokens = vocab.size();
  if (s.captions) {
    s.avg_caption_tokens = static_cast<double>(s.total_tokens) / static_cast<double>(s.captions);
    s.avg_sentences_per_caption = static_cast<double>(s.total_sentences) / static_cast<double>(s.captions);
  }
  for (const auto& img : images) {
    if (!captioned.contains(img.image_id)) continue;
    if (img.modality == Modality::panchromatic)
      ++s.panchromatic_images;
    else
      ++s.color_images;
  }
  if (s.color_images)
    s.pan_to_color = static_cast<double>(s.panchromatic_images) / static_cast<double>(s.color_images);
  s.token_length_histogram = histogram(lengths, opt.token_bin_width);
  s.sentence_count_histogram = histogram(sentences, opt.sentence_bin_width);
  return s;
}

inline Json histogram_json(const Histogram& h) {
  Json bins = Json::array();
  auto dens = h.density();
  for (const auto& [start, n] : h.bins)
    bins.push_back(Json{{"start", start}, {"end", start + h.bin_width - 1}, {"count", n}, {"density", dens[start]}});
  return Json{{"bin_width", h.bin_width}, {"bins", bins}};
}

inline Json to_json(const CorpusStats& s) {
  Json j{{"captions", s.captions},
         {"total_tokens", s.total_tokens},
         {"distinct_tokens", s.distinct_tokens},
         {"total_sentences", s.total_sentences},
         {"avg_caption_tokens", s.avg_caption_tokens},
         {"max_caption_tokens", s.max_caption_tokens},
         {"avg_sentences_per_caption", s.avg_sentences_per_caption},
         {"max_sentences_per_caption", s.max_sentences_per_caption},
         {"panchromatic_images", s.panchromatic_images},
         {"color_images", s.color_images}};
  j["pan_to_color"] = s.pan_to_color ? Json(*s.pan_to_color) : Json(nullptr);
  j["modality_ratio"] = s.pan_to_color && *s.pan_to_color > 0.0
                            ? Json("1:" + report::format_fixed(1.0 / *s.pan_to_color, 2))
                            : Json(nullptr);
  j["token_length_histogram"] = histogram_json(s.token_length_histogram);
  j["sentence_count_histogram"] = histogram_json(s.sentence_count_histogram);
  return j;
}

/// CSV with one line per bin: histogram,start,end,count,density.
inline std::string histogram_csv(const CorpusStats& s) {
  std::string out = "histogram,start,end,count,density\n";
  auto emit = [&](std::string_view name, const Histogram& h) {
    auto dens = h.density();
    for (const auto& [start, n] : h.bins)
      out += std::string(name) + "," + std::to_string(start) + "," + std::to_string(start + h.bin_width - 1) +
             "," + std::to_string(n) + "," + report::format_exact(dens[start]) + "\n";
  };
  emit("caption_tokens", s.token_length_histogram);
  emit("caption_sentences", s.sentence_count_histogram);
  return out;
}

}  // namespace rsbench::stats
