#pragma once

// Frame sequences (grayscale PGM, one timestamp per frame) to anchor
// observations: every frame contributes boundary pixels of the region that
// became active since the previous frame, stamped with the frame time.

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "srcloc/core.hpp"
#include "srcloc/io.hpp"
#include "srcloc/pgm.hpp"
#include "srcloc/rng.hpp"

namespace srcloc {

struct FrameEntry {
  std::filesystem::path path;
  double timestamp{};
};

struct FrameManifest {
  std::vector<FrameEntry> entries;
  double pixel_size{1.0};
  double threshold{0.5};

  void validate() const {
    if (entries.size() < 2) throw Error(ErrorCode::InvalidArgument, "manifest needs at least 2 frames");
    for (std::size_t k = 1; k < entries.size(); ++k) {
      if (!(entries[k].timestamp > entries[k - 1].timestamp)) {
        throw Error(ErrorCode::InvalidArgument, "frame timestamps must be strictly increasing");
      }
    }
    if (!(pixel_size > 0.0)) throw Error(ErrorCode::InvalidArgument, "pixel_size must be > 0");
    if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorCode::InvalidArgument, "threshold must lie in (0, 1)");
  }
};

/// Relative frame paths are resolved against the manifest's directory.
inline FrameManifest load_manifest(const std::filesystem::path& path) {
  const json j = parse_json(read_text_file(path), path.string());
  FrameManifest m;
  try {
    m.pixel_size = j.at("pixel_size").get<double>();
    m.threshold = j.at("threshold").get<double>();
    for (const auto& f : j.at("frames")) {
      std::filesystem::path p = f.at("path").get<std::string>();
      if (p.is_relative()) p = path.parent_path() / p;
      m.entries.push_back({p, f.at("timestamp").get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, "manifest: " + std::string(e.what()));
  }
  return m;
}

inline void save_manifest(const std::filesystem::path& path, const FrameManifest& m) {
  json frames = json::array();
  for (const auto& e : m.entries) {
    frames.push_back({{"path", e.path.lexically_relative(path.parent_path()).generic_string()},
                      {"timestamp", e.timestamp}});
  }
  write_text_file(path, json{{"pixel_size", m.pixel_size}, {"threshold", m.threshold}, {"frames", frames}}.dump(2) +
                            "\n");
}

struct IngestResult {
  std::vector<AnchorObservation> anchors;
  std::vector<std::size_t> empty_frames;  // frame indices (k > 0) with no new activation
};

/// Core of the extraction on decoded frames. Activation is sticky: once a
/// pixel crosses the threshold it stays active in every later frame.
inline IngestResult extract_anchors_from_images(std::span<const GrayImage> frames, std::span<const double> timestamps,
                                                double pixel_size, double threshold, std::size_t per_frame_samples,
                                                std::uint64_t seed) {
  if (frames.size() != timestamps.size()) throw Error(ErrorCode::InvalidArgument, "one timestamp per frame required");
  if (frames.empty()) return {};
  const std::size_t w = frames[0].width, h = frames[0].height;
  for (const auto& f : frames) {
    if (f.width != w || f.height != h) {
      throw Error(ErrorCode::FrameShapeError, "frame is " + std::to_string(f.width) + "x" + std::to_string(f.height) +
                                                  ", expected " + std::to_string(w) + "x" + std::to_string(h));
    }
  }

  IngestResult result;
  std::vector<std::uint8_t> active(w * h, 0), fresh(w * h, 0);
  for (std::size_t k = 0; k < w * h; ++k) active[k] = frames[0].values[k] >= threshold;

  for (std::size_t f = 1; f < frames.size(); ++f) {
    std::fill(fresh.begin(), fresh.end(), 0);
    bool any = false;
    for (std::size_t k = 0; k < w * h; ++k) {
      if (!active[k] && frames[f].values[k] >= threshold) fresh[k] = 1, any = true;
    }
    if (!any) {
      result.empty_frames.push_back(f);
      continue;
    }
    // Boundary: fresh pixels 4-adjacent to a pixel still inactive in this frame.
    auto inactive = [&](std::size_t c, std::size_t r) { return !active[r * w + c] && !fresh[r * w + c]; };
    std::vector<std::size_t> boundary;
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        if (!fresh[r * w + c]) continue;
        const bool edge = (c > 0 && inactive(c - 1, r)) || (c + 1 < w && inactive(c + 1, r)) ||
                          (r > 0 && inactive(c, r - 1)) || (r + 1 < h && inactive(c, r + 1));
        if (edge) boundary.push_back(r * w + c);
      }
    }
    std::vector<std::size_t> picked;
    if (boundary.size() <= per_frame_samples) {
      picked = boundary;
    } else {
      Rng rng(derive_seed({seed, static_cast<std::uint64_t>(f)}));
      std::sample(boundary.begin(), boundary.end(), std::back_inserter(picked), per_frame_samples, rng);
    }
    for (std::size_t idx : picked) {
      const double x = (static_cast<double>(idx % w) + 0.5) * pixel_size;
      const double y = (static_cast<double>(idx / w) + 0.5) * pixel_size;
      result.anchors.push_back({{x, y}, timestamps[f]});
    }
    for (std::size_t k = 0; k < w * h; ++k) active[k] |= fresh[k];
  }
  if (result.anchors.empty()) {
    throw Error(ErrorCode::EmptyGrowth, "no frame shows newly activated pixels");
  }
  return result;
}

inline IngestResult extract_anchors(const FrameManifest& manifest, std::size_t per_frame_samples, std::uint64_t seed) {
  manifest.validate();
  std::vector<GrayImage> frames;
  std::vector<double> times;
  for (const auto& e : manifest.entries) {
    frames.push_back(read_pgm(e.path));
    times.push_back(e.timestamp);
  }
  return extract_anchors_from_images(frames, times, manifest.pixel_size, manifest.threshold, per_frame_samples, seed);
}

/// Binary frames of a disk of radius speed * (t - t0) around `center`
/// (pixel units), for round-trip checks and demos.
inline std::vector<GrayImage> radial_growth_frames(std::size_t width, std::size_t height, Point2 center, double speed,
                                                   double t0, std::span<const double> timestamps) {
  std::vector<GrayImage> frames;
  for (double t : timestamps) {
    GrayImage img{width, height, std::vector<double>(width * height, 0.0)};
    const double radius = speed * (t - t0);
    for (std::size_t r = 0; r < height; ++r) {
      for (std::size_t c = 0; c < width; ++c) {
        const Point2 p{static_cast<double>(c) + 0.5, static_cast<double>(r) + 0.5};
        if (radius >= 0.0 && distance(p, center) <= radius) img.values[r * width + c] = 1.0;
      }
    }
    frames.push_back(std::move(img));
  }
  return frames;
}

}  // namespace srcloc
