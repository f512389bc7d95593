#pragma once

#include <algorithm>
#include <cctype>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stabilitykit/error.hpp"
#include "stabilitykit/image.hpp"
#include "stabilitykit/rng.hpp"

namespace stabilitykit::io {

inline constexpr double kDefaultFps = 30.0;

// ---------------------------------------------------------------------------
// BT.601 full-range colour conversion.

namespace detail {

inline std::uint8_t clamp8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

inline std::array<std::uint8_t, 3> rgb_to_yuv(int r, int g, int b) {
  return {clamp8(0.299 * r + 0.587 * g + 0.114 * b),
          clamp8(128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b),
          clamp8(128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b)};
}

inline std::array<std::uint8_t, 3> yuv_to_rgb_rounded(int y, int u, int v) {
  return {clamp8(y + 1.402 * (v - 128)), clamp8(y - 0.344136 * (u - 128) - 0.714136 * (v - 128)),
          clamp8(y + 1.772 * (u - 128))};
}

// Decode, then if the rounded RGB does not re-encode to the same YUV, pick the
// neighbour within +-1 per channel that does. Every YUV triple produced by
// rgb_to_yuv has such a neighbour, so encode(decode(yuv)) == yuv on that set.
inline std::array<std::uint8_t, 3> yuv_to_rgb(int y, int u, int v) {
  const auto base = yuv_to_rgb_rounded(y, u, v);
  const std::array<std::uint8_t, 3> want{static_cast<std::uint8_t>(y), static_cast<std::uint8_t>(u),
                                         static_cast<std::uint8_t>(v)};
  if (rgb_to_yuv(base[0], base[1], base[2]) == want) return base;
  for (int dr = -1; dr <= 1; ++dr)
    for (int dg = -1; dg <= 1; ++dg)
      for (int db = -1; db <= 1; ++db) {
        const int r = base[0] + dr, g = base[1] + dg, b = base[2] + db;
        if (r < 0 || g < 0 || b < 0 || r > 255 || g > 255 || b > 255) continue;
        if (rgb_to_yuv(r, g, b) == want)
          return {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                  static_cast<std::uint8_t>(b)};
      }
  return base;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// YUV4MPEG2

enum class Chroma { k420, k444, kMono };

struct Y4mHeader {
  int width = 0;
  int height = 0;
  double fps = kDefaultFps;
  Chroma chroma = Chroma::k420;
};

inline Y4mHeader parse_y4m_header(std::string_view line) {
  constexpr std::string_view magic = "YUV4MPEG2";
  if (line.substr(0, magic.size()) != magic) throw ParseError("missing YUV4MPEG2 magic");
  Y4mHeader h;
  std::istringstream tokens{std::string(line.substr(magic.size()))};
  std::string tok;
  auto to_int = [](std::string_view s, const char* what) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(std::string("bad ") + what);
    return v;
  };
  while (tokens >> tok) {
    const std::string_view body = std::string_view(tok).substr(1);
    switch (tok[0]) {
      case 'W': h.width = to_int(body, "width"); break;
      case 'H': h.height = to_int(body, "height"); break;
      case 'F': {
        const auto colon = body.find(':');
        if (colon == std::string_view::npos) throw ParseError("bad frame rate");
        const int num = to_int(body.substr(0, colon), "frame rate");
        const int den = to_int(body.substr(colon + 1), "frame rate");
        if (num <= 0 || den <= 0) throw ParseError("bad frame rate");
        h.fps = static_cast<double>(num) / den;
        break;
      }
      case 'C':
        if (body.starts_with("444")) h.chroma = Chroma::k444;
        else if (body.starts_with("420")) h.chroma = Chroma::k420;
        else if (body.starts_with("mono")) h.chroma = Chroma::kMono;
        else throw ParseError("unsupported chroma sampling " + tok);
        break;
      default: break;  // I, A, X carry nothing we need
    }
  }
  if (h.width <= 0 || h.height <= 0) throw ParseError("Y4M header lacks W/H");
  return h;
}

inline FrameSequence read_y4m(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty Y4M stream");
  const Y4mHeader h = parse_y4m_header(line);
  const std::size_t luma = static_cast<std::size_t>(h.width) * h.height;
  const int cw = h.chroma == Chroma::k420 ? (h.width + 1) / 2 : h.width;
  const int ch = h.chroma == Chroma::k420 ? (h.height + 1) / 2 : h.height;
  const std::size_t chroma = h.chroma == Chroma::kMono ? 0 : static_cast<std::size_t>(cw) * ch;

  std::vector<Frame> frames;
  std::vector<std::uint8_t> buf(luma + 2 * chroma);
  while (std::getline(in, line)) {
    if (in.eof()) {
      if (line.empty()) break;
      throw TruncatedError("truncated marker at frame " + std::to_string(frames.size()),
                           frames.size());
    }
    if (!line.starts_with("FRAME")) throw ParseError("expected FRAME marker at frame " +
                                                     std::to_string(frames.size()));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size())
      throw TruncatedError("truncated payload in frame " + std::to_string(frames.size()),
                           frames.size());
    std::vector<std::uint8_t> rgb(luma * 3);
    for (int y = 0; y < h.height; ++y)
      for (int x = 0; x < h.width; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * h.width + x;
        int u = 128, v = 128;
        if (h.chroma != Chroma::kMono) {
          const std::size_t ci = h.chroma == Chroma::k420
                                     ? static_cast<std::size_t>(y / 2) * cw + x / 2
                                     : i;
          u = buf[luma + ci];
          v = buf[luma + chroma + ci];
        }
        const auto px = detail::yuv_to_rgb(buf[i], u, v);
        std::copy(px.begin(), px.end(), rgb.begin() + static_cast<std::ptrdiff_t>(3 * i));
      }
    frames.emplace_back(h.width, h.height, std::move(rgb));
  }
  if (frames.empty()) throw EmptyInput("Y4M stream has no frames");
  if (frames.size() < 2)
    throw InsufficientFrames("a video needs at least 2 frames", 2);
  return FrameSequence(std::move(frames), h.fps);
}

inline FrameSequence load_y4m(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_y4m(in);
}

// Frame rate is written as a rational with denominator 1000 unless integral.
inline void write_y4m(std::ostream& out, const FrameSequence& seq, Chroma chroma = Chroma::k444) {
  if (seq.size() == 0) throw EmptyInput("cannot write an empty sequence");
  const int w = seq.width(), h = seq.height();
  long num = std::lround(seq.fps() * 1000.0), den = 1000;
  if (num % 1000 == 0) {
    num /= 1000;
    den = 1;
  }
  out << "YUV4MPEG2 W" << w << " H" << h << " F" << num << ':' << den << " Ip A1:1 "
      << (chroma == Chroma::k444 ? "C444" : chroma == Chroma::k420 ? "C420jpeg" : "Cmono") << '\n';
  const std::size_t n = static_cast<std::size_t>(w) * h;
  const int cw = (w + 1) / 2, chh = (h + 1) / 2;
  for (const auto& f : seq.frames()) {
    std::vector<std::uint8_t> y(n), u(n), v(n);
    const auto& px = f.rgb();
    for (std::size_t i = 0; i < n; ++i) {
      const auto yuv = detail::rgb_to_yuv(px[3 * i], px[3 * i + 1], px[3 * i + 2]);
      y[i] = yuv[0];
      u[i] = yuv[1];
      v[i] = yuv[2];
    }
    out << "FRAME\n";
    out.write(reinterpret_cast<const char*>(y.data()), static_cast<std::streamsize>(n));
    if (chroma == Chroma::k444) {
      out.write(reinterpret_cast<const char*>(u.data()), static_cast<std::streamsize>(n));
      out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n));
    } else if (chroma == Chroma::k420) {
      for (const auto* plane : {&u, &v}) {
        std::vector<std::uint8_t> sub(static_cast<std::size_t>(cw) * chh);
        for (int cy = 0; cy < chh; ++cy)
          for (int cx = 0; cx < cw; ++cx) {
            int sum = 0, cnt = 0;
            for (int dy = 0; dy < 2; ++dy)
              for (int dx = 0; dx < 2; ++dx) {
                const int sx = 2 * cx + dx, sy = 2 * cy + dy;
                if (sx < w && sy < h) {
                  sum += (*plane)[static_cast<std::size_t>(sy) * w + sx];
                  ++cnt;
                }
              }
            sub[static_cast<std::size_t>(cy) * cw + cx] =
                static_cast<std::uint8_t>((sum + cnt / 2) / cnt);
          }
        out.write(reinterpret_cast<const char*>(sub.data()), static_cast<std::streamsize>(sub.size()));
      }
    }
  }
}

inline void save_y4m(const std::filesystem::path& path, const FrameSequence& seq,
                     Chroma chroma = Chroma::k444) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  write_y4m(out, seq, chroma);
}

// ---------------------------------------------------------------------------
// Binary PPM (P6) / PGM (P5), maxval 255.

namespace detail {

inline std::string pnm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace detail

inline Frame read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  const std::string magic = detail::pnm_token(in);
  if (magic != "P5" && magic != "P6") throw ParseError(path.string() + ": not a binary PPM/PGM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(detail::pnm_token(in));
    h = std::stoi(detail::pnm_token(in));
    maxval = std::stoi(detail::pnm_token(in));
  } catch (const std::exception&) {
    throw ParseError(path.string() + ": malformed header");
  }
  if (w <= 0 || h <= 0 || maxval != 255) throw ParseError(path.string() + ": unsupported header");
  const int channels = magic == "P6" ? 3 : 1;
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw TruncatedError(path.string() + ": truncated pixel data", 0);
  if (channels == 3) return Frame(w, h, std::move(raw));
  std::vector<std::uint8_t> rgb(raw.size() * 3);
  for (std::size_t i = 0; i < raw.size(); ++i) rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = raw[i];
  return Frame(w, h, std::move(rgb));
}

inline void write_ppm(const std::filesystem::path& path, const Frame& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << "P6\n" << f.width() << ' ' << f.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(f.rgb().data()),
            static_cast<std::streamsize>(f.rgb().size()));
}

// Frames from every .ppm/.pgm in a directory, in lexicographic name order.
// fps comes from an optional meta.json sidecar ({"fps": <number>}).
inline FrameSequence load_frame_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ParseError(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".ppm" || ext == ".pgm")) files.push_back(e.path());
  }
  if (files.empty()) throw EmptyInput(dir.string() + " contains no PPM/PGM frames");
  std::sort(files.begin(), files.end());

  double fps = kDefaultFps;
  if (const auto meta = dir / "meta.json"; fs::exists(meta)) {
    std::ifstream in(meta);
    try {
      const auto j = nlohmann::json::parse(in);
      if (j.contains("fps")) fps = j.at("fps").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("meta.json: " + std::string(e.what()));
    }
  }

  std::vector<Frame> frames;
  frames.reserve(files.size());
  for (const auto& p : files) {
    frames.push_back(read_pnm(p));
    if (frames.back().width() != frames.front().width() ||
        frames.back().height() != frames.front().height())
      throw DimensionMismatch(p.string() + " differs in size from " + files.front().string());
  }
  if (frames.size() < 2) throw InsufficientFrames("a video needs at least 2 frames", 2);
  return FrameSequence(std::move(frames), fps);
}

// Y4M file or frame directory, by inspection.
inline FrameSequence load_video(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) return load_frame_dir(path);
  return load_y4m(path);
}

// ---------------------------------------------------------------------------
// Clip sampling: n frames at stride tau from a seeded uniform start.

inline std::size_t clip_span(std::size_t n, std::size_t tau) { return (n - 1) * tau + 1; }

inline std::size_t sample_clip_start(std::size_t length, std::size_t n, std::size_t tau,
                                     std::uint64_t seed) {
  if (n == 0 || tau == 0) throw ConfigError("clip length and interval must be positive");
  const std::size_t need = clip_span(n, tau);
  if (length < need)
    throw InsufficientFrames("clip needs " + std::to_string(need) + " frames, video has " +
                                 std::to_string(length),
                             need);
  Rng rng(seed);
  return static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(length - need)));
}

inline Clip clip_at(const FrameSequence& seq, std::size_t start, std::size_t n, std::size_t tau) {
  if (start + clip_span(n, tau) > seq.size())
    throw InsufficientFrames("clip exceeds sequence", start + clip_span(n, tau));
  Clip c;
  c.n = n;
  c.tau = tau;
  for (std::size_t k = 0; k < n; ++k) {
    c.source_indices.push_back(start + k * tau);
    c.frames.push_back(seq[start + k * tau]);
  }
  return c;
}

inline Clip sample_clip(const FrameSequence& seq, std::size_t n, std::size_t tau,
                        std::uint64_t seed) {
  return clip_at(seq, sample_clip_start(seq.size(), n, tau, seed), n, tau);
}

}  // namespace stabilitykit::io
