#include "mcvc/embstore.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace mcvc::embstore {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<char, 4> kMagic = {'M', 'C', 'V', 'C'};
constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff),
                     static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

json frame_to_json(const FrameRecord& f) {
  json j = json::object();
  j["index"] = f.index;
  j["timestamp_s"] = f.timestamp_s;
  j["embedding_row"] = f.embedding_row;
  j["gray_std"] = f.gray_std;
  j["brightness"] = f.brightness;
  j["confidence"] = f.confidence ? json(*f.confidence) : json(nullptr);
  j["luma8x8"] = base64_encode(f.luma8x8);
  if (f.corrupted) j["corrupted"] = true;
  return j;
}

FrameRecord frame_from_json(const json& j) {
  FrameRecord f;
  f.index = j.at("index").get<std::int64_t>();
  f.timestamp_s = j.at("timestamp_s").get<double>();
  f.embedding_row = j.at("embedding_row").get<std::uint32_t>();
  f.gray_std = j.at("gray_std").get<double>();
  f.brightness = j.at("brightness").get<double>();
  const json& c = j.at("confidence");
  if (!c.is_null()) f.confidence = c.get<double>();
  const auto luma = base64_decode(j.at("luma8x8").get<std::string>());
  if (luma.size() != f.luma8x8.size()) {
    throw FormatError("luma8x8 must decode to 64 bytes, got " +
                      std::to_string(luma.size()));
  }
  std::copy(luma.begin(), luma.end(), f.luma8x8.begin());
  if (auto it = j.find("corrupted"); it != j.end()) f.corrupted = it->get<bool>();
  return f;
}

std::string frame_label(const VideoEntry& v, const FrameRecord& f) {
  return v.video_id + "#" + std::to_string(f.index);
}

}  // namespace

const VideoEntry* EmbeddingStore::find(const std::string& video_id) const {
  for (const auto& v : manifest) {
    if (v.video_id == video_id) return &v;
  }
  return nullptr;
}

ValidationReport validate_store(const EmbeddingStore& store) {
  ValidationReport report;
  auto add = [&](std::string vid, std::optional<std::int64_t> frame, std::string kind,
                 std::string msg) {
    report.push_back({std::move(vid), frame, std::move(kind), std::move(msg)});
  };

  std::size_t rows = 0;
  if (store.dim == 0) {
    add("", std::nullopt, "dim", "embedding dimension must be positive");
  } else if (store.matrix.size() % store.dim != 0) {
    add("", std::nullopt, "shape", "matrix size is not a multiple of dim");
  } else {
    rows = store.matrix.size() / store.dim;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < store.dim; ++c) {
        if (!std::isfinite(store.matrix[r * store.dim + c])) {
          add("", std::nullopt, "non_finite",
              "non-finite value in embedding row " + std::to_string(r));
          break;
        }
      }
    }
  }

  std::size_t total_frames = 0;
  std::map<std::uint32_t, std::string> row_owner;
  for (const auto& v : store.manifest) {
    total_frames += v.frames.size();
    if (!(v.duration_s > 0.0) || !std::isfinite(v.duration_s)) {
      add(v.video_id, std::nullopt, "duration", "duration_s must be positive");
    }
    if (v.frame_count_total < static_cast<std::int64_t>(v.frames.size())) {
      add(v.video_id, std::nullopt, "frame_count",
          "frame_count_total is smaller than the number of frames");
    }
    try {
      (void)posted_epoch_seconds(v.posted_at);
    } catch (const Error&) {
      add(v.video_id, std::nullopt, "posted_at",
          "posted_at is not an ISO-8601 timestamp: '" + v.posted_at + "'");
    }
    for (std::size_t i = 0; i < v.frames.size(); ++i) {
      const auto& f = v.frames[i];
      if (i > 0 && f.index <= v.frames[i - 1].index) {
        add(v.video_id, f.index, "order", "frame indices must be strictly increasing");
      }
      if (f.index < 0 || f.index >= v.frame_count_total) {
        add(v.video_id, f.index, "index_range",
            "frame index outside [0, frame_count_total)");
      }
      if (!(f.gray_std >= 0.0) || !std::isfinite(f.gray_std)) {
        add(v.video_id, f.index, "gray_std", "gray_std must be finite and >= 0");
      }
      if (!(f.brightness >= 0.0 && f.brightness <= 255.0)) {
        add(v.video_id, f.index, "brightness", "brightness outside [0, 255]");
      }
      if (f.confidence && !(*f.confidence >= 0.0 && *f.confidence <= 1.0)) {
        add(v.video_id, f.index, "confidence", "confidence outside [0, 1]");
      }
      if (store.dim != 0 && f.embedding_row >= rows) {
        add(v.video_id, f.index, "embedding_row",
            "embedding_row " + std::to_string(f.embedding_row) + " >= rows " +
                std::to_string(rows));
      }
      auto [it, inserted] = row_owner.emplace(f.embedding_row, frame_label(v, f));
      if (!inserted) {
        add(v.video_id, f.index, "duplicate_row",
            "embedding_row " + std::to_string(f.embedding_row) + " shared by " +
                it->second + " and " + frame_label(v, f));
      }
    }
  }
  if (store.dim != 0 && store.matrix.size() % store.dim == 0 && rows != total_frames) {
    add("", std::nullopt, "row_count",
        "matrix has " + std::to_string(rows) + " rows but manifest lists " +
            std::to_string(total_frames) + " frames");
  }
  return report;
}

void write_matrix_file(const fs::path& file, std::uint32_t rows, std::uint32_t dim,
                       std::span<const float> values) {
  if (values.size() != static_cast<std::size_t>(rows) * dim) {
    throw InvalidArgument("write_matrix_file: values do not match rows*dim");
  }
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + file.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kFormatVersion);
  put_u32(out, rows);
  put_u32(out, dim);
  for (float x : values) put_u32(out, std::bit_cast<std::uint32_t>(x));
  if (!out) throw Error("write failed: " + file.string());
}

MatrixFile read_matrix_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError("missing matrix file: " + file.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 16) throw FormatError("matrix file too short: " + file.string());
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError("bad magic in " + file.string());
  }
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kFormatVersion) {
    throw FormatError("unsupported matrix version " + std::to_string(version));
  }
  MatrixFile m;
  m.rows = get_u32(bytes.data() + 8);
  m.dim = get_u32(bytes.data() + 12);
  const std::size_t count = static_cast<std::size_t>(m.rows) * m.dim;
  if (bytes.size() - 16 != count * 4) {
    throw FormatError("shape mismatch in " + file.string() + ": header says " +
                      std::to_string(m.rows) + "x" + std::to_string(m.dim) +
                      " but payload holds " + std::to_string((bytes.size() - 16) / 4) +
                      " floats");
  }
  m.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const float x = std::bit_cast<float>(get_u32(bytes.data() + 16 + 4 * i));
    if (!std::isfinite(x)) {
      throw FormatError("non-finite value at element " + std::to_string(i) + " of " +
                        file.string());
    }
    m.values[i] = x;
  }
  return m;
}

void write_store(const EmbeddingStore& store, const fs::path& dir) {
  const auto report = validate_store(store);
  if (!report.empty()) {
    std::string msg = "refusing to write invalid store (" +
                      std::to_string(report.size()) + " violations): ";
    msg += report.front().kind + ": " + report.front().message;
    throw InvalidArgument(msg);
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());

  std::ofstream manifest(dir / kManifestFile, std::ios::trunc);
  if (!manifest) throw Error("cannot write " + (dir / kManifestFile).string());
  for (const auto& v : store.manifest) {
    json j = json::object();
    j["video_id"] = v.video_id;
    j["posted_at"] = v.posted_at;
    j["duration_s"] = v.duration_s;
    j["frame_count_total"] = v.frame_count_total;
    j["frames"] = json::array();
    for (const auto& f : v.frames) j["frames"].push_back(frame_to_json(f));
    manifest << j.dump() << '\n';
  }
  if (!manifest) throw Error("write failed: " + (dir / kManifestFile).string());

  write_matrix_file(dir / kMatrixFile, static_cast<std::uint32_t>(store.rows()),
                    store.dim, store.matrix);

  std::ofstream meta(dir / kMetaFile, std::ios::trunc);
  meta << json{{"backbone_tag", store.backbone_tag}}.dump() << '\n';
}

EmbeddingStore read_store_unchecked(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw FormatError("store directory not found: " + dir.string());
  EmbeddingStore store;

  std::ifstream manifest(dir / kManifestFile);
  if (!manifest) throw FormatError("missing manifest: " + (dir / kManifestFile).string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      VideoEntry v;
      v.video_id = j.at("video_id").get<std::string>();
      v.posted_at = j.at("posted_at").get<std::string>();
      v.duration_s = j.at("duration_s").get<double>();
      v.frame_count_total = j.at("frame_count_total").get<std::int64_t>();
      for (const auto& f : j.at("frames")) v.frames.push_back(frame_from_json(f));
      store.manifest.push_back(std::move(v));
    } catch (const json::exception& e) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  auto m = read_matrix_file(dir / kMatrixFile);
  if (m.dim == 0) throw FormatError("matrix dim is 0");
  store.dim = m.dim;
  store.matrix = std::move(m.values);

  if (std::ifstream meta(dir / kMetaFile); meta) {
    try {
      store.backbone_tag = json::parse(meta).value("backbone_tag", "");
    } catch (const json::exception& e) {
      throw FormatError(std::string("bad store_meta.json: ") + e.what());
    }
  }

  return store;
}

EmbeddingStore read_store(const fs::path& dir) {
  EmbeddingStore store = read_store_unchecked(dir);
  const std::size_t rows = store.rows();
  std::size_t frames = 0;
  for (const auto& v : store.manifest) frames += v.frames.size();
  if (frames != rows) {
    throw FormatError("row-count mismatch: manifest lists " + std::to_string(frames) +
                      " frames, matrix has " + std::to_string(rows) + " rows");
  }
  for (const auto& v : store.manifest) {
    for (const auto& f : v.frames) {
      if (f.embedding_row >= rows) {
        throw FormatError("index error: " + frame_label(v, f) + " references row " +
                          std::to_string(f.embedding_row) + " >= " + std::to_string(rows));
      }
    }
  }
  if (const auto report = validate_store(store); !report.empty()) {
    throw FormatError("store invariant violated: " + report.front().kind + ": " +
                      report.front().message);
  }
  return store;
}

Matrix gather(const EmbeddingStore& store, std::span<const FrameRecord> frames) {
  Matrix out(frames.size(), store.dim);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto src = store.embedding(frames[i].embedding_row);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

int posted_year(const std::string& iso8601) {
  (void)posted_epoch_seconds(iso8601);
  return std::stoi(iso8601.substr(0, 4));
}

std::int64_t posted_epoch_seconds(const std::string& s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  int consumed = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &consumed) != 3 ||
      consumed != 10) {
    throw InvalidArgument("not an ISO-8601 date: '" + s + "'");
  }
  std::size_t pos = 10;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    int n = 0;
    if (std::sscanf(s.c_str() + pos + 1, "%2d:%2d%n", &h, &mi, &n) != 2 || n != 5) {
      throw InvalidArgument("bad time in '" + s + "'");
    }
    pos += 6;
    if (pos < s.size() && s[pos] == ':') {
      if (std::sscanf(s.c_str() + pos + 1, "%2d%n", &sec, &n) != 1 || n != 2) {
        throw InvalidArgument("bad seconds in '" + s + "'");
      }
      pos += 3;
      if (pos < s.size() && s[pos] == '.') {
        ++pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      }
    }
  }
  if (pos < s.size() && s[pos] == 'Z') ++pos;
  if (pos != s.size()) throw InvalidArgument("trailing characters in '" + s + "'");

  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) {
    throw InvalidArgument("out-of-range date/time in '" + s + "'");
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + sec;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += kB64Alphabet[(v >> 6) & 63];
    out += kB64Alphabet[v & 63];
  }
  if (const std::size_t rest = bytes.size() - i; rest > 0) {
    std::uint32_t v = bytes[i] << 16;
    if (rest == 2) v |= bytes[i + 1] << 8;
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += rest == 2 ? kB64Alphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (text.size() % 4 != 0) throw FormatError("base64 length not a multiple of 4");
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int q[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        q[k] = 0;
        ++pad;
      } else {
        if (pad > 0) throw FormatError("base64 data after padding");
        q[k] = value(c);
        if (q[k] < 0) throw FormatError("invalid base64 character");
      }
    }
    const std::uint32_t v = (q[0] << 18) | (q[1] << 12) | (q[2] << 6) | q[3];
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v & 0xff));
  }
  return out;
}

}  // namespace mcvc::embstore
