#include "evtexture/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include "json.hpp"
#include <regex>
#include <sstream>

namespace evtexture {

static_assert(std::endian::native == std::endian::little, "event/voxel IO assumes little-endian");

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

template <typename V>
void put(std::string& buf, V v) {
  char bytes[sizeof(V)];
  std::memcpy(bytes, &v, sizeof(V));
  buf.append(bytes, sizeof(V));
}

template <typename V>
V get(const char* p) {
  V v;
  std::memcpy(&v, p, sizeof(V));
  return v;
}

void finalize_window(EventStream& s) {
  if (s.events.empty()) {
    s.t_start = s.t_end = 0.0;
  } else {
    s.t_start = s.events.front().t;
    s.t_end = s.events.back().t;
  }
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void write_events_binary(const fs::path& path, const EventStream& stream) {
  if (stream.width > 0xFFFF || stream.height > 0xFFFF) {
    throw InvalidInput("write_events_binary: resolution exceeds uint16");
  }
  std::string buf;
  buf.reserve(kEventHeaderBytes + stream.size() * kEventRecordBytes);
  buf.append("EVT1", 4);
  put<std::uint16_t>(buf, static_cast<std::uint16_t>(stream.width));
  put<std::uint16_t>(buf, static_cast<std::uint16_t>(stream.height));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(stream.size()));
  put<std::uint32_t>(buf, 0);
  for (const Event& e : stream.events) {
    put<std::uint16_t>(buf, static_cast<std::uint16_t>(e.x));
    put<std::uint16_t>(buf, static_cast<std::uint16_t>(e.y));
    put<double>(buf, e.t);
    put<std::int8_t>(buf, static_cast<std::int8_t>(e.p));
  }
  std::ofstream out = open_out(path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

EventStream read_events_binary(const fs::path& path) {
  const std::string buf = read_text_file(path);
  if (buf.size() < kEventHeaderBytes || buf.compare(0, 4, "EVT1") != 0) {
    throw IoError("not an EVT1 event file: " + path.string());
  }
  EventStream s;
  s.width = get<std::uint16_t>(buf.data() + 4);
  s.height = get<std::uint16_t>(buf.data() + 6);
  const auto count = get<std::uint32_t>(buf.data() + 8);
  if (buf.size() != kEventHeaderBytes + std::size_t{count} * kEventRecordBytes) {
    throw IoError("truncated EVT1 event file: " + path.string());
  }
  s.events.resize(count);
  const char* p = buf.data() + kEventHeaderBytes;
  for (std::uint32_t i = 0; i < count; ++i, p += kEventRecordBytes) {
    Event& e = s.events[i];
    e.x = get<std::uint16_t>(p);
    e.y = get<std::uint16_t>(p + 2);
    e.t = get<double>(p + 4);
    e.p = get<std::int8_t>(p + 12);
  }
  finalize_window(s);
  s.validate();
  return s;
}

void write_events_csv(const fs::path& path, const EventStream& stream) {
  std::ostringstream ss;
  ss << "x,y,t,p\n";
  ss.precision(17);
  for (const Event& e : stream.events) ss << e.x << ',' << e.y << ',' << e.t << ',' << e.p << '\n';
  write_text_file(path, ss.str());
}

EventStream read_events_csv(const fs::path& path, int width, int height) {
  std::istringstream in(read_text_file(path));
  EventStream s;
  s.width = width;
  s.height = height;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty event CSV: " + path.string());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Event e;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream ls(line);
    if (!(ls >> e.x >> c1 >> e.y >> c2 >> e.t >> c3 >> e.p) || c1 != ',' || c2 != ',' ||
        c3 != ',') {
      throw IoError("malformed event CSV line " + std::to_string(lineno) + ": " + path.string());
    }
    s.events.push_back(e);
  }
  finalize_window(s);
  s.validate();
  return s;
}

EventStream read_events(const fs::path& path, int width, int height) {
  if (path.extension() == ".csv") return read_events_csv(path, width, height);
  return read_events_binary(path);
}

void write_npy_f32(const fs::path& path, const std::vector<float>& data,
                   const std::vector<std::size_t>& shape) {
  std::string shape_str = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    shape_str += std::to_string(shape[i]);
    shape_str += (shape.size() == 1 || i + 1 < shape.size()) ? "," : "";
    if (i + 1 < shape.size()) shape_str += " ";
  }
  shape_str += ")";
  std::string header =
      "{'descr': '<f4', 'fortran_order': False, 'shape': " + shape_str + ", }";
  // magic(6) + version(2) + len(2) + header + '\n' padded to 64 bytes
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header += '\n';

  std::string buf("\x93NUMPY\x01\x00", 8);
  put<std::uint16_t>(buf, static_cast<std::uint16_t>(header.size()));
  buf += header;
  buf.append(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(float));
  std::ofstream out = open_out(path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<float> read_npy_f32(const fs::path& path, std::vector<std::size_t>& shape) {
  const std::string buf = read_text_file(path);
  if (buf.size() < 10 || buf.compare(0, 6, "\x93NUMPY") != 0) {
    throw IoError("not an NPY file: " + path.string());
  }
  const auto header_len = get<std::uint16_t>(buf.data() + 8);
  const std::string header = buf.substr(10, header_len);
  if (header.find("'<f4'") == std::string::npos ||
      header.find("'fortran_order': False") == std::string::npos) {
    throw IoError("unsupported NPY dtype/order (need <f4, C order): " + path.string());
  }
  const std::regex shape_re(R"('shape':\s*\(([^)]*)\))");
  std::smatch m;
  if (!std::regex_search(header, m, shape_re)) throw IoError("NPY header without shape: " + path.string());
  shape.clear();
  std::size_t count = 1;
  std::istringstream dims(m[1].str());
  std::string tok;
  while (std::getline(dims, tok, ',')) {
    if (tok.find_first_not_of(' ') == std::string::npos) continue;
    shape.push_back(std::stoull(tok));
    count *= shape.back();
  }
  const std::size_t offset = 10 + header_len;
  if (buf.size() != offset + count * sizeof(float)) throw IoError("truncated NPY file: " + path.string());
  std::vector<float> data(count);
  std::memcpy(data.data(), buf.data() + offset, count * sizeof(float));
  return data;
}

void write_voxel(const fs::path& npy_path, const VoxelGrid& grid) {
  const auto& m = grid.bins.matrix();
  std::vector<float> data(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.size(); ++i) data[static_cast<std::size_t>(i)] = static_cast<float>(m.data()[i]);
  write_npy_f32(npy_path, data,
                {static_cast<std::size_t>(grid.bin_count()), static_cast<std::size_t>(grid.height()),
                 static_cast<std::size_t>(grid.width())});
  nlohmann::json side = {{"B", grid.bin_count()}, {"normalized", grid.normalized}, {"eta", grid.eta}};
  write_text_file(npy_path.string() + ".json", side.dump(2) + "\n");
}

VoxelGrid read_voxel(const fs::path& npy_path) {
  std::vector<std::size_t> shape;
  const std::vector<float> data = read_npy_f32(npy_path, shape);
  if (shape.size() != 3) throw IoError("voxel NPY must be 3-D (B, H, W): " + npy_path.string());
  VoxelGrid g;
  g.bins = Tensor<double>(static_cast<int>(shape[0]), static_cast<int>(shape[1]), static_cast<int>(shape[2]));
  for (std::size_t i = 0; i < data.size(); ++i) g.bins.data()[i] = data[i];
  const fs::path side_path = npy_path.string() + ".json";
  if (fs::exists(side_path)) {
    const auto side = nlohmann::json::parse(read_text_file(side_path));
    if (side.at("B").get<int>() != g.bin_count()) {
      throw IoError("voxel sidecar B disagrees with array: " + side_path.string());
    }
    g.normalized = side.at("normalized").get<bool>();
    g.eta = side.at("eta").get<double>();
  }
  return g;
}

Image read_png(const fs::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + img.message);
  }
  const bool gray = (img.format & PNG_FORMAT_FLAG_COLOR) == 0;
  img.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const int ch = gray ? 1 : 3;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    throw IoError("cannot decode PNG " + path.string() + ": " + img.message);
  }
  const int h = static_cast<int>(img.height);
  const int w = static_cast<int>(img.width);
  Image out(ch, h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        out(c, y, x) = static_cast<float>(buf[static_cast<std::size_t>((y * w + x) * ch + c)]) / 255.0f;
      }
    }
  }
  return out;
}

void write_png(const fs::path& path, const Image& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw InvalidInput("write_png: need 1 or 3 channels, got " + std::to_string(image.channels()));
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const int ch = image.channels();
  const int h = image.height();
  const int w = image.width();
  std::vector<png_byte> buf(static_cast<std::size_t>(h * w * ch));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        buf[static_cast<std::size_t>((y * w + x) * ch + c)] =
            static_cast<png_byte>(std::lround(quantize_u8(image(c, y, x)) * 255.0f));
      }
    }
  }
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(w);
  img.height = static_cast<png_uint_32>(h);
  img.format = ch == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, buf.data(), 0, nullptr)) {
    throw IoError("cannot write PNG " + path.string() + ": " + img.message);
  }
}

std::vector<fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FrameSequence read_frame_dir(const fs::path& dir, double fps) {
  FrameSequence seq;
  seq.fps = fps;
  for (const fs::path& p : list_pngs(dir)) seq.frames.push_back(read_png(p));
  if (seq.frames.empty()) throw IoError("no PNG frames in " + dir.string());
  return seq;
}

void write_frame_dir(const fs::path& dir, const FrameSequence& frames) {
  fs::create_directories(dir);
  char name[32];
  for (int t = 0; t < frames.size(); ++t) {
    std::snprintf(name, sizeof(name), "%06d.png", t);
    write_png(dir / name, frames[t]);
  }
}

}  // namespace evtexture
