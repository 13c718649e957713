#include "flowhub/zip.hpp"

#include <zlib.h>

#include <ctime>

#include "flowhub/error.hpp"

namespace flowhub::zip {
namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::uint16_t kUtf8Flag = 0x0800;

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put32(std::string& out, std::uint32_t v) {
  put16(out, static_cast<std::uint16_t>(v & 0xFFFF));
  put16(out, static_cast<std::uint16_t>(v >> 16));
}

std::uint16_t get16(std::string_view in, std::size_t pos) {
  if (pos + 2 > in.size()) throw Error(ErrorCode::invalid_argument, "truncated zip archive");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(in[pos]) |
                                    (static_cast<unsigned char>(in[pos + 1]) << 8));
}

std::uint32_t get32(std::string_view in, std::size_t pos) {
  return static_cast<std::uint32_t>(get16(in, pos)) |
         (static_cast<std::uint32_t>(get16(in, pos + 2)) << 16);
}

struct DosTime {
  std::uint16_t time;
  std::uint16_t date;
};

DosTime to_dos(Timestamp t) {
  std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  ::gmtime_r(&tt, &tm);
  if (tm.tm_year < 80) return {0, static_cast<std::uint16_t>((0 << 9) | (1 << 5) | 1)};
  auto time = static_cast<std::uint16_t>((tm.tm_hour << 11) | (tm.tm_min << 5) | (tm.tm_sec / 2));
  auto date =
      static_cast<std::uint16_t>(((tm.tm_year - 80) << 9) | ((tm.tm_mon + 1) << 5) | tm.tm_mday);
  return {time, date};
}

std::uint32_t crc_of(std::string_view data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t offset = 0;
  while (offset < data.size()) {
    auto chunk = static_cast<uInt>(std::min<std::size_t>(data.size() - offset, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data() + offset), chunk);
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string deflate_raw(std::string_view data) {
  z_stream zs{};
  if (deflateInit2(&zs, 6, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    throw Error(ErrorCode::io_error, "deflateInit2 failed");
  std::string out(deflateBound(&zs, static_cast<uLong>(data.size())), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = ::deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error(ErrorCode::io_error, "deflate failed");
  out.resize(zs.total_out);
  return out;
}

std::string inflate_raw(std::string_view data, std::uint64_t expected, std::uint64_t cap) {
  if (expected > cap) throw Error(ErrorCode::size_limit, "zip entry exceeds decompression cap");
  z_stream zs{};
  if (inflateInit2(&zs, -15) != Z_OK) throw Error(ErrorCode::io_error, "inflateInit2 failed");
  std::string out(static_cast<std::size_t>(expected), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = ::inflate(&zs, Z_FINISH);
  const bool full = zs.avail_out == 0;
  const uLong total = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END && full)
    throw Error(ErrorCode::size_limit, "zip entry inflates past its declared size");
  if (rc != Z_STREAM_END || total != expected)
    throw Error(ErrorCode::invalid_argument, "corrupt deflate stream in zip entry");
  return out;
}

bool unsafe_path(std::string_view path) {
  if (path.empty() || path.front() == '/' || path.find('\\') != std::string_view::npos) return true;
  for (const auto& part : text::split(path, '/')) {
    if (part == "..") return true;
  }
  return false;
}

}  // namespace

std::string write(const std::vector<Entry>& entries, Timestamp mtime) {
  const DosTime dos = to_dos(mtime);
  std::string out;
  std::string central;
  for (const auto& entry : entries) {
    if (entry.data.size() > 0xFFFFFFFEu || entry.path.size() > 0xFFFF)
      throw Error(ErrorCode::size_limit, "zip64 archives are not supported: " + entry.path);
    const std::uint32_t crc = crc_of(entry.data);
    std::string packed = deflate_raw(entry.data);
    std::uint16_t method = 8;
    if (packed.size() >= entry.data.size()) {
      packed = entry.data;
      method = 0;
    }
    const auto offset = static_cast<std::uint32_t>(out.size());

    put32(out, kLocalSig);
    put16(out, 20);
    put16(out, kUtf8Flag);
    put16(out, method);
    put16(out, dos.time);
    put16(out, dos.date);
    put32(out, crc);
    put32(out, static_cast<std::uint32_t>(packed.size()));
    put32(out, static_cast<std::uint32_t>(entry.data.size()));
    put16(out, static_cast<std::uint16_t>(entry.path.size()));
    put16(out, 0);
    out += entry.path;
    out += packed;

    put32(central, kCentralSig);
    put16(central, (3 << 8) | 20);  // made by: unix
    put16(central, 20);
    put16(central, kUtf8Flag);
    put16(central, method);
    put16(central, dos.time);
    put16(central, dos.date);
    put32(central, crc);
    put32(central, static_cast<std::uint32_t>(packed.size()));
    put32(central, static_cast<std::uint32_t>(entry.data.size()));
    put16(central, static_cast<std::uint16_t>(entry.path.size()));
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put32(central, 0100644u << 16);
    put32(central, offset);
    central += entry.path;
  }
  const auto cd_offset = static_cast<std::uint32_t>(out.size());
  out += central;
  put32(out, kEndSig);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put32(out, static_cast<std::uint32_t>(central.size()));
  put32(out, cd_offset);
  put16(out, 0);
  return out;
}

bool looks_like_zip(std::string_view bytes) noexcept {
  return bytes.size() >= 22 && bytes.substr(0, 2) == "PK";
}

std::vector<Entry> read(std::string_view in, const Limits& limits) {
  if (in.size() < 22) throw Error(ErrorCode::invalid_argument, "not a zip archive");
  std::size_t eocd = std::string_view::npos;
  const std::size_t floor = in.size() > 22 + 0xFFFF ? in.size() - 22 - 0xFFFF : 0;
  for (std::size_t pos = in.size() - 22 + 1; pos-- > floor;) {
    if (get32(in, pos) == kEndSig) {
      eocd = pos;
      break;
    }
  }
  if (eocd == std::string_view::npos)
    throw Error(ErrorCode::invalid_argument, "zip end-of-central-directory record not found");

  const std::uint16_t count = get16(in, eocd + 10);
  const std::uint32_t cd_size = get32(in, eocd + 12);
  const std::uint32_t cd_offset = get32(in, eocd + 16);
  if (count == 0xFFFF || cd_offset == 0xFFFFFFFFu)
    throw Error(ErrorCode::invalid_argument, "zip64 archives are not supported");
  if (static_cast<std::uint64_t>(cd_offset) + cd_size > in.size())
    throw Error(ErrorCode::invalid_argument, "zip central directory out of bounds");
  if (count > limits.max_entries) throw Error(ErrorCode::size_limit, "too many zip entries");

  struct Header {
    std::string path;
    std::uint16_t flags, method;
    std::uint32_t crc, csize, usize, local_offset;
  };
  std::vector<Header> headers;
  std::uint64_t declared_total = 0;
  std::size_t pos = cd_offset;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (get32(in, pos) != kCentralSig)
      throw Error(ErrorCode::invalid_argument, "bad zip central directory signature");
    Header h;
    h.flags = get16(in, pos + 8);
    h.method = get16(in, pos + 10);
    h.crc = get32(in, pos + 16);
    h.csize = get32(in, pos + 20);
    h.usize = get32(in, pos + 24);
    const std::uint16_t name_len = get16(in, pos + 28);
    const std::uint16_t extra_len = get16(in, pos + 30);
    const std::uint16_t comment_len = get16(in, pos + 32);
    h.local_offset = get32(in, pos + 42);
    if (pos + 46 + name_len > in.size())
      throw Error(ErrorCode::invalid_argument, "truncated zip central directory");
    h.path = std::string(in.substr(pos + 46, name_len));
    pos += 46u + name_len + extra_len + comment_len;
    if (h.csize == 0xFFFFFFFFu || h.usize == 0xFFFFFFFFu || h.local_offset == 0xFFFFFFFFu)
      throw Error(ErrorCode::invalid_argument, "zip64 archives are not supported");
    declared_total += h.usize;
    headers.push_back(std::move(h));
  }
  if (declared_total > limits.max_total_uncompressed)
    throw Error(ErrorCode::size_limit, "archive decompresses to " + std::to_string(declared_total) +
                                           " bytes, over the cap");

  std::vector<Entry> entries;
  std::uint64_t produced = 0;
  for (const auto& h : headers) {
    if (!h.path.empty() && h.path.back() == '/') continue;
    if (unsafe_path(h.path)) throw Error(ErrorCode::invalid_argument, "unsafe zip path: " + h.path);
    if (h.flags & 0x1) throw Error(ErrorCode::invalid_argument, "encrypted zip entries unsupported");
    if (get32(in, h.local_offset) != kLocalSig)
      throw Error(ErrorCode::invalid_argument, "bad zip local header for " + h.path);
    const std::size_t data_start =
        h.local_offset + 30u + get16(in, h.local_offset + 26) + get16(in, h.local_offset + 28);
    if (data_start + h.csize > in.size())
      throw Error(ErrorCode::invalid_argument, "zip entry data out of bounds: " + h.path);
    std::string_view packed = in.substr(data_start, h.csize);
    std::string data;
    const std::uint64_t remaining = limits.max_total_uncompressed - produced;
    if (h.method == 0) {
      if (h.csize != h.usize)
        throw Error(ErrorCode::invalid_argument, "stored zip entry size mismatch: " + h.path);
      data = std::string(packed);
    } else if (h.method == 8) {
      data = inflate_raw(packed, h.usize, remaining);
    } else {
      throw Error(ErrorCode::invalid_argument,
                  "unsupported zip compression method " + std::to_string(h.method));
    }
    if (crc_of(data) != h.crc) throw Error(ErrorCode::invalid_argument, "crc mismatch: " + h.path);
    produced += data.size();
    entries.push_back({h.path, std::move(data)});
  }
  return entries;
}

}  // namespace flowhub::zip
