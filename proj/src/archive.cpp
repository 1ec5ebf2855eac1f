#include "mousedyn/archive.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <openssl/evp.h>
#include <zlib.h>

#include "mousedyn/errors.hpp"

namespace mousedyn {

namespace {

std::string hex_digest(const unsigned char* digest, unsigned int len) {
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const std::streamsize got = in.gcount();
    if (got > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(got));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  return hex_digest(digest, len);
}

std::string sha256_hex(std::string_view data) {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, data.data(), data.size());
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  return hex_digest(digest, len);
}

namespace {

std::uint16_t rd16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t rd32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<unsigned char> inflate_raw(const unsigned char* src, std::size_t src_len,
                                       std::size_t expected) {
  std::vector<unsigned char> out(expected);
  z_stream zs;
  std::memset(&zs, 0, sizeof(zs));
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error("inflateInit2 failed");
  zs.next_in = const_cast<unsigned char*>(src);
  zs.avail_in = static_cast<uInt>(src_len);
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error("zip entry inflate failed (rc=" + std::to_string(rc) + ")");
  out.resize(out.size() - zs.avail_out);
  return out;
}

}  // namespace

std::size_t extract_zip(const std::filesystem::path& archive,
                        const std::filesystem::path& dest_dir) {
  std::ifstream in(archive, std::ios::binary);
  if (!in) throw Error("cannot open " + archive.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (data.size() < 22) throw Error("not a zip archive: " + archive.string());

  // End-of-central-directory record: signature 0x06054b50, within the final
  // 64KiB + 22 bytes (comment may follow).
  std::size_t eocd = std::string::npos;
  const std::size_t scan_start = data.size() > 65557 ? data.size() - 65557 : 0;
  for (std::size_t i = data.size() - 22 + 1; i-- > scan_start;) {
    if (rd32(&data[i]) == 0x06054b50) {
      eocd = i;
      break;
    }
  }
  if (eocd == std::string::npos) throw Error("zip central directory not found");

  const std::uint16_t n_entries = rd16(&data[eocd + 10]);
  const std::uint32_t cd_offset = rd32(&data[eocd + 16]);
  if (cd_offset == 0xFFFFFFFFu || n_entries == 0xFFFFu) {
    throw Error("zip64 archives are not supported: " + archive.string());
  }

  const std::filesystem::path dest = std::filesystem::weakly_canonical(dest_dir);
  std::filesystem::create_directories(dest);

  std::size_t written = 0;
  std::size_t p = cd_offset;
  for (std::uint16_t e = 0; e < n_entries; ++e) {
    if (p + 46 > data.size() || rd32(&data[p]) != 0x02014b50) {
      throw Error("corrupt zip central directory");
    }
    const std::uint16_t method = rd16(&data[p + 10]);
    const std::uint32_t comp_size = rd32(&data[p + 20]);
    const std::uint32_t uncomp_size = rd32(&data[p + 24]);
    const std::uint16_t name_len = rd16(&data[p + 28]);
    const std::uint16_t extra_len = rd16(&data[p + 30]);
    const std::uint16_t comment_len = rd16(&data[p + 32]);
    const std::uint32_t local_offset = rd32(&data[p + 42]);
    const std::string name(reinterpret_cast<const char*>(&data[p + 46]), name_len);
    p += 46u + name_len + extra_len + comment_len;

    if (name.empty()) continue;
    if (name.find("..") != std::string::npos || name.front() == '/') {
      throw Error("zip entry escapes destination: " + name);
    }
    const std::filesystem::path target = dest / name;
    if (name.back() == '/') {
      std::filesystem::create_directories(target);
      continue;
    }

    // Local header: sizes/name lengths may differ from the central record.
    if (local_offset + 30 > data.size() || rd32(&data[local_offset]) != 0x04034b50) {
      throw Error("corrupt zip local header for " + name);
    }
    const std::uint16_t lname = rd16(&data[local_offset + 26]);
    const std::uint16_t lextra = rd16(&data[local_offset + 28]);
    const std::size_t payload = local_offset + 30u + lname + lextra;
    if (payload + comp_size > data.size()) throw Error("truncated zip entry " + name);

    std::vector<unsigned char> content;
    if (method == 0) {
      content.assign(data.begin() + static_cast<std::ptrdiff_t>(payload),
                     data.begin() + static_cast<std::ptrdiff_t>(payload + comp_size));
    } else if (method == 8) {
      content = inflate_raw(&data[payload], comp_size, uncomp_size);
    } else {
      throw Error("unsupported zip compression method " + std::to_string(method) + " for " + name);
    }

    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary);
    if (!out) throw Error("cannot write " + target.string());
    out.write(reinterpret_cast<const char*>(content.data()),
              static_cast<std::streamsize>(content.size()));
    ++written;
  }
  return written;
}

}  // namespace mousedyn
