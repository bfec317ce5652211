#include "deeprepair/npy_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "deeprepair/errors.hpp"

namespace deeprepair {
namespace {

constexpr char kMagic[] = "\x93NUMPY";

std::vector<std::size_t> parse_shape(const std::string& header) {
  const auto open = header.find('(');
  const auto close = header.find(')', open);
  if (open == std::string::npos || close == std::string::npos)
    throw LoadError("npy: malformed header shape");
  std::vector<std::size_t> shape;
  std::string inner = header.substr(open + 1, close - open - 1);
  std::stringstream ss(inner);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto first = tok.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    shape.push_back(std::stoull(tok.substr(first)));
  }
  return shape;
}

}  // namespace

std::vector<std::uint8_t> read_npy_u8(const std::filesystem::path& path,
                                      std::vector<std::size_t>& shape_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("npy: cannot open " + path.string());
  char magic[6];
  in.read(magic, 6);
  if (!in || std::memcmp(magic, kMagic, 6) != 0)
    throw LoadError("npy: bad magic in " + path.string());
  std::uint8_t ver[2];
  in.read(reinterpret_cast<char*>(ver), 2);
  std::uint32_t header_len = 0;
  if (ver[0] == 1) {
    std::uint16_t len16 = 0;
    in.read(reinterpret_cast<char*>(&len16), 2);
    header_len = len16;
  } else {
    in.read(reinterpret_cast<char*>(&header_len), 4);
  }
  std::string header(header_len, '\0');
  in.read(header.data(), header_len);
  if (!in) throw LoadError("npy: truncated header in " + path.string());

  if (header.find("'descr': '|u1'") == std::string::npos &&
      header.find("\"descr\": \"|u1\"") == std::string::npos)
    throw LoadError("npy: expected uint8 ('|u1') in " + path.string());
  if (header.find("'fortran_order': False") == std::string::npos &&
      header.find("\"fortran_order\": false") == std::string::npos)
    throw LoadError("npy: expected C-order array in " + path.string());

  shape_out = parse_shape(header);
  std::size_t count = 1;
  for (std::size_t d : shape_out) count *= d;
  std::vector<std::uint8_t> data(count);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(count));
  if (!in) throw LoadError("npy: truncated data in " + path.string());
  return data;
}

void write_npy_u8(const std::filesystem::path& path,
                  const std::vector<std::uint8_t>& data,
                  const std::vector<std::size_t>& shape) {
  std::size_t count = 1;
  std::ostringstream dict;
  dict << "{'descr': '|u1', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    count *= shape[i];
    dict << shape[i];
    if (shape.size() == 1 || i + 1 < shape.size()) dict << ",";
    if (i + 1 < shape.size()) dict << " ";
  }
  dict << "), }";
  if (count != data.size())
    throw ValidationError("npy: shape does not match data size");

  std::string header = dict.str();
  const std::size_t unpadded = 6 + 2 + 2 + header.size() + 1;
  const std::size_t padded = (unpadded + 63) / 64 * 64;
  header.append(padded - unpadded, ' ');
  header.push_back('\n');

  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("npy: cannot write " + path.string());
  out.write(kMagic, 6);
  const std::uint8_t ver[2] = {1, 0};
  out.write(reinterpret_cast<const char*>(ver), 2);
  const std::uint16_t len = static_cast<std::uint16_t>(header.size());
  out.write(reinterpret_cast<const char*>(&len), 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
}

}  // namespace deeprepair
