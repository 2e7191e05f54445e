#include "diffc/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "diffc/error.hpp"

namespace diffc {
namespace {

static_assert(std::endian::native == std::endian::little, "DFC1 codec assumes a little-endian host");

template <class T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }

  template <class T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  void read_floats(std::vector<float>& out, std::size_t count) {
    need(count * sizeof(float));
    out.resize(count);
    std::memcpy(out.data(), bytes_.data() + pos_, count * sizeof(float));
    pos_ += count * sizeof(float);
  }

  void need(std::size_t n) const {
    require(bytes_.size() - pos_ >= n, Errc::TruncatedFile, "container record truncated");
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void append_tensor(std::vector<std::uint8_t>& out, const Tensor& t) {
  out.insert(out.end(), {'D', 'F', 'C', '1'});
  put<std::uint8_t>(out, kContainerVersion);
  put<std::uint8_t>(out, kDtypeF32);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) put<std::uint64_t>(out, d);
  const auto* raw = reinterpret_cast<const std::uint8_t*>(t.data().data());
  out.insert(out.end(), raw, raw + t.size() * sizeof(float));
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  std::vector<std::uint8_t> out;
  append_tensor(out, t);
  return out;
}

std::vector<Tensor> decode_tensors(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  std::vector<Tensor> tensors;
  require(!bytes.empty(), Errc::TruncatedFile, "empty container");
  while (!in.done()) {
    const char magic[4] = {static_cast<char>(in.get<std::uint8_t>()), static_cast<char>(in.get<std::uint8_t>()),
                           static_cast<char>(in.get<std::uint8_t>()), static_cast<char>(in.get<std::uint8_t>())};
    require(std::memcmp(magic, "DFC1", 4) == 0, Errc::BadMagic, "not a DFC1 record");
    const auto version = in.get<std::uint8_t>();
    require(version == kContainerVersion, Errc::UnsupportedFormat, "unsupported container version");
    const auto dtype = in.get<std::uint8_t>();
    require(dtype == kDtypeF32, Errc::UnsupportedFormat, "unsupported container dtype");
    const auto rank = in.get<std::uint32_t>();
    require(rank >= 1 && rank <= 8, Errc::DimOverflow, "container rank out of range");
    Shape shape(rank);
    std::size_t count = 1;
    for (auto& d : shape) {
      const auto dim = in.get<std::uint64_t>();
      require(dim > 0 && dim <= std::numeric_limits<std::uint32_t>::max() &&
                  count <= (std::size_t{1} << 34) / dim,
              Errc::DimOverflow, "container dims overflow");
      d = static_cast<std::size_t>(dim);
      count *= d;
    }
    std::vector<float> data;
    in.read_floats(data, count);
    tensors.emplace_back(std::move(shape), std::move(data));
  }
  return tensors;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::IoError, "cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), Errc::IoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), Errc::IoError, "write failed for " + path);
}

void write_text(const std::string& path, const std::string& text) {
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string read_text(const std::string& path) {
  const auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

void save_tensors(const std::string& path, const std::vector<Tensor>& tensors) {
  std::vector<std::uint8_t> bytes;
  for (const auto& t : tensors) append_tensor(bytes, t);
  write_file(path, bytes);
}

std::vector<Tensor> load_tensors(const std::string& path) { return decode_tensors(read_file(path)); }

void save_tensor(const std::string& path, const Tensor& t) { write_file(path, encode_tensor(t)); }

Tensor load_tensor(const std::string& path) {
  auto tensors = load_tensors(path);
  require(tensors.size() == 1, Errc::UnsupportedFormat, path + " holds " + std::to_string(tensors.size()) + " tensors");
  return std::move(tensors.front());
}

}  // namespace diffc
