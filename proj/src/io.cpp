#include "alignrecon/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

namespace alignrecon {

namespace {

constexpr char kMagic[8] = {'M', 'R', 'G', 'R', 'I', 'D', '0', '1'};

std::size_t dtype_size(GridDtype d) {
  switch (d) {
    case GridDtype::Real: return 8;
    case GridDtype::Complex: return 16;
    case GridDtype::Byte: return 1;
  }
  return 0;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::uint32_t checked_u32(std::size_t v) {
  if (v > 0xffffffffu) throw DimensionError("grid dimension does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

GridFile header_for(GridDtype dtype, std::size_t planes, Shape shape) {
  GridFile g;
  g.dtype = dtype;
  g.planes = checked_u32(planes);
  g.height = checked_u32(shape.height);
  g.width = checked_u32(shape.width);
  return g;
}

GridFile from_complex(std::span<const cplx> data, Shape shape) {
  GridFile g = header_for(GridDtype::Complex, 1, shape);
  g.complex.assign(data.begin(), data.end());
  return g;
}

void expect(const GridFile& g, GridDtype dtype, std::uint32_t planes, const std::filesystem::path& path) {
  if (g.dtype != dtype || g.planes != planes)
    throw FormatError(path.string() + ": unexpected dtype " + std::to_string(static_cast<int>(g.dtype)) + " with " +
                          std::to_string(g.planes) + " plane(s)",
                      8);
}

class PngWriter {
 public:
  explicit PngWriter(const std::filesystem::path& path) : path_(path) {
    file_ = std::fopen(path.string().c_str(), "wb");
    if (!file_) throw Error("cannot open " + path.string() + " for writing");
    png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    info_ = png_ ? png_create_info_struct(png_) : nullptr;
    if (!png_ || !info_) {
      cleanup();
      throw Error("libpng initialisation failed");
    }
  }
  ~PngWriter() { cleanup(); }
  PngWriter(const PngWriter&) = delete;
  PngWriter& operator=(const PngWriter&) = delete;

  void write_gray8(const std::vector<std::uint8_t>& pixels, std::size_t height, std::size_t width) {
    std::vector<png_bytep> rows(height);
    for (std::size_t r = 0; r < height; ++r) rows[r] = const_cast<png_bytep>(pixels.data() + r * width);
    if (setjmp(png_jmpbuf(png_))) throw Error("libpng failed writing " + path_.string());
    png_init_io(png_, file_);
    png_set_IHDR(png_, info_, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png_, info_);
    png_write_image(png_, rows.data());
    png_write_end(png_, nullptr);
  }

 private:
  void cleanup() {
    if (png_) png_destroy_write_struct(&png_, info_ ? &info_ : nullptr);
    png_ = nullptr;
    info_ = nullptr;
    if (file_) std::fclose(file_);
    file_ = nullptr;
  }

  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

std::vector<std::uint8_t> encode_grid(const GridFile& g) {
  const std::size_t count = static_cast<std::size_t>(g.planes) * g.height * g.width;
  const std::size_t have = g.dtype == GridDtype::Real      ? g.real.size()
                           : g.dtype == GridDtype::Complex ? g.complex.size()
                                                           : g.bytes.size();
  if (have != count) throw DimensionError("grid payload holds " + std::to_string(have) + " values, header says " +
                                          std::to_string(count));
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.reserve(kGridHeaderSize + count * dtype_size(g.dtype));
  out.push_back(static_cast<std::uint8_t>(g.dtype));
  put_u32(out, g.planes);
  put_u32(out, g.height);
  put_u32(out, g.width);
  switch (g.dtype) {
    case GridDtype::Real:
      for (double v : g.real) put_f64(out, v);
      break;
    case GridDtype::Complex:
      for (const auto& v : g.complex) {
        put_f64(out, v.real());
        put_f64(out, v.imag());
      }
      break;
    case GridDtype::Byte:
      out.insert(out.end(), g.bytes.begin(), g.bytes.end());
      break;
  }
  return out;
}

GridFile decode_grid(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kGridHeaderSize)
    throw FormatError("truncated header: expected " + std::to_string(kGridHeaderSize) + " bytes, got " +
                          std::to_string(bytes.size()),
                      bytes.size());
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) throw FormatError("bad magic, expected MRGRID01", 0);
  const std::uint8_t code = bytes[8];
  if (code < 1 || code > 3) throw FormatError("unknown dtype code " + std::to_string(code), 8);

  GridFile g;
  g.dtype = static_cast<GridDtype>(code);
  g.planes = get_u32(&bytes[9]);
  g.height = get_u32(&bytes[13]);
  g.width = get_u32(&bytes[17]);
  const std::uint64_t count = static_cast<std::uint64_t>(g.planes) * g.height * g.width;
  const std::uint64_t expected = count * dtype_size(g.dtype);
  const std::uint64_t actual = bytes.size() - kGridHeaderSize;
  if (actual != expected)
    throw FormatError(std::string(actual < expected ? "truncated" : "oversized") + " payload: expected " +
                          std::to_string(expected) + " bytes, got " + std::to_string(actual),
                      kGridHeaderSize + std::min(actual, expected));

  const std::uint8_t* p = bytes.data() + kGridHeaderSize;
  switch (g.dtype) {
    case GridDtype::Real:
      g.real.resize(count);
      for (std::uint64_t i = 0; i < count; ++i) g.real[i] = get_f64(p + 8 * i);
      break;
    case GridDtype::Complex:
      g.complex.resize(count);
      for (std::uint64_t i = 0; i < count; ++i) g.complex[i] = cplx(get_f64(p + 16 * i), get_f64(p + 16 * i + 8));
      break;
    case GridDtype::Byte:
      g.bytes.assign(p, p + count);
      break;
  }
  return g;
}

void write_grid(const std::filesystem::path& path, const GridFile& grid) {
  const auto bytes = encode_grid(grid);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

GridFile read_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_grid(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

void write_grid(const std::filesystem::path& path, const ComplexImage& img) {
  write_grid(path, from_complex(img.data(), img.shape()));
}

void write_grid(const std::filesystem::path& path, const KSpace& k) {
  write_grid(path, from_complex(k.data(), k.shape()));
}

void write_grid(const std::filesystem::path& path, const RealImage& img) {
  GridFile g = header_for(GridDtype::Real, 1, img.shape());
  g.real.assign(img.data().begin(), img.data().end());
  write_grid(path, g);
}

void write_grid(const std::filesystem::path& path, const DisplacementField& field) {
  GridFile g = header_for(GridDtype::Real, 2, field.shape());
  g.real.assign(field.dx.data().begin(), field.dx.data().end());
  g.real.insert(g.real.end(), field.dy.data().begin(), field.dy.data().end());
  write_grid(path, g);
}

void write_grid(const std::filesystem::path& path, const SamplingMask& mask) {
  GridFile g = header_for(GridDtype::Byte, 1, mask.shape());
  g.bytes.reserve(mask.shape().size());
  for (std::size_t r = 0; r < mask.height(); ++r) g.bytes.insert(g.bytes.end(), mask.columns().begin(), mask.columns().end());
  write_grid(path, g);
}

ComplexImage read_complex_image(const std::filesystem::path& path) {
  const GridFile g = read_grid(path);
  expect(g, GridDtype::Complex, 1, path);
  ComplexImage img(g.height, g.width);
  std::copy(g.complex.begin(), g.complex.end(), img.data().begin());
  return img;
}

KSpace read_kspace(const std::filesystem::path& path) {
  const GridFile g = read_grid(path);
  expect(g, GridDtype::Complex, 1, path);
  KSpace k(g.height, g.width);
  std::copy(g.complex.begin(), g.complex.end(), k.data().begin());
  return k;
}

RealImage read_real_image(const std::filesystem::path& path) {
  const GridFile g = read_grid(path);
  expect(g, GridDtype::Real, 1, path);
  RealImage img(g.height, g.width);
  std::copy(g.real.begin(), g.real.end(), img.data().begin());
  return img;
}

DisplacementField read_field(const std::filesystem::path& path) {
  const GridFile g = read_grid(path);
  expect(g, GridDtype::Real, 2, path);
  DisplacementField f(Shape{g.height, g.width});
  const std::size_t n = f.dx.size();
  std::copy(g.real.begin(), g.real.begin() + static_cast<std::ptrdiff_t>(n), f.dx.data().begin());
  std::copy(g.real.begin() + static_cast<std::ptrdiff_t>(n), g.real.end(), f.dy.data().begin());
  return f;
}

SamplingMask read_mask(const std::filesystem::path& path) {
  const GridFile g = read_grid(path);
  expect(g, GridDtype::Byte, 1, path);
  if (g.height == 0 || g.width == 0) throw FormatError(path.string() + ": empty mask", 13);
  std::vector<std::uint8_t> cols(g.bytes.begin(), g.bytes.begin() + g.width);
  for (std::size_t r = 1; r < g.height; ++r)
    for (std::size_t c = 0; c < g.width; ++c)
      if ((g.bytes[r * g.width + c] != 0) != (cols[c] != 0))
        throw FormatError(path.string() + ": mask is not constant along column " + std::to_string(c),
                          kGridHeaderSize + r * g.width + c);
  return SamplingMask(g.height, std::move(cols));
}

void export_png(const RealImage& img, const std::filesystem::path& path, Colormap map) {
  if (!all_finite(img.data())) throw InvalidInput("export_png: image contains non-finite values");
  std::vector<std::uint8_t> px(img.size());
  if (map == Colormap::Gray) {
    const auto [lo, hi] = std::minmax_element(img.data().begin(), img.data().end());
    const double span = img.empty() ? 0.0 : *hi - *lo;
    for (std::size_t i = 0; i < img.size(); ++i) px[i] = span > 0.0 ? to_byte(255.0 * (img[i] - *lo) / span) : 0;
  } else {
    double m = 0.0;
    for (double v : img.data()) m = std::max(m, std::abs(v));
    for (std::size_t i = 0; i < img.size(); ++i) px[i] = m > 0.0 ? to_byte(128.0 + 127.0 * img[i] / m) : 128;
  }
  PngWriter(path).write_gray8(px, img.height(), img.width());
}

void export_png(const ComplexImage& img, const std::filesystem::path& path) {
  export_png(img.magnitude(), path, Colormap::Gray);
}

void export_png(const SamplingMask& mask, const std::filesystem::path& path) {
  std::vector<std::uint8_t> px;
  px.reserve(mask.shape().size());
  for (std::size_t r = 0; r < mask.height(); ++r)
    for (std::size_t c = 0; c < mask.width(); ++c) px.push_back(mask.sampled(c) ? 255 : 0);
  PngWriter(path).write_gray8(px, mask.height(), mask.width());
}

RealImage error_map(const ComplexImage& image, const ComplexImage& truth) {
  require_same_shape(image.shape(), truth.shape(), "error_map");
  RealImage out(image.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(image[i]) - std::abs(truth[i]);
  return out;
}

std::string format_metrics_csv(const std::vector<LabeledReport>& rows) {
  std::string out = "label,psnr_db,ssim,mae\n";
  char buf[128];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), ",%.6f,%.6f,%.6f\n", row.report.psnr, row.report.ssim, row.report.mae);
    out += row.label;
    out += buf;
  }
  return out;
}

void write_metrics_csv(const std::vector<LabeledReport>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << format_metrics_csv(rows);
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<LabeledReport> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "label,psnr_db,ssim,mae")
    throw FormatError(path.string() + ": missing metrics header", 0);
  std::vector<LabeledReport> rows;
  std::uint64_t offset = line.size() + 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    LabeledReport row;
    std::string psnr_s, ssim_s, mae_s;
    if (!std::getline(ss, row.label, ',') || !std::getline(ss, psnr_s, ',') || !std::getline(ss, ssim_s, ',') ||
        !std::getline(ss, mae_s))
      throw FormatError(path.string() + ": malformed metrics row", offset);
    row.report = {std::stod(psnr_s), std::stod(ssim_s), std::stod(mae_s)};
    rows.push_back(std::move(row));
    offset += line.size() + 1;
  }
  return rows;
}

}  // namespace alignrecon
