#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alignrecon/grid.hpp"
#include "alignrecon/metrics.hpp"

namespace alignrecon {

// Grid file layout (all integers little-endian):
//   offset 0   8 bytes  ASCII "MRGRID01"
//   offset 8   u8       dtype: 1 = float64, 2 = complex float64 (re, im interleaved), 3 = byte
//   offset 9   u32      planes
//   offset 13  u32      height
//   offset 17  u32      width
//   offset 21  payload  plane-major, row-major, little-endian
enum class GridDtype : std::uint8_t { Real = 1, Complex = 2, Byte = 3 };

inline constexpr std::size_t kGridHeaderSize = 21;

struct GridFile {
  GridDtype dtype = GridDtype::Real;
  std::uint32_t planes = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<double> real;     // dtype Real
  std::vector<cplx> complex;    // dtype Complex
  std::vector<std::uint8_t> bytes;  // dtype Byte
};

std::vector<std::uint8_t> encode_grid(const GridFile& grid);
GridFile decode_grid(const std::vector<std::uint8_t>& bytes);

void write_grid(const std::filesystem::path& path, const GridFile& grid);
GridFile read_grid(const std::filesystem::path& path);

void write_grid(const std::filesystem::path& path, const ComplexImage& img);
void write_grid(const std::filesystem::path& path, const KSpace& k);
void write_grid(const std::filesystem::path& path, const RealImage& img);
void write_grid(const std::filesystem::path& path, const DisplacementField& field);  // planes = 2: dx, dy
void write_grid(const std::filesystem::path& path, const SamplingMask& mask);        // expanded H x W bytes

ComplexImage read_complex_image(const std::filesystem::path& path);
KSpace read_kspace(const std::filesystem::path& path);
RealImage read_real_image(const std::filesystem::path& path);
DisplacementField read_field(const std::filesystem::path& path);
SamplingMask read_mask(const std::filesystem::path& path);

enum class Colormap { Gray, Signed };

// 8-bit grayscale PNG. Gray: min-max normalization (constant images map to a
// single level). Signed: symmetric range about zero, zero maps to 128.
void export_png(const RealImage& img, const std::filesystem::path& path, Colormap map = Colormap::Gray);
void export_png(const ComplexImage& img, const std::filesystem::path& path);  // magnitude, gray
void export_png(const SamplingMask& mask, const std::filesystem::path& path);  // 0 / 255

// |a| - |b|, exported with the signed colormap.
RealImage error_map(const ComplexImage& image, const ComplexImage& truth);

struct LabeledReport {
  std::string label;
  MetricReport report;
};

// Header "label,psnr_db,ssim,mae", six decimals, LF line endings.
void write_metrics_csv(const std::vector<LabeledReport>& rows, const std::filesystem::path& path);
std::string format_metrics_csv(const std::vector<LabeledReport>& rows);
std::vector<LabeledReport> read_metrics_csv(const std::filesystem::path& path);

}  // namespace alignrecon
