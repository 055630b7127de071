#pragma once

#include "cohaudit/ensembles.hpp"

#include <filesystem>

namespace cohaudit {

/// CSV: first line "rows,cols", then the values in row-major order (one
/// matrix row per line when written). Binary: magic "CAMX", u32 rows,
/// u32 cols, then rows*cols little-endian IEEE-754 doubles, row-major.
enum class MatrixFormat { csv, binary };

/// ".csv" → csv, anything else → binary.
MatrixFormat format_from_path(const std::filesystem::path& path);

/// Loaded matrices are tagged `custom` and are not normalized.
MeasurementMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format);
void save_matrix(const MeasurementMatrix& m, const std::filesystem::path& path, MatrixFormat format);

}  // namespace cohaudit
