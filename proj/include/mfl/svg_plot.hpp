#pragma once

#include <filesystem>
#include <vector>

namespace mfl {

/// Render line charts from a metrics CSV produced by the trainer.
///
/// When the CSV contains several tilde_sigma values the emitted charts are
/// dof.svg and test_mse.svg with one series per tilde_sigma; otherwise they
/// are align_emp.svg and dof.svg with one series per sigma. Rows sharing a
/// series key and step (several seeds) are averaged. Returns the files
/// written; throws io_error on malformed input or when the CSV has no data
/// rows (in which case nothing is written).
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& csv_path,
                                              const std::filesystem::path& out_dir);

} // namespace mfl
