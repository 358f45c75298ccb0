#pragma once

#include "lrmt/multiterm.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lrmt {

/// Optional solver hints stored next to an equation. Term indices are 1-based on disk
/// and 0-based here.
struct ManifestHints {
  std::optional<std::string> preconditioner;
  std::optional<std::array<Index, 2>> terms;
  std::optional<int> t_adi;
  std::optional<std::string> shifts;
  std::optional<std::array<Index, 2>> inner_precond_terms;

  bool empty() const {
    return !preconditioner && !terms && !t_adi && !shifts && !inner_precond_terms;
  }
};

struct ManifestTerm {
  /// Relative to the manifest directory, or the literal "identity".
  std::string a;
  std::string b;
};

struct EquationManifest {
  std::filesystem::path directory;
  Index p = 0;
  Index q = 0;
  Index n_a = 0;
  Index n_b = 0;
  std::vector<ManifestTerm> terms;
  std::string c;
  std::string d;
  ManifestHints hints;
};

/// Parses the JSON manifest (no matrix files are touched).
EquationManifest read_manifest(const std::filesystem::path& path);

/// Loads every referenced file and checks dimensions against the metadata.
/// Column-rank deficiency of C or D is reported through `warnings`.
MultitermEquation load_equation(const EquationManifest& manifest,
                                std::vector<std::string>* warnings = nullptr);

MultitermEquation load_manifest(const std::filesystem::path& path,
                                std::vector<std::string>* warnings = nullptr);

/// Writes A<i>.mtx, B<i>.mtx, C.mtx, D.mtx and manifest.json into `dir`.
std::filesystem::path save_manifest(const MultitermEquation& eq, const std::filesystem::path& dir,
                                    const ManifestHints& hints = {});

}  // namespace lrmt
