#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace facepsy::catalog {

enum class StimulusKind { BonaFide, Manipulated };
enum class ManipulationType { FaceSwap, Morph, Retouch };
enum class Difficulty { Easy, Hard };
enum class Role { Target, Reference };

struct Manipulation {
    ManipulationType type = ManipulationType::FaceSwap;
    std::string method;

    friend auto operator<=>(const Manipulation&, const Manipulation&) = default;
};

struct StimulusRecord {
    std::string stimulus_id;
    std::string uri;
    StimulusKind kind = StimulusKind::BonaFide;
    std::optional<Manipulation> manipulation;
    std::optional<Difficulty> difficulty;
    std::optional<double> distance_score;  // embedding distance to the bona fide source
    std::set<std::string> subject_ids;
    Role role = Role::Target;
    std::optional<std::string> sha256;

    bool manipulated() const { return kind == StimulusKind::Manipulated; }

    friend bool operator==(const StimulusRecord&, const StimulusRecord&) = default;
};

/// Validated, immutable stimulus manifest.
class Manifest {
public:
    /// Validates every invariant and throws ValidationError listing all violations.
    explicit Manifest(std::vector<StimulusRecord> records, std::string provenance = {});

    const std::vector<StimulusRecord>& records() const { return records_; }
    const std::string& provenance() const { return provenance_; }

    /// nullptr when unknown.
    const StimulusRecord* find(const std::string& stimulus_id) const;
    const StimulusRecord& at(const std::string& stimulus_id) const;

    std::vector<StimulusRecord> targets() const;

private:
    std::vector<StimulusRecord> records_;
    std::string provenance_;
    std::map<std::string, std::size_t> index_;
};

/// Class key used when summarizing difficulty.
struct StimulusClass {
    ManipulationType type = ManipulationType::FaceSwap;
    Difficulty difficulty = Difficulty::Easy;
    std::string method;

    friend auto operator<=>(const StimulusClass&, const StimulusClass&) = default;
};

/// Manipulation type x difficulty cell used for balancing.
struct BalanceCell {
    ManipulationType type = ManipulationType::FaceSwap;
    Difficulty difficulty = Difficulty::Easy;

    friend auto operator<=>(const BalanceCell&, const BalanceCell&) = default;
};

/// Loads CSV (.csv) or JSON (anything else) manifests.
/// Throws ParseError with a line number, or ValidationError naming the invariant.
Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest_csv(std::istream& in, const std::string& source = "manifest");
Manifest parse_manifest_json(std::istream& in, const std::string& source = "manifest");
void write_manifest_csv(std::ostream& out, const Manifest& manifest);

/// Mean distance per (type, difficulty, method) over manipulated records with a score.
/// Throws ValidationError if a manipulated record lacks a distance score.
std::map<StimulusClass, double> difficulty_bin(std::span<const StimulusRecord> records);

/// Re-labels difficulty per (type, method): scores at or above the quantile become Hard.
std::vector<StimulusRecord> rebin_by_quantile(std::span<const StimulusRecord> records, double quantile = 0.5);

/// Recomputes SHA-256 of every record with a hash, resolving relative URIs against base_dir.
/// Returns the ids whose content is missing or differs.
std::vector<std::string> verify_content_hashes(const Manifest& manifest, const std::filesystem::path& base_dir);

std::string sha256_hex(std::string_view data);

struct TrialCounts {
    int two_afc = 27;
    int abx = 23;
    int yes_no = 0;
    double catch_proportion = 0.0;  // share of Yes/No trials without a manipulated image

    int total() const { return two_afc + abx + yes_no; }
    friend bool operator==(const TrialCounts&, const TrialCounts&) = default;
};

struct TwoAfcMaterial {
    std::string manipulated;
    std::string bona_fide;
};

struct AbxMaterial {
    std::string x;
    bool x_manipulated = false;
    std::string bona_fide_reference;
    std::string manipulated_reference;
};

struct YesNoMaterial {
    std::string stimulus;
    bool manipulated = false;
};

struct TrialMaterial {
    std::vector<TwoAfcMaterial> two_afc;
    std::vector<AbxMaterial> abx;
    std::vector<YesNoMaterial> yes_no;
};

/// Seeded selection of target and reference stimuli. Manipulated targets are
/// spread evenly (within one) over manipulation type x difficulty, per
/// procedure and overall; no target is used twice. Throws
/// InsufficientMaterialError naming the deficient class.
TrialMaterial select_balanced(const Manifest& manifest, const TrialCounts& counts, std::uint64_t seed);

/// Whether two stimuli may appear in one trial: disjoint subjects, or the bona
/// fide image is the source of the manipulated one.
bool compatible_in_trial(const StimulusRecord& a, const StimulusRecord& b);

std::string to_string(StimulusKind v);
std::string to_string(ManipulationType v);
std::string to_string(Difficulty v);
std::string to_string(Role v);
StimulusKind kind_from_string(const std::string& s);
ManipulationType manipulation_type_from_string(const std::string& s);
Difficulty difficulty_from_string(const std::string& s);
Role role_from_string(const std::string& s);

}  // namespace facepsy::catalog
