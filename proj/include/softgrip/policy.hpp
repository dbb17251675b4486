#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "softgrip/geometry.hpp"

namespace softgrip::policy {

// Gripper rigidity taxonomy, 0 (softest, rest state) .. 4 (hardest).
class StiffnessLevel {
public:
    static constexpr int kMin = 0;
    static constexpr int kMax = 4;

    StiffnessLevel() = default;
    explicit StiffnessLevel(int value);

    int value() const { return value_; }
    StiffnessLevel clamped_add(int delta) const;

    auto operator<=>(const StiffnessLevel&) const = default;

private:
    int value_ = 0;
};

enum class MaterialClass {
    fragile,          // level 0: jelly, potato chips, persimmons
    deformable,       // level 1: fruits, plastic packaging
    tough_deformable, // level 2: leather, towels
    hard,             // level 3: hard plastic or wooden items
    heavy_metal,      // level 4: weights, dumbbells, other metal objects
};

StiffnessLevel level_for(MaterialClass material);
MaterialClass class_for(StiffnessLevel level);

std::string to_string(MaterialClass material);
std::optional<MaterialClass> material_class_from_tag(const std::string& tag);

// Keyword lexicon mapping object wording to a material class. The built-in
// table covers the taxonomy exemplars; a plain-text file with one
// "keyword -> class" pair per line can extend or override it.
class Lexicon {
public:
    static Lexicon builtin();
    static Lexicon load(const std::filesystem::path& file); // builtin + file

    void add(std::string keyword, MaterialClass material);

    // Longest matching phrase wins; trailing plural 's' is tolerated.
    std::optional<MaterialClass> lookup(const std::string& label) const;

private:
    std::map<std::string, MaterialClass> entries_;
};

// A hint (typically from the vision model) wins over the lexicon. Unknown
// labels yield nullopt; there is no silent default.
std::optional<StiffnessLevel> classify_material(const std::string& label,
                                                std::optional<MaterialClass> hint,
                                                const Lexicon& lexicon);
std::optional<StiffnessLevel> classify_material(const std::string& label,
                                                std::optional<MaterialClass> hint = {});

// Pretension ratios per level; scales the effective spring stiffness.
class PretensionTable {
public:
    PretensionTable(); // {1.0, 1.25, 1.5, 2.0, 3.0}
    explicit PretensionTable(const std::array<double, 5>& ratios); // must be non-decreasing, >= 1

    double ratio(StiffnessLevel level) const;
    const std::array<double, 5>& ratios() const { return ratios_; }

private:
    std::array<double, 5> ratios_;
};

struct PretensionSetting {
    double ratio = 1.0;    // rho; effective spring stiffness = rho * k_s
    double actuator = 0.0; // motor setting, proportional to rho - 1
};

PretensionSetting level_to_pretension(StiffnessLevel level, const PretensionTable& table);

enum class GripMode { pinch, envelope, hook, lift };

std::string to_string(GripMode mode);

struct GripPlan {
    StiffnessLevel level;
    PretensionSetting pretension;
    Rect grasp_box;
    GripMode mode = GripMode::pinch;
};

enum class Outcome { correct, abnormal };
enum class FailureMode { none, slip, crush };

std::string to_string(Outcome outcome);
std::string to_string(FailureMode mode);

struct OutcomeRecord {
    std::string label;
    StiffnessLevel attempted;
    Outcome outcome = Outcome::correct;
    FailureMode failure = FailureMode::none; // none iff outcome == correct
    bool hard_surface_cue = false;           // rigidity feedback from the failed grip
    std::string timestamp;
    std::string episode_id;

    void validate() const;
};

// Failure-driven level revision. Slips raise the level (by 2 when the hard
// surface cue contradicts a soft attempted class, or when the same level
// already slipped on the same object); crushes lower it by 1. Clamped to
// [0, 4]; pure function of (history, last).
StiffnessLevel adapt(std::span<const OutcomeRecord> history, const OutcomeRecord& last);

} // namespace softgrip::policy
