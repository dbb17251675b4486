#include "softgrip/policy.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

namespace softgrip::policy {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

std::string normalize(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

std::string strip_plural(const std::string& word) {
    if (word.size() > 2 && word.back() == 's' && word[word.size() - 2] != 's')
        return word.substr(0, word.size() - 1);
    return word;
}

// True when `phrase` occurs in `text` on word boundaries.
bool contains_phrase(const std::string& text, const std::string& phrase) {
    std::size_t pos = 0;
    while ((pos = text.find(phrase, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || text[pos - 1] == ' ';
        const std::size_t end = pos + phrase.size();
        const bool plural = end < text.size() && text[end] == 's' &&
                            (end + 1 == text.size() || text[end + 1] == ' ');
        const bool right_ok = end == text.size() || text[end] == ' ' || plural;
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

} // namespace

StiffnessLevel::StiffnessLevel(int value) : value_(value) {
    require(value >= kMin && value <= kMax, "stiffness level must be in [0, 4]");
}

StiffnessLevel StiffnessLevel::clamped_add(int delta) const {
    return StiffnessLevel(std::clamp(value_ + delta, kMin, kMax));
}

StiffnessLevel level_for(MaterialClass material) {
    return StiffnessLevel(static_cast<int>(material));
}

MaterialClass class_for(StiffnessLevel level) {
    return static_cast<MaterialClass>(level.value());
}

std::string to_string(MaterialClass material) {
    switch (material) {
        case MaterialClass::fragile: return "fragile";
        case MaterialClass::deformable: return "deformable";
        case MaterialClass::tough_deformable: return "tough-deformable";
        case MaterialClass::hard: return "hard";
        case MaterialClass::heavy_metal: return "heavy-metal";
    }
    return "unknown";
}

std::optional<MaterialClass> material_class_from_tag(const std::string& tag) {
    const std::string t = normalize(tag);
    if (t == "fragile") return MaterialClass::fragile;
    if (t == "deformable") return MaterialClass::deformable;
    if (t == "tough-deformable" || t == "tough deformable") return MaterialClass::tough_deformable;
    if (t == "hard") return MaterialClass::hard;
    if (t == "heavy-metal" || t == "heavy metal") return MaterialClass::heavy_metal;
    return std::nullopt;
}

Lexicon Lexicon::builtin() {
    Lexicon lex;
    // Level 0: vulnerable items.
    for (const char* k : {"jelly", "potato chip", "chip", "crisp", "persimmon", "pudding", "egg"})
        lex.add(k, MaterialClass::fragile);
    // Level 1: easily deformed items.
    for (const char* k : {"fruit", "pear", "apple", "banana", "orange", "peach",
                          "plastic packaging", "plastic bag", "packaging", "sponge"})
        lex.add(k, MaterialClass::deformable);
    // Level 2: tough and easily deformed items.
    for (const char* k : {"leather", "towel", "wallet", "leather wallet", "cloth", "rag"})
        lex.add(k, MaterialClass::tough_deformable);
    // Level 3: hard plastic or wooden items.
    for (const char* k : {"hard plastic", "wood", "wooden", "wooden block", "screwdriver",
                          "mouse", "clip"})
        lex.add(k, MaterialClass::hard);
    // Level 4: heavy metal objects.
    for (const char* k : {"weight", "dumbbell", "metal", "barbell", "wrench", "hammer"})
        lex.add(k, MaterialClass::heavy_metal);
    return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& file) {
    Lexicon lex = builtin();
    std::ifstream in(file);
    if (!in) throw std::runtime_error("lexicon: cannot open " + file.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string trimmed = normalize(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const std::size_t sep = trimmed.find("->");
        if (sep == std::string::npos)
            throw std::runtime_error("lexicon: missing '->' at line " + std::to_string(line_no));
        const std::string keyword = normalize(trimmed.substr(0, sep));
        const auto material = material_class_from_tag(trimmed.substr(sep + 2));
        if (keyword.empty() || !material)
            throw std::runtime_error("lexicon: bad entry at line " + std::to_string(line_no));
        lex.add(keyword, *material);
    }
    return lex;
}

void Lexicon::add(std::string keyword, MaterialClass material) {
    entries_[normalize(keyword)] = material;
}

std::optional<MaterialClass> Lexicon::lookup(const std::string& label) const {
    const std::string text = normalize(label);
    if (text.empty()) return std::nullopt;

    auto exact = entries_.find(text);
    if (exact != entries_.end()) return exact->second;
    exact = entries_.find(strip_plural(text));
    if (exact != entries_.end()) return exact->second;

    // Fall back to the longest phrase contained in the label, so that e.g.
    // "hard plastic" beats "plastic" inside "hard plastic case".
    const std::pair<const std::string, MaterialClass>* best = nullptr;
    for (const auto& entry : entries_) {
        if (!contains_phrase(text, entry.first)) continue;
        if (!best || entry.first.size() > best->first.size()) best = &entry;
    }
    if (best) return best->second;
    return std::nullopt;
}

std::optional<StiffnessLevel> classify_material(const std::string& label,
                                                std::optional<MaterialClass> hint,
                                                const Lexicon& lexicon) {
    require(!normalize(label).empty(), "classify_material: label must be nonempty");
    if (hint) return level_for(*hint);
    const auto material = lexicon.lookup(label);
    if (material) return level_for(*material);
    return std::nullopt;
}

std::optional<StiffnessLevel> classify_material(const std::string& label,
                                                std::optional<MaterialClass> hint) {
    static const Lexicon lex = Lexicon::builtin();
    return classify_material(label, hint, lex);
}

PretensionTable::PretensionTable() : ratios_{1.0, 1.25, 1.5, 2.0, 3.0} {}

PretensionTable::PretensionTable(const std::array<double, 5>& ratios) : ratios_(ratios) {
    require(ratios_.front() >= 1.0, "pretension table: ratios must be >= 1");
    for (std::size_t i = 1; i < ratios_.size(); ++i)
        require(ratios_[i] >= ratios_[i - 1], "pretension table: ratios must be non-decreasing");
}

double PretensionTable::ratio(StiffnessLevel level) const {
    return ratios_[static_cast<std::size_t>(level.value())];
}

PretensionSetting level_to_pretension(StiffnessLevel level, const PretensionTable& table) {
    const double rho = table.ratio(level);
    return {rho, rho - 1.0};
}

std::string to_string(GripMode mode) {
    switch (mode) {
        case GripMode::pinch: return "pinch";
        case GripMode::envelope: return "envelope";
        case GripMode::hook: return "hook";
        case GripMode::lift: return "lift";
    }
    return "unknown";
}

std::string to_string(Outcome outcome) {
    return outcome == Outcome::correct ? "correct" : "abnormal";
}

std::string to_string(FailureMode mode) {
    switch (mode) {
        case FailureMode::none: return "none";
        case FailureMode::slip: return "slip";
        case FailureMode::crush: return "crush";
    }
    return "unknown";
}

void OutcomeRecord::validate() const {
    const bool ok = (outcome == Outcome::correct) == (failure == FailureMode::none);
    require(ok, "outcome record: failure mode must be none iff outcome is correct");
}

StiffnessLevel adapt(std::span<const OutcomeRecord> history, const OutcomeRecord& last) {
    last.validate();
    require(last.outcome == Outcome::abnormal, "adapt: last outcome must be abnormal");

    if (last.failure == FailureMode::crush) return last.attempted.clamped_add(-1);

    // Slip: raise. The cue contradicts a soft attempted class; a repeat slip
    // of the same object at the same level also escalates.
    int step = 1;
    if (last.hard_surface_cue && last.attempted.value() <= 2) step = 2;
    for (const OutcomeRecord& rec : history) {
        if (rec.label == last.label && rec.failure == FailureMode::slip &&
            rec.attempted == last.attempted)
            step = std::max(step, 2);
    }
    return last.attempted.clamped_add(step);
}

} // namespace softgrip::policy
