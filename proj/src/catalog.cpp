#include "facepsy/catalog.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "facepsy/csv.hpp"
#include "facepsy/error.hpp"
#include "facepsy/rng.hpp"

namespace facepsy::catalog {

namespace {

std::string normalize_token(const std::string& s) {
    std::string out;
    for (char ch : s) {
        if (ch == '_' || ch == '-' || ch == ' ') continue;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    return out;
}

std::set<std::string> split_subjects(const std::string& field) {
    std::set<std::string> out;
    std::stringstream ss(field);
    std::string item;
    while (std::getline(ss, item, ';')) {
        auto t = csv::trim(item);
        if (!t.empty()) out.insert(std::move(t));
    }
    return out;
}

std::string join_subjects(const std::set<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) out += ';';
        out += id;
    }
    return out;
}

bool is_hex64(const std::string& s) {
    return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
}

std::vector<std::string> validate_records(const std::vector<StimulusRecord>& records) {
    std::vector<std::string> problems;
    std::map<std::string, int> seen;
    for (const auto& r : records) {
        const std::string who = "stimulus '" + r.stimulus_id + "'";
        if (r.stimulus_id.empty()) problems.emplace_back("record with empty stimulus_id");
        if (++seen[r.stimulus_id] == 2) problems.push_back("duplicate stimulus_id: " + who);
        if (r.uri.empty()) problems.push_back(who + ": uri missing");
        if (r.subject_ids.empty()) problems.push_back(who + ": subject_ids must be nonempty");
        if (r.manipulated()) {
            if (!r.manipulation) problems.push_back(who + ": manipulated record lacks manipulation type/method");
            if (!r.difficulty) problems.push_back(who + ": manipulated record lacks difficulty");
            if (!r.distance_score) problems.push_back(who + ": manipulated record lacks distance_score");
            if (r.manipulation && r.manipulation->method.empty()) problems.push_back(who + ": manipulation method missing");
            if (r.manipulation && r.manipulation->type == ManipulationType::Morph && r.subject_ids.size() < 2) {
                problems.push_back(who + ": morphs must list at least 2 subject ids");
            }
        } else if (r.manipulation || r.difficulty || r.distance_score) {
            problems.push_back(who + ": bona fide record carries manipulation fields");
        }
        if (r.distance_score && !(*r.distance_score >= 0.0 && *r.distance_score <= 1.0)) {
            problems.push_back(who + ": distance_score must lie in [0, 1]");
        }
        if (r.sha256 && !is_hex64(*r.sha256)) problems.push_back(who + ": sha256 must be 64 hex digits");
    }

    std::map<std::string, std::vector<std::string>> target_subjects;
    for (const auto& r : records) {
        if (r.role != Role::Target) continue;
        for (const auto& s : r.subject_ids) target_subjects[s].push_back(r.stimulus_id);
    }
    for (const auto& r : records) {
        if (r.role != Role::Reference) continue;
        for (const auto& s : r.subject_ids) {
            auto it = target_subjects.find(s);
            if (it == target_subjects.end()) continue;
            problems.push_back("subject overlap: reference '" + r.stimulus_id + "' shares subject '" + s +
                               "' with target '" + it->second.front() + "'");
        }
    }
    return problems;
}

// JSON field accessors with record-level context.
std::optional<std::string> opt_string(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw std::invalid_argument(std::string(key) + " must be a string");
    auto s = csv::trim(it->get<std::string>());
    if (s.empty()) return std::nullopt;
    return s;
}

StimulusRecord record_from_fields(const std::map<std::string, std::string>& f) {
    auto get = [&](const char* key) -> std::string {
        auto it = f.find(key);
        return it == f.end() ? std::string{} : csv::trim(it->second);
    };
    StimulusRecord r;
    r.stimulus_id = get("stimulus_id");
    r.uri = get("uri");
    r.kind = kind_from_string(get("kind"));
    const auto type = get("manipulation_type");
    const auto method = get("method");
    if (!type.empty() || !method.empty()) {
        Manipulation m;
        m.type = manipulation_type_from_string(type);
        m.method = method;
        r.manipulation = m;
    }
    if (const auto d = get("difficulty"); !d.empty()) r.difficulty = difficulty_from_string(d);
    if (const auto s = get("distance_score"); !s.empty()) {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("distance_score is not a number");
        r.distance_score = v;
    }
    r.subject_ids = split_subjects(get("subject_ids"));
    const auto role = get("role");
    r.role = role.empty() ? Role::Target : role_from_string(role);
    if (const auto h = get("sha256"); !h.empty()) r.sha256 = h;
    return r;
}

constexpr std::array<const char*, 9> kRequiredColumns = {"stimulus_id", "uri", "kind", "manipulation_type", "method",
                                                         "difficulty", "distance_score", "subject_ids", "role"};

}  // namespace

Manifest::Manifest(std::vector<StimulusRecord> records, std::string provenance)
    : records_(std::move(records)), provenance_(std::move(provenance)) {
    auto problems = validate_records(records_);
    if (!problems.empty()) throw ValidationError(std::move(problems));
    for (std::size_t i = 0; i < records_.size(); ++i) index_.emplace(records_[i].stimulus_id, i);
}

const StimulusRecord* Manifest::find(const std::string& stimulus_id) const {
    auto it = index_.find(stimulus_id);
    return it == index_.end() ? nullptr : &records_[it->second];
}

const StimulusRecord& Manifest::at(const std::string& stimulus_id) const {
    if (const auto* r = find(stimulus_id)) return *r;
    throw NotFoundError("unknown stimulus id '" + stimulus_id + "'");
}

std::vector<StimulusRecord> Manifest::targets() const {
    std::vector<StimulusRecord> out;
    std::copy_if(records_.begin(), records_.end(), std::back_inserter(out),
                 [](const StimulusRecord& r) { return r.role == Role::Target; });
    return out;
}

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "cannot open file");
    if (path.extension() == ".csv") return parse_manifest_csv(in, path.string());
    return parse_manifest_json(in, path.string());
}

Manifest parse_manifest_csv(std::istream& in, const std::string& source) {
    std::string provenance;
    std::vector<std::pair<std::size_t, std::string>> lines;
    for (auto& [n, text] : csv::read_lines(in)) {
        if (text.front() == '#') {
            if (!provenance.empty()) provenance += '\n';
            provenance += csv::trim(std::string_view(text).substr(1));
        } else {
            lines.emplace_back(n, std::move(text));
        }
    }
    if (lines.empty()) throw ParseError(source, 0, "missing header row");
    const auto header = csv::split_line(lines.front().second, source, lines.front().first);
    std::vector<std::string> columns;
    for (const auto& h : header) columns.push_back(csv::trim(h));
    for (const char* required : kRequiredColumns) {
        if (std::find(columns.begin(), columns.end(), required) == columns.end()) {
            throw ParseError(source, lines.front().first, std::string("missing column '") + required + "'");
        }
    }

    std::vector<StimulusRecord> records;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& [line_no, text] = lines[i];
        const auto fields = csv::split_line(text, source, line_no);
        if (fields.size() != columns.size()) {
            throw ParseError(source, line_no,
                             "expected " + std::to_string(columns.size()) + " fields, found " + std::to_string(fields.size()));
        }
        std::map<std::string, std::string> f;
        for (std::size_t c = 0; c < columns.size(); ++c) f[columns[c]] = fields[c];
        try {
            records.push_back(record_from_fields(f));
        } catch (const ValidationError& e) {
            throw ParseError(source, line_no, e.what());
        } catch (const std::logic_error& e) {
            throw ParseError(source, line_no, e.what());
        }
    }
    return Manifest(std::move(records), std::move(provenance));
}

Manifest parse_manifest_json(std::istream& in, const std::string& source) {
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto upto = text.substr(0, std::min<std::size_t>(e.byte, text.size()));
        const auto line = static_cast<std::size_t>(std::count(upto.begin(), upto.end(), '\n')) + 1;
        throw ParseError(source, line, "invalid JSON");
    }
    if (!doc.is_object() || !doc.contains("records") || !doc["records"].is_array()) {
        throw ParseError(source, 1, "expected an object with a 'records' array");
    }
    std::vector<StimulusRecord> records;
    std::size_t i = 0;
    for (const auto& item : doc["records"]) {
        ++i;
        try {
            if (!item.is_object()) throw std::invalid_argument("record must be an object");
            std::map<std::string, std::string> f;
            for (const char* key : {"stimulus_id", "uri", "kind", "manipulation_type", "method", "difficulty", "role", "sha256"}) {
                if (auto v = opt_string(item, key)) f[key] = *v;
            }
            if (auto it = item.find("distance_score"); it != item.end() && !it->is_null()) {
                if (!it->is_number()) throw std::invalid_argument("distance_score must be a number");
                f["distance_score"] = csv::format_number(it->get<double>());
            }
            if (auto it = item.find("subject_ids"); it != item.end()) {
                if (it->is_array()) {
                    std::string joined;
                    for (const auto& s : *it) joined += s.get<std::string>() + ";";
                    f["subject_ids"] = joined;
                } else if (it->is_string()) {
                    f["subject_ids"] = it->get<std::string>();
                }
            }
            records.push_back(record_from_fields(f));
        } catch (const std::exception& e) {
            throw ParseError(source, 0, "record " + std::to_string(i) + ": " + e.what());
        }
    }
    return Manifest(std::move(records), doc.value("provenance", std::string{}));
}

void write_manifest_csv(std::ostream& out, const Manifest& manifest) {
    if (!manifest.provenance().empty()) {
        std::stringstream ss(manifest.provenance());
        std::string line;
        while (std::getline(ss, line)) out << "# " << line << '\n';
    }
    out << "stimulus_id,uri,kind,manipulation_type,method,difficulty,distance_score,subject_ids,role,sha256\n";
    for (const auto& r : manifest.records()) {
        out << csv::escape(r.stimulus_id) << ',' << csv::escape(r.uri) << ',' << to_string(r.kind) << ','
            << (r.manipulation ? to_string(r.manipulation->type) : "") << ','
            << (r.manipulation ? csv::escape(r.manipulation->method) : "") << ','
            << (r.difficulty ? to_string(*r.difficulty) : "") << ',';
        if (r.distance_score) out << csv::format_number(*r.distance_score);
        out << ',' << csv::escape(join_subjects(r.subject_ids)) << ',' << to_string(r.role) << ','
            << r.sha256.value_or("") << '\n';
    }
}

std::map<StimulusClass, double> difficulty_bin(std::span<const StimulusRecord> records) {
    // Extended precision keeps the mean correctly rounded for small classes,
    // so two-decimal scores averaging to a two-decimal value hit it exactly.
    std::map<StimulusClass, std::pair<long double, std::size_t>> sums;
    for (const auto& r : records) {
        if (!r.manipulated()) continue;
        if (!r.distance_score || !r.manipulation || !r.difficulty) {
            throw ValidationError("stimulus '" + r.stimulus_id + "' has no distance score or class");
        }
        auto& [sum, n] = sums[StimulusClass{r.manipulation->type, *r.difficulty, r.manipulation->method}];
        sum += *r.distance_score;
        ++n;
    }
    std::map<StimulusClass, double> means;
    for (const auto& [cls, acc] : sums) means[cls] = static_cast<double>(acc.first / static_cast<long double>(acc.second));
    return means;
}

std::vector<StimulusRecord> rebin_by_quantile(std::span<const StimulusRecord> records, double quantile) {
    if (!(quantile > 0.0 && quantile < 1.0)) throw DomainError("quantile must lie in (0, 1)");
    std::map<Manipulation, std::vector<double>> scores;
    for (const auto& r : records) {
        if (r.manipulated() && r.manipulation && r.distance_score) scores[*r.manipulation].push_back(*r.distance_score);
    }
    std::map<Manipulation, double> cut;
    for (auto& [m, v] : scores) {
        std::sort(v.begin(), v.end());
        // Linear interpolation between order statistics.
        const double pos = quantile * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, v.size() - 1);
        cut[m] = v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
    }
    std::vector<StimulusRecord> out(records.begin(), records.end());
    for (auto& r : out) {
        if (!(r.manipulated() && r.manipulation && r.distance_score)) continue;
        r.difficulty = *r.distance_score >= cut[*r.manipulation] ? Difficulty::Hard : Difficulty::Easy;
    }
    return out;
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 computation failed");
    }
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return out.str();
}

std::vector<std::string> verify_content_hashes(const Manifest& manifest, const std::filesystem::path& base_dir) {
    std::vector<std::string> bad;
    for (const auto& r : manifest.records()) {
        if (!r.sha256) continue;
        std::filesystem::path p = r.uri;
        if (r.uri.rfind("file://", 0) == 0) p = r.uri.substr(7);
        if (p.is_relative()) p = base_dir / p;
        std::ifstream in(p, std::ios::binary);
        if (!in) {
            bad.push_back(r.stimulus_id);
            continue;
        }
        const std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
        std::string expected = *r.sha256;
        std::transform(expected.begin(), expected.end(), expected.begin(), [](unsigned char c) { return std::tolower(c); });
        if (sha256_hex(content) != expected) bad.push_back(r.stimulus_id);
    }
    return bad;
}

bool compatible_in_trial(const StimulusRecord& a, const StimulusRecord& b) {
    bool overlap = false;
    for (const auto& s : a.subject_ids) {
        if (b.subject_ids.count(s)) {
            overlap = true;
            break;
        }
    }
    if (!overlap) return true;
    // A bona fide image may accompany a manipulation of itself.
    auto is_source_of = [](const StimulusRecord& bona_fide, const StimulusRecord& manipulated) {
        return !bona_fide.manipulated() && manipulated.manipulated() &&
               std::includes(manipulated.subject_ids.begin(), manipulated.subject_ids.end(),
                             bona_fide.subject_ids.begin(), bona_fide.subject_ids.end());
    };
    return is_source_of(a, b) || is_source_of(b, a);
}

namespace {

std::string cell_name(const BalanceCell& c) { return to_string(c.type) + "/" + to_string(c.difficulty); }

// Seeded order of manipulated targets within one cell, alternating methods.
std::vector<const StimulusRecord*> interleave_methods(std::vector<const StimulusRecord*> items, Rng& rng) {
    std::map<std::string, std::vector<const StimulusRecord*>> by_method;
    for (const auto* r : items) by_method[r->manipulation->method].push_back(r);
    std::vector<std::vector<const StimulusRecord*>> groups;
    for (auto& [_, v] : by_method) {
        rng.shuffle(std::span(v));
        groups.push_back(std::move(v));
    }
    rng.shuffle(std::span(groups));
    std::vector<const StimulusRecord*> out;
    for (std::size_t i = 0; out.size() < items.size(); ++i) {
        for (const auto& g : groups) {
            if (i < g.size()) out.push_back(g[i]);
        }
    }
    return out;
}

struct CellPool {
    BalanceCell cell;
    std::size_t rank = 0;
    std::vector<const StimulusRecord*> items;
    std::size_t used = 0;
    std::size_t total_count = 0;
};

}  // namespace

TrialMaterial select_balanced(const Manifest& manifest, const TrialCounts& counts, std::uint64_t seed) {
    if (counts.two_afc < 0 || counts.abx < 0 || counts.yes_no < 0) {
        throw ValidationError("trial counts must be non-negative");
    }
    if (!(counts.catch_proportion >= 0.0 && counts.catch_proportion <= 1.0)) {
        throw ValidationError("catch proportion must lie in [0, 1]");
    }
    Rng rng(seed);

    std::vector<const StimulusRecord*> bona_fide_targets, bona_fide_refs, manipulated_refs;
    std::map<BalanceCell, std::vector<const StimulusRecord*>> by_cell;
    std::vector<const StimulusRecord*> sorted;
    for (const auto& r : manifest.records()) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->stimulus_id < b->stimulus_id; });
    for (const auto* r : sorted) {
        if (r->role == Role::Target) {
            if (r->manipulated()) {
                by_cell[BalanceCell{r->manipulation->type, *r->difficulty}].push_back(r);
            } else {
                bona_fide_targets.push_back(r);
            }
        } else {
            (r->manipulated() ? manipulated_refs : bona_fide_refs).push_back(r);
        }
    }
    rng.shuffle(std::span(bona_fide_targets));
    rng.shuffle(std::span(bona_fide_refs));
    rng.shuffle(std::span(manipulated_refs));

    std::vector<CellPool> cells;
    for (auto& [cell, items] : by_cell) cells.push_back(CellPool{cell, 0, interleave_methods(items, rng)});
    {
        std::vector<std::size_t> ranks(cells.size());
        for (std::size_t i = 0; i < ranks.size(); ++i) ranks[i] = i;
        rng.shuffle(std::span(ranks));
        for (std::size_t i = 0; i < cells.size(); ++i) cells[i].rank = ranks[i];
    }

    const int abx_signal = (counts.abx + 1) / 2;
    const int abx_noise = counts.abx / 2;
    const int yes_no_catch = static_cast<int>(std::lround(counts.yes_no * counts.catch_proportion));
    const int yes_no_signal = counts.yes_no - yes_no_catch;
    const int manipulated_needed = counts.two_afc + abx_signal + yes_no_signal;
    const int bona_fide_needed = counts.two_afc + abx_noise + yes_no_catch;

    std::size_t manipulated_available = 0;
    for (const auto& c : cells) manipulated_available += c.items.size();
    if (static_cast<std::size_t>(manipulated_needed) > manipulated_available) {
        throw InsufficientMaterialError("manipulated targets: need " + std::to_string(manipulated_needed) + ", have " +
                                        std::to_string(manipulated_available));
    }
    if (static_cast<std::size_t>(bona_fide_needed) > bona_fide_targets.size()) {
        throw InsufficientMaterialError("bona fide targets: need " + std::to_string(bona_fide_needed) + ", have " +
                                        std::to_string(bona_fide_targets.size()));
    }
    if (counts.abx > 0 && (bona_fide_refs.empty() || manipulated_refs.empty())) {
        throw InsufficientMaterialError(std::string("reference pool: ABX trials need ") +
                                        (bona_fide_refs.empty() ? "bona fide" : "manipulated") + " references");
    }

    auto pick_manipulated = [&](int n, const char* procedure) {
        std::vector<const StimulusRecord*> picked;
        std::vector<std::size_t> proc_count(cells.size(), 0);
        for (int i = 0; i < n; ++i) {
            std::optional<std::size_t> best;
            for (std::size_t c = 0; c < cells.size(); ++c) {
                if (cells[c].used == cells[c].items.size()) continue;
                if (!best) {
                    best = c;
                    continue;
                }
                const auto key = [&](std::size_t k) {
                    return std::tuple(proc_count[k], cells[k].total_count, cells[k].rank);
                };
                if (key(c) < key(*best)) best = c;
            }
            auto& pool = cells[*best];
            picked.push_back(pool.items[pool.used++]);
            ++proc_count[*best];
            ++pool.total_count;
        }
        if (n > 0 && !cells.empty()) {
            const auto [lo, hi] = std::minmax_element(proc_count.begin(), proc_count.end());
            if (*hi - *lo > 1) {
                const auto& deficient = cells[static_cast<std::size_t>(lo - proc_count.begin())];
                throw InsufficientMaterialError(std::string("cannot balance ") + procedure + " targets: class " +
                                                cell_name(deficient.cell) + " has only " +
                                                std::to_string(deficient.items.size()) + " manipulated targets");
            }
        }
        return picked;
    };

    const auto afc_manipulated = pick_manipulated(counts.two_afc, "2AFC");
    const auto abx_manipulated = pick_manipulated(abx_signal, "ABX");
    const auto yes_no_manipulated = pick_manipulated(yes_no_signal, "Yes/No");
    if (!cells.empty()) {
        auto [lo, hi] = std::minmax_element(cells.begin(), cells.end(), [](const CellPool& a, const CellPool& b) {
            return a.total_count < b.total_count;
        });
        if (hi->total_count - lo->total_count > 1) {
            throw InsufficientMaterialError("cannot balance targets overall: class " + cell_name(lo->cell) +
                                            " has only " + std::to_string(lo->items.size()) + " manipulated targets");
        }
    }

    std::vector<bool> bona_fide_used(bona_fide_targets.size(), false);
    auto take_bona_fide = [&](const StimulusRecord* partner) -> const StimulusRecord* {
        for (std::size_t i = 0; i < bona_fide_targets.size(); ++i) {
            if (bona_fide_used[i]) continue;
            if (partner && !compatible_in_trial(*partner, *bona_fide_targets[i])) continue;
            bona_fide_used[i] = true;
            return bona_fide_targets[i];
        }
        throw InsufficientMaterialError("bona fide targets: no unused image compatible with '" +
                                        (partner ? partner->stimulus_id : std::string{}) + "'");
    };

    TrialMaterial material;
    for (const auto* m : afc_manipulated) {
        material.two_afc.push_back({m->stimulus_id, take_bona_fide(m)->stimulus_id});
    }

    std::size_t bf_ref = 0, m_ref = 0;
    auto take_reference = [&](std::vector<const StimulusRecord*>& pool, std::size_t& cursor,
                              const StimulusRecord& x) -> const StimulusRecord* {
        for (std::size_t tries = 0; tries < pool.size(); ++tries) {
            const auto* r = pool[cursor++ % pool.size()];
            if (compatible_in_trial(*r, x)) return r;
        }
        throw InsufficientMaterialError("reference pool: no reference compatible with '" + x.stimulus_id + "'");
    };
    auto add_abx = [&](const StimulusRecord* x) {
        AbxMaterial a;
        a.x = x->stimulus_id;
        a.x_manipulated = x->manipulated();
        a.bona_fide_reference = take_reference(bona_fide_refs, bf_ref, *x)->stimulus_id;
        a.manipulated_reference = take_reference(manipulated_refs, m_ref, *x)->stimulus_id;
        material.abx.push_back(std::move(a));
    };
    for (const auto* m : abx_manipulated) add_abx(m);
    for (int i = 0; i < abx_noise; ++i) add_abx(take_bona_fide(nullptr));

    for (const auto* m : yes_no_manipulated) material.yes_no.push_back({m->stimulus_id, true});
    for (int i = 0; i < yes_no_catch; ++i) material.yes_no.push_back({take_bona_fide(nullptr)->stimulus_id, false});
    return material;
}

std::string to_string(StimulusKind v) { return v == StimulusKind::BonaFide ? "bona_fide" : "manipulated"; }

std::string to_string(ManipulationType v) {
    switch (v) {
        case ManipulationType::FaceSwap: return "face_swap";
        case ManipulationType::Morph: return "morph";
        case ManipulationType::Retouch: return "retouch";
    }
    return "?";
}

std::string to_string(Difficulty v) { return v == Difficulty::Easy ? "easy" : "hard"; }

std::string to_string(Role v) { return v == Role::Target ? "target" : "reference"; }

StimulusKind kind_from_string(const std::string& s) {
    const auto n = normalize_token(s);
    if (n == "bonafide") return StimulusKind::BonaFide;
    if (n == "manipulated") return StimulusKind::Manipulated;
    throw ValidationError("unknown kind '" + s + "'");
}

ManipulationType manipulation_type_from_string(const std::string& s) {
    const auto n = normalize_token(s);
    if (n == "faceswap" || n == "faceswapping") return ManipulationType::FaceSwap;
    if (n == "morph" || n == "morphing") return ManipulationType::Morph;
    if (n == "retouch" || n == "retouching") return ManipulationType::Retouch;
    throw ValidationError("unknown manipulation_type '" + s + "'");
}

Difficulty difficulty_from_string(const std::string& s) {
    const auto n = normalize_token(s);
    if (n == "easy") return Difficulty::Easy;
    if (n == "hard") return Difficulty::Hard;
    throw ValidationError("unknown difficulty '" + s + "'");
}

Role role_from_string(const std::string& s) {
    const auto n = normalize_token(s);
    if (n == "target") return Role::Target;
    if (n == "reference") return Role::Reference;
    throw ValidationError("unknown role '" + s + "'");
}

}  // namespace facepsy::catalog
