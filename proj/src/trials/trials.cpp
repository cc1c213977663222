#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "fcb/synthetic.hpp"
#include "fcb/trials.hpp"

namespace fcb {

std::string to_string(TrialKind kind) {
    switch (kind) {
        case TrialKind::mated_other: return "mated_other";
        case TrialKind::mated_self: return "mated_self";
        case TrialKind::non_mated: return "non_mated";
    }
    return "?";
}

TrialKind parse_trial_kind(const std::string& name) {
    for (const auto k : {TrialKind::mated_other, TrialKind::mated_self, TrialKind::non_mated}) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("unknown trial kind '" + name + "'");
}

std::string to_string(Source source) { return source == Source::lossy ? "lossy" : "lossless"; }

namespace {

/// Records sorted by image_id; trial generation never depends on storage order.
std::vector<const ImageRecord*> canonical(const DatasetManifest& manifest) {
    std::vector<const ImageRecord*> out;
    out.reserve(manifest.records.size());
    for (const auto& r : manifest.records) out.push_back(&r);
    std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->image_id < b->image_id; });
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i]->image_id == out[i - 1]->image_id) {
            throw Error("duplicate image_id '" + out[i]->image_id + "' in manifest");
        }
    }
    return out;
}

TrialPair lossy_pair(const std::string& a, const std::string& b, TrialKind kind) {
    return {a, b, kind, Source::lossy, Source::lossy};
}

}  // namespace

TrialSet generate_mated_other(const DatasetManifest& manifest) {
    std::map<std::string, std::vector<std::string>> by_subject;
    for (const auto* r : canonical(manifest)) by_subject[r->subject_id].push_back(r->image_id);
    TrialSet set{TrialKind::mated_other, {}};
    for (const auto& [subject, ids] : by_subject) {
        for (std::size_t i = 0; i < ids.size(); ++i) {
            for (std::size_t j = i + 1; j < ids.size(); ++j) {
                set.pairs.push_back(lossy_pair(ids[i], ids[j], TrialKind::mated_other));
            }
        }
    }
    std::sort(set.pairs.begin(), set.pairs.end());
    return set;
}

TrialSet generate_mated_self(const DatasetManifest& manifest) {
    TrialSet set{TrialKind::mated_self, {}};
    for (const auto* r : canonical(manifest)) {
        set.pairs.push_back({r->image_id, r->image_id, TrialKind::mated_self, Source::lossless, Source::lossy});
    }
    return set;
}

std::size_t cross_subject_pairs(const DatasetManifest& manifest) {
    std::map<std::string, std::size_t> sizes;
    for (const auto& r : manifest.records) ++sizes[r.subject_id];
    const std::size_t n = manifest.records.size();
    std::size_t same = 0;
    for (const auto& [s, k] : sizes) same += k * k;
    return (n * n - same) / 2;
}

TrialSet generate_non_mated(const DatasetManifest& manifest, std::size_t count, std::uint64_t seed) {
    const auto recs = canonical(manifest);
    if (manifest.subject_count() < 2) throw SampleError("non-mated trials need at least 2 subjects");
    if (count == 0) throw SampleError("non-mated trial count must be positive");
    const std::size_t total = cross_subject_pairs(manifest);
    if (count > total) {
        throw SampleError("requested " + std::to_string(count) + " non-mated pairs but only " +
                          std::to_string(total) + " exist");
    }

    std::mt19937_64 rng(seed);
    std::vector<std::pair<std::size_t, std::size_t>> chosen;
    if (count * 2 > total) {
        // Dense request: partial Fisher-Yates over the enumerated pairs.
        std::vector<std::pair<std::size_t, std::size_t>> all;
        all.reserve(total);
        for (std::size_t i = 0; i < recs.size(); ++i) {
            for (std::size_t j = i + 1; j < recs.size(); ++j) {
                if (recs[i]->subject_id != recs[j]->subject_id) all.emplace_back(i, j);
            }
        }
        for (std::size_t k = 0; k < count; ++k) {
            std::swap(all[k], all[k + synth::below(rng, all.size() - k)]);
        }
        chosen.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
    } else {
        // Sparse request: uniform ordered draws, rejecting same-subject and
        // repeated unordered pairs.
        std::set<std::pair<std::size_t, std::size_t>> seen;
        const std::size_t n = recs.size();
        while (seen.size() < count) {
            auto i = static_cast<std::size_t>(synth::below(rng, n));
            auto j = static_cast<std::size_t>(synth::below(rng, n));
            if (recs[i]->subject_id == recs[j]->subject_id) continue;
            if (i > j) std::swap(i, j);
            seen.emplace(i, j);
        }
        chosen.assign(seen.begin(), seen.end());
    }

    TrialSet set{TrialKind::non_mated, {}};
    set.pairs.reserve(chosen.size());
    for (const auto& [i, j] : chosen) {
        set.pairs.push_back(lossy_pair(recs[i]->image_id, recs[j]->image_id, TrialKind::non_mated));
    }
    std::sort(set.pairs.begin(), set.pairs.end());
    return set;
}

std::string format_trial_set(const TrialSet& set) {
    std::ostringstream out;
    out << "kind\tprobe_id\tprobe_source\treference_id\treference_source\n";
    for (const auto& p : set.pairs) {
        out << to_string(p.kind) << '\t' << p.probe_id << '\t' << to_string(p.probe_source) << '\t'
            << p.reference_id << '\t' << to_string(p.reference_source) << '\n';
    }
    return out.str();
}

TrialScores score_trials(const TrialSet& trials, const EmbeddingStore& store, CodecId codec, ByteBudget budget) {
    auto key_for = [&](const std::string& id, Source src) {
        return src == Source::lossless ? EmbeddingKey::lossless(id) : EmbeddingKey::lossy(id, codec, budget);
    };
    TrialScores out;
    for (const auto& pair : trials.pairs) {
        const auto* probe = store.find(key_for(pair.probe_id, pair.probe_source));
        const auto* reference = store.find(key_for(pair.reference_id, pair.reference_source));
        if (!probe || !reference) {
            const auto& missing = !probe ? pair.probe_id : pair.reference_id;
            const auto src = !probe ? pair.probe_source : pair.reference_source;
            out.failures.push_back({pair, codec, budget.target_bytes,
                                    "missing " + to_string(src) + " embedding for " + missing});
            continue;
        }
        try {
            out.scores.push_back({pair, codec, budget.target_bytes, cosine_similarity(*probe, *reference)});
        } catch (const SimilarityError& e) {
            out.failures.push_back({pair, codec, budget.target_bytes, e.what()});
        }
    }
    return out;
}

}  // namespace fcb
