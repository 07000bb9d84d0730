#pragma once

#include <map>
#include <optional>
#include <string>

#include "semlink/dppo.hpp"
#include "semlink/semcodec.hpp"

namespace semlink {

// Persisted shared artifacts: the trained codec, its task-relevance weights
// and any trained allocation policies. Binary layout is documented in
// docs/kb_format.md; doubles are little-endian f64.
struct KnowledgeBase {
    std::optional<CodecParams> codec;
    std::optional<Vec> str; // per-feature task relevance, length C
    std::map<std::string, PolicyParams> policies;

    const PolicyParams* find_policy(const std::string& name) const;
};

void save_kb(const KnowledgeBase& kb, const std::string& path);
KnowledgeBase load_kb(const std::string& path);

} // namespace semlink
