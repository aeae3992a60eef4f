#include "epgf/engine.hpp"

#include "json.hpp"

namespace epgf {

using nlohmann::json;

std::string trace_to_jsonl(const GenerationTrace& trace, const Alphabet& alphabet,
                           const std::string& id) {
    json rounds = json::array();
    for (const auto& round : trace.rounds) {
        json cands = json::array();
        for (const auto& cand : round.candidates) {
            std::string text;
            for (TokenId tok : cand.segment.tokens) {
                if (alphabet.is_residue(tok)) text.push_back(alphabet.residue_letter(tok));
            }
            json c = {{"segment", text},
                      {"terminal", cand.segment.terminal},
                      {"logprob", cand.logprob},
                      {"selected", cand.selected}};
            if (cand.bioscore) c["bioscore"] = *cand.bioscore;
            cands.push_back(std::move(c));
        }
        rounds.push_back({{"tau", round.tau_used},
                          {"candidates", std::move(cands)},
                          {"retained_ids", round.retained_ids},
                          {"selected_id", round.selected_id},
                          {"fallback_used", round.fallback_used},
                          {"resample_count", round.resample_count},
                          {"selection_u", round.selection_u}});
    }
    json j = {{"id", id},
              {"seed", trace.seed},
              {"tag", trace.tag ? json(*trace.tag) : json(nullptr)},
              {"stop_reason", to_string(trace.stop_reason)},
              {"final_sequence", trace.final_sequence},
              {"rounds", std::move(rounds)}};
    return j.dump();
}

std::string generation_description(const std::optional<std::string>& tag, double overall,
                                   StopReason stop, std::uint64_t seed) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "tag=%s bioscore=%.6f stop=%s seed=%llu",
                  tag ? tag->c_str() : "none", overall, to_string(stop).c_str(),
                  static_cast<unsigned long long>(seed));
    return std::string(buf);
}

}  // namespace epgf
