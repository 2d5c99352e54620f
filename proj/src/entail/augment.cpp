#include <algorithm>
#include <cmath>

#include "coliee/entail.hpp"
#include "coliee/error.hpp"
#include "coliee/util.hpp"

namespace coliee {

nlohmann::json AugTemplate::to_json() const
{
    return {{"template_id", template_id},
            {"query_id", query_id},
            {"tokens", tokens},
            {"mask_positions", mask_positions},
            {"mask_ratio", mask_ratio},
            {"seed", seed},
            {"top_k_fill", top_k_fill}};
}

AugTemplate AugTemplate::from_json(const nlohmann::json& j)
{
    AugTemplate t;
    try {
        t.template_id = j.at("template_id").get<std::string>();
        t.query_id = j.at("query_id").get<std::string>();
        t.tokens = j.at("tokens").get<std::vector<std::string>>();
        t.mask_positions = j.at("mask_positions").get<std::vector<std::size_t>>();
        t.mask_ratio = j.at("mask_ratio").get<double>();
        t.seed = j.at("seed").get<std::uint64_t>();
        t.top_k_fill = j.at("top_k_fill").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("malformed template: ") + e.what());
    }
    for (std::size_t p : t.mask_positions) {
        if (p >= t.tokens.size() || t.tokens[p] != kMaskToken) {
            throw Error(ErrorKind::validation, "template '" + t.template_id + "' has a mask position without [MASK]");
        }
    }
    return t;
}

AugTemplate make_masked_template(const Query& query,
                                 double mask_ratio,
                                 std::uint64_t seed,
                                 std::size_t top_k_fill,
                                 std::size_t variant)
{
    if (!(mask_ratio > 0.0 && mask_ratio < 1.0)) throw Error(ErrorKind::config, "mask_ratio must be in (0, 1)");
    if (top_k_fill == 0) throw Error(ErrorKind::config, "top_k_fill must be at least 1");
    AugTemplate t;
    t.tokens = split_whitespace(query.text);
    if (t.tokens.empty()) throw Error(ErrorKind::precondition, "query '" + query.id + "' has no tokens to mask");
    t.template_id = query.id + "/aug-" + std::to_string(variant);
    t.query_id = query.id;
    t.mask_ratio = mask_ratio;
    t.seed = seed;
    t.top_k_fill = top_k_fill;

    const std::size_t n = t.tokens.size();
    const auto wanted = static_cast<std::size_t>(std::llround(mask_ratio * static_cast<double>(n)));
    const std::size_t count = std::min(n, std::max<std::size_t>(1, wanted));
    SeededRng rng(seed);
    t.mask_positions = rng.sample_without_replacement(n, count);
    std::sort(t.mask_positions.begin(), t.mask_positions.end());
    for (std::size_t p : t.mask_positions) t.tokens[p] = std::string(kMaskToken);
    return t;
}

nlohmann::json AugmentedExample::to_json() const
{
    json j{{"template_id", template_id}, {"query_id", query_id}, {"text", text}, {"articles", articles}};
    if (label) j["label"] = std::string(to_string(*label));
    return j;
}

AugmentedExample AugmentedExample::from_json(const nlohmann::json& j)
{
    AugmentedExample a;
    try {
        a.template_id = j.at("template_id").get<std::string>();
        a.query_id = j.at("query_id").get<std::string>();
        a.text = j.at("text").get<std::string>();
        a.articles = j.value("articles", std::vector<std::string>{});
        if (j.contains("label") && !j["label"].is_null()) a.label = parse_answer(j["label"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("malformed augmented example: ") + e.what());
    }
    return a;
}

AugmentedExample realize_augmented(const AugTemplate& tmpl,
                                   const FillStore& fills,
                                   std::uint64_t seed,
                                   std::vector<std::string> article_texts,
                                   std::optional<Answer> label)
{
    if (tmpl.top_k_fill == 0) throw Error(ErrorKind::config, "top_k_fill must be at least 1");
    SeededRng rng(seed);
    auto tokens = tmpl.tokens;
    for (std::size_t p : tmpl.mask_positions) {
        const auto* cands = fills.find(tmpl.template_id, p);
        if (cands == nullptr || cands->empty()) {
            throw Error(ErrorKind::fill,
                        "no fill candidates for mask " + std::to_string(p) + " of template '" + tmpl.template_id + "'");
        }
        const std::size_t k = std::min(tmpl.top_k_fill, cands->size());
        tokens.at(p) = (*cands)[rng.index(k)].token;
    }
    AugmentedExample out;
    out.template_id = tmpl.template_id;
    out.query_id = tmpl.query_id;
    out.text = join(tokens, " ");
    out.articles = std::move(article_texts);
    out.label = label;
    return out;
}

}  // namespace coliee
