#include "rebol/reformulation.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

namespace rebol {

using nlohmann::json;

ReformulationLoad load_reformulations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open reformulations file: " + path);

  ReformulationLoad out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(path + ":" + std::to_string(lineno) + ": malformed JSON line");
    }
    if (!j.contains("query_id") || !j["query_id"].is_string() ||
        !j.contains("reformulations") || !j["reformulations"].is_array()) {
      throw Error(path + ":" + std::to_string(lineno) +
                  ": expected {query_id, reformulations: [...]} ");
    }
    ReformulationSet set;
    set.query_id = j["query_id"].get<std::string>();
    for (const auto& r : j["reformulations"]) {
      if (!r.is_string() || r.get<std::string>().empty()) {
        throw Error(path + ":" + std::to_string(lineno) +
                    ": empty or non-string reformulation for query " + set.query_id);
      }
      set.texts.push_back(r.get<std::string>());
    }
    out.sets[set.query_id] = std::move(set);
  }
  return out;
}

void attach_reformulation_embeddings(ReformulationSet& set,
                                     const std::string& query_text,
                                     const EmbeddingStore& ref_store,
                                     Warnings& warnings) {
  std::vector<std::string> kept_texts;
  std::vector<std::vector<float>> kept_embeddings;
  for (std::size_t i = 0; i < set.texts.size(); ++i) {
    if (set.texts[i] == query_text) {
      warnings.add("query " + set.query_id + ": reformulation " + std::to_string(i) +
                   " duplicates the query text verbatim, dropped");
      continue;
    }
    std::string ref_id = set.query_id + "#r" + std::to_string(i);
    auto row = ref_store.find(ref_id);
    if (!row) {
      throw Error("reformulation embedding id not found: " + ref_id);
    }
    auto span = ref_store.row(*row);
    kept_texts.push_back(set.texts[i]);
    kept_embeddings.emplace_back(span.begin(), span.end());
  }
  set.texts = std::move(kept_texts);
  set.embeddings = std::move(kept_embeddings);
}

ReformulationSet generate_reformulations(const oracle::OracleConfig& llm_config,
                                         const std::string& query_id,
                                         const std::string& query_text, int count,
                                         Warnings& warnings) {
  if (count < 1) throw Error("generate_reformulations: count must be >= 1");

  const std::string system_text =
      "You rewrite search queries. Given a query, produce alternative phrasings "
      "that capture different aspects or wordings of the same information need.";
  auto user_text = [&](int n, bool strict) {
    std::string u = "Query: " + query_text + "\n\nWrite " + std::to_string(n) +
                    " distinct reformulations of this query. Respond with a JSON "
                    "array of " + std::to_string(n) + " strings and nothing else.";
    if (strict) {
      u += "\nYour previous reply could not be parsed. Output ONLY the JSON array "
           "of strings, e.g. [\"first\", \"second\"]. No prose, no code fences.";
    }
    return u;
  };

  auto ask = [&](int n, bool strict) -> std::optional<std::vector<std::string>> {
    std::string text = oracle::llm_chat(llm_config, system_text, user_text(n, strict));
    return oracle::extract_first_string_array(text);
  };

  ReformulationSet set;
  set.query_id = query_id;
  std::unordered_set<std::string> seen;
  seen.insert(query_text);  // never keep the query itself

  auto absorb = [&](const std::vector<std::string>& texts) {
    for (const auto& t : texts) {
      if (static_cast<int>(set.texts.size()) >= count) {
        warnings.add("query " + query_id + ": model returned more than " +
                     std::to_string(count) + " reformulations, extra dropped");
        break;
      }
      if (t.empty()) continue;
      if (!seen.insert(t).second) {
        warnings.add("query " + query_id + ": duplicate reformulation dropped");
        continue;
      }
      set.texts.push_back(t);
    }
  };

  auto first = ask(count, false);
  if (!first) first = ask(count, true);  // one reprompt on malformed output
  if (!first) {
    throw Error("generate_reformulations: persistent malformed output for query " +
                query_id);
  }
  absorb(*first);

  if (static_cast<int>(set.texts.size()) < count) {
    // one top-up round for the shortfall
    int missing = count - static_cast<int>(set.texts.size());
    if (auto more = ask(missing, false)) absorb(*more);
  }
  if (static_cast<int>(set.texts.size()) < count) {
    warnings.add("query " + query_id + ": only " + std::to_string(set.texts.size()) +
                 " of " + std::to_string(count) + " reformulations obtained");
  }
  return set;
}

}  // namespace rebol
