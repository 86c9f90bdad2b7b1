#pragma once

#include <memory>

#include "viewpoint/config.hpp"
#include "viewpoint/corpus.hpp"
#include "viewpoint/expansion.hpp"
#include "viewpoint/pipeline.hpp"
#include "viewpoint/remote_scorer.hpp"
#include "viewpoint/scorers.hpp"

namespace viewpoint {

/// Everything needed to answer queries, wired from Settings.
struct Runtime {
    std::shared_ptr<const CorpusStore> store;
    std::shared_ptr<const Scorer> baseline;
    std::shared_ptr<const Scorer> scorer;
    std::shared_ptr<const RemoteScorer> remote;  // set when the remote backend is selected
    std::shared_ptr<const DocumentSource> expansion;
    std::shared_ptr<const Engine> engine;
};

/// A configured store_dir is opened as-is. Without one, an in-memory store is
/// filled from the individual corpus paths.
inline CorpusStore load_store(const Settings& s)
{
    if (!s.store_dir.empty()) {
        return CorpusStore::open(s.store_dir);
    }
    CorpusStore store;
    if (!s.claims_path.empty()) store.ingest_claims(s.claims_path);
    if (!s.perspectives_path.empty()) store.ingest_perspectives(s.perspectives_path);
    if (!s.evidence_path.empty()) store.ingest_evidence(s.evidence_path);
    if (!s.gold_path.empty()) store.ingest_gold(s.gold_path);
    return store;
}

inline Runtime build_runtime(const Settings& s, std::shared_ptr<const CorpusStore> store)
{
    Runtime rt;
    rt.store = std::move(store);
    Tokenizer tokenizer = s.stopwords_path.empty() ? Tokenizer{} : Tokenizer::from_stopword_file(s.stopwords_path);
    auto indexes = Engine::build_indexes(*rt.store, tokenizer);
    CueLexicon lexicon =
        s.cue_lexicon_path.empty() ? CueLexicon::starter() : CueLexicon::from_file(s.cue_lexicon_path.string());
    rt.baseline = std::make_shared<const BaselineScorer>(indexes.perspectives, std::move(lexicon));
    switch (s.scorer_backend) {
    case ScorerBackend::baseline: rt.scorer = rt.baseline; break;
    case ScorerBackend::gold: rt.scorer = std::make_shared<const GoldScorer>(*rt.store, rt.baseline); break;
    case ScorerBackend::remote: {
        RemoteScorerOptions opts{s.remote_url, s.remote_max_in_flight,
                                 std::chrono::milliseconds(static_cast<long long>(s.remote_timeout_s * 1000.0))};
        rt.remote = std::make_shared<const RemoteScorer>(std::move(opts), rt.baseline);
        rt.scorer = rt.remote;
        break;
    }
    }
    if (!s.expansion_dir.empty()) {
        rt.expansion = std::make_shared<const FileDocumentSource>(s.expansion_dir, tokenizer);
    }
    rt.engine = std::make_shared<const Engine>(rt.store, std::move(indexes), rt.scorer, rt.expansion);
    return rt;
}

inline Runtime build_runtime(const Settings& s)
{
    return build_runtime(s, std::make_shared<const CorpusStore>(load_store(s)));
}

}  // namespace viewpoint
