//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use analogon_core::abstraction::abstract_corpus;
use analogon_core::corpus::{is_stopword, load_corpus};
use analogon_core::embedding::{load_embeddings, split_camel_case};
use analogon_core::kb::load_kb;
use analogon_core::query::{build_query, step2_terms, FocusSelection, QueryToken};
use analogon_core::search::{
    fallback_purpose_mechanism, overlap_report, search_focus_abstracted, search_focus_only, search_overall_glove,
    search_overall_purpmech, DocumentVectors, Match, Method, PurposeMechanismVectors, ScenarioMatches, DEFAULT_POOL,
};
use analogon_core::stats::{cronbach_alpha, one_way_anova, q_crit, CorrelationResult};
use analogon_core::{Analyzer, Corpus, EmbeddingStore, KnowledgeBase};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Check = Result<(), String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

struct Fixture {
    demo: Corpus,
    synthetic: Corpus,
    kb: KnowledgeBase,
    store: EmbeddingStore,
}

fn fixture() -> Fixture {
    let kb = load_kb(data("demo/kb.jsonl"), Some(&data("demo/kb_fallback.jsonl"))).expect("kb");
    let analyzer = Analyzer::new().with_kb_terms(kb.terms());
    Fixture {
        demo: load_corpus(data("demo/corpus.jsonl"), &analyzer).expect("demo corpus"),
        synthetic: load_corpus(data("synthetic/corpus.jsonl"), &analyzer).expect("synthetic corpus"),
        kb,
        store: load_embeddings(data("demo/vectors.txt"), None).expect("vectors"),
    }
}

fn selection(name: &str) -> FocusSelection {
    let text = std::fs::read_to_string(data(&format!("demo/selections/{name}.json"))).expect("selection file");
    serde_json::from_str(&text).expect("selection json")
}

fn ensure(cond: bool, msg: impl Into<String>) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Check {
    let took = start.elapsed();
    ensure(took <= limit, format!("took {took:?}, limit {limit:?}"))
}

fn worked_example_queries(f: &Fixture) -> Check {
    let start = Instant::now();
    let seed = f.demo.get("soapy-slider").ok_or("soapy-slider missing")?;
    let q1 = build_query(seed, &selection("scenario1"), &f.kb).map_err(|e| e.to_string())?;
    let expected = [
        QueryToken::Term("extendable".into()),
        QueryToken::Term("different".into()),
        QueryToken::Property("SpatialQuantity".into()),
        QueryToken::Property("PersonalProduct".into()),
    ];
    ensure(q1.tokens == expected, format!("scenario 1 gave {:?}", q1.texts()))?;
    let q2 = build_query(seed, &selection("scenario2"), &f.kb).map_err(|e| e.to_string())?;
    let got: BTreeSet<QueryToken> = q2.tokens.iter().cloned().collect();
    let want: BTreeSet<QueryToken> = ["RemovingSomething", "LiquidTangibleThing", "SolidTangibleThing"]
        .into_iter()
        .map(|p| QueryToken::Property(p.into()))
        .collect();
    ensure(got == want && q2.tokens.len() == 3, format!("scenario 2 gave {:?}", q2.texts()))?;
    within(start, Duration::from_secs(1))
}

fn corpus_abstraction(f: &Fixture) -> Check {
    let props: BTreeSet<String> = ["PersonalProduct".to_string()].into();
    let out = abstract_corpus(&f.demo, &props, &f.kb);
    let doc = f.demo.get("knife-rolodex").ok_or("knife-rolodex missing")?;
    let a = out.iter().find(|a| a.doc_id == "knife-rolodex").ok_or("no abstracted knife doc")?;
    let knife_sentences: Vec<usize> = doc
        .sentences
        .iter()
        .flat_map(|s| s.tokens.iter().filter(|t| t.lemma == "knife").map(move |_| s.index))
        .collect();
    ensure(!knife_sentences.is_empty(), "demo knife doc has no knife token")?;
    let knife_reps: Vec<_> = a.replacements.iter().filter(|r| r.lemma == "knife").collect();
    ensure(knife_reps.len() == knife_sentences.len(), format!("{} knife tokens, {} replacements", knife_sentences.len(), knife_reps.len()))?;
    for (r, s) in knife_reps.iter().zip(&knife_sentences) {
        ensure(r.property == "PersonalProduct", format!("knife replaced by {}", r.property))?;
        ensure(r.sentence_index == *s, "provenance sentence index differs")?;
        ensure(a.tokens[r.token_index] == QueryToken::Property("PersonalProduct".into()), "token at provenance index is not the property")?;
    }
    ensure(!a.tokens.contains(&QueryToken::Term("knife".into())), "a knife term survived")
}

fn fisher_ci_arithmetic() -> Check {
    let start = Instant::now();
    let cases = [
        (-0.19, 400, -0.28, -0.09),
        (-0.36, 100, -0.52, -0.18),
        (-0.09, 100, -0.28, 0.11),
        (-0.02, 100, -0.22, 0.18),
        (-0.22, 100, -0.40, -0.02),
    ];
    let round2 = |v: f64| (v * 100.0).round() / 100.0;
    for (r, n, lo, hi) in cases {
        let c = CorrelationResult::from_r(r, n);
        let (l, h) = (round2(c.ci_low), round2(c.ci_high));
        ensure(
            (l - lo).abs() <= 0.015 && (h - hi).abs() <= 0.015,
            format!("r={r}, n={n}: got [{l}, {h}], expected [{lo}, {hi}]"),
        )?;
    }
    let p = CorrelationResult::from_r(-0.09, 100).p;
    ensure((p - 0.38).abs() <= 0.01, format!("p = {p} for r=-0.09, n=100"))?;
    within(start, Duration::from_secs(1))
}

fn brute_anova_f(groups: &[Vec<f64>]) -> f64 {
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let grand = all.iter().sum::<f64>() / all.len() as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand) * (m - grand);
        ssw += g.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    }
    (ssb / (groups.len() - 1) as f64) / (ssw / (all.len() - groups.len()) as f64)
}

fn stats_oracles() -> Check {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(2024);
    for i in 0..100 {
        let k = rng.random_range(2..6);
        let groups: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..rng.random_range(3..40)).map(|_| rng.random_range(1.0..5.0)).collect())
            .collect();
        let f = one_way_anova(&groups).map_err(|e| e.to_string())?.f;
        let b = brute_anova_f(&groups);
        ensure((f - b).abs() <= 1e-9 * b.abs().max(1.0), format!("fixture {i}: F {f} vs {b}"))?;
    }
    let same = one_way_anova(&vec![vec![2.0, 3.0, 4.0, 5.0]; 4]).map_err(|e| e.to_string())?;
    ensure(same.f == 0.0, format!("identical groups gave F = {}", same.f))?;
    let design: Vec<Vec<f64>> = (0..4).map(|_| (0..100).map(|_| rng.random_range(1.0..5.0)).collect()).collect();
    let a = one_way_anova(&design).map_err(|e| e.to_string())?;
    ensure((a.df_between, a.df_within) == (3, 396), format!("df ({}, {})", a.df_between, a.df_within))?;
    let q = q_crit(0.05, 4, 60.0);
    ensure((q - 3.74).abs() <= 0.01, format!("q_crit(0.05, 4, 60) = {q}"))?;
    let dup = cronbach_alpha(&vec![vec![1.0, 4.0, 2.0, 5.0, 3.0]; 2]).map_err(|e| e.to_string())?;
    ensure((dup - 1.0).abs() <= 1e-12, format!("duplicated raters alpha = {dup}"))?;
    // variances 5/3 and 9/4, total 91/12 -> alpha = 2 (1 - 47/91) = 88/91
    let hand = cronbach_alpha(&[vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 2.0, 4.0, 5.0]]).map_err(|e| e.to_string())?;
    ensure((hand - 88.0 / 91.0).abs() <= 1e-12, format!("hand matrix alpha = {hand}"))?;
    within(start, Duration::from_secs(10))
}

/// Plain re-statement of averaging: stopwords out, properties through
/// their CamelCase pieces.
fn brute_vector(store: &EmbeddingStore, tokens: &[QueryToken]) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; store.dim()];
    let mut n = 0.0;
    for t in tokens {
        let v: Vec<f64> = match t {
            QueryToken::Term(w) if is_stopword(w) => continue,
            QueryToken::Term(w) => match store.get(w) {
                Some(v) => v.iter().map(|&x| f64::from(x)).collect(),
                None => continue,
            },
            QueryToken::Property(p) => {
                let pieces: Vec<Vec<f64>> = split_camel_case(p)
                    .iter()
                    .filter_map(|piece| store.get(piece))
                    .map(|v| v.iter().map(|&x| f64::from(x)).collect())
                    .collect();
                if pieces.is_empty() {
                    continue;
                }
                (0..store.dim()).map(|i| pieces.iter().map(|v| v[i]).sum::<f64>() / pieces.len() as f64).collect()
            }
        };
        sum.iter_mut().zip(&v).for_each(|(s, x)| *s += x);
        n += 1.0;
    }
    (n > 0.0).then(|| sum.into_iter().map(|s| s / n).collect())
}

fn brute_cos(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    d / (na * nb)
}

fn brute_top_k(query: &[f64], docs: &[(String, Vec<QueryToken>)], store: &EmbeddingStore, seed: &str, k: usize) -> Vec<(String, f64)> {
    let mut scored: Vec<(String, f64)> = docs
        .iter()
        .filter(|(id, _)| id != seed)
        .filter_map(|(id, toks)| brute_vector(store, toks).map(|v| (id.clone(), brute_cos(query, &v))))
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

fn plain_docs(corpus: &Corpus) -> Vec<(String, Vec<QueryToken>)> {
    corpus
        .iter()
        .map(|d| (d.id.clone(), d.tokens().map(|t| QueryToken::Term(t.lemma.clone())).collect()))
        .collect()
}

fn brute_abstracted_docs(corpus: &Corpus, kb: &KnowledgeBase, props: &BTreeSet<String>) -> Vec<(String, Vec<QueryToken>)> {
    use analogon_core::Pos;
    corpus
        .iter()
        .map(|d| {
            let mut toks = Vec::new();
            for t in d.tokens() {
                let open = !t.is_stopword && matches!(t.pos, Pos::Noun | Pos::Verb | Pos::Adj);
                let hits: Vec<&str> = if open {
                    kb.all_abstractions(&t.lemma)
                        .iter()
                        .filter(|e| props.contains(&e.property))
                        .map(|e| e.property.as_str())
                        .collect()
                } else {
                    Vec::new()
                };
                if hits.is_empty() {
                    toks.push(QueryToken::Term(t.lemma.clone()));
                } else {
                    toks.extend(hits.into_iter().map(|p| QueryToken::Property(p.to_string())));
                }
            }
            (d.id.clone(), toks)
        })
        .collect()
}

/// Greedy purpose/mechanism selection written out independently.
fn brute_purpmech(pm: &PurposeMechanismVectors, seed: &str, k: usize) -> Vec<String> {
    let sv = pm.purpose(seed).unwrap().values().to_vec();
    let mut cands: Vec<(String, f64)> = pm
        .ids()
        .iter()
        .filter(|id| id.as_str() != seed)
        .map(|id| (id.clone(), brute_cos(&sv, pm.purpose(id).unwrap().values())))
        .collect();
    cands.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    cands.truncate(DEFAULT_POOL);
    let mut chosen = vec![0usize];
    while chosen.len() < k.min(cands.len()) {
        let mut best: Option<(f64, usize)> = None;
        for i in 0..cands.len() {
            if chosen.contains(&i) {
                continue;
            }
            let mi = pm.mechanism(&cands[i].0).unwrap().values();
            let md = chosen
                .iter()
                .map(|&j| 1.0 - brute_cos(pm.mechanism(&cands[j].0).unwrap().values(), mi))
                .fold(f64::INFINITY, f64::min);
            if best.is_none_or(|(bd, _)| md > bd) {
                best = Some((md, i));
            }
        }
        chosen.push(best.unwrap().1);
    }
    let mut out: Vec<(String, f64)> = chosen.into_iter().map(|i| cands[i].clone()).collect();
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    out.into_iter().map(|(id, _)| id).collect()
}

fn check_list(label: &str, got: &[Match], seed: &str, expect_len: usize) -> Check {
    ensure(got.len() == expect_len, format!("{label}: {} results, expected {expect_len}", got.len()))?;
    ensure(got.iter().all(|m| m.doc_id != seed), format!("{label}: seed returned"))?;
    ensure(got.windows(2).all(|w| w[0].score >= w[1].score), format!("{label}: scores increase"))?;
    ensure(got.iter().enumerate().all(|(i, m)| m.rank == i + 1), format!("{label}: ranks not 1..k"))
}

fn same_ranking(label: &str, got: &[Match], want: &[(String, f64)]) -> Check {
    let ids: Vec<&str> = got.iter().map(|m| m.doc_id.as_str()).collect();
    let want_ids: Vec<&str> = want.iter().map(|(id, _)| id.as_str()).collect();
    ensure(ids == want_ids, format!("{label}: {ids:?} vs brute force {want_ids:?}"))?;
    for (m, (_, s)) in got.iter().zip(want) {
        ensure((m.score - s).abs() < 1e-9, format!("{label}: score {} vs {s}", m.score))?;
    }
    Ok(())
}

fn lines(ms: &[Match]) -> String {
    ms.iter().map(|m| m.to_json_line() + "\n").collect()
}

fn retrieval_on(corpus: &Corpus, f: &Fixture, k: usize, label: &str) -> Check {
    let seed_doc = corpus.get("soapy-slider").ok_or("seed missing")?;
    let seed = seed_doc.id.as_str();
    let expect_len = k.min(corpus.len() - 1);
    let docs = DocumentVectors::build(corpus, &f.store);
    let plain = plain_docs(corpus);

    for name in ["scenario1", "scenario2"] {
        let sel = selection(name);
        let q = build_query(seed_doc, &sel, &f.kb).map_err(|e| e.to_string())?;
        let run = || search_focus_abstracted(&q, corpus, &f.kb, &f.store, k).map_err(|e| e.to_string());
        let fa = run()?;
        check_list(&format!("{label}/{name}/focus-abstracted"), &fa, seed, expect_len)?;
        let qv = brute_vector(&f.store, &q.tokens).ok_or("query vector")?;
        let want = brute_top_k(&qv, &brute_abstracted_docs(corpus, &f.kb, &q.properties()), &f.store, seed, k);
        same_ranking(&format!("{label}/{name}/focus-abstracted"), &fa, &want)?;
        ensure(lines(&fa) == lines(&run()?), "focus-abstracted output differs between runs")?;

        let terms = step2_terms(seed_doc, &sel).map_err(|e| e.to_string())?;
        let run = || search_focus_only(&terms, seed, &docs, &f.store, k).map_err(|e| e.to_string());
        let fo = run()?;
        check_list(&format!("{label}/{name}/focus-only"), &fo, seed, expect_len)?;
        let term_tokens: Vec<QueryToken> = terms.iter().map(|t| QueryToken::Term(t.clone())).collect();
        let qv = brute_vector(&f.store, &term_tokens).ok_or("query vector")?;
        same_ranking(&format!("{label}/{name}/focus-only"), &fo, &brute_top_k(&qv, &plain, &f.store, seed, k))?;
        ensure(lines(&fo) == lines(&run()?), "focus-only output differs between runs")?;
    }

    let run = || search_overall_glove(seed, &docs, k).map_err(|e| e.to_string());
    let og = run()?;
    check_list(&format!("{label}/overall-glove"), &og, seed, expect_len)?;
    let seed_tokens: Vec<QueryToken> = seed_doc.tokens().map(|t| QueryToken::Term(t.lemma.clone())).collect();
    let sv = brute_vector(&f.store, &seed_tokens).ok_or("seed vector")?;
    same_ranking(&format!("{label}/overall-glove"), &og, &brute_top_k(&sv, &plain, &f.store, seed, k))?;
    ensure(lines(&og) == lines(&run()?), "overall-glove output differs between runs")?;

    let pm = fallback_purpose_mechanism(corpus, &f.store);
    let run = || search_overall_purpmech(seed, &pm, k, DEFAULT_POOL).map_err(|e| e.to_string());
    let op = run()?;
    check_list(&format!("{label}/overall-purpmech"), &op, seed, expect_len)?;
    let ids: Vec<String> = op.iter().map(|m| m.doc_id.clone()).collect();
    let want = brute_purpmech(&pm, seed, k);
    ensure(ids == want, format!("{label}/overall-purpmech: {ids:?} vs brute force {want:?}"))?;
    ensure(lines(&op) == lines(&run()?), "overall-purpmech output differs between runs")
}

fn retrieval_properties(f: &Fixture) -> Check {
    let start = Instant::now();
    retrieval_on(&f.demo, f, 10, "demo")?;
    retrieval_on(&f.synthetic, f, 10, "synthetic")?;
    within(start, Duration::from_secs(5))
}

fn divergence(f: &Fixture) -> Check {
    let corpus = &f.synthetic;
    let seed = corpus.get("soapy-slider").ok_or("seed missing")?;
    let sel = selection("scenario1");
    let q = build_query(seed, &sel, &f.kb).map_err(|e| e.to_string())?;
    let k = corpus.len();
    let rank = |ms: &[Match], id: &str| ms.iter().position(|m| m.doc_id == id);
    let fa = search_focus_abstracted(&q, corpus, &f.kb, &f.store, k).map_err(|e| e.to_string())?;
    let docs = DocumentVectors::build(corpus, &f.store);
    let terms = step2_terms(seed, &sel).map_err(|e| e.to_string())?;
    let fo = search_focus_only(&terms, &seed.id, &docs, &f.store, k).map_err(|e| e.to_string())?;
    let (cross, same) = ("knife-rolodex", "soap-saver");
    let (fa_c, fa_s) = (rank(&fa, cross).ok_or("cross missing")?, rank(&fa, same).ok_or("same missing")?);
    let (fo_c, fo_s) = (rank(&fo, cross).ok_or("cross missing")?, rank(&fo, same).ok_or("same missing")?);
    ensure(fa[fa_c].score > fa[fa_s].score, format!("focus-abstracted: {cross} {} vs {same} {}", fa[fa_c].score, fa[fa_s].score))?;
    ensure(fo[fo_s].score > fo[fo_c].score, format!("focus-only: {same} {} vs {cross} {}", fo[fo_s].score, fo[fo_c].score))?;
    let shared: BTreeSet<&str> = fa[fa_c].matched_properties.iter().map(|(_, p)| p.as_str()).collect();
    ensure(shared == BTreeSet::from(["PersonalProduct", "SpatialQuantity"]), format!("{cross} shares {shared:?}"))
}

fn overlap() -> Check {
    let mut rng = StdRng::seed_from_u64(394);
    let mut scenarios: BTreeMap<String, ScenarioMatches> = BTreeMap::new();
    let mut union = BTreeSet::new();
    for s in 0..10 {
        let scenario = format!("s{s:02}");
        for m in Method::ALL {
            let mut ids = BTreeSet::new();
            while ids.len() < 10 {
                ids.insert(format!("p{:03}", rng.random_range(0..60)));
            }
            for id in &ids {
                union.insert((scenario.clone(), id.clone()));
            }
            scenarios.entry(scenario.clone()).or_default().insert(m, ids.into_iter().collect());
        }
    }
    let report = overlap_report(&scenarios, 10);
    ensure(report.unique_count == union.len(), format!("unique {} vs union {}", report.unique_count, union.len()))?;
    ensure(report.total_count == 400, format!("total {}", report.total_count))?;
    let text = report.to_string();
    ensure(text == format!("{} unique matches out of 400", union.len()), format!("format: {text:?}"))
}

fn main() {
    let f = fixture();
    let criteria: Vec<Criterion<'_>> = vec![
        ("worked-example query reproduction", Box::new(|| worked_example_queries(&f))),
        ("corpus abstraction reproduction", Box::new(|| corpus_abstraction(&f))),
        ("Fisher CI arithmetic", Box::new(fisher_ci_arithmetic)),
        ("statistics oracle suite", Box::new(stats_oracles)),
        ("retrieval properties", Box::new(|| retrieval_properties(&f))),
        ("divergence fixture", Box::new(|| divergence(&f))),
        ("overlap report", Box::new(overlap)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        match check() {
            Ok(()) => println!("PASS  {name}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
