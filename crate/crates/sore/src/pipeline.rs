//! The staged pipeline. Every stage reads its inputs from the configured
//! files or from earlier stages' outputs in `output_dir`, and writes its
//! own outputs there, so any stage can be re-run on its own.
//!
//! | stage     | writes                                   |
//! |-----------|------------------------------------------|
//! | ingest    | `corpus.conllu`                          |
//! | tradeoffs | `tradeoffs.jsonl`                        |
//! | embed     | `vocab.txt`, `idf.tsv`, `arguments.jsonl`|
//! | cluster   | `clusters.model`, `clusters.txt`         |
//! | oie       | `oie.jsonl`                              |
//! | filter    | `decisions.jsonl`                        |
//! | stats     | `stats.json`                             |
//! | report    | `report.txt`, `reports/<doc_id>.txt`     |

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use sore_core::cluster::{detect_noisy, fit_kmeans, summarize, ClusterError, KMeansParams, NoisyThresholds};
use sore_core::corpus::{filter_sections, parse_conllu, write_conllu, ParsedDocument};
use sore_core::embedding::{tokenize, Embedder, IdfTable, PhraseVector, SubwordVocab};
use sore_core::filter::{
    filter_document, retention_stats, FilterDecision, FilterOptions, RetentionStats, TradeoffArgument,
};
use sore_core::oie::{extract_builtin, OpenTuple};
use sore_core::tradeoff::{tradeoff_arguments, ArgumentWithModifiers, RelationLabel, RelationStructure, RuleExtractor};
use sore_core::Span;

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::formats::{
    idf_to_text, load_corpus, load_idf, load_lexicon, load_model, load_rules, load_stopwords, load_vectors, load_vocab,
    model_to_text, read_text, vocab_to_text, write_text,
};
use crate::records::{
    load_external_predictions, load_oie, read_jsonl, to_jsonl, ArgumentRecord, DecisionRecord, OieRecord, StatsRecord,
    StructureRecord, Tally,
};
use crate::report::{report_clusters, report_document, report_stats, DocumentResults};

pub const CORPUS: &str = "corpus.conllu";
pub const TRADEOFFS: &str = "tradeoffs.jsonl";
pub const VOCAB: &str = "vocab.txt";
pub const IDF: &str = "idf.tsv";
pub const ARGUMENTS: &str = "arguments.jsonl";
pub const MODEL: &str = "clusters.model";
pub const CLUSTERS: &str = "clusters.txt";
pub const OIE: &str = "oie.jsonl";
pub const DECISIONS: &str = "decisions.jsonl";
pub const STATS: &str = "stats.json";
pub const REPORT: &str = "report.txt";
pub const REPORTS_DIR: &str = "reports";

/// Trade-off structures keyed by document id.
pub type StructuresByDoc = BTreeMap<String, Vec<RelationStructure>>;

pub const NO_TRADEOFFS: &str = "No trade-off relations were found; no Open IE extractions were retained.";

/// Counts gathered while running the whole pipeline.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub documents: usize,
    pub sentences: usize,
    pub structures: usize,
    pub tradeoff_documents: usize,
    pub arguments: usize,
    pub tuples: usize,
    pub stats: RetentionStats,
    pub notices: Vec<String>,
}

pub struct Pipeline {
    pub config: PipelineConfig,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Self {
        Pipeline { config }
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.config.output_dir.join(name)
    }

    fn ingested(&self) -> Result<Vec<ParsedDocument>> {
        let path = self.out(CORPUS);
        parse_conllu(&read_text(&path)?).map_err(|e| Error::format(&path, 0, e))
    }

    fn structures(&self) -> Result<StructuresByDoc> {
        let path = self.out(TRADEOFFS);
        let mut out: BTreeMap<String, Vec<RelationStructure>> = BTreeMap::new();
        for r in read_jsonl::<StructureRecord>(&path)? {
            let s = r.to_structure().map_err(|e| Error::format(&path, 0, e))?;
            out.entry(r.doc_id).or_default().push(s);
        }
        Ok(out)
    }

    fn arguments(&self) -> Result<Vec<ArgumentRecord>> {
        read_jsonl(&self.out(ARGUMENTS))
    }

    /// Reads the corpus, keeps the configured sections and writes the
    /// result. Documents left without sentences are dropped.
    pub fn ingest(&self) -> Result<Vec<ParsedDocument>> {
        let docs: Vec<ParsedDocument> = load_corpus(&self.config.corpus)?
            .iter()
            .map(|d| filter_sections(d, &self.config.sections))
            .filter(|d| !d.sentences().is_empty())
            .collect();
        write_text(&self.out(CORPUS), &write_conllu(&docs))?;
        Ok(docs)
    }

    /// Rule-based and/or external trade-off structures per document.
    pub fn tradeoffs(&self) -> Result<(StructuresByDoc, Option<Tally>)> {
        let c = &self.config;
        let docs = self.ingested()?;
        let mut out: BTreeMap<String, Vec<RelationStructure>> = BTreeMap::new();
        if c.tradeoff_source.uses_rbs() {
            let ex = RuleExtractor::new(
                load_lexicon(c.lexicon.as_deref())?,
                load_rules(c.rules.as_deref())?,
                c.max_span_width,
            );
            for d in &docs {
                let found: Vec<_> = d.sentences().iter().flat_map(|s| ex.extract(s)).collect();
                if !found.is_empty() {
                    out.insert(d.doc_id().to_string(), found);
                }
            }
        }
        let mut tally = None;
        if c.tradeoff_source.uses_external() {
            let path = c
                .external_predictions
                .as_deref()
                .ok_or_else(|| Error::Config("external_predictions not set".into()))?;
            let (external, t) = load_external_predictions(path, c.max_span_width)?;
            tally = Some(t);
            for d in &docs {
                let Some(found) = external.get(d.doc_id()) else {
                    continue;
                };
                let ids: BTreeSet<&str> = d.sentences().iter().map(|s| s.sent_id()).collect();
                let entry = out.entry(d.doc_id().to_string()).or_default();
                for s in found.iter().filter(|s| ids.contains(s.sent_id())) {
                    if !entry.iter().any(|e| same_structure(e, s)) {
                        entry.push(s.clone());
                    }
                }
                if entry.is_empty() {
                    out.remove(d.doc_id());
                }
            }
        }
        let records: Vec<StructureRecord> = out
            .iter()
            .flat_map(|(doc, ss)| ss.iter().map(move |s| StructureRecord::from_structure(doc, s)))
            .collect();
        write_text(&self.out(TRADEOFFS), &to_jsonl(&records))?;
        Ok((out, tally))
    }

    /// Builds (or loads) the subword vocabulary and IDF table, then embeds
    /// every trade-off argument with its modifiers appended.
    pub fn embed(&self) -> Result<Vec<ArgumentRecord>> {
        let c = &self.config;
        let docs = self.ingested()?;
        let structures = self.structures()?;

        let doc_tokens: Vec<Vec<String>> = docs
            .iter()
            .map(|d| d.sentences().iter().flat_map(|s| tokenize(&s.text())).collect())
            .collect();
        let vocab = match &c.vocab {
            Some(p) => load_vocab(p)?,
            None => {
                let mut counts: BTreeMap<String, u64> = BTreeMap::new();
                for t in doc_tokens.iter().flatten() {
                    *counts.entry(t.clone()).or_default() += 1;
                }
                SubwordVocab::build(&counts, c.vocab_size)
            }
        };
        write_text(&self.out(VOCAB), &vocab_to_text(&vocab))?;

        let unit_sets: Vec<BTreeSet<String>> = doc_tokens
            .iter()
            .map(|toks| toks.iter().flat_map(|t| vocab.segment(t)).collect())
            .collect();
        let idf = if unit_sets.is_empty() {
            IdfTable::new(1, BTreeMap::new())
        } else {
            IdfTable::build(&unit_sets)
        }
        .map_err(|e| Error::Failure(e.to_string()))?;
        write_text(&self.out(IDF), &idf_to_text(&idf))?;

        let table = load_vectors(&c.vectors)?;
        let stopwords = load_stopwords(c.stopwords.as_deref())?;
        let embedder = Embedder::new(&table, &idf, &vocab, &stopwords);

        let mut records = Vec::new();
        for (doc_id, ss) in &structures {
            let mut seen: Vec<ArgumentWithModifiers> = Vec::new();
            for a in tradeoff_arguments(ss) {
                if seen.contains(&a) {
                    continue;
                }
                let v = embedder.embed(&a.argument.text, &a.modifiers);
                records.push(ArgumentRecord {
                    doc_id: doc_id.clone(),
                    sent_id: a.argument.sent_id.clone(),
                    start: a.argument.start,
                    end: a.argument.end,
                    text: a.argument.text.clone(),
                    modifiers: a.modifiers.clone(),
                    embeddable: v.embeddable,
                    weight_mass: v.weight_mass,
                    vector: v.vector,
                });
                seen.push(a);
            }
        }
        write_text(&self.out(ARGUMENTS), &to_jsonl(&records))?;
        Ok(records)
    }

    /// Fits k-means over the embedded arguments and flags noisy clusters.
    /// Returns `false` when there was nothing to cluster.
    pub fn cluster(&self) -> Result<bool> {
        let c = &self.config;
        let args = self.arguments()?;
        let model_path = self.out(MODEL);
        if args.is_empty() {
            if model_path.exists() {
                fs::remove_file(&model_path).map_err(|e| Error::write(&model_path, e))?;
            }
            write_text(&self.out(CLUSTERS), "no trade-off arguments; nothing to cluster\n")?;
            return Ok(false);
        }
        let vectors: Vec<PhraseVector> = args.iter().map(to_vector).collect();
        let params = KMeansParams {
            k: c.k,
            seed: c.seed,
            max_iter: c.max_iter,
            tol: c.tol,
        };
        let mut model = fit_kmeans(&vectors, params).map_err(|e| match e {
            ClusterError::TooFewVectors { needed, found } => Error::Input(format!(
                "k = {needed} exceeds the {found} embeddable trade-off arguments; lower `k`"
            )),
            other => Error::Failure(other.to_string()),
        })?;
        let texts: Vec<&str> = args.iter().map(|a| a.text.as_str()).collect();
        let thresholds = NoisyThresholds {
            non_alpha_fraction: c.noisy_non_alpha,
            max_tokens: c.noisy_max_tokens,
        };
        model.noisy = detect_noisy(&model, &texts, thresholds);

        let pairs = tradeoff_pairs(&self.structures()?, &args);
        write_text(&model_path, &model_to_text(&model))?;
        write_text(
            &self.out(CLUSTERS),
            &report_clusters(&summarize(&model, &texts, &vectors, &pairs)),
        )?;
        Ok(true)
    }

    /// Open IE tuples for documents with at least one trade-off relation.
    pub fn oie(&self) -> Result<(Vec<OpenTuple>, Option<Tally>)> {
        let c = &self.config;
        let docs = self.ingested()?;
        let structures = self.structures()?;
        let wanted: BTreeSet<&str> = structures
            .iter()
            .filter(|(_, ss)| ss.iter().any(|s| s.label == RelationLabel::TradeOff))
            .map(|(d, _)| d.as_str())
            .collect();

        let mut per_doc: BTreeMap<String, Vec<OpenTuple>> = BTreeMap::new();
        if c.oie_source.uses_builtin() {
            for d in docs.iter().filter(|d| wanted.contains(d.doc_id())) {
                let tuples = d
                    .sentences()
                    .iter()
                    .flat_map(|s| extract_builtin(s, d.doc_id()))
                    .collect();
                per_doc.insert(d.doc_id().to_string(), tuples);
            }
        }
        let mut tally = None;
        if c.oie_source.uses_external() {
            let path = c
                .external_oie
                .as_deref()
                .ok_or_else(|| Error::Config("external_oie not set".into()))?;
            let (external, t) = load_oie(path)?;
            tally = Some(t);
            for (doc, tuples) in external {
                if wanted.contains(doc.as_str()) {
                    per_doc.entry(doc).or_default().extend(tuples);
                }
            }
        }
        let tuples: Vec<OpenTuple> = per_doc.into_values().flatten().collect();
        let records: Vec<OieRecord> = tuples.iter().map(OieRecord::from_tuple).collect();
        write_text(&self.out(OIE), &to_jsonl(&records))?;
        Ok((tuples, tally))
    }

    /// Keeps tuples with an argument in a non-noisy trade-off cluster.
    pub fn filter(&self) -> Result<Vec<FilterDecision>> {
        let c = &self.config;
        let path = self.out(OIE);
        let mut tuples: BTreeMap<String, Vec<OpenTuple>> = BTreeMap::new();
        for r in read_jsonl::<OieRecord>(&path)? {
            let t = r.to_tuple().map_err(|e| Error::format(&path, 0, e))?;
            tuples.entry(t.doc_id.clone()).or_default().push(t);
        }
        if tuples.is_empty() {
            write_text(&self.out(DECISIONS), "")?;
            return Ok(Vec::new());
        }

        let model = load_model(&self.out(MODEL))?;
        let table = load_vectors(&c.vectors)?;
        let vocab = load_vocab(&self.out(VOCAB))?;
        let idf = load_idf(&self.out(IDF))?;
        let stopwords = load_stopwords(c.stopwords.as_deref())?;
        let embedder = Embedder::new(&table, &idf, &vocab, &stopwords);

        let mut args: BTreeMap<String, Vec<TradeoffArgument>> = BTreeMap::new();
        for a in self.arguments()? {
            args.entry(a.doc_id.clone()).or_default().push(TradeoffArgument {
                span: Span {
                    sent_id: a.sent_id.clone(),
                    start: a.start,
                    end: a.end,
                    text: a.text.clone(),
                },
                modifiers: a.modifiers.clone(),
                vector: to_vector(&a),
            });
        }

        let options = FilterOptions {
            cosine_threshold: c.cosine_threshold,
        };
        let mut decisions = Vec::new();
        for (doc, ts) in &tuples {
            let doc_args = args.get(doc).map(Vec::as_slice).unwrap_or(&[]);
            let ds = filter_document(doc, ts, doc_args, &model, &embedder, options)
                .map_err(|e| Error::Config(e.to_string()))?;
            decisions.extend(ds);
        }
        let records: Vec<DecisionRecord> = decisions.iter().map(DecisionRecord::from_decision).collect();
        write_text(&self.out(DECISIONS), &to_jsonl(&records))?;
        Ok(decisions)
    }

    fn decisions(&self) -> Result<Vec<FilterDecision>> {
        let path = self.out(DECISIONS);
        read_jsonl::<DecisionRecord>(&path)?
            .iter()
            .map(|r| r.to_decision().map_err(|e| Error::format(&path, 0, e)))
            .collect()
    }

    pub fn stats(&self) -> Result<RetentionStats> {
        let stats = retention_stats(&self.decisions()?);
        write_text(&self.out(STATS), &to_jsonl([&StatsRecord::from_stats(&stats)]))?;
        Ok(stats)
    }

    /// Writes one report per document with trade-off arguments or tuples,
    /// plus a corpus summary.
    pub fn report(&self) -> Result<Vec<String>> {
        let docs = self.ingested()?;
        let decisions = self.decisions()?;
        let structures = self.structures()?;
        let stats = retention_stats(&decisions);

        let mut by_doc: BTreeMap<String, Vec<FilterDecision>> = BTreeMap::new();
        for d in decisions {
            by_doc.entry(d.tuple.doc_id.clone()).or_default().push(d);
        }
        let dir = self.out(REPORTS_DIR);
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| Error::write(&dir, e))?;
        }
        let mut written = Vec::new();
        for doc in &docs {
            let args = structures
                .get(doc.doc_id())
                .map(|s| tradeoff_arguments(s))
                .unwrap_or_default();
            let ds = by_doc.remove(doc.doc_id()).unwrap_or_default();
            if args.is_empty() && ds.is_empty() {
                continue;
            }
            let results = DocumentResults {
                doc_id: doc.doc_id().to_string(),
                arguments: args,
                decisions: ds,
                sentences: doc
                    .sentences()
                    .iter()
                    .map(|s| (s.sent_id().to_string(), s.text()))
                    .collect(),
                sentence_order: doc.sentences().iter().map(|s| s.sent_id().to_string()).collect(),
            };
            write_text(
                &dir.join(format!("{}.txt", file_stem(doc.doc_id()))),
                &report_document(&results),
            )?;
            written.push(doc.doc_id().to_string());
        }

        let mut summary = report_stats(&stats);
        if stats.extractions_after == 0 && structures.is_empty() {
            summary.push('\n');
            summary.push_str(NO_TRADEOFFS);
            summary.push('\n');
        }
        summary.push_str(&format!("\nreports written for {} documents\n", written.len()));
        write_text(&self.out(REPORT), &summary)?;
        Ok(written)
    }

    /// Every stage in order.
    pub fn run(&self) -> Result<RunSummary> {
        self.config.validate()?;
        let mut s = RunSummary::default();
        let docs = self.ingest().map_err(|e| e.in_stage("ingest"))?;
        s.documents = docs.len();
        s.sentences = docs.iter().map(|d| d.sentences().len()).sum();

        let (structures, tally) = self.tradeoffs().map_err(|e| e.in_stage("tradeoffs"))?;
        s.structures = structures.values().map(Vec::len).sum();
        s.tradeoff_documents = structures
            .values()
            .filter(|ss| ss.iter().any(|x| x.label == RelationLabel::TradeOff))
            .count();
        if let Some(t) = tally.filter(|t| t.skipped > 0) {
            s.notices
                .push(format!("skipped {} external prediction records", t.skipped));
        }

        s.arguments = self.embed().map_err(|e| e.in_stage("embed"))?.len();
        if !self.cluster().map_err(|e| e.in_stage("cluster"))? {
            s.notices.push(NO_TRADEOFFS.to_string());
        }
        let (tuples, tally) = self.oie().map_err(|e| e.in_stage("oie"))?;
        s.tuples = tuples.len();
        if let Some(t) = tally.filter(|t| t.skipped > 0) {
            s.notices.push(format!("skipped {} external OIE records", t.skipped));
        }
        self.filter().map_err(|e| e.in_stage("filter"))?;
        s.stats = self.stats().map_err(|e| e.in_stage("stats"))?;
        self.report().map_err(|e| e.in_stage("report"))?;
        Ok(s)
    }
}

fn to_vector(a: &ArgumentRecord) -> PhraseVector {
    PhraseVector {
        vector: a.vector.clone(),
        weight_mass: a.weight_mass,
        embeddable: a.embeddable,
    }
}

fn same_structure(a: &RelationStructure, b: &RelationStructure) -> bool {
    a.trigger.range() == b.trigger.range()
        && a.label == b.label
        && a.arguments
            .iter()
            .map(Span::range)
            .eq(b.arguments.iter().map(Span::range))
}

/// Phrase-id pairs of arguments sharing a trade-off structure.
fn tradeoff_pairs(structures: &StructuresByDoc, args: &[ArgumentRecord]) -> Vec<(usize, usize)> {
    let mut index: BTreeMap<(&str, &str, usize, usize), usize> = BTreeMap::new();
    for (i, a) in args.iter().enumerate() {
        index.entry((&a.doc_id, &a.sent_id, a.start, a.end)).or_insert(i);
    }
    let mut pairs = Vec::new();
    for (doc, ss) in structures {
        for s in ss.iter().filter(|s| s.label == RelationLabel::TradeOff) {
            let ids: Vec<usize> = s
                .arguments
                .iter()
                .filter_map(|a| index.get(&(doc.as_str(), a.sent_id.as_str(), a.start, a.end)).copied())
                .collect();
            for (i, &x) in ids.iter().enumerate() {
                for &y in &ids[i + 1..] {
                    pairs.push((x, y));
                }
            }
        }
    }
    pairs
}

/// Document id made safe for use as a file name.
pub fn file_stem(doc_id: &str) -> String {
    doc_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Paths of the per-document reports, sorted.
pub fn report_files(output_dir: &Path) -> Result<Vec<PathBuf>> {
    let dir = output_dir.join(REPORTS_DIR);
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| Error::read(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    files.sort();
    Ok(files)
}
