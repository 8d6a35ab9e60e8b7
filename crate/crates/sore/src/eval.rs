//! Scoring trade-off extraction against gold standoff annotations.
//!
//! A gold directory holds one `<stem>.ann` per sentence with a sibling
//! `<stem>.conllu` parse of that sentence and, optionally, `<stem>.txt`
//! holding the exact sentence text the offsets refer to.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sore_core::corpus::{parse_conllu, parse_standoff, GoldAnnotation, ParsedSentence};
use sore_core::metrics::{score_relations, score_spans, Prf};
use sore_core::tradeoff::{BinaryRelation, LabeledSpan, RelationStructure, RuleExtractor, SpanLabel};

use crate::error::{Error, Result};
use crate::formats::read_text;
use crate::records::{MetricRecord, Tally};

/// One gold sentence with its parse.
#[derive(Debug, Clone)]
pub struct GoldSentence {
    pub stem: String,
    pub sentence: ParsedSentence,
    pub spans: Vec<LabeledSpan>,
    pub relations: Vec<BinaryRelation>,
}

/// What a system predicts for one sentence.
#[derive(Debug, Clone, Default)]
pub struct Prediction {
    /// Every trigger the system identified, with or without arguments.
    pub triggers: Vec<LabeledSpan>,
    pub structures: Vec<RelationStructure>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvalScores {
    pub sentences: usize,
    pub trigger: Prf,
    pub keyphrase: Prf,
    pub overall: Prf,
    pub relations: Prf,
}

/// Reference F1 values (percent) for the rule-based system, printed for
/// comparison only.
pub const RBS_REFERENCE: [(&str, Option<f64>); 4] = [
    ("trigger", Some(95.89)),
    ("keyphrase", Some(22.36)),
    ("overall", Some(39.31)),
    ("relations", None),
];

/// Minimum trigger F1 the bundled rules must reach on the gold test split.
pub const TRIGGER_F1_THRESHOLD: f64 = 0.85;

fn sibling(ann: &Path, ext: &str) -> PathBuf {
    ann.with_extension(ext)
}

fn load_one(ann_path: &Path) -> Result<GoldSentence> {
    let stem = ann_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string();
    let conllu_path = sibling(ann_path, "conllu");
    if !conllu_path.exists() {
        return Err(Error::Input(format!(
            "{} has no dependency parse; expected {}",
            ann_path.display(),
            conllu_path.display()
        )));
    }
    let docs = parse_conllu(&read_text(&conllu_path)?).map_err(|e| Error::format(&conllu_path, 0, e))?;
    let mut sentences: Vec<&ParsedSentence> = docs.iter().flat_map(|d| d.sentences()).collect();
    if sentences.len() != 1 {
        return Err(Error::format(
            &conllu_path,
            0,
            format!("expected exactly one sentence, found {}", sentences.len()),
        ));
    }
    let mut sentence = sentences.remove(0).clone();
    let txt_path = sibling(ann_path, "txt");
    if txt_path.exists() {
        let text = read_text(&txt_path)?.trim_end_matches(['\n', '\r']).to_string();
        if text != sentence.text() {
            sentence = ParsedSentence::new(
                sentence.sent_id().to_string(),
                sentence.section(),
                sentence.tokens().to_vec(),
                Some(text),
            )
            .map_err(|e| Error::format(&conllu_path, 0, e))?;
        }
    }
    let gold: GoldAnnotation =
        parse_standoff(&read_text(ann_path)?, &sentence.text()).map_err(|e| Error::format(ann_path, 0, e))?;
    let spans = gold
        .labeled_spans(&sentence)
        .map_err(|e| Error::format(ann_path, 0, e))?;
    let relations = gold
        .binary_relations(&sentence)
        .map_err(|e| Error::format(ann_path, 0, e))?;
    Ok(GoldSentence {
        stem,
        sentence,
        spans,
        relations,
    })
}

/// Loads every annotated sentence in `dir`, sorted by file name. Sentences
/// whose annotations cannot be read or aligned to tokens are skipped and
/// tallied; a missing parse is an error.
pub fn load_gold_dir(dir: &Path) -> Result<(Vec<GoldSentence>, Tally)> {
    let entries = fs::read_dir(dir).map_err(|e| Error::read(dir, e))?;
    let mut anns: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ann"))
        .collect();
    anns.sort();
    let mut tally = Tally::default();
    let mut out = Vec::new();
    for (i, ann) in anns.iter().enumerate() {
        match load_one(ann) {
            Ok(g) => {
                tally.loaded += 1;
                out.push(g);
            }
            Err(e @ (Error::Input(_) | Error::Read { .. })) => return Err(e),
            Err(e) => tally.skip(i + 1, e.to_string()),
        }
    }
    Ok((out, tally))
}

/// Micro-averaged scores over all gold sentences.
pub fn evaluate(gold: &[GoldSentence], mut predict: impl FnMut(&GoldSentence) -> Prediction) -> EvalScores {
    let only = |spans: &[LabeledSpan], label: SpanLabel| -> Vec<LabeledSpan> {
        spans.iter().filter(|s| s.label == label).cloned().collect()
    };
    let mut scores = EvalScores::default();
    for g in gold {
        let p = predict(g);
        let pred_spans: Vec<LabeledSpan> = p.structures.iter().flat_map(|s| s.labeled_spans()).collect();
        scores.sentences += 1;
        scores.trigger = scores.trigger + score_spans(&p.triggers, &only(&g.spans, SpanLabel::Trigger), true);
        scores.keyphrase = scores.keyphrase
            + score_spans(
                &only(&pred_spans, SpanLabel::Keyphrase),
                &only(&g.spans, SpanLabel::Keyphrase),
                true,
            );
        scores.overall = scores.overall + score_spans(&pred_spans, &g.spans, true);
        scores.relations = scores.relations + score_relations(&p.structures, &g.relations);
    }
    scores
}

/// Predictions of the rule-based extractor: every lexicon match counts as
/// an identified trigger.
pub fn rbs_predict(extractor: &RuleExtractor, g: &GoldSentence) -> Prediction {
    let triggers = extractor
        .match_triggers(&g.sentence)
        .into_iter()
        .map(|m| LabeledSpan {
            sent_id: g.sentence.sent_id().to_string(),
            range: m.span.range(),
            label: SpanLabel::Trigger,
        })
        .collect();
    Prediction {
        triggers,
        structures: extractor.extract(&g.sentence),
    }
}

/// Predictions read from a file, keyed by `(stem, sent_id)`. Triggers are
/// those of the predicted structures.
pub fn external_predict(predictions: &BTreeMap<String, Vec<RelationStructure>>, g: &GoldSentence) -> Prediction {
    let structures: Vec<RelationStructure> = predictions
        .get(&g.stem)
        .map(|ss| {
            ss.iter()
                .filter(|s| s.sent_id() == g.sentence.sent_id())
                .cloned()
                .collect()
        })
        .unwrap_or_default();
    let triggers = structures
        .iter()
        .map(|s| LabeledSpan {
            sent_id: s.sent_id().to_string(),
            range: s.trigger.range(),
            label: SpanLabel::Trigger,
        })
        .collect();
    Prediction { triggers, structures }
}

impl EvalScores {
    pub fn rows(&self) -> [(&'static str, Prf); 4] {
        [
            ("trigger", self.trigger),
            ("keyphrase", self.keyphrase),
            ("overall", self.overall),
            ("relations", self.relations),
        ]
    }

    pub fn records(&self) -> Vec<MetricRecord> {
        self.rows()
            .iter()
            .map(|(task, p)| MetricRecord::new(task, true, p))
            .collect()
    }
}

fn pct(x: f64) -> String {
    format!("{:.2}", x * 100.0)
}

/// Score table in percent, with reference F1 values when given.
pub fn report_scores(scores: &EvalScores, reference: Option<&[(&str, Option<f64>)]>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "sentences scored: {}", scores.sentences);
    let _ = write!(out, "{:<12}{:>8}{:>8}{:>8}", "task", "P", "R", "F1");
    if reference.is_some() {
        out.push_str(&format!("{:>10}", "ref F1"));
    }
    out.push('\n');
    for (task, p) in scores.rows() {
        let _ = write!(
            out,
            "{:<12}{:>8}{:>8}{:>8}",
            task,
            pct(p.precision),
            pct(p.recall),
            pct(p.f1)
        );
        if let Some(refs) = reference {
            let r = refs
                .iter()
                .find(|(t, _)| *t == task)
                .and_then(|(_, v)| *v)
                .map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"));
            let _ = write!(out, "{r:>10}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONLLU: &str = "\
# sent_id = s1
# text = There is a trade-off between safety and efficiency.
1\tThere\tthere\tPRON\t_\t_\t2\texpl\t_\t_
2\tis\tbe\tVERB\t_\t_\t0\troot\t_\t_
3\ta\ta\tDET\t_\t_\t4\tdet\t_\t_
4\ttrade-off\ttrade-off\tNOUN\t_\t_\t2\tnsubj\t_\t_
5\tbetween\tbetween\tADP\t_\t_\t6\tcase\t_\t_
6\tsafety\tsafety\tNOUN\t_\t_\t4\tnmod\t_\t_
7\tand\tand\tCCONJ\t_\t_\t8\tcc\t_\t_
8\tefficiency\tefficiency\tNOUN\t_\t_\t6\tconj\t_\tSpaceAfter=No
9\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_

";

    const ANN: &str = "\
T1\tTrigger 11 20\ttrade-off
T2\tKeyphrase 29 35\tsafety
T3\tKeyphrase 40 50\tefficiency
R1\tTradeOff Arg1:T1 Arg2:T2
R2\tTradeOff Arg1:T1 Arg2:T3
";

    #[test]
    fn rbs_scores_perfect_on_simple_sentence() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.conllu"), CONLLU).unwrap();
        fs::write(dir.path().join("a.ann"), ANN).unwrap();
        let (gold, tally) = load_gold_dir(dir.path()).unwrap();
        assert_eq!(tally.skipped, 0, "{:?}", tally.reasons);
        let ex = RuleExtractor::bundled();
        let s = evaluate(&gold, |g| rbs_predict(&ex, g));
        assert_eq!(s.trigger.f1, 1.0);
        assert_eq!(s.keyphrase.f1, 1.0);
        assert_eq!(s.overall.true_pos, 3);
        let table = report_scores(&s, Some(&RBS_REFERENCE));
        assert!(table.contains("95.89"));
    }

    #[test]
    fn missing_parse_is_input_error() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.ann"), ANN).unwrap();
        assert!(matches!(load_gold_dir(dir.path()), Err(Error::Input(_))));
    }
}
