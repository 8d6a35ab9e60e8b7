//! Human-readable per-document and cluster reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use sore_core::cluster::ClusterSummary;
use sore_core::filter::{rank_retained, FilterDecision, RetentionStats};
use sore_core::tradeoff::ArgumentWithModifiers;

/// Everything the report for one document needs.
#[derive(Debug, Clone, Default)]
pub struct DocumentResults {
    pub doc_id: String,
    pub arguments: Vec<ArgumentWithModifiers>,
    pub decisions: Vec<FilterDecision>,
    /// Sentence text by sentence id.
    pub sentences: BTreeMap<String, String>,
    /// Sentence ids in document order.
    pub sentence_order: Vec<String>,
}

const ARG_HEADER: &str = "Trade-off arguments";

/// Arguments with their modifiers, retained tuples ranked by similarity,
/// then the sentences those tuples came from.
pub fn report_document(doc: &DocumentResults) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Document: {}", doc.doc_id);
    out.push('\n');

    let mut rows: Vec<(String, String)> = Vec::new();
    for a in &doc.arguments {
        let row = (a.argument.text.clone(), a.modifiers.join("; "));
        if !rows.contains(&row) {
            rows.push(row);
        }
    }
    let width = rows
        .iter()
        .map(|r| r.0.chars().count())
        .chain([ARG_HEADER.len()])
        .max()
        .unwrap_or(0)
        + 4;
    let _ = writeln!(out, "{:<width$}Argument modifiers", ARG_HEADER);
    if rows.is_empty() {
        out.push_str("(none)\n");
    }
    for (arg, mods) in &rows {
        let line = format!("{arg:<width$}{mods}");
        let _ = writeln!(out, "{}", line.trim_end());
    }
    out.push('\n');

    let ranked = rank_retained(&doc.decisions);
    let _ = writeln!(
        out,
        "Retained OIE extractions ({} of {}, ranked by similarity)",
        ranked.len(),
        doc.decisions.len()
    );
    if ranked.is_empty() {
        out.push_str("(none)\n");
    }
    for (i, d) in ranked.iter().enumerate() {
        let m = d.matched().expect("ranked decisions are retained");
        let _ = writeln!(out, "{:>3}. {:.4}  {}", i + 1, m.similarity, d.tuple.display());
        let _ = writeln!(
            out,
            "          \"{}\" ~ \"{}\" (cluster {})",
            m.oie_argument.text, m.tradeoff_argument.text, m.cluster
        );
    }
    out.push('\n');

    out.push_str("Source sentences\n");
    let mut shown: Vec<&str> = Vec::new();
    for d in &ranked {
        if !shown.contains(&d.tuple.sent_id.as_str()) {
            shown.push(&d.tuple.sent_id);
        }
    }
    shown.sort_by_key(|s| doc.sentence_order.iter().position(|x| x == s).unwrap_or(usize::MAX));
    if shown.is_empty() {
        out.push_str("(none)\n");
    }
    for s in shown {
        let text = doc.sentences.get(s).map(String::as_str).unwrap_or("");
        let _ = writeln!(out, "[{s}] {text}");
    }
    out
}

fn rate(r: Option<f64>) -> String {
    r.map_or_else(|| "n/a".to_string(), |r| format!("{:.2}%", r * 100.0))
}

/// Corpus summary in the shape of a before/after retention table.
pub fn report_stats(stats: &RetentionStats) -> String {
    let (sb, sa) = stats.sentence_counts();
    let mut out = String::new();
    let _ = writeln!(out, "{:<12}{:>10}{:>10}{:>10}", "", "before", "after", "retained");
    let _ = writeln!(
        out,
        "{:<12}{:>10}{:>10}{:>10}",
        "extractions",
        stats.extractions_before,
        stats.extractions_after,
        rate(stats.extraction_rate())
    );
    let _ = writeln!(
        out,
        "{:<12}{:>10}{:>10}{:>10}",
        "sentences",
        sb,
        sa,
        rate(stats.sentence_rate())
    );
    out
}

/// Top members and related clusters per cluster.
pub fn report_clusters(summaries: &[ClusterSummary]) -> String {
    let mut out = String::new();
    for s in summaries {
        let _ = writeln!(
            out,
            "cluster {} (size {}){}",
            s.cluster,
            s.size,
            if s.noisy { " [noisy]" } else { "" }
        );
        let top: Vec<&str> = s.top_members.iter().map(|m| m.0.as_str()).collect();
        let _ = writeln!(out, "  top: {}", top.join(" | "));
        let related: Vec<String> = s.related.iter().map(|(c, n)| format!("{c} ({n})")).collect();
        let _ = writeln!(out, "  related: {}", related.join(", "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use sore_core::filter::{ArgumentMatch, DropReason, Verdict};
    use sore_core::oie::{OieSource, OpenTuple, RelationPhrase};
    use sore_core::Span;

    fn span(s: &str, start: usize, end: usize, text: &str) -> Span {
        Span {
            sent_id: s.into(),
            start,
            end,
            text: text.into(),
        }
    }

    fn arg(text: &str, mods: &[&str]) -> ArgumentWithModifiers {
        ArgumentWithModifiers {
            argument: span("s1", 0, 1, text),
            modifiers: mods.iter().map(|m| m.to_string()).collect(),
        }
    }

    fn decision(sent: &str, subj: &str, sim: Option<f64>) -> FilterDecision {
        let tuple = OpenTuple {
            doc_id: "bats".into(),
            sent_id: sent.into(),
            sentence_len: 8,
            subject: span(sent, 0, 1, subj),
            relation: RelationPhrase {
                tokens: vec![1],
                text: "has".into(),
            },
            objects: vec![span(sent, 2, 8, "a negative influence on memory consolidation")],
            confidence: None,
            source: OieSource::External,
        };
        let verdict = match sim {
            Some(similarity) => Verdict::Retained(ArgumentMatch {
                oie_argument: tuple.subject.clone(),
                tradeoff_argument: span("s1", 0, 1, "sleep"),
                cluster: 12,
                similarity,
            }),
            None => Verdict::Dropped(DropReason::NoClusterMatch),
        };
        FilterDecision { tuple, verdict }
    }

    #[test]
    fn table_layout() {
        let doc = DocumentResults {
            doc_id: "bats".into(),
            arguments: vec![
                arg("sleep", &[]),
                arg("cognitive abilities", &[]),
                arg("energy conservation", &[]),
                arg("memory retention", &[]),
                arg("memory consolidation", &["in bats", "without a food reward"]),
            ],
            decisions: vec![
                decision("s2", "hibernation", Some(0.5)),
                decision("s3", "river", None),
                decision("s1", "torpor", Some(0.9)),
            ],
            sentences: [
                ("s1", "Torpor has a negative influence."),
                ("s2", "Hibernation has costs."),
            ]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
            sentence_order: vec!["s1".into(), "s2".into(), "s3".into()],
        };
        let text = report_document(&doc);
        let expected = "\
Document: bats

Trade-off arguments     Argument modifiers
sleep
cognitive abilities
energy conservation
memory retention
memory consolidation    in bats; without a food reward

Retained OIE extractions (2 of 3, ranked by similarity)
  1. 0.9000  (torpor; has; a negative influence on memory consolidation)
          \"torpor\" ~ \"sleep\" (cluster 12)
  2. 0.5000  (hibernation; has; a negative influence on memory consolidation)
          \"hibernation\" ~ \"sleep\" (cluster 12)

Source sentences
[s1] Torpor has a negative influence.
[s2] Hibernation has costs.
";
        assert_eq!(text, expected);
    }

    #[test]
    fn empty_document() {
        let text = report_document(&DocumentResults {
            doc_id: "x".into(),
            ..Default::default()
        });
        assert_eq!(text.matches("(none)").count(), 3);
    }
}
