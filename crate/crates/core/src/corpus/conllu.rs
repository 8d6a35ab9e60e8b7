use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::{CorpusError, ParsedDocument, ParsedSentence, Section, Token};

/// Document id used for sentences that precede any `# newdoc id` comment.
pub const IMPLICIT_DOC_ID: &str = "unnamed";

#[derive(Default)]
struct PendingSentence {
    sent_id: Option<String>,
    section: Option<Section>,
    text: Option<String>,
    tokens: Vec<Token>,
    first_line: usize,
}

struct PendingDocument {
    doc_id: String,
    sentences: Vec<ParsedSentence>,
}

/// Parses CoNLL-U text into documents.
///
/// Documents start at `# newdoc id = ...`; a sentence's section comes from
/// `# section = ...` (default `other`). Multiword token ranges (`3-4`) and
/// empty nodes (`5.1`) are skipped. Sentences without a `# sent_id` get
/// `<doc_id>-s<n>`.
pub fn parse_conllu(text: &str) -> Result<Vec<ParsedDocument>, CorpusError> {
    let mut docs: Vec<PendingDocument> = Vec::new();
    let mut sent = PendingSentence::default();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush_sentence(&mut docs, &mut sent)?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let (key, value) = match comment.split_once('=') {
                Some((k, v)) => (k.trim(), Some(v.trim())),
                None => (comment.trim(), None),
            };
            match key {
                "newdoc id" | "newdoc" => {
                    flush_sentence(&mut docs, &mut sent)?;
                    let id = value.filter(|v| !v.is_empty()).ok_or_else(|| CorpusError::Parse {
                        line: lineno,
                        message: "`# newdoc` without an id".into(),
                    })?;
                    docs.push(PendingDocument {
                        doc_id: id.to_string(),
                        sentences: Vec::new(),
                    });
                }
                "sent_id" => sent.sent_id = value.map(str::to_string),
                "section" => sent.section = value.map(Section::from_header),
                "text" => sent.text = value.map(str::to_string),
                _ => {}
            }
            continue;
        }

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(CorpusError::Parse {
                line: lineno,
                message: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let index: usize = cols[0].parse().map_err(|_| CorpusError::Parse {
            line: lineno,
            message: format!("invalid token id `{}`", cols[0]),
        })?;
        if index != sent.tokens.len() + 1 {
            return Err(CorpusError::Parse {
                line: lineno,
                message: format!("token id {index} out of sequence"),
            });
        }
        let head: usize = cols[6].parse().map_err(|_| CorpusError::Parse {
            line: lineno,
            message: format!("invalid head `{}`", cols[6]),
        })?;
        if sent.tokens.is_empty() {
            sent.first_line = lineno;
        }
        sent.tokens.push(Token {
            index,
            surface: cols[1].to_string(),
            lemma: cols[2].to_string(),
            upos: cols[3].to_string(),
            head,
            deprel: cols[7].to_string(),
            space_after: !cols[9].split('|').any(|f| f == "SpaceAfter=No"),
        });
    }
    flush_sentence(&mut docs, &mut sent)?;

    docs.into_iter()
        .map(|d| ParsedDocument::new(d.doc_id, d.sentences))
        .collect()
}

fn flush_sentence(docs: &mut Vec<PendingDocument>, sent: &mut PendingSentence) -> Result<(), CorpusError> {
    if sent.tokens.is_empty() {
        // Comments without tokens (e.g. `# newpar`) do not start a sentence.
        if sent.sent_id.is_some() || sent.text.is_some() {
            return Err(CorpusError::Parse {
                line: sent.first_line,
                message: format!(
                    "sentence {} has no tokens",
                    sent.sent_id.as_deref().unwrap_or("<unnamed>")
                ),
            });
        }
        *sent = PendingSentence::default();
        return Ok(());
    }
    if docs.is_empty() {
        docs.push(PendingDocument {
            doc_id: IMPLICIT_DOC_ID.into(),
            sentences: Vec::new(),
        });
    }
    let doc = docs.last_mut().expect("non-empty");
    let taken = core::mem::take(sent);
    let sent_id = taken
        .sent_id
        .unwrap_or_else(|| format!("{}-s{}", doc.doc_id, doc.sentences.len() + 1));
    let sentence = ParsedSentence::new(
        sent_id,
        taken.section.unwrap_or(Section::Other),
        taken.tokens,
        taken.text,
    )?;
    doc.sentences.push(sentence);
    Ok(())
}

/// Serializes documents back to CoNLL-U. Columns that are not modelled
/// (XPOS, FEATS, DEPS) are written as `_`.
pub fn write_conllu(docs: &[ParsedDocument]) -> String {
    let mut out = String::new();
    for doc in docs {
        let _ = writeln!(out, "# newdoc id = {}", doc.doc_id());
        for s in doc.sentences() {
            let _ = writeln!(out, "# sent_id = {}", s.sent_id());
            let _ = writeln!(out, "# section = {}", s.section());
            if let Some(t) = s.raw_text() {
                let _ = writeln!(out, "# text = {t}");
            }
            for t in s.tokens() {
                let misc = if t.space_after { "_" } else { "SpaceAfter=No" };
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t{}",
                    t.index, t.surface, t.lemma, t.upos, t.head, t.deprel, misc
                );
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_TOKENS: &str = "# newdoc id = d1\n# sent_id = s1\n\
1\tSafety\tsafety\tNOUN\t_\t_\t2\tnsubj\t_\t_\n\
2\tmatters\tmatter\tVERB\t_\t_\t0\troot\t_\t_\n\n";

    #[test]
    fn minimal_sentence() {
        let docs = parse_conllu(TWO_TOKENS).unwrap();
        assert_eq!(docs.len(), 1);
        let s = &docs[0].sentences()[0];
        assert_eq!(s.len(), 2);
        assert_eq!(s.tokens()[1].surface, "matters");
        assert_eq!(s.tokens()[1].head, 0);
        assert_eq!(s.section(), Section::Other);
    }

    #[test]
    fn self_loop_is_validation_error() {
        let bad = TWO_TOKENS.replace("1\tSafety\tsafety\tNOUN\t_\t_\t2", "1\tSafety\tsafety\tNOUN\t_\t_\t1");
        match parse_conllu(&bad) {
            Err(CorpusError::Validation { sent_id, .. }) => assert_eq!(sent_id, "s1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let bad = "# newdoc id = d\n1\tonly\tthree\n";
        assert_eq!(
            parse_conllu(bad),
            Err(CorpusError::Parse {
                line: 2,
                message: "expected 10 tab-separated columns, found 3".into()
            })
        );
    }

    #[test]
    fn skips_multiword_and_empty_nodes() {
        let text = "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n\
1\tdo\tdo\tAUX\t_\t_\t3\taux\t_\t_\n\
2\tn't\tnot\tPART\t_\t_\t3\tadvmod\t_\t_\n\
2.1\tgo\tgo\tVERB\t_\t_\t_\t_\t_\t_\n\
3\tgo\tgo\tVERB\t_\t_\t0\troot\t_\t_\n";
        let docs = parse_conllu(text).unwrap();
        assert_eq!(docs[0].doc_id(), IMPLICIT_DOC_ID);
        assert_eq!(docs[0].sentences()[0].len(), 3);
        assert_eq!(docs[0].sentences()[0].sent_id(), "unnamed-s1");
    }

    #[test]
    fn sections_preserved_and_round_trip() {
        let text = "# newdoc id = paper7\n\
# sent_id = a\n# section = abstract\n# text = Safety matters.\n\
1\tSafety\tsafety\tNOUN\t_\t_\t2\tnsubj\t_\t_\n\
2\tmatters\tmatter\tVERB\t_\t_\t0\troot\t_\tSpaceAfter=No\n\
3\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_\n\n\
# sent_id = b\n# section = Introduction\n\
1\tGo\tgo\tVERB\t_\t_\t0\troot\t_\t_\n\n\
# sent_id = c\n\
1\tStop\tstop\tVERB\t_\t_\t0\troot\t_\t_\n\n";
        let docs = parse_conllu(text).unwrap();
        let sections: Vec<_> = docs[0].sentences().iter().map(|s| s.section()).collect();
        assert_eq!(sections, [Section::Abstract, Section::Introduction, Section::Other]);
        assert_eq!(docs[0].sentences()[0].text(), "Safety matters.");
        let again = parse_conllu(&write_conllu(&docs)).unwrap();
        assert_eq!(again, docs);
    }

    #[test]
    fn newdoc_splits_documents() {
        let text = alloc::format!("{TWO_TOKENS}{}", TWO_TOKENS.replace("d1", "d2"));
        let docs = parse_conllu(&text).unwrap();
        let ids: Vec<_> = docs.iter().map(|d| d.doc_id()).collect();
        assert_eq!(ids, ["d1", "d2"]);
    }
}
