use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::LexiconError;

const BUNDLED: &str = include_str!("../../data/rules.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleKind {
    /// Nominal dependents introduced by one of the prepositions, with their
    /// conjuncts.
    Preposition { words: BTreeSet<String> },
    /// Subjects and objects of a verbal or adjectival trigger, plus obliques
    /// introduced by one of the prepositions.
    Clause { oblique_words: BTreeSet<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub kind: RuleKind,
    /// UPOS tags the trigger head must carry; `None` accepts any.
    pub trigger_pos: Option<BTreeSet<String>>,
    /// Also look at attachments on the verb that governs the trigger.
    pub include_governor: bool,
    pub min_args: usize,
}

impl Rule {
    pub fn applies_to(&self, upos: &str) -> bool {
        self.trigger_pos.as_ref().is_none_or(|p| p.contains(upos))
    }
}

/// Ordered argument rules. See `data/rules.tsv` for the line format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleTable {
    pub rules: Vec<Rule>,
}

fn word_set(s: &str) -> BTreeSet<String> {
    s.split(',')
        .map(|w| w.trim().to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

impl RuleTable {
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut rules = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let err = |message: String| LexiconError::Line { line: line_no, message };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 6 {
                return Err(err(format!("expected 6 columns, found {}", cols.len())));
            }
            let words = word_set(cols[3]);
            let kind = match cols[1] {
                "prep" => RuleKind::Preposition { words },
                "clause" => RuleKind::Clause { oblique_words: words },
                other => return Err(err(format!("unknown rule kind `{other}`"))),
            };
            let trigger_pos = match cols[2].trim() {
                "*" => None,
                tags => Some(tags.split(',').map(|t| t.trim().to_string()).collect()),
            };
            let include_governor = match cols[4] {
                "trigger" => false,
                "trigger+governor" => true,
                other => return Err(err(format!("unknown scope `{other}`"))),
            };
            let min_args = cols[5]
                .trim()
                .parse()
                .map_err(|_| err(format!("bad min_args `{}`", cols[5])))?;
            rules.push(Rule {
                id: cols[0].to_string(),
                kind,
                trigger_pos,
                include_governor,
                min_args,
            });
        }
        Ok(RuleTable { rules })
    }

    pub fn bundled() -> Self {
        RuleTable::parse(BUNDLED).expect("bundled rules are valid")
    }
}
