use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::{
    match_triggers, Modifier, Polarity, RelationKind, RelationLabel, RelationStructure, RuleKind, RuleTable, Source,
    Span, SpanLabel, TokenRange, TriggerLexicon, TriggerMatch,
};
use crate::corpus::ParsedSentence;
use crate::tree::DepTree;
use crate::MAX_SPAN_WIDTH;

/// Relations at which argument and modifier phrases are cut.
const CLAUSAL: [&str; 5] = ["acl:relcl", "relcl", "advcl", "parataxis", "ccomp"];

/// Parts of speech that never head an argument.
const NON_NOMINAL: [&str; 8] = ["PUNCT", "ADP", "CCONJ", "SCONJ", "DET", "PART", "AUX", "INTJ"];

/// Trigger relations through which the governing verb is also searched.
const GOVERNOR_LINKS: [&str; 5] = ["nsubj", "obj", "dobj", "attr", "nsubjpass"];

/// Rule-based extractor: trigger lexicon + argument rules + width cap.
#[derive(Debug, Clone)]
pub struct RuleExtractor {
    pub lexicon: TriggerLexicon,
    pub rules: RuleTable,
    pub max_width: usize,
}

impl Default for RuleExtractor {
    fn default() -> Self {
        RuleExtractor::bundled()
    }
}

fn is_clausal(deprel: &str) -> bool {
    CLAUSAL.contains(&deprel)
}

fn is_nominal(upos: &str) -> bool {
    !NON_NOMINAL.contains(&upos)
}

/// Preposition introducing a prepositional attachment, in either UD style
/// (`nmod`/`obl` with a `case` child) or spaCy style (`prep` token).
fn preposition(tree: &DepTree<'_>, c: usize) -> Option<String> {
    let tok = tree.token(c);
    match tok.base_deprel() {
        "nmod" | "obl" => tree
            .children_with(c, "case")
            .next()
            .map(|k| tree.token(k).surface.to_lowercase()),
        "prep" => Some(tok.surface.to_lowercase()),
        _ => None,
    }
}

/// Nominal heads of a prepositional attachment.
fn attachment_heads(tree: &DepTree<'_>, c: usize) -> Vec<usize> {
    if tree.token(c).deprel == "prep" {
        tree.children_with(c, "pobj").collect()
    } else {
        alloc::vec![c]
    }
}

/// `head` followed by its conjuncts, transitively, in sentence order.
fn with_conjuncts(tree: &DepTree<'_>, head: usize) -> Vec<usize> {
    let mut out = alloc::vec![head];
    let mut i = 0;
    while i < out.len() {
        let n = out[i];
        out.extend(tree.children_with(n, "conj"));
        i += 1;
    }
    out.sort_unstable();
    out
}

/// A coordination of argument heads; `root` governs the others via `conj`.
struct Group {
    root: usize,
    members: Vec<usize>,
}

impl RuleExtractor {
    pub fn new(lexicon: TriggerLexicon, rules: RuleTable, max_width: usize) -> Self {
        RuleExtractor {
            lexicon,
            rules,
            max_width,
        }
    }

    /// Bundled lexicon and rules, width cap 14.
    pub fn bundled() -> Self {
        RuleExtractor::new(TriggerLexicon::bundled(), RuleTable::bundled(), MAX_SPAN_WIDTH)
    }

    pub fn match_triggers(&self, sentence: &ParsedSentence) -> Vec<TriggerMatch> {
        match_triggers(sentence, &self.lexicon)
    }

    /// All structures found in a sentence, one per productive trigger.
    pub fn extract(&self, sentence: &ParsedSentence) -> Vec<RelationStructure> {
        self.match_triggers(sentence)
            .iter()
            .filter_map(|t| self.extract_structure(sentence, t))
            .collect()
    }

    /// Applies the argument rules around one trigger. Returns `None` when
    /// fewer than two arguments are found.
    pub fn extract_structure(&self, sentence: &ParsedSentence, trigger: &TriggerMatch) -> Option<RelationStructure> {
        let tree = DepTree::new(sentence);
        let trange = trigger.span.range();
        if trange.end > tree.len() {
            return None;
        }
        let head = tree.range_head(trange);
        let head_tok = tree.token(head);

        let governor = tree
            .head(head)
            .filter(|_| GOVERNOR_LINKS.contains(&head_tok.base_deprel()))
            .filter(|&g| !trange.contains(g));

        let mut groups: Vec<Group> = Vec::new();
        let mut consumed: BTreeSet<usize> = BTreeSet::new();
        let mut arg_heads: BTreeSet<usize> = BTreeSet::new();

        for rule in &self.rules.rules {
            if !rule.applies_to(&head_tok.upos) {
                continue;
            }
            let mut found: Vec<Group> = Vec::new();
            let mut introducers: Vec<usize> = Vec::new();
            let take = |n: usize, found: &mut Vec<Group>| {
                let members: Vec<usize> = with_conjuncts(&tree, n)
                    .into_iter()
                    .filter(|&m| !trange.contains(m) && is_nominal(&tree.token(m).upos))
                    .collect();
                if !members.is_empty() {
                    found.push(Group { root: n, members });
                }
            };
            match &rule.kind {
                RuleKind::Preposition { words } => {
                    let mut anchors = alloc::vec![head];
                    if rule.include_governor {
                        anchors.extend(governor);
                    }
                    for &anchor in &anchors {
                        for &c in tree.children(anchor) {
                            if trange.contains(c) {
                                continue;
                            }
                            if let Some(w) = preposition(&tree, c) {
                                if words.contains(&w) {
                                    introducers.push(c);
                                    for n in attachment_heads(&tree, c) {
                                        take(n, &mut found);
                                    }
                                }
                            }
                        }
                    }
                }
                RuleKind::Clause { oblique_words } => {
                    for &c in tree.children(head) {
                        if trange.contains(c) {
                            continue;
                        }
                        let rel = tree.token(c).base_deprel();
                        if matches!(rel, "nsubj" | "nsubjpass" | "obj" | "dobj") {
                            introducers.push(c);
                            take(c, &mut found);
                        } else if let Some(w) = preposition(&tree, c) {
                            if oblique_words.contains(&w) {
                                introducers.push(c);
                                for n in attachment_heads(&tree, c) {
                                    take(n, &mut found);
                                }
                            }
                        }
                    }
                }
            }
            let count: usize = found.iter().map(|g| g.members.len()).sum();
            if count >= rule.min_args {
                for g in found {
                    let fresh: Vec<usize> = g.members.iter().copied().filter(|m| !arg_heads.contains(m)).collect();
                    if fresh.is_empty() {
                        continue;
                    }
                    arg_heads.extend(fresh.iter().copied());
                    groups.push(Group {
                        root: g.root,
                        members: fresh,
                    });
                }
                consumed.extend(introducers);
            }
        }
        if arg_heads.len() < 2 {
            return None;
        }

        // Modifier attachments: (attachment token, governing argument heads).
        let mut modifiers: Vec<(usize, Vec<usize>)> = Vec::new();
        for g in &groups {
            let last = *g.members.last().expect("non-empty group");
            for &a in &g.members {
                for &c in tree.children(a) {
                    if consumed.contains(&c) || arg_heads.contains(&c) || preposition(&tree, c).is_none() {
                        continue;
                    }
                    if a == g.root && g.members.len() > 1 && c > last {
                        modifiers.push((c, g.members.clone()));
                    } else if comma_before(&tree, c) {
                        modifiers.push((c, alloc::vec![a]));
                    }
                }
            }
        }
        let all_args: Vec<usize> = arg_heads.iter().copied().collect();
        for &c in tree.children(head) {
            if c >= trange.end && !consumed.contains(&c) && !arg_heads.contains(&c) && preposition(&tree, c).is_some() {
                modifiers.push((c, all_args.clone()));
            }
        }
        let modifier_tokens: BTreeSet<usize> = modifiers.iter().map(|(c, _)| *c).collect();

        let arg_span = |a: usize| -> Span {
            let mut mask = tree.reachable(a, |x| {
                let tok = tree.token(x);
                let rel = tok.base_deprel();
                !(rel == "conj"
                    || rel == "cc"
                    || is_clausal(&tok.deprel)
                    || modifier_tokens.contains(&x)
                    || (tree.head(x) == Some(a) && rel == "case"))
            });
            mask[trange.start..trange.end].fill(false);
            let r = tree.phrase(a, &mask, self.max_width);
            Span {
                sent_id: sentence.sent_id().into(),
                start: r.start,
                end: r.end,
                text: sentence.join(r),
            }
        };
        let modifier_span = |c: usize| -> Span {
            let mut mask = tree.reachable(c, |x| !is_clausal(&tree.token(x).deprel));
            mask[trange.start..trange.end].fill(false);
            let r = tree.phrase(c, &mask, self.max_width);
            Span {
                sent_id: sentence.sent_id().into(),
                start: r.start,
                end: r.end,
                text: sentence.join(r),
            }
        };

        let mut arguments: Vec<Span> = arg_heads.iter().map(|&a| arg_span(a)).collect();
        arguments.sort();
        arguments.dedup_by(|a, b| a.range() == b.range());

        let mut mods: Vec<Modifier> = Vec::new();
        for (c, govs) in &modifiers {
            let dependent = modifier_span(*c);
            for &g in govs {
                let m = Modifier {
                    governor: arg_span(g),
                    dependent: dependent.clone(),
                };
                if !mods.contains(&m) {
                    mods.push(m);
                }
            }
        }
        mods.sort_by(|a, b| {
            (a.governor.start, a.dependent.start, a.dependent.end).cmp(&(
                b.governor.start,
                b.dependent.start,
                b.dependent.end,
            ))
        });

        let label = match trigger.polarity {
            Polarity::TradeOff => RelationLabel::TradeOff,
            Polarity::Ambiguous if self.qualified(&tree, trange) => RelationLabel::TradeOff,
            Polarity::Ambiguous => RelationLabel::NotATradeOff,
        };

        Some(RelationStructure {
            trigger: trigger.span.clone(),
            label,
            arguments,
            modifiers: mods,
            source: Source::Rbs,
        })
    }

    /// An ambiguous trigger is qualified when a qualifier word modifies it
    /// or directly precedes it.
    fn qualified(&self, tree: &DepTree<'_>, trange: TokenRange) -> bool {
        let is_q = |i: usize| {
            let t = tree.token(i);
            self.lexicon.is_qualifier(&t.surface.to_lowercase()) || self.lexicon.is_qualifier(&t.lemma.to_lowercase())
        };
        let modifying = (trange.start..trange.end).any(|h| {
            tree.children(h)
                .iter()
                .any(|&c| matches!(tree.token(c).base_deprel(), "amod" | "advmod" | "compound") && is_q(c))
        });
        modifying || (trange.start > 0 && is_q(trange.start - 1))
    }
}

/// True when the token right before the attachment's subtree is a comma.
fn comma_before(tree: &DepTree<'_>, c: usize) -> bool {
    let mask = tree.subtree(c);
    let first = mask.iter().position(|&m| m).unwrap_or(c);
    first > 0 && tree.token(first - 1).surface == ","
}

/// An argument with the texts of its modifiers in sentence order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgumentWithModifiers {
    pub argument: Span,
    pub modifiers: Vec<String>,
}

/// Arguments of trade-off structures, each with its (transitive) modifier
/// texts. Not-a-trade-off structures are skipped.
pub fn tradeoff_arguments(structures: &[RelationStructure]) -> Vec<ArgumentWithModifiers> {
    let mut out = Vec::new();
    for s in structures.iter().filter(|s| s.label == RelationLabel::TradeOff) {
        for arg in &s.arguments {
            let mut reached: Vec<&Span> = Vec::new();
            let mut frontier: Vec<&Span> = alloc::vec![arg];
            while let Some(g) = frontier.pop() {
                for m in s.modifiers.iter().filter(|m| m.governor.range() == g.range()) {
                    if !reached.iter().any(|r| r.range() == m.dependent.range()) {
                        reached.push(&m.dependent);
                        frontier.push(&m.dependent);
                    }
                }
            }
            reached.sort_by_key(|s| (s.start, s.end));
            out.push(ArgumentWithModifiers {
                argument: arg.clone(),
                modifiers: reached.iter().map(|s| s.text.clone()).collect(),
            });
        }
    }
    out
}

/// Builds structures from labeled spans and relations over span indices, as
/// produced by a span-based model or by gold annotation.
///
/// Each trigger with trade-off (or not-a-trade-off) relations becomes one
/// structure per label; argument-modifier relations are attached when their
/// governor is one of the structure's arguments or an already attached
/// modifier.
pub fn structures_from_labeled(
    sent_id: &str,
    spans: &[(TokenRange, SpanLabel)],
    relations: &[(RelationKind, usize, usize)],
    text_of: impl Fn(TokenRange) -> String,
    source: Source,
) -> Vec<RelationStructure> {
    let span = |i: usize| Span {
        sent_id: sent_id.into(),
        start: spans[i].0.start,
        end: spans[i].0.end,
        text: text_of(spans[i].0),
    };
    let mut out = Vec::new();
    for (t, (_, label)) in spans.iter().enumerate() {
        if *label != SpanLabel::Trigger {
            continue;
        }
        for rel_label in [RelationLabel::TradeOff, RelationLabel::NotATradeOff] {
            let mut args: Vec<usize> = relations
                .iter()
                .filter(|(k, g, _)| *k == rel_label.kind() && *g == t)
                .map(|(_, _, d)| *d)
                .collect();
            args.sort_by_key(|&i| spans[i].0);
            args.dedup();
            if args.is_empty() {
                continue;
            }
            let mut attached: Vec<usize> = args.clone();
            let mut mods: Vec<(usize, usize)> = Vec::new();
            loop {
                let before = mods.len();
                for &(k, g, d) in relations {
                    if k == RelationKind::ArgModifier && attached.contains(&g) && !mods.contains(&(g, d)) {
                        mods.push((g, d));
                        if !attached.contains(&d) {
                            attached.push(d);
                        }
                    }
                }
                if mods.len() == before {
                    break;
                }
            }
            mods.sort_by_key(|&(g, d)| (spans[g].0, spans[d].0));
            out.push(RelationStructure {
                trigger: span(t),
                label: rel_label,
                arguments: args.iter().map(|&a| span(a)).collect(),
                modifiers: mods
                    .iter()
                    .map(|&(g, d)| Modifier {
                        governor: span(g),
                        dependent: span(d),
                    })
                    .collect(),
                source,
            });
        }
    }
    out
}
