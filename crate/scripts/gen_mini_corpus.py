#!/usr/bin/env python3
"""Generate the bundled 20-document mini-corpus and its synthetic word vectors.

Output (default crates/sore/tests/data/mini):
  corpus/doc-NN.conllu   one parsed document per file
  vectors.txt            topic-clustered word vectors, `<count> <dim>` header
  mini.conf              pipeline configuration for the corpus

Everything is derived from a fixed seed, so re-running reproduces the files
byte for byte.
"""

import argparse
import random
from pathlib import Path

DIM = 12
SEED = 20200514

TOPICS = {
    "energy": ["energy", "metabolism", "expenditure", "fuel", "torpor", "hibernation", "conservation", "fat"],
    "growth": ["growth", "size", "body", "mass", "development", "height"],
    "reproduction": ["reproduction", "fecundity", "offspring", "eggs", "mating", "fertility"],
    "survival": ["survival", "longevity", "lifespan", "mortality", "safety", "predation"],
    "defence": ["defence", "toxins", "armour", "spines", "immunity"],
    "efficiency": ["efficiency", "speed", "transport", "conductance", "flow", "water"],
    "cognition": ["memory", "sleep", "learning", "cognition", "consolidation"],
    "taxa": ["bats", "birds", "conifers", "lizards", "fish", "plants", "insects", "frogs"],
    "offtopic": ["river", "museum", "author", "map", "weather", "city", "journal", "bridge", "photographs", "samples"],
}

ADJECTIVES = {"high": "energy", "rapid": "growth", "low": "survival", "large": "growth", "strong": "defence"}

# Noun phrases per topic: (words, upos per word). The last word is the head.
PHRASES = {
    "energy": [["energy", "conservation"], ["metabolism"], ["fat", "storage"], ["torpor"], ["energy", "expenditure"]],
    "growth": [["body", "size"], ["growth"], ["rapid", "growth"], ["body", "mass"], ["development"]],
    "reproduction": [["reproduction"], ["fecundity"], ["offspring", "number"], ["mating"], ["fertility"]],
    "survival": [["survival"], ["longevity"], ["lifespan"], ["low", "mortality"], ["safety"]],
    "defence": [["defence"], ["immunity"], ["toxins"], ["strong", "armour"], ["spines"]],
    "efficiency": [["efficiency"], ["speed"], ["water", "transport"], ["conductance"], ["flow"]],
    "cognition": [["memory", "consolidation"], ["sleep"], ["learning"], ["cognition"], ["memory"]],
}

OFFTOPIC_PHRASES = [["the", "river"], ["the", "museum"], ["the", "author"], ["the", "map"], ["the", "weather"],
                    ["the", "city"], ["the", "journal"], ["the", "bridge"], ["photographs"], ["samples"]]
PROPER = ["Smith", "Kruger", "Natal", "Okavango", "Baxter", "Lindqvist", "Harrow", "Tobago", "Moreau", "Quill"]

VERBS = [("limits", "limit"), ("reduces", "reduce"), ("increases", "increase"), ("supports", "support"),
         ("requires", "require"), ("affects", "affect")]
OFF_VERBS = [("crossed", "cross"), ("visited", "visit"), ("described", "describe"), ("photographed", "photograph")]

TRIGGERS = ["trade-off", "compromise", "conflict"]

PAIRS = [
    ("energy", "growth"), ("reproduction", "survival"), ("defence", "growth"), ("efficiency", "survival"),
    ("cognition", "energy"), ("growth", "reproduction"), ("survival", "defence"), ("efficiency", "energy"),
    ("cognition", "survival"), ("reproduction", "energy"), ("growth", "efficiency"), ("defence", "reproduction"),
    ("energy", "survival"), ("cognition", "growth"), ("efficiency", "reproduction"), ("survival", "growth"),
    ("defence", "energy"), ("cognition", "reproduction"),
]


def upos(word):
    if word in ADJECTIVES:
        return "ADJ"
    if word == "the":
        return "DET"
    if word[0].isupper():
        return "PROPN"
    return "NOUN"


class Sentence:
    def __init__(self):
        self.rows = []  # [form, lemma, upos, head, deprel, space_after]

    def add(self, form, lemma, pos, head, deprel):
        self.rows.append([form, lemma, pos, head, deprel, True])
        return len(self.rows)

    def phrase(self, words, head, deprel):
        """Appends a noun phrase; modifiers point at the last word."""
        first = len(self.rows) + 1
        last = first + len(words) - 1
        for i, w in enumerate(words):
            pos = upos(w)
            if i == len(words) - 1:
                self.add(w, w.lower(), pos, head, deprel)
            else:
                rel = {"DET": "det", "ADJ": "amod"}.get(pos, "compound")
                self.add(w, w.lower(), pos, last, rel)
        return last

    def set_head(self, index, head):
        self.rows[index - 1][3] = head

    def finish(self):
        self.rows[-2][5] = False
        first = self.rows[0][0]
        self.rows[0][0] = first[:1].upper() + first[1:]
        return self

    def text(self):
        out = []
        for r in self.rows:
            out.append(r[0])
            if r[5]:
                out.append(" ")
        return "".join(out).rstrip()

    def conllu(self, sent_id, section):
        lines = [f"# sent_id = {sent_id}", f"# section = {section}", f"# text = {self.text()}"]
        for i, (form, lemma, pos, head, rel, space) in enumerate(self.rows, 1):
            misc = "_" if space else "SpaceAfter=No"
            lines.append(f"{i}\t{form}\t{lemma}\t{pos}\t_\t_\t{head}\t{rel}\t_\t{misc}")
        return "\n".join(lines) + "\n"


def tradeoff_sentence(trigger, x, y, taxon, adjective=None):
    """There is a <trigger> between X and Y in <taxon>."""
    s = Sentence()
    s.add("There", "there", "PRON", 2, "expl")
    root = s.add("is", "be", "VERB", 0, "root")
    s.add("a", "a", "DET", 0, "det")
    if adjective:
        s.add(adjective, adjective, "ADJ", 0, "amod")
    trig = s.add(trigger, trigger, "NOUN", root, "nsubj")
    for i in range(3, trig):
        s.set_head(i, trig)
    s.add("between", "between", "ADP", 0, "case")
    xh = s.phrase(x, trig, "nmod")
    s.set_head(xh - len(x), xh)
    s.add("and", "and", "CCONJ", 0, "cc")
    yh = s.phrase(y, xh, "conj")
    s.set_head(yh - len(y), yh)
    s.add("in", "in", "ADP", 0, "case")
    th = s.add(taxon, taxon, "NOUN", trig, "nmod")
    s.set_head(th - 1, th)
    s.add(".", ".", "PUNCT", root, "punct")
    return s.finish()


def svo_sentence(subj, verb, obj, place):
    """S V O in P."""
    s = Sentence()
    n = len(subj)
    sh = s.phrase(subj, n + 1, "nsubj")
    root = s.add(verb[0], verb[1], "VERB", 0, "root")
    assert root == sh + 1
    s.phrase(obj, root, "obj")
    s.add("in", "in", "ADP", 0, "case")
    ph = s.phrase(place, root, "obl")
    s.set_head(ph - len(place), ph)
    s.add(".", ".", "PUNCT", root, "punct")
    return s.finish()


def copula_sentence(subj, pred):
    """S is P."""
    s = Sentence()
    n = len(subj)
    s.phrase(subj, n + 2, "nsubj")
    s.add("is", "be", "AUX", n + 2, "cop")
    root = s.phrase(pred, 0, "root")
    s.add(".", ".", "PUNCT", root, "punct")
    return s.finish()


def vectors(rng):
    centroids = {t: [rng.gauss(0, 1) for _ in range(DIM)] for t in TOPICS}
    words = {}
    for topic, ws in TOPICS.items():
        for w in ws:
            words[w] = [3.0 * c + 0.4 * rng.gauss(0, 1) for c in centroids[topic]]
    for adj, topic in ADJECTIVES.items():
        words[adj] = [3.0 * c + 0.4 * rng.gauss(0, 1) for c in centroids[topic]]
    for w in ["number", "storage"]:
        words[w] = [0.5 * rng.gauss(0, 1) for _ in range(DIM)]
    lines = [f"{len(words)} {DIM}"]
    for w in sorted(words):
        lines.append(w + " " + " ".join(f"{v:.6f}" for v in words[w]))
    return "\n".join(lines) + "\n"


def document(n, rng):
    sentences = []
    if n < len(PAIRS):
        a, b = PAIRS[n]
        pa, pb = rng.choice(PHRASES[a]), rng.choice(PHRASES[b])
        taxon = rng.choice(TOPICS["taxa"])
        sentences.append(("abstract", tradeoff_sentence(rng.choice(TRIGGERS), pa, pb, taxon)))
        if n % 3 == 0:
            pc, pd = rng.choice(PHRASES[a]), rng.choice(PHRASES[b])
            if pc != pa or pd != pb:
                sentences.append(("results", tradeoff_sentence("trade-off", pc, pd, taxon)))
        for _ in range(2):
            subj = rng.choice(PHRASES[rng.choice([a, b])])
            obj = rng.choice(PHRASES[rng.choice([a, b])])
            sentences.append(("results", svo_sentence(subj, rng.choice(VERBS), obj, [taxon])))
        sentences.append(("discussion", svo_sentence(rng.choice(OFFTOPIC_PHRASES), rng.choice(OFF_VERBS),
                                                     rng.choice(OFFTOPIC_PHRASES), ["the", "field"])))
        if n % 2 == 0:
            p1, p2, p3 = rng.sample(PROPER, 3)
            sentences.append(("discussion", svo_sentence([p1], rng.choice(OFF_VERBS), [p2], [p3])))
        if n % 4 == 1:
            sentences.append(("conclusion", copula_sentence(rng.choice(PHRASES[a]), ["important"])))
    elif n == len(PAIRS):
        # Syntactically similar but not a trade-off.
        s = tradeoff_sentence("correlation", ["body", "size"], ["fecundity"], "fish", adjective="positive")
        sentences.append(("results", s))
        sentences.append(("results", svo_sentence(["body", "mass"], VERBS[2], ["fecundity"], ["fish"])))
    else:
        sentences.append(("results", svo_sentence(["the", "author"], OFF_VERBS[1], ["the", "museum"], ["the", "city"])))
        sentences.append(("discussion", copula_sentence(["the", "weather"], ["cold"])))
    sentences.append(("other", svo_sentence(["the", "journal"], OFF_VERBS[2], ["samples"], ["the", "bridge"])))

    doc_id = f"doc-{n + 1:02d}"
    parts = [f"# newdoc id = {doc_id}"]
    for i, (section, s) in enumerate(sentences, 1):
        parts.append(s.conllu(f"{doc_id}-s{i}", section))
    return doc_id, "\n".join(parts) + "\n"


CONFIG = """\
# Mini-corpus configuration. Paths are relative to this file.
corpus = corpus
output_dir = out
vectors = vectors.txt
k = 6
seed = 7
vocab_size = 400
"""


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "crates/sore/tests/data/mini")
    args = ap.parse_args()
    rng = random.Random(SEED)
    corpus = args.out / "corpus"
    corpus.mkdir(parents=True, exist_ok=True)
    for old in corpus.glob("*.conllu"):
        old.unlink()
    (args.out / "vectors.txt").write_text(vectors(rng))
    for n in range(20):
        doc_id, text = document(n, rng)
        (corpus / f"{doc_id}.conllu").write_text(text)
    (args.out / "mini.conf").write_text(CONFIG)


if __name__ == "__main__":
    main()
