//! Plain-text file formats: corpus files, word vectors, subword
//! vocabulary, IDF table and cluster model.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sore_core::cluster::ClusterModel;
use sore_core::corpus::{parse_conllu, ParsedDocument};
use sore_core::embedding::{EmbeddingTable, IdfTable, StopWords, SubwordVocab};
use sore_core::tradeoff::{RuleTable, TriggerLexicon};

use crate::error::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::read(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::write(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::write(path, e))
}

/// `*.conllu` files of a directory in name order, or the path itself.
pub fn corpus_files(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| Error::read(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "conllu"))
        .collect();
    files.sort();
    Ok(files)
}

/// Reads every document under `path`, sorted by document id.
pub fn load_corpus(path: &Path) -> Result<Vec<ParsedDocument>> {
    let mut docs = Vec::new();
    for file in corpus_files(path)? {
        let text = read_text(&file)?;
        let parsed = parse_conllu(&text).map_err(|e| match e {
            sore_core::corpus::CorpusError::Parse { line, message } => Error::format(&file, line, message),
            other => Error::format(&file, 0, other),
        })?;
        docs.extend(parsed);
    }
    docs.sort_by(|a, b| a.doc_id().cmp(b.doc_id()));
    for w in docs.windows(2) {
        if w[0].doc_id() == w[1].doc_id() {
            return Err(Error::Input(format!("document `{}` appears twice", w[0].doc_id())));
        }
    }
    Ok(docs)
}

/// Word vectors: a `<count> <dim>` header, then `<token> <f1> ... <fdim>`.
pub fn load_vectors(path: &Path) -> Result<EmbeddingTable> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::format(path, 1, "empty vector file"))?;
    let mut head = header.split_whitespace();
    let parse = |s: Option<&str>| s.and_then(|s| s.parse::<usize>().ok());
    let (count, dim) = match (parse(head.next()), parse(head.next()), head.next()) {
        (Some(c), Some(d), None) => (c, d),
        _ => return Err(Error::format(path, 1, "header must be `<count> <dim>`")),
    };
    let mut table = EmbeddingTable::new(dim).map_err(|e| Error::format(path, 1, e))?;
    let mut seen = 0;
    for (n, line) in lines {
        let mut cols = line.split_whitespace();
        let token = cols.next().unwrap_or_default();
        let values: std::result::Result<Vec<f64>, _> = cols.map(str::parse::<f64>).collect();
        let values = values.map_err(|e| Error::format(path, n + 1, e))?;
        table.insert(token, values).map_err(|e| Error::format(path, n + 1, e))?;
        seen += 1;
    }
    if seen != count {
        return Err(Error::format(
            path,
            1,
            format!("header announces {count} vectors, found {seen}"),
        ));
    }
    Ok(table)
}

pub fn vectors_to_text(table: &EmbeddingTable) -> String {
    let mut out = format!("{} {}\n", table.len(), table.dim());
    for (token, v) in table.iter() {
        out.push_str(token);
        for x in v {
            let _ = write!(out, " {x}");
        }
        out.push('\n');
    }
    out
}

/// One unit per line.
pub fn load_vocab(path: &Path) -> Result<SubwordVocab> {
    let text = read_text(path)?;
    SubwordVocab::from_units(text.lines().map(str::trim).filter(|l| !l.is_empty()))
        .map_err(|e| Error::format(path, 0, e))
}

pub fn vocab_to_text(vocab: &SubwordVocab) -> String {
    vocab.units().map(|u| format!("{u}\n")).collect()
}

/// `N=<doc_count>` header, then `unit<TAB>df` lines.
pub fn load_idf(path: &Path) -> Result<IdfTable> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate();
    let n = lines
        .next()
        .and_then(|(_, l)| l.strip_prefix("N="))
        .and_then(|v| v.trim().parse::<u64>().ok())
        .ok_or_else(|| Error::format(path, 1, "header must be `N=<doc_count>`"))?;
    let mut df = BTreeMap::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let (unit, count) = line
            .rsplit_once('\t')
            .ok_or_else(|| Error::format(path, i + 1, "expected `unit<TAB>df`"))?;
        let count: u64 = count.parse().map_err(|e| Error::format(path, i + 1, e))?;
        if df.insert(unit.to_string(), count).is_some() {
            return Err(Error::format(path, i + 1, format!("duplicate unit `{unit}`")));
        }
    }
    IdfTable::new(n, df).map_err(|e| Error::format(path, 1, e))
}

pub fn idf_to_text(idf: &IdfTable) -> String {
    let mut out = format!("N={}\n", idf.doc_count());
    for (unit, df) in idf.frequencies() {
        let _ = writeln!(out, "{unit}\t{df}");
    }
    out
}

pub fn load_stopwords(path: Option<&Path>) -> Result<StopWords> {
    match path {
        Some(p) => Ok(StopWords::parse(&read_text(p)?)),
        None => Ok(StopWords::english()),
    }
}

pub fn load_lexicon(path: Option<&Path>) -> Result<TriggerLexicon> {
    match path {
        Some(p) => TriggerLexicon::parse(&read_text(p)?).map_err(|e| Error::format(p, 0, e)),
        None => Ok(TriggerLexicon::bundled()),
    }
}

pub fn load_rules(path: Option<&Path>) -> Result<RuleTable> {
    match path {
        Some(p) => RuleTable::parse(&read_text(p)?).map_err(|e| Error::format(p, 0, e)),
        None => Ok(RuleTable::bundled()),
    }
}

/// Cluster model layout:
///
/// ```text
/// kmeans k=<k> dim=<dim> seed=<seed>
/// centroid <index> <x1> ... <xdim>     (k lines, index order)
/// assign <phrase-id> <cluster>         (one per assigned phrase, id order)
/// noisy <c1> <c2> ...                  (possibly empty list)
/// ```
///
/// Floats use the shortest representation that reads back exactly.
pub fn model_to_text(model: &ClusterModel) -> String {
    let mut out = format!("kmeans k={} dim={} seed={}\n", model.k, model.dim, model.seed);
    for (i, c) in model.centroids.iter().enumerate() {
        let _ = write!(out, "centroid {i}");
        for x in c {
            let _ = write!(out, " {x}");
        }
        out.push('\n');
    }
    for (p, c) in &model.assignments {
        let _ = writeln!(out, "assign {p} {c}");
    }
    out.push_str("noisy");
    for c in &model.noisy {
        let _ = write!(out, " {c}");
    }
    out.push('\n');
    out
}

pub fn parse_model(text: &str, path: &Path) -> Result<ClusterModel> {
    let err = |line: usize, m: &str| Error::format(path, line, m);
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty model file"))?;
    let mut fields = BTreeMap::new();
    let mut parts = header.split_whitespace();
    if parts.next() != Some("kmeans") {
        return Err(err(1, "header must start with `kmeans`"));
    }
    for p in parts {
        let (k, v) = p.split_once('=').ok_or_else(|| err(1, "malformed header field"))?;
        fields.insert(
            k,
            v.parse::<u64>().map_err(|_| err(1, "header values must be integers"))?,
        );
    }
    let get = |k: &str| {
        fields
            .get(k)
            .copied()
            .ok_or_else(|| err(1, "header needs k, dim and seed"))
    };
    let (k, dim, seed) = (get("k")? as usize, get("dim")? as usize, get("seed")?);

    let mut centroids = Vec::new();
    let mut assignments = BTreeMap::new();
    let mut noisy: Option<BTreeSet<usize>> = None;
    for (i, line) in lines {
        let n = i + 1;
        let mut cols = line.split_whitespace();
        match cols.next() {
            Some("centroid") => {
                let idx: usize = cols
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(n, "bad centroid index"))?;
                if idx != centroids.len() {
                    return Err(err(n, "centroids out of order"));
                }
                let v: std::result::Result<Vec<f64>, _> = cols.map(str::parse).collect();
                centroids.push(v.map_err(|_| err(n, "bad centroid value"))?);
            }
            Some("assign") => {
                let mut num = || cols.next().and_then(|s| s.parse::<usize>().ok());
                match (num(), num()) {
                    (Some(p), Some(c)) => {
                        if assignments.insert(p, c).is_some() {
                            return Err(err(n, "phrase assigned twice"));
                        }
                    }
                    _ => return Err(err(n, "expected `assign <phrase-id> <cluster>`")),
                }
            }
            Some("noisy") => {
                let set: std::result::Result<BTreeSet<usize>, _> = cols.map(str::parse).collect();
                noisy = Some(set.map_err(|_| err(n, "bad noisy index"))?);
            }
            None => {}
            Some(other) => return Err(err(n, &format!("unknown record `{other}`"))),
        }
    }
    let model = ClusterModel {
        k,
        dim,
        seed,
        centroids,
        assignments,
        noisy: noisy.ok_or_else(|| err(0, "missing `noisy` line"))?,
    };
    model.validate().map_err(|e| Error::format(path, 0, e))?;
    Ok(model)
}

pub fn load_model(path: &Path) -> Result<ClusterModel> {
    parse_model(&read_text(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_round_trip() {
        let model = ClusterModel {
            k: 2,
            dim: 3,
            seed: 42,
            centroids: vec![vec![0.1, -2.5e-7, 3.0], vec![1.0 / 3.0, 0.0, -1.0]],
            assignments: [(0, 1), (4, 0)].into_iter().collect(),
            noisy: [1].into_iter().collect(),
        };
        let text = model_to_text(&model);
        assert_eq!(parse_model(&text, Path::new("m")).unwrap(), model);
        assert!(text.ends_with("noisy 1\n"));
    }

    #[test]
    fn model_errors() {
        let p = Path::new("m");
        assert!(parse_model("", p).is_err());
        assert!(parse_model("kmeans k=1 dim=1 seed=0\ncentroid 0 1\n", p).is_err());
        assert!(parse_model("kmeans k=1 dim=1 seed=0\ncentroid 0 1\nassign 0 3\nnoisy\n", p).is_err());
        assert!(parse_model("kmeans k=1 dim=1 seed=0\ncentroid 0 1\nnoisy\n", p).is_ok());
    }

    #[test]
    fn vectors_and_idf_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let vp = dir.path().join("v.txt");
        write_text(&vp, "2 2\nsleep 0.5 1\nmemory -1 2e-3\n").unwrap();
        let t = load_vectors(&vp).unwrap();
        assert_eq!(t.get("memory").unwrap(), &[-1.0, 0.002]);
        write_text(&vp, &vectors_to_text(&t)).unwrap();
        assert_eq!(load_vectors(&vp).unwrap(), t);

        write_text(&vp, "3 2\nsleep 0.5 1\n").unwrap();
        assert!(load_vectors(&vp).is_err());
        write_text(&vp, "1 2\nsleep 0.5\n").unwrap();
        assert!(load_vectors(&vp).is_err());

        let ip = dir.path().join("idf.tsv");
        write_text(&ip, "N=3\na\t1\nb c\t3\n").unwrap();
        let idf = load_idf(&ip).unwrap();
        assert_eq!(idf.df("b c"), 3);
        write_text(&ip, &idf_to_text(&idf)).unwrap();
        assert_eq!(load_idf(&ip).unwrap(), idf);
        write_text(&ip, "N=1\na\t2\n").unwrap();
        assert!(load_idf(&ip).is_err());
    }
}
