//! Flat `key = value` pipeline configuration.
//!
//! Lines starting with `#` and blank lines are ignored. Relative paths are
//! resolved against the directory holding the config file. Any key can be
//! overridden by an environment variable named `SORE_<KEY>` in upper case
//! (for example `SORE_K=20`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sore_core::corpus::{default_sections, Section};
use sore_core::{DEFAULT_BEAM_RATIO, DEFAULT_CLUSTERS, DEFAULT_VOCAB_SIZE, MAX_SPAN_WIDTH};

use crate::error::{Error, Result};

pub const ENV_PREFIX: &str = "SORE_";

/// Where trade-off structures come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TradeoffSource {
    Rbs,
    External,
    Both,
}

/// Where Open IE tuples come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OieChoice {
    Builtin,
    External,
    Both,
}

impl TradeoffSource {
    fn as_str(self) -> &'static str {
        match self {
            TradeoffSource::Rbs => "rbs",
            TradeoffSource::External => "external",
            TradeoffSource::Both => "both",
        }
    }

    pub fn uses_rbs(self) -> bool {
        self != TradeoffSource::External
    }

    pub fn uses_external(self) -> bool {
        self != TradeoffSource::Rbs
    }
}

impl FromStr for TradeoffSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "rbs" => Ok(TradeoffSource::Rbs),
            "external" => Ok(TradeoffSource::External),
            "both" => Ok(TradeoffSource::Both),
            _ => Err(format!("expected rbs, external or both, got `{s}`")),
        }
    }
}

impl OieChoice {
    fn as_str(self) -> &'static str {
        match self {
            OieChoice::Builtin => "builtin",
            OieChoice::External => "external",
            OieChoice::Both => "both",
        }
    }

    pub fn uses_builtin(self) -> bool {
        self != OieChoice::External
    }

    pub fn uses_external(self) -> bool {
        self != OieChoice::Builtin
    }
}

impl FromStr for OieChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "builtin" => Ok(OieChoice::Builtin),
            "external" => Ok(OieChoice::External),
            "both" => Ok(OieChoice::Both),
            _ => Err(format!("expected builtin, external or both, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// A CoNLL-U file or a directory of `*.conllu` files.
    pub corpus: PathBuf,
    pub output_dir: PathBuf,
    /// Word-vector text file.
    pub vectors: PathBuf,
    /// Subword vocabulary; built from the corpus when absent.
    pub vocab: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub external_predictions: Option<PathBuf>,
    pub external_oie: Option<PathBuf>,
    /// Directory with gold `.ann` files and their `.conllu` parses.
    pub gold_dir: Option<PathBuf>,
    pub tradeoff_source: TradeoffSource,
    pub oie_source: OieChoice,
    pub sections: BTreeSet<Section>,
    pub k: usize,
    pub beam_ratio: f64,
    pub max_span_width: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub vocab_size: usize,
    pub noisy_non_alpha: f64,
    pub noisy_max_tokens: f64,
    pub cosine_threshold: Option<f64>,
}

/// All keys, in serialization order.
pub const KEYS: [&str; 24] = [
    "corpus",
    "output_dir",
    "vectors",
    "vocab",
    "lexicon",
    "rules",
    "stopwords",
    "external_predictions",
    "external_oie",
    "gold_dir",
    "tradeoff_source",
    "oie_source",
    "sections",
    "k",
    "beam_ratio",
    "max_span_width",
    "seed",
    "max_iter",
    "tol",
    "vocab_size",
    "noisy_non_alpha",
    "noisy_max_tokens",
    "cosine_threshold",
    "config_version",
];

impl PipelineConfig {
    /// Defaults for everything but the three required paths.
    pub fn new(corpus: PathBuf, output_dir: PathBuf, vectors: PathBuf) -> Self {
        PipelineConfig {
            corpus,
            output_dir,
            vectors,
            vocab: None,
            lexicon: None,
            rules: None,
            stopwords: None,
            external_predictions: None,
            external_oie: None,
            gold_dir: None,
            tradeoff_source: TradeoffSource::Rbs,
            oie_source: OieChoice::Builtin,
            sections: default_sections(),
            k: DEFAULT_CLUSTERS,
            beam_ratio: DEFAULT_BEAM_RATIO,
            max_span_width: MAX_SPAN_WIDTH,
            seed: 0,
            max_iter: 300,
            tol: 1e-6,
            vocab_size: DEFAULT_VOCAB_SIZE,
            noisy_non_alpha: 0.3,
            noisy_max_tokens: 10.0,
            cosine_threshold: None,
        }
    }

    /// Reads a config file, applying `SORE_*` environment overrides.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, std::env::vars())
    }

    /// Parses config text. `env` supplies candidate overrides; only
    /// variables starting with [`ENV_PREFIX`] are considered.
    pub fn parse(text: &str, base: &Path, env: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut values: BTreeMap<String, String> = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let key = key.trim().to_string();
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("line {}: unknown key `{key}`", n + 1)));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", n + 1)));
            }
        }
        for (name, value) in env {
            if let Some(key) = name.strip_prefix(ENV_PREFIX) {
                let key = key.to_ascii_lowercase();
                if KEYS.contains(&key.as_str()) {
                    values.insert(key, value);
                }
            }
        }
        Self::from_values(&values, base)
    }

    fn from_values(values: &BTreeMap<String, String>, base: &Path) -> Result<Self> {
        let path = |key: &str| values.get(key).filter(|v| !v.is_empty()).map(|v| base.join(v));
        let required = |key: &str| path(key).ok_or_else(|| Error::Config(format!("missing required key `{key}`")));
        let mut c = PipelineConfig::new(required("corpus")?, required("output_dir")?, required("vectors")?);
        c.vocab = path("vocab");
        c.lexicon = path("lexicon");
        c.rules = path("rules");
        c.stopwords = path("stopwords");
        c.external_predictions = path("external_predictions");
        c.external_oie = path("external_oie");
        c.gold_dir = path("gold_dir");

        fn num<T: FromStr>(values: &BTreeMap<String, String>, key: &str, slot: &mut T) -> Result<()>
        where
            T::Err: std::fmt::Display,
        {
            if let Some(v) = values.get(key) {
                *slot = v
                    .parse()
                    .map_err(|e| Error::Config(format!("key `{key}`: cannot parse `{v}`: {e}")))?;
            }
            Ok(())
        }
        num(values, "tradeoff_source", &mut c.tradeoff_source)?;
        num(values, "oie_source", &mut c.oie_source)?;
        num(values, "k", &mut c.k)?;
        num(values, "beam_ratio", &mut c.beam_ratio)?;
        num(values, "max_span_width", &mut c.max_span_width)?;
        num(values, "seed", &mut c.seed)?;
        num(values, "max_iter", &mut c.max_iter)?;
        num(values, "tol", &mut c.tol)?;
        num(values, "vocab_size", &mut c.vocab_size)?;
        num(values, "noisy_non_alpha", &mut c.noisy_non_alpha)?;
        num(values, "noisy_max_tokens", &mut c.noisy_max_tokens)?;
        if let Some(v) = values.get("cosine_threshold").filter(|v| !v.is_empty()) {
            c.cosine_threshold = Some(
                v.parse()
                    .map_err(|e| Error::Config(format!("key `cosine_threshold`: cannot parse `{v}`: {e}")))?,
            );
        }
        if let Some(v) = values.get("sections") {
            c.sections = v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<Section>()
                        .map_err(|e| Error::Config(format!("key `sections`: {e}")))
                })
                .collect::<Result<_>>()?;
        }
        if let Some(v) = values.get("config_version") {
            if v != "1" {
                return Err(Error::Config(format!("unsupported config_version `{v}`")));
            }
        }
        c.check_ranges()?;
        Ok(c)
    }

    fn check_ranges(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.k < 1 {
            return bad("k must be at least 1");
        }
        if !(self.beam_ratio.is_finite() && self.beam_ratio > 0.0) {
            return bad("beam_ratio must be positive");
        }
        if self.max_span_width < 1 {
            return bad("max_span_width must be at least 1");
        }
        if self.max_iter < 1 {
            return bad("max_iter must be at least 1");
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return bad("tol must be non-negative");
        }
        if self.vocab_size < 1 {
            return bad("vocab_size must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.noisy_non_alpha) {
            return bad("noisy_non_alpha must lie in [0, 1]");
        }
        if !(self.noisy_max_tokens.is_finite() && self.noisy_max_tokens >= 0.0) {
            return bad("noisy_max_tokens must be non-negative");
        }
        if let Some(t) = self.cosine_threshold {
            if !(-1.0..=1.0).contains(&t) {
                return bad("cosine_threshold must lie in [-1, 1]");
            }
        }
        if self.sections.is_empty() {
            return bad("sections must name at least one section");
        }
        Ok(())
    }

    /// Checks parameter ranges and that every referenced input exists.
    pub fn validate(&self) -> Result<()> {
        self.check_ranges()?;
        let inputs = [
            ("corpus", Some(&self.corpus)),
            ("vectors", Some(&self.vectors)),
            ("vocab", self.vocab.as_ref()),
            ("lexicon", self.lexicon.as_ref()),
            ("rules", self.rules.as_ref()),
            ("stopwords", self.stopwords.as_ref()),
            ("external_predictions", self.external_predictions.as_ref()),
            ("external_oie", self.external_oie.as_ref()),
        ];
        for (key, p) in inputs {
            if let Some(p) = p {
                if !p.exists() {
                    return Err(Error::Config(format!("`{key}` path {} does not exist", p.display())));
                }
            }
        }
        if self.tradeoff_source.uses_external() && self.external_predictions.is_none() {
            return Err(Error::Config("tradeoff_source needs `external_predictions`".into()));
        }
        if self.oie_source.uses_external() && self.external_oie.is_none() {
            return Err(Error::Config("oie_source needs `external_oie`".into()));
        }
        Ok(())
    }

    /// Applies one `key=value` override, as given on the command line.
    pub fn set(&mut self, assignment: &str, base: &Path) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
        let mut values = self.values();
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        let value = value.trim();
        let value = if is_path_key(key) && !value.is_empty() {
            base.join(value).to_string_lossy().into_owned()
        } else {
            value.to_string()
        };
        values.insert(key.to_string(), value);
        *self = Self::from_values(&values, Path::new(""))?;
        Ok(())
    }

    fn values(&self) -> BTreeMap<String, String> {
        let mut v = BTreeMap::new();
        let mut put = |k: &str, s: String| {
            v.insert(k.to_string(), s);
        };
        let p = |p: &Path| p.to_string_lossy().into_owned();
        put("corpus", p(&self.corpus));
        put("output_dir", p(&self.output_dir));
        put("vectors", p(&self.vectors));
        for (k, o) in [
            ("vocab", &self.vocab),
            ("lexicon", &self.lexicon),
            ("rules", &self.rules),
            ("stopwords", &self.stopwords),
            ("external_predictions", &self.external_predictions),
            ("external_oie", &self.external_oie),
            ("gold_dir", &self.gold_dir),
        ] {
            if let Some(x) = o {
                put(k, p(x));
            }
        }
        put("tradeoff_source", self.tradeoff_source.as_str().into());
        put("oie_source", self.oie_source.as_str().into());
        put(
            "sections",
            self.sections.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(","),
        );
        put("k", self.k.to_string());
        put("beam_ratio", self.beam_ratio.to_string());
        put("max_span_width", self.max_span_width.to_string());
        put("seed", self.seed.to_string());
        put("max_iter", self.max_iter.to_string());
        put("tol", self.tol.to_string());
        put("vocab_size", self.vocab_size.to_string());
        put("noisy_non_alpha", self.noisy_non_alpha.to_string());
        put("noisy_max_tokens", self.noisy_max_tokens.to_string());
        if let Some(t) = self.cosine_threshold {
            put("cosine_threshold", t.to_string());
        }
        v
    }

    /// Canonical text form: every set key in [`KEYS`] order.
    pub fn to_text(&self) -> String {
        let values = self.values();
        let mut out = String::from("config_version = 1\n");
        for key in KEYS {
            if let Some(v) = values.get(key) {
                let _ = writeln!(out, "{key} = {v}");
            }
        }
        out
    }
}

fn is_path_key(key: &str) -> bool {
    KEYS[..10].contains(&key)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "corpus = corpus\noutput_dir = out\nvectors = vec.txt\n";

    #[test]
    fn defaults_and_relative_paths() {
        let c = PipelineConfig::parse(BASIC, Path::new("/cfg"), []).unwrap();
        assert_eq!(c.corpus, PathBuf::from("/cfg/corpus"));
        assert_eq!(c.k, 50);
        assert_eq!(c.beam_ratio, 0.8);
        assert_eq!(c.max_span_width, 14);
        assert_eq!(c.sections, default_sections());
    }

    #[test]
    fn env_overrides_file() {
        let env = [
            ("SORE_K".to_string(), "7".to_string()),
            ("HOME".to_string(), "/x".to_string()),
        ];
        let c = PipelineConfig::parse(&format!("{BASIC}k = 3\n"), Path::new("/cfg"), env).unwrap();
        assert_eq!(c.k, 7);
    }

    #[test]
    fn rejects_bad_input() {
        let base = Path::new("/cfg");
        assert!(PipelineConfig::parse("corpus = a\n", base, []).is_err());
        assert!(PipelineConfig::parse(&format!("{BASIC}bogus = 1\n"), base, []).is_err());
        assert!(PipelineConfig::parse(&format!("{BASIC}k = 0\n"), base, []).is_err());
        assert!(PipelineConfig::parse(&format!("{BASIC}beam_ratio = -1\n"), base, []).is_err());
        assert!(PipelineConfig::parse(&format!("{BASIC}k = 1\nk = 2\n"), base, []).is_err());
        assert!(PipelineConfig::parse(&format!("{BASIC}sections = methods\n"), base, []).is_err());
    }

    #[test]
    fn text_round_trip() {
        let text = format!("{BASIC}cosine_threshold = 0.25\nsections = results, abstract\nseed = 9\n");
        let c = PipelineConfig::parse(&text, Path::new("/cfg"), []).unwrap();
        let once = c.to_text();
        let again = PipelineConfig::parse(&once, Path::new("/elsewhere"), []).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_text(), once);
    }

    #[test]
    fn set_override() {
        let mut c = PipelineConfig::parse(BASIC, Path::new("/cfg"), []).unwrap();
        c.set("k=4", Path::new("/cwd")).unwrap();
        c.set("vocab=v.txt", Path::new("/cwd")).unwrap();
        assert_eq!(c.k, 4);
        assert_eq!(c.vocab, Some(PathBuf::from("/cwd/v.txt")));
        assert!(c.set("nope=1", Path::new("/")).is_err());
    }
}
