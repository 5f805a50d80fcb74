//! Run configuration: a line-oriented `key = value` file.
//!
//! Blank lines and lines starting with `#` are ignored. Relative paths are
//! resolved against the directory holding the file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::corpus::ValidationConfig;
use crate::fusion::{CVConfig, EvalConfig, FeatureConfig, WordLengthUnit};
use crate::lexical::{AffectLexicon, LexicalError, Lexicons, PosWeights};
use crate::svm::TrainConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{origin}:{line}: {reason}")]
    Malformed { origin: String, line: usize, reason: String },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("no manifest configured (set `manifest` or pass --manifest)")]
    MissingManifest,
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Lexical(#[from] LexicalError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub intensity_threshold: f64,
    pub presence_ratio: f64,
    pub min_frequency: usize,
    pub pos_weights: PosWeights,
    pub train: TrainConfig,
    pub cv: CVConfig,
    /// [visual, lexical, acoustic].
    pub fusion_weights: [f64; 3],
    pub use_visual: bool,
    pub use_lexical: bool,
    pub use_acoustic: bool,
    pub min_duration_s: f64,
    pub min_success_fraction: f64,
    pub word_length_unit: WordLengthUnit,
    pub c_grid: bool,
    pub weight_grid: bool,
    pub affect_lexicon: Option<PathBuf>,
    pub pronoun_list: Option<PathBuf>,
    pub adjective_list: Option<PathBuf>,
    pub article_list: Option<PathBuf>,
    pub preposition_list: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let validation = ValidationConfig::default();
        let features = FeatureConfig::default();
        RunConfig {
            manifest: None,
            output_dir: PathBuf::from("out"),
            intensity_threshold: features.intensity_threshold,
            presence_ratio: features.presence_ratio,
            min_frequency: features.min_frequency,
            pos_weights: features.pos_weights,
            train: TrainConfig::default(),
            cv: CVConfig::default(),
            fusion_weights: [1.0 / 3.0; 3],
            use_visual: true,
            use_lexical: true,
            use_acoustic: true,
            min_duration_s: validation.min_duration_s,
            min_success_fraction: validation.min_success_fraction,
            word_length_unit: WordLengthUnit::Tokens,
            c_grid: false,
            weight_grid: false,
            affect_lexicon: None,
            pronoun_list: None,
            adjective_list: None,
            article_list: None,
            preposition_list: None,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::InvalidValue { key: key.into(), value: value.into(), reason: e.to_string() })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(ConfigError::InvalidValue { key: key.into(), value: value.into(), reason: "expected true or false".into() }),
    }
}

fn resolve(base: &Path, value: &str) -> PathBuf {
    let p = PathBuf::from(value);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, &path.display().to_string())
    }

    pub fn parse(text: &str, base: &Path, origin: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Malformed { origin: origin.into(), line: i + 1, reason: format!("expected `key = value`, found `{line}`") });
            };
            cfg.set(key.trim(), value.trim(), base).map_err(|e| ConfigError::Malformed { origin: origin.into(), line: i + 1, reason: e.to_string() })?;
        }
        Ok(cfg)
    }

    /// Applies one setting; relative paths resolve against `base`.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), ConfigError> {
        let path = || Some(resolve(base, value));
        match key {
            "manifest" => self.manifest = path(),
            "output_dir" => self.output_dir = resolve(base, value),
            "intensity_threshold" => self.intensity_threshold = parse_value(key, value)?,
            "presence_ratio" => self.presence_ratio = parse_value(key, value)?,
            "min_frequency" => self.min_frequency = parse_value(key, value)?,
            "weight_pronoun" => self.pos_weights.pronoun = parse_value(key, value)?,
            "weight_adjective" => self.pos_weights.adjective = parse_value(key, value)?,
            "weight_pause" => self.pos_weights.pause = parse_value(key, value)?,
            "weight_other" => self.pos_weights.other = parse_value(key, value)?,
            "c_penalty" => self.train.c_penalty = parse_value(key, value)?,
            "tolerance" => self.train.tolerance = parse_value(key, value)?,
            "max_epochs" => self.train.max_epochs = parse_value(key, value)?,
            "train_seed" => self.train.seed = parse_value(key, value)?,
            "n_folds" => self.cv.n_folds = parse_value(key, value)?,
            "stratified" => self.cv.stratified = parse_bool(key, value)?,
            "cv_seed" => self.cv.seed = parse_value(key, value)?,
            "fusion_weights" => {
                let parts: Vec<f64> = value.split(',').map(|v| parse_value(key, v.trim())).collect::<Result<_, _>>()?;
                self.fusion_weights = parts.try_into().map_err(|_| ConfigError::InvalidValue {
                    key: key.into(),
                    value: value.into(),
                    reason: "expected three comma-separated weights (visual, lexical, acoustic)".into(),
                })?;
            }
            "use_visual" => self.use_visual = parse_bool(key, value)?,
            "use_lexical" => self.use_lexical = parse_bool(key, value)?,
            "use_acoustic" => self.use_acoustic = parse_bool(key, value)?,
            "min_duration_s" => self.min_duration_s = parse_value(key, value)?,
            "min_success_fraction" => self.min_success_fraction = parse_value(key, value)?,
            "word_length_unit" => self.word_length_unit = parse_value(key, value)?,
            "c_grid" => self.c_grid = parse_bool(key, value)?,
            "weight_grid" => self.weight_grid = parse_bool(key, value)?,
            "affect_lexicon" => self.affect_lexicon = path(),
            "pronoun_list" => self.pronoun_list = path(),
            "adjective_list" => self.adjective_list = path(),
            "article_list" => self.article_list = path(),
            "preposition_list" => self.preposition_list = path(),
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        let opt = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        if let Some(m) = opt(&self.manifest) {
            put("manifest", m);
        }
        put("output_dir", self.output_dir.display().to_string());
        put("intensity_threshold", format!("{:?}", self.intensity_threshold));
        put("presence_ratio", format!("{:?}", self.presence_ratio));
        put("min_frequency", self.min_frequency.to_string());
        put("weight_pronoun", format!("{:?}", self.pos_weights.pronoun));
        put("weight_adjective", format!("{:?}", self.pos_weights.adjective));
        put("weight_pause", format!("{:?}", self.pos_weights.pause));
        put("weight_other", format!("{:?}", self.pos_weights.other));
        put("c_penalty", format!("{:?}", self.train.c_penalty));
        put("tolerance", format!("{:?}", self.train.tolerance));
        put("max_epochs", self.train.max_epochs.to_string());
        put("train_seed", self.train.seed.to_string());
        put("n_folds", self.cv.n_folds.to_string());
        put("stratified", self.cv.stratified.to_string());
        put("cv_seed", self.cv.seed.to_string());
        put("fusion_weights", self.fusion_weights.map(|w| format!("{w:?}")).join(", "));
        put("use_visual", self.use_visual.to_string());
        put("use_lexical", self.use_lexical.to_string());
        put("use_acoustic", self.use_acoustic.to_string());
        put("min_duration_s", format!("{:?}", self.min_duration_s));
        put("min_success_fraction", format!("{:?}", self.min_success_fraction));
        put("word_length_unit", self.word_length_unit.as_str().to_string());
        put("c_grid", self.c_grid.to_string());
        put("weight_grid", self.weight_grid.to_string());
        for (k, v) in [
            ("affect_lexicon", &self.affect_lexicon),
            ("pronoun_list", &self.pronoun_list),
            ("adjective_list", &self.adjective_list),
            ("article_list", &self.article_list),
            ("preposition_list", &self.preposition_list),
        ] {
            if let Some(p) = opt(v) {
                put(k, p);
            }
        }
        out
    }

    pub fn validation(&self) -> ValidationConfig {
        ValidationConfig { min_duration_s: self.min_duration_s, min_success_fraction: self.min_success_fraction }
    }

    pub fn lexicons(&self) -> Result<Lexicons, ConfigError> {
        let mut lex = Lexicons::default();
        for (path, set) in [
            (&self.pronoun_list, &mut lex.pronouns),
            (&self.adjective_list, &mut lex.adjectives),
            (&self.article_list, &mut lex.articles),
            (&self.preposition_list, &mut lex.prepositions),
        ] {
            if let Some(p) = path {
                *set = Lexicons::read_list(p)?;
            }
        }
        Ok(lex)
    }

    pub fn feature_config(&self) -> Result<FeatureConfig, ConfigError> {
        Ok(FeatureConfig {
            intensity_threshold: self.intensity_threshold,
            presence_ratio: self.presence_ratio,
            min_frequency: self.min_frequency,
            pos_weights: self.pos_weights,
            lexicons: self.lexicons()?,
            affect: self.affect_lexicon.as_deref().map(AffectLexicon::read).transpose()?,
            word_length_unit: self.word_length_unit,
            ..FeatureConfig::default()
        })
    }

    pub fn eval_config(&self) -> Result<EvalConfig, ConfigError> {
        Ok(EvalConfig {
            cv: self.cv,
            train: self.train,
            features: self.feature_config()?,
            modalities: [self.use_visual, self.use_lexical, self.use_acoustic],
            c_grid: self.c_grid,
            weight_grid: self.weight_grid,
        })
    }

    pub fn manifest(&self) -> Result<&Path, ConfigError> {
        self.manifest.as_deref().ok_or(ConfigError::MissingManifest)
    }
}
