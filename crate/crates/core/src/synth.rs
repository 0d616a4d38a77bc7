//! Deterministic synthetic clinical notes with inline PHI tags.
//!
//! Notes are sequences of filler sentences and entity clauses. An entity
//! clause is a category cue ("seen by", "phone") followed by one PHI entity
//! drawn from a closed lexicon. PHI lexicons share no token with the filler
//! vocabulary unless [`GenConfig::overlap`] is set.
//!
//! Categories are assigned to entities by largest token deficit against the
//! configured weights, so realized token proportions track the weights
//! closely even for rare categories. Entity contents, filler and noise come
//! from a per-document random stream.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{parse_annotated, tokenize, AnnotatedDocument};
use crate::labels::{Category, LabelSchema};
use crate::rng::{stream_indexed, Stage};

/// Token counts per category in a reference optometry corpus, in
/// [`Category::ALL`] order.
pub const DEFAULT_CATEGORY_WEIGHTS: [f64; 6] = [1203.0, 462.0, 10.0, 258.0, 119.0, 19.0];

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("{name} must be in [0, 1], got {value}")]
    InvalidRate { name: &'static str, value: f64 },
    #[error("category weights must be finite, nonnegative and not all zero")]
    InvalidWeights,
    #[error("token range {min}..={max} is empty or below the 8-token minimum")]
    InvalidLength { min: usize, max: usize },
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub n_docs: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Probability that the next clause of a note carries an entity.
    pub entity_rate: f64,
    /// Relative PHI token mass per category, [`Category::ALL`] order.
    pub category_weights: [f64; 6],
    /// Per filler word probability of swapping two adjacent letters.
    pub misspelling_rate: f64,
    /// Per filler word probability of truncating it to its first letters.
    pub abbreviation_rate: f64,
    /// Lets PHI lexicon words appear untagged in filler text.
    pub overlap: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 1,
            n_docs: 2000,
            min_tokens: 20,
            max_tokens: 60,
            entity_rate: 0.4,
            category_weights: DEFAULT_CATEGORY_WEIGHTS,
            misspelling_rate: 0.0,
            abbreviation_rate: 0.0,
            overlap: false,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        for (name, value) in [
            ("entity_rate", self.entity_rate),
            ("misspelling_rate", self.misspelling_rate),
            ("abbreviation_rate", self.abbreviation_rate),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SynthError::InvalidRate { name, value });
            }
        }
        let w = &self.category_weights;
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) || w.iter().sum::<f64>() <= 0.0 {
            return Err(SynthError::InvalidWeights);
        }
        if self.min_tokens < 8 || self.min_tokens > self.max_tokens {
            return Err(SynthError::InvalidLength { min: self.min_tokens, max: self.max_tokens });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthDocument {
    pub doc_id: String,
    /// Inline-tag text.
    pub raw: String,
}

impl SynthDocument {
    pub fn parse(&self, schema: &LabelSchema) -> AnnotatedDocument {
        parse_annotated(&self.doc_id, &self.raw, schema).expect("generated markup is well formed")
    }
}

const FILLER: &[&str] = &[
    "eye", "eyes", "vision", "visual", "acuity", "pressure", "intraocular", "drops", "lens", "lenses", "contact",
    "glasses", "spectacles", "reading", "distance", "near", "blurred", "blurry", "dry", "itchy", "red", "redness",
    "tearing", "discharge", "pain", "mild", "moderate", "severe", "stable", "improved", "worse", "unchanged",
    "left", "right", "both", "bilateral", "cornea", "corneal", "retina", "retinal", "macula", "optic", "nerve",
    "disc", "cup", "ratio", "fundus", "dilated", "exam", "examination", "refraction", "prescription", "myopia",
    "hyperopia", "astigmatism", "presbyopia", "cataract", "glaucoma", "suspect", "floaters", "flashes", "headache",
    "history", "family", "diabetes", "hypertension", "allergies", "medication", "artificial", "tears", "twice",
    "daily", "nightly", "weekly", "continue", "start", "stop", "discussed", "advised", "recommend", "review",
    "follow", "up", "return", "clinic", "visit", "routine", "annual", "complaint", "reports", "denies", "notes",
    "normal", "abnormal", "within", "limits", "pupils", "equal", "reactive", "light", "field", "fields", "full",
    "no", "with", "without", "and", "the", "a", "of", "for", "to", "in", "is", "was", "has", "had", "not", "noted",
    "today", "previous", "current", "new", "old", "pair", "wear", "wearing", "screen", "time", "hours", "months",
    "weeks", "years", "ago", "since", "patient", "pt", "presents", "referred", "seen", "by", "on", "at", "phone",
    "call", "contact", "tel", "cell", "lives", "moved", "address", "resides", "signed", "copy", "dated", "last",
    "next", "appointment", "scheduled", "imaging", "reviewed", "transferred", "name", "report", "sent", "letter",
];

const CUES: [&[&[&str]]; 6] = [
    &[&["on"], &["dated"], &["last", "visit"], &["return", "on"], &["seen", "on"], &["next", "appointment"]],
    &[&["seen", "by"], &["referred", "by"], &["signed", "by"], &["copy", "to"], &["reviewed", "with"]],
    &[&["transferred", "to"], &["imaging", "at"], &["referred", "to"], &["seen", "at"]],
    &[&["lives", "in"], &["address"], &["moved", "to"], &["resides", "at"]],
    &[&["patient"], &["pt"], &["name"], &["patient", "name"]],
    &[&["phone"], &["call"], &["contact"], &["tel"], &["cell"]],
];

const MONTHS: &[&str] = &[
    "January", "February", "March", "April", "June", "July", "August", "September", "October", "November",
    "December", "Jan", "Feb", "Mar", "Apr", "Aug", "Sept", "Oct", "Nov", "Dec",
];
const DOCTOR_SURNAMES: &[&str] = &[
    "Abernathy", "Baptiste", "Castellano", "Dubois", "Eriksen", "Fairbanks", "Gallagher", "Hashemi", "Ivanova",
    "Jablonski", "Kowalczyk", "Lindqvist", "Moreau", "Nakamura", "Okonkwo", "Pellegrini", "Quinlan", "Rasmussen",
    "Sorensen", "Takahashi", "Umarov", "Valdivia", "Whitcombe", "Xiong", "Yamamoto", "Zeller",
];
const DOCTOR_GIVEN: &[&str] = &["Alistair", "Beatrix", "Cedric", "Delphine", "Evander", "Fiona", "Gideon", "Henrietta"];
const DOCTOR_TITLES: &[&str] = &["Dr", "Doctor", "Prof"];
const PATIENT_GIVEN: &[&str] = &[
    "Aaliyah", "Brandon", "Chloe", "Darnell", "Emma", "Felix", "Grace", "Hugo", "Isla", "Jasper", "Kiara", "Liam",
    "Maya", "Noah", "Olivia", "Parker", "Quinn", "Ruby", "Silas", "Tessa",
];
const PATIENT_SURNAMES: &[&str] = &[
    "Anderson", "Brooks", "Campbell", "Dawson", "Ellison", "Fletcher", "Garrison", "Holloway", "Ingram", "Jennings",
    "Kendrick", "Lawson", "Mercer", "Norwood", "Oakley", "Prescott", "Radcliffe", "Sheffield", "Thornton", "Underwood",
];
const HOSPITAL_NAMES: &[&str] = &["Northgate", "Riverside", "Lakeshore", "Sunnybrook", "Westfield", "Maplewood", "Kingsway"];
const HOSPITAL_KINDS: &[&str] = &["Hospital", "Infirmary", "Ophthalmic Institute", "Medical Centre"];
const STREETS: &[&str] = &["Birchmount", "Elmcrest", "Foxhollow", "Glenview", "Harbourfront", "Juniper", "Larkspur"];
const STREET_KINDS: &[&str] = &["Street", "Road", "Avenue", "Crescent", "Boulevard"];
const CITIES: &[&str] = &["Ashbury", "Brampton", "Carrington", "Dunmore", "Eastleigh", "Fernhill", "Greystone"];
const PROVINCES: &[&str] = &["Ontario", "Quebec", "Manitoba", "Alberta"];

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    items.choose(rng).expect("lexicons are non-empty")
}

fn digits(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n).map(|i| char::from(b'0' + rng.gen_range(if i == 0 { 1 } else { 0 }..10))).collect()
}

fn entity_text(category: Category, rng: &mut ChaCha8Rng) -> String {
    match category {
        Category::Date => {
            let day = rng.gen_range(1..=28);
            let month = rng.gen_range(1..=12);
            let year = rng.gen_range(1990..=2017);
            match rng.gen_range(0..5) {
                0 => format!("{day} {} {year}", pick(rng, MONTHS)),
                1 => format!("{day:02}/{month:02}/{year}"),
                2 => format!("{} {day}", pick(rng, MONTHS)),
                3 => format!("{day:02}-{month:02}-{:02}", year % 100),
                _ => format!("{year}"),
            }
        }
        Category::Doctor => match rng.gen_range(0..3) {
            0 => format!("{}. {}", pick(rng, DOCTOR_TITLES), pick(rng, DOCTOR_SURNAMES)),
            1 => format!("{} {}", pick(rng, DOCTOR_GIVEN), pick(rng, DOCTOR_SURNAMES)),
            _ => pick(rng, DOCTOR_SURNAMES).to_string(),
        },
        Category::Hospital => format!("{} {}", pick(rng, HOSPITAL_NAMES), pick(rng, HOSPITAL_KINDS)),
        Category::Location => match rng.gen_range(0..3) {
            0 => format!("{} {} {}", digits(rng, 3), pick(rng, STREETS), pick(rng, STREET_KINDS)),
            1 => pick(rng, CITIES).to_string(),
            _ => format!("{}, {}", pick(rng, CITIES), pick(rng, PROVINCES)),
        },
        Category::Patient => match rng.gen_range(0..3) {
            0 => format!("{} {}", pick(rng, PATIENT_GIVEN), pick(rng, PATIENT_SURNAMES)),
            1 => pick(rng, PATIENT_SURNAMES).to_string(),
            _ => pick(rng, PATIENT_GIVEN).to_string(),
        },
        Category::Phone => match rng.gen_range(0..2) {
            0 => format!("{}-{}-{}", digits(rng, 3), digits(rng, 3), digits(rng, 4)),
            _ => format!("({}) {}-{}", digits(rng, 3), digits(rng, 3), digits(rng, 4)),
        },
    }
}

/// Every word any PHI lexicon can emit, for disjointness checks.
pub fn phi_lexicon() -> Vec<&'static str> {
    let mut words: Vec<&str> = [
        MONTHS,
        DOCTOR_SURNAMES,
        DOCTOR_GIVEN,
        DOCTOR_TITLES,
        PATIENT_GIVEN,
        PATIENT_SURNAMES,
        HOSPITAL_NAMES,
        STREETS,
        STREET_KINDS,
        CITIES,
        PROVINCES,
    ]
    .concat();
    words.extend(HOSPITAL_KINDS.iter().flat_map(|k| k.split(' ')));
    words
}

/// The filler vocabulary, cue words included.
pub fn filler_vocabulary() -> &'static [&'static str] {
    FILLER
}

fn noisy(word: &str, config: &GenConfig, rng: &mut ChaCha8Rng) -> String {
    let mut chars: Vec<char> = word.chars().collect();
    if chars.len() >= 4 && rng.gen_bool(config.misspelling_rate) {
        let i = rng.gen_range(0..chars.len() - 1);
        chars.swap(i, i + 1);
    }
    if chars.len() >= 5 && rng.gen_bool(config.abbreviation_rate) {
        chars.truncate(rng.gen_range(3..=4));
    }
    chars.into_iter().collect()
}

fn filler_word(config: &GenConfig, rng: &mut ChaCha8Rng) -> String {
    if config.overlap && rng.gen_bool(0.05) {
        let lexicon = phi_lexicon();
        return pick(rng, &lexicon).to_string();
    }
    noisy(pick(rng, FILLER), config, rng)
}

fn capitalize(word: &str) -> String {
    let mut c = word.chars();
    match c.next() {
        Some(first) => first.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Category chooser shared across documents.
struct Quota {
    shares: [f64; 6],
    realized: [f64; 6],
    total: f64,
}

impl Quota {
    fn new(weights: &[f64; 6]) -> Self {
        let sum: f64 = weights.iter().sum();
        Quota { shares: weights.map(|w| w / sum), realized: [0.0; 6], total: 0.0 }
    }

    fn next(&self) -> Category {
        let mut best = None;
        let mut best_deficit = f64::NEG_INFINITY;
        for (i, &share) in self.shares.iter().enumerate() {
            if share > 0.0 {
                let deficit = share * self.total - self.realized[i];
                if deficit > best_deficit {
                    best_deficit = deficit;
                    best = Some(Category::ALL[i]);
                }
            }
        }
        best.expect("validated weights have a positive entry")
    }

    fn record(&mut self, category: Category, tokens: usize) {
        self.realized[category.index()] += tokens as f64;
        self.total += tokens as f64;
    }
}

fn generate_one(index: usize, config: &GenConfig, quota: &mut Quota) -> SynthDocument {
    let mut rng = stream_indexed(config.seed, Stage::SynthGen, index as u32);
    let target = rng.gen_range(config.min_tokens..=config.max_tokens);
    let mut clauses: Vec<String> = Vec::new();
    let mut len = 0;

    while len < target {
        let room = config.max_tokens - len;
        let mut clause = Vec::new();
        let mut clause_len = 0;
        if rng.gen_bool(config.entity_rate) {
            let category = quota.next();
            let cues = CUES[category.index()];
            let cue = cues.choose(&mut rng).expect("cues are non-empty");
            let entity = entity_text(category, &mut rng);
            let entity_len = tokenize(&entity).len();
            let tail = rng.gen_range(0..=3);
            // Cue, entity, tail words and the full stop.
            let needed = cue.len() + entity_len + tail + 1;
            if needed <= room {
                let mut words: Vec<String> = cue.iter().map(|w| w.to_string()).collect();
                words[0] = capitalize(&words[0]);
                clause.push(words.join(" "));
                clause.push(format!("<PHI TYPE=\"{}\">{entity}</PHI>", category.tag()));
                clause.extend((0..tail).map(|_| filler_word(config, &mut rng)));
                clause_len = needed;
                quota.record(category, entity_len);
            }
        }
        if clause_len == 0 {
            let words = rng.gen_range(3..=8).min(room.saturating_sub(1)).max(1);
            let mut sentence: Vec<String> = (0..words).map(|_| filler_word(config, &mut rng)).collect();
            sentence[0] = capitalize(&sentence[0]);
            clause.extend(sentence);
            clause_len = words + 1;
        }
        clauses.push(format!("{}.", clause.join(" ")));
        len += clause_len;
    }
    SynthDocument { doc_id: format!("synth{index:05}"), raw: clauses.join(" ") }
}

/// Generates `config.n_docs` notes. The result depends only on `config`.
pub fn generate(config: &GenConfig) -> Result<Vec<SynthDocument>, SynthError> {
    config.validate()?;
    let mut quota = Quota::new(&config.category_weights);
    Ok((0..config.n_docs).map(|i| generate_one(i, config, &mut quota)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub documents: usize,
    pub tokens: usize,
    pub files: Vec<String>,
    /// Realized PHI token count per category tag.
    pub category_tokens: BTreeMap<String, usize>,
}

impl Manifest {
    pub fn build(seed: u64, docs: &[SynthDocument], schema: &LabelSchema) -> Self {
        let mut category_tokens: BTreeMap<String, usize> =
            Category::ALL.iter().map(|c| (c.tag().to_string(), 0)).collect();
        let mut tokens = 0;
        for doc in docs {
            let parsed = doc.parse(schema);
            tokens += parsed.len();
            for &l in &parsed.labels {
                if let Some(c) = schema.category(l) {
                    *category_tokens.get_mut(c.tag()).expect("all tags present") += 1;
                }
            }
        }
        Manifest {
            seed,
            documents: docs.len(),
            tokens,
            files: docs.iter().map(|d| format!("{}.txt", d.doc_id)).collect(),
            category_tokens,
        }
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes one `.txt` file per document and a `manifest.json` into `dir`.
pub fn write_corpus(
    docs: &[SynthDocument],
    seed: u64,
    dir: &Path,
    schema: &LabelSchema,
) -> Result<Manifest, SynthError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| SynthError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for doc in docs {
        let path = dir.join(format!("{}.txt", doc.doc_id));
        fs::write(&path, &doc.raw).map_err(io_err(&path))?;
    }
    let manifest = Manifest::build(seed, docs, schema);
    let path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(io_err(&path))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::normalize;
    use std::collections::HashSet;

    fn small(seed: u64) -> GenConfig {
        GenConfig { seed, n_docs: 50, ..GenConfig::default() }
    }

    #[test]
    fn same_seed_same_corpus() {
        assert_eq!(generate(&small(3)).unwrap(), generate(&small(3)).unwrap());
        assert_ne!(generate(&small(3)).unwrap(), generate(&small(4)).unwrap());
    }

    #[test]
    fn documents_parse_and_respect_length() {
        let s = LabelSchema::default();
        let config = small(5);
        for doc in generate(&config).unwrap() {
            let parsed = parse_annotated(&doc.doc_id, &doc.raw, &s).unwrap();
            assert!(parsed.len() >= config.min_tokens, "{} tokens", parsed.len());
            assert!(parsed.len() <= config.max_tokens, "{} tokens", parsed.len());
        }
    }

    #[test]
    fn zero_weight_category_never_appears() {
        let mut config = small(6);
        config.category_weights[Category::Hospital.index()] = 0.0;
        let docs = generate(&config).unwrap();
        assert!(docs.iter().all(|d| !d.raw.contains("TYPE=\"HOSPITAL\"")));
    }

    #[test]
    fn lexicons_are_disjoint_from_filler() {
        let filler: HashSet<String> = FILLER.iter().map(|w| normalize(w)).collect();
        for w in phi_lexicon() {
            assert!(!filler.contains(&normalize(w)), "{w} is in both");
        }
        assert!(FILLER.iter().all(|w| !w.chars().any(|c| c.is_ascii_digit())));
    }

    #[test]
    fn filler_tokens_never_match_phi_tokens() {
        let s = LabelSchema::default();
        let mut phi = HashSet::new();
        let mut other = HashSet::new();
        for doc in generate(&small(8)).unwrap() {
            let parsed = doc.parse(&s);
            for (t, &l) in parsed.tokens.iter().zip(&parsed.labels) {
                let set = if s.is_phi(l) { &mut phi } else { &mut other };
                set.insert(normalize(&t.text));
            }
        }
        // Punctuation inside entities ("Dr." and dates) is the only overlap.
        let shared: Vec<_> = phi.intersection(&other).filter(|w| w.chars().any(char::is_alphanumeric)).collect();
        assert!(shared.is_empty(), "{shared:?}");
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = GenConfig { entity_rate: 1.5, ..GenConfig::default() };
        assert!(matches!(generate(&bad), Err(SynthError::InvalidRate { name: "entity_rate", .. })));
        let bad = GenConfig { category_weights: [0.0; 6], ..GenConfig::default() };
        assert!(matches!(generate(&bad), Err(SynthError::InvalidWeights)));
        let bad = GenConfig { min_tokens: 30, max_tokens: 20, ..GenConfig::default() };
        assert!(matches!(generate(&bad), Err(SynthError::InvalidLength { .. })));
    }

    #[test]
    fn noise_only_touches_filler() {
        let s = LabelSchema::default();
        let clean = generate(&small(9)).unwrap();
        let noisy = generate(&GenConfig { misspelling_rate: 0.5, abbreviation_rate: 0.5, ..small(9) }).unwrap();
        assert_ne!(clean, noisy);
        let spans = |docs: &[SynthDocument]| -> Vec<String> {
            docs.iter()
                .flat_map(|d| {
                    let p = d.parse(&s);
                    p.tokens.iter().zip(&p.labels).filter(|(_, &l)| s.is_phi(l)).map(|(t, _)| t.text.clone()).collect::<Vec<_>>()
                })
                .collect()
        };
        let (a, b) = (spans(&clean), spans(&noisy));
        // Noise consumes random draws, so entities differ, but every PHI
        // token still comes from the lexicons or is numeric or punctuation.
        let lexicon: HashSet<&str> = phi_lexicon().into_iter().collect();
        for t in a.iter().chain(&b) {
            assert!(lexicon.contains(t.as_str()) || !t.chars().any(char::is_alphabetic), "{t}");
        }
    }
}
