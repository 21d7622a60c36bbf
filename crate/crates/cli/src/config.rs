//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored; a `#` after a value
//! starts a comment. Particle indices are 0-based.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

pub const DEFAULT_MAX_DIM: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Lemma1,
    Lemma2,
    ErScan,
    AppendixVerify,
    QbmCompare,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Lemma1,
        Experiment::Lemma2,
        Experiment::ErScan,
        Experiment::AppendixVerify,
        Experiment::QbmCompare,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Self::Lemma1 => "lemma1",
            Self::Lemma2 => "lemma2",
            Self::ErScan => "er-scan",
            Self::AppendixVerify => "appendix-verify",
            Self::QbmCompare => "qbm-compare",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Self::Lemma1 => "leakage of one split's irrelevant part into another split's system",
            Self::Lemma2 => "commutator of the projections adapted to two splits",
            Self::ErScan => "entanglement of product states after unitary and regrouping maps",
            Self::AppendixVerify => "coefficient-level residual matrices against operator-level ones",
            Self::QbmCompare => "projected reductions and master equations along exact QBM dynamics",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| format!("unknown experiment '{s}'"))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// How the alternative structure is reached from the original split.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Refactor {
    /// Particle split given by `alt_system`.
    Regroup,
    /// Haar-random global unitary, new factors sized like `alt_system`.
    Unitary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateFamily {
    /// Haar-random pure states.
    Haar,
    /// Products of Haar-random single-particle pure states.
    Product,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reference {
    /// Maximally mixed environment state.
    Mixed,
    /// The sampled state's own environment marginal.
    Matched,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Usage,
    Resource,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub key: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ViolationKind::Usage => "usage",
            ViolationKind::Resource => "resource",
        };
        write!(f, "{kind}: {}: {}", self.key, self.message)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub samples: usize,
    pub dims: Vec<usize>,
    pub system: Vec<usize>,
    pub alt_system: Vec<usize>,
    pub refactor: Refactor,
    pub state: StateFamily,
    pub reference: Reference,
    /// Terms of the random separable states in `appendix-verify`.
    pub terms: usize,
    pub threshold: f64,
    pub max_dim: usize,

    pub n_s: usize,
    pub n_e: usize,
    pub system_cutoff: usize,
    pub bath_cutoff: usize,
    pub kappa: f64,
    pub pair_coupling: f64,
    pub trap_frequency: f64,
    pub decoupled: bool,
    pub beta: f64,
    pub gamma: f64,
    /// Master-equation temperature; `1 / beta` when absent.
    pub temperature: Option<f64>,
    pub t_max: f64,
    pub steps: usize,

    pub output: Option<PathBuf>,
    pub format: Format,
    /// Every key as written, in file order.
    pub echo: Vec<(String, String)>,
}

const KEYS: &[&str] = &[
    "experiment",
    "seed",
    "samples",
    "dims",
    "system",
    "alt_system",
    "refactor",
    "state",
    "reference",
    "terms",
    "threshold",
    "max_dim",
    "n_s",
    "n_e",
    "system_cutoff",
    "bath_cutoff",
    "kappa",
    "pair_coupling",
    "trap_frequency",
    "decoupled",
    "beta",
    "gamma",
    "temperature",
    "t_max",
    "steps",
    "output",
    "format",
];

fn parse_list(v: &str) -> Result<Vec<usize>, String> {
    v.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| format!("'{x}': {e}")))
        .collect()
}

struct Reader<'a> {
    entries: &'a [(String, String)],
    violations: Vec<Violation>,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn usage(&mut self, key: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            kind: ViolationKind::Usage,
            key: key.into(),
            message: message.into(),
        });
    }

    fn get<T>(&mut self, key: &str, default: T, parse: impl Fn(&str) -> Result<T, String>) -> T {
        match self.raw(key).map(|v| parse(v)) {
            None => default,
            Some(Ok(v)) => v,
            Some(Err(e)) => {
                self.usage(key, e);
                default
            }
        }
    }

    fn num<T: FromStr>(&mut self, key: &str, default: T) -> T
    where
        T::Err: fmt::Display,
    {
        self.get(key, default, |v| v.parse::<T>().map_err(|e| format!("'{v}': {e}")))
    }
}

fn choice<'a, T: Copy>(options: &'a [(&'a str, T)]) -> impl Fn(&str) -> Result<T, String> + 'a {
    move |v| {
        options
            .iter()
            .find(|(name, _)| *name == v)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                let names: Vec<_> = options.iter().map(|(n, _)| *n).collect();
                format!("'{v}' is not one of {}", names.join(", "))
            })
    }
}

impl ExperimentConfig {
    /// Parses and validates; returns every violation found.
    pub fn parse(text: &str) -> Result<Self, Vec<Violation>> {
        let mut entries = Vec::new();
        let mut violations = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                violations.push(Violation {
                    kind: ViolationKind::Usage,
                    key: format!("line {}", n + 1),
                    message: format!("expected 'key = value', got '{line}'"),
                });
                continue;
            };
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if !KEYS.contains(&k.as_str()) {
                violations.push(Violation {
                    kind: ViolationKind::Usage,
                    key: k.clone(),
                    message: "unknown key".into(),
                });
            }
            entries.push((k, v));
        }
        let mut r = Reader {
            entries: &entries,
            violations,
        };

        let experiment = match r.raw("experiment") {
            None => {
                r.usage("experiment", "missing");
                Experiment::Lemma1
            }
            Some(_) => r.get("experiment", Experiment::Lemma1, Experiment::from_str),
        };
        let cfg = Self {
            experiment,
            seed: r.num("seed", 0u64),
            samples: r.num("samples", 1000usize),
            dims: r.get("dims", vec![2, 2, 2], parse_list),
            system: r.get("system", vec![0], parse_list),
            alt_system: r.get("alt_system", vec![0, 1], parse_list),
            refactor: r.get(
                "refactor",
                Refactor::Regroup,
                choice(&[("regroup", Refactor::Regroup), ("unitary", Refactor::Unitary)]),
            ),
            state: r.get(
                "state",
                StateFamily::Haar,
                choice(&[("haar", StateFamily::Haar), ("product", StateFamily::Product)]),
            ),
            reference: r.get(
                "reference",
                Reference::Mixed,
                choice(&[("mixed", Reference::Mixed), ("matched", Reference::Matched)]),
            ),
            terms: r.num("terms", 2usize),
            threshold: r.num("threshold", 1e-6),
            max_dim: r.num("max_dim", DEFAULT_MAX_DIM),
            n_s: r.num("n_s", 1usize),
            n_e: r.num("n_e", 3usize),
            system_cutoff: r.num("system_cutoff", 6usize),
            bath_cutoff: r.num("bath_cutoff", 4usize),
            kappa: r.num("kappa", 0.2),
            pair_coupling: r.num("pair_coupling", 0.5),
            trap_frequency: r.num("trap_frequency", 1.0),
            decoupled: r.num("decoupled", false),
            beta: r.num("beta", 1.0),
            gamma: r.num("gamma", 0.01),
            temperature: r.get("temperature", None, |v| {
                v.parse::<f64>().map(Some).map_err(|e| format!("'{v}': {e}"))
            }),
            t_max: r.num("t_max", 5.0),
            steps: r.num("steps", 51usize),
            output: r.raw("output").map(PathBuf::from),
            format: r.get(
                "format",
                Format::Csv,
                choice(&[("csv", Format::Csv), ("json", Format::Json)]),
            ),
            echo: entries.clone(),
        };
        let mut violations = r.violations;
        violations.extend(cfg.check());
        if violations.is_empty() {
            Ok(cfg)
        } else {
            Err(violations)
        }
    }

    /// Semantic constraints on already-parsed values.
    pub fn check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut usage = |key: &str, message: String| {
            out.push(Violation {
                kind: ViolationKind::Usage,
                key: key.into(),
                message,
            })
        };
        if self.samples == 0 {
            usage("samples", "must be at least 1".into());
        }
        if !(self.threshold > 0.0) {
            usage("threshold", "must be positive".into());
        }
        let mut resource = Vec::new();
        if self.experiment == Experiment::QbmCompare {
            if self.n_s == 0 || self.n_e == 0 {
                usage("n_s", "need at least one system particle and one oscillator".into());
            }
            if self.system_cutoff < 2 || self.bath_cutoff < 2 {
                usage("system_cutoff", "Fock cutoffs must be at least 2".into());
            }
            if !(self.beta > 0.0) {
                usage("beta", "must be positive".into());
            }
            if !(self.gamma >= 0.0) {
                usage("gamma", "must be >= 0".into());
            }
            if let Some(t) = self.temperature {
                if !(t > 0.0) {
                    usage("temperature", "must be positive".into());
                }
            }
            if !(self.t_max > 0.0) {
                usage("t_max", "must be positive".into());
            }
            if self.steps < 3 {
                usage("steps", "need at least 3 grid times".into());
            }
            if !(self.trap_frequency >= 0.0) {
                usage("trap_frequency", "must be >= 0".into());
            }
            let total = (self.system_cutoff as u128)
                .checked_pow(self.n_s as u32)
                .and_then(|a| (self.bath_cutoff as u128).checked_pow(self.n_e as u32).and_then(|b| a.checked_mul(b)));
            if total.is_none_or(|t| t > self.max_dim as u128) {
                resource.push(Violation {
                    kind: ViolationKind::Resource,
                    key: "n_e".into(),
                    message: format!(
                        "total dimension {} exceeds max_dim {}",
                        total.map_or("overflow".into(), |t| t.to_string()),
                        self.max_dim
                    ),
                });
            }
        } else {
            let n = self.dims.len();
            if n < 2 {
                usage("dims", "need at least two particles".into());
            }
            if self.dims.iter().any(|&d| d < 2) {
                usage("dims", "every particle needs dimension >= 2".into());
            }
            for (key, side) in [("system", &self.system), ("alt_system", &self.alt_system)] {
                let mut sorted = side.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if side.is_empty() || side.len() >= n || sorted.len() != side.len() {
                    usage(key, format!("must list distinct particles and leave some of the {n} out"));
                } else if side.iter().any(|&p| p >= n) {
                    usage(key, format!("particle index out of range for {n} particles"));
                }
            }
            let same = {
                let (mut a, mut b) = (self.system.clone(), self.alt_system.clone());
                a.sort_unstable();
                b.sort_unstable();
                a == b
            };
            if same && self.refactor == Refactor::Regroup && self.experiment != Experiment::ErScan {
                usage("alt_system", "alternative split equals the original split".into());
            }
            if self.experiment == Experiment::AppendixVerify && self.terms == 0 {
                usage("terms", "must be at least 1".into());
            }
            let total = self
                .dims
                .iter()
                .try_fold(1u128, |acc, &d| acc.checked_mul(d as u128));
            if total.is_none_or(|t| t > self.max_dim as u128) {
                resource.push(Violation {
                    kind: ViolationKind::Resource,
                    key: "dims".into(),
                    message: format!("total dimension exceeds max_dim {}", self.max_dim),
                });
            }
        }
        out.extend(resource);
        out
    }

    pub fn total_dim(&self) -> usize {
        match self.experiment {
            Experiment::QbmCompare => {
                self.system_cutoff.pow(self.n_s as u32) * self.bath_cutoff.pow(self.n_e as u32)
            }
            _ => self.dims.iter().product(),
        }
    }
}
