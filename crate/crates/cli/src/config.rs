//! Flat `key = value` run configurations.
//!
//! One pair per line; `#` starts a comment. Unknown and duplicate keys are
//! errors. Relative paths are resolved against the directory holding the
//! config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use composite_sgd::LipschitzConvention;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    LinearDiscrete,
    LinearContinuous,
    Logistic,
    /// `f(x) = 1/2 ||x - a||^2` with optional injected gradient noise; with
    /// an l1 penalty this is the orthogonal-design lasso.
    Quadratic,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::LinearDiscrete => "linear-discrete",
            ProblemKind::LinearContinuous => "linear-continuous",
            ProblemKind::Logistic => "logistic",
            ProblemKind::Quadratic => "quadratic",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            ProblemKind::LinearDiscrete,
            ProblemKind::LinearContinuous,
            ProblemKind::Logistic,
            ProblemKind::Quadratic,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }

    /// Problems backed by a finite data set.
    pub fn has_dataset(self) -> bool {
        matches!(self, ProblemKind::LinearDiscrete | ProblemKind::Logistic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularizerKind {
    None,
    L1,
    Hierarchical,
    /// Arbitrary weighted groups read from `groups_file`.
    Groups,
}

impl RegularizerKind {
    pub fn name(self) -> &'static str {
        match self {
            RegularizerKind::None => "none",
            RegularizerKind::L1 => "l1",
            RegularizerKind::Hierarchical => "hierarchical",
            RegularizerKind::Groups => "groups",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            RegularizerKind::None,
            RegularizerKind::L1,
            RegularizerKind::Hierarchical,
            RegularizerKind::Groups,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SolverKind {
    Sg,
    Ssg,
    Acsa,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Sg => "sg",
            SolverKind::Ssg => "ssg",
            SolverKind::Acsa => "acsa",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [SolverKind::Sg, SolverKind::Ssg, SolverKind::Acsa]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

const KEYS: &[&str] = &[
    "problem",
    "regularizer",
    "groups_file",
    "solver",
    "K",
    "p",
    "n",
    "lambda",
    "N",
    "batch_size",
    "seed",
    "seeds",
    "data_seed",
    "trace_every",
    "lipschitz_convention",
    "lipschitz",
    "mu",
    "acsa_sigma_sq",
    "acsa_D",
    "noise_sigma_sq",
    "center",
    "center_norm",
    "out",
    "data_file",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub regularizer: RegularizerKind,
    pub groups_file: Option<PathBuf>,
    pub solvers: Vec<SolverKind>,
    /// Number of samples; `None` for problems without a data set or when
    /// the data come from `data_file`.
    pub k: Option<usize>,
    pub p: usize,
    /// Depth of the hierarchical tree, `p = 2^n`.
    pub n: Option<u32>,
    pub lambda: f64,
    pub iterations: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Number of consecutive seeds starting at `seed`; `None` leaves the
    /// choice to the subcommand.
    pub seeds: Option<usize>,
    pub data_seed: u64,
    pub trace_every: usize,
    pub lipschitz_convention: LipschitzConvention,
    pub lipschitz: Option<f64>,
    pub mu: Option<f64>,
    pub acsa_sigma_sq: Option<f64>,
    pub acsa_d: f64,
    pub noise_sigma_sq: f64,
    pub center: Option<Vec<f64>>,
    pub center_norm: f64,
    pub out: PathBuf,
    pub data_file: Option<PathBuf>,
    /// The pairs exactly as written, for echoing into reports.
    pub raw: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let raw = parse_pairs(text)?;
        let r = Reader { raw: &raw };

        let problem = r.required("problem", |s| ProblemKind::parse(s).ok_or("expected linear-discrete, linear-continuous, logistic or quadratic"))?;
        let regularizer = r.required("regularizer", |s| RegularizerKind::parse(s).ok_or("expected none, l1, hierarchical or groups"))?;
        let solvers = r.required("solver", parse_solvers)?;
        let lambda = r.required("lambda", parse_f64)?;
        if !(lambda >= 0.0) {
            return Err(field("lambda", "must be >= 0"));
        }
        let iterations = r.required("N", parse_count)?;
        let seed = r.required("seed", |s| s.parse::<u64>().map_err(|_| "expected a non-negative integer"))?;

        let n = r.optional("n", |s| s.parse::<u32>().map_err(|_| "expected a non-negative integer"))?;
        let p_given = r.optional("p", parse_count)?;
        let p = match (regularizer, n, p_given) {
            (RegularizerKind::Hierarchical, Some(n), p) => {
                if n > 20 {
                    return Err(field("n", "hierarchy depth above 20 is not supported"));
                }
                let from_n = 1usize << n;
                if let Some(p) = p {
                    if p != from_n {
                        return Err(field("p", &format!("hierarchical regularizer needs p = 2^n = {from_n}, got {p}")));
                    }
                }
                from_n
            }
            (RegularizerKind::Hierarchical, None, Some(p)) => {
                if !p.is_power_of_two() {
                    return Err(field("p", &format!("hierarchical regularizer needs p = 2^n, got {p}")));
                }
                p
            }
            (_, _, Some(p)) => p,
            (RegularizerKind::Hierarchical, None, None) => return Err(field("n", "missing required field (or give p = 2^n)")),
            (_, _, None) if raw.contains_key("center") => 0,
            _ => return Err(field("p", "missing required field")),
        };
        if n.is_some() && regularizer != RegularizerKind::Hierarchical {
            return Err(field("n", "only valid with regularizer = hierarchical"));
        }

        let center = r.optional("center", parse_list)?;
        if center.is_some() && problem != ProblemKind::Quadratic {
            return Err(field("center", "only valid with problem = quadratic"));
        }
        let p = match &center {
            Some(c) if p == 0 => c.len(),
            Some(c) if c.len() != p => return Err(field("center", &format!("has {} entries but p = {p}", c.len()))),
            _ => p,
        };
        if problem == ProblemKind::LinearDiscrete || problem == ProblemKind::LinearContinuous {
            if p % 2 != 0 {
                return Err(field("p", "linear problems need an even p"));
            }
        }

        let data_file = r.optional("data_file", |s| Ok::<_, &str>(base.join(s)))?;
        let k = r.optional("K", parse_count)?;
        if problem.has_dataset() && k.is_none() && data_file.is_none() {
            return Err(field("K", "missing required field"));
        }
        if !problem.has_dataset() {
            if k.is_some() {
                return Err(field("K", &format!("not used by problem = {}", problem.name())));
            }
            if data_file.is_some() {
                return Err(field("data_file", &format!("not used by problem = {}", problem.name())));
            }
        }

        let groups_file = r.optional("groups_file", |s| Ok::<_, &str>(base.join(s)))?;
        match (regularizer, &groups_file) {
            (RegularizerKind::Groups, None) => return Err(field("groups_file", "missing required field")),
            (RegularizerKind::Groups, Some(_)) => {}
            (_, Some(_)) => return Err(field("groups_file", "only valid with regularizer = groups")),
            _ => {}
        }

        let trace_every = r
            .optional("trace_every", parse_count)?
            .unwrap_or_else(|| (iterations / 1000).max(1));
        let lipschitz_convention = r
            .optional("lipschitz_convention", |s| match s {
                "paper" => Ok(LipschitzConvention::Paper),
                "scaled" => Ok(LipschitzConvention::Scaled),
                _ => Err("expected paper or scaled"),
            })?
            .unwrap_or_default();
        let lipschitz = r.optional("lipschitz", parse_positive)?;
        let mu = r.optional("mu", parse_positive)?;
        let acsa_sigma_sq = r.optional("acsa_sigma_sq", parse_non_negative)?;
        let acsa_d = r.optional("acsa_D", parse_positive)?.unwrap_or(1.0);
        let noise_sigma_sq = r.optional("noise_sigma_sq", parse_non_negative)?;
        if noise_sigma_sq.is_some() && problem != ProblemKind::Quadratic {
            return Err(field("noise_sigma_sq", "only valid with problem = quadratic"));
        }
        let center_norm = r.optional("center_norm", parse_non_negative)?;
        if center_norm.is_some() && (problem != ProblemKind::Quadratic || center.is_some()) {
            return Err(field("center_norm", "only valid with problem = quadratic and no explicit center"));
        }

        Ok(RunConfig {
            problem,
            regularizer,
            groups_file,
            solvers,
            k,
            p,
            n,
            lambda,
            iterations,
            batch_size: r.optional("batch_size", parse_count)?.unwrap_or(10),
            seed,
            seeds: r.optional("seeds", parse_count)?,
            data_seed: r
                .optional("data_seed", |s| s.parse::<u64>().map_err(|_| "expected a non-negative integer"))?
                .unwrap_or(seed),
            trace_every,
            lipschitz_convention,
            lipschitz,
            mu,
            acsa_sigma_sq,
            acsa_d,
            noise_sigma_sq: noise_sigma_sq.unwrap_or(0.0),
            center,
            center_norm: center_norm.unwrap_or(1.0),
            out: base.join(raw.get("out").map(String::as_str).unwrap_or("out")),
            data_file,
            raw,
        })
    }

    /// The seeds to run: `seeds` consecutive values starting at `seed`.
    pub fn seed_list(&self, default_count: usize) -> Vec<u64> {
        let count = self.seeds.unwrap_or(default_count) as u64;
        (0..count).map(|i| self.seed.wrapping_add(i)).collect()
    }
}

fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut raw = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", i + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(CliError::Config(format!("line {}: unknown key `{key}`", i + 1)));
        }
        if raw.insert(key.to_string(), value.to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(raw)
}

struct Reader<'a> {
    raw: &'a BTreeMap<String, String>,
}

impl Reader<'_> {
    fn optional<T, E: std::fmt::Display>(&self, key: &str, parse: impl Fn(&str) -> Result<T, E>) -> Result<Option<T>, CliError> {
        match self.raw.get(key) {
            None => Ok(None),
            Some(v) => parse(v)
                .map(Some)
                .map_err(|e| field(key, &format!("invalid value `{v}`: {e}"))),
        }
    }

    fn required<T, E: std::fmt::Display>(&self, key: &str, parse: impl Fn(&str) -> Result<T, E>) -> Result<T, CliError> {
        self.optional(key, parse)?
            .ok_or_else(|| field(key, "missing required field"))
    }
}

fn field(key: &str, msg: &str) -> CliError {
    CliError::Config(format!("field `{key}`: {msg}"))
}

fn parse_f64(s: &str) -> Result<f64, &'static str> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err("expected a finite number"),
    }
}

fn parse_positive(s: &str) -> Result<f64, &'static str> {
    parse_f64(s).and_then(|v| if v > 0.0 { Ok(v) } else { Err("must be > 0") })
}

fn parse_non_negative(s: &str) -> Result<f64, &'static str> {
    parse_f64(s).and_then(|v| if v >= 0.0 { Ok(v) } else { Err("must be >= 0") })
}

fn parse_count(s: &str) -> Result<usize, &'static str> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err("expected a positive integer"),
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, &'static str> {
    let v: Vec<f64> = s.split(',').map(|t| parse_f64(t.trim())).collect::<Result<_, _>>()?;
    if v.is_empty() {
        return Err("expected a comma-separated list of numbers");
    }
    Ok(v)
}

fn parse_solvers(s: &str) -> Result<Vec<SolverKind>, &'static str> {
    let mut out = Vec::new();
    for name in s.split(',').map(str::trim) {
        let k = SolverKind::parse(name).ok_or("expected a comma-separated list of sg, ssg, acsa")?;
        if out.contains(&k) {
            return Err("solver listed twice");
        }
        out.push(k);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, CliError> {
        RunConfig::parse(text, Path::new("/cfg"))
    }

    const FIG1: &str = "\
# lasso, three solvers
problem = linear-discrete
regularizer = l1
solver = sg,ssg,acsa
K = 1000
p = 20
lambda = 0.1
N = 50000
batch_size = 10
seed = 1
lipschitz_convention = paper
";

    #[test]
    fn parses_full_config() {
        let c = parse(FIG1).unwrap();
        assert_eq!(c.problem, ProblemKind::LinearDiscrete);
        assert_eq!(c.solvers, vec![SolverKind::Sg, SolverKind::Ssg, SolverKind::Acsa]);
        assert_eq!((c.k, c.p, c.iterations, c.batch_size), (Some(1000), 20, 50000, 10));
        assert_eq!(c.lipschitz_convention, LipschitzConvention::Paper);
        assert_eq!(c.data_seed, 1);
        assert_eq!(c.trace_every, 50);
        assert_eq!(c.out, Path::new("/cfg/out"));
        assert_eq!(c.seed_list(3), vec![1, 2, 3]);
    }

    #[test]
    fn missing_field_is_named() {
        let text = FIG1.replace("lambda = 0.1\n", "");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("lambda") && err.contains("missing"), "{err}");
        assert_eq!(parse(&text).unwrap_err().exit_code(), 2);
        let err = parse(&FIG1.replace("K = 1000\n", "")).unwrap_err().to_string();
        assert!(err.contains("`K`"), "{err}");
    }

    #[test]
    fn unknown_and_duplicate_keys_rejected() {
        assert!(parse(&format!("{FIG1}bogus = 1\n")).unwrap_err().to_string().contains("bogus"));
        assert!(parse(&format!("{FIG1}N = 5\n")).unwrap_err().to_string().contains("duplicate"));
    }

    #[test]
    fn hierarchical_dimension_rules() {
        let base = "problem = linear-discrete\nregularizer = hierarchical\nsolver = ssg\nK = 1000\nlambda = 0.1\nN = 100\nseed = 0\n";
        let c = parse(&format!("{base}n = 5\n")).unwrap();
        assert_eq!((c.p, c.n), (32, Some(5)));
        assert_eq!(parse(&format!("{base}p = 16\n")).unwrap().p, 16);
        assert!(parse(&format!("{base}p = 24\n")).unwrap_err().to_string().contains("2^n"));
        assert!(parse(&format!("{base}n = 5\np = 16\n")).is_err());
        assert!(parse(base).unwrap_err().to_string().contains("`n`"));
    }

    #[test]
    fn quadratic_center_sets_dimension() {
        let c = parse("problem = quadratic\nregularizer = none\nsolver = sg\nlambda = 0\nN = 98\nseed = 0\ncenter = 0.6, -0.8\nnoise_sigma_sq = 0.25\n").unwrap();
        assert_eq!(c.p, 2);
        assert_eq!(c.center, Some(vec![0.6, -0.8]));
        assert_eq!(c.noise_sigma_sq, 0.25);
    }

    #[test]
    fn value_errors() {
        assert!(parse(&FIG1.replace("lambda = 0.1", "lambda = -1")).is_err());
        assert!(parse(&FIG1.replace("N = 50000", "N = 0")).is_err());
        assert!(parse(&FIG1.replace("solver = sg,ssg,acsa", "solver = sgd")).is_err());
        assert!(parse(&FIG1.replace("p = 20", "p = 21")).is_err());
        assert!(parse("problem = linear-discrete\n = 3\n").is_err());
    }
}
