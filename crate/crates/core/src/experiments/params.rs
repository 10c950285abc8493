//! Parameters of each experiment. Every field is optional so that values can
//! come from flags, a JSON config file or the built-in default, in that order
//! of precedence.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Inclusive integer range written `a..b`, `a..=b` or `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntRange {
    pub start: i64,
    pub end: i64,
}

impl IntRange {
    pub fn new(start: i64, end: i64) -> Self {
        Self { start, end }
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<i64> {
        self.start..=self.end
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected an integer range like 2..10, got {s:?}");
        let s = s.trim();
        let (a, b) = match s.split_once("..") {
            Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
            None => (s, s),
        };
        let start: i64 = a.trim().parse().map_err(|_| bad())?;
        let end: i64 = b.trim().parse().map_err(|_| bad())?;
        if end < start {
            return Err(format!("range {s:?} is empty"));
        }
        Ok(Self { start, end })
    }
}

impl Serialize for IntRange {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IntRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Text(String),
            One(i64),
            Pair([i64; 2]),
        }
        match Wire::deserialize(d)? {
            Wire::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Wire::One(v) => Ok(Self::new(v, v)),
            Wire::Pair([a, b]) if a <= b => Ok(Self::new(a, b)),
            Wire::Pair([a, b]) => Err(serde::de::Error::custom(format!("range [{a}, {b}] is empty"))),
        }
    }
}

/// Comma-separated list of reals.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatList(pub Vec<f64>);

impl fmt::Display for FloatList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(f64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let values = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("expected a list of numbers, got {s:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self(values))
    }
}

impl Serialize for FloatList {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FloatList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Text(String),
            One(f64),
            Many(Vec<f64>),
        }
        match Wire::deserialize(d)? {
            Wire::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Wire::One(v) => Ok(Self(vec![v])),
            Wire::Many(v) => Ok(Self(v)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeChoice {
    Strong,
    Weak,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum UpperChoice {
    None,
    Bv,
    Trivial,
    Best,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum WeightChoice {
    Log,
    Loglog,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyChoice {
    LogTheta,
    Loglog,
    StrongLog,
    Sign,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolChoice {
    One,
    LogTheta,
    Loglog,
    StrongLog,
    Sign,
    ParaproductLower,
    ParaproductUpper,
    ParaproductDiagonal,
    Matrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ParaproductChoice {
    Lower,
    Upper,
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    Sweep,
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EquivalenceFamily {
    /// Sign matrices of increasing order.
    Sign,
    /// One sign matrix multiplied by each scale.
    Diagonal,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HEstimateArgs {
    /// JSON matrix file {rows, cols, row_offset, col_offset, data}
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Inline real matrix, rows separated by ';' and entries by ','
    #[arg(long, allow_hyphen_values = true)]
    pub entries: Option<String>,
    /// [default: strong]
    #[arg(long)]
    pub mode: Option<ModeChoice>,
    /// Input exponent [default: 2]
    #[arg(long)]
    pub p: Option<f64>,
    /// Output exponent for the mixed mode [default: p]
    #[arg(long)]
    pub q: Option<f64>,
    /// Estimate H(A) instead of h(A)
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub bilinear: bool,
    /// [default: best]
    #[arg(long)]
    pub upper: Option<UpperChoice>,
    /// [default: 8]
    #[arg(long)]
    pub restarts: Option<usize>,
    /// [default: 200]
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// [default: 1e-12]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Dyadic depth [default: column count]
    #[arg(long)]
    pub levels: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleCheckArgs {
    /// [default: 20]
    #[arg(long)]
    pub trials: Option<usize>,
    /// Largest row count drawn [default: 3]
    #[arg(long)]
    pub max_rows: Option<usize>,
    /// Largest column count drawn [default: 3]
    #[arg(long)]
    pub max_cols: Option<usize>,
    /// Dyadic depth of the space [default: 3]
    #[arg(long)]
    pub levels: Option<usize>,
    /// Allowed |estimate − oracle| [default: 1e-6]
    #[arg(long)]
    pub tol: Option<f64>,
    /// [default: 8]
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleArgs {
    /// Orders N [default: 2..10]
    #[arg(long)]
    pub n: Option<IntRange>,
    /// Comma-separated θ values [default: 0.25]
    #[arg(long)]
    pub theta: Option<FloatList>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandBoundArgs {
    /// [default: log]
    #[arg(long)]
    pub weight: Option<WeightChoice>,
    /// [default: 2]
    #[arg(long)]
    pub theta: Option<f64>,
    /// Matrix sizes [default: 4..12]
    #[arg(long)]
    pub sizes: Option<IntRange>,
    /// [default: 4]
    #[arg(long)]
    pub restarts: Option<usize>,
    /// [default: 200]
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LorentzArgs {
    /// [default: log]
    #[arg(long)]
    pub weight: Option<WeightChoice>,
    /// [default: 2]
    #[arg(long)]
    pub theta: Option<f64>,
    /// Explicit non-increasing weights; overrides --weight
    #[arg(long)]
    pub values: Option<FloatList>,
    /// Materialised length [default: 4096]
    #[arg(long)]
    pub length: Option<usize>,
    /// Horizon of the condition checks [default: length]
    #[arg(long)]
    pub horizon: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LpDecayArgs {
    /// Points per axis, a power of two [default: 1024]
    #[arg(long)]
    pub points: Option<usize>,
    /// Torus period, a power of two [default: 2]
    #[arg(long)]
    pub period: Option<f64>,
    /// Martingale level [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub level: Option<i32>,
    /// Littlewood-Paley indices [default: 1..5]
    #[arg(long, allow_hyphen_values = true)]
    pub j: Option<IntRange>,
    /// [default: 1e-10]
    #[arg(long)]
    pub tol: Option<f64>,
    /// [default: 20000]
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VrDecayArgs {
    /// Points per axis, a power of two [default: 1024]
    #[arg(long)]
    pub points: Option<usize>,
    /// Torus period, a power of two [default: 2]
    #[arg(long)]
    pub period: Option<f64>,
    /// Shifts r [default: -5..5]
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<IntRange>,
    /// [default: 1e-10]
    #[arg(long)]
    pub tol: Option<f64>,
    /// [default: 20000]
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BilinearApplyArgs {
    /// Points per axis, a power of two [default: 1024]
    #[arg(long)]
    pub points: Option<usize>,
    /// Torus period, a power of two [default: 2]
    #[arg(long)]
    pub period: Option<f64>,
    /// [default: one]
    #[arg(long)]
    pub symbol: Option<SymbolChoice>,
    /// θ of the smooth or sign families [default: 2]
    #[arg(long)]
    pub theta: Option<f64>,
    /// Order of the sign family [default: 3]
    #[arg(long)]
    pub n: Option<usize>,
    /// JSON matrix file for --symbol matrix
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// JSON grid function {n, M, L, data}; random when absent
    #[arg(long)]
    pub f: Option<PathBuf>,
    /// JSON grid function {n, M, L, data}; random when absent
    #[arg(long)]
    pub g: Option<PathBuf>,
    /// [default: sweep]
    #[arg(long)]
    pub method: Option<MethodChoice>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquivalenceArgs {
    /// Points per axis, a power of two [default: 1024]
    #[arg(long)]
    pub points: Option<usize>,
    /// Torus period, a power of two [default: 2]
    #[arg(long)]
    pub period: Option<f64>,
    /// [default: sign]
    #[arg(long)]
    pub family: Option<EquivalenceFamily>,
    /// Sign-matrix orders [default: 2..6]
    #[arg(long)]
    pub n: Option<IntRange>,
    /// Order of the scaled matrix in the diagonal family [default: 3]
    #[arg(long)]
    pub base_n: Option<usize>,
    /// Scales of the diagonal family [default: 1,2,4,8]
    #[arg(long)]
    pub scales: Option<FloatList>,
    /// [default: 0.25]
    #[arg(long)]
    pub theta: Option<f64>,
    /// [default: 2]
    #[arg(long)]
    pub p1: Option<f64>,
    /// [default: 2]
    #[arg(long)]
    pub p2: Option<f64>,
    /// Multiplier restarts [default: 4]
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Multiplier alternation rounds [default: 60]
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResynthArgs {
    /// Points per axis, a power of two [default: 1024]
    #[arg(long)]
    pub points: Option<usize>,
    /// Torus period, a power of two [default: 2]
    #[arg(long)]
    pub period: Option<f64>,
    /// [default: log-theta]
    #[arg(long)]
    pub family: Option<FamilyChoice>,
    /// [default: 2]
    #[arg(long)]
    pub theta: Option<f64>,
    /// Order of the sign family [default: 3]
    #[arg(long)]
    pub n: Option<usize>,
    /// Breakup indices on both axes [default: -2..3]
    #[arg(long, allow_hyphen_values = true)]
    pub indices: Option<IntRange>,
    /// Largest |ν|, |ρ| [default: 16]
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Quadrature points per axis [default: 256]
    #[arg(long)]
    pub quadrature: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParaproductArgs {
    /// Points per axis, a power of two [default: 1024]
    #[arg(long)]
    pub points: Option<usize>,
    /// Torus period, a power of two [default: 2]
    #[arg(long)]
    pub period: Option<f64>,
    /// [default: lower]
    #[arg(long)]
    pub which: Option<ParaproductChoice>,
    /// JSON grid function; random when absent
    #[arg(long)]
    pub f: Option<PathBuf>,
    /// JSON grid function; random when absent
    #[arg(long)]
    pub g: Option<PathBuf>,
    /// Summand indices checked [default: the grid's band]
    #[arg(long, allow_hyphen_values = true)]
    pub j: Option<IntRange>,
}

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymbolHArgs {
    /// Points per axis, a power of two [default: 1024]
    #[arg(long)]
    pub points: Option<usize>,
    /// Torus period, a power of two [default: 2]
    #[arg(long)]
    pub period: Option<f64>,
    /// [default: log-theta]
    #[arg(long)]
    pub family: Option<FamilyChoice>,
    /// [default: 2]
    #[arg(long)]
    pub theta: Option<f64>,
    /// Order of the sign family [default: 3]
    #[arg(long)]
    pub n: Option<usize>,
    /// Index range J [default: 3]
    #[arg(long)]
    pub index_range: Option<usize>,
    /// Points per unit of log₂ frequency [default: 4]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Derivative order [default: 0]
    #[arg(long)]
    pub order: Option<usize>,
    /// [default: 4]
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Subcommand, Clone, Debug, PartialEq)]
pub enum Command {
    /// Lower bound (and certified upper bound) for h(A) or H(A)
    HEstimate(HEstimateArgs),
    /// Compare estimate_h with the exact enumeration oracle on random matrices
    OracleCheck(OracleCheckArgs),
    /// Sign-matrix ratios at the Rademacher witness
    Counterexample(CounterexampleArgs),
    /// h of banded weight matrices against the certified bounds
    BandBound(BandBoundArgs),
    /// Lorentz weight conditions
    Lorentz(LorentzArgs),
    /// Decay of martingale-then-Littlewood-Paley norms in j
    LpDecay(LpDecayArgs),
    /// Decay of the V_r norms in r
    VrDecay(VrDecayArgs),
    /// Apply W_σ to two grid functions
    BilinearApply(BilinearApplyArgs),
    /// H estimates against multiplier certificates along a family
    Equivalence(EquivalenceArgs),
    /// Resynthesis error of a symbol against the cutoff
    Resynth(ResynthArgs),
    /// Paraproduct and the spectrum of its summands
    Paraproduct(ParaproductArgs),
    /// Sampled H norm of a symbol
    SymbolH(SymbolHArgs),
}

impl Command {
    pub const NAMES: [&'static str; 12] = [
        "h-estimate",
        "oracle-check",
        "counterexample",
        "band-bound",
        "lorentz",
        "lp-decay",
        "vr-decay",
        "bilinear-apply",
        "equivalence",
        "resynth",
        "paraproduct",
        "symbol-h",
    ];

    pub fn name(&self) -> &'static str {
        let i = match self {
            Command::HEstimate(_) => 0,
            Command::OracleCheck(_) => 1,
            Command::Counterexample(_) => 2,
            Command::BandBound(_) => 3,
            Command::Lorentz(_) => 4,
            Command::LpDecay(_) => 5,
            Command::VrDecay(_) => 6,
            Command::BilinearApply(_) => 7,
            Command::Equivalence(_) => 8,
            Command::Resynth(_) => 9,
            Command::Paraproduct(_) => 10,
            Command::SymbolH(_) => 11,
        };
        Self::NAMES[i]
    }

    /// Parameters set in this command, as a JSON object without nulls.
    pub fn params(&self) -> serde_json::Map<String, serde_json::Value> {
        let v = match self {
            Command::HEstimate(a) => serde_json::to_value(a),
            Command::OracleCheck(a) => serde_json::to_value(a),
            Command::Counterexample(a) => serde_json::to_value(a),
            Command::BandBound(a) => serde_json::to_value(a),
            Command::Lorentz(a) => serde_json::to_value(a),
            Command::LpDecay(a) => serde_json::to_value(a),
            Command::VrDecay(a) => serde_json::to_value(a),
            Command::BilinearApply(a) => serde_json::to_value(a),
            Command::Equivalence(a) => serde_json::to_value(a),
            Command::Resynth(a) => serde_json::to_value(a),
            Command::Paraproduct(a) => serde_json::to_value(a),
            Command::SymbolH(a) => serde_json::to_value(a),
        };
        match v.expect("parameters serialize") {
            serde_json::Value::Object(m) => m.into_iter().filter(|(_, v)| !v.is_null()).collect(),
            _ => unreachable!("parameter structs serialize to objects"),
        }
    }

    /// Rebuild a command of the given name from a parameter object.
    pub fn from_params(name: &str, params: serde_json::Map<String, serde_json::Value>) -> crate::Result<Self> {
        let v = serde_json::Value::Object(params);
        let bad = |e: serde_json::Error| crate::Error::Argument(format!("{name}: {e}"));
        Ok(match name {
            "h-estimate" => Command::HEstimate(serde_json::from_value(v).map_err(bad)?),
            "oracle-check" => Command::OracleCheck(serde_json::from_value(v).map_err(bad)?),
            "counterexample" => Command::Counterexample(serde_json::from_value(v).map_err(bad)?),
            "band-bound" => Command::BandBound(serde_json::from_value(v).map_err(bad)?),
            "lorentz" => Command::Lorentz(serde_json::from_value(v).map_err(bad)?),
            "lp-decay" => Command::LpDecay(serde_json::from_value(v).map_err(bad)?),
            "vr-decay" => Command::VrDecay(serde_json::from_value(v).map_err(bad)?),
            "bilinear-apply" => Command::BilinearApply(serde_json::from_value(v).map_err(bad)?),
            "equivalence" => Command::Equivalence(serde_json::from_value(v).map_err(bad)?),
            "resynth" => Command::Resynth(serde_json::from_value(v).map_err(bad)?),
            "paraproduct" => Command::Paraproduct(serde_json::from_value(v).map_err(bad)?),
            "symbol-h" => Command::SymbolH(serde_json::from_value(v).map_err(bad)?),
            other => return Err(crate::Error::Argument(format!("unknown command {other:?}"))),
        })
    }
}
