//! Metric-preserving functions as serializable expression trees.
//!
//! A descriptor pairs an arity with an [`Expr`]. Variadic kinds (lp, max,
//! exp_log, ...) take their arity from the descriptor; unary kinds read
//! only the first argument.

mod defect;
mod triplets;

pub use defect::{
    classify_sequence, defect_table, ClassifyConfig, Condition, ConditionResult, DefectReport, SequenceVerdict,
};
pub use triplets::{check_triangle_triplets, check_triangle_triplets_with, TripletConfig, TripletVerdict, TripletWitness};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpfError {
    #[error("expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("argument {0} is negative or not finite")]
    BadArgument(usize),
    #[error("phi is not strictly increasing from 0 near s = {0}")]
    NotIncreasing(f64),
    #[error("invalid descriptor: {0}")]
    Invalid(String),
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("family members disagree in arity")]
    InconsistentArity,
    #[error("grid with {0} cells is too large")]
    GridTooLarge(usize),
    #[error("classification violates the implication chain: {0}")]
    ChainViolated(String),
    #[error("json: {0}")]
    Json(String),
}

/// Generator φ of a Mulholland function φ⁻¹(Σ φ(s_i)).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phi", rename_all = "snake_case")]
pub enum Phi {
    /// s^p, p ≥ 1.
    Power { p: f64 },
    /// e^s − 1.
    Expm1,
    Sinh,
    /// s² + 2s.
    QuadLinear,
    /// 5/3·s on [0,1), 7/3·s − 2/3 on [1,2), s² beyond.
    Petrik,
    /// Σ c_k s^k; inverted by bisection.
    Polynomial { coeffs: Vec<f64> },
}

impl Phi {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Phi::Power { p } => s.powf(*p),
            Phi::Expm1 => s.exp_m1(),
            Phi::Sinh => s.sinh(),
            Phi::QuadLinear => s * s + 2.0 * s,
            Phi::Petrik => {
                if s < 1.0 {
                    5.0 / 3.0 * s
                } else if s < 2.0 {
                    7.0 / 3.0 * s - 2.0 / 3.0
                } else {
                    s * s
                }
            }
            Phi::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c),
        }
    }

    pub fn inverse(&self, y: f64) -> f64 {
        match self {
            Phi::Power { p } => y.powf(1.0 / p),
            Phi::Expm1 => y.ln_1p(),
            Phi::Sinh => y.asinh(),
            Phi::QuadLinear => y / ((1.0 + y).sqrt() + 1.0),
            Phi::Petrik => {
                if y < 5.0 / 3.0 {
                    0.6 * y
                } else if y < 4.0 {
                    (y + 2.0 / 3.0) * 3.0 / 7.0
                } else {
                    y.sqrt()
                }
            }
            Phi::Polynomial { .. } => bisect_inverse(|s| self.eval(s), y),
        }
    }

    /// Strict increase from φ(0) = 0 on a sampled grid.
    pub fn check_increasing(&self) -> Result<(), MpfError> {
        if self.eval(0.0).abs() > 1e-12 {
            return Err(MpfError::NotIncreasing(0.0));
        }
        let mut prev = 0.0;
        for k in 1..=4000 {
            let s = k as f64 * 0.005;
            let v = self.eval(s);
            if !(v > prev) {
                return Err(MpfError::NotIncreasing(s));
            }
            prev = v;
        }
        Ok(())
    }

    /// Sampled convexity of φ and of log∘φ∘exp, the two hypotheses of the
    /// Mulholland sufficient condition.
    pub fn convexity(&self) -> (bool, bool) {
        let second_diff_ok = |g: &dyn Fn(f64) -> f64, lo: f64, hi: f64| {
            let m = 800;
            let h = (hi - lo) / m as f64;
            (1..m).all(|k| {
                let x = lo + k as f64 * h;
                let dd = g(x - h) - 2.0 * g(x) + g(x + h);
                dd >= -1e-9 * (1.0 + g(x).abs())
            })
        };
        let phi = |s: f64| self.eval(s);
        let logexp = |u: f64| self.eval(u.exp()).ln();
        (second_diff_ok(&phi, 0.0, 8.0), second_diff_ok(&logexp, -6.0, 2.5))
    }
}

/// Solves g(s) = y for increasing g with g(0) = 0 by bracket doubling and
/// bisection to relative width 1e-12.
pub fn bisect_inverse(g: impl Fn(f64) -> f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while g(hi) < y {
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interp {
    Linear,
    Step,
}

/// Expression tree. Segments of a piecewise function are themselves unary
/// expressions, applied on the half-open intervals between breaks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expr {
    Lp { p: f64 },
    Max,
    ExpLog,
    PowerSum { alpha: f64 },
    Pq { p: f64, q: f64 },
    Mulholland(Phi),
    Piecewise { breaks: Vec<f64>, segments: Vec<Expr> },
    Sum { parts: Vec<Expr> },
    SplitSum { parts: Vec<Expr> },
    Compose {
        outer: Box<Expr>,
        inner: Box<Expr>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        pre: Vec<Expr>,
    },
    Scale { c: f64, inner: Box<Expr> },
    MinClamp { cap: f64, inner: Box<Expr> },
    Cyc,
    Table { xs: Vec<f64>, ys: Vec<f64>, interp: Interp },
    Notisotone,
    Identity,
    Const { c: f64 },
    Affine { intercept: f64, slope: f64 },
    Power { e: f64 },
    H2Tail,
}

/// Unary or fixed-arity requirement of an expression kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    Unary,
    Binary,
    Any,
}

impl Expr {
    fn shape(&self) -> Shape {
        match self {
            Expr::Lp { .. } | Expr::Max | Expr::ExpLog | Expr::PowerSum { .. } | Expr::Pq { .. } | Expr::Cyc => {
                Shape::Any
            }
            Expr::Mulholland(_) => Shape::Any,
            Expr::Sum { .. } | Expr::SplitSum { .. } | Expr::Compose { .. } => Shape::Any,
            Expr::Scale { inner, .. } | Expr::MinClamp { inner, .. } => inner.shape(),
            Expr::Notisotone => Shape::Binary,
            Expr::Piecewise { .. }
            | Expr::Table { .. }
            | Expr::Identity
            | Expr::Const { .. }
            | Expr::Affine { .. }
            | Expr::Power { .. }
            | Expr::H2Tail => Shape::Unary,
        }
    }

    fn validate(&self, arity: usize) -> Result<(), MpfError> {
        let bad = |m: &str| Err(MpfError::Invalid(m.to_string()));
        match self.shape() {
            Shape::Unary if arity != 1 => return bad("unary kind used with arity > 1"),
            Shape::Binary if arity != 2 => return bad("binary kind used with arity ≠ 2"),
            _ => {}
        }
        match self {
            Expr::Lp { p } if !(*p >= 1.0) || !p.is_finite() => bad("lp needs finite p ≥ 1"),
            Expr::PowerSum { alpha } if !(*alpha > 0.0 && *alpha <= 1.0) => bad("power_sum needs α in (0,1]"),
            Expr::Pq { p, q } if !(*p >= 1.0 && *q >= *p) => bad("pq needs 1 ≤ p ≤ q"),
            Expr::Mulholland(phi) => phi.check_increasing(),
            Expr::Piecewise { breaks, segments } => {
                if segments.len() != breaks.len() + 1 {
                    return bad("piecewise needs one more segment than breaks");
                }
                if breaks.windows(2).any(|w| !(w[0] < w[1])) || breaks.first().is_some_and(|b| !(*b > 0.0)) {
                    return bad("piecewise breaks must be positive and increasing");
                }
                segments.iter().try_for_each(|s| s.validate(1))
            }
            Expr::Sum { parts } => {
                if parts.is_empty() {
                    return bad("empty sum");
                }
                parts.iter().try_for_each(|p| p.validate(arity))
            }
            Expr::SplitSum { parts } => {
                if parts.len() != arity {
                    return Err(MpfError::ArityMismatch { expected: arity, got: parts.len() });
                }
                parts.iter().try_for_each(|p| p.validate(1))
            }
            Expr::Compose { outer, inner, pre } => {
                outer.validate(1)?;
                inner.validate(arity)?;
                if !pre.is_empty() && pre.len() != arity {
                    return Err(MpfError::ArityMismatch { expected: arity, got: pre.len() });
                }
                pre.iter().try_for_each(|p| p.validate(1))
            }
            Expr::Scale { c, inner } => {
                if !(*c > 0.0) {
                    return bad("scale factor must be positive");
                }
                inner.validate(arity)
            }
            Expr::MinClamp { cap, inner } => {
                if !(*cap > 0.0) {
                    return bad("clamp must be positive");
                }
                inner.validate(arity)
            }
            Expr::Cyc if arity < 2 => bad("cyc needs arity ≥ 2"),
            Expr::Table { xs, ys, .. } => {
                if xs.len() != ys.len() || xs.is_empty() || xs[0] != 0.0 {
                    return bad("table needs matching xs/ys starting at 0");
                }
                if xs.windows(2).any(|w| !(w[0] < w[1])) {
                    return bad("table xs must increase");
                }
                Ok(())
            }
            Expr::Power { e } if !(*e > 0.0) => bad("power exponent must be positive"),
            _ => Ok(()),
        }
    }

    /// Evaluation on nonnegative arguments; unary kinds read `x[0]`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Lp { p } => {
                if *p == 1.0 {
                    x.iter().sum()
                } else if *p == 2.0 {
                    let m = x.iter().copied().fold(0.0, f64::max);
                    if m == 0.0 {
                        0.0
                    } else {
                        m * x.iter().map(|v| (v / m) * (v / m)).sum::<f64>().sqrt()
                    }
                } else {
                    let m = x.iter().copied().fold(0.0, f64::max);
                    if m == 0.0 {
                        0.0
                    } else {
                        m * x.iter().map(|v| (v / m).powf(*p)).sum::<f64>().powf(1.0 / p)
                    }
                }
            }
            Expr::Max => x.iter().copied().fold(0.0, f64::max),
            Expr::ExpLog => {
                let m = x.iter().copied().fold(0.0, f64::max);
                if m < 30.0 {
                    x.iter().map(|v| v.exp_m1()).sum::<f64>().ln_1p()
                } else {
                    let k = x.len() as f64 - 1.0;
                    m + (x.iter().map(|v| (v - m).exp()).sum::<f64>() - k * (-m).exp()).ln()
                }
            }
            Expr::PowerSum { alpha } => x.iter().map(|v| v.powf(*alpha)).sum(),
            Expr::Pq { p, q } => x.iter().map(|v| v.powf(*p)).sum::<f64>().powf(1.0 / q),
            Expr::Mulholland(phi) => phi.inverse(x.iter().map(|&v| phi.eval(v)).sum()),
            Expr::Piecewise { breaks, segments } => {
                let s = x[0];
                let k = breaks.partition_point(|&b| b <= s);
                segments[k].eval(x)
            }
            Expr::Sum { parts } => parts.iter().map(|p| p.eval(x)).sum(),
            Expr::SplitSum { parts } => parts.iter().zip(x).map(|(p, &v)| p.eval(&[v])).sum(),
            Expr::Compose { outer, inner, pre } => {
                let v = if pre.is_empty() {
                    inner.eval(x)
                } else {
                    let y: Vec<f64> = pre.iter().zip(x).map(|(f, &v)| f.eval(&[v])).collect();
                    inner.eval(&y)
                };
                outer.eval(&[v])
            }
            Expr::Scale { c, inner } => c * inner.eval(x),
            Expr::MinClamp { cap, inner } => inner.eval(x).min(*cap),
            Expr::Cyc => {
                let n = x.len();
                (0..n).map(|i| x[i] + x[(i + 1) % n]).fold(0.0, f64::max)
            }
            Expr::Table { xs, ys, interp } => {
                let s = x[0];
                let k = xs.partition_point(|&b| b <= s);
                if k == xs.len() {
                    return ys[k - 1];
                }
                match interp {
                    Interp::Step => ys[k - 1],
                    Interp::Linear => {
                        let (x0, x1, y0, y1) = (xs[k - 1], xs[k], ys[k - 1], ys[k]);
                        y0 + (y1 - y0) * (s - x0) / (x1 - x0)
                    }
                }
            }
            Expr::Notisotone => {
                let (s, t) = (x[0], x[1]);
                if s < 1.0 || t < 1.0 {
                    s.min(1.0) + t.min(1.0)
                } else {
                    2.0 - (s - 1.0).min(t - 1.0).min(1.0)
                }
            }
            Expr::Identity => x[0],
            Expr::Const { c } => *c,
            Expr::Affine { intercept, slope } => intercept + slope * x[0],
            Expr::Power { e } => x[0].powf(*e),
            Expr::H2Tail => {
                let s = x[0];
                (1.0 + s + (s - 1.0).sin().powi(2)) / (2.0 * s)
            }
        }
    }
}

/// A validated N-ary function on [0,∞)^N.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DescriptorRecord", into = "DescriptorRecord")]
pub struct MPFDescriptor {
    arity: usize,
    expr: Expr,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct DescriptorRecord {
    arity: usize,
    expr: Expr,
}

impl TryFrom<DescriptorRecord> for MPFDescriptor {
    type Error = MpfError;
    fn try_from(r: DescriptorRecord) -> Result<Self, MpfError> {
        MPFDescriptor::new(r.arity, r.expr)
    }
}

impl From<MPFDescriptor> for DescriptorRecord {
    fn from(d: MPFDescriptor) -> Self {
        DescriptorRecord { arity: d.arity, expr: d.expr }
    }
}

impl MPFDescriptor {
    pub fn new(arity: usize, expr: Expr) -> Result<Self, MpfError> {
        if arity == 0 {
            return Err(MpfError::Invalid("arity must be at least 1".into()));
        }
        expr.validate(arity)?;
        Ok(MPFDescriptor { arity, expr })
    }

    pub fn unary(expr: Expr) -> Result<Self, MpfError> {
        Self::new(1, expr)
    }

    pub fn binary(expr: Expr) -> Result<Self, MpfError> {
        Self::new(2, expr)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, args: &[f64]) -> Result<f64, MpfError> {
        if args.len() != self.arity {
            return Err(MpfError::ArityMismatch { expected: self.arity, got: args.len() });
        }
        if let Some(i) = args.iter().position(|a| !(*a >= 0.0) || !a.is_finite()) {
            return Err(MpfError::BadArgument(i));
        }
        Ok(self.expr.eval(args))
    }

    /// Evaluation without argument checks, for hot loops.
    #[inline]
    pub fn eval_unchecked(&self, args: &[f64]) -> f64 {
        self.expr.eval(args)
    }

    #[inline]
    pub fn eval1(&self, s: f64) -> f64 {
        self.expr.eval(&[s])
    }

    #[inline]
    pub fn eval2(&self, s: f64, t: f64) -> f64 {
        self.expr.eval(&[s, t])
    }

    /// Accepts either a full `{"arity":..,"expr":..}` record or a bare
    /// expression (`{"kind":"lp","p":2}`), whose arity then defaults to 2
    /// for variadic kinds and 1 for unary ones.
    pub fn from_json(s: &str) -> Result<Self, MpfError> {
        let v: serde_json::Value = serde_json::from_str(s).map_err(|e| MpfError::Json(e.to_string()))?;
        if v.get("kind").is_some() {
            let expr: Expr = serde_json::from_value(v).map_err(|e| MpfError::Json(e.to_string()))?;
            let arity = match &expr {
                Expr::SplitSum { parts } => parts.len(),
                e if e.shape() == Shape::Unary => 1,
                _ => 2,
            };
            Self::new(arity, expr)
        } else {
            serde_json::from_value(v).map_err(|e| MpfError::Json(e.to_string()))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serializes")
    }
}

/// Mulholland function φ⁻¹(φ(s) + φ(t)).
pub fn make_mulholland(phi: Phi) -> Result<MPFDescriptor, MpfError> {
    MPFDescriptor::binary(Expr::Mulholland(phi))
}

/// The three combinators of the sum/composition construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineKind {
    /// G = F_1 + F_2 (+ …), all of the same arity.
    AddF,
    /// G(s_1..s_N) = f_1(s_1) + … + f_N(s_N), parts unary.
    AddFn,
    /// G = f(F(f_1(s_1), …, f_N(s_N))); parts = [f, F, f_1, …, f_N] or [f, F].
    Compose,
}

pub fn combine(kind: CombineKind, parts: &[MPFDescriptor]) -> Result<MPFDescriptor, MpfError> {
    match kind {
        CombineKind::AddF => {
            let arity = parts.first().map(|p| p.arity).ok_or(MpfError::Invalid("no parts".into()))?;
            if let Some(p) = parts.iter().find(|p| p.arity != arity) {
                return Err(MpfError::ArityMismatch { expected: arity, got: p.arity });
            }
            MPFDescriptor::new(arity, Expr::Sum { parts: parts.iter().map(|p| p.expr.clone()).collect() })
        }
        CombineKind::AddFn => {
            if let Some(p) = parts.iter().find(|p| p.arity != 1) {
                return Err(MpfError::ArityMismatch { expected: 1, got: p.arity });
            }
            MPFDescriptor::new(parts.len(), Expr::SplitSum { parts: parts.iter().map(|p| p.expr.clone()).collect() })
        }
        CombineKind::Compose => {
            let (outer, inner) = match parts {
                [o, i, ..] => (o, i),
                _ => return Err(MpfError::Invalid("compose needs outer and inner".into())),
            };
            if outer.arity != 1 {
                return Err(MpfError::ArityMismatch { expected: 1, got: outer.arity });
            }
            let pre = &parts[2..];
            if !pre.is_empty() && pre.len() != inner.arity {
                return Err(MpfError::ArityMismatch { expected: inner.arity, got: pre.len() });
            }
            if let Some(p) = pre.iter().find(|p| p.arity != 1) {
                return Err(MpfError::ArityMismatch { expected: 1, got: p.arity });
            }
            MPFDescriptor::new(
                inner.arity,
                Expr::Compose {
                    outer: Box::new(outer.expr.clone()),
                    inner: Box::new(inner.expr.clone()),
                    pre: pre.iter().map(|p| p.expr.clone()).collect(),
                },
            )
        }
    }
}

pub mod builtins {
    //! Named functions from the literature and their parsers.

    use super::*;

    /// An indexed sequence of functions, n ↦ F_n.
    pub type Family = Box<dyn Fn(u64) -> MPFDescriptor + Send + Sync>;

    fn piecewise(breaks: Vec<f64>, segments: Vec<Expr>) -> Expr {
        Expr::Piecewise { breaks, segments }
    }

    fn affine(intercept: f64, slope: f64) -> Expr {
        Expr::Affine { intercept, slope }
    }

    fn konst(c: f64) -> Expr {
        Expr::Const { c }
    }

    pub fn lp(p: f64, arity: usize) -> MPFDescriptor {
        if p.is_infinite() {
            MPFDescriptor::new(arity, Expr::Max).unwrap()
        } else {
            MPFDescriptor::new(arity, Expr::Lp { p }).unwrap()
        }
    }

    pub fn f_exp() -> MPFDescriptor {
        MPFDescriptor::binary(Expr::ExpLog).unwrap()
    }

    pub fn f_alpha(alpha: f64) -> Result<MPFDescriptor, MpfError> {
        MPFDescriptor::binary(Expr::PowerSum { alpha })
    }

    pub fn f_pq(p: f64, q: f64) -> Result<MPFDescriptor, MpfError> {
        MPFDescriptor::binary(Expr::Pq { p, q })
    }

    pub fn f_cyc() -> MPFDescriptor {
        MPFDescriptor::new(3, Expr::Cyc).unwrap()
    }

    pub fn petrik() -> MPFDescriptor {
        make_mulholland(Phi::Petrik).unwrap()
    }

    pub fn h1() -> MPFDescriptor {
        MPFDescriptor::unary(piecewise(vec![2.0, 3.0], vec![Expr::Identity, affine(4.0, -1.0), konst(1.0)])).unwrap()
    }

    pub fn h2() -> MPFDescriptor {
        MPFDescriptor::unary(piecewise(vec![1.0], vec![Expr::Identity, Expr::H2Tail])).unwrap()
    }

    pub fn f_n1(n: u64) -> MPFDescriptor {
        let e = 1.0 / n as f64;
        MPFDescriptor::unary(piecewise(vec![2.0, 2.0 + e], vec![Expr::Identity, affine(4.0, -1.0), konst(2.0 - e)]))
            .unwrap()
    }

    pub fn f_n2(n: u64) -> MPFDescriptor {
        let n = n as f64;
        MPFDescriptor::unary(piecewise(
            vec![2.0, n + 2.0, n + 3.0, n + 4.0],
            vec![Expr::Identity, konst(2.0), affine(-n, 1.0), affine(n + 6.0, -1.0), konst(2.0)],
        ))
        .unwrap()
    }

    pub fn f_n3(n: u64) -> MPFDescriptor {
        let n = n as f64;
        MPFDescriptor::unary(piecewise(
            vec![2.0, n + 2.0, n + 3.0],
            vec![Expr::Identity, konst(2.0), affine(n + 4.0, -1.0), konst(1.0)],
        ))
        .unwrap()
    }

    pub fn split_sum(f: &MPFDescriptor) -> MPFDescriptor {
        combine(CombineKind::AddFn, &[f.clone(), f.clone()]).unwrap()
    }

    /// G_n^i(s,t) = F_n^i(s) + F_n^i(t).
    pub fn g_n(i: u8, n: u64) -> MPFDescriptor {
        let f = match i {
            1 => f_n1(n),
            2 => f_n2(n),
            _ => f_n3(n),
        };
        split_sum(&f)
    }

    pub fn min2() -> MPFDescriptor {
        MPFDescriptor::unary(Expr::MinClamp { cap: 2.0, inner: Box::new(Expr::Identity) }).unwrap()
    }

    /// min{s,2} + min{t,2}, the common limit of the G_n^i.
    pub fn limit2() -> MPFDescriptor {
        split_sum(&min2())
    }

    pub fn notisotone() -> MPFDescriptor {
        MPFDescriptor::binary(Expr::Notisotone).unwrap()
    }

    pub fn square() -> MPFDescriptor {
        MPFDescriptor::unary(Expr::Power { e: 2.0 }).unwrap()
    }

    pub fn identity() -> MPFDescriptor {
        MPFDescriptor::unary(Expr::Identity).unwrap()
    }

    /// The twelve gallery functions expected to be metric preserving.
    pub fn gallery() -> Vec<(&'static str, MPFDescriptor)> {
        vec![
            ("F_1", lp(1.0, 2)),
            ("F_2", lp(2.0, 2)),
            ("F_inf", lp(f64::INFINITY, 2)),
            ("F_exp", f_exp()),
            ("F_alpha(1/2)", f_alpha(0.5).unwrap()),
            ("F_{2,4}", f_pq(2.0, 4.0).unwrap()),
            ("Mulholland(sinh)", make_mulholland(Phi::Sinh).unwrap()),
            ("Mulholland(s^2+2s)", make_mulholland(Phi::QuadLinear).unwrap()),
            ("Petrik", petrik()),
            ("H_1", h1()),
            ("H_2", h2()),
            ("F_cyc", f_cyc()),
        ]
    }

    fn num(s: &str, name: &str) -> Result<f64, MpfError> {
        match s {
            "inf" | "infinity" => Ok(f64::INFINITY),
            _ => s.parse().map_err(|_| MpfError::UnknownBuiltin(name.to_string())),
        }
    }

    fn index(s: &str, name: &str) -> Result<u64, MpfError> {
        s.parse::<u64>().ok().filter(|&n| n >= 1).ok_or_else(|| MpfError::UnknownBuiltin(name.to_string()))
    }

    /// Parses names such as `fp:2`, `fexp`, `falpha:0.5`, `fpq:2,4`,
    /// `mul:sinh`, `petrik`, `h1`, `gn3:5`, `notisotone`, `square`.
    pub fn parse(name: &str) -> Result<MPFDescriptor, MpfError> {
        let (head, arg) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let need = || arg.ok_or_else(|| MpfError::UnknownBuiltin(name.to_string()));
        Ok(match head {
            "fp" | "lp" => {
                let a = need()?;
                match a.split_once(',') {
                    Some((p, k)) => lp(num(p, name)?, index(k, name)? as usize),
                    None => lp(num(a, name)?, 2),
                }
            }
            "f1" => lp(1.0, 2),
            "f2" => lp(2.0, 2),
            "finf" | "max" => lp(f64::INFINITY, 2),
            "fexp" => f_exp(),
            "falpha" => f_alpha(num(need()?, name)?)?,
            "fpq" => {
                let (p, q) = need()?.split_once(',').ok_or_else(|| MpfError::UnknownBuiltin(name.to_string()))?;
                f_pq(num(p, name)?, num(q, name)?)?
            }
            "mul" => match need()? {
                "sinh" => make_mulholland(Phi::Sinh)?,
                "quad" => make_mulholland(Phi::QuadLinear)?,
                "expm1" => make_mulholland(Phi::Expm1)?,
                "petrik" => petrik(),
                p => make_mulholland(Phi::Power { p: num(p.trim_start_matches("pow"), name)? })?,
            },
            "petrik" => petrik(),
            "h1" => h1(),
            "h2" => h2(),
            "fcyc" => f_cyc(),
            "fn1" => f_n1(index(need()?, name)?),
            "fn2" => f_n2(index(need()?, name)?),
            "fn3" => f_n3(index(need()?, name)?),
            "gn1" => g_n(1, index(need()?, name)?),
            "gn2" => g_n(2, index(need()?, name)?),
            "gn3" => g_n(3, index(need()?, name)?),
            "notisotone" => notisotone(),
            "square" => square(),
            "min2" => min2(),
            "limit2" => limit2(),
            "id" | "identity" => identity(),
            _ => return Err(MpfError::UnknownBuiltin(name.to_string())),
        })
    }

    /// Indexed families by name: `gn1`..`gn3`, `fn1`..`fn3`, or
    /// `const:<builtin>` for a constant sequence.
    pub fn family(name: &str) -> Result<(Family, MPFDescriptor), MpfError> {
        if let Some(inner) = name.strip_prefix("const:") {
            let f = parse(inner)?;
            let g = f.clone();
            return Ok((Box::new(move |_| g.clone()), f));
        }
        Ok(match name {
            "gn1" => (Box::new(|n| g_n(1, n)), limit2()),
            "gn2" => (Box::new(|n| g_n(2, n)), limit2()),
            "gn3" => (Box::new(|n| g_n(3, n)), limit2()),
            "fn1" => (Box::new(f_n1), min2()),
            "fn2" => (Box::new(f_n2), min2()),
            "fn3" => (Box::new(f_n3), min2()),
            _ => return Err(MpfError::UnknownBuiltin(name.to_string())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::builtins::*;
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(lp(2.0, 2).eval(&[3.0, 4.0]).unwrap(), 5.0);
        assert!(close(f_exp().eval(&[0.0, 0.7]).unwrap(), 0.7));
        assert_eq!(h1().eval(&[2.5]).unwrap(), 1.5);
        assert_eq!(h1().eval(&[5.0]).unwrap(), 1.0);
        assert_eq!(h1().eval(&[2.0]).unwrap(), 2.0);
        assert_eq!(h1().eval(&[3.0]).unwrap(), 1.0);
    }

    #[test]
    fn arity_and_argument_errors() {
        assert_eq!(lp(2.0, 2).eval(&[1.0]).unwrap_err(), MpfError::ArityMismatch { expected: 2, got: 1 });
        assert_eq!(lp(2.0, 2).eval(&[1.0, -1.0]).unwrap_err(), MpfError::BadArgument(1));
    }

    #[test]
    fn mulholland_power_two_is_euclidean() {
        let m = make_mulholland(Phi::Power { p: 2.0 }).unwrap();
        let f2 = lp(2.0, 2);
        for i in 0..20 {
            for j in 0..20 {
                let (s, t) = (i as f64 * 0.37, j as f64 * 0.61);
                assert!((m.eval2(s, t) - f2.eval2(s, t)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn mulholland_expm1_is_f_exp() {
        let m = make_mulholland(Phi::Expm1).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                let (s, t) = (i as f64 * 0.5, j as f64 * 0.3);
                assert!((m.eval2(s, t) - f_exp().eval2(s, t)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn mulholland_quad_linear_spot_value() {
        let m = make_mulholland(Phi::QuadLinear).unwrap();
        assert!((m.eval2(1.0, 1.0) - (7f64.sqrt() - 1.0)).abs() <= 1e-12);
        let poly = make_mulholland(Phi::Polynomial { coeffs: vec![0.0, 2.0, 1.0] }).unwrap();
        assert!((poly.eval2(1.0, 1.0) - (7f64.sqrt() - 1.0)).abs() <= 1e-10);
    }

    #[test]
    fn decreasing_phi_is_rejected() {
        let e = make_mulholland(Phi::Polynomial { coeffs: vec![0.0, 1.0, -1.0] }).unwrap_err();
        assert!(matches!(e, MpfError::NotIncreasing(_)));
    }

    #[test]
    fn combinators() {
        let sqrt = MPFDescriptor::unary(Expr::Power { e: 0.5 }).unwrap();
        let fa = combine(CombineKind::AddFn, &[sqrt.clone(), sqrt]).unwrap();
        assert_eq!(fa.eval(&[4.0, 9.0]).unwrap(), 5.0);
        let outer = MPFDescriptor::unary(Expr::Power { e: 0.5 }).unwrap();
        let fpq = combine(CombineKind::Compose, &[outer, lp(2.0, 2)]).unwrap();
        assert!(close(fpq.eval(&[1.0, 1.0]).unwrap(), 2f64.powf(0.25)));
        assert!(close(f_pq(2.0, 4.0).unwrap().eval2(1.0, 1.0), 2f64.powf(0.25)));
        let g = combine(CombineKind::AddFn, &[f_n3(5), f_n3(5)]).unwrap();
        assert_eq!(g, g_n(3, 5));
        assert!(matches!(combine(CombineKind::AddF, &[lp(2.0, 2), h1()]), Err(MpfError::ArityMismatch { .. })));
    }

    #[test]
    fn piecewise_family_values() {
        assert_eq!(f_n1(4).eval1(2.0), 2.0);
        assert_eq!(f_n1(4).eval1(3.0), 1.75);
        assert_eq!(f_n2(5).eval1(8.0), 3.0);
        assert_eq!(f_n2(5).eval1(7.5), 2.5);
        assert_eq!(f_n2(5).eval1(9.5), 2.0);
        assert_eq!(f_n3(5).eval1(2.0), 2.0);
        assert_eq!(f_n3(5).eval1(10.0), 1.0);
        let h2 = h2();
        assert!(close(h2.eval1(1.0), 1.0));
        assert!(close(petrik().eval2(1.0, 0.0), 1.0));
        assert_eq!(f_cyc().eval(&[1.0, 2.0, 3.0]).unwrap(), 5.0);
    }

    #[test]
    fn notisotone_values() {
        let f = notisotone();
        assert_eq!(f.eval2(0.5, 3.0), 1.5);
        assert_eq!(f.eval2(2.0, 2.0), 1.0);
        assert_eq!(f.eval2(1.0, 1.0), 2.0);
    }

    #[test]
    fn json_round_trip() {
        for (_, f) in gallery() {
            let back = MPFDescriptor::from_json(&f.to_json()).unwrap();
            assert_eq!(back, f);
        }
        let bare = MPFDescriptor::from_json(r#"{"kind":"lp","p":2}"#).unwrap();
        assert_eq!(bare, lp(2.0, 2));
        let pw = MPFDescriptor::from_json(
            r#"{"kind":"piecewise","breaks":[2,3],"segments":[{"kind":"identity"},{"kind":"affine","intercept":4,"slope":-1},{"kind":"const","c":1}]}"#,
        )
        .unwrap();
        assert_eq!(pw, h1());
    }

    #[test]
    fn builtin_names_parse() {
        for name in [
            "fp:1", "fp:2", "fp:inf", "fp:2,3", "fexp", "falpha:0.5", "fpq:2,4", "mul:sinh", "mul:quad", "petrik",
            "h1", "h2", "fcyc", "gn1:3", "gn2:3", "gn3:5", "fn1:4", "notisotone", "square", "min2", "limit2",
        ] {
            parse(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(parse("nope").is_err());
    }

    #[test]
    fn petrik_breaks_log_convexity_but_not_convexity() {
        let (convex, log_convex) = Phi::Petrik.convexity();
        assert!(convex);
        assert!(!log_convex);
        assert_eq!(Phi::Sinh.convexity(), (true, true));
    }
}
