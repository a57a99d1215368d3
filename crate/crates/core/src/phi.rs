//! Strictly increasing homeomorphisms of the real line (the Φ in
//! `(Φ(a(t,x) x'))' = f`), with forward evaluation and inversion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::Expression;

pub const DEFAULT_INVERSION_TOLERANCE: f64 = 1e-12;

/// Largest bracket half-width tried while inverting numerically.
const BRACKET_LIMIT: f64 = 18_446_744_073_709_551_616.0; // 2^64

#[derive(Debug, Clone, PartialEq)]
pub enum PhiKind {
    /// `|y|^(r-2) y`, the r-Laplacian map, `r > 1`.
    Power { r: f64 },
    Identity,
    /// User expression in the variable `y`.
    Custom(Expression),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Homeomorphism {
    kind: PhiKind,
    /// Closed-form inverse in the variable `v`.
    inverse_hint: Option<Expression>,
    inversion_tolerance: f64,
}

impl Homeomorphism {
    pub fn identity() -> Self {
        Self {
            kind: PhiKind::Identity,
            inverse_hint: None,
            inversion_tolerance: DEFAULT_INVERSION_TOLERANCE,
        }
    }

    pub fn power(r: f64) -> Result<Self> {
        if !(r > 1.0 && r.is_finite()) {
            return Err(Error::Config(format!("power Phi needs r > 1, got {r}")));
        }
        Ok(Self {
            kind: PhiKind::Power { r },
            inverse_hint: None,
            inversion_tolerance: DEFAULT_INVERSION_TOLERANCE,
        })
    }

    /// `expr` is parsed over `y`; `inverse`, when given, over `v`.
    pub fn custom(expr: &str, inverse: Option<&str>) -> Result<Self> {
        let forward = Expression::parse(expr, &["y"])?;
        let inverse_hint = inverse
            .map(|src| Expression::parse(src, &["v"]))
            .transpose()?;
        Ok(Self {
            kind: PhiKind::Custom(forward),
            inverse_hint,
            inversion_tolerance: DEFAULT_INVERSION_TOLERANCE,
        })
    }

    pub fn from_expressions(forward: Expression, inverse: Option<Expression>) -> Self {
        Self {
            kind: PhiKind::Custom(forward),
            inverse_hint: inverse,
            inversion_tolerance: DEFAULT_INVERSION_TOLERANCE,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.inversion_tolerance = tol;
        self
    }

    pub fn kind(&self) -> &PhiKind {
        &self.kind
    }

    pub fn inversion_tolerance(&self) -> f64 {
        self.inversion_tolerance
    }

    pub fn eval(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::PhiDomain(y));
        }
        match &self.kind {
            PhiKind::Identity => Ok(y),
            PhiKind::Power { r } => Ok(power_map(y, *r - 1.0)),
            PhiKind::Custom(e) => Ok(e.eval(&[y])?),
        }
    }

    pub fn invert(&self, v: f64) -> Result<f64> {
        if !v.is_finite() {
            return Err(Error::PhiDomain(v));
        }
        match &self.kind {
            PhiKind::Identity => Ok(v),
            PhiKind::Power { r } => Ok(power_map(v, 1.0 / (*r - 1.0))),
            PhiKind::Custom(_) => match &self.inverse_hint {
                Some(inv) => Ok(inv.eval(&[v])?),
                None => self.invert_by_bisection(v),
            },
        }
    }

    fn invert_by_bisection(&self, v: f64) -> Result<f64> {
        // Relative stop; this implies the max(1,|v|)-scaled contract and keeps
        // small arguments accurate.
        let tol = self.inversion_tolerance * v.abs();
        let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
        while self.eval(lo)? > v {
            lo *= 2.0;
            if lo.abs() > BRACKET_LIMIT {
                return Err(Error::NonSurjective { value: v });
            }
        }
        while self.eval(hi)? < v {
            hi *= 2.0;
            if hi > BRACKET_LIMIT {
                return Err(Error::NonSurjective { value: v });
            }
        }
        loop {
            let mid = 0.5 * (lo + hi);
            let fm = self.eval(mid)?;
            if (fm - v).abs() <= tol || mid <= lo || mid >= hi {
                return Ok(mid);
            }
            if fm < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    /// Samples `pairs` random pairs `y1 < y2` over several magnitudes and
    /// checks `Φ(y1) < Φ(y2)`. Returns the first violation.
    pub fn audit_monotone(&self, pairs: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..pairs {
            let a = sample_real(&mut rng);
            let b = sample_real(&mut rng);
            if a == b {
                continue;
            }
            let (y1, y2) = if a < b { (a, b) } else { (b, a) };
            let v1 = self.eval(y1)?;
            let v2 = self.eval(y2)?;
            if !(v1 < v2) {
                return Err(Error::NotMonotone { y1, y2, v1, v2 });
            }
        }
        Ok(())
    }
}

fn power_map(y: f64, exponent: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        y.signum() * y.abs().powf(exponent)
    }
}

/// Random real with log-uniform magnitude in [1e-3, 1e3] and random sign.
pub(crate) fn sample_real<R: Rng>(rng: &mut R) -> f64 {
    let mag = 10f64.powf(rng.gen_range(-3.0..3.0));
    if rng.gen_bool(0.5) {
        mag
    } else {
        -mag
    }
}
