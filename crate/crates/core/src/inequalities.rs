//! Numerical checks of the Hölder/Minkowski family of integral inequalities.
//!
//! Every check integrates the functions it needs with the Birkhoff weak
//! integral, audits the hypotheses on the set function, and reports both
//! sides of the inequality. When an audit fails the two sides are still
//! computed so that the numbers can be inspected, but the outcome is
//! `hypotheses_violated` rather than a verdict on the inequality.

use std::cell::OnceCell;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::expr::EvalError;
use crate::integrator::{
    abs_pow, birkhoff_weak_integral, IntegralResult, IntegralStatus, IntegrationConfig,
    IntegrationError, ScalarFunction,
};
use crate::measures::{
    a_integrability_audit, continuity_below_audit, subadditivity_audit, AuditVerdict, Chain,
    ClaimedFlags, PairSampler, Property, PropertyAudit, SetFunction, Witness,
};
use crate::space::MeasurableSet;

/// Tolerance of the measure audits run before every check.
pub const AUDIT_TOLERANCE: f64 = 1e-9;

/// Relative tolerance of verdicts: `1e-9 · max(1, |lhs|, |rhs|)`.
pub const VERDICT_TOLERANCE: f64 = 1e-9;

/// Relative slack allowed when checking `α ≤ u/v ≤ β` pointwise.
const RATIO_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InequalityError {
    #[error("invalid exponent p = {p}: {reason}")]
    InvalidExponent { p: f64, reason: String },
    #[error("ratio bounds must satisfy 0 < alpha <= beta, got alpha = {alpha}, beta = {beta}")]
    BadBounds { alpha: f64, beta: f64 },
    #[error("zero denominator: {0}")]
    ZeroDenominator(String),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Conjugate exponents, `1/p + 1/q = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugatePair {
    pub p: f64,
    pub q: f64,
}

impl ConjugatePair {
    pub fn from_p(p: f64) -> Result<Self, InequalityError> {
        let invalid = |reason: &str| InequalityError::InvalidExponent {
            p,
            reason: reason.to_string(),
        };
        if !p.is_finite() || p <= 0.0 {
            return Err(invalid("must be positive and finite"));
        }
        if p == 1.0 {
            return Err(invalid("the conjugate of 1 is undefined"));
        }
        Ok(ConjugatePair {
            p,
            q: p / (p - 1.0),
        })
    }

    fn require_above_one(self) -> Result<Self, InequalityError> {
        if self.p > 1.0 {
            Ok(self)
        } else {
            Err(InequalityError::InvalidExponent {
                p: self.p,
                reason: "this inequality needs p > 1".into(),
            })
        }
    }

    fn require_below_one(self) -> Result<Self, InequalityError> {
        if self.p < 1.0 {
            Ok(self)
        } else {
            Err(InequalityError::InvalidExponent {
                p: self.p,
                reason: "this inequality needs 0 < p < 1".into(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Holds,
    Fails,
    HypothesesViolated,
    NotConverged,
}

/// Which side is expected to be larger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `lhs ≤ rhs`
    AtMost,
    /// `lhs ≥ rhs`
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralSummary {
    pub integrand: String,
    pub value: f64,
    pub status: IntegralStatus,
    pub oscillation: f64,
    pub tail_bound: f64,
}

impl IntegralSummary {
    fn of(integrand: &ScalarFunction, r: &IntegralResult) -> Self {
        IntegralSummary {
            integrand: integrand.label().to_string(),
            value: r.value,
            status: r.status,
            oscillation: r.oscillation,
            tail_bound: r.tail_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityVerdict {
    pub name: CheckName,
    pub parameters: BTreeMap<String, f64>,
    pub direction: Direction,
    pub lhs: f64,
    pub rhs: f64,
    /// Nonnegative exactly when the inequality holds.
    pub slack: f64,
    pub tolerance: f64,
    pub outcome: Outcome,
    /// Whether the numbers satisfy the inequality, whatever the outcome.
    pub numerically_held: bool,
    pub claims: ClaimedFlags,
    pub hypothesis_audits: Vec<PropertyAudit>,
    pub integral_statuses: Vec<IntegralSummary>,
}

impl InequalityVerdict {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Holder,
    Minkowski,
    ReverseHolder,
    ReverseMinkowski,
    Weighted,
    RadonRatio,
    BoundedRatioA,
    BoundedRatioB,
}

impl CheckName {
    pub const ALL: [CheckName; 8] = [
        CheckName::Holder,
        CheckName::Minkowski,
        CheckName::ReverseHolder,
        CheckName::ReverseMinkowski,
        CheckName::Weighted,
        CheckName::RadonRatio,
        CheckName::BoundedRatioA,
        CheckName::BoundedRatioB,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Holder => "holder",
            CheckName::Minkowski => "minkowski",
            CheckName::ReverseHolder => "reverse_holder",
            CheckName::ReverseMinkowski => "reverse_minkowski",
            CheckName::Weighted => "weighted",
            CheckName::RadonRatio => "radon_ratio",
            CheckName::BoundedRatioA => "bounded_ratio_a",
            CheckName::BoundedRatioB => "bounded_ratio_b",
        }
    }

    pub fn needs_bounds(self) -> bool {
        matches!(self, CheckName::BoundedRatioA | CheckName::BoundedRatioB)
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = CheckName::ALL.iter().map(|c| c.as_str()).collect();
                format!("unknown check `{s}` (expected one of {})", names.join(", "))
            })
    }
}

/// One element of a sweep: a verdict, or the error that prevented one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepItem {
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<InequalityVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Runs checks against one set function, auditing its hypotheses once.
pub struct Checker<'a> {
    nu: &'a SetFunction,
    cfg: IntegrationConfig,
    audits: OnceCell<Vec<PropertyAudit>>,
}

/// Evidence gathered while a single check runs.
struct Evidence<'c> {
    nu: &'c SetFunction,
    cfg: &'c IntegrationConfig,
    audits: Vec<PropertyAudit>,
    integrals: Vec<IntegralSummary>,
    failure: Option<IntegrationError>,
}

impl Evidence<'_> {
    fn integrate(&mut self, f: &ScalarFunction) -> f64 {
        match birkhoff_weak_integral(f, self.nu, self.cfg) {
            Ok(r) => {
                self.integrals.push(IntegralSummary::of(f, &r));
                r.value
            }
            Err(e) => {
                self.failure.get_or_insert(e);
                f64::NAN
            }
        }
    }

    fn violated(&self) -> bool {
        self.audits.iter().any(PropertyAudit::is_failed)
    }

    fn finish(
        self,
        name: CheckName,
        parameters: &[(&str, f64)],
        lhs: f64,
        rhs: f64,
        direction: Direction,
    ) -> Result<InequalityVerdict, InequalityError> {
        let violated = self.violated();
        if let Some(e) = self.failure {
            if !violated {
                return Err(e.into());
            }
        }
        let slack = match direction {
            Direction::AtMost => rhs - lhs,
            Direction::AtLeast => lhs - rhs,
        };
        let tolerance = VERDICT_TOLERANCE * 1f64.max(lhs.abs()).max(rhs.abs());
        let numerically_held = slack >= -tolerance;
        let unsettled = self
            .integrals
            .iter()
            .any(|s| s.status != IntegralStatus::Converged)
            || self
                .audits
                .iter()
                .any(|a| a.verdict == AuditVerdict::Inconclusive);
        let outcome = if violated {
            Outcome::HypothesesViolated
        } else if unsettled {
            Outcome::NotConverged
        } else if numerically_held {
            Outcome::Holds
        } else {
            Outcome::Fails
        };
        Ok(InequalityVerdict {
            name,
            parameters: parameters
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            direction,
            lhs,
            rhs,
            slack,
            tolerance,
            outcome,
            numerically_held,
            claims: self.nu.claimed(),
            hypothesis_audits: self.audits,
            integral_statuses: self.integrals,
        })
    }
}

fn point_audit(
    property: Property,
    n: u64,
    value: f64,
    detail: String,
    gap: f64,
    used: u64,
) -> PropertyAudit {
    PropertyAudit::failed(
        property,
        Witness::Point {
            n,
            value,
            detail,
            gap,
        },
        used,
        0.0,
    )
}

/// Positions in `[0, h)` where `f` vanishes.
fn zeros_below(f: &ScalarFunction, h: u64) -> Result<Vec<u64>, EvalError> {
    let mut out = Vec::new();
    for n in 0..h {
        if f.eval(n)? == 0.0 {
            out.push(n);
        }
    }
    Ok(out)
}

impl<'a> Checker<'a> {
    pub fn new(nu: &'a SetFunction, cfg: IntegrationConfig) -> Self {
        Checker {
            nu,
            cfg,
            audits: OnceCell::new(),
        }
    }

    pub fn measure(&self) -> &SetFunction {
        self.nu
    }

    pub fn config(&self) -> &IntegrationConfig {
        &self.cfg
    }

    /// Audits of `ν`, computed on first use.
    pub fn measure_audits(&self) -> &[PropertyAudit] {
        self.audits
            .get_or_init(|| measure_audits(self.nu, &self.cfg, &probe_sets()))
    }

    fn evidence(&self) -> Evidence<'_> {
        Evidence {
            nu: self.nu,
            cfg: &self.cfg,
            audits: self.measure_audits().to_vec(),
            integrals: Vec::new(),
            failure: None,
        }
    }

    fn norm(ev: &mut Evidence, u: &ScalarFunction, p: f64) -> f64 {
        ev.integrate(&abs_pow(u, p)).max(0.0).powf(1.0 / p)
    }

    /// Rejects zeros of `v` in the horizon window.
    fn require_nonvanishing(&self, v: &ScalarFunction) -> Result<(), InequalityError> {
        if let Some(&n) = zeros_below(v, self.cfg.horizon)?.first() {
            return Err(InequalityError::ZeroDenominator(format!(
                "{} vanishes at {n}",
                v.label()
            )));
        }
        Ok(())
    }

    /// `‖uv‖₁ ≤ ‖u‖_p ‖v‖_q` for `p > 1`.
    pub fn holder(
        &self,
        u: &ScalarFunction,
        v: &ScalarFunction,
        cp: ConjugatePair,
    ) -> Result<InequalityVerdict, InequalityError> {
        let cp = cp.require_above_one()?;
        let mut ev = self.evidence();
        let lhs = ev.integrate(&u.mul(v).abs());
        let rhs = Self::norm(&mut ev, u, cp.p) * Self::norm(&mut ev, v, cp.q);
        ev.finish(
            CheckName::Holder,
            &[("p", cp.p), ("q", cp.q)],
            lhs,
            rhs,
            Direction::AtMost,
        )
    }

    /// `‖u + v‖_p ≤ ‖u‖_p + ‖v‖_p` for `p > 1`.
    pub fn minkowski(
        &self,
        u: &ScalarFunction,
        v: &ScalarFunction,
        p: f64,
    ) -> Result<InequalityVerdict, InequalityError> {
        let cp = ConjugatePair::from_p(p)?.require_above_one()?;
        let p = cp.p;
        let mut ev = self.evidence();
        let s = u.add(v);
        let lhs = Self::norm(&mut ev, &s, p);
        let rhs = Self::norm(&mut ev, u, p) + Self::norm(&mut ev, v, p);
        // the cross terms of the proof must be integrable as well
        let cross = abs_pow(&s, p - 1.0);
        ev.integrate(&u.abs().mul(&cross));
        ev.integrate(&v.abs().mul(&cross));
        ev.finish(
            CheckName::Minkowski,
            &[("p", p)],
            lhs,
            rhs,
            Direction::AtMost,
        )
    }

    /// `‖uv‖₁ ≥ ‖u‖_p ‖v‖_q` for `0 < p < 1`, where `q < 0`.
    pub fn reverse_holder(
        &self,
        u: &ScalarFunction,
        v: &ScalarFunction,
        cp: ConjugatePair,
    ) -> Result<InequalityVerdict, InequalityError> {
        let cp = cp.require_below_one()?;
        let h = self.cfg.horizon;
        // |v|^q is only needed where ν({n}) > 0
        let zeros = zeros_below(v, h)?;
        if let Some(&n) = zeros.iter().find(|&&n| self.nu.singleton(n) > 0.0) {
            return Err(InequalityError::ZeroDenominator(format!(
                "{} vanishes at {n}, which has positive weight",
                v.label()
            )));
        }
        let v_q = if zeros.is_empty() {
            abs_pow(v, cp.q)
        } else {
            let null = MeasurableSet::finite(zeros).with_label("null zeros");
            ScalarFunction::indicator("nonzero", null.complement())
                .mul(&abs_pow(v, cp.q))
                .with_label(format!("|{}|^{:?}", v.label(), cp.q))
        };
        let mut ev = self.evidence();
        let lhs = ev.integrate(&u.mul(v).abs());
        let u_p = ev.integrate(&abs_pow(u, cp.p));
        let v_int = ev.integrate(&v_q);
        if v_int.is_nan() || v_int <= 0.0 {
            ev.audits.push(point_audit(
                Property::PositiveIntegral,
                0,
                v_int,
                format!("integral of |{}|^q is not positive", v.label()),
                -v_int,
                1,
            ));
        } else {
            ev.audits
                .push(PropertyAudit::passed(Property::PositiveIntegral, 1, 0.0));
        }
        let params = [("p", cp.p), ("q", cp.q)];
        if u_p == 0.0 {
            // uv = 0 almost everywhere
            return ev.finish(
                CheckName::ReverseHolder,
                &params,
                lhs,
                0.0,
                Direction::AtLeast,
            );
        }
        let rhs = u_p.powf(1.0 / cp.p) * v_int.powf(1.0 / cp.q);
        ev.finish(
            CheckName::ReverseHolder,
            &params,
            lhs,
            rhs,
            Direction::AtLeast,
        )
    }

    /// `‖|u| + |v|‖_p ≥ ‖u‖_p + ‖v‖_p` for `0 < p < 1`.
    pub fn reverse_minkowski(
        &self,
        u: &ScalarFunction,
        v: &ScalarFunction,
        p: f64,
    ) -> Result<InequalityVerdict, InequalityError> {
        let p = ConjugatePair::from_p(p)?.require_below_one()?.p;
        let mut ev = self.evidence();
        let w = u.abs().add(&v.abs());
        let lhs = Self::norm(&mut ev, &w, p);
        let rhs = Self::norm(&mut ev, u, p) + Self::norm(&mut ev, v, p);
        // w^(p-1) blows up where w = 0, but it is always multiplied by 0 there
        let cross = w.powf(p - 1.0);
        ev.integrate(&u.abs().mul(&cross));
        ev.integrate(&v.abs().mul(&cross));
        ev.finish(
            CheckName::ReverseMinkowski,
            &[("p", p)],
            lhs,
            rhs,
            Direction::AtLeast,
        )
    }

    /// `(∫|u|)^p ≤ (∫ |u|^p / |v|^{p/q}) (∫|v|)^{p/q}` for `p > 1`, reversed
    /// for `0 < p < 1`. Needs `v ≠ 0` everywhere.
    pub fn weighted(
        &self,
        u: &ScalarFunction,
        v: &ScalarFunction,
        cp: ConjugatePair,
    ) -> Result<InequalityVerdict, InequalityError> {
        self.require_nonvanishing(v)?;
        let e = cp.p / cp.q;
        let mut ev = self.evidence();
        let u1 = ev.integrate(&u.abs());
        let mixed = ev.integrate(&abs_pow(u, cp.p).div(&abs_pow(v, e)));
        let v1 = ev.integrate(&v.abs());
        let lhs = u1.powf(cp.p);
        let rhs = mixed * v1.powf(e);
        let direction = if cp.p > 1.0 {
            Direction::AtMost
        } else {
            Direction::AtLeast
        };
        ev.finish(
            CheckName::Weighted,
            &[("p", cp.p), ("q", cp.q)],
            lhs,
            rhs,
            direction,
        )
    }

    /// `∫ |u|^p / |v|^{p-1} ≥ (∫|u|)^p / (∫|v|)^{p-1}` for `p > 1`, reversed
    /// for `0 < p < 1`.
    pub fn radon_ratio(
        &self,
        u: &ScalarFunction,
        v: &ScalarFunction,
        p: f64,
    ) -> Result<InequalityVerdict, InequalityError> {
        let p = ConjugatePair::from_p(p)?.p;
        self.require_nonvanishing(v)?;
        let mut ev = self.evidence();
        let lhs = ev.integrate(&abs_pow(u, p).div(&abs_pow(v, p - 1.0)));
        let u1 = ev.integrate(&u.abs());
        let v1 = ev.integrate(&v.abs());
        if v1 == 0.0 {
            return Err(InequalityError::ZeroDenominator(format!(
                "integral of |{}| is zero",
                v.label()
            )));
        }
        let rhs = u1.powf(p) / v1.powf(p - 1.0);
        let direction = if p > 1.0 {
            Direction::AtLeast
        } else {
            Direction::AtMost
        };
        ev.finish(CheckName::RadonRatio, &[("p", p)], lhs, rhs, direction)
    }

    /// `(∫u)^{1/p} (∫v)^{1/q} ≤ (β/α)^{1/(pq)} ∫ u^{1/p} v^{1/q}` for
    /// positive `u, v` with `α ≤ u/v ≤ β`.
    pub fn bounded_ratio_a(
        &self,
        u: &ScalarFunction,
        v: &ScalarFunction,
        cp: ConjugatePair,
        alpha: f64,
        beta: f64,
    ) -> Result<InequalityVerdict, InequalityError> {
        self.bounded_ratio(CheckName::BoundedRatioA, u, v, cp, alpha, beta)
    }

    /// Part a applied to `u^p` and `v^q`:
    /// `(∫u^p)^{1/p} (∫v^q)^{1/q} ≤ (β/α)^{1/(pq)} ∫ uv` when
    /// `α ≤ u^p/v^q ≤ β`.
    pub fn bounded_ratio_b(
        &self,
        u: &ScalarFunction,
        v: &ScalarFunction,
        cp: ConjugatePair,
        alpha: f64,
        beta: f64,
    ) -> Result<InequalityVerdict, InequalityError> {
        let cp = cp.require_above_one()?;
        self.bounded_ratio(
            CheckName::BoundedRatioB,
            &u.powf(cp.p),
            &v.powf(cp.q),
            cp,
            alpha,
            beta,
        )
    }

    fn bounded_ratio(
        &self,
        name: CheckName,
        u: &ScalarFunction,
        v: &ScalarFunction,
        cp: ConjugatePair,
        alpha: f64,
        beta: f64,
    ) -> Result<InequalityVerdict, InequalityError> {
        let cp = cp.require_above_one()?;
        if !(alpha.is_finite() && beta.is_finite() && alpha > 0.0 && alpha <= beta) {
            return Err(InequalityError::BadBounds { alpha, beta });
        }
        let h = self.cfg.horizon;
        let mut ev = self.evidence();
        ev.audits.push(positivity_audit(u, v, h)?);
        ev.audits.push(ratio_audit(u, v, alpha, beta, h)?);
        let a = ev.integrate(u);
        let b = ev.integrate(v);
        let mixed = ev.integrate(&u.powf(1.0 / cp.p).mul(&v.powf(1.0 / cp.q)));
        let lhs = a.powf(1.0 / cp.p) * b.powf(1.0 / cp.q);
        let rhs = (beta / alpha).powf(1.0 / (cp.p * cp.q)) * mixed;
        ev.finish(
            name,
            &[("p", cp.p), ("q", cp.q), ("alpha", alpha), ("beta", beta)],
            lhs,
            rhs,
            Direction::AtMost,
        )
    }

    /// Dispatches on `name`; `bounds` is `(α, β)` for the ratio-bounded checks.
    pub fn run(
        &self,
        name: CheckName,
        u: &ScalarFunction,
        v: &ScalarFunction,
        p: f64,
        bounds: Option<(f64, f64)>,
    ) -> Result<InequalityVerdict, InequalityError> {
        let cp = ConjugatePair::from_p(p)?;
        let (alpha, beta) = match (name.needs_bounds(), bounds) {
            (true, Some(b)) => b,
            (true, None) => {
                return Err(InequalityError::BadBounds {
                    alpha: f64::NAN,
                    beta: f64::NAN,
                })
            }
            (false, _) => (f64::NAN, f64::NAN),
        };
        match name {
            CheckName::Holder => self.holder(u, v, cp),
            CheckName::Minkowski => self.minkowski(u, v, p),
            CheckName::ReverseHolder => self.reverse_holder(u, v, cp),
            CheckName::ReverseMinkowski => self.reverse_minkowski(u, v, p),
            CheckName::Weighted => self.weighted(u, v, cp),
            CheckName::RadonRatio => self.radon_ratio(u, v, p),
            CheckName::BoundedRatioA => self.bounded_ratio_a(u, v, cp, alpha, beta),
            CheckName::BoundedRatioB => self.bounded_ratio_b(u, v, cp, alpha, beta),
        }
    }

    /// One independent check per exponent; errors are recorded per element.
    pub fn sweep(
        &self,
        name: CheckName,
        u: &ScalarFunction,
        v: &ScalarFunction,
        p_grid: &[f64],
        bounds: Option<(f64, f64)>,
    ) -> Vec<SweepItem> {
        p_grid
            .iter()
            .map(|&p| match self.run(name, u, v, p, bounds) {
                Ok(verdict) => SweepItem {
                    p,
                    verdict: Some(verdict),
                    error: None,
                },
                Err(e) => SweepItem {
                    p,
                    verdict: None,
                    error: Some(e.to_string()),
                },
            })
            .collect()
    }
}

/// Finite and cofinite probe sets for the 𝒜-integrability audit.
pub fn probe_sets() -> Vec<MeasurableSet> {
    vec![
        MeasurableSet::finite([0, 1]),
        MeasurableSet::finite([1, 2, 3]),
        MeasurableSet::cofinite([0]),
    ]
}

/// Subadditivity, continuity from below, and 𝒜-integrability on each probe
/// set. Audits that cannot be completed are reported as inconclusive.
pub fn measure_audits(
    nu: &SetFunction,
    cfg: &IntegrationConfig,
    probes: &[MeasurableSet],
) -> Vec<PropertyAudit> {
    let tol = AUDIT_TOLERANCE;
    let mut out = vec![subadditivity_audit(nu, &PairSampler::default(), tol)];
    out.push(
        continuity_below_audit(nu, &Chain::standard(cfg.horizon), tol).unwrap_or_else(|e| {
            PropertyAudit::inconclusive(Property::ContinuityFromBelow, e.to_string(), tol)
        }),
    );
    for set in probes {
        let audit =
            a_integrability_audit(nu, set, cfg.samples_per_stage, tol, cfg).unwrap_or_else(|e| {
                PropertyAudit::inconclusive(Property::AIntegrability, e.to_string(), tol)
            });
        let detail = match &audit.detail {
            Some(d) => format!("probe set {set}: {d}"),
            None => format!("probe set {set}"),
        };
        out.push(audit.with_detail(detail));
    }
    out
}

fn positivity_audit(
    u: &ScalarFunction,
    v: &ScalarFunction,
    h: u64,
) -> Result<PropertyAudit, EvalError> {
    for n in 0..h {
        for f in [u, v] {
            let x = f.eval(n)?;
            if x.is_nan() || x <= 0.0 {
                return Ok(point_audit(
                    Property::StrictPositivity,
                    n,
                    x,
                    format!("{} is not positive", f.label()),
                    -x,
                    n + 1,
                ));
            }
        }
    }
    Ok(PropertyAudit::passed(Property::StrictPositivity, h, 0.0))
}

fn ratio_audit(
    u: &ScalarFunction,
    v: &ScalarFunction,
    alpha: f64,
    beta: f64,
    h: u64,
) -> Result<PropertyAudit, EvalError> {
    for n in 0..h {
        let (a, b) = (u.eval(n)?, v.eval(n)?);
        if b == 0.0 {
            continue;
        }
        let r = a / b;
        let gap = (alpha - r).max(r - beta);
        if gap > RATIO_TOLERANCE * r.abs().max(1.0) {
            return Ok(point_audit(
                Property::RatioBound,
                n,
                r,
                format!("{}/{} outside [{alpha}, {beta}]", u.label(), v.label()),
                gap,
                n + 1,
            ));
        }
    }
    Ok(PropertyAudit::passed(
        Property::RatioBound,
        h,
        RATIO_TOLERANCE,
    ))
}

pub fn holder_check(
    u: &ScalarFunction,
    v: &ScalarFunction,
    cp: ConjugatePair,
    nu: &SetFunction,
    cfg: &IntegrationConfig,
) -> Result<InequalityVerdict, InequalityError> {
    Checker::new(nu, cfg.clone()).holder(u, v, cp)
}

pub fn minkowski_check(
    u: &ScalarFunction,
    v: &ScalarFunction,
    p: f64,
    nu: &SetFunction,
    cfg: &IntegrationConfig,
) -> Result<InequalityVerdict, InequalityError> {
    Checker::new(nu, cfg.clone()).minkowski(u, v, p)
}

pub fn reverse_holder_check(
    u: &ScalarFunction,
    v: &ScalarFunction,
    cp: ConjugatePair,
    nu: &SetFunction,
    cfg: &IntegrationConfig,
) -> Result<InequalityVerdict, InequalityError> {
    Checker::new(nu, cfg.clone()).reverse_holder(u, v, cp)
}

pub fn reverse_minkowski_check(
    u: &ScalarFunction,
    v: &ScalarFunction,
    p: f64,
    nu: &SetFunction,
    cfg: &IntegrationConfig,
) -> Result<InequalityVerdict, InequalityError> {
    Checker::new(nu, cfg.clone()).reverse_minkowski(u, v, p)
}

pub fn weighted_check(
    u: &ScalarFunction,
    v: &ScalarFunction,
    cp: ConjugatePair,
    nu: &SetFunction,
    cfg: &IntegrationConfig,
) -> Result<InequalityVerdict, InequalityError> {
    Checker::new(nu, cfg.clone()).weighted(u, v, cp)
}

pub fn radon_ratio_check(
    u: &ScalarFunction,
    v: &ScalarFunction,
    p: f64,
    nu: &SetFunction,
    cfg: &IntegrationConfig,
) -> Result<InequalityVerdict, InequalityError> {
    Checker::new(nu, cfg.clone()).radon_ratio(u, v, p)
}

#[allow(clippy::too_many_arguments)]
pub fn bounded_ratio_check_a(
    u: &ScalarFunction,
    v: &ScalarFunction,
    cp: ConjugatePair,
    alpha: f64,
    beta: f64,
    nu: &SetFunction,
    cfg: &IntegrationConfig,
) -> Result<InequalityVerdict, InequalityError> {
    Checker::new(nu, cfg.clone()).bounded_ratio_a(u, v, cp, alpha, beta)
}

#[allow(clippy::too_many_arguments)]
pub fn bounded_ratio_check_b(
    u: &ScalarFunction,
    v: &ScalarFunction,
    cp: ConjugatePair,
    alpha: f64,
    beta: f64,
    nu: &SetFunction,
    cfg: &IntegrationConfig,
) -> Result<InequalityVerdict, InequalityError> {
    Checker::new(nu, cfg.clone()).bounded_ratio_b(u, v, cp, alpha, beta)
}

pub fn sweep(
    name: CheckName,
    u: &ScalarFunction,
    v: &ScalarFunction,
    p_grid: &[f64],
    bounds: Option<(f64, f64)>,
    nu: &SetFunction,
    cfg: &IntegrationConfig,
) -> Vec<SweepItem> {
    Checker::new(nu, cfg.clone()).sweep(name, u, v, p_grid, bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::SetBindings;
    use crate::measures::zoo::*;

    fn chi(v: &[u64]) -> ScalarFunction {
        ScalarFunction::indicator("B", MeasurableSet::finite(v.iter().copied()))
    }

    fn c(x: f64) -> ScalarFunction {
        ScalarFunction::constant(x)
    }

    fn parse(text: &str) -> ScalarFunction {
        let mut sets = SetBindings::new();
        sets.insert("Z".into(), MeasurableSet::finite([0]));
        ScalarFunction::parse("u", text, None, &sets).unwrap()
    }

    fn nu() -> SetFunction {
        additive_geometric(0.5)
    }

    fn cfg() -> IntegrationConfig {
        IntegrationConfig::default()
    }

    fn cp(p: f64) -> ConjugatePair {
        ConjugatePair::from_p(p).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn conjugate_pairs() {
        let two = cp(2.0);
        assert_eq!(two.q, 2.0);
        let half = cp(0.5);
        assert_eq!(half.q, -1.0);
        for p in [1.1, 1.5, 3.0, 10.0, 0.1, 0.25, 0.75, 0.9] {
            let c = cp(p);
            assert!((1.0 / c.p + 1.0 / c.q - 1.0).abs() < 1e-12);
            assert_eq!(c.q > 1.0, p > 1.0);
            assert_eq!(c.q < 0.0, p < 1.0);
        }
        assert!(ConjugatePair::from_p(1.0).is_err());
        assert!(ConjugatePair::from_p(0.0).is_err());
        assert!(ConjugatePair::from_p(-2.0).is_err());
        assert!(ConjugatePair::from_p(f64::NAN).is_err());
    }

    #[test]
    fn holder_examples() {
        let v = holder_check(&chi(&[0]), &chi(&[0]), cp(2.0), &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 0.5) && close(v.rhs, 0.5), "{v:?}");
        assert_eq!(v.outcome, Outcome::Holds);
        let v = holder_check(&ScalarFunction::zero(), &chi(&[3]), cp(2.0), &nu(), &cfg()).unwrap();
        assert_eq!((v.lhs, v.outcome), (0.0, Outcome::Holds));
        let v = holder_check(&chi(&[0]), &chi(&[1]), cp(2.0), &nu(), &cfg()).unwrap();
        assert_eq!(v.lhs, 0.0);
        assert!(close(v.rhs, 0.5f64.sqrt() * 0.5));
        assert!(v.holds());
        assert!(holder_check(&chi(&[0]), &chi(&[1]), cp(0.5), &nu(), &cfg()).is_err());
    }

    #[test]
    fn minkowski_examples() {
        let v = minkowski_check(&chi(&[0]), &chi(&[0]), 2.0, &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 2f64.sqrt()) && close(v.rhs, 2f64.sqrt()));
        assert!(v.slack.abs() <= 1e-9 && v.holds());
        let v =
            minkowski_check(&chi(&[0, 2]), &ScalarFunction::zero(), 3.0, &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, v.rhs));
        let v = minkowski_check(&chi(&[0]), &chi(&[1]), 2.0, &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 0.75f64.sqrt()));
        assert!(close(v.rhs, 0.5f64.sqrt() + 0.5));
        assert_eq!(v.integral_statuses.len(), 5);
    }

    #[test]
    fn reverse_holder_examples() {
        let v = reverse_holder_check(&chi(&[0]), &c(1.0), cp(0.5), &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 0.5) && close(v.rhs, 0.25), "{v:?}");
        assert!(v.holds());
        let v =
            reverse_holder_check(&ScalarFunction::zero(), &c(1.0), cp(0.5), &nu(), &cfg()).unwrap();
        assert_eq!((v.rhs, v.outcome), (0.0, Outcome::Holds));
        let v = reverse_holder_check(&c(1.0), &c(1.0), cp(0.5), &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 1.0) && close(v.rhs, 1.0));
        assert!(v.holds());
    }

    #[test]
    fn reverse_holder_guards_zero_denominators() {
        let err = reverse_holder_check(&c(1.0), &chi(&[0]), cp(0.5), &nu(), &cfg());
        assert!(matches!(err, Err(InequalityError::ZeroDenominator(_))));
        // a zero of v on a null point is harmless
        let explicit = SetFunction::additive(
            crate::measures::WeightSequence::explicit(vec![0.5, 0.0, 0.5]).unwrap(),
        );
        let v = c(1.0).add(&chi(&[1]).scale(-1.0));
        assert_eq!(v.eval(1).unwrap(), 0.0);
        let r = reverse_holder_check(&c(1.0), &v, cp(0.5), &explicit, &cfg()).unwrap();
        assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn reverse_minkowski_examples() {
        let v = reverse_minkowski_check(&chi(&[0]), &chi(&[1]), 0.5, &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 0.5625) && close(v.rhs, 0.3125));
        assert!(close(v.slack, 0.25));
        let v = reverse_minkowski_check(&chi(&[0]), &ScalarFunction::zero(), 0.5, &nu(), &cfg())
            .unwrap();
        assert!(close(v.lhs, v.rhs) && v.holds());
        let v = reverse_minkowski_check(&chi(&[0]), &chi(&[0]), 0.5, &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 0.5) && close(v.rhs, 0.5) && v.holds());
    }

    #[test]
    fn weighted_examples() {
        let v = weighted_check(&chi(&[0]), &c(1.0), cp(2.0), &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 0.25) && close(v.rhs, 0.5));
        assert_eq!(v.direction, Direction::AtMost);
        for p in [2.0, 0.5, 3.0] {
            let v = weighted_check(&c(1.0), &c(1.0), cp(p), &nu(), &cfg()).unwrap();
            assert!(close(v.lhs, 1.0) && close(v.rhs, 1.0) && v.holds());
        }
        let v = weighted_check(&chi(&[0]), &c(1.0), cp(0.5), &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 0.5f64.sqrt()) && close(v.rhs, 0.5));
        assert_eq!(v.direction, Direction::AtLeast);
        assert!(v.holds());
        assert!(matches!(
            weighted_check(&c(1.0), &chi(&[0]), cp(2.0), &nu(), &cfg()),
            Err(InequalityError::ZeroDenominator(_))
        ));
    }

    #[test]
    fn radon_ratio_examples() {
        let v = radon_ratio_check(&c(1.0), &c(1.0), 2.0, &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 1.0) && close(v.rhs, 1.0) && v.holds());
        let v = radon_ratio_check(&chi(&[0]), &c(1.0), 2.0, &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 0.5) && close(v.rhs, 0.25) && v.holds());
        let v = radon_ratio_check(&chi(&[0]), &c(1.0), 0.5, &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 0.5) && close(v.rhs, 0.5f64.sqrt()) && v.holds());
        assert!(radon_ratio_check(&chi(&[0]), &c(1.0), 1.0, &nu(), &cfg()).is_err());
    }

    #[test]
    fn bounded_ratio_examples() {
        let v = bounded_ratio_check_a(&c(1.0), &c(1.0), cp(2.0), 1.0, 1.0, &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 1.0) && close(v.rhs, 1.0) && v.holds());
        let v = bounded_ratio_check_a(&c(2.0), &c(1.0), cp(2.0), 2.0, 2.0, &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 2f64.sqrt()) && close(v.rhs, 2f64.sqrt()));
        assert!(v.slack.abs() <= 1e-9);
        let u = parse("1 + indicator(Z)");
        let v = bounded_ratio_check_a(&u, &c(1.0), cp(2.0), 1.0, 2.0, &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 1.5f64.sqrt()));
        assert!(close(v.rhs, 2f64.powf(0.25) * (2f64.sqrt() * 0.5 + 0.5)));
        assert!(v.holds());

        let v = bounded_ratio_check_b(&c(1.0), &c(1.0), cp(2.0), 1.0, 1.0, &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 1.0) && close(v.rhs, 1.0));
        let v = bounded_ratio_check_b(&c(2.0), &c(1.0), cp(2.0), 4.0, 4.0, &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 2.0) && close(v.rhs, 2.0));
        let v = bounded_ratio_check_b(&u, &c(1.0), cp(2.0), 1.0, 4.0, &nu(), &cfg()).unwrap();
        assert!(close(v.lhs, 2.5f64.sqrt()));
        assert!(close(v.rhs, 2f64.sqrt() * 1.5));
    }

    #[test]
    fn bounded_ratio_hypotheses() {
        assert!(matches!(
            bounded_ratio_check_a(&c(1.0), &c(1.0), cp(2.0), 2.0, 1.0, &nu(), &cfg()),
            Err(InequalityError::BadBounds { .. })
        ));
        assert!(bounded_ratio_check_a(&c(1.0), &c(1.0), cp(2.0), 0.0, 1.0, &nu(), &cfg()).is_err());
        let u = parse("1 + indicator(Z)");
        let v = bounded_ratio_check_a(&u, &c(1.0), cp(2.0), 1.0, 1.5, &nu(), &cfg()).unwrap();
        assert_eq!(v.outcome, Outcome::HypothesesViolated);
        assert!(v.numerically_held);
        let v =
            bounded_ratio_check_a(&chi(&[0]), &c(1.0), cp(2.0), 0.5, 1.0, &nu(), &cfg()).unwrap();
        assert_eq!(v.outcome, Outcome::HypothesesViolated);
    }

    #[test]
    fn max_measure_gates_every_check() {
        let mx = max_geometric(0.5);
        let checker = Checker::new(&mx, cfg());
        let (u, v) = (chi(&[0, 1]), c(1.0));
        for name in CheckName::ALL {
            let p = match name {
                CheckName::ReverseHolder | CheckName::ReverseMinkowski => 0.5,
                _ => 2.0,
            };
            let bounds = name.needs_bounds().then_some((0.5, 2.0));
            let u = if name.needs_bounds() {
                c(1.0)
            } else {
                u.clone()
            };
            let r = checker.run(name, &u, &v, p, bounds).unwrap();
            assert_eq!(r.outcome, Outcome::HypothesesViolated, "{name}");
        }
        let audit = checker
            .measure_audits()
            .iter()
            .find(|a| a.property == Property::AIntegrability)
            .unwrap();
        assert!(audit.is_failed());
    }

    #[test]
    fn duality_and_scaling() {
        let (u, v) = (parse("geom(0.5) + indicator(Z)"), chi(&[0, 1, 2]));
        let a = holder_check(&u, &v, cp(3.0), &nu(), &cfg()).unwrap();
        let b = holder_check(&v, &u, cp(1.5), &nu(), &cfg()).unwrap();
        assert!((a.rhs - b.rhs).abs() < 1e-10);
        let scaled = holder_check(&u.scale(7.0), &v, cp(3.0), &nu(), &cfg()).unwrap();
        assert!((scaled.rhs - 7.0 * a.rhs).abs() < 1e-10);
        assert_eq!(scaled.outcome, a.outcome);
    }

    #[test]
    fn sweeps_embed_errors() {
        let (u, v) = (chi(&[0]), chi(&[0, 1]));
        let items = sweep(
            CheckName::Holder,
            &u,
            &v,
            &[1.5, 1.0, 3.0],
            None,
            &nu(),
            &cfg(),
        );
        assert_eq!(items.len(), 3);
        assert!(items[0].verdict.as_ref().unwrap().holds());
        assert!(items[1].error.is_some() && items[1].verdict.is_none());
        assert!(items[2].verdict.as_ref().unwrap().holds());
        assert!(sweep(CheckName::Holder, &u, &v, &[], None, &nu(), &cfg()).is_empty());
    }

    #[test]
    fn check_names_parse() {
        for name in CheckName::ALL {
            assert_eq!(name.as_str().parse::<CheckName>().unwrap(), name);
        }
        assert!("hoelder".parse::<CheckName>().is_err());
    }
}
