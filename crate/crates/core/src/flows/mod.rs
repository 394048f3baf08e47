//! Gradient flows of the Chern–Simons functional on homogeneous metrics.
//!
//! The generalized flow is `∂_t g_ij = α g_ij + Σ_s η_s (C^{2s+1})_ij` with
//! the odd powers taken in mixed components. For a diagonal Milnor-frame
//! metric the Cotton tensor is diagonal, so the flow reduces to
//! `d ln g_i / dt = α + Σ_s η_s c_i^{2s+1}` where `c_i` are the mixed diagonal
//! Cotton components. Trajectories are integrated in `u_i = ln g_i`: positivity
//! is automatic and the trace `Σ du_i/dt`, which is all the volume sees, is
//! preserved by the linear stages of the Runge–Kutta scheme.
//!
//! On homogeneous trajectories α is spatially constant.

pub mod integrator;

use thiserror::Error;

use crate::functionals;
use crate::homogeneous::{cotton_hom, cs_invariant, frame_curvature, volume, HomMetric};
use crate::tensor::{odd_power, Basis, Mixed3};
use integrator::{dopri_step, error_norm, rk4_fixed, step_factor, State};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("invalid flow spec: {0}")]
    InvalidSpec(String),
    #[error("stationary-point residual is defined for η_0, η_1 only; η_{0} = {1} is nonzero")]
    TruncationExceeded(usize, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaPolicy {
    Zero,
    Constant(f64),
    /// Cancels the trace of the polynomial part so that the volume is constant.
    /// For `s = 1` this is `α = −(η_1/3) tr C³`; higher `s` extend it termwise.
    VolumePreserving,
    /// `α = k R`.
    ScalarCurvatureProportional(f64),
}

impl AlphaPolicy {
    fn is_trivial(&self, etas: &[f64]) -> bool {
        match *self {
            AlphaPolicy::Zero => true,
            AlphaPolicy::Constant(a) => a == 0.0,
            AlphaPolicy::ScalarCurvatureProportional(k) => k == 0.0,
            AlphaPolicy::VolumePreserving => etas.iter().skip(1).all(|e| *e == 0.0),
        }
    }
}

/// One member of the polynomial Cotton-flow family plus integrator settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub alpha: AlphaPolicy,
    /// `η_0, η_1, …`, truncated.
    pub etas: Vec<f64>,
    pub dt_init: f64,
    pub t_max: f64,
    pub rel_tol: f64,
    /// Steps that would push any coefficient below this value are rejected.
    pub positivity_margin: f64,
}

impl Default for FlowSpec {
    fn default() -> Self {
        Self {
            alpha: AlphaPolicy::Zero,
            etas: vec![1.0],
            dt_init: 1e-3,
            t_max: 10.0,
            rel_tol: 1e-8,
            positivity_margin: 1e-6,
        }
    }
}

impl FlowSpec {
    pub fn new(alpha: AlphaPolicy, etas: Vec<f64>) -> Self {
        Self { alpha, etas, ..Self::default() }
    }

    /// Plain Cotton flow `∂_t g = η_0 C`.
    pub fn cotton(eta0: f64) -> Self {
        Self::new(AlphaPolicy::Zero, vec![eta0])
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.positivity_margin = margin;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn eta(&self, s: usize) -> f64 {
        self.etas.get(s).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |m: String| Err(FlowError::InvalidSpec(m));
        if let Some((s, e)) = self.etas.iter().enumerate().find(|(_, e)| !(e.is_finite() && **e >= 0.0)) {
            return bad(format!("eta_{s} = {e} must be finite and >= 0"));
        }
        let alpha_ok = match self.alpha {
            AlphaPolicy::Constant(a) | AlphaPolicy::ScalarCurvatureProportional(a) => a.is_finite(),
            _ => true,
        };
        if !alpha_ok {
            return bad("alpha parameter must be finite".into());
        }
        if self.alpha.is_trivial(&self.etas) && self.etas.iter().all(|e| *e == 0.0) {
            return bad("flow is identically zero: set a nonzero eta or a nontrivial alpha".into());
        }
        if !(self.dt_init.is_finite() && self.dt_init > 0.0) {
            return bad(format!("dt_init = {} must be positive", self.dt_init));
        }
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return bad(format!("t_max = {} must be finite and >= 0", self.t_max));
        }
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return bad(format!("rel_tol = {} must be positive", self.rel_tol));
        }
        if !(self.positivity_margin.is_finite() && self.positivity_margin >= 0.0) {
            return bad(format!("positivity_margin = {} must be finite and >= 0", self.positivity_margin));
        }
        Ok(())
    }
}

/// `Σ_s η_s C^{2s+1}` in mixed components.
pub fn cotton_polynomial(c: &Mixed3, etas: &[f64]) -> Mixed3 {
    let mut out = Mixed3::zero(c.basis);
    for (s, &eta) in etas.iter().enumerate() {
        if eta != 0.0 {
            out = out + odd_power(c, 2 * s as u32 + 1).expect("odd exponent").scale(eta);
        }
    }
    out
}

pub fn alpha_value(policy: &AlphaPolicy, m: &HomMetric, spec: &FlowSpec) -> f64 {
    match *policy {
        AlphaPolicy::Zero => 0.0,
        AlphaPolicy::Constant(a) => a,
        AlphaPolicy::ScalarCurvatureProportional(k) => k * frame_curvature(m).scalar,
        AlphaPolicy::VolumePreserving => {
            if spec.etas.iter().skip(1).all(|e| *e == 0.0) {
                return 0.0;
            }
            let higher: Vec<f64> = spec.etas.iter().enumerate().map(|(s, e)| if s == 0 { 0.0 } else { *e }).collect();
            -cotton_polynomial(&cotton_hom(m), &higher).trace() / 3.0
        }
    }
}

/// `d ln g_i / dt` (mixed diagonal of the right-hand side).
pub fn log_rates(m: &HomMetric, spec: &FlowSpec) -> [f64; 3] {
    let alpha = alpha_value(&spec.alpha, m, spec);
    let poly = cotton_polynomial(&cotton_hom(m), &spec.etas).diagonal();
    poly.map(|p| alpha + p)
}

/// `dg_i/dt` of the generalized polynomial flow.
pub fn rhs_generalized(m: &HomMetric, spec: &FlowSpec) -> [f64; 3] {
    let r = log_rates(m, spec);
    [m.g[0] * r[0], m.g[1] * r[1], m.g[2] * r[2]]
}

/// `dg_i/dτ = −R g_i`.
pub fn yamabe_rhs(m: &HomMetric) -> [f64; 3] {
    let r = frame_curvature(m).scalar;
    m.g.map(|g| -r * g)
}

/// Einstein–Hilbert polynomial flow `Σ_s θ_s (G + Λ_W g)^{2s+1}`, no α-term.
pub fn eh_polynomial_rhs(m: &HomMetric, thetas: &[f64], lambda_w: f64) -> [f64; 3] {
    let fc = frame_curvature(m);
    let e = Mixed3::diag(fc.ricci.map(|r| r - 0.5 * fc.scalar + lambda_w), Basis::Frame);
    let p = cotton_polynomial(&e, thetas).diagonal();
    [m.g[0] * p[0], m.g[1] * p[1], m.g[2] * p[2]]
}

/// `‖η_0 C − (η_1/3) tr(C³) 𝟙 + η_1 C³‖` in mixed components.
pub fn fixed_point_residual(m: &HomMetric, spec: &FlowSpec) -> Result<f64, FlowError> {
    if let Some((s, e)) = spec.etas.iter().enumerate().skip(2).find(|(_, e)| **e != 0.0) {
        return Err(FlowError::TruncationExceeded(s, *e));
    }
    let (eta0, eta1) = (spec.eta(0), spec.eta(1));
    let c = cotton_hom(m);
    let c3 = odd_power(&c, 3).expect("odd exponent");
    let r = c.scale(eta0) - Mixed3::identity(Basis::Frame).scale(eta1 * c3.trace() / 3.0) + c3.scale(eta1);
    Ok(r.frobenius())
}

/// One sample along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub g: [f64; 3],
    pub scalar_curvature: f64,
    /// `|C|² = C^i_j C^j_i`.
    pub cotton_norm2: f64,
    pub f_cs: f64,
    pub volume: f64,
    pub alpha: f64,
    /// `F(t_n) − F(t_{n−1})`; zero for the first record.
    pub df_step: f64,
}

impl TrajectoryRecord {
    pub fn metric(&self, like: &HomMetric) -> HomMetric {
        like.with_coefficients(self.g)
    }

    fn sample(m: &HomMetric, t: f64, spec: &FlowSpec, prev_f: Option<f64>) -> Self {
        let c = cotton_hom(m);
        let f_cs = cs_invariant(m);
        Self {
            t,
            g: m.g,
            scalar_curvature: frame_curvature(m).scalar,
            cotton_norm2: functionals::mixed_norm2(&c),
            f_cs,
            volume: volume(m),
            alpha: alpha_value(&spec.alpha, m, spec),
            df_step: prev_f.map_or(0.0, |f| f_cs - f),
        }
    }
}

/// Qualitative collapse pattern read off the final growth rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollapseKind {
    /// Two directions grow while one shrinks.
    Pancake,
    /// One direction grows while two shrink.
    Cigar,
    Other,
}

impl CollapseKind {
    pub fn from_rates(rates: &[f64; 3]) -> Self {
        let grow = rates.iter().filter(|r| **r > 0.0).count();
        let shrink = rates.iter().filter(|r| **r < 0.0).count();
        match (grow, shrink) {
            (2, 1) => Self::Pancake,
            (1, 2) => Self::Cigar,
            _ => Self::Other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Pancake => "pancake",
            Self::Cigar => "cigar",
            Self::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    pub last: TrajectoryRecord,
    /// Index of the smallest coefficient.
    pub collapsing_axis: usize,
    /// `d ln g_i/dt` at the last record.
    pub log_rates: [f64; 3],
    pub kind: CollapseKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    /// The positivity guard forced the step below `1e-12` of the time scale.
    Degenerate(DegeneracyReport),
    StepLimit,
}

impl Termination {
    pub fn reason(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::Degenerate(_) => "degeneracy",
            Termination::StepLimit => "step_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub termination: Termination,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryRecord {
        self.records.last().expect("a trajectory always holds its initial record")
    }
}

const MAX_STEPS: usize = 1_000_000;
const UNDERFLOW: f64 = 1e-12;

/// Adaptive Dormand–Prince integration of the generalized flow.
pub fn evolve(m0: &HomMetric, spec: &FlowSpec) -> Result<Trajectory, FlowError> {
    spec.validate()?;
    // stages that leave the representable range poison the step, which is then retried smaller
    let rates = |_t: f64, u: &State| match HomMetric::with_cell_volume(m0.class, u.map(f64::exp), m0.v0) {
        Ok(m) => log_rates(&m, spec),
        Err(_) => [f64::NAN; 3],
    };

    let mut t = 0.0;
    let mut u: State = m0.g.map(f64::ln);
    let mut dt = spec.dt_init;
    let mut records = vec![TrajectoryRecord::sample(m0, 0.0, spec, None)];
    let mut rejected = 0;
    let log_margin = if spec.positivity_margin > 0.0 { spec.positivity_margin.ln() } else { f64::NEG_INFINITY };

    let mut steps = 0;
    let termination = loop {
        if t >= spec.t_max {
            break Termination::Completed;
        }
        if steps >= MAX_STEPS {
            break Termination::StepLimit;
        }
        if dt < UNDERFLOW * t.abs().max(1.0) {
            let last = *records.last().expect("nonempty");
            let m = last.metric(m0);
            let log_rates = log_rates(&m, spec);
            let collapsing_axis = (0..3).min_by(|&a, &b| last.g[a].total_cmp(&last.g[b])).expect("three axes");
            break Termination::Degenerate(DegeneracyReport {
                last,
                collapsing_axis,
                log_rates,
                kind: CollapseKind::from_rates(&log_rates),
            });
        }
        let h = dt.min(spec.t_max - t);
        let (u_new, err) = dopri_step(&rates, t, &u, h);
        let finite = u_new.iter().all(|v| v.is_finite()) && err.iter().all(|v| v.is_finite());
        if !finite || u_new.iter().any(|v| *v < log_margin) {
            dt = h * 0.5;
            rejected += 1;
            continue;
        }
        let en = error_norm(&err, &u, &u_new, spec.rel_tol);
        if en > 1.0 {
            dt = h * step_factor(en);
            rejected += 1;
            continue;
        }
        // exact when a component does not move
        let g: [f64; 3] = std::array::from_fn(|i| records.last().expect("nonempty").g[i] * (u_new[i] - u[i]).exp());
        let Ok(m) = HomMetric::with_cell_volume(m0.class, g, m0.v0) else {
            dt = h * 0.5;
            rejected += 1;
            continue;
        };
        steps += 1;
        t = if h == spec.t_max - t { spec.t_max } else { t + h };
        u = u_new;
        let prev = records.last().map(|r| r.f_cs);
        records.push(TrajectoryRecord::sample(&m, t, spec, prev));
        dt = h * step_factor(en);
    };
    Ok(Trajectory { records, termination, rejected_steps: rejected })
}

/// Diagonal of `(Φ_A^ε ∘ Φ_σ^ε − Φ_σ^ε ∘ Φ_A^ε)(g) / ε²` in mixed components,
/// split into its trace part and the traceless remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorResidual {
    pub residual: Mixed3,
    /// Coefficient of `𝟙` (mean of the diagonal).
    pub proportional: f64,
    pub remainder: Mixed3,
}

const FLOW_MAP_SUBSTEPS: usize = 64;

fn flow_map(m0: &HomMetric, g: &[f64; 3], eps: f64, rate: &impl Fn(&HomMetric) -> [f64; 3]) -> [f64; 3] {
    let f = |u: &State| rate(&m0.with_coefficients(u.map(f64::exp)));
    rk4_fixed(&f, &g.map(f64::ln), eps, FLOW_MAP_SUBSTEPS).map(f64::exp)
}

/// Commutator of the flow `spec_a` with the conformal flow `∂_τ g = σ g`.
///
/// `sigma` reuses [`AlphaPolicy`]: `Constant(s)` is a constant rescaling rate,
/// `ScalarCurvatureProportional(-1.0)` is the Yamabe flow.
pub fn commutator_residual(m: &HomMetric, spec_a: &FlowSpec, sigma: &AlphaPolicy, eps: f64) -> CommutatorResidual {
    let sigma_spec = FlowSpec::new(*sigma, vec![]);
    let rate_a = |x: &HomMetric| log_rates(x, spec_a);
    let rate_s = |x: &HomMetric| {
        let s = alpha_value(sigma, x, &sigma_spec);
        [s; 3]
    };
    let a_after_s = flow_map(m, &flow_map(m, &m.g, eps, &rate_s), eps, &rate_a);
    let s_after_a = flow_map(m, &flow_map(m, &m.g, eps, &rate_a), eps, &rate_s);
    let d: [f64; 3] = std::array::from_fn(|i| (a_after_s[i] - s_after_a[i]) / (m.g[i] * eps * eps));
    let residual = Mixed3::diag(d, Basis::Frame);
    let proportional = residual.trace() / 3.0;
    CommutatorResidual { residual, proportional, remainder: residual.traceless_part() }
}

/// Leading-order traceless remainder of [`commutator_residual`] predicted by
/// the conformal weight of `C^i_j`: under `g → λ g` the mixed Cotton tensor
/// scales as `λ^{-3/2}`, so each term `η_s C^{2s+1}` picks up
/// `−(3/2)(2s+1) σ η_s C^{2s+1}`.
pub fn commutator_obstruction(m: &HomMetric, spec_a: &FlowSpec, sigma: &AlphaPolicy) -> Mixed3 {
    let sigma_spec = FlowSpec::new(*sigma, vec![]);
    let s = alpha_value(sigma, m, &sigma_spec);
    let c = cotton_hom(m);
    let weighted: Vec<f64> = spec_a.etas.iter().enumerate().map(|(k, e)| e * (2 * k + 1) as f64).collect();
    cotton_polynomial(&c, &weighted).traceless_part().scale(-1.5 * s)
}

/// Richardson study of the commutator remainder over `ε, ε/2, ε/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorStudy {
    pub residuals: [CommutatorResidual; 3],
    /// `2 r(ε/4) − r(ε/2)`: first-order extrapolation of the remainder to ε → 0.
    pub extrapolated_remainder: Mixed3,
    /// `log2(|r(ε) − r(ε/2)| / |r(ε/2) − r(ε/4)|)`; `None` if the sequence is stationary.
    pub observed_order: Option<f64>,
    /// Norm of the full extrapolated residual, for relative comparisons.
    pub residual_scale: f64,
}

pub fn commutator_richardson(m: &HomMetric, spec_a: &FlowSpec, sigma: &AlphaPolicy, eps: f64) -> CommutatorStudy {
    let residuals = [eps, eps / 2.0, eps / 4.0].map(|e| commutator_residual(m, spec_a, sigma, e));
    let r = residuals.map(|x| x.remainder);
    let d1 = (r[0] - r[1]).frobenius();
    let d2 = (r[1] - r[2]).frobenius();
    let observed_order = if d2 > 0.0 && d1 > 0.0 { Some((d1 / d2).log2()) } else { None };
    let extrapolated_remainder = r[2].scale(2.0) - r[1];
    let full = residuals[2].residual.scale(2.0) - residuals[1].residual;
    CommutatorStudy { residuals, extrapolated_remainder, observed_order, residual_scale: full.frobenius() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homogeneous::BianchiClass;

    fn hm(class: BianchiClass, g: [f64; 3]) -> HomMetric {
        HomMetric::new(class, g).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(FlowSpec::cotton(1.0).validate().is_ok());
        assert!(FlowSpec::cotton(-1.0).validate().is_err());
        assert!(FlowSpec::new(AlphaPolicy::Zero, vec![0.0, 0.0]).validate().is_err());
        assert!(FlowSpec::new(AlphaPolicy::VolumePreserving, vec![]).validate().is_err());
        assert!(FlowSpec::new(AlphaPolicy::Constant(0.3), vec![]).validate().is_ok());
        let mut s = FlowSpec::cotton(1.0);
        s.rel_tol = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn rhs_examples() {
        let round = hm(BianchiClass::Su2, [1.0; 3]);
        assert!(rhs_generalized(&round, &FlowSpec::cotton(1.0)).iter().all(|v| v.abs() < 1e-15));

        let m = hm(BianchiClass::Nil, [0.4, 2.0, 1.3]);
        let rhs = rhs_generalized(&m, &FlowSpec::new(AlphaPolicy::Constant(0.7), vec![]));
        for i in 0..3 {
            assert!((rhs[i] - 0.7 * m.g[i]).abs() < 1e-15);
        }

        let unit = hm(BianchiClass::Nil, [1.0; 3]);
        let c = cotton_hom(&unit).diagonal();
        assert_eq!(rhs_generalized(&unit, &FlowSpec::cotton(1.0)), c);
    }

    #[test]
    fn alpha_examples() {
        let m = hm(BianchiClass::Nil, [1.0; 3]);
        let spec = FlowSpec::new(AlphaPolicy::VolumePreserving, vec![1.0]);
        assert_eq!(alpha_value(&AlphaPolicy::Zero, &m, &spec), 0.0);
        assert_eq!(alpha_value(&AlphaPolicy::VolumePreserving, &m, &spec), 0.0);

        let spec = FlowSpec::new(AlphaPolicy::VolumePreserving, vec![0.0, 1.0]);
        let c3 = odd_power(&cotton_hom(&m), 3).unwrap().trace();
        assert!((alpha_value(&spec.alpha, &m, &spec) + c3 / 3.0).abs() < 1e-15);
        // tr C³ for c = (½, ½, −1) is −3/4
        assert!((c3 + 0.75).abs() < 1e-15);
        let r = log_rates(&m, &spec);
        assert!(r.iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn yamabe_examples() {
        assert_eq!(yamabe_rhs(&hm(BianchiClass::R3, [1.0, 2.0, 3.0])), [0.0; 3]);
        assert!(yamabe_rhs(&hm(BianchiClass::Su2, [1.0; 3])).iter().all(|v| *v < 0.0));
        let sol = hm(BianchiClass::Sol, [1.0; 3]);
        let r = frame_curvature(&sol).scalar;
        assert_eq!(yamabe_rhs(&sol), [-r; 3]);
    }

    #[test]
    fn eh_polynomial_examples() {
        assert_eq!(eh_polynomial_rhs(&hm(BianchiClass::R3, [1.0; 3]), &[1.0], 0.0), [0.0; 3]);
        // unit round S³: R_ij = 2 g_ij, R = 6, so G + Λ g = 0 at Λ = 1
        let s3 = hm(BianchiClass::Su2, [0.25; 3]);
        assert!(eh_polynomial_rhs(&s3, &[1.0, 0.5], 1.0).iter().all(|v| v.abs() < 1e-14));
        let rhs = eh_polynomial_rhs(&s3, &[1.0], 0.0);
        // G^i_i = 2 − 3 = −1
        for v in rhs {
            assert!((v + 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn fixed_point_examples() {
        let spec = FlowSpec::new(AlphaPolicy::VolumePreserving, vec![1.0, 1.0]);
        assert!(fixed_point_residual(&hm(BianchiClass::Su2, [2.0; 3]), &spec).unwrap() < 1e-14);
        assert_eq!(fixed_point_residual(&hm(BianchiClass::R3, [1.0, 5.0, 2.0]), &spec).unwrap(), 0.0);
        let nil = fixed_point_residual(&hm(BianchiClass::Nil, [1.0; 3]), &spec).unwrap();
        // (η_0 a³ + ¾ η_1 a⁹) |(½, ½, −1)| at a = 1
        assert!((nil - 1.75 * 1.5_f64.sqrt()).abs() < 1e-14);
        let long = FlowSpec::new(AlphaPolicy::VolumePreserving, vec![1.0, 1.0, 0.5]);
        assert!(matches!(fixed_point_residual(&hm(BianchiClass::Nil, [1.0; 3]), &long), Err(FlowError::TruncationExceeded(2, _))));
    }

    #[test]
    fn flat_trajectory_is_constant() {
        let m = hm(BianchiClass::R3, [0.5, 1.0, 3.0]);
        let traj = evolve(&m, &FlowSpec::cotton(1.0).with_t_max(5.0)).unwrap();
        assert_eq!(traj.termination, Termination::Completed);
        for r in &traj.records {
            assert_eq!(r.g, m.g);
            assert_eq!(r.df_step, 0.0);
        }
        assert_eq!(traj.last().t, 5.0);
    }

    #[test]
    fn pure_conformal_commutator_closes() {
        let m = hm(BianchiClass::Nil, [1.3, 0.8, 1.1]);
        let conformal = FlowSpec::new(AlphaPolicy::Constant(0.4), vec![]);
        let r = commutator_residual(&m, &conformal, &AlphaPolicy::Constant(0.7), 1e-2);
        assert!(r.residual.frobenius() < 1e-10);
    }

    #[test]
    fn commutator_remainder_matches_conformal_weight() {
        let m = hm(BianchiClass::Nil, [1.3, 0.8, 1.1]);
        for (spec, sigma) in [
            (FlowSpec::cotton(1.0), AlphaPolicy::Constant(0.7)),
            (FlowSpec::cotton(1.0), AlphaPolicy::ScalarCurvatureProportional(-1.0)),
            (FlowSpec::new(AlphaPolicy::Zero, vec![1.0, 1.0]), AlphaPolicy::Constant(0.7)),
        ] {
            let study = commutator_richardson(&m, &spec, &sigma, 1e-3);
            let predicted = commutator_obstruction(&m, &spec, &sigma);
            let err = (study.extrapolated_remainder - predicted).frobenius();
            assert!(err < 1e-4 * predicted.frobenius(), "{err:e} vs {:e}", predicted.frobenius());
            assert!(study.observed_order.unwrap() > 0.95);
        }
    }
}
