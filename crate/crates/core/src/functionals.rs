//! Entropy and volume rates along the flows, and finite-difference
//! directional derivatives of the Chern–Simons functional.

use thiserror::Error;

use crate::flows::{alpha_value, cotton_polynomial, rhs_generalized, FlowSpec};
use crate::homogeneous::{cotton_hom, geometry, geometry_of, volume, HomMetric};
use crate::tensor::{Basis, Mixed3, SymMat3, TensorError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error("perturbed metric left the positive cone: {0}")]
    Definiteness(#[from] TensorError),
    #[error("finite-difference step must be positive, got {0}")]
    BadStep(f64),
}

/// `T^i_j T^j_i`.
pub fn mixed_norm2(t: &Mixed3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += t.t[i][j] * t.t[j][i];
        }
    }
    s
}

/// `Σ_s η_s ∫ √g |C^{s+1}|²` per reference cell.
pub fn entropy_rate(m: &HomMetric, spec: &FlowSpec) -> f64 {
    let c = cotton_hom(m);
    let mut power = c;
    let mut sum = 0.0;
    for &eta in &spec.etas {
        if eta != 0.0 {
            sum += eta * mixed_norm2(&power);
        }
        power = power.matmul(&c);
    }
    sum * volume(m)
}

/// `½ ∫ √g [3α + Σ_{s≥1} η_s tr C^{2s+1}]` per reference cell.
pub fn volume_rate(m: &HomMetric, spec: &FlowSpec) -> f64 {
    let alpha = alpha_value(&spec.alpha, m, spec);
    let higher: Vec<f64> = spec.etas.iter().enumerate().map(|(s, e)| if s == 0 { 0.0 } else { *e }).collect();
    let tr = cotton_polynomial(&cotton_hom(m), &higher).trace();
    0.5 * volume(m) * (3.0 * alpha + tr)
}

fn cs_at(m: &HomMetric, metric: &SymMat3) -> Result<f64, TensorError> {
    Ok(geometry_of(m.class, metric)?.cs_invariant(m.v0))
}

/// Central difference `[F(g + h δg) − F(g − h δg)] / 2h` for an arbitrary
/// symmetric perturbation of the frame components.
pub fn functional_variation(m: &HomMetric, dg: &SymMat3, step: f64) -> Result<f64, FunctionalError> {
    central_difference(m, dg, step, cs_at)
}

fn central_difference(
    m: &HomMetric,
    dg: &SymMat3,
    step: f64,
    f: impl Fn(&HomMetric, &SymMat3) -> Result<f64, TensorError>,
) -> Result<f64, FunctionalError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(FunctionalError::BadStep(step));
    }
    let mut dg = *dg;
    dg.basis = Basis::Frame;
    let g = m.metric();
    let plus = f(m, &(g + dg.scale(step)))?;
    let minus = f(m, &(g - dg.scale(step)))?;
    Ok((plus - minus) / (2.0 * step))
}

/// Step that moves every component by at most `1e-5` of its own scale,
/// `|h δg_ij| ≤ 1e-5 √(g_i g_j)`, so strongly anisotropic metrics stay resolved.
pub fn default_step(m: &HomMetric, dg: &SymMat3) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max(dg.get(i, j).abs() / (m.g[i] * m.g[j]).sqrt());
        }
    }
    if worst > 0.0 {
        1e-5 / worst
    } else {
        1e-5
    }
}

fn richardson(
    m: &HomMetric,
    dg: &SymMat3,
    f: impl Fn(&HomMetric, &SymMat3) -> Result<f64, TensorError> + Copy,
) -> Result<f64, FunctionalError> {
    let h = default_step(m, dg);
    let coarse = central_difference(m, dg, h, f)?;
    let fine = central_difference(m, dg, 0.5 * h, f)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

pub fn functional_variation_richardson(m: &HomMetric, dg: &SymMat3) -> Result<f64, FunctionalError> {
    richardson(m, dg, cs_at)
}

/// `∫ √g C^ij δg_ij` per reference cell.
pub fn cotton_pairing(m: &HomMetric, dg: &SymMat3) -> f64 {
    let geo = geometry(m);
    let c_up = geo.cotton_upper();
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += c_up.get(i, j) * dg.get(i, j);
        }
    }
    s * volume(m)
}

/// Directional derivative of `∫ √g (R − 2Λ)` by central differences with one
/// Richardson halving.
pub fn einstein_hilbert_variation(m: &HomMetric, dg: &SymMat3, lambda: f64) -> Result<f64, FunctionalError> {
    richardson(m, dg, move |m, g| Ok(geometry_of(m.class, g)?.einstein_hilbert(m.v0, lambda)))
}

/// Analytic entropy and volume rates next to their finite-difference twins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticSample {
    pub f_cs: f64,
    pub df_dt: f64,
    pub df_dt_numeric: f64,
    pub volume: f64,
    pub dv_dt: f64,
    pub dv_dt_numeric: f64,
}

impl DiagnosticSample {
    pub fn entropy_rel_error(&self) -> f64 {
        rel_err(self.df_dt_numeric, self.df_dt)
    }

    pub fn volume_rel_error(&self) -> f64 {
        rel_err(self.dv_dt_numeric, self.dv_dt)
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Numeric rates are directional derivatives of `F` and `V` along the flow
/// vector `∂_t g`, independent of the Cotton tensor.
pub fn diagnose(m: &HomMetric, spec: &FlowSpec) -> Result<DiagnosticSample, FunctionalError> {
    let dir = SymMat3::diag(rhs_generalized(m, spec), Basis::Frame);
    let vol = |m: &HomMetric, g: &SymMat3| -> Result<f64, TensorError> {
        g.check_positive_definite()?;
        Ok(m.v0 * g.det().sqrt())
    };
    Ok(DiagnosticSample {
        f_cs: crate::homogeneous::cs_invariant(m),
        df_dt: entropy_rate(m, spec),
        df_dt_numeric: richardson(m, &dir, cs_at)?,
        volume: volume(m),
        dv_dt: volume_rate(m, spec),
        dv_dt_numeric: richardson(m, &dir, vol)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::AlphaPolicy;
    use crate::homogeneous::BianchiClass;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hm(class: BianchiClass, g: [f64; 3]) -> HomMetric {
        HomMetric::new(class, g).unwrap()
    }

    #[test]
    fn entropy_rate_examples() {
        let spec = FlowSpec::cotton(1.0);
        assert_eq!(entropy_rate(&hm(BianchiClass::Su2, [1.0; 3]), &spec), 0.0);
        let nil = hm(BianchiClass::Nil, [1.0; 3]);
        assert_eq!(entropy_rate(&nil, &FlowSpec::new(AlphaPolicy::Constant(1.0), vec![0.0, 0.0])), 0.0);
        // |C|² V = ¼ + ¼ + 1
        assert!((entropy_rate(&nil, &spec) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn volume_rate_examples() {
        let m = hm(BianchiClass::Nil, [0.7, 1.2, 2.0]);
        assert!(volume_rate(&m, &FlowSpec::cotton(1.0)).abs() < 1e-15);
        let a = 0.3;
        let vr = volume_rate(&m, &FlowSpec::new(AlphaPolicy::Constant(a), vec![]));
        assert!((vr - 1.5 * a * volume(&m)).abs() < 1e-15);
        for class in BianchiClass::ALL {
            let m = hm(class, [0.7, 1.2, 2.0]);
            let spec = FlowSpec::new(AlphaPolicy::VolumePreserving, vec![0.5, 1.0, 0.25]);
            assert!(volume_rate(&m, &spec).abs() <= 1e-14);
        }
    }

    #[test]
    fn variation_examples() {
        let m = hm(BianchiClass::Nil, [0.8, 1.3, 0.6]);
        assert_eq!(functional_variation(&m, &SymMat3::zero(Basis::Frame), 1e-4).unwrap(), 0.0);
        let along_g = functional_variation(&m, &m.metric(), 1e-4).unwrap();
        assert!(along_g.abs() < 1e-10, "{along_g:e}");
        assert!(functional_variation(&m, &m.metric(), 0.0).is_err());
        assert!(matches!(
            functional_variation(&m, &SymMat3::diag([-10.0, 0.0, 0.0], Basis::Frame), 0.1),
            Err(FunctionalError::Definiteness(_))
        ));
    }

    fn random_sym(rng: &mut ChaCha8Rng) -> SymMat3 {
        SymMat3::new(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)), Basis::Frame)
    }

    /// Re-derives the normalization constant of the Chern–Simons functional:
    /// the ratio of the numeric variation to the Cotton pairing is 1 for
    /// every class, random metric and random (off-diagonal) direction.
    #[test]
    fn cs_normalization_calibration() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for class in BianchiClass::ALL.into_iter().filter(|c| *c != BianchiClass::R3) {
            for _ in 0..10 {
                let m = hm(class, std::array::from_fn(|_| rng.gen_range(0.5..2.0)));
                let mut dg = random_sym(&mut rng);
                // traceless with respect to g
                let tr: f64 = (0..3).map(|i| dg.get(i, i) / m.g[i]).sum::<f64>() / 3.0;
                for (i, idx) in [0, 3, 5].into_iter().enumerate() {
                    dg.c[idx] -= tr * m.g[i];
                }
                let numeric = functional_variation_richardson(&m, &dg).unwrap();
                let analytic = cotton_pairing(&m, &dg);
                assert!(
                    (numeric - analytic).abs() <= 1e-6 * analytic.abs().max(1e-3),
                    "{class}: {numeric} vs {analytic}"
                );
            }
        }
    }

    #[test]
    fn conformal_direction_is_flat_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for class in BianchiClass::ALL {
            let m = hm(class, std::array::from_fn(|_| rng.gen_range(0.5..2.0)));
            let v = functional_variation_richardson(&m, &m.metric()).unwrap();
            assert!(v.abs() < 1e-9, "{class}: {v:e}");
        }
    }

    #[test]
    fn diagnose_resolves_thin_directions() {
        let m = hm(BianchiClass::Nil, [120.0, 120.0, 7e-5]);
        let d = diagnose(&m, &FlowSpec::cotton(1.0)).unwrap();
        assert!(d.entropy_rel_error() < 1e-6, "{d:?}");
    }

    #[test]
    fn diagnose_agrees() {
        let m = hm(BianchiClass::Sol, [0.6, 1.1, 1.7]);
        let spec = FlowSpec::new(AlphaPolicy::Constant(0.2), vec![1.0, 0.5]);
        let d = diagnose(&m, &spec).unwrap();
        assert!(d.entropy_rel_error() < 1e-6, "{d:?}");
        assert!(d.volume_rel_error() < 1e-6, "{d:?}");
    }
}
