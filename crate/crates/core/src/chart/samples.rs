//! Standard coordinate charts and seeded random periodic metrics.

use std::f64::consts::PI;

use rand::Rng;

use super::{ChartMetric, Point};
use crate::tensor::{Basis, SymMat3};

const B: Basis = Basis::Coordinate;

pub fn flat(h: f64) -> ChartMetric {
    ChartMetric::new(|_| SymMat3::identity(B), h)
}

/// `δ_ij / (x³)²` on `x³ > 0`, sectional curvature −1.
pub fn hyperbolic_upper_half(h: f64) -> ChartMetric {
    ChartMetric::new(|p| SymMat3::identity(B).scale(1.0 / (p[2] * p[2])), h).with_guard(|p| p[2] > 0.0)
}

/// Unit round S³ in stereographic coordinates, `4 δ_ij / (1 + |x|²)²`.
pub fn round_s3_stereographic(h: f64) -> ChartMetric {
    ChartMetric::new(
        |p| {
            let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            SymMat3::identity(B).scale(4.0 / ((1.0 + r2) * (1.0 + r2)))
        },
        h,
    )
}

/// Unit S² × R in coordinates `(θ, φ, z)`, valid away from the poles.
pub fn s2_cross_r(h: f64) -> ChartMetric {
    ChartMetric::new(
        |p| {
            let s = p[0].sin();
            SymMat3::diag([1.0, s * s, 1.0], B)
        },
        h,
    )
    .with_guard(|p| p[0] > 0.0 && p[0] < PI)
}

/// H² × R with the upper half-plane model in `(x, y)`, `y > 0`.
pub fn h2_cross_r(h: f64) -> ChartMetric {
    ChartMetric::new(
        |p| {
            let w = 1.0 / (p[1] * p[1]);
            SymMat3::diag([w, w, 1.0], B)
        },
        h,
    )
    .with_guard(|p| p[1] > 0.0)
}

/// One Fourier mode `amp · sin(k·x + phase)` added to a metric component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub component: usize,
    pub k: [i32; 3],
    pub phase: f64,
    pub amp: f64,
}

/// `g_ij = δ_ij + Σ modes`, periodic on `[0, 2π)³`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPerturbation {
    pub modes: Vec<Mode>,
}

impl PeriodicPerturbation {
    /// Two modes per component with integer wave vectors in `{-1, 0, 1}³ \ {0}`
    /// and amplitudes chosen so that each component deviates from δ_ij by at
    /// most `amplitude`. For `amplitude < 1/3` the result is diagonally
    /// dominant and therefore SPD everywhere.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, amplitude: f64) -> Self {
        const PER_COMPONENT: usize = 2;
        let mut modes = Vec::with_capacity(6 * PER_COMPONENT);
        for component in 0..6 {
            for _ in 0..PER_COMPONENT {
                let k = loop {
                    let k = [rng.gen_range(-1..=1), rng.gen_range(-1..=1), rng.gen_range(-1..=1)];
                    if k != [0, 0, 0] {
                        break k;
                    }
                };
                let phase = rng.gen_range(0.0..2.0 * PI);
                let amp = rng.gen_range(-1.0..1.0) * amplitude / PER_COMPONENT as f64;
                modes.push(Mode { component, k, phase, amp });
            }
        }
        Self { modes }
    }

    pub fn eval(&self, p: Point) -> SymMat3 {
        let mut g = SymMat3::identity(B);
        for m in &self.modes {
            let arg = m.k[0] as f64 * p[0] + m.k[1] as f64 * p[1] + m.k[2] as f64 * p[2] + m.phase;
            g.c[m.component] += m.amp * arg.sin();
        }
        g
    }

    pub fn chart(&self, h: f64) -> ChartMetric {
        let me = self.clone();
        ChartMetric::new(move |p| me.eval(p), h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_perturbations_are_spd_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let pert = PeriodicPerturbation::random(&mut rng, 0.05);
            for _ in 0..50 {
                let p = [rng.gen_range(0.0..6.3), rng.gen_range(0.0..6.3), rng.gen_range(0.0..6.3)];
                let g = pert.eval(p);
                assert!(g.check_positive_definite().is_ok());
                assert!((g - SymMat3::identity(B)).max_abs() <= 0.05);
            }
        }
    }

    #[test]
    fn perturbation_is_periodic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pert = PeriodicPerturbation::random(&mut rng, 0.05);
        let a = pert.eval([0.1, 0.2, 0.3]);
        let b = pert.eval([0.1 + 2.0 * PI, 0.2 - 2.0 * PI, 0.3 + 4.0 * PI]);
        assert!((a - b).max_abs() < 1e-14);
    }
}
