//! Exact curvature and Chern–Simons data for left-invariant metrics on the
//! unimodular Bianchi groups.
//!
//! A Milnor frame `X_1, X_2, X_3` satisfies `[X_2, X_3] = λ_1 X_1`,
//! `[X_3, X_1] = λ_2 X_2`, `[X_1, X_2] = λ_3 X_3`. A [`HomMetric`] is diagonal
//! in that frame. Internally all quantities are computed for an arbitrary
//! SPD matrix of frame components: an orthonormal frame `e_a = P_ia X_i` is
//! built from the Cholesky factor, the Levi-Civita connection follows from the
//! Koszul formula, and curvature, Cotton–York and the Chern–Simons 3-form are
//! algebraic in the structure constants. Nothing here is differentiated
//! numerically.
//!
//! The orthonormal frame is positively oriented with respect to the Milnor
//! frame, so the orientation matches `ε_123 = +√g` in any chart in which
//! `X_1, X_2, X_3` is a right-handed basis.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::chart::{ChartMetric, Point, StencilOrder};
use crate::tensor::{inv3, levi_civita, Basis, Mixed3, SymMat3, TensorError};

/// `F = CS_NORMALIZATION · ∫ tr(ω∧dω + ⅔ ω∧ω∧ω)`.
///
/// Fixed so that `δF = ∫ √g C^ij δg_ij` holds exactly with the Cotton–York
/// orientation used throughout the crate; the `functionals` tests re-derive
/// it by central differences on random metrics of every class.
pub const CS_NORMALIZATION: f64 = -0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomError {
    #[error("frame coefficients must be finite and positive, got {0:?}")]
    InvalidCoefficients([f64; 3]),
    #[error("reference cell volume must be finite and positive, got {0}")]
    InvalidCellVolume(f64),
    #[error("no coordinate realization implemented for class {0}")]
    Unsupported(BianchiClass),
    #[error("unknown Bianchi class '{0}'")]
    UnknownClass(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BianchiClass {
    Su2,
    Sl2r,
    E2,
    Sol,
    Nil,
    R3,
}

impl BianchiClass {
    pub const ALL: [BianchiClass; 6] = [Self::Su2, Self::Sl2r, Self::E2, Self::Sol, Self::Nil, Self::R3];

    /// Structure signs `(λ_1, λ_2, λ_3)`.
    pub fn signs(self) -> [f64; 3] {
        match self {
            Self::Su2 => [1.0, 1.0, 1.0],
            Self::Sl2r => [-1.0, 1.0, 1.0],
            Self::E2 => [0.0, 1.0, 1.0],
            Self::Sol => [0.0, -1.0, 1.0],
            Self::Nil => [0.0, 0.0, 1.0],
            Self::R3 => [0.0, 0.0, 0.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Su2 => "su2",
            Self::Sl2r => "sl2r",
            Self::E2 => "e2",
            Self::Sol => "sol",
            Self::Nil => "nil",
            Self::R3 => "r3",
        }
    }
}

impl fmt::Display for BianchiClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BianchiClass {
    type Err = HomError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "su2" | "su(2)" => Ok(Self::Su2),
            "sl2r" | "sl(2,r)" => Ok(Self::Sl2r),
            "e2" | "e(2)" | "isom(r2)" => Ok(Self::E2),
            "sol" | "solv" => Ok(Self::Sol),
            "nil" => Ok(Self::Nil),
            "r3" => Ok(Self::R3),
            other => Err(HomError::UnknownClass(other.to_string())),
        }
    }
}

/// Diagonal left-invariant metric `diag(g_1, g_2, g_3)` in the Milnor frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomMetric {
    pub g: [f64; 3],
    pub class: BianchiClass,
    /// Volume of the reference cell at `g = (1, 1, 1)`.
    pub v0: f64,
}

impl HomMetric {
    pub fn new(class: BianchiClass, g: [f64; 3]) -> Result<Self, HomError> {
        Self::with_cell_volume(class, g, 1.0)
    }

    pub fn with_cell_volume(class: BianchiClass, g: [f64; 3], v0: f64) -> Result<Self, HomError> {
        if g.iter().any(|v| !(v.is_finite() && *v > 0.0))
            || SymMat3::diag(g, Basis::Frame).check_positive_definite().is_err()
        {
            return Err(HomError::InvalidCoefficients(g));
        }
        if !(v0.is_finite() && v0 > 0.0) {
            return Err(HomError::InvalidCellVolume(v0));
        }
        Ok(Self { g, class, v0 })
    }

    pub fn metric(&self) -> SymMat3 {
        SymMat3::diag(self.g, Basis::Frame)
    }

    /// Same class and cell, new coefficients. Callers guarantee positivity.
    pub fn with_coefficients(&self, g: [f64; 3]) -> Self {
        debug_assert!(g.iter().all(|v| *v > 0.0));
        Self { g, ..*self }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.with_coefficients(self.g.map(|v| v * c))
    }

    /// Max/min coefficient ratio minus one.
    pub fn anisotropy(&self) -> f64 {
        let max = self.g.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.g.iter().cloned().fold(f64::MAX, f64::min);
        max / min - 1.0
    }

    fn geometry(&self) -> FrameGeometry {
        FrameGeometry::new(self.class.signs(), &self.metric()).expect("validated coefficients are SPD")
    }
}

/// Curvature and Chern–Simons data of a left-invariant metric with arbitrary
/// (not necessarily diagonal) SPD frame components.
#[derive(Debug, Clone)]
pub struct FrameGeometry {
    metric: SymMat3,
    /// `e_a = Σ_i p[i][a] X_i`.
    p: [[f64; 3]; 3],
    p_inv: [[f64; 3]; 3],
    /// Orthonormal-frame Ricci tensor.
    pub ricci: [[f64; 3]; 3],
    pub scalar: f64,
    /// Orthonormal-frame Cotton–York tensor (symmetrized).
    pub cotton: [[f64; 3]; 3],
    /// Coefficient of the orthonormal volume form in `tr(ω∧dω + ⅔ω³)`.
    pub cs_density: f64,
}

fn cholesky(g: &SymMat3) -> [[f64; 3]; 3] {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][i] = (g.get(i, i) - s).sqrt();
            } else {
                l[i][j] = (g.get(i, j) - s) / l[j][j];
            }
        }
    }
    l
}

impl FrameGeometry {
    pub fn new(signs: [f64; 3], metric: &SymMat3) -> Result<Self, TensorError> {
        metric.check_positive_definite()?;
        let l = cholesky(metric);
        let l_inv = inv3(&l).expect("Cholesky factor of an SPD matrix is invertible");
        let mut p = [[0.0; 3]; 3];
        for i in 0..3 {
            for a in 0..3 {
                p[i][a] = l_inv[a][i];
            }
        }
        let p_inv = inv3(&p).expect("frame change is invertible");

        // Milnor-frame structure constants: [X_i, X_j] = c[k][i][j] X_k.
        let mut c = [[[0.0; 3]; 3]; 3];
        for (k, i, j) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            c[k][i][j] = signs[k];
            c[k][j][i] = -signs[k];
        }
        // Orthonormal-frame structure constants.
        let mut sc = [[[0.0; 3]; 3]; 3];
        for cc in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    let mut v = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            for k in 0..3 {
                                v += p[i][a] * p[j][b] * c[k][i][j] * p_inv[cc][k];
                            }
                        }
                    }
                    sc[cc][a][b] = v;
                }
            }
        }
        // gam[a][c][b] = <∇_{e_c} e_b, e_a>
        let mut gam = [[[0.0; 3]; 3]; 3];
        for a in 0..3 {
            for cc in 0..3 {
                for b in 0..3 {
                    gam[a][cc][b] = 0.5 * (sc[a][cc][b] - sc[cc][b][a] + sc[b][a][cc]);
                }
            }
        }
        // riem[l][k][i][j] = <R(e_i, e_j) e_k, e_l>
        let mut ricci = [[0.0; 3]; 3];
        for k in 0..3 {
            for j in 0..3 {
                let mut v = 0.0;
                for i in 0..3 {
                    // l = i in the Ricci contraction
                    for m in 0..3 {
                        v += gam[m][j][k] * gam[i][i][m] - gam[m][i][k] * gam[i][j][m] - sc[m][i][j] * gam[i][m][k];
                    }
                }
                ricci[k][j] = v;
            }
        }
        let ricci = sym_full(&ricci);
        let scalar = ricci[0][0] + ricci[1][1] + ricci[2][2];

        let mut schouten = ricci;
        for (i, row) in schouten.iter_mut().enumerate() {
            row[i] -= 0.25 * scalar;
        }
        // ∇_k S_lj with constant frame components
        let mut ds = [[[0.0; 3]; 3]; 3];
        for k in 0..3 {
            for l in 0..3 {
                for j in 0..3 {
                    ds[k][l][j] = -(0..3)
                        .map(|m| gam[m][k][l] * schouten[m][j] + gam[m][k][j] * schouten[l][m])
                        .sum::<f64>();
                }
            }
        }
        let mut cotton = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut v = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        v += levi_civita(i, k, l) * ds[k][l][j];
                    }
                }
                cotton[i][j] = v;
            }
        }
        let cotton = sym_full(&cotton);

        // tr(ω∧dω): ω^a_b = gam[a][d][b] θ^d, dθ^c = −½ sc[c][i][j] θ^i∧θ^j
        let mut t1 = 0.0;
        let mut t2 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for d in 0..3 {
                    for i in 0..3 {
                        for j in 0..3 {
                            let e = levi_civita(d, i, j);
                            if e == 0.0 {
                                continue;
                            }
                            for cc in 0..3 {
                                t1 += -0.5 * gam[a][d][b] * gam[b][cc][a] * sc[cc][i][j] * e;
                            }
                            // tr(ω∧ω∧ω) with (i, j, k) = (d, i, j)
                            for cc in 0..3 {
                                t2 += gam[a][d][b] * gam[b][i][cc] * gam[cc][j][a] * e;
                            }
                        }
                    }
                }
            }
        }
        let cs_density = t1 + 2.0 / 3.0 * t2;

        Ok(Self { metric: *metric, p, p_inv, ricci, scalar, cotton, cs_density })
    }

    pub fn sqrt_det(&self) -> f64 {
        self.metric.det().sqrt()
    }

    /// Orthonormal components to Milnor-frame upper components `T^ij`.
    pub fn to_upper(&self, t: &[[f64; 3]; 3]) -> SymMat3 {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut v = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        v += self.p[i][a] * self.p[j][b] * t[a][b];
                    }
                }
                out[i][j] = v;
            }
        }
        SymMat3::from_full(&out, Basis::Frame)
    }

    /// Orthonormal components to Milnor-frame mixed components `T^i_j`.
    pub fn to_mixed(&self, t: &[[f64; 3]; 3]) -> Mixed3 {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut v = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        v += self.p[i][a] * t[a][b] * self.p_inv[b][j];
                    }
                }
                out[i][j] = v;
            }
        }
        Mixed3::new(out, Basis::Frame)
    }

    /// Chern–Simons functional per cell of volume `v0` at unit coefficients.
    pub fn cs_invariant(&self, v0: f64) -> f64 {
        CS_NORMALIZATION * self.cs_density * v0 * self.sqrt_det()
    }

    /// `∫ √g (R − 2Λ)` per cell.
    pub fn einstein_hilbert(&self, v0: f64, lambda: f64) -> f64 {
        v0 * self.sqrt_det() * (self.scalar - 2.0 * lambda)
    }

    /// `C^ij` in Milnor-frame components.
    pub fn cotton_upper(&self) -> SymMat3 {
        self.to_upper(&self.cotton)
    }

    /// Einstein tensor `G^ij = R^ij − ½ R g^ij` in Milnor-frame components.
    pub fn einstein_upper(&self) -> SymMat3 {
        let mut e = self.ricci;
        for (i, row) in e.iter_mut().enumerate() {
            row[i] -= 0.5 * self.scalar;
        }
        self.to_upper(&e)
    }
}

fn sym_full(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut s = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = 0.5 * (m[i][j] + m[j][i]);
        }
    }
    s
}

/// Principal Ricci curvatures (mixed diagonal) and scalar curvature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameCurvature {
    pub ricci: [f64; 3],
    pub scalar: f64,
}

pub fn frame_curvature(m: &HomMetric) -> FrameCurvature {
    let geo = m.geometry();
    FrameCurvature { ricci: geo.to_mixed(&geo.ricci).diagonal(), scalar: geo.scalar }
}

/// `C^i_j` in the Milnor frame; diagonal for diagonal metrics.
pub fn cotton_hom(m: &HomMetric) -> Mixed3 {
    let geo = m.geometry();
    Mixed3::diag(geo.to_mixed(&geo.cotton).diagonal(), Basis::Frame)
}

/// Chern–Simons functional per reference cell.
pub fn cs_invariant(m: &HomMetric) -> f64 {
    m.geometry().cs_invariant(m.v0)
}

pub fn volume(m: &HomMetric) -> f64 {
    m.v0 * (m.g[0] * m.g[1] * m.g[2]).sqrt()
}

/// Full geometry for an arbitrary SPD perturbation of a homogeneous metric.
pub fn geometry_of(class: BianchiClass, metric: &SymMat3) -> Result<FrameGeometry, TensorError> {
    FrameGeometry::new(class.signs(), metric)
}

pub fn geometry(m: &HomMetric) -> FrameGeometry {
    m.geometry()
}

type FrameFn = dyn Fn(Point) -> [[f64; 3]; 3] + Send + Sync;

/// Coordinate realization of a left-invariant metric together with the
/// Milnor frame fields, for comparing the two backends.
#[derive(Clone)]
pub struct Realization {
    pub chart: ChartMetric,
    pub metric: HomMetric,
    /// `frame(p)[a]` holds the coordinate components of `X_a` at `p`.
    frame: Arc<FrameFn>,
    /// A point well inside the chart domain.
    pub sample_point: Point,
}

impl Realization {
    pub fn frame_at(&self, p: Point) -> [[f64; 3]; 3] {
        (self.frame)(p)
    }

    /// Coordinate tensor with lower indices to Milnor mixed components.
    pub fn lower_to_frame_mixed(&self, p: Point, t: &SymMat3) -> Mixed3 {
        let x = self.frame_at(p);
        let mut lower = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                let mut v = 0.0;
                for mu in 0..3 {
                    for nu in 0..3 {
                        v += x[a][mu] * x[b][nu] * t.get(mu, nu);
                    }
                }
                lower[a][b] = v;
            }
        }
        let mut out = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                out[a][b] = lower[a][b] / self.metric.g[a];
            }
        }
        Mixed3::new(out, Basis::Frame)
    }
}

fn metric_from_coframe(g: [f64; 3], theta: &[[f64; 3]; 3]) -> SymMat3 {
    let mut m = [[0.0; 3]; 3];
    for mu in 0..3 {
        for nu in 0..3 {
            m[mu][nu] = (0..3).map(|a| g[a] * theta[a][mu] * theta[a][nu]).sum();
        }
    }
    SymMat3::from_full(&m, Basis::Coordinate)
}

fn frame_from_coframe(theta: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let inv = inv3(theta).expect("coframe is nondegenerate inside the chart");
    let mut x = [[0.0; 3]; 3];
    for a in 0..3 {
        for mu in 0..3 {
            x[a][mu] = inv[mu][a];
        }
    }
    x
}

/// SU(2) left-invariant coframe in Euler angles `(θ, φ, ψ)`.
fn su2_coframe(p: Point) -> [[f64; 3]; 3] {
    let (st, ct) = p[0].sin_cos();
    let (sp, cp) = p[2].sin_cos();
    [[sp, -cp * st, 0.0], [-cp, -sp * st, 0.0], [0.0, -ct, -1.0]]
}

/// Heisenberg coframe `dx, dy, dz − x dy`.
fn nil_coframe(p: Point) -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -p[0], 1.0]]
}

/// Stencil step and order used by the realized charts.
pub const REALIZATION_STEP: f64 = 1.0 / 32.0;
pub const REALIZATION_ORDER: StencilOrder = StencilOrder::Eighth;

pub fn realize_chart(m: &HomMetric) -> Result<Realization, HomError> {
    let g = m.g;
    let h = REALIZATION_STEP;
    let (chart, frame, sample_point): (ChartMetric, Arc<FrameFn>, Point) = match m.class {
        BianchiClass::R3 => (
            ChartMetric::new(move |_| SymMat3::diag(g, Basis::Coordinate), h),
            Arc::new(|_| [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
            [0.0; 3],
        ),
        BianchiClass::Nil => (
            ChartMetric::new(move |p| metric_from_coframe(g, &nil_coframe(p)), h),
            Arc::new(|p| frame_from_coframe(&nil_coframe(p))),
            [0.0; 3],
        ),
        BianchiClass::Su2 => (
            ChartMetric::new(move |p| metric_from_coframe(g, &su2_coframe(p)), h)
                .with_guard(|p| p[0] > 0.0 && p[0] < std::f64::consts::PI),
            Arc::new(|p| frame_from_coframe(&su2_coframe(p))),
            [1.1, 0.3, 0.7],
        ),
        other => return Err(HomError::Unsupported(other)),
    };
    Ok(Realization { chart: chart.with_order(REALIZATION_ORDER), metric: *m, frame, sample_point })
}
