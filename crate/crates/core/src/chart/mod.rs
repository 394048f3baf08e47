//! Pointwise curvature of coordinate metrics by nested finite differences.
//!
//! Every derivative is a central stencil of the chart's [`StencilOrder`]
//! (4th order, 5 points, by default) with step `h`. Higher derivatives come
//! from nesting first-derivative passes:
//! Christoffel symbols from metric samples, Ricci from Christoffel samples,
//! Cotton–York from Schouten samples and the divergence from Cotton samples.
//! Intermediate fields are memoized on the integer offset lattice around the
//! evaluation point, so a full divergence evaluation touches each lattice
//! point once per level.
//!
//! Conventions:
//! - `R^i_jkl = ∂_k Γ^i_lj − ∂_l Γ^i_kj + Γ^i_km Γ^m_lj − Γ^i_lm Γ^m_kj`,
//!   `R_jl = R^i_jil`, so the round sphere has positive scalar curvature.
//! - `ε_123 = +√g` in the chart's (assumed right-handed) coordinate order.
//! - `C_ij = ε_i^kl ∇_k S_lj` with Schouten `S_ij = R_ij − R g_ij / 4`.

pub mod samples;

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::tensor::{invert, levi_civita, Basis, SymMat3, TensorError};

pub type Point = [f64; 3];

type MetricFn = dyn Fn(Point) -> SymMat3 + Send + Sync;
type GuardFn = dyn Fn(Point) -> bool + Send + Sync;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChartError {
    #[error("stencil point {0:?} lies outside the chart domain")]
    OutsideDomain(Point),
    #[error("metric sample at {point:?}: {source}")]
    Definiteness {
        point: Point,
        #[source]
        source: TensorError,
    },
}

/// Accuracy order of the central first-derivative stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StencilOrder {
    #[default]
    Fourth,
    Sixth,
    Eighth,
}

impl StencilOrder {
    /// `(offset, weight)` pairs and the common denominator.
    fn weights(self) -> (&'static [(i32, f64)], f64) {
        match self {
            StencilOrder::Fourth => (&[(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)], 12.0),
            StencilOrder::Sixth => (&[(-3, -1.0), (-2, 9.0), (-1, -45.0), (1, 45.0), (2, -9.0), (3, 1.0)], 60.0),
            StencilOrder::Eighth => (
                &[(-4, 3.0), (-3, -32.0), (-2, 168.0), (-1, -672.0), (1, 672.0), (2, -168.0), (3, 32.0), (4, -3.0)],
                840.0,
            ),
        }
    }

    pub fn order(self) -> u32 {
        match self {
            StencilOrder::Fourth => 4,
            StencilOrder::Sixth => 6,
            StencilOrder::Eighth => 8,
        }
    }
}

/// A coordinate metric field with its stencil step and domain guard.
#[derive(Clone)]
pub struct ChartMetric {
    metric: Arc<MetricFn>,
    guard: Arc<GuardFn>,
    pub h: f64,
    pub order: StencilOrder,
}

impl std::fmt::Debug for ChartMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChartMetric").field("h", &self.h).field("order", &self.order).finish_non_exhaustive()
    }
}

impl ChartMetric {
    /// Chart defined everywhere. Components returned by `metric` are treated
    /// as coordinate components regardless of their tag.
    pub fn new(metric: impl Fn(Point) -> SymMat3 + Send + Sync + 'static, h: f64) -> Self {
        Self { metric: Arc::new(metric), guard: Arc::new(|_| true), h, order: StencilOrder::default() }
    }

    pub fn with_guard(mut self, guard: impl Fn(Point) -> bool + Send + Sync + 'static) -> Self {
        self.guard = Arc::new(guard);
        self
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_order(mut self, order: StencilOrder) -> Self {
        self.order = order;
        self
    }

    pub fn admits(&self, p: Point) -> bool {
        (self.guard)(p)
    }

    pub fn metric_at(&self, p: Point) -> SymMat3 {
        let mut g = (self.metric)(p);
        g.basis = Basis::Coordinate;
        g
    }
}

/// `e^{2φ} g` for a scalar field φ.
pub fn conformal_rescale(
    chart: &ChartMetric,
    phi: impl Fn(Point) -> f64 + Send + Sync + 'static,
) -> ChartMetric {
    let inner = chart.metric.clone();
    ChartMetric {
        metric: Arc::new(move |p| inner(p).scale((2.0 * phi(p)).exp())),
        guard: chart.guard.clone(),
        h: chart.h,
        order: chart.order,
    }
}

/// Levi-Civita connection `Γ^k_ij`, symmetric in the lower pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffel3 {
    c: [[f64; 6]; 3],
}

const SYM: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];

impl Christoffel3 {
    fn from_full(g: &[[[f64; 3]; 3]; 3]) -> Self {
        let mut c = [[0.0; 6]; 3];
        for k in 0..3 {
            for i in 0..3 {
                for j in i..3 {
                    c[k][SYM[i][j]] = 0.5 * (g[k][i][j] + g[k][j][i]);
                }
            }
        }
        Self { c }
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[k][SYM[i][j]]
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

type Off = [i32; 3];
type Full = [[f64; 3]; 3];

#[derive(Clone, Copy)]
struct Level1 {
    g: SymMat3,
    ginv: SymMat3,
    sqrt_det: f64,
    gamma: [[[f64; 3]; 3]; 3],
}

#[derive(Clone, Copy)]
struct Level2 {
    ricci: Full,
    scalar: f64,
}

#[derive(Clone, Copy)]
struct Level3 {
    raw: Full,
    sym: Full,
    upper: Full,
}

/// Memoized nested-stencil evaluator around one base point.
struct Probe<'a> {
    chart: &'a ChartMetric,
    base: Point,
    h: f64,
    l0: HashMap<Off, SymMat3>,
    l1: HashMap<Off, Level1>,
    l2: HashMap<Off, Level2>,
    l3: HashMap<Off, Level3>,
}

#[inline]
fn shift(o: Off, axis: usize, n: i32) -> Off {
    let mut s = o;
    s[axis] += n;
    s
}

impl<'a> Probe<'a> {
    fn new(chart: &'a ChartMetric, base: Point) -> Self {
        Self {
            chart,
            base,
            h: chart.h,
            l0: HashMap::new(),
            l1: HashMap::new(),
            l2: HashMap::new(),
            l3: HashMap::new(),
        }
    }

    fn point(&self, o: Off) -> Point {
        [
            self.base[0] + self.h * o[0] as f64,
            self.base[1] + self.h * o[1] as f64,
            self.base[2] + self.h * o[2] as f64,
        ]
    }

    fn metric(&mut self, o: Off) -> Result<SymMat3, ChartError> {
        if let Some(g) = self.l0.get(&o) {
            return Ok(*g);
        }
        let p = self.point(o);
        if !self.chart.admits(p) {
            return Err(ChartError::OutsideDomain(p));
        }
        let g = self.chart.metric_at(p);
        g.check_positive_definite()
            .map_err(|source| ChartError::Definiteness { point: p, source })?;
        self.l0.insert(o, g);
        Ok(g)
    }

    /// Stencil derivative along `axis` of a vector-valued field sampled by `f`.
    fn diff<const N: usize>(
        &mut self,
        o: Off,
        axis: usize,
        mut f: impl FnMut(&mut Self, Off) -> Result<[f64; N], ChartError>,
    ) -> Result<[f64; N], ChartError> {
        let (stencil, denom) = self.chart.order.weights();
        let mut acc = [0.0; N];
        for &(n, w) in stencil {
            let v = f(self, shift(o, axis, n))?;
            for (a, x) in acc.iter_mut().zip(v) {
                *a += w * x;
            }
        }
        let scale = 1.0 / (denom * self.h);
        Ok(acc.map(|a| a * scale))
    }

    fn level1(&mut self, o: Off) -> Result<Level1, ChartError> {
        if let Some(v) = self.l1.get(&o) {
            return Ok(*v);
        }
        let g = self.metric(o)?;
        let ginv = invert(&g).map_err(|source| ChartError::Definiteness { point: self.point(o), source })?;
        // dg[a] = ∂_a g (six components)
        let mut dg = [[0.0; 6]; 3];
        for (a, d) in dg.iter_mut().enumerate() {
            *d = self.diff(o, a, |s, q| Ok(s.metric(q)?.c))?;
        }
        let dgc = |a: usize, i: usize, j: usize| dg[a][SYM[i][j]];
        let mut gamma = [[[0.0; 3]; 3]; 3];
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    gamma[k][i][j] = 0.5
                        * (0..3)
                            .map(|l| ginv.get(k, l) * (dgc(i, j, l) + dgc(j, i, l) - dgc(l, i, j)))
                            .sum::<f64>();
                }
            }
        }
        let v = Level1 { g, ginv, sqrt_det: g.det().sqrt(), gamma };
        self.l1.insert(o, v);
        Ok(v)
    }

    fn level2(&mut self, o: Off) -> Result<Level2, ChartError> {
        if let Some(v) = self.l2.get(&o) {
            return Ok(*v);
        }
        let base = self.level1(o)?;
        let gm = &base.gamma;
        // dgam[a][k][i][j] = ∂_a Γ^k_ij
        let mut dgam = [[[[0.0; 3]; 3]; 3]; 3];
        for (a, d) in dgam.iter_mut().enumerate() {
            let flat = self.diff(o, a, |s, q| {
                let l = s.level1(q)?;
                Ok(flatten27(&l.gamma))
            })?;
            *d = unflatten27(&flat);
        }
        let mut ric = [[0.0; 3]; 3];
        for j in 0..3 {
            for l in 0..3 {
                let mut v = 0.0;
                for i in 0..3 {
                    v += dgam[i][i][l][j] - dgam[l][i][i][j];
                    for m in 0..3 {
                        v += gm[i][i][m] * gm[m][l][j] - gm[i][l][m] * gm[m][i][j];
                    }
                }
                ric[j][l] = v;
            }
        }
        let ricci = symmetrize(&ric);
        let scalar = contract(&base.ginv, &ricci);
        let v = Level2 { ricci, scalar };
        self.l2.insert(o, v);
        Ok(v)
    }

    fn schouten(&mut self, o: Off) -> Result<Full, ChartError> {
        let l2 = self.level2(o)?;
        let g = self.level1(o)?.g;
        let mut s = l2.ricci;
        for (i, row) in s.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v -= 0.25 * l2.scalar * g.get(i, j);
            }
        }
        Ok(s)
    }

    /// `C_ij = ε_i^kl ∇_k T_lj` for a symmetric field `T` sampled by `field`.
    fn curl(
        &mut self,
        o: Off,
        mut field: impl FnMut(&mut Self, Off) -> Result<Full, ChartError>,
    ) -> Result<Full, ChartError> {
        let base = self.level1(o)?;
        let t0 = field(self, o)?;
        let mut dt = [[[0.0; 3]; 3]; 3];
        for (k, d) in dt.iter_mut().enumerate() {
            let flat = self.diff(o, k, |s, q| Ok(flatten9(&field(s, q)?)))?;
            *d = unflatten9(&flat);
        }
        let gm = &base.gamma;
        // cov[k][l][j] = ∇_k T_lj
        let mut cov = [[[0.0; 3]; 3]; 3];
        for k in 0..3 {
            for l in 0..3 {
                for j in 0..3 {
                    let mut v = dt[k][l][j];
                    for m in 0..3 {
                        v -= gm[m][k][l] * t0[m][j] + gm[m][k][j] * t0[l][m];
                    }
                    cov[k][l][j] = v;
                }
            }
        }
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut v = 0.0;
                for a in 0..3 {
                    let gia = base.g.get(i, a);
                    if gia == 0.0 {
                        continue;
                    }
                    for k in 0..3 {
                        for l in 0..3 {
                            let e = levi_civita(a, k, l);
                            if e != 0.0 {
                                v += gia * e * cov[k][l][j];
                            }
                        }
                    }
                }
                c[i][j] = v / base.sqrt_det;
            }
        }
        Ok(c)
    }

    fn level3(&mut self, o: Off) -> Result<Level3, ChartError> {
        if let Some(v) = self.l3.get(&o) {
            return Ok(*v);
        }
        let raw = self.curl(o, |s, q| s.schouten(q))?;
        let sym = symmetrize(&raw);
        let ginv = self.level1(o)?.ginv;
        let upper = raise_both(&ginv, &sym);
        let v = Level3 { raw, sym, upper };
        self.l3.insert(o, v);
        Ok(v)
    }

    fn cotton_via_ricci(&mut self, o: Off) -> Result<Full, ChartError> {
        let ric = self.curl(o, |s, q| Ok(s.level2(q)?.ricci))?;
        let rg = self.curl(o, |s, q| {
            let r = s.level2(q)?.scalar;
            let g = s.level1(q)?.g;
            Ok(g.to_full().map(|row| row.map(|v| r * v)))
        })?;
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] = ric[i][j] - 0.25 * rg[i][j];
            }
        }
        Ok(symmetrize(&c))
    }

    fn divergence(&mut self, o: Off) -> Result<[f64; 3], ChartError> {
        let base = self.level1(o)?;
        let c0 = self.level3(o)?.upper;
        let mut div = [0.0; 3];
        for i in 0..3 {
            let d = self.diff(o, i, |s, q| Ok(s.level3(q)?.upper[i]))?;
            for j in 0..3 {
                div[j] += d[j];
            }
        }
        let gm = &base.gamma;
        for (j, dj) in div.iter_mut().enumerate() {
            for i in 0..3 {
                for m in 0..3 {
                    *dj += gm[i][i][m] * c0[m][j] + gm[j][i][m] * c0[i][m];
                }
            }
        }
        Ok(div)
    }
}

fn flatten9(m: &Full) -> [f64; 9] {
    let mut out = [0.0; 9];
    for i in 0..3 {
        out[3 * i..3 * i + 3].copy_from_slice(&m[i]);
    }
    out
}

fn unflatten9(v: &[f64; 9]) -> Full {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        m[i].copy_from_slice(&v[3 * i..3 * i + 3]);
    }
    m
}

fn flatten27(g: &[[[f64; 3]; 3]; 3]) -> [f64; 27] {
    let mut out = [0.0; 27];
    for k in 0..3 {
        out[9 * k..9 * k + 9].copy_from_slice(&flatten9(&g[k]));
    }
    out
}

fn unflatten27(v: &[f64; 27]) -> [[[f64; 3]; 3]; 3] {
    let mut g = [[[0.0; 3]; 3]; 3];
    for (k, gk) in g.iter_mut().enumerate() {
        let mut chunk = [0.0; 9];
        chunk.copy_from_slice(&v[9 * k..9 * k + 9]);
        *gk = unflatten9(&chunk);
    }
    g
}

fn symmetrize(m: &Full) -> Full {
    let mut s = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = 0.5 * (m[i][j] + m[j][i]);
        }
    }
    s
}

fn contract(ginv: &SymMat3, t: &Full) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += ginv.get(i, j) * t[i][j];
        }
    }
    s
}

fn raise_both(ginv: &SymMat3, t: &Full) -> Full {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut v = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    v += ginv.get(i, a) * ginv.get(j, b) * t[a][b];
                }
            }
            out[i][j] = v;
        }
    }
    out
}

fn sym(m: &Full) -> SymMat3 {
    SymMat3::from_full(m, Basis::Coordinate)
}

const ORIGIN: Off = [0, 0, 0];

pub fn christoffel(chart: &ChartMetric, p: Point) -> Result<Christoffel3, ChartError> {
    Ok(Christoffel3::from_full(&Probe::new(chart, p).level1(ORIGIN)?.gamma))
}

/// Ricci tensor (lower indices) and scalar curvature.
pub fn ricci_scalar(chart: &ChartMetric, p: Point) -> Result<(SymMat3, f64), ChartError> {
    let l2 = Probe::new(chart, p).level2(ORIGIN)?;
    Ok((sym(&l2.ricci), l2.scalar))
}

/// Cotton–York tensor with lower indices, symmetrized.
pub fn cotton_york(chart: &ChartMetric, p: Point) -> Result<SymMat3, ChartError> {
    Ok(sym(&Probe::new(chart, p).level3(ORIGIN)?.sym))
}

/// `∇_i C^ij`.
pub fn divergence_cotton(chart: &ChartMetric, p: Point) -> Result<[f64; 3], ChartError> {
    Probe::new(chart, p).divergence(ORIGIN)
}

/// Everything the structural checks need at one point, sharing one stencil cache.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCurvature {
    pub metric: SymMat3,
    pub ricci: SymMat3,
    pub scalar: f64,
    /// Cotton–York before symmetrization.
    pub cotton_raw: [[f64; 3]; 3],
    pub cotton: SymMat3,
    /// Same tensor assembled from separately differentiated `R_ij` and `R g_ij`.
    pub cotton_from_ricci: SymMat3,
    pub divergence: Option<[f64; 3]>,
}

impl PointCurvature {
    /// `max |C_ij − C_ji|` of the unsymmetrized tensor.
    pub fn symmetry_residual(&self) -> f64 {
        let c = &self.cotton_raw;
        let mut m = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                m = m.max((c[i][j] - c[j][i]).abs());
            }
        }
        m
    }

    /// `|g^ij C_ij|`.
    pub fn trace(&self) -> f64 {
        let ginv = invert(&self.metric).expect("metric validated during evaluation");
        contract(&ginv, &self.cotton.to_full()).abs()
    }

    /// `sqrt(C_ij C^ij)`.
    pub fn cotton_norm(&self) -> f64 {
        crate::tensor::norm2(&self.cotton, &self.metric).map(f64::sqrt).unwrap_or(f64::NAN)
    }

    pub fn divergence_norm(&self) -> Option<f64> {
        self.divergence.map(|d| d.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}

pub fn analyze(chart: &ChartMetric, p: Point, with_divergence: bool) -> Result<PointCurvature, ChartError> {
    let mut probe = Probe::new(chart, p);
    let divergence = if with_divergence { Some(probe.divergence(ORIGIN)?) } else { None };
    let l1 = probe.level1(ORIGIN)?;
    let l2 = probe.level2(ORIGIN)?;
    let l3 = probe.level3(ORIGIN)?;
    let alt = probe.cotton_via_ricci(ORIGIN)?;
    Ok(PointCurvature {
        metric: l1.g,
        ricci: sym(&l2.ricci),
        scalar: l2.scalar,
        cotton_raw: l3.raw,
        cotton: sym(&l3.sym),
        cotton_from_ricci: sym(&alt),
        divergence,
    })
}
