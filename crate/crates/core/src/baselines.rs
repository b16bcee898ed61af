//! Reference sample sets and the geometric diagnostics used to compare them
//! with low-discrepancy samples.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::lds::{halton_sequence, hammersley_set, mc_uniform, star_discrepancy, UnitPointSet};
use crate::ltft_core::{Generator, PhaseSpaceBox, SampleSet};

/// Wavelet grid with scales `r^k` and `round(r^k (M/L) p)` time samples per
/// scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwtGridParams {
    pub r: f64,
    pub p: f64,
    pub b0: f64,
    pub l: f64,
    pub m: usize,
    pub gamma: f64,
}

impl DwtGridParams {
    /// Largest admissible dilation step, `(γ + 1/2) / (γ - 1/2)`.
    pub fn r_max(&self) -> f64 {
        if self.gamma > 0.5 {
            (self.gamma + 0.5) / (self.gamma - 0.5)
        } else {
            f64::INFINITY
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 1.0 && self.r < self.r_max()) {
            return invalid(format!("r = {} outside (1, {})", self.r, self.r_max()));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return invalid(format!("p must be positive, got {}", self.p));
        }
        if !(self.gamma > 0.5 && self.b0 > 0.0 && self.l > self.b0 && self.m > 0) {
            return invalid("need gamma > 1/2, 0 < b0 < L and M > 0");
        }
        Ok(())
    }

    /// `(K0, K1) = (ln(b0/(γ+1/2)), ln(L/(γ-1/2))) / ln r`.
    pub fn exponent_range(&self) -> (f64, f64) {
        let ln_r = self.r.ln();
        ((self.b0 / (self.gamma + 0.5)).ln() / ln_r, (self.l / (self.gamma - 0.5)).ln() / ln_r)
    }

    /// Continuous size estimate `H(γ, p, q) (L - b0)`, with
    /// `q = ln r / ln((γ+1/2)/(γ-1/2))`.
    pub fn size_estimate(&self) -> f64 {
        let m = self.m as f64;
        m * self.p * (self.l - self.b0) / (self.l * self.r.ln() * (self.gamma + 0.5))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwtScale {
    pub k: i64,
    pub freq: f64,
    pub count: usize,
    /// Whether `freq <= L`; scales above the box are listed but not sampled.
    pub in_box: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DwtGrid {
    pub params: DwtGridParams,
    pub scales: Vec<DwtScale>,
    /// Points `(a, r^k γ, 0)` inside `[-M/2L, M/2L] x [0, L] x [0, 1]`.
    pub samples: SampleSet,
    pub estimate: f64,
}

pub fn dwt_grid(params: DwtGridParams) -> Result<DwtGrid> {
    params.validate()?;
    let (k0, k1) = params.exponent_range();
    let (lo, hi) = (k0.ceil() as i64, k1.ceil() as i64);
    let scales: Vec<DwtScale> = (lo..=hi)
        .map(|k| {
            let rk = params.r.powi(k as i32);
            let count = ((rk * params.m as f64 / params.l * params.p).round() as usize).max(1);
            let freq = rk * params.gamma;
            DwtScale { k, freq, count, in_box: freq <= params.l }
        })
        .collect();
    if !scales.iter().any(|s| s.in_box) {
        return invalid("no DWT scale inside the frequency range");
    }
    let bx = PhaseSpaceBox::for_signal(params.m, params.l, 0.0)?;
    let (t_lo, t_hi) = bx.time;
    let mut points = Vec::new();
    for s in scales.iter().filter(|s| s.in_box) {
        let step = (t_hi - t_lo) / s.count as f64;
        points.extend((0..s.count).map(|i| [t_lo + (i as f64 + 0.5) * step, s.freq, 0.0]));
    }
    let samples = SampleSet::new(points, bx, Generator::DwtGrid)?;
    Ok(DwtGrid { params, scales, samples, estimate: params.size_estimate() })
}

impl DwtGrid {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.scales.iter().filter(|s| s.in_box).count()
    }

    /// Time mapped from the signal interval and frequency from
    /// `[lowest scale, L]` onto the unit square.
    pub fn unit_points(&self) -> Result<UnitPointSet> {
        let (t_lo, t_hi) = self.samples.bx.time;
        let f_lo = self.scales.iter().find(|s| s.in_box).map(|s| s.freq).unwrap_or(0.0);
        let f_span = self.params.l - f_lo;
        let below_one = 1.0 - f64::EPSILON / 2.0;
        let pts: Vec<Vec<f64>> = self
            .samples
            .points
            .iter()
            .map(|&[a, b, _]| {
                let v = if f_span > 0.0 { (b - f_lo) / f_span } else { 0.0 };
                vec![(a - t_lo) / (t_hi - t_lo), v.min(below_one)]
            })
            .collect();
        UnitPointSet::from_points(&pts, 2, Generator::DwtGrid)
    }
}

/// Settings of the small DWT figures: `L = 4, γ = 1, b0 = 1/2, M = 5`.
pub const DWT_FIGURE_SETTING: DwtGridParams = DwtGridParams { r: 2.0, p: 1.0, b0: 0.5, l: 4.0, m: 5, gamma: 1.0 };

/// DWT grid of about `target` points whose scale and time resolutions grow
/// together: `r` is chosen so the grid has `round(sqrt(target))` scales and
/// `p` so the total count is closest to `target`.
///
/// With `r` held fixed the empty band between the top scale and `L` keeps
/// the discrepancy from decaying, so refinement has to shrink `r` as well.
pub fn dwt_balanced(target: usize, base: DwtGridParams) -> Result<DwtGrid> {
    if target == 0 {
        return invalid("target size must be positive");
    }
    let rows_wanted = (target as f64).sqrt().round().max(1.0) as usize;
    let r_hi = base.r_max().min(16.0);
    let steps = 2000;
    let candidates: Vec<(f64, usize)> = (1..steps)
        .map(|i| 1.0 + (r_hi - 1.0) * i as f64 / steps as f64)
        .filter_map(|r| dwt_grid(DwtGridParams { r, p: 1.0, ..base }).ok().map(|g| (r, g.rows())))
        .collect();
    let best_rows = candidates
        .iter()
        .map(|c| c.1)
        .min_by_key(|&rows| rows.abs_diff(rows_wanted))
        .ok_or_else(|| Error::InvalidParameter("no admissible dilation step".into()))?;
    let matching: Vec<f64> = candidates.iter().filter(|c| c.1 == best_rows).map(|c| c.0).collect();
    let r = matching[matching.len() / 2];

    dwt_with_size(target, DwtGridParams { r, ..base })
}

/// DWT grid with the dilation step of `base` and `p` tuned so the point
/// count is as close to `target` as the step allows.
pub fn dwt_with_size(target: usize, base: DwtGridParams) -> Result<DwtGrid> {
    if target == 0 {
        return invalid("target size must be positive");
    }
    // Count is nondecreasing in p; bisect on log p for the closest size.
    let size = |p: f64| dwt_grid(DwtGridParams { p, ..base }).map(|g| g.len());
    let (mut lo, mut hi) = (1e-6f64, 1e6f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if size(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let pick = if target.abs_diff(size(lo)?) <= size(hi)?.abs_diff(target) { lo } else { hi };
    dwt_grid(DwtGridParams { p: pick, ..base })
}

/// Tensor grid of cell midpoints.
pub fn regular_grid(n_time: usize, n_freq: usize, n_osc: usize, bx: &PhaseSpaceBox) -> Result<SampleSet> {
    if n_time == 0 || n_freq == 0 || n_osc == 0 {
        return invalid("grid counts must be >= 1");
    }
    let mid = |(lo, hi): (f64, f64), n: usize, i: usize| lo + (i as f64 + 0.5) * (hi - lo) / n as f64;
    let mut points = Vec::with_capacity(n_time * n_freq * n_osc);
    for i in 0..n_time {
        for j in 0..n_freq {
            for k in 0..n_osc {
                points.push([mid(bx.time, n_time, i), mid(bx.freq, n_freq, j), mid(bx.osc, n_osc, k)]);
            }
        }
    }
    SampleSet::new(points, *bx, Generator::Regular)
}

/// `side^dim` midpoint lattice in the unit cube.
pub fn midpoint_lattice(side: usize, dim: usize) -> Result<UnitPointSet> {
    if side == 0 || dim == 0 {
        return invalid("lattice side and dimension must be >= 1");
    }
    let n = side.pow(dim as u32);
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|mut i| {
            (0..dim)
                .map(|_| {
                    let c = i % side;
                    i /= side;
                    (c as f64 + 0.5) / side as f64
                })
                .collect()
        })
        .collect();
    UnitPointSet::from_points(&pts, dim, Generator::Regular)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointFamily {
    Hammersley,
    Halton,
    /// Mean over seeds `0..seeds`.
    Mc { seeds: u64 },
    /// Balanced DWT grids in the small-figure setting (2D only).
    DwtGrid,
    /// Square midpoint lattice with `round(N^(1/dim))` points per side.
    Lattice,
}

impl PointFamily {
    pub fn name(&self) -> &'static str {
        match self {
            PointFamily::Hammersley => "hammersley",
            PointFamily::Halton => "halton",
            PointFamily::Mc { .. } => "mc",
            PointFamily::DwtGrid => "dwt",
            PointFamily::Lattice => "lattice",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    /// Requested size.
    pub target: usize,
    /// Actual size; grids only approximate the target.
    pub n: usize,
    pub d_star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingTable {
    pub family: PointFamily,
    pub dim: usize,
    pub rows: Vec<ScalingRow>,
    pub slope: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Exact star discrepancy of `family` at each size and the fitted rate.
pub fn discrepancy_scaling(family: PointFamily, ns: &[usize], dim: usize) -> Result<ScalingTable> {
    if ns.len() < 2 {
        return invalid("need at least two sizes for a slope");
    }
    if matches!(family, PointFamily::DwtGrid) && dim != 2 {
        return Err(Error::UnsupportedDimension(dim));
    }
    let rows = ns
        .iter()
        .map(|&target| -> Result<ScalingRow> {
            let (n, d_star) = match family {
                PointFamily::Hammersley => (target, star_discrepancy(&hammersley_set(target, dim)?)?.star_value),
                PointFamily::Halton => (target, star_discrepancy(&halton_sequence(target, dim)?)?.star_value),
                PointFamily::Mc { seeds } => {
                    if seeds == 0 {
                        return invalid("need at least one seed");
                    }
                    let mut acc = 0.0;
                    for seed in 0..seeds {
                        acc += star_discrepancy(&mc_uniform(target, dim, seed)?)?.star_value;
                    }
                    (target, acc / seeds as f64)
                }
                PointFamily::DwtGrid => {
                    let pts = dwt_balanced(target, DWT_FIGURE_SETTING)?.unit_points()?;
                    (pts.len(), star_discrepancy(&pts)?.star_value)
                }
                PointFamily::Lattice => {
                    let side = (target as f64).powf(1.0 / dim as f64).round().max(1.0) as usize;
                    let pts = midpoint_lattice(side, dim)?;
                    (pts.len(), star_discrepancy(&pts)?.star_value)
                }
            };
            Ok(ScalingRow { target, n, d_star })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.d_star).collect();
    Ok(ScalingTable { family, dim, slope: loglog_slope(&xs, &ys), rows })
}

/// Default oscillation half-width of the 3D funnel.
pub const DEFAULT_FUNNEL_NU: f64 = 0.25;

/// Phase-space point `(a', b')`, optionally with an oscillation `c'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunnelQuery {
    pub a: f64,
    pub b: f64,
    pub c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    /// `None` for queries whose box leaves the time side.
    pub values: Vec<Option<f64>>,
    pub mean: f64,
    /// `max / min` over the valid queries.
    pub ratio: f64,
    pub nu: f64,
}

impl CoverageReport {
    pub fn flagged(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

/// Funnel coverage at each query: `(mu / N) #{n : g_n in H(a',b'[,c'])} /
/// vol H`, with `H` the box `[a' ± γ/b'] x [b' ± b'/γ] (x [c' ± ν] ∩ [0,1])`.
pub fn funnel_coverage(samples: &SampleSet, queries: &[FunnelQuery], gamma: f64, nu: f64) -> Result<CoverageReport> {
    if !(gamma > 1.0) || !(nu > 0.0) {
        return invalid("funnel coverage needs gamma > 1 and nu > 0");
    }
    let bx = samples.bx;
    let area = (bx.time.1 - bx.time.0) * (bx.freq.1 - bx.freq.0);
    let n = samples.len().max(1) as f64;
    let values: Vec<Option<f64>> = queries
        .par_iter()
        .map(|q| {
            let (dt, db) = (gamma / q.b, q.b / gamma);
            if !(q.b > 0.0) || q.a - dt < bx.time.0 || q.a + dt > bx.time.1 {
                return None;
            }
            let osc = q.c.map(|c| ((c - nu).max(bx.osc.0), (c + nu).min(bx.osc.1)));
            let count = samples
                .points
                .iter()
                .filter(|&&[a, b, c]| {
                    (a - q.a).abs() <= dt
                        && (b - q.b).abs() <= db
                        && osc.is_none_or(|(lo, hi)| c >= lo && c <= hi)
                })
                .count();
            let (mu, vol) = match osc {
                Some((lo, hi)) => (area * (bx.osc.1 - bx.osc.0), 4.0 * (hi - lo)),
                None => (area, 4.0),
            };
            Some(mu / n * count as f64 / vol)
        })
        .collect();
    let valid: Vec<f64> = values.iter().flatten().copied().collect();
    let mean = if valid.is_empty() { 0.0 } else { valid.iter().sum::<f64>() / valid.len() as f64 };
    let max = valid.iter().cloned().fold(0.0, f64::max);
    let min = valid.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = if valid.is_empty() {
        f64::NAN
    } else if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    };
    Ok(CoverageReport { values, mean, ratio, nu })
}

/// `rows x cols` queries with log-spaced frequencies in `[f_lo, f_hi]` and
/// times spread over the part of the box at least `γ/b'` from the edges.
pub fn interior_queries(bx: &PhaseSpaceBox, f_lo: f64, f_hi: f64, gamma: f64, rows: usize, cols: usize) -> Vec<FunnelQuery> {
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let t = if rows > 1 { i as f64 / (rows - 1) as f64 } else { 0.5 };
        let b = f_lo * (f_hi / f_lo).powf(t);
        let margin = gamma / b;
        let (lo, hi) = (bx.time.0 + margin, bx.time.1 - margin);
        for j in 0..cols {
            let a = lo + (j as f64 + 0.5) * (hi - lo) / cols as f64;
            out.push(FunnelQuery { a, b, c: None });
        }
    }
    out
}
