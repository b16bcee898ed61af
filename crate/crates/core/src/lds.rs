//! Low-discrepancy point generation in `[0,1)^d`, affine rescaling onto a
//! phase-space box and exact star discrepancy for small point sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::ltft_core::{Generator, PhaseSpaceBox, SampleSet};

/// Prime bases for coordinates 0..8.
pub const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

pub const MAX_DIM: usize = PRIMES.len();

/// Ordered points in `[0,1)^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitPointSet {
    coords: Vec<f64>,
    dim: usize,
    pub generator: Generator,
    pub seed: Option<u64>,
}

impl UnitPointSet {
    /// Wraps externally produced points. Every coordinate must lie in `[0,1)`.
    pub fn from_points(points: &[Vec<f64>], dim: usize, generator: Generator) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be at least 1");
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return invalid(format!("point of dimension {} in a {dim}-d set", p.len()));
            }
            if p.iter().any(|&x| !(0.0..1.0).contains(&x)) {
                return invalid("unit point coordinate outside [0,1)");
            }
            coords.extend_from_slice(p);
        }
        Ok(Self { coords, dim, generator, seed: None })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }
}

/// Van der Corput digit reversal of `n` in `base`.
pub fn radical_inverse(mut n: u64, base: u32) -> Result<f64> {
    if base < 2 {
        return invalid(format!("radical inverse base {base} < 2"));
    }
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut acc = 0.0;
    while n > 0 {
        acc += (n % b) as f64 * scale;
        n /= b;
        scale *= inv;
    }
    // Long all-(b-1) digit strings can round up to exactly 1.0.
    Ok(acc.min(1.0 - f64::EPSILON / 2.0))
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        return Err(Error::UnsupportedDimension(dim));
    }
    Ok(())
}

/// First `count` points of the Halton sequence. Indexing starts at 1 so the
/// origin is never produced.
pub fn halton_sequence(count: usize, dim: usize) -> Result<UnitPointSet> {
    check_dim(dim)?;
    if dim == 0 || count == 0 {
        return invalid("halton sequence needs count >= 1 and dim >= 1");
    }
    let mut coords = Vec::with_capacity(count * dim);
    for n in 0..count {
        for &p in &PRIMES[..dim] {
            coords.push(radical_inverse(n as u64 + 1, p)?);
        }
    }
    Ok(UnitPointSet { coords, dim, generator: Generator::Halton, seed: None })
}

/// Hammersley set of `count` points: `(n/N, phi_2(n), phi_3(n), ...)` for
/// `n = 0..N`, so point 0 is the origin.
pub fn hammersley_set(count: usize, dim: usize) -> Result<UnitPointSet> {
    check_dim(dim)?;
    if dim < 2 {
        return invalid("hammersley set needs dim >= 2; use halton_sequence for d = 1");
    }
    if count == 0 {
        return invalid("hammersley set needs count >= 1");
    }
    let mut coords = Vec::with_capacity(count * dim);
    for n in 0..count {
        coords.push(n as f64 / count as f64);
        for &p in &PRIMES[..dim - 1] {
            coords.push(radical_inverse(n as u64, p)?);
        }
    }
    Ok(UnitPointSet { coords, dim, generator: Generator::Hammersley, seed: None })
}

/// Seeded i.i.d. uniform points.
pub fn mc_uniform(count: usize, dim: usize, seed: u64) -> Result<UnitPointSet> {
    if dim == 0 || count == 0 {
        return invalid("mc_uniform needs count >= 1 and dim >= 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..count * dim).map(|_| rng.gen::<f64>()).collect();
    Ok(UnitPointSet { coords, dim, generator: Generator::Mc, seed: Some(seed) })
}

/// Maps unit points coordinate-wise onto `(time, freq, osc)` of `bx`.
pub fn scale_to_box(points: &UnitPointSet, bx: &PhaseSpaceBox) -> Result<SampleSet> {
    if points.dim() != 3 {
        return invalid(format!("{}-d points for a 3-d phase-space box", points.dim()));
    }
    let sides = [bx.time, bx.freq, bx.osc];
    let pts = points
        .iter()
        .map(|u| {
            let mut g = [0.0; 3];
            for j in 0..3 {
                let (lo, hi) = sides[j];
                g[j] = lo + u[j] * (hi - lo);
            }
            g
        })
        .collect();
    SampleSet::new(pts, *bx, points.generator)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscrepancyMethod {
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscrepancyReport {
    pub star_value: f64,
    pub n: usize,
    pub method: DiscrepancyMethod,
}

/// Largest point count accepted by the exact evaluator for each dimension.
pub fn exact_budget(dim: usize) -> usize {
    match dim {
        1 => 1 << 20,
        2 => 1 << 10,
        3 => 1 << 7,
        _ => 0,
    }
}

/// Exact star discrepancy over anchored boxes `[0,u)`.
///
/// Candidate corners come from the coordinate values plus 1. At each corner the
/// open count bounds `vol - A/N` and the closed count bounds `A/N - vol`.
pub fn star_discrepancy(points: &UnitPointSet) -> Result<DiscrepancyReport> {
    let n = points.len();
    let d = points.dim();
    if n == 0 {
        return invalid("star discrepancy of an empty set");
    }
    if n > exact_budget(d) {
        return Err(Error::BudgetExceeded(format!(
            "exact star discrepancy for N = {n} in d = {d} (limit {})",
            exact_budget(d)
        )));
    }
    let axes: Vec<Axis> = (0..d).map(|j| Axis::new(points.iter().map(|p| p[j]))).collect();
    let ranks: Vec<Vec<usize>> = points
        .iter()
        .map(|p| (0..d).map(|j| axes[j].rank(p[j])).collect())
        .collect();
    let star = match d {
        1 => {
            let all: Vec<usize> = (0..n).collect();
            let open = sweep_1d(&all, &ranks, 0, &axes[0], 1.0, n, Mode::Open);
            let closed = sweep_1d(&all, &ranks, 0, &axes[0], 1.0, n, Mode::Closed);
            open.max(closed)
        }
        2 => {
            let all: Vec<usize> = (0..n).collect();
            sweep_2d(&all, &ranks, [0, 1], [&axes[0], &axes[1]], 1.0, n)
        }
        3 => sweep_3d(&ranks, &axes, n),
        _ => unreachable!("budget rejects d > 3"),
    };
    Ok(DiscrepancyReport { star_value: star.clamp(0.0, 1.0), n, method: DiscrepancyMethod::Exact })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Open,
    Closed,
}

/// Sorted distinct coordinate values of one axis followed by 1.0.
struct Axis {
    cands: Vec<f64>,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>) -> Self {
        let mut cands: Vec<f64> = values.collect();
        cands.sort_by(f64::total_cmp);
        cands.dedup();
        cands.push(1.0);
        Self { cands }
    }

    fn rank(&self, x: f64) -> usize {
        self.cands.partition_point(|&c| c < x)
    }
}

/// Max of the one-sided local discrepancy over the last axis for the subset
/// `idx`, with the other axes contributing volume `scale`.
fn sweep_1d(
    idx: &[usize],
    ranks: &[Vec<usize>],
    axis: usize,
    cand: &Axis,
    scale: f64,
    n: usize,
    mode: Mode,
) -> f64 {
    let k = cand.cands.len();
    let mut hist = vec![0usize; k];
    for &i in idx {
        hist[ranks[i][axis]] += 1;
    }
    let nf = n as f64;
    let mut best = 0.0f64;
    let mut below = 0usize;
    for (r, &u) in cand.cands.iter().enumerate() {
        let vol = scale * u;
        match mode {
            Mode::Open => best = best.max(vol - below as f64 / nf),
            Mode::Closed => best = best.max((below + hist[r]) as f64 / nf - vol),
        }
        below += hist[r];
    }
    best
}

fn sweep_2d(
    idx: &[usize],
    ranks: &[Vec<usize>],
    axes_ix: [usize; 2],
    axes: [&Axis; 2],
    scale: f64,
    n: usize,
) -> f64 {
    let [ax, ay] = axes_ix;
    let k = axes[0].cands.len();
    let mut by_rank: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &i in idx {
        by_rank[ranks[i][ax]].push(i);
    }
    let mut inside: Vec<usize> = Vec::with_capacity(idx.len());
    let mut best = 0.0f64;
    for (r, &u) in axes[0].cands.iter().enumerate() {
        // Points strictly below u on the first axis form the open subset.
        best = best.max(sweep_1d(&inside, ranks, ay, axes[1], scale * u, n, Mode::Open));
        inside.extend_from_slice(&by_rank[r]);
        best = best.max(sweep_1d(&inside, ranks, ay, axes[1], scale * u, n, Mode::Closed));
    }
    best
}

fn sweep_3d(ranks: &[Vec<usize>], axes: &[Axis], n: usize) -> f64 {
    let k = axes[0].cands.len();
    let mut by_rank: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, r) in ranks.iter().enumerate() {
        by_rank[r[0]].push(i);
    }
    let mut inside: Vec<usize> = Vec::with_capacity(n);
    let mut best = 0.0f64;
    for (r, &u) in axes[0].cands.iter().enumerate() {
        best = best.max(sweep_2d_mode(&inside, ranks, &axes[1..], u, n, Mode::Open));
        inside.extend_from_slice(&by_rank[r]);
        best = best.max(sweep_2d_mode(&inside, ranks, &axes[1..], u, n, Mode::Closed));
    }
    best
}

/// Two-axis sweep (axes 1 and 2) restricted to one side of the inequality.
fn sweep_2d_mode(idx: &[usize], ranks: &[Vec<usize>], axes: &[Axis], scale: f64, n: usize, mode: Mode) -> f64 {
    let k = axes[0].cands.len();
    let mut by_rank: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &i in idx {
        by_rank[ranks[i][1]].push(i);
    }
    let mut inside: Vec<usize> = Vec::with_capacity(idx.len());
    let mut best = 0.0f64;
    for (r, &u) in axes[0].cands.iter().enumerate() {
        if mode == Mode::Open {
            best = best.max(sweep_1d(&inside, ranks, 2, &axes[1], scale * u, n, mode));
        }
        inside.extend_from_slice(&by_rank[r]);
        if mode == Mode::Closed {
            best = best.max(sweep_1d(&inside, ranks, 2, &axes[1], scale * u, n, mode));
        }
    }
    best
}
